use crate::linalg::LdlFactor;
use crate::{norm_inf, Real};

use super::{QpProblem, SolverSettings, SolverState, Status};

/// Residuals below this are replaced by it before taking their ratio.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

/// ρ vector from a scalar: ρ̄ on inequality rows, ρ̄·`scale` on equality rows, clamped.
pub fn rho_from_scalar<T: Real>(rho_bar: T, l: &[T], u: &[T], scale: T, bounds: (T, T)) -> Vec<T> {
    l.iter()
        .zip(u)
        .map(|(&lo, &hi)| {
            let r = if lo == hi { rho_bar * scale } else { rho_bar };
            r.max(bounds.0).min(bounds.1)
        })
        .collect()
}

/// Residual-balancing update `ρ̄ · sqrt(ξ_primal / ξ_dual)`, clamped to `bounds`.
pub fn heuristic_rho_update<T: Real>(state: &SolverState<T>, bounds: (T, T)) -> T {
    let floor = T::lit(RESIDUAL_FLOOR);
    let p = state.xi_primal.max(floor);
    let d = state.xi_dual.max(floor);
    let r = state.rho_bar * (p / d).sqrt();
    if r.is_nan() {
        return state.rho_bar.max(bounds.0).min(bounds.1);
    }
    r.max(bounds.0).min(bounds.1)
}

/// Scratch space for [`admm_iterate`].
#[derive(Debug, Clone, Default)]
pub struct AdmmWork<T> {
    rhs: Vec<T>,
}

impl<T: Real> AdmmWork<T> {
    pub fn new(n: usize, m: usize) -> Self {
        Self { rhs: vec![T::zero(); n + m] }
    }
}

/// One ADMM iteration.
///
/// Solves `[[P+σI, Aᵀ], [A, -diag(ρ)⁻¹]] [x; v] = [σx - q; z - diag(ρ)⁻¹y]`, then
/// `z̃ = z + (v - y)/ρ`, `z = Π(z̃ + y/ρ)`, `y = y + ρ(z̃ - z)`.
/// `factor` must have been computed with the ρ stored in `state`.
pub fn admm_iterate<T: Real>(
    state: &mut SolverState<T>,
    problem: &QpProblem<T>,
    factor: &LdlFactor<T>,
    sigma: T,
    work: &mut AdmmWork<T>,
) {
    let n = problem.n();
    let m = problem.m();
    debug_assert_eq!(factor.dim(), n + m, "factor does not match the problem");
    work.rhs.resize(n + m, T::zero());
    for j in 0..n {
        work.rhs[j] = sigma * state.x[j] - problem.q[j];
    }
    for i in 0..m {
        work.rhs[n + i] = state.z[i] - state.y[i] / state.rho[i];
    }
    let sol = factor.solve(&work.rhs).expect("rhs length matches the factor");
    state.x.copy_from_slice(&sol[..n]);
    for i in 0..m {
        let rho = state.rho[i];
        let v = sol[n + i];
        let z_tilde = state.z[i] + (v - state.y[i]) / rho;
        let z_new = (z_tilde + state.y[i] / rho).max(problem.l[i]).min(problem.u[i]);
        state.y[i] += rho * (z_tilde - z_new);
        state.z[i] = z_new;
    }
    problem.a.mul_vec_into(&state.x, &mut state.ax);
    state.iter += 1;
}

/// Norms entering the residuals and the relative termination thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualTerms<T> {
    pub primal: T,
    pub dual: T,
    pub ax: T,
    pub z: T,
    pub px: T,
    pub q: T,
    pub aty: T,
}

pub fn residual_terms<T: Real>(state: &SolverState<T>, problem: &QpProblem<T>) -> ResidualTerms<T> {
    let ax = problem.a.mul_vec(&state.x);
    let px = problem.p.sym_upper_mul_vec(&state.x);
    let aty = problem.a.tr_mul_vec(&state.y);
    let r_prim: Vec<T> = ax.iter().zip(&state.z).map(|(&a, &z)| a - z).collect();
    let r_dual: Vec<T> = (0..problem.n()).map(|j| px[j] + problem.q[j] + aty[j]).collect();
    let (primal, dual) = (norm_inf(&r_prim), norm_inf(&r_dual));
    ResidualTerms {
        primal,
        dual,
        ax: norm_inf(&ax),
        z: norm_inf(&state.z),
        px: norm_inf(&px),
        q: norm_inf(&problem.q),
        aty: norm_inf(&aty),
    }
}

/// `(‖Ax - z‖∞, ‖Px + q + Aᵀy‖∞)`.
pub fn compute_residuals<T: Real>(state: &SolverState<T>, problem: &QpProblem<T>) -> (T, T) {
    let t = residual_terms(state, problem);
    (t.primal, t.dual)
}

/// Termination test on the current iterate. Time limits are the caller's concern.
pub fn check_termination<T: Real>(state: &SolverState<T>, settings: &SolverSettings<T>, problem: &QpProblem<T>) -> Status {
    let t = residual_terms(state, problem);
    if !t.primal.is_finite() || !t.dual.is_finite() {
        return Status::NonConvergent;
    }
    let eps_primal = settings.eps_abs + settings.eps_rel * t.ax.max(t.z);
    let eps_dual = settings.eps_abs + settings.eps_rel * t.px.max(t.q).max(t.aty);
    if t.primal <= eps_primal && t.dual <= eps_dual {
        Status::Solved
    } else if state.iter >= settings.max_iter {
        Status::IterationLimit
    } else {
        Status::Running
    }
}
