use crate::solver::{QpProblem, SolverState};
use crate::Real;

pub const SCALAR_FEATURES: usize = 2;
pub const CONSTRAINT_FEATURES: usize = 6;

fn clamp<T: Real>(v: T, lo: f64, hi: f64) -> T {
    // NaN maps to the lower end.
    if v.is_nan() {
        return T::lit(lo);
    }
    v.max(T::lit(lo)).min(T::lit(hi))
}

fn log10_clamped<T: Real>(v: T, lo: f64, hi: f64) -> T {
    clamp(v, lo, hi).log10()
}

/// `log10` of the primal and dual residuals, each clamped to `[1e-10, 1e10]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarObservation<T> {
    pub log_xi_primal: T,
    pub log_xi_dual: T,
}

impl<T: Real> ScalarObservation<T> {
    /// Network input: both logs divided by 10, so each lies in `[-1, 1]`.
    pub fn to_input(&self) -> [T; SCALAR_FEATURES] {
        let s = T::lit(10.0);
        [self.log_xi_primal / s, self.log_xi_dual / s]
    }
}

pub fn featurize_scalar<T: Real>(state: &SolverState<T>) -> ScalarObservation<T> {
    ScalarObservation {
        log_xi_primal: log10_clamped(state.xi_primal, 1e-10, 1e10),
        log_xi_dual: log10_clamped(state.xi_dual, 1e-10, 1e10),
    }
}

/// Per-constraint features, in order:
///
/// 1. `log10 clamp(min(zᵢ − lᵢ, uᵢ − zᵢ), 1e-8, 1e6)`
/// 2. `clamp(zᵢ − (Ax)ᵢ, ±1e6)`
/// 3. `clamp(yᵢ, ±1e6)`
/// 4. `log10 clamp(ρᵢ, 1e-6, 1e6)`
/// 5. `log10 clamp(ξ_primal, 1e-6, 1e6)`
/// 6. `log10 clamp(ξ_dual, 1e-6, 1e6)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintObservation<T> {
    pub c: [T; CONSTRAINT_FEATURES],
}

impl<T: Real> ConstraintObservation<T> {
    /// Fixed affine map of each feature onto roughly `[-1, 1]`: the bound-distance log
    /// `[-8, 6]` is centred and halved-range scaled, the two linear features are divided
    /// by 1e6 and the three remaining logs by 6.
    pub fn to_input(&self) -> [T; CONSTRAINT_FEATURES] {
        let c = &self.c;
        let six = T::lit(6.0);
        let big = T::lit(1e6);
        [(c[0] + T::one()) / T::lit(7.0), c[1] / big, c[2] / big, c[3] / six, c[4] / six, c[5] / six]
    }
}

/// One observation per constraint row, in row order. Uses the cached `Ax` in `state`.
pub fn featurize_vector<T: Real>(state: &SolverState<T>, problem: &QpProblem<T>) -> Vec<ConstraintObservation<T>> {
    let c5 = log10_clamped(state.xi_primal, 1e-6, 1e6);
    let c6 = log10_clamped(state.xi_dual, 1e-6, 1e6);
    (0..problem.m())
        .map(|i| {
            let z = state.z[i];
            let slack = (z - problem.l[i]).min(problem.u[i] - z);
            ConstraintObservation {
                c: [
                    log10_clamped(slack, 1e-8, 1e6),
                    clamp(z - state.ax[i], -1e6, 1e6),
                    clamp(state.y[i], -1e6, 1e6),
                    log10_clamped(state.rho[i], 1e-6, 1e6),
                    c5,
                    c6,
                ],
            }
        })
        .collect()
}
