use std::fmt::Write;

use crate::solver::QpProblem;
use crate::Real;

use super::QPS_INFINITY;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Range value `r ≥ 0` near `hi - lo` minimizing `|far(r) - target|`, with that error.
fn best_range(lo: f64, hi: f64, far: impl Fn(f64) -> f64, target: f64) -> (f64, f64) {
    let r0 = hi - lo;
    let (mut down, mut up) = (r0, r0);
    let mut best = (r0, (far(r0) - target).abs());
    for _ in 0..16 {
        down = down.next_down();
        up = up.next_up();
        for r in [down, up] {
            let err = (far(r) - target).abs();
            if r >= 0.0 && err < best.1 {
                best = (r, err);
            }
        }
    }
    best
}

/// Writes a QPS document whose conversion reproduces `problem` up to the representation
/// of infinities. Variables are declared free so no bound rows are added on reading.
pub fn write_qps<T: Real>(problem: &QpProblem<T>) -> String {
    let n = problem.n();
    let m = problem.m();
    let name: String = problem.name.split_whitespace().collect::<Vec<_>>().join("_");
    let name = if name.is_empty() { "QP".to_string() } else { name };

    let l: Vec<f64> = problem.l.iter().map(|v| v.to_f64_lossy()).collect();
    let u: Vec<f64> = problem.u.iter().map(|v| v.to_f64_lossy()).collect();

    // Row type, rhs and optional range per linear row.
    let mut kinds = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut ranges = Vec::new();
    for i in 0..m {
        let (lo, hi) = (l[i], u[i]);
        if lo == hi {
            kinds.push("E");
            rhs.push(lo);
        } else if lo.is_finite() && hi.is_finite() {
            // An L row reads back as [hi - r, hi], a G row as [lo, lo + r]. Both bounds
            // are exact when some r reproduces the far one; otherwise it is within half
            // an ulp of r.
            let (r_l, err_l) = best_range(lo, hi, |r| hi - r, lo);
            let (r_g, err_g) = best_range(lo, hi, |r| lo + r, hi);
            if err_l <= err_g {
                kinds.push("L");
                rhs.push(hi);
                ranges.push((i, r_l));
            } else {
                kinds.push("G");
                rhs.push(lo);
                ranges.push((i, r_g));
            }
        } else if hi.is_finite() {
            kinds.push("L");
            rhs.push(hi);
        } else if lo.is_finite() {
            kinds.push("G");
            rhs.push(lo);
        } else {
            kinds.push("L");
            rhs.push(QPS_INFINITY);
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "NAME          {name}");
    out.push_str("ROWS\n N  OBJ\n");
    for (i, k) in kinds.iter().enumerate() {
        let _ = writeln!(out, " {k}  R{i}");
    }

    out.push_str("COLUMNS\n");
    let a = &problem.a;
    for j in 0..n {
        let qj = problem.q[j].to_f64_lossy();
        let mut wrote = false;
        if qj != 0.0 {
            let _ = writeln!(out, "    X{j}  OBJ  {}", num(qj));
            wrote = true;
        }
        for (i, v) in a.col(j) {
            let _ = writeln!(out, "    X{j}  R{i}  {}", num(v.to_f64_lossy()));
            wrote = true;
        }
        if !wrote {
            let _ = writeln!(out, "    X{j}  OBJ  {}", num(0.0));
        }
    }

    out.push_str("RHS\n");
    for (i, &b) in rhs.iter().enumerate() {
        if b != 0.0 {
            let _ = writeln!(out, "    RHS  R{i}  {}", num(b));
        }
    }
    if !ranges.is_empty() {
        out.push_str("RANGES\n");
        for (i, r) in ranges {
            let _ = writeln!(out, "    RNG  R{i}  {}", num(r));
        }
    }

    out.push_str("BOUNDS\n");
    for j in 0..n {
        let _ = writeln!(out, " FR BND  X{j}");
    }

    if problem.p.nnz() > 0 {
        out.push_str("QUADOBJ\n");
        for j in 0..n {
            for (i, v) in problem.p.col(j) {
                // Upper entry (i, j) written in lower-triangle order.
                let _ = writeln!(out, "    X{j}  X{i}  {}", num(v.to_f64_lossy()));
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}
