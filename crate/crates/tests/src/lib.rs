//! Reference values for the acceptance checks, computed independently of the
//! library's own oracle.

use std::io::Write;

use chainstab_core::{
    nonlinear_comm_controller, pd_asymmetric, pd_symmetric, zero_controller, ControllerDefinition,
    Scalar, StabilityCriterion,
};

/// Magnitude of the in-window ramp response at step `n`:
/// `(t (t + dt) alpha / (2N), t alpha / N)` with `t = n dt`.
pub fn closed_form(alpha: f64, chain_size: usize, dt: f64, n: usize) -> (f64, f64) {
    let t = n as f64 * dt;
    let big_n = chain_size as f64;
    (t * (t + dt) * alpha / (2.0 * big_n), t * alpha / big_n)
}

/// `|a - b| / |b|`, absolute when `b` is zero.
pub fn rel(actual: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        (actual - expected).abs()
    } else {
        ((actual - expected) / expected).abs()
    }
}

/// Zero, PD(1, 2, 0.5), symmetric PD(1, 1) and nonlinear_comm(1, 0.5).
pub fn builtins<T: Scalar>(dt: T) -> Vec<ControllerDefinition<T>> {
    let n = |x: i64| T::from_i64(x).unwrap();
    vec![
        zero_controller(),
        pd_asymmetric(n(1), n(2), T::half(), dt.clone()),
        pd_symmetric(n(1), n(1), dt.clone()),
        nonlinear_comm_controller(n(1), T::half(), dt),
    ]
}

/// Every definition with `p, q` in `1..=3`.
pub fn all_criteria() -> Vec<StabilityCriterion> {
    let mut out = vec![StabilityCriterion::Bibo];
    for p in 1..=3 {
        out.push(StabilityCriterion::PerVehicle { p });
        for q in 1..=3 {
            out.push(StabilityCriterion::VectorDisturbance { p, q });
            out.push(StabilityCriterion::Summed { p, q });
        }
    }
    out
}

/// Prints the one-line verdict of an acceptance criterion. Writes to the
/// stdout handle directly so the line shows even when test output is captured.
pub fn report(id: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "acceptance {id} {verdict}: {detail}");
    let _ = out.flush();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_example() {
        let (e, edot) = closed_form(1.0, 50, 0.1, 10);
        assert!((e - 0.011).abs() < 1e-15);
        assert!((edot - 0.02).abs() < 1e-15);
    }

    #[test]
    fn criteria_matrix_size() {
        assert_eq!(all_criteria().len(), 1 + 3 + 18);
    }
}
