//! Central finite-difference gradient checking.
//!
//! Independent of the analytic backward paths: it only evaluates a
//! scalar-valued closure at perturbed points.

#[derive(Debug, Clone, Copy)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_index: usize,
}

/// Central difference gradient of `f` at `x` with the given step.
/// `x` is restored to its original values on return.
pub fn central_diff_grad(f: &mut dyn FnMut(&[f64]) -> f64, x: &mut [f64], step: f64) -> Vec<f64> {
    let mut grad = vec![0.0; x.len()];
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + step;
        let plus = f(x);
        x[i] = orig - step;
        let minus = f(x);
        x[i] = orig;
        grad[i] = (plus - minus) / (2.0 * step);
    }
    grad
}

/// Componentwise relative error, falling back to absolute error when
/// both values are tiny.
pub fn max_rel_error(analytic: &[f64], numeric: &[f64]) -> GradCheckReport {
    assert_eq!(analytic.len(), numeric.len());
    let mut worst = 0.0f64;
    let mut worst_index = 0usize;
    for (i, (&a, &n)) in analytic.iter().zip(numeric).enumerate() {
        let scale = a.abs().max(n.abs());
        let err = if scale < 1e-10 { (a - n).abs() } else { (a - n).abs() / scale };
        if err > worst {
            worst = err;
            worst_index = i;
        }
    }
    GradCheckReport { max_rel_error: worst, worst_index }
}

/// Compares an analytic gradient against central differences of `f`.
pub fn check(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x: &mut [f64],
    analytic: &[f64],
    step: f64,
) -> GradCheckReport {
    let numeric = central_diff_grad(f, x, step);
    max_rel_error(analytic, &numeric)
}
