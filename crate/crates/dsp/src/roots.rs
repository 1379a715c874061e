use num_complex::Complex64;

use crate::{DspError, Result};

const TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 500;

fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        acc = acc * z + c;
    }
    acc
}

/// All complex roots by Durand-Kerner iteration. `coeffs` are in
/// descending powers, `coeffs[0]` the (nonzero) leading coefficient.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    if coeffs.len() < 2 {
        return Err(DspError::InvalidArgument("polynomial degree must be >= 1".into()));
    }
    if coeffs[0] == 0.0 {
        return Err(DspError::InvalidArgument("leading coefficient is zero".into()));
    }
    let degree = coeffs.len() - 1;
    let monic: Vec<Complex64> = coeffs
        .iter()
        .map(|&c| Complex64::new(c / coeffs[0], 0.0))
        .collect();

    // standard non-real, non-unit-modulus starting points
    let base = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..degree).map(|k| base.powu(k as u32 + 1)).collect();

    for _ in 0..MAX_ITERATIONS {
        let mut max_step = 0.0f64;
        for i in 0..degree {
            let zi = roots[i];
            let mut denom = Complex64::new(1.0, 0.0);
            for (j, &zj) in roots.iter().enumerate() {
                if j != i {
                    denom *= zi - zj;
                }
            }
            if denom.norm() < 1e-300 {
                // coincident iterates; nudge apart
                roots[i] += Complex64::new(1e-8, 1e-8);
                max_step = f64::MAX;
                continue;
            }
            let step = eval(&monic, zi) / denom;
            roots[i] = zi - step;
            max_step = max_step.max(step.norm());
        }
        if max_step < TOLERANCE {
            return Ok(roots);
        }
    }
    let residual = roots.iter().map(|&z| eval(&monic, z).norm()).fold(0.0, f64::max);
    Err(DspError::NoConvergence { residual })
}
