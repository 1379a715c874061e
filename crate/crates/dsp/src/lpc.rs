use crate::{DspError, Result};

/// Prediction polynomial A(z) = 1 + a1 z^-1 + ... + ap z^-p plus the
/// residual energy of the fit.
#[derive(Debug, Clone, PartialEq)]
pub struct LpcFrame {
    /// coefficients[0] is always 1.
    pub coefficients: Vec<f64>,
    pub gain: f64,
    pub order: usize,
}

/// w[n] = 0.54 - 0.46 cos(2 pi n / (N-1))
pub fn hamming_window(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(DspError::InvalidArgument(format!("window length {n} < 2")));
    }
    Ok((0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
        .collect())
}

/// All-pole high-frequency boost 1/(1 + 0.63 z^-1):
/// y[n] = x[n] - 0.63 y[n-1], zero initial state.
pub fn pre_emphasis(x: &[f64]) -> Vec<f64> {
    let mut y = Vec::with_capacity(x.len());
    let mut prev = 0.0;
    for &v in x {
        let out = v - 0.63 * prev;
        y.push(out);
        prev = out;
    }
    y
}

/// r[k] = sum_n x[n] x[n+k] for k in 0..=max_lag.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag >= x.len() {
        return Err(DspError::InvalidArgument(format!(
            "max lag {max_lag} >= signal length {}",
            x.len()
        )));
    }
    let mut r = vec![0.0; max_lag + 1];
    for (k, rk) in r.iter_mut().enumerate() {
        *rk = x[..x.len() - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum();
    }
    Ok(r)
}

/// Solves the Toeplitz normal equations of the autocorrelation method
/// recursively.
pub fn levinson_durbin(r: &[f64], order: usize) -> Result<LpcFrame> {
    if order == 0 || order >= r.len() {
        return Err(DspError::InvalidArgument(format!(
            "order {order} needs lags 0..={order}, got {}",
            r.len().saturating_sub(1)
        )));
    }
    if r[0] <= 0.0 {
        return Err(DspError::NotPositiveDefinite(format!("r[0] = {} <= 0", r[0])));
    }
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut energy = r[0];
    for m in 1..=order {
        let mut acc = r[m];
        for i in 1..m {
            acc += a[i] * r[m - i];
        }
        let k = -acc / energy;
        // update a[1..=m] in place using the symmetric recursion
        let prev = a.clone();
        a[m] = k;
        for i in 1..m {
            a[i] = prev[i] + k * prev[m - i];
        }
        energy *= 1.0 - k * k;
        if energy <= 0.0 {
            return Err(DspError::NotPositiveDefinite(format!(
                "residual energy became {energy:e} at order {m}"
            )));
        }
    }
    Ok(LpcFrame { coefficients: a, gain: energy, order })
}
