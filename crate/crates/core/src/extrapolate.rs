//! Small fitting helpers: Richardson tables, log-log slopes and
//! least-squares polynomials.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Richardson extrapolation of samples `values[i]` taken at step
/// `h0 / ratio^i`, for an error expansion in powers `h^p, h^{p+q}, …`.
/// Returns the final table column (a single entry for a complete table)
/// together with the previous-level estimate, so callers can judge
/// convergence by comparing them.
pub fn richardson(values: &[C64], ratio: f64, p: u32, q: u32) -> Result<(C64, C64)> {
    if values.len() < 2 {
        return Err(Error::InvalidInput("Richardson needs at least two samples".into()));
    }
    let mut table: Vec<C64> = values.to_vec();
    let mut prev_best = *values.last().unwrap();
    let mut power = p;
    while table.len() > 1 {
        prev_best = *table.last().unwrap();
        let f = ratio.powi(power as i32);
        table = table.windows(2).map(|w| (w[1] * f - w[0]) / (f - 1.0)).collect();
        power += q;
    }
    Ok((table[0], prev_best))
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidInput("slope fit needs matching samples, at least two".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput("slope fit needs positive finite samples".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("slope fit needs distinct abscissae".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    /// coefficients of 1, x, x², …
    pub coeffs: Vec<C64>,
    /// root-mean-square residual
    pub rms_residual: f64,
}

impl PolyFit {
    pub fn eval(&self, x: f64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * x + c)
    }
}

/// Least-squares polynomial of the given degree through complex samples.
pub fn polyfit(xs: &[f64], ys: &[C64], degree: usize) -> Result<PolyFit> {
    if xs.len() != ys.len() || xs.len() <= degree {
        return Err(Error::InvalidInput(format!(
            "degree-{degree} fit needs more than {degree} matching samples"
        )));
    }
    // scale the abscissa so the Vandermonde matrix stays well conditioned
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let v = DMatrix::from_fn(xs.len(), degree + 1, |i, j| C64::new((xs[i] / scale).powi(j as i32), 0.0));
    let y = DVector::from_column_slice(ys);
    let svd = v.clone().svd(true, true);
    let sol = svd
        .solve(&y, 1e-14)
        .map_err(|e| Error::InvalidInput(format!("polynomial fit failed: {e}")))?;
    let coeffs: Vec<C64> = sol.iter().enumerate().map(|(j, c)| c / scale.powi(j as i32)).collect();
    let resid = &v * &sol - &y;
    let rms_residual = (resid.norm_squared() / xs.len() as f64).sqrt();
    Ok(PolyFit { coeffs, rms_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_removes_even_powers() {
        let f = |h: f64| C64::new(2.0 + 3.0 * h * h - 5.0 * h.powi(4), h * h);
        let vals: Vec<C64> = [0.2, 0.1, 0.05].iter().map(|&h| f(h)).collect();
        let (best, prev) = richardson(&vals, 2.0, 2, 2).unwrap();
        assert!((best - C64::new(2.0, 0.0)).norm() < 1e-13);
        assert!((prev - C64::new(2.0, 0.0)).norm() < 1e-3);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [0.2, 0.1, 0.05, 0.025];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 7.0 * x.powi(4)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 4.0).abs() < 1e-12);
        assert!(loglog_slope(&xs, &[1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn cubic_fit_recovers_coefficients() {
        let xs: Vec<f64> = (0..12).map(|i| 0.1 * i as f64).collect();
        let ys: Vec<C64> = xs.iter().map(|&x| C64::new(1.0 - 2.0 * x + 0.5 * x * x * x, 3.0 * x * x)).collect();
        let fit = polyfit(&xs, &ys, 4).unwrap();
        let want = [C64::new(1.0, 0.0), C64::new(-2.0, 0.0), C64::new(0.0, 3.0), C64::new(0.5, 0.0), C64::new(0.0, 0.0)];
        for (c, w) in fit.coeffs.iter().zip(want) {
            assert!((c - w).norm() < 1e-10);
        }
        assert!(fit.rms_residual < 1e-12);
        assert!((fit.eval(0.5) - ys[5]).norm() < 1e-12);
    }
}
