//! Ordinary least squares on a straight line.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    /// Root-mean-square of the residuals `y - (slope x + intercept)`.
    pub rms_residual: f64,
    pub points: usize,
}

/// Fits `y = slope x + intercept`; needs at least three points with distinct `x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("ys", "x and y lengths differ"));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::fit(format!("need at least 3 points, got {n}")));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::fit("non-finite input"));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::fit("all x values coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let sigma2 = ssr / (nf - 2.0);
    let slope_stderr = (sigma2 / sxx).sqrt();
    let intercept_stderr = (sigma2 * (1.0 / nf + mx * mx / sxx)).sqrt();
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr,
        intercept_stderr,
        rms_residual: (ssr / nf).sqrt(),
        points: n,
    })
}
