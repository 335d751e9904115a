//! Unit-circle contour forms of the limiting mean and covariance.
//!
//! Both integrals have poles that approach `|ξ| = 1` as the offset `r ↓ 1`, so
//! they are evaluated by the periodic trapezoid rule at a schedule of `r > 1`
//! and extrapolated (Neville) in `q = 1 − 1/r` to `q = 0`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::FunctionDescriptor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourConfig {
    pub r_schedule: Vec<f64>,
    /// Trapezoid nodes on the unit circle for the mean.
    pub nodes: usize,
    /// Trapezoid nodes on each circle of the double integral.
    pub cov_nodes: usize,
    /// Nodes on the small circle around the atom pole (`c > 1` only).
    pub pole_nodes: usize,
    /// Extrapolated values with and without the coarsest `r` must agree to
    /// `tol · max(1, |value|)`. Dropping a point lowers the extrapolation
    /// order, so this spread is a loose upper bound on the actual error.
    pub tol: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self { r_schedule: vec![1.1, 1.05, 1.025, 1.0125], nodes: 8192, cov_nodes: 4096, pole_nodes: 256, tol: 5e-3 }
    }
}

impl ContourConfig {
    fn validate(&self) -> Result<()> {
        if self.r_schedule.len() < 2 || self.r_schedule.iter().any(|&r| !(r > 1.0 && r.is_finite())) {
            return Err(Error::InvalidParameter("r_schedule needs at least two values > 1".into()));
        }
        let mut sorted = self.r_schedule.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("r_schedule values must be distinct".into()));
        }
        if self.nodes < 8 || self.cov_nodes < 8 || self.pole_nodes < 8 {
            return Err(Error::InvalidParameter("too few quadrature nodes".into()));
        }
        Ok(())
    }

    pub fn with_doubled_nodes(&self) -> Self {
        Self { nodes: self.nodes * 2, cov_nodes: self.cov_nodes * 2, pole_nodes: self.pole_nodes * 2, ..self.clone() }
    }
}

fn check_ratio(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("aspect ratio must be positive, got {c}")))
    }
}

/// Neumaier-compensated complex sum.
fn ksum(values: impl IntoIterator<Item = Complex64>) -> Complex64 {
    let (mut sr, mut cr, mut si, mut ci) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let step = |s: &mut f64, comp: &mut f64, v: f64| {
        let t = *s + v;
        if s.abs() >= v.abs() {
            *comp += (*s - t) + v;
        } else {
            *comp += (v - t) + *s;
        }
        *s = t;
    };
    for v in values {
        step(&mut sr, &mut cr, v.re);
        step(&mut si, &mut ci, v.im);
    }
    Complex64::new(sr + cr, si + ci)
}

fn unit_nodes(n: usize) -> Vec<Complex64> {
    (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)).collect()
}

/// `h(ξ) = 1/3 + (2/3)(1 + √c ξ)(1 + √c/ξ)`, real on the unit circle.
fn h_of(c: f64, xi: Complex64) -> Complex64 {
    let sc = c.sqrt();
    1.0 / 3.0 + 2.0 / 3.0 * (1.0 + sc * xi) * (1.0 + sc / xi)
}

fn h_unit(c: f64, xi: Complex64) -> Complex64 {
    Complex64::new(1.0 / 3.0 + 2.0 / 3.0 * (1.0 + c.sqrt() * xi).norm_sqr(), 0.0)
}

fn mean_kernel(c: f64, r: f64, xi: Complex64) -> Complex64 {
    let sc = c.sqrt();
    let w = sc + r * xi;
    let xi2 = xi * xi;
    1.0 / ((r * r * xi2 - 1.0) * xi) - 2.0 / (xi2 * xi) + c / (2.0 * w * w * w) + 3.0 * c / (w * xi2)
        - c * sc / (w * w * xi2)
}

/// Radius of the circle around the atom pole `−√c/r`: half the distance to the
/// nearer of the unit circle and the outer zero of `h`.
fn pole_radius(c: f64, r: f64) -> Option<f64> {
    let sc = c.sqrt();
    let pole = sc / r;
    if pole <= 1.0 {
        return None;
    }
    // ξ + 1/ξ = −(3/2 + c)/√c; the outer root
    let s = (1.5 + c) / sc;
    let outer = 0.5 * (s + (s * s - 4.0).sqrt());
    Some(0.5 * (pole - 1.0).min(outer - pole))
}

fn evaluate(f: &FunctionDescriptor, x: Complex64) -> Result<Complex64> {
    let v = f.eval(x);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NotEvaluable(format!("{} is not finite at {x}", f.name())))
    }
}

/// Trapezoid value of the mean integral at a single offset `r`.
pub fn lss_mean_at(f: &FunctionDescriptor, c: f64, r: f64, nodes: usize, pole_nodes: usize) -> Result<f64> {
    check_ratio(c)?;
    let xs = unit_nodes(nodes);
    let terms = xs
        .iter()
        .map(|&xi| Ok(evaluate(f, h_unit(c, xi))? * mean_kernel(c, r, xi) * xi))
        .collect::<Result<Vec<_>>>()?;
    let mut value = ksum(terms) / nodes as f64;
    if let Some(rho) = pole_radius(c, r) {
        let center = Complex64::new(-c.sqrt() / r, 0.0);
        let terms = unit_nodes(pole_nodes)
            .into_iter()
            .map(|w| {
                let z = center + rho * w;
                Ok(evaluate(f, h_of(c, z))? * mean_kernel(c, r, z) * rho * w)
            })
            .collect::<Result<Vec<_>>>()?;
        value += ksum(terms) / pole_nodes as f64;
    }
    Ok(value.re)
}

struct CovPrep {
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    xi: Vec<Complex64>,
}

fn cov_prep(f: &FunctionDescriptor, g: &FunctionDescriptor, c: f64, nodes: usize) -> Result<CovPrep> {
    let xi = unit_nodes(nodes);
    let mut a = Vec::with_capacity(nodes);
    let mut b = Vec::with_capacity(nodes);
    for &z in &xi {
        let x = h_unit(c, z);
        a.push(evaluate(f, x)? * z);
        b.push(evaluate(g, x)? * z);
    }
    Ok(CovPrep { a, b, xi })
}

fn cov_finish(prep: &CovPrep, double: Complex64) -> f64 {
    let n = prep.xi.len() as f64;
    let ma = ksum(prep.a.iter().zip(&prep.xi).map(|(a, x)| a / (x * x))) / n;
    let mb = ksum(prep.b.iter().zip(&prep.xi).map(|(b, x)| b / (x * x))) / n;
    // −(2πi)²/(2π²) = 2
    (2.0 * (double - ma * mb)).re
}

/// Trapezoid value of the double integral at offset `r`, via FFT convolution.
pub fn lss_cov_at(f: &FunctionDescriptor, g: &FunctionDescriptor, c: f64, r: f64, nodes: usize) -> Result<f64> {
    check_ratio(c)?;
    let prep = cov_prep(f, g, c, nodes)?;
    Ok(cov_finish(&prep, cov_double_fft(&prep, r)))
}

fn cov_double_fft(prep: &CovPrep, r: f64) -> Complex64 {
    let n = prep.xi.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd: Arc<dyn rustfft::Fft<f64>> = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    // (ξ_i − rξ_j)² = ξ_j²(ω^{i−j} − r)²; kk[m] = 1/(ω^{−m} − r)²
    let mut kk: Vec<Complex64> = (0..n)
        .map(|m| {
            let d = prep.xi[(n - m) % n] - r;
            1.0 / (d * d)
        })
        .collect();
    let mut av = prep.a.clone();
    fwd.process(&mut av);
    fwd.process(&mut kk);
    let mut conv: Vec<Complex64> = av.iter().zip(&kk).map(|(x, y)| x * y).collect();
    inv.process(&mut conv);
    let total = ksum(conv.iter().zip(&prep.b).zip(&prep.xi).map(|((s, b), x)| s / n as f64 * b / (x * x)));
    total / (n as f64 * n as f64)
}

/// Same quantity as [`lss_cov_at`] by the literal `O(N²)` double sum.
pub fn lss_cov_direct_at(f: &FunctionDescriptor, g: &FunctionDescriptor, c: f64, r: f64, nodes: usize) -> Result<f64> {
    check_ratio(c)?;
    let prep = cov_prep(f, g, c, nodes)?;
    let mut terms = Vec::with_capacity(nodes * nodes);
    for i in 0..nodes {
        for j in 0..nodes {
            let d = prep.xi[i] - r * prep.xi[j];
            terms.push(prep.a[i] * prep.b[j] / (d * d));
        }
    }
    let double = ksum(terms) / (nodes as f64 * nodes as f64);
    Ok(cov_finish(&prep, double))
}

/// Polynomial extrapolation of `(x_i, y_i)` to `x = 0`.
pub fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (-xs[i + m] * p[i] + xs[i] * p[i + 1]) / (xs[i] - xs[i + m]);
        }
    }
    p[0]
}

/// Extrapolation diagnostics for one quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolation {
    pub value: f64,
    /// `|value − value without the coarsest r|`.
    pub spread: f64,
    pub r_values: Vec<f64>,
    pub samples: Vec<f64>,
}

fn extrapolate(what: &str, cfg: &ContourConfig, mut sample: impl FnMut(f64) -> Result<f64>) -> Result<Extrapolation> {
    cfg.validate()?;
    let mut rs = cfg.r_schedule.clone();
    rs.sort_by(|a, b| b.total_cmp(a));
    let samples = rs.iter().map(|&r| sample(r)).collect::<Result<Vec<_>>>()?;
    let qs: Vec<f64> = rs.iter().map(|r| 1.0 - 1.0 / r).collect();
    let value = neville_at_zero(&qs, &samples);
    let reduced = neville_at_zero(&qs[1..], &samples[1..]);
    let spread = (value - reduced).abs();
    if !value.is_finite() || spread > cfg.tol * value.abs().max(1.0) {
        return Err(Error::NonConvergence(format!(
            "{what}: extrapolated {value:e} vs {reduced:e} without r = {}; samples {samples:?} at r = {rs:?}",
            rs[0]
        )));
    }
    Ok(Extrapolation { value, spread, r_values: rs, samples })
}

pub fn lss_mean_detailed(f: &FunctionDescriptor, c: f64, cfg: &ContourConfig) -> Result<Extrapolation> {
    check_ratio(c)?;
    extrapolate(&format!("mean of {}", f.name()), cfg, |r| lss_mean_at(f, c, r, cfg.nodes, cfg.pole_nodes))
}

pub fn lss_cov_detailed(
    f: &FunctionDescriptor,
    g: &FunctionDescriptor,
    c: f64,
    cfg: &ContourConfig,
) -> Result<Extrapolation> {
    check_ratio(c)?;
    let prep = cov_prep(f, g, c, cfg.cov_nodes)?;
    extrapolate(&format!("covariance of ({}, {})", f.name(), g.name()), cfg, |r| {
        Ok(cov_finish(&prep, cov_double_fft(&prep, r)))
    })
}

/// Limiting mean `E X_f`.
pub fn lss_mean(f: &FunctionDescriptor, c: f64, cfg: &ContourConfig) -> Result<f64> {
    lss_mean_detailed(f, c, cfg).map(|e| e.value)
}

/// Limiting covariance `Cov(X_f, X_g)`. Symmetrised over `(f, g)`.
pub fn lss_cov(f: &FunctionDescriptor, g: &FunctionDescriptor, c: f64, cfg: &ContourConfig) -> Result<f64> {
    let fg = lss_cov_detailed(f, g, c, cfg)?.value;
    if f.name() == g.name() {
        return Ok(fg);
    }
    let gf = lss_cov_detailed(g, f, c, cfg)?.value;
    Ok(0.5 * (fg + gf))
}
