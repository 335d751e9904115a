use crate::error::{Error, Result};
use crate::rankcorr::CorrMatrix;
use crate::spectra::Spectrum;

/// `tr(K²) = Σλᵢ²`.
pub fn stat_q2(spec: &Spectrum) -> f64 {
    spec.linear_statistic(|l| l * l)
}

/// `tr(K⁴) = Σλᵢ⁴`.
pub fn stat_q4(spec: &Spectrum) -> f64 {
    spec.linear_statistic(|l| l.powi(4))
}

/// `log det K = Σ log λᵢ`. Fails if the matrix is singular or indefinite.
pub fn stat_qlog(spec: &Spectrum) -> Result<f64> {
    let smallest = spec.smallest();
    if smallest <= 0.0 {
        return Err(Error::NonPositiveEigenvalue { value: smallest });
    }
    Ok(spec.linear_statistic(f64::ln))
}

fn edge(p: usize, n: usize) -> (f64, f64, f64) {
    let (pf, nf) = (p as f64, n as f64);
    let c = pf / nf;
    let d_plus = (1.0 + c.sqrt()).powi(2);
    (nf, c, d_plus)
}

/// Largest Kendall eigenvalue, centred at the right edge of the limiting law
/// and scaled to Tracy–Widom fluctuations.
pub fn stat_qtau1(spec: &Spectrum, p: usize, n: usize) -> f64 {
    let (nf, c, d_plus) = edge(p, n);
    let lambda_plus = 1.0 / 3.0 + 2.0 / 3.0 * d_plus;
    1.5 * nf.powf(2.0 / 3.0) * c.powf(1.0 / 6.0) * d_plus.powf(-2.0 / 3.0) * (spec.largest() - lambda_plus)
}

pub fn stat_qs1(spec: &Spectrum, p: usize, n: usize) -> f64 {
    let (nf, c, d_plus) = edge(p, n);
    nf.powf(2.0 / 3.0) * c.powf(1.0 / 6.0) * d_plus.powf(-2.0 / 3.0) * (spec.largest() - d_plus)
}

pub fn stat_qr1(spec: &Spectrum, p: usize, n: usize) -> f64 {
    let (pf, nf) = (p as f64, n as f64);
    let s = pf.sqrt() + nf.sqrt();
    (nf * spec.largest() - s * s) / (s * (1.0 / pf.sqrt() + 1.0 / nf.sqrt()).powf(1.0 / 3.0))
}

pub fn stat_qr2(spec: &Spectrum, p: usize, n: usize) -> f64 {
    let (pf, nf) = (p as f64, n as f64);
    stat_q2(spec) - pf - pf * pf / nf
}

pub fn stat_qs2(spec: &Spectrum, p: usize, n: usize) -> f64 {
    let (pf, nf) = (p as f64, n as f64);
    nf * nf / (pf * pf) * stat_q2(spec) - nf * nf / (nf - 1.0) - nf * nf / pf + nf / pf
}

pub fn stat_qs4(spec: &Spectrum, p: usize, n: usize) -> f64 {
    let (pf, nf) = (p as f64, n as f64);
    let n4 = nf.powi(4);
    n4 / pf.powi(4) * stat_q4(spec)
        - n4 / (nf - 1.0).powi(3)
        - n4 / pf.powi(3)
        - 6.0 * n4 / ((nf - 1.0) * pf * pf)
        - 6.0 * n4 / (pf * (nf - 1.0).powi(2))
}

fn max_stat(m: &CorrMatrix, n: usize, log_of: f64) -> f64 {
    let r = m.max_abs_off_diagonal();
    n as f64 * r * r - 4.0 * log_of.ln() + log_of.ln().ln()
}

/// `n·max|R_ij|² − 4 log n + log log n`.
pub fn stat_qr_max(m: &CorrMatrix, n: usize) -> f64 {
    max_stat(m, n, n as f64)
}

/// `n·max|S_ij|² − 4 log p + log log p`.
pub fn stat_qs_max(m: &CorrMatrix, n: usize) -> f64 {
    max_stat(m, n, m.dim() as f64)
}
