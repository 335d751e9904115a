use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::tracy_widom::tw1_cdf;
use crate::cltmoments::{log_ab, log_mean, log_var, q2_mean, q2_var, q4_mean, q4_var};
use crate::error::{Error, Result};
use crate::spectra::power_moment_poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    Upper,
    Lower,
}

/// Reference law of the standardised statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Normal,
    TracyWidom1,
    /// `F(x) = exp(−w·(8π)^{−1/2}·e^{−x/2})`.
    GumbelType { weight: f64 },
}

/// How to turn a raw statistic into a p-value:
/// `z = (raw − centering − mean) / sd`, then the tail probability of `family`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullCalibration {
    pub centering: f64,
    pub mean: f64,
    pub sd: f64,
    pub tail: Tail,
    pub family: Family,
}

impl NullCalibration {
    fn normal(centering: f64, mean: f64, sd: f64, tail: Tail) -> Result<Self> {
        if !(sd > 0.0 && sd.is_finite()) || !centering.is_finite() || !mean.is_finite() {
            return Err(Error::Domain(format!("invalid calibration: centering={centering}, mean={mean}, sd={sd}")));
        }
        Ok(Self { centering, mean, sd, tail, family: Family::Normal })
    }

    pub fn standard(family: Family) -> Self {
        Self { centering: 0.0, mean: 0.0, sd: 1.0, tail: Tail::Upper, family }
    }

    pub fn zscore(&self, raw: f64) -> f64 {
        (raw - self.centering - self.mean) / self.sd
    }

    /// CDF of the reference family at `z`.
    pub fn reference_cdf(&self, z: f64) -> f64 {
        match self.family {
            Family::Normal => standard_normal().cdf(z),
            Family::TracyWidom1 => tw1_cdf(z),
            Family::GumbelType { weight } => gumbel_type_cdf(z, weight),
        }
    }

    pub fn pvalue(&self, raw: f64) -> f64 {
        let z = self.zscore(raw);
        let p = match self.tail {
            Tail::Upper => match self.family {
                Family::Normal => standard_normal().sf(z),
                _ => 1.0 - self.reference_cdf(z),
            },
            Tail::Lower => self.reference_cdf(z),
        };
        p.clamp(0.0, 1.0)
    }
}

fn standard_normal() -> Normal {
    Normal::standard()
}

/// Upper-`alpha` quantile of the standard normal.
pub fn normal_upper_quantile(alpha: f64) -> f64 {
    standard_normal().inverse_cdf(1.0 - alpha)
}

pub fn gumbel_type_cdf(x: f64, weight: f64) -> f64 {
    (-weight * (8.0 * std::f64::consts::PI).powf(-0.5) * (-x / 2.0).exp()).exp()
}

fn check_dims(p: usize, n: usize) -> Result<(f64, f64, f64)> {
    if p < 2 || n < 2 {
        return Err(Error::Dimension(format!("need p >= 2 and n >= 2, got p={p}, n={n}")));
    }
    let (pf, nf) = (p as f64, n as f64);
    Ok((pf, nf, pf / nf))
}

/// Null law of `tr(K²)`.
pub fn calibrate_q2(p: usize, n: usize) -> Result<NullCalibration> {
    let (pf, nf, c) = check_dims(p, n)?;
    NullCalibration::normal(pf + 4.0 * pf * pf / (9.0 * nf), q2_mean(c), q2_var(c).sqrt(), Tail::Upper)
}

/// `p·∫x⁴ dF_{p/n}`, the exact fourth-moment centering.
pub fn q4_centering(p: usize, n: usize) -> f64 {
    let (pf, nf) = (p as f64, n as f64);
    let coef: Vec<f64> = power_moment_poly(4).iter().map(|r| num_traits::ToPrimitive::to_f64(r).unwrap()).collect();
    // coef[k]·p·(p/n)^k, kept as p^{k+1}/n^k to avoid forming c first
    coef.iter().enumerate().map(|(k, a)| a * pf.powi(k as i32 + 1) / nf.powi(k as i32)).sum()
}

/// Null law of `tr(K⁴)`.
pub fn calibrate_q4(p: usize, n: usize) -> Result<NullCalibration> {
    let (_, _, c) = check_dims(p, n)?;
    NullCalibration::normal(q4_centering(p, n), q4_mean(c), q4_var(c).sqrt(), Tail::Upper)
}

/// Null law of `log det K`; small values are evidence against independence.
pub fn calibrate_qlog(p: usize, n: usize) -> Result<NullCalibration> {
    let (pf, nf, c) = check_dims(p, n)?;
    let (a, b) = log_ab(c)?;
    let inner = a - b * c.sqrt();
    if inner <= 0.0 {
        return Err(Error::Domain(format!("a − b√(p/n) = {inner} ≤ 0")));
    }
    let centering = -(b / a) * (pf * nf).sqrt() + (pf + nf) * a.ln() - (nf - pf) * inner.ln();
    NullCalibration::normal(centering, log_mean(c)?, log_var(c)?.sqrt(), Tail::Lower)
}

pub fn calibrate_tw1() -> NullCalibration {
    NullCalibration::standard(Family::TracyWidom1)
}

/// Frobenius-type Pearson statistic: upper normal with mean `p²/n² − p/n`, sd `2p/n`.
pub fn calibrate_qr2(p: usize, n: usize) -> Result<NullCalibration> {
    let (_, _, c) = check_dims(p, n)?;
    NullCalibration::normal(0.0, c * c - c, 2.0 * c, Tail::Upper)
}

/// Frobenius-type Spearman statistic: upper normal with sd `2n/p`.
pub fn calibrate_qs2(p: usize, n: usize) -> Result<NullCalibration> {
    let (_, _, c) = check_dims(p, n)?;
    NullCalibration::normal(0.0, 0.0, 2.0 / c, Tail::Upper)
}

/// Fourth-moment Spearman statistic.
pub fn calibrate_qs4(p: usize, n: usize) -> Result<NullCalibration> {
    let (_, _, c) = check_dims(p, n)?;
    let y = 1.0 / c;
    let sd = 6.0 * y * (4.0 + 24.0 * y + 42.0 * y * y + 24.0 * y.powi(3) + 4.0 * y.powi(4)).sqrt();
    let mean = -(6.0 * c + 15.0 * c * c + 6.0 * c.powi(3));
    NullCalibration::normal(0.0, mean, sd, Tail::Upper)
}

/// Max-type Pearson statistic, normalised with `log n`; default weight `(p/n)²`.
pub fn calibrate_qr_max(p: usize, n: usize) -> Result<NullCalibration> {
    let (_, _, c) = check_dims(p, n)?;
    Ok(NullCalibration::standard(Family::GumbelType { weight: c * c }))
}

/// Max-type Spearman statistic, normalised with `log p`.
pub fn calibrate_qs_max() -> NullCalibration {
    NullCalibration::standard(Family::GumbelType { weight: 1.0 })
}
