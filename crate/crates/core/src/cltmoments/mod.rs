//! Limiting mean and covariance of linear spectral statistics of Kendall
//! matrices, by contour integration, plus the closed forms they reduce to.

mod closed;
mod contour;

use serde::Serialize;

pub use crate::func::FunctionDescriptor;
pub use closed::{closed_form, log_ab, log_mean, log_var, q2_mean, q2_var, q4_mean, q4_var};
pub use contour::{
    lss_cov, lss_cov_at, lss_cov_detailed, lss_cov_direct_at, lss_mean, lss_mean_at, lss_mean_detailed,
    neville_at_zero, ContourConfig, Extrapolation,
};

use crate::error::Result;

/// Joint Gaussian limit of `(X_{f_1}, …, X_{f_k})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LssMoments {
    pub functions: Vec<String>,
    pub mean: Vec<f64>,
    /// Symmetric `k × k` covariance, row-major.
    pub cov: Vec<Vec<f64>>,
    pub c: f64,
    pub quadrature_points: usize,
    pub r_schedule: Vec<f64>,
}

impl LssMoments {
    pub fn var(&self, i: usize) -> f64 {
        self.cov[i][i]
    }
}

pub fn lss_moments_vector(fs: &[FunctionDescriptor], c: f64, cfg: &ContourConfig) -> Result<LssMoments> {
    let mean = fs.iter().map(|f| lss_mean(f, c, cfg)).collect::<Result<Vec<_>>>()?;
    let k = fs.len();
    let mut cov = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let v = lss_cov(&fs[i], &fs[j], c, cfg)?;
            cov[i][j] = v;
            cov[j][i] = v;
        }
    }
    Ok(LssMoments {
        functions: fs.iter().map(FunctionDescriptor::name).collect(),
        mean,
        cov,
        c,
        quadrature_points: cfg.cov_nodes,
        r_schedule: cfg.r_schedule.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn vector_matches_scalar_calls() {
        let cfg = ContourConfig::default();
        let fs = [FunctionDescriptor::Power(2), FunctionDescriptor::Power(4)];
        let m = lss_moments_vector(&fs, 0.5, &cfg).unwrap();
        for (i, f) in fs.iter().enumerate() {
            assert_eq!(m.mean[i], lss_mean(f, 0.5, &cfg).unwrap());
            assert_eq!(m.var(i), lss_cov(f, f, 0.5, &cfg).unwrap());
        }
        assert_eq!(m.cov[0][1], m.cov[1][0]);
    }

    #[test]
    fn covariance_is_psd() {
        let cfg = ContourConfig::default();
        let fs = [FunctionDescriptor::Power(2), FunctionDescriptor::Power(4), FunctionDescriptor::Log];
        let m = lss_moments_vector(&fs, 0.5, &cfg).unwrap();
        let mat = nalgebra::DMatrix::from_fn(3, 3, |i, j| m.cov[i][j]);
        let eig = mat.symmetric_eigenvalues();
        assert!(eig.iter().all(|&l| l >= -1e-8), "{eig}");
    }

    #[test]
    fn unit_ratio_log_variance() {
        let m = lss_moments_vector(&[FunctionDescriptor::Log], 1.0, &ContourConfig::default()).unwrap();
        assert_abs_diff_eq!(m.var(0), 2.0 * (4.0f64 / 3.0).ln() - 0.5, epsilon = 1e-5);
    }
}
