use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rankcorr::{CorrMatrix, SYMMETRY_TOL};

/// Eigenvalues of a symmetric matrix, largest first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    /// Sorts `values` into descending order. Errors on non-finite entries.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("empty spectrum".into()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { line: pos + 1, column: 1 });
        }
        values.sort_unstable_by(|a, b| b.total_cmp(a));
        Ok(Self { eigenvalues: values })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn smallest(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `Σ f(λᵢ)`, summed in ascending-magnitude order.
    pub fn linear_statistic(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.eigenvalues.iter().rev().map(|&l| f(l)).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue\n");
        for (i, l) in self.eigenvalues.iter().enumerate() {
            out.push_str(&format!("{},{:.16e}\n", i + 1, l));
        }
        out
    }
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", m.nrows(), m.ncols())));
    }
    let scale = m.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if worst > SYMMETRY_TOL * scale || worst.is_nan() {
        return Err(Error::NotSymmetric(worst));
    }
    Ok(())
}

/// Full spectrum of a correlation matrix.
pub fn eigvals_sym(m: &CorrMatrix) -> Result<Spectrum> {
    eigvals_sym_dense(m.entries())
}

pub fn eigvals_sym_dense(m: &DMatrix<f64>) -> Result<Spectrum> {
    check_symmetric(m)?;
    let values = m.clone().symmetric_eigenvalues();
    Spectrum::from_unsorted(values.iter().copied().collect())
}

/// Spectrum together with orthonormal eigenvectors, column `i` belonging to the
/// `i`-th largest eigenvalue.
pub fn eigen_sym(m: &DMatrix<f64>) -> Result<(Spectrum, DMatrix<f64>)> {
    check_symmetric(m)?;
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_unstable_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| eig.eigenvectors[(i, order[j])]);
    let spectrum = Spectrum::from_unsorted(order.iter().map(|&i| eig.eigenvalues[i]).collect())?;
    Ok((spectrum, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rankcorr::{kendall_matrix, DataMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_kendall(p: usize, n: usize, seed: u64) -> CorrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<f64> = (0..p * n).map(|_| rng.random::<f64>()).collect();
        kendall_matrix(&DataMatrix::from_row_major(p, n, vals).unwrap()).unwrap()
    }

    #[test]
    fn identity_spectrum() {
        let s = eigvals_sym_dense(&DMatrix::identity(5, 5)).unwrap();
        assert_eq!(s.eigenvalues(), &[1.0; 5]);
    }

    #[test]
    fn two_by_two_rank_one() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let s = eigvals_sym_dense(&m).unwrap();
        assert!((s.eigenvalues()[0] - 2.0).abs() < 1e-14);
        assert!(s.eigenvalues()[1].abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(eigvals_sym_dense(&m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn trace_and_psd_on_kendall() {
        let k = random_kendall(50, 80, 3);
        let s = eigvals_sym(&k).unwrap();
        assert!((s.eigenvalues().iter().sum::<f64>() - 50.0).abs() < 1e-8);
        assert!(s.smallest() >= -1e-10 * 50.0);
        assert!(s.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn psd_when_wide() {
        // p > n: rank deficient but still PSD
        let k = random_kendall(60, 20, 9);
        let s = eigvals_sym(&k).unwrap();
        assert!(s.smallest() >= -1e-10 * 60.0);
    }

    #[test]
    fn reconstruction_residual() {
        let k = random_kendall(40, 60, 5);
        let (s, q) = eigen_sym(k.entries()).unwrap();
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(s.eigenvalues()));
        let back = &q * lambda * q.transpose();
        let rel = (back - k.entries()).norm() / k.entries().norm();
        assert!(rel < 1e-10, "{rel}");
    }
}
