use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::DataMatrix;
use super::kendall::{count_inversions, pair_count, ranks, tau_from_discordant};
use super::ties::{apply_tie_policy, TiePolicy, TieReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Kendall,
    Spearman,
    Pearson,
}

/// Tolerance on `|a_ij - a_ji|` accepted by [`CorrMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A symmetric `p × p` correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrMatrix {
    entries: DMatrix<f64>,
    flavor: Flavor,
}

impl CorrMatrix {
    pub fn new(entries: DMatrix<f64>, flavor: Flavor) -> Result<Self> {
        if !entries.is_square() || entries.nrows() < 1 {
            return Err(Error::Dimension(format!(
                "correlation matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let p = entries.nrows();
        let mut asym = 0.0f64;
        for i in 0..p {
            if entries[(i, i)] != 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "diagonal entry {i} is {} instead of 1",
                    entries[(i, i)]
                )));
            }
            for j in 0..i {
                asym = asym.max((entries[(i, j)] - entries[(j, i)]).abs());
            }
        }
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        if let Some(v) = entries.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("entry {v} outside [-1, 1]")));
        }
        Ok(Self { entries, flavor })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Largest `|a_ij|` over `i < j`.
    pub fn max_abs_off_diagonal(&self) -> f64 {
        let p = self.dim();
        let mut best = 0.0f64;
        for j in 0..p {
            for i in 0..j {
                best = best.max(self.entries[(i, j)].abs());
            }
        }
        best
    }

    /// Full symmetric matrix as CSV, 17 significant digits per entry.
    pub fn to_csv(&self) -> String {
        let p = self.dim();
        let mut out = String::with_capacity(p * p * 24);
        for i in 0..p {
            for j in 0..p {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{:.16e}", self.entries[(i, j)]).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|source| Error::Io { path: path.to_path_buf(), source })
    }
}

/// Upper-triangle pairs `(k, l)`, `k < l`, in row-major order.
pub(crate) fn upper_pairs(p: usize) -> Vec<(u32, u32)> {
    let mut pairs = Vec::with_capacity(p * (p - 1) / 2);
    for k in 0..p as u32 {
        for l in k + 1..p as u32 {
            pairs.push((k, l));
        }
    }
    pairs
}

fn assemble(p: usize, pairs: &[(u32, u32)], values: &[f64], flavor: Flavor) -> Result<CorrMatrix> {
    let mut m = DMatrix::<f64>::identity(p, p);
    for (&(k, l), &v) in pairs.iter().zip(values) {
        let v = v.clamp(-1.0, 1.0);
        m[(k as usize, l as usize)] = v;
        m[(l as usize, k as usize)] = v;
    }
    CorrMatrix::new(m, flavor)
}

/// Above this many bytes of packed pair signs the matrix falls back to
/// per-pair merge sorts.
const SIGN_BITS_BUDGET: usize = 512 << 20;

/// Kendall's rank correlation matrix under the strict (no ties) policy.
///
/// Each row is packed into one bit per sample pair, set when the pair is
/// discordant with the sample order. The discordant count of two rows is then
/// the popcount of their XOR, the same integer the merge-sort kernel finds.
pub fn kendall_matrix(d: &DataMatrix) -> Result<CorrMatrix> {
    let rank_of = d.rows().enumerate().map(|(k, row)| ranks(row, k)).collect::<Result<Vec<_>>>()?;
    let n = d.n();
    let words = (pair_count(n) as usize).div_ceil(64);
    let pairs = upper_pairs(d.p());
    let values = if d.p() * words * 8 <= SIGN_BITS_BUDGET {
        kendall_values_bits(&rank_of, &pairs, n)
    } else {
        kendall_values_merge(&rank_of, &pairs, n)
    };
    assemble(d.p(), &pairs, &values, Flavor::Kendall)
}

fn sign_bits(rank: &[u32]) -> Vec<u64> {
    let n = rank.len();
    let mut bits = vec![0u64; (pair_count(n) as usize).div_ceil(64)];
    let mut k = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            bits[k / 64] |= u64::from(rank[i] > rank[j]) << (k % 64);
            k += 1;
        }
    }
    bits
}

fn xor_popcount_portable(a: &[u64], b: &[u64]) -> u64 {
    a.iter().zip(b).map(|(x, y)| u64::from((x ^ y).count_ones())).sum()
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "popcnt")]
fn xor_popcount_hw(a: &[u64], b: &[u64]) -> u64 {
    xor_popcount_portable(a, b)
}

fn xor_popcount(a: &[u64], b: &[u64]) -> u64 {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("popcnt") {
        // SAFETY: the CPU supports popcnt, checked just above.
        return unsafe { xor_popcount_hw(a, b) };
    }
    xor_popcount_portable(a, b)
}

fn kendall_values_bits(rank_of: &[Vec<u32>], pairs: &[(u32, u32)], n: usize) -> Vec<f64> {
    let bits: Vec<Vec<u64>> = rank_of.par_iter().map(|r| sign_bits(r)).collect();
    pairs
        .par_iter()
        .map(|&(k, l)| tau_from_discordant(xor_popcount(&bits[k as usize], &bits[l as usize]), n))
        .collect()
}

fn kendall_values_merge(rank_of: &[Vec<u32>], pairs: &[(u32, u32)], n: usize) -> Vec<f64> {
    let orders: Vec<Vec<u32>> = rank_of
        .iter()
        .map(|rank| {
            let mut order = vec![0u32; n];
            for (i, &r) in rank.iter().enumerate() {
                order[r as usize] = i as u32;
            }
            order
        })
        .collect();
    pairs
        .par_iter()
        .map_init(
            || (vec![0u32; n], vec![0u32; n]),
            |(seq, scratch), &(k, l)| {
                let rank_l = &rank_of[l as usize];
                for (s, &i) in seq.iter_mut().zip(&orders[k as usize]) {
                    *s = rank_l[i as usize];
                }
                tau_from_discordant(count_inversions(seq, scratch), n)
            },
        )
        .collect()
}

/// Kendall matrix after applying a tie policy; also returns the tie report.
pub fn kendall_matrix_with(d: &DataMatrix, policy: TiePolicy) -> Result<(CorrMatrix, TieReport)> {
    let (clean, report) = apply_tie_policy(d, policy)?;
    Ok((kendall_matrix(&clean)?, report))
}

/// Spearman's matrix: Pearson correlation of within-row ranks `1..=n`.
///
/// With distinct ranks every row has mean `(n+1)/2` and sum of squares
/// `n(n²-1)/12`, so `s_kl = (12 Σ r_k r_l - 3n(n+1)²) / (n(n²-1))` with an exact
/// integer numerator.
pub fn spearman_matrix(d: &DataMatrix) -> Result<CorrMatrix> {
    let ranked = d
        .rows()
        .enumerate()
        .map(|(k, row)| ranks(row, k).map(|r| r.into_iter().map(|v| v as i64 + 1).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let n = d.n() as i128;
    let offset = 3 * n * (n + 1) * (n + 1);
    let denom = (n * (n * n - 1)) as f64;
    let pairs = upper_pairs(d.p());
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(k, l)| {
            let dot: i64 = ranked[k as usize].iter().zip(&ranked[l as usize]).map(|(a, b)| a * b).sum();
            (12 * dot as i128 - offset) as f64 / denom
        })
        .collect();
    assemble(d.p(), &pairs, &values, Flavor::Spearman)
}

pub fn spearman_matrix_with(d: &DataMatrix, policy: TiePolicy) -> Result<(CorrMatrix, TieReport)> {
    let (clean, report) = apply_tie_policy(d, policy)?;
    Ok((spearman_matrix(&clean)?, report))
}

/// Sample (Pearson) correlation matrix, two-pass centring.
pub fn pearson_matrix(d: &DataMatrix) -> Result<CorrMatrix> {
    let n = d.n() as f64;
    let standardized = d
        .rows()
        .enumerate()
        .map(|(k, row)| {
            let mean = row.iter().sum::<f64>() / n;
            let centered: Vec<f64> = row.iter().map(|v| v - mean).collect();
            let norm = centered.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::ZeroVariance { row: k });
            }
            Ok(centered.into_iter().map(|v| v / norm).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs = upper_pairs(d.p());
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(k, l)| standardized[k as usize].iter().zip(&standardized[l as usize]).map(|(a, b)| a * b).sum())
        .collect();
    assemble(d.p(), &pairs, &values, Flavor::Pearson)
}
