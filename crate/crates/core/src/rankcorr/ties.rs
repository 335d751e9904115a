use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::DataMatrix;
use crate::error::{Error, Result};

/// What to do with tied values before computing rank statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "policy")]
pub enum TiePolicy {
    /// Refuse tied data.
    #[default]
    Strict,
    /// Break ties with seeded uniform noise of width `1e-9 * range` on rows that have ties.
    Jitter { seed: u64 },
}

/// Relative width of the tie-breaking noise.
pub const JITTER_SCALE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TieReport {
    /// Tied value pairs per variable.
    pub tied_pairs: Vec<u64>,
    /// Rows that received jitter, with the noise half-width applied.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub jittered: Vec<JitteredRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitteredRow {
    pub row: usize,
    pub magnitude: f64,
}

impl TieReport {
    pub fn has_ties(&self) -> bool {
        self.tied_pairs.iter().any(|&c| c > 0)
    }

    pub fn first_tied_row(&self) -> Option<(usize, u64)> {
        self.tied_pairs.iter().copied().enumerate().find(|&(_, c)| c > 0)
    }
}

/// Number of pairs `i < j` with `values[i] == values[j]`.
pub fn tied_pairs(values: &[f64]) -> u64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.total_cmp(b));
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

pub fn check_ties(d: &DataMatrix) -> TieReport {
    TieReport { tied_pairs: d.rows().map(tied_pairs).collect(), jittered: Vec::new() }
}

/// Returns data that satisfies the no-ties precondition under `policy`, along with
/// the tie report of the original input.
pub fn apply_tie_policy(d: &DataMatrix, policy: TiePolicy) -> Result<(DataMatrix, TieReport)> {
    let mut report = check_ties(d);
    let Some((row, pairs)) = report.first_tied_row() else {
        return Ok((d.clone(), report));
    };
    match policy {
        TiePolicy::Strict => Err(Error::Ties { row, pairs }),
        TiePolicy::Jitter { seed } => {
            let mut out = d.clone();
            for (k, &count) in report.tied_pairs.iter().enumerate() {
                if count == 0 {
                    continue;
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                let values = out.row_mut_unchecked(k);
                let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
                let range = if hi > lo { hi - lo } else { lo.abs().max(1.0) };
                let magnitude = JITTER_SCALE * range;
                for v in values.iter_mut() {
                    *v += magnitude * (rng.random::<f64>() - 0.5);
                }
                report.jittered.push(JitteredRow { row: k, magnitude });
            }
            let after = check_ties(&out);
            if let Some((row, pairs)) = after.first_tied_row() {
                return Err(Error::Ties { row, pairs });
            }
            Ok((out, report))
        }
    }
}
