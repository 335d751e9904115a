//! Kendall's tau for tie-free samples.
//!
//! The fast kernel sorts the sample by `x`, then counts the inversions left in
//! the `y` ranks with a bottom-up merge sort. The naive kernel sums
//! `sign(x_i - x_j) * sign(y_i - y_j)` over all pairs and is kept as the
//! reference implementation. Both divide the same integer numerator by the
//! same pair count, so they agree bit for bit.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Number of unordered pairs among `n` samples.
pub fn pair_count(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

fn check_lengths(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::Dimension(format!("need at least 2 samples, got {}", x.len())));
    }
    Ok(())
}

/// Dense ranks `0..n` of a tie-free sample. Errors with the tied-pair count if the
/// sample has ties; `row` is only used for the error payload.
pub fn ranks(values: &[f64], row: usize) -> Result<Vec<u32>> {
    let order = strict_order(values, row)?;
    let mut rank = vec![0u32; values.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i as usize] = r as u32;
    }
    Ok(rank)
}

/// Sorting permutation of a sample, rejecting ties.
pub(crate) fn strict_order(values: &[f64], row: usize) -> Result<Vec<u32>> {
    let order = argsort(values);
    if order.windows(2).any(|w| values[w[0] as usize] == values[w[1] as usize]) {
        return Err(Error::Ties { row, pairs: super::ties::tied_pairs(values) });
    }
    Ok(order)
}

pub(crate) fn argsort(values: &[f64]) -> Vec<u32> {
    let mut order: Vec<u32> = (0..values.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        values[a as usize].partial_cmp(&values[b as usize]).unwrap_or(Ordering::Equal)
    });
    order
}

/// Counts pairs `i < j` with `seq[i] > seq[j]`, sorting `seq` in place.
/// `scratch` must be at least as long as `seq`.
pub(crate) fn count_inversions(seq: &mut [u32], scratch: &mut [u32]) -> u64 {
    let n = seq.len();
    let scratch = &mut scratch[..n];
    let mut inversions = 0u64;
    let mut width = 1;
    let (mut src, mut dst) = (seq, scratch);
    let mut in_seq = true;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid && j < end {
                if src[i] <= src[j] {
                    dst[k] = src[i];
                    i += 1;
                } else {
                    dst[k] = src[j];
                    inversions += (mid - i) as u64;
                    j += 1;
                }
                k += 1;
            }
            dst[k..k + (mid - i)].copy_from_slice(&src[i..mid]);
            k += mid - i;
            dst[k..k + (end - j)].copy_from_slice(&src[j..end]);
            start = end;
        }
        std::mem::swap(&mut src, &mut dst);
        in_seq = !in_seq;
        width *= 2;
    }
    if !in_seq {
        dst.copy_from_slice(src);
    }
    inversions
}

/// Tau from the discordant-pair count: `(M - 2D) / M`.
pub(crate) fn tau_from_discordant(discordant: u64, n: usize) -> f64 {
    let m = pair_count(n);
    (m as i64 - 2 * discordant as i64) as f64 / m as f64
}

/// Kendall's tau via merge-sort inversion counting, `O(n log n)`.
pub fn kendall_tau_pair(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(x, y)?;
    let order = strict_order(x, 0)?;
    let rank_y = ranks(y, 1)?;
    let mut seq: Vec<u32> = order.iter().map(|&i| rank_y[i as usize]).collect();
    let mut scratch = vec![0u32; seq.len()];
    let discordant = count_inversions(&mut seq, &mut scratch);
    Ok(tau_from_discordant(discordant, x.len()))
}

/// Reference `O(n²)` kernel: the literal double sum over all pairs.
pub fn kendall_tau_naive(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(x, y)?;
    strict_order(x, 0)?;
    strict_order(y, 1)?;
    let n = x.len();
    let mut sum = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let sx = sign(x[i] - x[j]);
            let sy = sign(y[i] - y[j]);
            sum += sx * sy;
        }
    }
    Ok(sum as f64 / pair_count(n) as f64)
}

fn sign(v: f64) -> i64 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_orderings() {
        assert_eq!(kendall_tau_pair(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
    }

    #[test]
    fn reversed_orderings() {
        assert_eq!(kendall_tau_pair(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn one_discordant_pair_of_six() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 3.0, 2.0, 4.0];
        // 5 concordant, 1 discordant
        assert_eq!(kendall_tau_naive(&x, &y).unwrap(), 4.0 / 6.0);
        assert_eq!(kendall_tau_pair(&x, &y).unwrap(), 4.0 / 6.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            kendall_tau_pair(&[1.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(Error::LengthMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn strict_policy_rejects_ties() {
        let err = kendall_tau_pair(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::Ties { row: 0, pairs: 1 }));
    }

    #[test]
    fn inversion_count_small_cases() {
        let mut scratch = vec![0; 8];
        let mut s = vec![3, 2, 1, 0];
        assert_eq!(count_inversions(&mut s, &mut scratch), 6);
        assert_eq!(s, vec![0, 1, 2, 3]);
        let mut s = vec![0, 2, 1, 4, 3];
        assert_eq!(count_inversions(&mut s, &mut scratch), 2);
        let mut s = vec![0];
        assert_eq!(count_inversions(&mut s, &mut scratch), 0);
    }

    proptest! {
        #[test]
        fn fast_matches_naive(perm_x in (2usize..60).prop_flat_map(|n| {
            (Just(n), proptest::collection::vec(any::<u32>(), n), proptest::collection::vec(any::<u32>(), n))
        })) {
            let (n, kx, ky) = perm_x;
            // distinct values: index-tagged keys
            let x: Vec<f64> = (0..n).map(|i| kx[i] as f64 + i as f64 / n as f64).collect();
            let y: Vec<f64> = (0..n).map(|i| ky[i] as f64 + i as f64 / n as f64).collect();
            prop_assume!(ranks(&x, 0).is_ok() && ranks(&y, 1).is_ok());
            prop_assert_eq!(kendall_tau_pair(&x, &y).unwrap(), kendall_tau_naive(&x, &y).unwrap());
        }
    }
}
