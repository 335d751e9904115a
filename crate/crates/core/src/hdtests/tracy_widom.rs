//! Tabulated CDF of the type-1 Tracy–Widom law.
//!
//! The table was generated by `scripts/gen_tw1_table.py` (Nyström
//! discretisation of the Fredholm determinant) on a 0.02 grid over `[-6, 8]`.

use std::sync::OnceLock;

const TABLE: &str = include_str!("../../data/tw1_cdf.csv");

struct Table {
    s: Vec<f64>,
    cdf: Vec<f64>,
}

fn table() -> &'static Table {
    static T: OnceLock<Table> = OnceLock::new();
    T.get_or_init(|| {
        let mut s = Vec::new();
        let mut cdf = Vec::new();
        for line in TABLE.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let (a, b) = line.split_once(',').expect("two columns");
            s.push(a.trim().parse().expect("numeric grid"));
            cdf.push(b.trim().parse().expect("numeric cdf"));
        }
        Table { s, cdf }
    })
}

/// `F_{TW1}(x)`, linearly interpolated; 0 left of the grid and 1 right of it.
pub fn tw1_cdf(x: f64) -> f64 {
    let t = table();
    if x <= t.s[0] {
        return 0.0;
    }
    if x >= t.s[t.s.len() - 1] {
        return 1.0;
    }
    let i = t.s.partition_point(|&v| v <= x) - 1;
    let w = (x - t.s[i]) / (t.s[i + 1] - t.s[i]);
    t.cdf[i] + w * (t.cdf[i + 1] - t.cdf[i])
}

/// `F_{TW1}^{-1}(u)` by inverse interpolation.
pub fn tw1_quantile(u: f64) -> f64 {
    let t = table();
    let u = u.clamp(t.cdf[0], t.cdf[t.cdf.len() - 1]);
    let i = t.cdf.partition_point(|&v| v < u).clamp(1, t.cdf.len() - 1);
    let (c0, c1) = (t.cdf[i - 1], t.cdf[i]);
    let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
    t.s[i - 1] + w * (t.s[i] - t.s[i - 1])
}

/// Upper-`alpha` critical value.
pub fn tw1_upper_quantile(alpha: f64) -> f64 {
    tw1_quantile(1.0 - alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_quantiles() {
        // widely tabulated values
        assert!((tw1_upper_quantile(0.10) - 0.4501).abs() < 3e-3);
        assert!((tw1_upper_quantile(0.05) - 0.9793).abs() < 3e-3);
        assert!((tw1_upper_quantile(0.01) - 2.0234).abs() < 3e-3);
    }

    #[test]
    fn mean_location() {
        // median of TW1 is about -1.27
        assert!((tw1_quantile(0.5) + 1.2686).abs() < 5e-3);
    }

    #[test]
    fn monotone_and_inverse() {
        let t = table();
        assert!(t.cdf.windows(2).all(|w| w[0] <= w[1]));
        for u in [0.2, 0.5, 0.9, 0.95, 0.99] {
            assert!((tw1_cdf(tw1_quantile(u)) - u).abs() < 1e-9);
        }
        assert_eq!(tw1_cdf(100.0), 1.0);
        assert!(tw1_cdf(-100.0) < 1e-12);
    }
}
