//! Independence tests: the three Kendall-spectrum statistics, the comparison
//! battery built on Spearman and Pearson matrices, and their null calibrations.

mod calibration;
mod stats;
mod tracy_widom;

use std::cell::OnceCell;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use calibration::{
    calibrate_q2, calibrate_q4, calibrate_qlog, calibrate_qr2, calibrate_qr_max, calibrate_qs2, calibrate_qs4,
    calibrate_qs_max, calibrate_tw1, gumbel_type_cdf, normal_upper_quantile, q4_centering, Family, NullCalibration,
    Tail,
};
pub use stats::{
    stat_q2, stat_q4, stat_qlog, stat_qr1, stat_qr2, stat_qr_max, stat_qs1, stat_qs2, stat_qs4, stat_qs_max,
    stat_qtau1,
};
pub use tracy_widom::{tw1_cdf, tw1_quantile, tw1_upper_quantile};

use crate::error::{Error, Result};
use crate::rankcorr::{kendall_matrix, pearson_matrix, spearman_matrix, CorrMatrix, DataMatrix, Flavor};
use crate::spectra::{eigvals_sym, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Statistic {
    Qtau2,
    Qtau4,
    Qtaulog,
    Qtau1,
    QS2,
    QS4,
    QSmax,
    QS1,
    QR2,
    QRmax,
    QR1,
}

impl Statistic {
    pub const ALL: [Statistic; 11] = [
        Statistic::Qtau2,
        Statistic::Qtau4,
        Statistic::Qtaulog,
        Statistic::Qtau1,
        Statistic::QS2,
        Statistic::QS4,
        Statistic::QSmax,
        Statistic::QS1,
        Statistic::QR2,
        Statistic::QRmax,
        Statistic::QR1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Qtau2 => "Qtau2",
            Statistic::Qtau4 => "Qtau4",
            Statistic::Qtaulog => "Qtaulog",
            Statistic::Qtau1 => "Qtau1",
            Statistic::QS2 => "QS2",
            Statistic::QS4 => "QS4",
            Statistic::QSmax => "QSmax",
            Statistic::QS1 => "QS1",
            Statistic::QR2 => "QR2",
            Statistic::QRmax => "QRmax",
            Statistic::QR1 => "QR1",
        }
    }

    /// The correlation matrix the statistic is computed from.
    pub fn flavor(self) -> Flavor {
        match self {
            Statistic::Qtau2 | Statistic::Qtau4 | Statistic::Qtaulog | Statistic::Qtau1 => Flavor::Kendall,
            Statistic::QS2 | Statistic::QS4 | Statistic::QSmax | Statistic::QS1 => Flavor::Spearman,
            Statistic::QR2 | Statistic::QRmax | Statistic::QR1 => Flavor::Pearson,
        }
    }

    /// Default null calibration at dimensions `(p, n)`.
    pub fn calibration(self, p: usize, n: usize) -> Result<NullCalibration> {
        match self {
            Statistic::Qtau2 => calibrate_q2(p, n),
            Statistic::Qtau4 => calibrate_q4(p, n),
            Statistic::Qtaulog => calibrate_qlog(p, n),
            Statistic::Qtau1 | Statistic::QS1 | Statistic::QR1 => Ok(calibrate_tw1()),
            Statistic::QS2 => calibrate_qs2(p, n),
            Statistic::QS4 => calibrate_qs4(p, n),
            Statistic::QSmax => Ok(calibrate_qs_max()),
            Statistic::QR2 => calibrate_qr2(p, n),
            Statistic::QRmax => calibrate_qr_max(p, n),
        }
    }

    /// Raw value from the matching correlation matrix and its spectrum.
    pub fn raw(self, matrix: &CorrMatrix, spectrum: &Spectrum, n: usize) -> Result<f64> {
        let p = matrix.dim();
        Ok(match self {
            Statistic::Qtau2 => stat_q2(spectrum),
            Statistic::Qtau4 => stat_q4(spectrum),
            Statistic::Qtaulog => stat_qlog(spectrum)?,
            Statistic::Qtau1 => stat_qtau1(spectrum, p, n),
            Statistic::QS2 => stat_qs2(spectrum, p, n),
            Statistic::QS4 => stat_qs4(spectrum, p, n),
            Statistic::QSmax => stat_qs_max(matrix, n),
            Statistic::QS1 => stat_qs1(spectrum, p, n),
            Statistic::QR2 => stat_qr2(spectrum, p, n),
            Statistic::QRmax => stat_qr_max(matrix, n),
            Statistic::QR1 => stat_qr1(spectrum, p, n),
        })
    }

    /// Parses a comma-separated list such as `Qtau2,Qtau4,Qtaulog`.
    pub fn parse_list(s: &str) -> Result<Vec<Statistic>> {
        s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect()
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Statistic::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownStatistic(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOptions {
    pub alpha: f64,
    /// Refuse to compute a statistic from a matrix of the wrong flavor.
    pub strict_flavor: bool,
    /// Replaces the weight `w` in `exp(−w(8π)^{−1/2}e^{−x/2})` for the Pearson max statistic.
    pub qr_max_weight: Option<f64>,
    pub qs_max_weight: Option<f64>,
}

impl Default for TestOptions {
    fn default() -> Self {
        Self { alpha: 0.05, strict_flavor: false, qr_max_weight: None, qs_max_weight: None }
    }
}

impl TestOptions {
    pub fn with_alpha(alpha: f64) -> Self {
        Self { alpha, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    fn calibration(&self, stat: Statistic, p: usize, n: usize) -> Result<NullCalibration> {
        let mut cal = stat.calibration(p, n)?;
        let weight = match stat {
            Statistic::QRmax => self.qr_max_weight,
            Statistic::QSmax => self.qs_max_weight,
            _ => None,
        };
        if let Some(w) = weight {
            cal.family = Family::GumbelType { weight: w };
        }
        Ok(cal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: Statistic,
    pub raw: f64,
    pub centered: f64,
    pub zscore: f64,
    pub pvalue: f64,
    pub reject: bool,
    pub alpha: f64,
    pub p: usize,
    pub n: usize,
    pub c_n: f64,
}

fn report(stat: Statistic, raw: f64, cal: &NullCalibration, p: usize, n: usize, alpha: f64) -> TestReport {
    let pvalue = cal.pvalue(raw);
    TestReport {
        name: stat,
        raw,
        centered: raw - cal.centering,
        zscore: cal.zscore(raw),
        pvalue,
        reject: pvalue < alpha,
        alpha,
        p,
        n,
        c_n: p as f64 / n as f64,
    }
}

/// Runs one test on a precomputed correlation matrix from `n` samples.
pub fn test_on_matrix(stat: Statistic, matrix: &CorrMatrix, n: usize, opts: &TestOptions) -> Result<TestReport> {
    opts.validate()?;
    if opts.strict_flavor && matrix.flavor() != stat.flavor() {
        return Err(Error::InvalidParameter(format!(
            "{stat} needs a {:?} matrix, got {:?}",
            stat.flavor(),
            matrix.flavor()
        )));
    }
    let spectrum = eigvals_sym(matrix)?;
    let p = matrix.dim();
    let raw = stat.raw(matrix, &spectrum, n)?;
    Ok(report(stat, raw, &opts.calibration(stat, p, n)?, p, n, opts.alpha))
}

/// Runs the named test on a data table.
pub fn test_statistic(name: &str, data: &DataMatrix, alpha: f64) -> Result<TestReport> {
    let stat: Statistic = name.parse()?;
    let mut battery = Battery::new(data);
    battery.run(stat, &TestOptions::with_alpha(alpha))
}

/// Raw values of every comparison statistic, keyed by statistic.
pub fn comparison_stats(data: &DataMatrix) -> Result<Vec<(Statistic, f64)>> {
    let mut battery = Battery::new(data);
    [
        Statistic::Qtau1,
        Statistic::QR1,
        Statistic::QR2,
        Statistic::QRmax,
        Statistic::QS1,
        Statistic::QS2,
        Statistic::QS4,
        Statistic::QSmax,
    ]
    .into_iter()
    .map(|st| Ok((st, battery.raw(st)?)))
    .collect()
}

struct Decomposed {
    matrix: CorrMatrix,
    spectrum: Spectrum,
}

/// Runs several tests on one data table, building each correlation matrix and
/// its spectrum at most once.
pub struct Battery<'a> {
    data: &'a DataMatrix,
    kendall: OnceCell<Decomposed>,
    spearman: OnceCell<Decomposed>,
    pearson: OnceCell<Decomposed>,
}

impl<'a> Battery<'a> {
    pub fn new(data: &'a DataMatrix) -> Self {
        Self { data, kendall: OnceCell::new(), spearman: OnceCell::new(), pearson: OnceCell::new() }
    }

    fn decomposed(&mut self, flavor: Flavor) -> Result<&Decomposed> {
        let (cell, build): (_, fn(&DataMatrix) -> Result<CorrMatrix>) = match flavor {
            Flavor::Kendall => (&self.kendall, kendall_matrix),
            Flavor::Spearman => (&self.spearman, spearman_matrix),
            Flavor::Pearson => (&self.pearson, pearson_matrix),
        };
        if cell.get().is_none() {
            let matrix = build(self.data)?;
            let spectrum = eigvals_sym(&matrix)?;
            let _ = cell.set(Decomposed { matrix, spectrum });
        }
        Ok(cell.get().expect("initialised above"))
    }

    pub fn matrix(&mut self, flavor: Flavor) -> Result<&CorrMatrix> {
        Ok(&self.decomposed(flavor)?.matrix)
    }

    pub fn spectrum(&mut self, flavor: Flavor) -> Result<&Spectrum> {
        Ok(&self.decomposed(flavor)?.spectrum)
    }

    pub fn raw(&mut self, stat: Statistic) -> Result<f64> {
        let n = self.data.n();
        let d = self.decomposed(stat.flavor())?;
        stat.raw(&d.matrix, &d.spectrum, n)
    }

    pub fn run(&mut self, stat: Statistic, opts: &TestOptions) -> Result<TestReport> {
        opts.validate()?;
        let (p, n) = (self.data.p(), self.data.n());
        let raw = self.raw(stat)?;
        Ok(report(stat, raw, &opts.calibration(stat, p, n)?, p, n, opts.alpha))
    }

    pub fn run_all(&mut self, stats: &[Statistic], opts: &TestOptions) -> Result<Vec<TestReport>> {
        stats.iter().map(|&s| self.run(s, opts)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform(p: usize, n: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DataMatrix::from_row_major(p, n, (0..p * n).map(|_| rng.random::<f64>()).collect()).unwrap()
    }

    #[test]
    fn names_roundtrip() {
        for st in Statistic::ALL {
            assert_eq!(st.name().parse::<Statistic>().unwrap(), st);
        }
        assert!(matches!("Qfoo".parse::<Statistic>(), Err(Error::UnknownStatistic(_))));
        assert_eq!(
            Statistic::parse_list("Qtau2, Qtau4,Qtaulog").unwrap(),
            vec![Statistic::Qtau2, Statistic::Qtau4, Statistic::Qtaulog]
        );
    }

    #[test]
    fn report_is_consistent() {
        let d = uniform(20, 40, 11);
        for st in Statistic::ALL {
            let r = test_statistic(st.name(), &d, 0.05).unwrap();
            assert_eq!(r.reject, r.pvalue < r.alpha);
            assert!((0.0..=1.0).contains(&r.pvalue));
            assert_eq!((r.p, r.n), (20, 40));
        }
    }

    #[test]
    fn strict_flavor_rejects_mismatch() {
        let d = uniform(10, 30, 2);
        let s = spearman_matrix(&d).unwrap();
        let strict = TestOptions { strict_flavor: true, ..TestOptions::default() };
        assert!(test_on_matrix(Statistic::QR2, &s, 30, &strict).is_err());
        assert!(test_on_matrix(Statistic::QR2, &s, 30, &TestOptions::default()).is_ok());
        assert!(test_on_matrix(Statistic::QS2, &s, 30, &strict).is_ok());
    }

    #[test]
    fn matrix_and_data_paths_agree() {
        let d = uniform(15, 30, 8);
        let k = kendall_matrix(&d).unwrap();
        let a = test_on_matrix(Statistic::Qtau4, &k, 30, &TestOptions::default()).unwrap();
        let b = test_statistic("Qtau4", &d, 0.05).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_alpha() {
        let d = uniform(5, 10, 1);
        assert!(test_statistic("Qtau2", &d, 1.5).is_err());
    }

    #[test]
    fn max_weight_override() {
        let d = uniform(10, 20, 3);
        let opts = TestOptions { qs_max_weight: Some(1e-12), ..TestOptions::default() };
        let r = Battery::new(&d).run(Statistic::QSmax, &opts).unwrap();
        assert!(r.pvalue < 1e-6);
    }

    #[test]
    fn comparison_battery_has_all_entries() {
        let d = uniform(12, 25, 5);
        let v = comparison_stats(&d).unwrap();
        assert_eq!(v.len(), 8);
        assert!(v.iter().all(|(_, x)| x.is_finite()));
    }
}
