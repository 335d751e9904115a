//! Monte Carlo size and power experiments.
//!
//! Replicates are the unit of parallel work. Each one draws from its own
//! stream and the per-statistic outcomes are aggregated as integer counts, so
//! results do not depend on the number of worker threads.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hdtests::{Battery, Statistic, TestOptions, TestReport};
use crate::rankcorr::Flavor;
use crate::simgen::{generate, Model, SimConfig};

/// One `(p, n, statistic)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub p: usize,
    pub n: usize,
    pub c_n: f64,
    pub statistic: Statistic,
    pub rejections: u64,
    pub rate: f64,
    pub mc_stderr: f64,
}

/// A statistic that was requested but cannot be run for the model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skipped {
    pub statistic: Statistic,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub model: Model,
    pub distribution: Model,
    pub alpha: f64,
    pub replicates: usize,
    pub seed: u64,
    pub cells: Vec<Cell>,
    pub skipped: Vec<Skipped>,
    pub wall_time_secs: f64,
}

pub const CSV_HEADER: &str = "model,distribution,p,n,statistic,alpha,replicates,rate,mc_stderr";

impl ExperimentResult {
    pub fn rate(&self, p: usize, n: usize, stat: Statistic) -> Option<f64> {
        self.cells.iter().find(|c| c.p == p && c.n == n && c.statistic == stat).map(|c| c.rate)
    }

    /// Deterministic CSV; wall time and seed are left out on purpose.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                self.model, self.distribution, c.p, c.n, c.statistic, self.alpha, self.replicates, c.rate, c.mc_stderr
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io { path: path.to_path_buf(), source };
        let mut f = std::fs::File::create(path).map_err(io)?;
        f.write_all(self.to_csv().as_bytes()).map_err(io)
    }

    fn merge(&mut self, other: ExperimentResult) {
        self.cells.extend(other.cells);
        for s in other.skipped {
            if !self.skipped.contains(&s) {
                self.skipped.push(s);
            }
        }
        self.wall_time_secs += other.wall_time_secs;
    }
}

/// Splits `stats` into runnable ones and those excluded for `cfg`. Pearson
/// statistics are excluded under Cauchy-tailed data, which has no moments.
pub fn feasible_stats(cfg: &SimConfig, stats: &[Statistic]) -> (Vec<Statistic>, Vec<Skipped>) {
    let heavy = matches!(cfg.base(), Model::II | Model::III);
    let mut run = Vec::new();
    let mut skipped = Vec::new();
    for &s in stats {
        if heavy && s.flavor() == Flavor::Pearson {
            skipped.push(Skipped {
                statistic: s,
                reason: format!("Pearson statistics are undefined for Cauchy-tailed data ({})", cfg.base()),
            });
        } else if !run.contains(&s) {
            run.push(s);
        }
    }
    (run, skipped)
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        b = b.num_threads(t);
    }
    b.build().map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))
}

/// Test reports for every replicate, in replicate order.
pub fn replicate_reports(cfg: &SimConfig, stats: &[Statistic], threads: Option<usize>) -> Result<Vec<Vec<TestReport>>> {
    cfg.validate()?;
    let opts = TestOptions::with_alpha(cfg.alpha);
    pool(threads)?.install(|| {
        (0..cfg.replicates as u64)
            .into_par_iter()
            .map(|k| {
                let data = generate(cfg, k)?;
                Battery::new(&data).run_all(stats, &opts)
            })
            .collect()
    })
}

fn run(cfg: &SimConfig, stats: &[Statistic], threads: Option<usize>) -> Result<ExperimentResult> {
    let start = Instant::now();
    let (runnable, skipped) = feasible_stats(cfg, stats);
    let reports = replicate_reports(cfg, &runnable, threads)?;
    let reps = cfg.replicates as f64;
    let cells = runnable
        .iter()
        .enumerate()
        .map(|(k, &statistic)| {
            let rejections = reports.iter().filter(|r| r[k].reject).count() as u64;
            let rate = rejections as f64 / reps;
            Cell {
                p: cfg.p,
                n: cfg.n,
                c_n: cfg.p as f64 / cfg.n as f64,
                statistic,
                rejections,
                rate,
                mc_stderr: (rate * (1.0 - rate) / reps).sqrt(),
            }
        })
        .collect();
    Ok(ExperimentResult {
        model: cfg.model,
        distribution: cfg.base(),
        alpha: cfg.alpha,
        replicates: cfg.replicates,
        seed: cfg.seed,
        cells,
        skipped,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Empirical size under a null model.
pub fn run_size(cfg: &SimConfig, stats: &[Statistic], threads: Option<usize>) -> Result<ExperimentResult> {
    if !cfg.model.is_null() {
        return Err(Error::Config(format!("run_size needs a null model, got {}", cfg.model)));
    }
    run(cfg, stats, threads)
}

/// Empirical power under model IV or V.
pub fn run_power(cfg: &SimConfig, stats: &[Statistic], threads: Option<usize>) -> Result<ExperimentResult> {
    if cfg.model.is_null() {
        return Err(Error::Config(format!("run_power needs model IV or V, got {}", cfg.model)));
    }
    run(cfg, stats, threads)
}

/// A grid of `(p, n)` cells sharing one model; the file format of `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    #[serde(default)]
    pub distribution: Option<Model>,
    /// `[p, n]` pairs.
    pub dims: Vec<[usize; 2]>,
    #[serde(default = "default_stats")]
    pub stats: Vec<Statistic>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub rho_s: Option<f64>,
    #[serde(default)]
    pub k0: Option<usize>,
    #[serde(default)]
    pub r: Option<[f64; 4]>,
}

fn default_stats() -> Vec<Statistic> {
    vec![Statistic::Qtau2, Statistic::Qtau4, Statistic::Qtaulog]
}

fn default_replicates() -> usize {
    1000
}

fn default_alpha() -> f64 {
    0.05
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    pub fn sim_configs(&self) -> Vec<SimConfig> {
        self.dims
            .iter()
            .map(|&[p, n]| SimConfig {
                model: self.model,
                distribution: self.distribution,
                p,
                n,
                rho_s: self.rho_s,
                k0: self.k0,
                r: self.r,
                seed: self.seed,
                replicates: self.replicates,
                alpha: self.alpha,
            })
            .collect()
    }
}

/// Runs every cell of the grid, size or power according to the model.
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentResult> {
    if cfg.dims.is_empty() {
        return Err(Error::Config("dims must list at least one [p, n] pair".into()));
    }
    if cfg.stats.is_empty() {
        return Err(Error::Config("stats must not be empty".into()));
    }
    let mut out: Option<ExperimentResult> = None;
    for sim in cfg.sim_configs() {
        let r = if sim.model.is_null() { run_size(&sim, &cfg.stats, threads) } else { run_power(&sim, &cfg.stats, threads) }?;
        match out.as_mut() {
            Some(acc) => acc.merge(r),
            None => out = Some(r),
        }
    }
    Ok(out.expect("dims is non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(model: Model) -> SimConfig {
        SimConfig { replicates: 6, seed: 3, ..SimConfig::new(model, 8, 12) }
    }

    #[test]
    fn single_replicate_rate_is_binary() {
        let cfg = SimConfig { replicates: 1, ..small(Model::I) };
        let r = run_size(&cfg, &[Statistic::Qtau2, Statistic::QR2], Some(1)).unwrap();
        assert!(r.cells.iter().all(|c| c.rate == 0.0 || c.rate == 1.0));
    }

    #[test]
    fn pearson_is_reported_for_cauchy_models() {
        let r = run_size(&small(Model::III), &[Statistic::Qtau2, Statistic::QR2, Statistic::QRmax], Some(1)).unwrap();
        assert_eq!(r.cells.len(), 1);
        let names: Vec<_> = r.skipped.iter().map(|s| s.statistic).collect();
        assert_eq!(names, [Statistic::QR2, Statistic::QRmax]);
        let cfg = SimConfig { distribution: Some(Model::II), ..small(Model::V) };
        assert_eq!(feasible_stats(&cfg, &[Statistic::QR1]).1.len(), 1);
        assert_eq!(feasible_stats(&small(Model::I), &[Statistic::QR1]).1.len(), 0);
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let cfg = SimConfig { k0: Some(1), ..small(Model::IV) };
        let stats = [Statistic::Qtau2, Statistic::QS4, Statistic::QRmax];
        let a = run_power(&cfg, &stats, Some(1)).unwrap();
        let b = run_power(&cfg, &stats, Some(3)).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn wrong_runner_is_rejected() {
        assert!(run_size(&small(Model::IV), &[Statistic::Qtau2], None).is_err());
        assert!(run_power(&small(Model::I), &[Statistic::Qtau2], None).is_err());
        assert!(run_size(&small(Model::I), &[Statistic::Qtau2], Some(0)).is_err());
    }

    #[test]
    fn csv_layout() {
        let cfg = ExperimentConfig::from_toml(
            "model = \"gaussian\"\ndims = [[6, 10], [10, 6]]\nstats = [\"Qtau2\", \"Qtau4\"]\nreplicates = 4\nseed = 1\n",
        )
        .unwrap();
        let r = run_experiment(&cfg, Some(1)).unwrap();
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("gaussian,gaussian,6,10,Qtau2,0.05,4,"));
        assert!(lines[4].starts_with("gaussian,gaussian,10,6,Qtau4,"));
    }

    #[test]
    fn config_errors() {
        assert!(ExperimentConfig::from_toml("model = \"I\"\ndims = [[6, 10]]\nfoo = 1\n").is_err());
        assert!(ExperimentConfig::from_toml("model = \"VI\"\ndims = [[6, 10]]\n").is_err());
        let cfg = ExperimentConfig::from_toml("model = \"I\"\ndims = []\n").unwrap();
        assert!(run_experiment(&cfg, None).is_err());
    }
}
