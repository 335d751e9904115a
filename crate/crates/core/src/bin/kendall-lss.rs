use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use kendall_lss::cltmoments::{closed_form, lss_moments_vector, ContourConfig};
use kendall_lss::harness::{run_experiment, ExperimentConfig};
use kendall_lss::hdtests::{Battery, Statistic, TestOptions};
use kendall_lss::oracle::{build_t, verify_cov_structure, verify_quadratic_identity};
use kendall_lss::rankcorr::{kendall_matrix, load_data, Orientation};
use kendall_lss::spectra::eigvals_sym;
use kendall_lss::{Error, FunctionDescriptor, Result};

#[derive(Parser)]
#[command(name = "kendall-lss", version, about = "Kendall rank correlation spectra and independence tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the Kendall correlation matrix of a CSV table.
    TauMatrix {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// `rows` if each row is a variable, `cols` if each column is.
        #[arg(long, default_value = "rows")]
        orientation: Orientation,
        /// Also write the eigenvalues, largest first.
        #[arg(long)]
        spectrum: Option<PathBuf>,
    },
    /// Run independence tests and print their reports as JSON.
    Test {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "Qtau2,Qtau4,Qtaulog")]
        stats: String,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value = "rows")]
        orientation: Orientation,
    },
    /// Run a Monte Carlo size or power experiment from a TOML config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Limiting mean and variance of a linear spectral statistic.
    LssMoments {
        /// `x`, `x2`, `x4`, `xK` or `log`.
        #[arg(long = "f")]
        function: String,
        #[arg(long)]
        c: f64,
    },
    /// Check the sign-vector identities by exhaustive enumeration.
    VerifyOracles {
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Random symmetric pairs for the quadratic check.
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn tau_matrix(input: PathBuf, output: PathBuf, orientation: Orientation, spectrum: Option<PathBuf>) -> Result<u8> {
    let data = load_data(&input, orientation)?;
    let k = kendall_matrix(&data)?;
    k.write_csv(&output)?;
    if let Some(path) = spectrum {
        let s = eigvals_sym(&k)?;
        std::fs::write(&path, s.to_csv()).map_err(|source| Error::Io { path, source })?;
    }
    Ok(0)
}

fn test(input: PathBuf, stats: &str, alpha: f64, orientation: Orientation) -> Result<u8> {
    let data = load_data(&input, orientation)?;
    let stats = Statistic::parse_list(stats)?;
    let reports = Battery::new(&data).run_all(&stats, &TestOptions::with_alpha(alpha))?;
    println!("{}", serde_json::to_string_pretty(&reports).expect("reports serialise"));
    Ok(0)
}

fn simulate(
    config: PathBuf,
    output: Option<PathBuf>,
    threads: Option<usize>,
    seed: Option<u64>,
    alpha: Option<f64>,
) -> Result<u8> {
    let mut cfg = ExperimentConfig::load(&config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(a) = alpha {
        cfg.alpha = a;
    }
    let result = run_experiment(&cfg, threads)?;
    for s in &result.skipped {
        eprintln!("{}", json!({ "skipped": s.statistic, "reason": s.reason }));
    }
    match output {
        Some(path) => result.write_csv(&path)?,
        None => print!("{}", result.to_csv()),
    }
    Ok(0)
}

fn lss_moments(function: &str, c: f64) -> Result<u8> {
    let f = FunctionDescriptor::parse(function)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown function `{function}`; use x, x2, x4, xK or log")))?;
    let m = lss_moments_vector(std::slice::from_ref(&f), c, &ContourConfig::default())?;
    let (mean, var) = (m.mean[0], m.var(0));
    let closed = closed_form(&f, c).transpose()?;
    let out = json!({
        "function": f.name(),
        "c": c,
        "mean": mean,
        "var": var,
        "closed_form": closed.map(|(m, v)| json!({ "mean": m, "var": v })),
        "abs_diff": closed.map(|(cm, cv)| json!({ "mean": (mean - cm).abs(), "var": (var - cv).abs() })),
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("json serialises"));
    Ok(0)
}

fn random_symmetric(m: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let x = DMatrix::from_fn(m, m, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    (&x + x.transpose()) * 0.5
}

const QUADRATIC_TOL: f64 = 1e-10;

fn verify_oracles(n: usize, pairs: usize, seed: u64) -> Result<u8> {
    let s = build_t(n)?;
    let mut rows: Vec<(String, f64, bool)> = vec![(format!("(TT')^2 = n TT' (n={n})"), 0.0, true)];
    let cov = verify_cov_structure(n)?;
    rows.push(("E vv' = (T'T + I)/3M, exact".into(), cov.exact_deviation, cov.exact_deviation == 0.0));
    rows.push(("E vv' = (T'T + I)/3M, float".into(), cov.float_deviation, cov.float_deviation < 1e-12));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let a = random_symmetric(s.m(), &mut rng);
        let b = random_symmetric(s.m(), &mut rng);
        worst = worst.max(verify_quadratic_identity(n, &a, &b)?.deviation);
    }
    rows.push((format!("quadratic covariance expansion ({pairs} pairs)"), worst, worst < QUADRATIC_TOL));
    println!("{:<48} {:>12} status", "check", "deviation");
    for (name, dev, ok) in &rows {
        println!("{name:<48} {dev:>12.3e} {}", if *ok { "PASS" } else { "FAIL" });
    }
    Ok(if rows.iter().all(|r| r.2) { 0 } else { 3 })
}

fn error_payload(kind: &str, message: &str) -> String {
    json!({ "error": { "kind": kind, "message": message } }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", error_payload("usage", e.to_string().trim()));
            return ExitCode::from(2);
        }
    };
    let outcome = match cli.command {
        Command::TauMatrix { input, output, orientation, spectrum } => tau_matrix(input, output, orientation, spectrum),
        Command::Test { input, stats, alpha, orientation } => test(input, &stats, alpha, orientation),
        Command::Simulate { config, output, threads, seed, alpha } => simulate(config, output, threads, seed, alpha),
        Command::LssMoments { function, c } => lss_moments(&function, c),
        Command::VerifyOracles { n, pairs, seed } => verify_oracles(n, pairs, seed),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", error_payload(e.kind(), &e.to_string()));
            ExitCode::FAILURE
        }
    }
}
