//! Seeded generators for the null and alternative simulation models.
//!
//! Every replicate draws from its own ChaCha stream, selected by
//! `(seed, replicate_index)`, so output never depends on scheduling.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Gamma, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rankcorr::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    /// iid standard normal entries.
    #[serde(rename = "gaussian", alias = "Gaussian")]
    Gaussian,
    /// Gamma(4, 0.5) in the top half of the rows, t(5) below.
    I,
    /// Cauchy(0, 1) in the top half, t(5) below.
    II,
    /// Cauchy(0, 1) throughout.
    III,
    /// Banded Toeplitz mixing of a null matrix.
    IV,
    /// Squared neighbouring rows plus Gaussian noise.
    V,
}

impl Model {
    pub fn is_null(self) -> bool {
        matches!(self, Model::Gaussian | Model::I | Model::II | Model::III)
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Gaussian => "gaussian",
            Model::I => "I",
            Model::II => "II",
            Model::III => "III",
            Model::IV => "IV",
            Model::V => "V",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gaussian" | "Gaussian" | "normal" => Model::Gaussian,
            "I" | "1" => Model::I,
            "II" | "2" => Model::II,
            "III" | "3" => Model::III,
            "IV" | "4" => Model::IV,
            "V" | "5" => Model::V,
            other => return Err(Error::Config(format!("unknown model `{other}`"))),
        })
    }
}

/// Simulation settings for one `(p, n)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub model: Model,
    /// Law of the underlying null matrix for models IV and V; must itself be a
    /// null model. Ignored for null models.
    #[serde(default)]
    pub distribution: Option<Model>,
    pub p: usize,
    pub n: usize,
    #[serde(default)]
    pub rho_s: Option<f64>,
    #[serde(default)]
    pub k0: Option<usize>,
    /// `(r1, r2, r3, r4)` for model V.
    #[serde(default)]
    pub r: Option<[f64; 4]>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_replicates() -> usize {
    1000
}

fn default_alpha() -> f64 {
    0.05
}

impl SimConfig {
    pub fn new(model: Model, p: usize, n: usize) -> Self {
        Self {
            model,
            distribution: None,
            p,
            n,
            rho_s: None,
            k0: None,
            r: None,
            seed: 0,
            replicates: default_replicates(),
            alpha: default_alpha(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 || self.n < 2 {
            return Err(Error::Config(format!("need p >= 2 and n >= 2, got p={}, n={}", self.p, self.n)));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !self.base().is_null() {
            return Err(Error::Config(format!("distribution must be a null model, got {}", self.base())));
        }
        Ok(())
    }

    /// Law of the null matrix the model is built from.
    pub fn base(&self) -> Model {
        if self.model.is_null() {
            self.model
        } else {
            self.distribution.unwrap_or(match self.model {
                Model::V => Model::II,
                _ => Model::I,
            })
        }
    }

    /// Toeplitz decay, defaulting to the value tabulated for the base law.
    pub fn rho_s(&self) -> f64 {
        self.rho_s.unwrap_or(match self.base() {
            Model::II => 0.03,
            Model::III => 0.02,
            _ => 0.06,
        })
    }

    /// Toeplitz bandwidth, defaulting to `⌊p/100⌋`.
    pub fn k0(&self) -> usize {
        self.k0.unwrap_or(self.p / 100)
    }

    pub fn r(&self) -> [f64; 4] {
        self.r.unwrap_or(match self.base() {
            Model::III => [0.002, 0.005, 0.0015, 0.5],
            _ => [0.01, 0.02, 0.006, 0.5],
        })
    }

    /// Label of the data-generating law, e.g. `I` or `IV(II)`.
    pub fn label(&self) -> String {
        if self.model.is_null() {
            self.model.to_string()
        } else {
            format!("{}({})", self.model, self.base())
        }
    }
}

/// Independent stream for one replicate.
pub fn replicate_rng(seed: u64, replicate_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate_index);
    rng
}

fn fill_row(rng: &mut ChaCha8Rng, law: RowLaw, out: &mut [f64]) {
    match law {
        RowLaw::Normal => out.iter_mut().for_each(|v| *v = StandardNormal.sample(rng)),
        RowLaw::Gamma => {
            let d = Gamma::new(4.0, 0.5).expect("valid gamma parameters");
            out.iter_mut().for_each(|v| *v = d.sample(rng));
        }
        RowLaw::T5 => {
            let d = StudentT::new(5.0).expect("valid t parameters");
            out.iter_mut().for_each(|v| *v = d.sample(rng));
        }
        RowLaw::Cauchy => {
            let d = Cauchy::new(0.0, 1.0).expect("valid cauchy parameters");
            out.iter_mut().for_each(|v| *v = d.sample(rng));
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum RowLaw {
    Normal,
    Gamma,
    T5,
    Cauchy,
}

fn row_law(model: Model, row: usize, rows: usize) -> RowLaw {
    let top = row < rows / 2;
    match model {
        Model::I if top => RowLaw::Gamma,
        Model::II if top => RowLaw::Cauchy,
        Model::I | Model::II => RowLaw::T5,
        Model::III => RowLaw::Cauchy,
        _ => RowLaw::Normal,
    }
}

/// Row-major `rows × n` null matrix drawn from `rng`.
fn null_values(model: Model, rows: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut values = vec![0.0; rows * n];
    for (k, row) in values.chunks_exact_mut(n).enumerate() {
        fill_row(rng, row_law(model, k, rows), row);
    }
    values
}

/// Null data for models I–III and the Gaussian null.
pub fn gen_null(cfg: &SimConfig, replicate_index: u64) -> Result<DataMatrix> {
    cfg.validate()?;
    if !cfg.model.is_null() {
        return Err(Error::Config(format!("model {} is not a null model", cfg.model)));
    }
    let mut rng = replicate_rng(cfg.seed, replicate_index);
    DataMatrix::from_row_major(cfg.p, cfg.n, null_values(cfg.model, cfg.p, cfg.n, &mut rng))
}

/// Model IV: `X = A Z` with `a_ii = 1` and `a_{i,i±k} = ρ^k` for `1 ≤ k ≤ k0`.
pub fn gen_toeplitz(cfg: &SimConfig, replicate_index: u64) -> Result<DataMatrix> {
    cfg.validate()?;
    if cfg.model != Model::IV {
        return Err(Error::Config(format!("gen_toeplitz needs model IV, got {}", cfg.model)));
    }
    let (p, n, k0, rho) = (cfg.p, cfg.n, cfg.k0(), cfg.rho_s());
    if k0 < 1 || k0 >= p {
        return Err(Error::Config(format!("k0 must satisfy 1 <= k0 < p, got k0={k0}, p={p}")));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Config(format!("rho_s must lie in [0, 1), got {rho}")));
    }
    let mut rng = replicate_rng(cfg.seed, replicate_index);
    let z = null_values(cfg.base(), p, n, &mut rng);
    DataMatrix::from_row_major(p, n, toeplitz_mix(&z, p, n, k0, rho))
}

/// Banded product `A Z` for row-major `z`.
pub fn toeplitz_mix(z: &[f64], p: usize, n: usize, k0: usize, rho: f64) -> Vec<f64> {
    let weights: Vec<f64> = (1..=k0).map(|k| rho.powi(k as i32)).collect();
    let mut x = z.to_vec();
    for i in 0..p {
        let out = &mut x[i * n..(i + 1) * n];
        for (k, &w) in (1..=k0).zip(&weights) {
            for nb in [i.checked_sub(k), Some(i + k).filter(|&j| j < p)].into_iter().flatten() {
                let src = &z[nb * n..(nb + 1) * n];
                out.iter_mut().zip(src).for_each(|(o, s)| *o += w * s);
            }
        }
    }
    x
}

/// Dense Toeplitz mixing matrix, for inspection and tests.
pub fn toeplitz_matrix(p: usize, k0: usize, rho: f64) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(p, p, |i, j| {
        let k = i.abs_diff(j);
        if k == 0 {
            1.0
        } else if k <= k0 {
            rho.powi(k as i32)
        } else {
            0.0
        }
    })
}

/// Model V: `x_ij = r1 z_ij + r2 z²_{i+1,j} + r3 z²_{i+2,j} + r4 e_ij` with `z`
/// drawn for `p + 2` rows and `e` iid standard normal.
pub fn gen_nonlinear(cfg: &SimConfig, replicate_index: u64) -> Result<DataMatrix> {
    cfg.validate()?;
    if cfg.model != Model::V {
        return Err(Error::Config(format!("gen_nonlinear needs model V, got {}", cfg.model)));
    }
    let (p, n) = (cfg.p, cfg.n);
    let [r1, r2, r3, r4] = cfg.r();
    let mut rng = replicate_rng(cfg.seed, replicate_index);
    let z = null_values(cfg.base(), p + 2, n, &mut rng);
    let e = null_values(Model::Gaussian, p, n, &mut rng);
    let mut x = vec![0.0; p * n];
    for i in 0..p {
        for j in 0..n {
            let z1 = z[(i + 1) * n + j];
            let z2 = z[(i + 2) * n + j];
            x[i * n + j] = r1 * z[i * n + j] + r2 * z1 * z1 + r3 * z2 * z2 + r4 * e[i * n + j];
        }
    }
    DataMatrix::from_row_major(p, n, x)
}

/// Dispatches on the configured model.
pub fn generate(cfg: &SimConfig, replicate_index: u64) -> Result<DataMatrix> {
    match cfg.model {
        Model::IV => gen_toeplitz(cfg, replicate_index),
        Model::V => gen_nonlinear(cfg, replicate_index),
        _ => gen_null(cfg, replicate_index),
    }
}
