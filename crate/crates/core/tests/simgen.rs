use rayon::prelude::*;

use kendall_lss::rankcorr::kendall_tau_pair;
use kendall_lss::simgen::{gen_nonlinear, gen_null, gen_toeplitz, generate, toeplitz_mix, Model, SimConfig};

fn variance(x: &[f64]) -> f64 {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

#[test]
fn replicate_streams_ignore_scheduling() {
    let cfg = SimConfig { seed: 42, ..SimConfig::new(Model::II, 6, 40) };
    let serial: Vec<_> = (0..32).map(|k| gen_null(&cfg, k).unwrap()).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let parallel: Vec<_> = pool.install(|| (0..32u64).into_par_iter().map(|k| gen_null(&cfg, k).unwrap()).collect());
    assert_eq!(serial, parallel);
}

#[test]
fn t5_half_has_five_thirds_variance() {
    // rows past the midpoint of models I and II are t(5); Cauchy rows have no variance
    for model in [Model::I, Model::II] {
        let cfg = SimConfig { seed: 1, ..SimConfig::new(model, 2, 100_000) };
        let d = gen_null(&cfg, 0).unwrap();
        let v = variance(d.row(1));
        assert!((v / (5.0 / 3.0) - 1.0).abs() < 0.03, "{model}: {v}");
    }
}

#[test]
fn gaussian_null_is_standard() {
    let d = gen_null(&SimConfig { seed: 2, ..SimConfig::new(Model::Gaussian, 2, 100_000) }, 0).unwrap();
    for k in 0..2 {
        assert!((variance(d.row(k)) - 1.0).abs() < 0.02);
    }
    assert!(kendall_tau_pair(d.row(0), d.row(1)).unwrap().abs() < 0.01);
}

#[test]
fn toeplitz_without_decay_is_the_null_model() {
    for base in [Model::Gaussian, Model::I, Model::II, Model::III] {
        let cfg = SimConfig { distribution: Some(base), rho_s: Some(0.0), k0: Some(3), seed: 5, ..SimConfig::new(Model::IV, 20, 15) };
        let null = SimConfig { model: base, ..cfg.clone() };
        assert_eq!(gen_toeplitz(&cfg, 2).unwrap(), gen_null(&null, 2).unwrap());
    }
}

#[test]
fn toeplitz_induces_positive_neighbour_correlation() {
    let cfg = SimConfig { distribution: Some(Model::Gaussian), rho_s: Some(0.5), k0: Some(1), seed: 3, ..SimConfig::new(Model::IV, 3, 20_000) };
    let d = gen_toeplitz(&cfg, 0).unwrap();
    // x1 = z1 + ρz2, x2 = ρz1 + z2 + ρz3; Gaussian tau = (2/π) asin(corr)
    let tau = kendall_tau_pair(d.row(0), d.row(1)).unwrap();
    let corr = (0.5 + 0.5) / ((1.0f64 + 0.25).sqrt() * (1.0f64 + 0.5).sqrt());
    let expect = 2.0 / std::f64::consts::PI * corr.asin();
    assert!((tau - expect).abs() < 0.02, "{tau} vs {expect}");
}

#[test]
fn banded_mixing_is_linear() {
    let z: Vec<f64> = (0..12).map(|i| i as f64).collect();
    let twice: Vec<f64> = z.iter().map(|v| 2.0 * v).collect();
    let a = toeplitz_mix(&z, 4, 3, 2, 0.4);
    let b = toeplitz_mix(&twice, 4, 3, 2, 0.4);
    for (x, y) in a.iter().zip(&b) {
        assert!((2.0 * x - y).abs() < 1e-12);
    }
}

#[test]
fn nonlinear_model_reduces_to_noise() {
    let cfg = SimConfig { r: Some([0.0, 0.0, 0.0, 1.0]), seed: 4, ..SimConfig::new(Model::V, 3, 50_000) };
    let d = gen_nonlinear(&cfg, 0).unwrap();
    for k in 0..3 {
        assert!((variance(d.row(k)) - 1.0).abs() < 0.03);
    }
    assert_eq!(generate(&cfg, 0).unwrap(), d);
}

#[test]
fn nonlinear_terms_use_the_next_rows() {
    let base = SimConfig { distribution: Some(Model::III), seed: 6, ..SimConfig::new(Model::V, 4, 30) };
    let linear = gen_nonlinear(&SimConfig { r: Some([1.0, 0.0, 0.0, 0.0]), ..base.clone() }, 0).unwrap();
    let square = gen_nonlinear(&SimConfig { r: Some([0.0, 1.0, 0.0, 0.0]), ..base.clone() }, 0).unwrap();
    let square2 = gen_nonlinear(&SimConfig { r: Some([0.0, 0.0, 1.0, 0.0]), ..base }, 0).unwrap();
    for i in 0..2 {
        for j in 0..30 {
            assert_eq!(square.row(i)[j], linear.row(i + 1)[j].powi(2));
            assert_eq!(square2.row(i)[j], linear.row(i + 2)[j].powi(2));
        }
    }
}
