use kendall_lss::rankcorr::{kendall_matrix, pearson_matrix, spearman_matrix, CorrMatrix, DataMatrix, Flavor};
use kendall_lss::spectra::eigvals_sym;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform(p: usize, n: usize, seed: u64) -> DataMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DataMatrix::from_row_major(p, n, (0..p * n).map(|_| rng.random::<f64>()).collect()).unwrap()
}

fn check_invariants(m: &CorrMatrix) {
    let p = m.dim();
    for i in 0..p {
        assert_eq!(m.get(i, i), 1.0);
        for j in 0..p {
            assert_eq!(m.get(i, j), m.get(j, i));
            assert!((-1.0..=1.0).contains(&m.get(i, j)));
        }
    }
}

#[test]
fn kendall_is_rank_invariant_bit_for_bit() {
    let d = uniform(25, 60, 1);
    let base = kendall_matrix(&d).unwrap();
    let transforms: [fn(f64) -> f64; 3] = [|x| x.exp(), |x| x.powi(3) - 7.0, |x| (x / (1.0 - x)).ln()];
    for (k, f) in transforms.into_iter().enumerate() {
        let moved = d.map_row(3 * k + 1, f).unwrap();
        assert_eq!(kendall_matrix(&moved).unwrap(), base);
    }
}

#[test]
fn generated_matrices_satisfy_invariants() {
    for (p, n) in [(10, 40), (40, 10), (60, 61)] {
        let d = uniform(p, n, (p * n) as u64);
        let k = kendall_matrix(&d).unwrap();
        check_invariants(&k);
        assert!(eigvals_sym(&k).unwrap().smallest() >= -1e-10 * p as f64);
        check_invariants(&spearman_matrix(&d).unwrap());
        check_invariants(&pearson_matrix(&d).unwrap());
        assert_eq!(k.flavor(), Flavor::Kendall);
    }
}

#[test]
fn thread_count_does_not_change_matrices() {
    let d = uniform(50, 90, 9);
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| (kendall_matrix(&d).unwrap(), spearman_matrix(&d).unwrap()))
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn long_rows_match_pairwise_kernel() {
    let d = uniform(4, 3000, 2);
    let k = kendall_matrix(&d).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                assert_eq!(k.get(i, j), kendall_lss::rankcorr::kendall_tau_pair(d.row(i), d.row(j)).unwrap());
            }
        }
    }
}
