//! Exact finite-n checks of the sign-vector covariance identities, by
//! enumeration over all `n!` rank orderings.
//!
//! A column of the pair matrix `T` is indexed by a pair `(i, j)`, `i < j`, in
//! lexicographic order. The sign vector of a rank ordering `π` has entries
//! `sign(π_i − π_j)/√M`. Under continuous iid data every ordering has
//! probability `1/n!`, so expectations are finite sums.

use nalgebra::DMatrix;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_T_SIZE: usize = 12;
pub const MAX_ENUMERATION_SIZE: usize = 8;
pub const MAX_QUADRATIC_SIZE: usize = 7;

/// The `n × M` pair matrix with `t_{ℓ,(ij)} = δ_{ℓi} − δ_{ℓj}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoeffdingStructure {
    n: usize,
    pairs: Vec<(usize, usize)>,
    index: Vec<usize>,
    t: Vec<i64>,
}

impl HoeffdingStructure {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of pairs, `n(n−1)/2`.
    pub fn m(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Column of pair `(i, j)`; the pair is unordered.
    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        assert!(i != j && i < self.n && j < self.n, "invalid pair ({i}, {j})");
        self.index[i.min(j) * self.n + i.max(j)]
    }

    pub fn t(&self, row: usize, col: usize) -> i64 {
        self.t[row * self.m() + col]
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.m(), |r, c| self.t(r, c) as f64)
    }

    /// `T Tᵀ`, exact.
    pub fn ttt(&self) -> Vec<i64> {
        let (n, m) = (self.n, self.m());
        let mut out = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                out[a * n + b] = (0..m).map(|k| self.t(a, k) * self.t(b, k)).sum();
            }
        }
        out
    }

    /// `Tᵀ T`, exact.
    pub fn tt_t(&self) -> Vec<i64> {
        let (n, m) = (self.n, self.m());
        let mut out = vec![0; m * m];
        for a in 0..m {
            for b in 0..m {
                out[a * m + b] = (0..n).map(|l| self.t(l, a) * self.t(l, b)).sum();
            }
        }
        out
    }
}

fn square_is_multiple(g: &[i64], dim: usize, factor: i64) -> bool {
    (0..dim).all(|a| {
        (0..dim).all(|b| {
            let sq: i64 = (0..dim).map(|k| g[a * dim + k] * g[k * dim + b]).sum();
            sq == factor * g[a * dim + b]
        })
    })
}

/// Builds `T` and checks `(TTᵀ)² = n·TTᵀ`, `(TᵀT)² = n·TᵀT` and the column
/// pattern exactly.
pub fn build_t(n: usize) -> Result<HoeffdingStructure> {
    if !(2..=MAX_T_SIZE).contains(&n) {
        return Err(Error::InvalidParameter(format!("n must lie in 2..={MAX_T_SIZE}, got {n}")));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let m = pairs.len();
    let mut index = vec![usize::MAX; n * n];
    let mut t = vec![0i64; n * m];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        index[i * n + j] = k;
        t[i * m + k] = 1;
        t[j * m + k] = -1;
    }
    let s = HoeffdingStructure { n, pairs, index, t };
    let columns_ok = (0..m).all(|k| {
        let col: Vec<i64> = (0..n).map(|l| s.t(l, k)).collect();
        col.iter().filter(|&&v| v == 1).count() == 1
            && col.iter().filter(|&&v| v == -1).count() == 1
            && col.iter().filter(|&&v| v == 0).count() == n - 2
    });
    let nn = n as i64;
    if !columns_ok || !square_is_multiple(&s.ttt(), n, nn) || !square_is_multiple(&s.tt_t(), m, nn) {
        return Err(Error::InvalidParameter(format!("pair matrix invariants fail at n = {n}")));
    }
    Ok(s)
}

/// A sign vector stored by its ±1 pattern; the vector itself is `signs/√M`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignVector {
    signs: Vec<i8>,
}

impl SignVector {
    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        let scale = (self.signs.len() as f64).sqrt().recip();
        self.signs.iter().map(|&s| f64::from(s) * scale).collect()
    }
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<u8>> {
    let mut perm: Vec<u8> = (0..n as u8).collect();
    let mut out = vec![perm.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).expect("successor exists");
        perm.swap(i - 1, j);
        perm[i..].reverse();
        out.push(perm.clone());
    }
}

fn signs_of(s: &HoeffdingStructure, perm: &[u8]) -> Vec<i8> {
    s.pairs.iter().map(|&(i, j)| if perm[i] > perm[j] { 1 } else { -1 }).collect()
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

fn check_enumerable(n: usize, max: usize) -> Result<()> {
    if !(2..=max).contains(&n) {
        return Err(Error::InvalidParameter(format!("exhaustive enumeration needs 2 <= n <= {max}, got {n}")));
    }
    Ok(())
}

/// Every sign vector with its exact probability `1/n!`.
pub fn enumerate_sign_vectors(n: usize) -> Result<Vec<(SignVector, Ratio<u64>)>> {
    check_enumerable(n, MAX_ENUMERATION_SIZE)?;
    let s = build_t(n)?;
    let w = Ratio::new(1, factorial(n));
    Ok(permutations(n).iter().map(|p| (SignVector { signs: signs_of(&s, p) }, w)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovStructureCheck {
    pub n: usize,
    /// `max |E vvᵀ − (TᵀT + I)/(3M)|` computed from exact integer sums.
    pub exact_deviation: f64,
    /// The same quantity accumulated in floating point.
    pub float_deviation: f64,
}

/// Compares the enumerated `E v vᵀ` with `(TᵀT + I)/(3M)` entrywise.
pub fn verify_cov_structure(n: usize) -> Result<CovStructureCheck> {
    check_enumerable(n, MAX_ENUMERATION_SIZE)?;
    let s = build_t(n)?;
    let m = s.m();
    let perms = permutations(n);
    // Integer sums are exact, so the parallel reduction order is irrelevant.
    let sums = perms
        .par_chunks(64)
        .map(|block| {
            let mut acc = vec![0i64; m * m];
            for p in block {
                let sg = signs_of(&s, p);
                for a in 0..m {
                    for b in 0..m {
                        acc[a * m + b] += i64::from(sg[a] * sg[b]);
                    }
                }
            }
            acc
        })
        .reduce(
            || vec![0i64; m * m],
            |mut x, y| {
                x.iter_mut().zip(y).for_each(|(a, b)| *a += b);
                x
            },
        );
    let g = s.tt_t();
    let nf = factorial(n) as i64;
    let (mi, mf) = (m as i64, m as f64);
    let mut exact = 0.0f64;
    let mut float = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            let target = g[a * m + b] + i64::from(a == b);
            // E v_a v_b = sums/(n!·M); target/(3M). Scaled by 3·n!·M both are integers.
            let diff = 3 * sums[a * m + b] - nf * target;
            exact = exact.max((diff as f64 / (3 * nf * mi) as f64).abs());
            let e = sums[a * m + b] as f64 / (nf as f64 * mf);
            float = float.max((e - target as f64 / (3.0 * mf)).abs());
        }
    }
    Ok(CovStructureCheck { n, exact_deviation: exact, float_deviation: float })
}

/// One addend of the expansion of `M²·Cov(vᵀAv, vᵀBv)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Addend {
    pub name: &'static str,
    pub coefficient: f64,
    /// Value of the indexed sum before the coefficient is applied.
    pub sum: f64,
}

type Pair = (usize, usize);

/// Maps an ordered triple to the outer pair and the two inner pairs.
type TripleSelector = fn(usize, usize, usize) -> (Pair, (Pair, Pair));

struct Parts<'a> {
    s: &'a HoeffdingStructure,
    a: &'a DMatrix<f64>,
    b: &'a DMatrix<f64>,
    tat: DMatrix<f64>,
    tbt: DMatrix<f64>,
    ta: DMatrix<f64>,
    tb: DMatrix<f64>,
}

impl Parts<'_> {
    fn p(&self, i: usize, j: usize) -> usize {
        self.s.pair_index(i, j)
    }

    fn n(&self) -> usize {
        self.s.n
    }

    /// `f(A-side, B-side) + f(B-side, A-side)`.
    fn both(&self, f: impl Fn(&DMatrix<f64>, &DMatrix<f64>, &DMatrix<f64>, &DMatrix<f64>) -> f64) -> f64 {
        f(&self.tat, &self.tb, &self.ta, self.b) + f(&self.tbt, &self.ta, &self.tb, self.a)
    }

    fn tr_tat_tbt(&self) -> f64 {
        (&self.tat * &self.tbt).trace()
    }

    fn tr_ab(&self) -> f64 {
        (self.a * self.b).trace()
    }

    fn diag_tat_tbt(&self) -> f64 {
        (0..self.n()).map(|i| self.tat[(i, i)] * self.tbt[(i, i)]).sum()
    }

    fn diag_ab(&self) -> f64 {
        (0..self.s.m()).map(|k| self.a[(k, k)] * self.b[(k, k)]).sum()
    }

    fn tr_tabt(&self) -> f64 {
        let t = self.s.to_dmatrix();
        (&t * self.a * self.b * t.transpose()).trace()
    }

    fn diag_row_upper(&self) -> f64 {
        let n = self.n();
        self.both(|xt, y, _, _| {
            (0..n).flat_map(|i| (i + 1..n).map(move |l| (i, l))).map(|(i, l)| xt[(i, i)] * y[(l, self.p(i, l))]).sum()
        })
    }

    fn diag_row_lower(&self) -> f64 {
        let n = self.n();
        self.both(|xt, y, _, _| {
            (0..n).flat_map(|l| (l + 1..n).map(move |i| (i, l))).map(|(i, l)| xt[(i, i)] * y[(l, self.p(l, i))]).sum()
        })
    }

    fn offdiag_row_difference(&self) -> f64 {
        let n = self.n();
        self.both(|xt, y, _, _| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    let k = self.p(i, j);
                    acc += xt[(i, j)] * (y[(i, k)] - y[(j, k)]);
                }
            }
            acc
        })
    }

    fn shared_vertex_rows(&self) -> f64 {
        let n = self.n();
        self.both(|_, y, x, _| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for t in 0..n {
                        if j < i && i < t {
                            acc += x[(i, self.p(i, t))] * y[(j, self.p(j, t))];
                        }
                        if t < j && j < i {
                            acc += x[(i, self.p(t, i))] * y[(j, self.p(t, j))];
                        }
                        if j < t && t < i {
                            acc -= x[(i, self.p(t, i))] * y[(j, self.p(j, t))];
                        }
                    }
                }
            }
            acc
        })
    }

    fn same_pair_rows(&self) -> f64 {
        let n = self.n();
        self.both(|_, y, x, _| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    let k = self.p(i, j);
                    acc += x[(i, k)] * y[(j, k)];
                }
            }
            acc
        })
    }

    fn crossed_pair_rows(&self) -> f64 {
        let n = self.n();
        self.both(|_, y, x, _| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for t in 0..n {
                        if t < i && i < j {
                            acc += x[(i, self.p(t, j))] * y[(j, self.p(t, i))];
                        }
                        if i < j && j < t {
                            acc += x[(i, self.p(j, t))] * y[(j, self.p(i, t))];
                        }
                        if i < t && t < j {
                            acc -= x[(i, self.p(t, j))] * y[(j, self.p(i, t))];
                        }
                    }
                }
            }
            acc
        })
    }

    fn offdiag_pair_diagonal(&self) -> f64 {
        let n = self.n();
        self.both(|xt, _, _, other| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    let k = self.p(i, j);
                    acc += xt[(i, j)] * other[(k, k)];
                }
            }
            acc
        })
    }

    /// `Σ` over ordered triples of `X_ij · Y[pair(f), pair(g)]`.
    fn triple(&self, sel: TripleSelector) -> f64 {
        let n = self.n();
        self.both(|xt, _, _, other| {
            let mut acc = 0.0;
            for a in 0..n {
                for b in a + 1..n {
                    for c in b + 1..n {
                        let ((i, j), (f, g)) = sel(a, b, c);
                        acc += xt[(i, j)] * other[(self.p(f.0, f.1), self.p(g.0, g.1))];
                    }
                }
            }
            acc
        })
    }
}

/// The fifteen grouped addends whose weighted sum is the displayed expansion of
/// `M²·Cov(vᵀAv, vᵀBv)`.
pub fn quadratic_addends(s: &HoeffdingStructure, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<Addend>> {
    let m = s.m();
    for x in [a, b] {
        if x.shape() != (m, m) {
            return Err(Error::Dimension(format!("expected {m}×{m}, got {}×{}", x.nrows(), x.ncols())));
        }
        let asym = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| (x[(i, j)] - x[(j, i)]).abs()).fold(0.0, f64::max);
        if asym > 0.0 {
            return Err(Error::NotSymmetric(asym));
        }
    }
    let t = s.to_dmatrix();
    let parts = Parts {
        s,
        a,
        b,
        tat: &t * a * t.transpose(),
        tbt: &t * b * t.transpose(),
        ta: &t * a,
        tb: &t * b,
    };
    let c = |num: f64, den: f64| num / den;
    let list = [
        ("tr(TAT'TBT')", c(2.0, 9.0), parts.tr_tat_tbt()),
        ("tr(AB)", c(2.0, 9.0), parts.tr_ab()),
        ("diag(TAT')diag(TBT')", c(-2.0, 15.0), parts.diag_tat_tbt()),
        ("diag(A)diag(B)", c(-2.0, 15.0), parts.diag_ab()),
        ("tr(TABT')", c(4.0, 9.0), parts.tr_tabt()),
        ("diag x row, i<l", c(4.0, 45.0), parts.diag_row_upper()),
        ("diag x row, l<i", c(-4.0, 45.0), parts.diag_row_lower()),
        ("offdiag x row difference", c(8.0, 45.0), parts.offdiag_row_difference()),
        ("rows sharing a vertex", c(4.0, 45.0), parts.shared_vertex_rows()),
        ("rows on the same pair", c(8.0, 45.0), parts.same_pair_rows()),
        ("rows on crossed pairs", c(4.0, 45.0), parts.crossed_pair_rows()),
        ("offdiag x pair diagonal", c(4.0, 45.0), parts.offdiag_pair_diagonal()),
        ("i<u<j: (uj),(iu)", c(-4.0, 45.0), parts.triple(|i, u, j| ((i, j), ((u, j), (i, u))))),
        ("i<j<t: (jt),(it)", c(4.0, 45.0), parts.triple(|i, j, t| ((i, j), ((j, t), (i, t))))),
        ("s<i<j: (si),(sj)", c(4.0, 45.0), parts.triple(|s, i, j| ((i, j), ((s, i), (s, j))))),
    ];
    Ok(list.into_iter().map(|(name, coefficient, sum)| Addend { name, coefficient, sum }).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticCheck {
    pub n: usize,
    /// `Cov(vᵀAv, vᵀBv)` by enumeration.
    pub enumerated: f64,
    /// Weighted addend sum divided by `M²`.
    pub expansion: f64,
    pub deviation: f64,
}

/// Exact `Cov(vᵀAv, vᵀBv)` over all orderings, using the closed-form means
/// `E vᵀAv = tr(A(TᵀT + I))/(3M)`.
pub fn enumerated_quadratic_cov(s: &HoeffdingStructure, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let m = s.m();
    let mf = m as f64;
    let quad = |x: &DMatrix<f64>, sg: &[i8]| -> f64 {
        let mut acc = 0.0;
        for i in 0..m {
            let row: f64 = (0..m).map(|j| x[(i, j)] * f64::from(sg[j])).sum();
            acc += f64::from(sg[i]) * row;
        }
        acc / mf
    };
    let perms = permutations(s.n);
    // Collected in permutation order and summed serially so the result does
    // not depend on the thread count.
    let products: Vec<f64> = perms
        .par_iter()
        .map(|p| {
            let sg = signs_of(s, p);
            quad(a, &sg) * quad(b, &sg)
        })
        .collect();
    let second = neumaier(&products) / perms.len() as f64;
    let t = s.to_dmatrix();
    let g = t.transpose() * &t + DMatrix::identity(m, m);
    let mean = |x: &DMatrix<f64>| (x * &g).trace() / (3.0 * mf);
    second - mean(a) * mean(b)
}

fn neumaier(xs: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &x in xs {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + comp
}

/// Compares the enumerated covariance with the addend expansion.
pub fn verify_quadratic_identity(n: usize, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<QuadraticCheck> {
    check_enumerable(n, MAX_QUADRATIC_SIZE)?;
    let s = build_t(n)?;
    let addends = quadratic_addends(&s, a, b)?;
    let m2 = (s.m() * s.m()) as f64;
    let expansion = addends.iter().map(|x| x.coefficient * x.sum).sum::<f64>() / m2;
    let enumerated = enumerated_quadratic_cov(&s, a, b);
    Ok(QuadraticCheck { n, enumerated, expansion, deviation: (enumerated - expansion).abs() })
}

/// Decomposition `v = u + v̄` of the unnormalised sign vector of `x` with
/// `u_(ij) = (2x_i − 1) + (1 − 2x_j)` for Uniform(0, 1) data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoeffdingParts {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub v_bar: Vec<f64>,
}

pub fn hoeffding_parts(x: &[f64]) -> Result<HoeffdingParts> {
    let n = x.len();
    if n < 2 {
        return Err(Error::Dimension(format!("need at least two observations, got {n}")));
    }
    if let Some(bad) = x.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
        return Err(Error::Domain(format!("entries must lie in (0, 1), got {bad}")));
    }
    let ties = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| x[i] == x[j]).count();
    if ties > 0 {
        return Err(Error::Ties { row: 0, pairs: ties as u64 });
    }
    let (mut v, mut u, mut v_bar) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..n {
        for j in i + 1..n {
            let s = if x[i] > x[j] { 1.0 } else { -1.0 };
            let uij = (2.0 * x[i] - 1.0) + (1.0 - 2.0 * x[j]);
            v.push(s);
            u.push(uij);
            v_bar.push(s - uij);
        }
    }
    Ok(HoeffdingParts { v, u, v_bar })
}
