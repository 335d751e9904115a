//! The limiting spectral law of Kendall matrices, eigenvalue extraction and
//! empirical-vs-limit comparisons.

mod eigen;
mod law;
mod moments;

pub use eigen::{eigen_sym, eigvals_sym, eigvals_sym_dense, Spectrum};
pub use law::{
    lsd_density, make_law, stieltjes, stieltjes_closed_form_branches, stieltjes_residual, SpectralLaw,
    ATOM_LOCATION,
};
pub use moments::{lsd_moment, mp_moment_poly, power_moment_exact, power_moment_poly};

/// Kolmogorov distance between the empirical spectral distribution of `s` and `F_c`.
///
/// Both distributions are step-or-continuous with jumps only at the
/// eigenvalues and the atom, so the supremum is attained at one of those
/// points (from the left or the right) or at the support edges.
pub fn esd_distance(s: &Spectrum, law: &SpectralLaw) -> f64 {
    let mut asc: Vec<f64> = s.eigenvalues().to_vec();
    asc.reverse();
    let p = asc.len() as f64;
    let esd = |x: f64| asc.partition_point(|&l| l <= x) as f64 / p;
    let esd_left = |x: f64| asc.partition_point(|&l| l < x) as f64 / p;

    let mut points = asc.clone();
    points.extend([law.d_minus(), law.d_plus(), ATOM_LOCATION]);
    points.dedup();
    points
        .into_iter()
        .map(|x| {
            let right = (esd(x) - law.cdf(x)).abs();
            let left = (esd_left(x) - law.cdf_left(x)).abs();
            right.max(left)
        })
        .fold(0.0, f64::max)
}
