use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad;

/// The limiting spectral law `F_c` of a Kendall matrix: the Marchenko–Pastur
/// law with ratio `c`, scaled by 2/3 and shifted by 1/3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralLaw {
    c: f64,
    d_minus: f64,
    d_plus: f64,
    atom_mass: f64,
    mp_edge: f64,
}

pub fn make_law(c: f64) -> Result<SpectralLaw> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("aspect ratio must be positive, got {c}")));
    }
    let s = c.sqrt();
    let mp_edge = (1.0 + s) * (1.0 + s);
    Ok(SpectralLaw {
        c,
        d_minus: 1.0 / 3.0 + 2.0 / 3.0 * (1.0 - s) * (1.0 - s),
        d_plus: 1.0 / 3.0 + 2.0 / 3.0 * mp_edge,
        atom_mass: (1.0 - 1.0 / c).max(0.0),
        mp_edge,
    })
}

/// Location of the point mass carried by `F_c` when `c > 1`.
pub const ATOM_LOCATION: f64 = 1.0 / 3.0;

impl SpectralLaw {
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d_minus(&self) -> f64 {
        self.d_minus
    }

    pub fn d_plus(&self) -> f64 {
        self.d_plus
    }

    pub fn atom_mass(&self) -> f64 {
        self.atom_mass
    }

    /// `(1 + √c)²`, the right edge of the unscaled Marchenko–Pastur law.
    pub fn mp_edge(&self) -> f64 {
        self.mp_edge
    }

    /// Maps `θ ∈ [0, π/2]` onto the support; the Jacobian cancels the
    /// square-root edge behaviour of the density.
    pub(crate) fn edge_map(&self, theta: f64) -> f64 {
        let s = theta.sin();
        self.d_minus + (self.d_plus - self.d_minus) * s * s
    }

    /// `density(x(θ)) · dx/dθ`, computed without the `√` so it stays smooth at
    /// both edges, including the `c = 1` case where `d− = 1/3`.
    pub(crate) fn weight_theta(&self, theta: f64) -> f64 {
        let w = self.d_plus - self.d_minus;
        let (s, co) = theta.sin_cos();
        let s2 = s * s;
        let x = self.d_minus + w * s2;
        let denom = if self.c == 1.0 { 3.0 * w * s2 } else { 3.0 * x - 1.0 };
        if denom == 0.0 {
            // c = 1 and θ = 0: limit of 2w²s²c²/(3ws²)
            return 9.0 / (4.0 * PI * self.c) * 2.0 * w / 3.0 * co * co;
        }
        9.0 / (4.0 * PI * self.c * denom) * 2.0 * w * w * s2 * co * co
    }

    /// `F_c(x)`, including the atom at 1/3.
    pub fn cdf(&self, x: f64) -> f64 {
        let atom = if x >= ATOM_LOCATION { self.atom_mass } else { 0.0 };
        if x <= self.d_minus {
            return atom;
        }
        if x >= self.d_plus {
            return 1.0;
        }
        let u = ((x - self.d_minus) / (self.d_plus - self.d_minus)).sqrt();
        let theta = u.clamp(0.0, 1.0).asin();
        let cont = quad::integrate(|t| self.weight_theta(t), 0.0, theta, 1e-13, 1e-13).value;
        (atom + cont).clamp(0.0, 1.0)
    }

    /// Left limit `F_c(x−)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        if x == ATOM_LOCATION {
            self.cdf(x) - self.atom_mass
        } else {
            self.cdf(x)
        }
    }

    /// Generalised inverse `inf{x : F_c(x) ≥ u}`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if u <= self.atom_mass && self.atom_mass > 0.0 {
            return ATOM_LOCATION;
        }
        let (mut lo, mut hi) = (self.d_minus, self.d_plus);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) >= u {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        hi
    }
}

/// Density of the continuous part of `F_c`; the atom is reported separately by
/// [`SpectralLaw::atom_mass`].
pub fn lsd_density(x: f64, law: &SpectralLaw) -> f64 {
    if x <= law.d_minus || x >= law.d_plus {
        return 0.0;
    }
    let root = ((law.d_plus - x) * (x - law.d_minus)).sqrt();
    9.0 / (4.0 * PI * law.c * (3.0 * x - 1.0)) * root
}

/// Stieltjes transform `m(z) = ∫ (x − z)⁻¹ dF_c(x)`.
///
/// Both roots of the defining quadratic are formed in a cancellation-free way
/// and the one in the correct half-plane is returned, so the result does not
/// depend on the branch convention of the complex square root.
pub fn stieltjes(z: Complex64, law: &SpectralLaw) -> Complex64 {
    let c = law.c;
    let (a, b) = stieltjes_coefficients(z, c);
    let disc = (b * b - 4.0 * a).sqrt();
    let q = if (b.conj() * disc).re >= 0.0 { -0.5 * (b + disc) } else { -0.5 * (b - disc) };
    let roots = [q / a, 1.0 / q];
    let score = |m: &Complex64| z.im * m.im;
    if score(&roots[0]) >= score(&roots[1]) {
        roots[0]
    } else {
        roots[1]
    }
}

/// Coefficients `(α, β)` of `α m² + β m + 1 = 0`.
pub(crate) fn stieltjes_coefficients(z: Complex64, c: f64) -> (Complex64, Complex64) {
    let a = 2.0 / 3.0 * c * (z - 1.0 / 3.0);
    let b = z - 1.0 + 2.0 / 3.0 * c;
    (a, b)
}

/// Absolute residual of the defining quadratic at `m`.
pub fn stieltjes_residual(z: Complex64, m: Complex64, law: &SpectralLaw) -> f64 {
    let (a, b) = stieltjes_coefficients(z, law.c);
    (a * m * m + b * m + 1.0).norm()
}

/// The closed-form expression `(1 − 2c/3 − z + √(…)) / ((4/3)c(z − 1/3))` with
/// the principal square root; either sign may be the right one.
pub fn stieltjes_closed_form_branches(z: Complex64, law: &SpectralLaw) -> [Complex64; 2] {
    let c = law.c;
    let t = z - 1.0 - 2.0 / 3.0 * c;
    let s = (t * t - 16.0 / 9.0 * c).sqrt();
    let num = 1.0 - 2.0 / 3.0 * c - z;
    let den = 4.0 / 3.0 * c * (z - 1.0 / 3.0);
    [(num + s) / den, (num - s) / den]
}

/// Integrates `g` against the continuous part of `F_c` over `θ ∈ [0, π/2]`.
pub(crate) fn integrate_continuous(law: &SpectralLaw, g: impl Fn(f64) -> f64, tol: f64) -> quad::QuadResult {
    quad::integrate(|t| g(law.edge_map(t)) * law.weight_theta(t), 0.0, FRAC_PI_2, tol, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn square_ratio_edges() {
        let law = make_law(1.0).unwrap();
        assert_abs_diff_eq!(law.d_minus(), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(law.d_plus(), 3.0, epsilon = 1e-15);
        assert_eq!(law.atom_mass(), 0.0);
    }

    #[test]
    fn quarter_ratio_edges() {
        let law = make_law(0.25).unwrap();
        assert_abs_diff_eq!(law.d_minus(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(law.d_plus(), 11.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn atom_for_wide_data() {
        let law = make_law(4.0).unwrap();
        assert_eq!(law.atom_mass(), 0.75);
        assert_abs_diff_eq!(law.d_plus(), 1.0 / 3.0 + 2.0 / 3.0 * law.mp_edge(), epsilon = 1e-15);
    }

    #[test]
    fn rejects_nonpositive_ratio() {
        assert!(make_law(0.0).is_err());
        assert!(make_law(-1.0).is_err());
        assert!(make_law(f64::NAN).is_err());
    }

    #[test]
    fn density_zero_outside_support() {
        let law = make_law(0.5).unwrap();
        assert_eq!(lsd_density(law.d_minus() - 0.1, &law), 0.0);
        assert_eq!(lsd_density(law.d_plus() + 0.1, &law), 0.0);
        assert_eq!(lsd_density(-5.0, &law), 0.0);
    }

    #[test]
    fn density_vanishes_at_edges_for_unit_ratio() {
        let law = make_law(1.0).unwrap();
        assert!(lsd_density(law.d_plus() - 1e-10, &law) < 1e-4);
        // left edge coincides with the pole of 1/(3x−1) but the density still decays
        // relative to its interior scale
        assert!(lsd_density(law.d_minus() + 1e-6, &law).is_finite());
    }

    #[test]
    fn total_mass_is_one() {
        for c in [0.1, 0.5, 1.0, 2.0, 4.0] {
            let law = make_law(c).unwrap();
            let cont = integrate_continuous(&law, |_| 1.0, 1e-13).value;
            assert_abs_diff_eq!(cont + law.atom_mass(), 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn weight_matches_plain_density() {
        let law = make_law(0.7).unwrap();
        for theta in [0.1, 0.5, 1.0, 1.4] {
            let x = law.edge_map(theta);
            let w = law.d_plus() - law.d_minus();
            let jac = 2.0 * w * theta.sin() * theta.cos();
            assert_abs_diff_eq!(law.weight_theta(theta), lsd_density(x, &law) * jac, epsilon = 1e-12);
        }
    }

    #[test]
    fn stieltjes_satisfies_quadratic() {
        let law = make_law(0.5).unwrap();
        for re in [-3.0, 0.0, 0.4, 1.0, 2.5, 7.0] {
            let z = Complex64::new(re, 0.5);
            let m = stieltjes(z, &law);
            assert!(stieltjes_residual(z, m, &law) < 1e-10);
            assert!(z.im * m.im > 0.0);
        }
    }

    #[test]
    fn stieltjes_decays_like_minus_inverse_z() {
        let law = make_law(0.5).unwrap();
        let z = Complex64::new(0.0, 1e6);
        let m = stieltjes(z, &law);
        assert!(((m + 1.0 / z) / (1.0 / z)).norm() < 1e-5);
    }

    #[test]
    fn stieltjes_matches_quadrature() {
        let law = make_law(1.0).unwrap();
        let z = Complex64::new(2.0, 1.0);
        let re = integrate_continuous(&law, |x| (1.0 / (x - z)).re, 1e-13).value;
        let im = integrate_continuous(&law, |x| (1.0 / (x - z)).im, 1e-13).value;
        let m = stieltjes(z, &law);
        assert!((m - Complex64::new(re, im)).norm() < 1e-6);
    }

    #[test]
    fn stieltjes_includes_atom() {
        let law = make_law(3.0).unwrap();
        let z = Complex64::new(0.9, 0.4);
        let re = integrate_continuous(&law, |x| (1.0 / (x - z)).re, 1e-13).value;
        let im = integrate_continuous(&law, |x| (1.0 / (x - z)).im, 1e-13).value;
        let atom = law.atom_mass() / (ATOM_LOCATION - z);
        assert!((stieltjes(z, &law) - Complex64::new(re, im) - atom).norm() < 1e-8);
    }

    #[test]
    fn closed_form_branch_agrees() {
        let law = make_law(0.8).unwrap();
        let z = Complex64::new(1.2, -0.3);
        let m = stieltjes(z, &law);
        let branches = stieltjes_closed_form_branches(z, &law);
        assert!(branches.iter().any(|b| (b - m).norm() < 1e-12));
    }

    #[test]
    fn cdf_and_quantile_roundtrip() {
        for c in [0.3, 1.0, 2.5] {
            let law = make_law(c).unwrap();
            assert_eq!(law.cdf(law.d_plus() + 1.0), 1.0);
            for u in [0.05, 0.3, 0.5, 0.71, 0.95] {
                if u <= law.atom_mass() {
                    continue;
                }
                let x = law.quantile(u);
                assert_abs_diff_eq!(law.cdf(x), u, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn cdf_jumps_at_atom() {
        let law = make_law(2.0).unwrap();
        assert_abs_diff_eq!(law.cdf(ATOM_LOCATION), 0.5, epsilon = 1e-15);
        assert_eq!(law.cdf_left(ATOM_LOCATION), 0.0);
        assert_eq!(law.quantile(0.2), ATOM_LOCATION);
    }
}
