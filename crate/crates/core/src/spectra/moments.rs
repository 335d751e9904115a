//! `∫ f dF_c`: exact rational algebra for powers, adaptive quadrature otherwise.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::law::{integrate_continuous, SpectralLaw, ATOM_LOCATION};
use crate::error::{Error, Result};
use crate::func::FunctionDescriptor;

const QUAD_TOL: f64 = 1e-12;

fn binomial(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Coefficients (in powers of `c`) of the Marchenko–Pastur moment `E Yʲ`:
/// the Narayana numbers `C(j,r)C(j−1,r)/(r+1)`.
pub fn mp_moment_poly(j: u32) -> Vec<BigInt> {
    if j == 0 {
        return vec![BigInt::one()];
    }
    (0..j).map(|r| binomial(j, r) * binomial(j - 1, r) / BigInt::from(r + 1)).collect()
}

/// Coefficients in `c` of `∫ x^k dF_c`, from `x = 1/3 + (2/3)Y` with `Y ~ MP(c)`.
///
/// The atom at 1/3 for `c > 1` is accounted for automatically: the scaled MP
/// law already places mass `1 − 1/c` at `Y = 0`.
pub fn power_moment_poly(k: u32) -> Vec<BigRational> {
    let mut coef = vec![BigRational::zero(); k.max(1) as usize];
    let third = ratio(1, 3);
    let two_thirds = ratio(2, 3);
    for j in 0..=k {
        let weight = BigRational::from_integer(binomial(k, j))
            * num_traits::pow(third.clone(), (k - j) as usize)
            * num_traits::pow(two_thirds.clone(), j as usize);
        for (r, n) in mp_moment_poly(j).into_iter().enumerate() {
            coef[r] += &weight * BigRational::from_integer(n);
        }
    }
    while coef.len() > 1 && coef.last().is_some_and(Zero::is_zero) {
        coef.pop();
    }
    coef
}

/// `∫ x^k dF_c` evaluated exactly at a rational `c`.
pub fn power_moment_exact(k: u32, c: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for coef in power_moment_poly(k).iter().rev() {
        acc = acc * c + coef;
    }
    acc
}

fn eval_poly(coef: &[BigRational], c: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, a| acc * c + a.to_f64().unwrap_or(f64::NAN))
}

/// `∫ f dF_c`, atom included.
pub fn lsd_moment(f: &FunctionDescriptor, law: &SpectralLaw) -> Result<f64> {
    if let FunctionDescriptor::Power(k) = f {
        return Ok(eval_poly(&power_moment_poly(*k), law.c()));
    }

    let mut probes = vec![law.d_minus(), law.d_plus(), 0.5 * (law.d_minus() + law.d_plus())];
    if law.atom_mass() > 0.0 {
        probes.push(ATOM_LOCATION);
    }
    for x in probes {
        if !f.eval_real(x).is_finite() {
            return Err(Error::NotEvaluable(format!("{} is not finite at x = {x}", f.name())));
        }
    }

    let res = integrate_continuous(law, |x| f.eval_real(x), QUAD_TOL);
    if !res.value.is_finite() {
        return Err(Error::NotEvaluable(format!("{} produced a non-finite integral", f.name())));
    }
    if !res.converged {
        return Err(Error::NonConvergence(format!(
            "moment quadrature for {} stalled with error estimate {:e}",
            f.name(),
            res.error
        )));
    }
    let atom = if law.atom_mass() > 0.0 { law.atom_mass() * f.eval_real(ATOM_LOCATION) } else { 0.0 };
    Ok(res.value + atom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::make_law;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    #[test]
    fn narayana_rows() {
        let as_i: Vec<i64> = mp_moment_poly(4).iter().map(|b| b.to_i64().unwrap()).collect();
        assert_eq!(as_i, vec![1, 6, 6, 1]);
        let as_i: Vec<i64> = mp_moment_poly(3).iter().map(|b| b.to_i64().unwrap()).collect();
        assert_eq!(as_i, vec![1, 3, 1]);
    }

    #[test]
    fn first_moment_is_one() {
        assert_eq!(power_moment_poly(1), vec![BigRational::one()]);
        for c in [0.1, 1.0, 3.0] {
            let law = make_law(c).unwrap();
            assert_eq!(lsd_moment(&FunctionDescriptor::Power(1), &law).unwrap(), 1.0);
        }
    }

    #[test]
    fn second_moment_polynomial() {
        assert_eq!(power_moment_poly(2), vec![BigRational::one(), ratio(4, 9)]);
    }

    #[test]
    fn fourth_moment_polynomial() {
        assert_eq!(
            power_moment_poly(4),
            vec![BigRational::one(), ratio(8, 3), ratio(128, 81), ratio(16, 81)]
        );
    }

    #[test]
    fn centering_identity_is_exact() {
        for (p, n) in [(100i64, 200i64), (37, 11), (500, 500)] {
            let c = ratio(p, n);
            let lhs = BigRational::from_integer(p.into()) * power_moment_exact(2, &c);
            let rhs = ratio(p, 1) + ratio(4 * p * p, 9 * n);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn powers_agree_with_quadrature() {
        for c in [0.25, 1.0, 2.0, 4.0] {
            let law = make_law(c).unwrap();
            for k in [2u32, 3, 4, 6] {
                let exact = lsd_moment(&FunctionDescriptor::Power(k), &law).unwrap();
                let g = FunctionDescriptor::custom("pow", move |z| z.powu(k));
                let numeric = lsd_moment(&g, &law).unwrap();
                assert_abs_diff_eq!(exact, numeric, epsilon = 1e-9 * exact.abs().max(1.0));
            }
        }
    }

    #[test]
    fn log_moment_includes_atom() {
        let law = make_law(2.0).unwrap();
        let m = lsd_moment(&FunctionDescriptor::Log, &law).unwrap();
        let cont = integrate_continuous(&law, f64::ln, 1e-13).value;
        assert_abs_diff_eq!(m, cont + 0.5 * (1.0f64 / 3.0).ln(), epsilon = 1e-12);
    }

    #[test]
    fn rejects_function_singular_on_support() {
        let law = make_law(0.5).unwrap();
        let f = FunctionDescriptor::custom("partial", |z| {
            if z.re < 1.0 {
                Complex64::new(f64::NAN, 0.0)
            } else {
                z
            }
        });
        assert!(matches!(lsd_moment(&f, &law), Err(Error::NotEvaluable(_))));
    }
}
