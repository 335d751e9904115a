//! Closed-form limiting means and variances of the three proposed statistics.

use crate::error::{Error, Result};
use crate::func::FunctionDescriptor;
use crate::spectra::make_law;

/// Limiting mean of `tr(K²) − p − 4p²/(9n)`.
pub fn q2_mean(c: f64) -> f64 {
    14.0 / 9.0 * c * c - 4.0 / 9.0 * c
}

pub fn q2_var(c: f64) -> f64 {
    64.0 / 81.0 * c * c
}

/// `μ_{τ,4}(c)`.
pub fn q4_mean(c: f64) -> f64 {
    -8.0 / 3.0 * c + 140.0 / 27.0 * c.powi(2) + 608.0 / 81.0 * c.powi(3) + 112.0 / 81.0 * c.powi(4)
}

/// `σ²_{τ,4}(c)`.
pub fn q4_var(c: f64) -> f64 {
    let t1 = 8.0 / 3.0 * c + 352.0 / 81.0 * c.powi(2) + 32.0 / 27.0 * c.powi(3);
    let t2 = 32.0 / 27.0 * c.powf(1.5) + 64.0 / 81.0 * c.powf(2.5);
    4.0 * t1 * t1 + 6.0 * t2 * t2 + 2048.0 / (81.0 * 81.0) * c.powi(4)
}

/// `(a, b) = ((√d+ + √d−)/2, (√d+ − √d−)/2)`.
pub fn log_ab(c: f64) -> Result<(f64, f64)> {
    let law = make_law(c)?;
    let (sp, sm) = (law.d_plus().sqrt(), law.d_minus().sqrt());
    Ok(((sp + sm) / 2.0, (sp - sm) / 2.0))
}

/// `μ_{τ,log}(c)`, including the extra terms that switch on for `c > 1`.
pub fn log_mean(c: f64) -> Result<f64> {
    let (a, b) = log_ab(c)?;
    let sc = c.sqrt();
    let ab = a - b * sc;
    if ab <= 0.0 || a * a - b * b <= 0.0 {
        return Err(Error::Domain(format!("log mean undefined at c = {c}")));
    }
    let mut mu = -2.0 * a.ln() + 0.5 * (a * a - b * b).ln() + ab.ln() + 2.0 * b * sc / a
        - (4.0 * a * b * sc - 3.0 * c * b * b) / (4.0 * ab * ab)
        + b * b / (a * a);
    if c > 1.0 {
        let inner = a - b / sc;
        if inner <= 0.0 {
            return Err(Error::Domain(format!("a − b/√c ≤ 0 at c = {c}")));
        }
        mu += (3.0 * b * b - 2.0 * a * b * sc) / (4.0 * (a * sc - b).powi(2)) - inner.ln();
    }
    Ok(mu)
}

/// `σ²_{τ,log}(c)`.
pub fn log_var(c: f64) -> Result<f64> {
    let (a, b) = log_ab(c)?;
    Ok(2.0 * (a * a / (a * a - b * b)).ln() - 2.0 * b * b / (a * a))
}

/// Closed-form `(mean, variance)` when one is known for `f`.
pub fn closed_form(f: &FunctionDescriptor, c: f64) -> Option<Result<(f64, f64)>> {
    match f {
        FunctionDescriptor::Power(1) => Some(Ok((0.0, 0.0))),
        FunctionDescriptor::Power(2) => Some(Ok((q2_mean(c), q2_var(c)))),
        FunctionDescriptor::Power(4) => Some(Ok((q4_mean(c), q4_var(c)))),
        FunctionDescriptor::Log => Some(log_mean(c).and_then(|m| Ok((m, log_var(c)?)))),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn q2_at_half() {
        assert_abs_diff_eq!(q2_mean(0.5), 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q2_var(0.5), 16.0 / 81.0, epsilon = 1e-15);
    }

    #[test]
    fn q4_at_one() {
        assert_abs_diff_eq!(q4_mean(1.0), 308.0 / 27.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q4_var(1.0), 292.5213, epsilon = 1e-4);
    }

    #[test]
    fn log_at_one() {
        let (a, b) = log_ab(1.0).unwrap();
        assert_abs_diff_eq!(a * a, 4.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b * b, 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(log_var(1.0).unwrap(), 2.0 * (4.0f64 / 3.0).ln() - 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(log_var(1.0).unwrap(), 0.0754, epsilon = 1e-4);
    }

    #[test]
    fn vanishing_ratio() {
        assert!(q2_mean(1e-9).abs() < 1e-8 && q2_var(1e-9) < 1e-16);
    }
}
