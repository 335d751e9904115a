use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

/// Complex evaluator for a user-supplied test function.
pub type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// A test function `f` for linear spectral statistics.
///
/// Every kind must extend analytically to a neighbourhood of the support of the
/// limiting law; custom functions therefore take and return complex values.
#[derive(Clone)]
pub enum FunctionDescriptor {
    Power(u32),
    Log,
    Custom { name: String, eval: ComplexFn },
}

impl FunctionDescriptor {
    pub fn custom(name: impl Into<String>, eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        FunctionDescriptor::Custom { name: name.into(), eval: Arc::new(eval) }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            FunctionDescriptor::Power(k) => z.powu(*k),
            FunctionDescriptor::Log => z.ln(),
            FunctionDescriptor::Custom { eval, .. } => eval(z),
        }
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        match self {
            FunctionDescriptor::Power(k) => x.powi(*k as i32),
            FunctionDescriptor::Log => {
                if x > 0.0 {
                    x.ln()
                } else {
                    f64::NAN
                }
            }
            FunctionDescriptor::Custom { eval, .. } => eval(Complex64::new(x, 0.0)).re,
        }
    }

    pub fn name(&self) -> String {
        match self {
            FunctionDescriptor::Power(k) => format!("x^{k}"),
            FunctionDescriptor::Log => "log".to_string(),
            FunctionDescriptor::Custom { name, .. } => name.clone(),
        }
    }

    /// Parses the CLI spellings `x`, `x2`, `x4`, `xK` and `log`.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "log" => Some(FunctionDescriptor::Log),
            "x" => Some(FunctionDescriptor::Power(1)),
            _ => s.strip_prefix('x')?.parse().ok().filter(|k| *k > 0).map(FunctionDescriptor::Power),
        }
    }
}

impl fmt::Debug for FunctionDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FunctionDescriptor({})", self.name())
    }
}
