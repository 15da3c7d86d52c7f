//! Analytic function models `f` with `f(0) = 1`.
//!
//! A model is a pure evaluator plus, optionally, the Taylor coefficients
//! `c_1..c_K` of `ln f`. With coefficients present the model factors as
//! `f = ∏ f_k` where `f_k(z) = exp(c_k z^k)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::parse_complex;

/// Evaluators below this magnitude are treated as vanished.
pub const VANISHING_THRESHOLD: f64 = 1e-300;

pub type Evaluator = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Region where a model may be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Entire,
    /// Closed disk of the given radius around the origin.
    Disk(f64),
}

impl Domain {
    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Domain::Entire => true,
            Domain::Disk(radius) => z.norm() <= radius,
        }
    }

    fn scaled(self, factor: f64) -> Domain {
        match self {
            Domain::Entire => Domain::Entire,
            Domain::Disk(radius) => Domain::Disk(radius / factor),
        }
    }
}

/// `exp(c_k z^k)`, the `k`-th multiplicative component of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionFactor {
    pub order: u32,
    pub coefficient: Complex64,
}

impl FunctionFactor {
    pub fn value(&self, z: Complex64) -> Complex64 {
        factor_value(self.coefficient, self.order, z)
    }
}

/// `exp(c · z^k)`.
pub fn factor_value(coefficient: Complex64, k: u32, z: Complex64) -> Complex64 {
    (coefficient * z.powu(k)).exp()
}

#[derive(Clone)]
pub struct AnalyticFunctionModel {
    evaluator: Evaluator,
    log_taylor_coeffs: Option<Vec<Complex64>>,
    domain: Domain,
    label: String,
}

impl fmt::Debug for AnalyticFunctionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticFunctionModel")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("log_taylor_coeffs", &self.log_taylor_coeffs)
            .finish_non_exhaustive()
    }
}

impl AnalyticFunctionModel {
    /// Wraps a black-box evaluator. The evaluator must return exactly `1` at
    /// the origin.
    pub fn new(
        label: impl Into<String>,
        domain: Domain,
        evaluator: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let evaluator: Evaluator = Arc::new(evaluator);
        let label = label.into();
        let at_origin = evaluator(Complex64::new(0.0, 0.0));
        if at_origin != Complex64::new(1.0, 0.0) {
            return Err(Error::InvalidArgument(format!(
                "{label}: f(0) = {at_origin}, expected exactly 1"
            )));
        }
        Ok(Self {
            evaluator,
            log_taylor_coeffs: None,
            domain,
            label,
        })
    }

    /// The entire function `exp(Σ c_k z^k)`, with `coeffs[0] = c_1`.
    pub fn from_log_coefficients(coeffs: Vec<Complex64>) -> Self {
        let label = format!(
            "poly-exp:{}",
            coeffs
                .iter()
                .map(|c| format_complex(*c))
                .collect::<Vec<_>>()
                .join(",")
        );
        Self::coefficient_model(label, coeffs, Domain::Entire)
    }

    fn coefficient_model(label: String, coeffs: Vec<Complex64>, domain: Domain) -> Self {
        let horner = coeffs.clone();
        let evaluator: Evaluator = Arc::new(move |z: Complex64| {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in horner.iter().rev() {
                acc = (acc + c) * z;
            }
            acc.exp()
        });
        Self {
            evaluator,
            log_taylor_coeffs: Some(coeffs),
            domain,
            label,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn log_taylor_coeffs(&self) -> Option<&[Complex64]> {
        self.log_taylor_coeffs.as_deref()
    }

    /// Coefficient `c_k`, zero beyond the stored list. `None` for black boxes.
    pub fn coefficient(&self, k: u32) -> Option<Complex64> {
        let coeffs = self.log_taylor_coeffs.as_ref()?;
        Some(
            coeffs
                .get((k as usize).wrapping_sub(1))
                .copied()
                .unwrap_or_default(),
        )
    }

    pub fn factor(&self, k: u32) -> Option<FunctionFactor> {
        self.coefficient(k).map(|coefficient| FunctionFactor {
            order: k,
            coefficient,
        })
    }

    /// Evaluates `f(z)`; fails outside the domain and where `f` vanishes.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        if !self.domain.contains(z) {
            let radius = match self.domain {
                Domain::Disk(r) => r,
                Domain::Entire => f64::INFINITY,
            };
            return Err(Error::OutsideDomain { point: z, radius });
        }
        let value = (self.evaluator)(z);
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::NonFinite { point: z });
        }
        if value.norm() < VANISHING_THRESHOLD {
            return Err(Error::VanishedValue { point: z });
        }
        Ok(value)
    }

    /// A logarithm of `f(z)`. Models with known coefficients return
    /// `Σ c_k z^k` directly, which keeps full relative precision when `z` is
    /// tiny; black boxes fall back to the principal `ln f(z)`.
    pub fn log_evaluate(&self, z: Complex64) -> Result<Complex64> {
        let Some(coeffs) = &self.log_taylor_coeffs else {
            return Ok(self.evaluate(z)?.ln());
        };
        if !self.domain.contains(z) {
            let radius = match self.domain {
                Domain::Disk(r) => r,
                Domain::Entire => f64::INFINITY,
            };
            return Err(Error::OutsideDomain { point: z, radius });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for c in coeffs.iter().rev() {
            acc = (acc + c) * z;
        }
        if !(acc.re.is_finite() && acc.im.is_finite()) {
            return Err(Error::NonFinite { point: z });
        }
        Ok(acc)
    }

    /// `w ↦ f(scale · w)`.
    pub fn scaled(&self, scale: Complex64) -> Self {
        let inner = self.evaluator.clone();
        let evaluator: Evaluator = Arc::new(move |w| inner(scale * w));
        let log_taylor_coeffs = self.log_taylor_coeffs.as_ref().map(|coeffs| {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * scale.powu(i as u32 + 1))
                .collect()
        });
        Self {
            evaluator,
            log_taylor_coeffs,
            domain: self.domain.scaled(scale.norm()),
            label: format!("{}(({}) z)", self.label, format_complex(scale)),
        }
    }

    /// The pointwise product `f · g`.
    pub fn product(&self, other: &Self) -> Self {
        let (f, g) = (self.evaluator.clone(), other.evaluator.clone());
        let evaluator: Evaluator = Arc::new(move |z| f(z) * g(z));
        let log_taylor_coeffs = match (&self.log_taylor_coeffs, &other.log_taylor_coeffs) {
            (Some(a), Some(b)) => {
                let len = a.len().max(b.len());
                Some(
                    (0..len)
                        .map(|i| {
                            a.get(i).copied().unwrap_or_default()
                                + b.get(i).copied().unwrap_or_default()
                        })
                        .collect(),
                )
            }
            _ => None,
        };
        let domain = match (self.domain, other.domain) {
            (Domain::Entire, d) | (d, Domain::Entire) => d,
            (Domain::Disk(a), Domain::Disk(b)) => Domain::Disk(a.min(b)),
        };
        Self {
            evaluator,
            log_taylor_coeffs,
            domain,
            label: format!("({})*({})", self.label, other.label),
        }
    }

    /// The product of the factors `f_k` whose order satisfies `keep`.
    /// `None` for black-box models.
    pub fn factor_subproduct(&self, keep: impl Fn(u32) -> bool) -> Option<Self> {
        let coeffs = self.log_taylor_coeffs.as_ref()?;
        let kept: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if keep(i as u32 + 1) {
                    *c
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let label = format!("{}[factors]", self.label);
        Some(Self::coefficient_model(label, kept, self.domain))
    }
}

/// Looks up a built-in model: `exp`, `half-sine`, `bump`, or
/// `poly-exp:c1,c2,...` with complex literals.
pub fn builtin(name: &str) -> Result<AnalyticFunctionModel> {
    let name = name.trim();
    match name {
        "exp" => {
            let mut model =
                AnalyticFunctionModel::from_log_coefficients(vec![Complex64::new(1.0, 0.0)]);
            model.label = "exp".into();
            model.evaluator = Arc::new(|z: Complex64| z.exp());
            Ok(model)
        }
        // 1 + sin(x)/2 stays >= 1/2 on the real line
        "half-sine" => AnalyticFunctionModel::new("half-sine", Domain::Disk(6.0), |z: Complex64| {
            1.0 + 0.5 * z.sin()
        }),
        "bump" => AnalyticFunctionModel::new("bump", Domain::Entire, |z: Complex64| {
            if z.re == 0.0 && z.im == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                1.0 - (-(z * z).inv()).exp()
            }
        }),
        _ => {
            let Some(list) = name.strip_prefix("poly-exp:") else {
                return Err(Error::UnknownFunction(name.to_string()));
            };
            let coeffs = list
                .split(',')
                .map(parse_complex)
                .collect::<Result<Vec<_>>>()?;
            Ok(AnalyticFunctionModel::from_log_coefficients(coeffs))
        }
    }
}

pub(crate) fn format_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 {
        format!("{}{}i", c.re, c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn exp_model() {
        let f = builtin("exp").unwrap();
        assert!((f.evaluate(re(1.0)).unwrap() - re(E)).norm() < 1e-15);
        assert!((f.evaluate(re(2.0)).unwrap() - re(7.38905609893065)).norm() < 1e-13);
        assert_eq!(f.coefficient(1), Some(re(1.0)));
        assert_eq!(f.coefficient(2), Some(re(0.0)));
    }

    #[test]
    fn half_sine_model() {
        let f = builtin("half-sine").unwrap();
        assert_eq!(f.evaluate(re(0.0)).unwrap(), re(1.0));
        assert!((f.evaluate(re(PI / 2.0)).unwrap() - re(1.5)).norm() < 1e-15);
        assert!(f.coefficient(1).is_none());
        assert!(matches!(
            f.evaluate(re(7.0)),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn bump_model() {
        let f = builtin("bump").unwrap();
        assert_eq!(f.evaluate(re(0.0)).unwrap(), re(1.0));
        let expected = 1.0 - (-1.0f64).exp();
        assert!((f.evaluate(re(1.0)).unwrap() - re(expected)).norm() < 1e-15);
        assert!((expected - 0.6321206).abs() < 1e-7);
        for x in [0.1, 0.37, 1.0, 2.5] {
            assert_eq!(f.evaluate(re(x)).unwrap(), f.evaluate(re(-x)).unwrap());
        }
    }

    #[test]
    fn factor_values() {
        assert!((factor_value(re(1.0), 1, re(1.0)) - re(E)).norm() < 1e-15);
        assert_eq!(factor_value(re(0.0), 5, re(7.0)), re(1.0));
        let direct = 4f64.exp();
        assert!((factor_value(re(1.0), 2, re(2.0)) - re(direct)).norm() < 1e-12);
        assert!((direct - 54.598150).abs() < 1e-6);
    }

    #[test]
    fn poly_exp_parses_complex_coefficients() {
        let f = builtin("poly-exp:1,0.5-0.25i,2i").unwrap();
        assert_eq!(
            f.log_taylor_coeffs().unwrap(),
            &[re(1.0), Complex64::new(0.5, -0.25), Complex64::new(0.0, 2.0)]
        );
        assert!(builtin("poly-exp:1,x").is_err());
        assert!(matches!(builtin("cosh"), Err(Error::UnknownFunction(_))));
    }

    #[test]
    fn poly_exp_is_product_of_factors() {
        let coeffs = vec![
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.2, 0.0),
            Complex64::new(0.05, -0.4),
        ];
        let f = AnalyticFunctionModel::from_log_coefficients(coeffs);
        let z = Complex64::new(0.7, -0.4);
        let product: Complex64 = (1..=3).map(|k| f.factor(k).unwrap().value(z)).product();
        let value = f.evaluate(z).unwrap();
        assert!((product - value).norm() / value.norm() < 1e-12);
    }

    #[test]
    fn black_box_must_be_one_at_origin() {
        assert!(AnalyticFunctionModel::new("cos+1", Domain::Entire, |z| z.cos() + 1.0).is_err());
    }

    #[test]
    fn vanishing_value_reports_point() {
        let f = AnalyticFunctionModel::new("1-z", Domain::Entire, |z| 1.0 - z).unwrap();
        assert_eq!(
            f.evaluate(re(1.0)),
            Err(Error::VanishedValue { point: re(1.0) })
        );
    }

    #[test]
    fn scaled_and_product_models() {
        let f = builtin("poly-exp:1,1").unwrap();
        let g = f.scaled(re(0.5));
        let z = re(0.8);
        assert!((g.evaluate(z).unwrap() - f.evaluate(re(0.4)).unwrap()).norm() < 1e-15);
        assert_eq!(g.coefficient(2), Some(re(0.25)));
        let h = f.product(&builtin("exp").unwrap());
        assert_eq!(h.coefficient(1), Some(re(2.0)));
        assert!((h.evaluate(z).unwrap() - (re(2.0 * 0.8 + 0.64)).exp()).norm() < 1e-13);
    }

    #[test]
    fn subproduct_keeps_selected_orders() {
        let f = builtin("poly-exp:1,2,3").unwrap();
        let high = f.factor_subproduct(|k| k > 1).unwrap();
        assert_eq!(high.coefficient(1), Some(re(0.0)));
        assert_eq!(high.coefficient(3), Some(re(3.0)));
        assert!(builtin("bump").unwrap().factor_subproduct(|_| true).is_none());
    }
}
