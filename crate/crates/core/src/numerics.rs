//! Complex primitives shared by every other module.
//!
//! Products of thousands of function values are kept in log space by
//! [`LogProduct`], so partial products far outside the `f64` range stay
//! representable until the final exponentiation. Limits `r ↓ 1` are taken by
//! polynomial extrapolation in `r - 1` ([`extrapolate_limit`]).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Principal `k`-th root of `w`, with `arg(v)` in `(-π/k, π/k]`.
///
/// For real positive `w` this is the ordinary positive root.
pub fn principal_root(w: Complex64, k: u32) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::ZeroArgument("root order"));
    }
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::NonFinite { point: w });
    }
    if w.re == 0.0 && w.im == 0.0 {
        return Err(Error::ZeroArgument("root argument"));
    }
    if k == 1 {
        return Ok(w);
    }
    Ok(root_from_polar(w.norm().ln(), principal_arg(w), k))
}

/// `atan2` returns `-π` for a negative real with a negative zero imaginary
/// part; the principal branch wants `π` there.
pub(crate) fn principal_arg(w: Complex64) -> f64 {
    let arg = w.arg();
    if arg <= -PI {
        PI
    } else {
        arg
    }
}

/// Reduces an angle to `(-π, π]`.
pub(crate) fn wrap_phase(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut t = theta.rem_euclid(two_pi);
    if t > PI {
        t -= two_pi;
    }
    t
}

pub(crate) fn root_from_polar(log_modulus: f64, arg: f64, k: u32) -> Complex64 {
    let k = k as f64;
    Complex64::from_polar((log_modulus / k).exp(), arg / k)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Compensated sum of complex values.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub(crate) fn add(&mut self, x: Complex64) {
        self.re.add(x.re);
        self.im.add(x.im);
    }

    pub(crate) fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Overflow-safe product of complex factors raised to real or integer powers.
///
/// The product is stored as a natural-log magnitude and an unwrapped phase:
/// phases are accumulated, never reduced modulo `2π`, so [`LogProduct::log`]
/// is a single-valued logarithm of the product.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LogProduct {
    log_magnitude: CompensatedSum,
    phase: CompensatedSum,
    factor_count: u64,
}

impl LogProduct {
    /// The empty product, `1`.
    pub fn new() -> Self {
        Self::default()
    }

    /// Multiplies the product by `factor^exponent`.
    pub fn accumulate(&mut self, factor: Complex64, exponent: i64) -> Result<()> {
        self.accumulate_weighted(factor, exponent as f64)?;
        Ok(())
    }

    /// Multiplies the product by `factor^weight` for a real weight, taking the
    /// principal logarithm of `factor`.
    pub fn accumulate_weighted(&mut self, factor: Complex64, weight: f64) -> Result<()> {
        if !(factor.re.is_finite() && factor.im.is_finite()) {
            return Err(Error::NonFinite { point: factor });
        }
        let modulus = factor.norm();
        if modulus == 0.0 {
            return Err(Error::ZeroFactor);
        }
        self.log_magnitude.add(weight * modulus.ln());
        self.phase.add(weight * principal_arg(factor));
        self.factor_count = self
            .factor_count
            .saturating_add(weight.abs().round().max(1.0) as u64);
        Ok(())
    }

    /// Multiplies the product by `exp(weight * log)`.
    pub fn accumulate_log(&mut self, log: Complex64, weight: f64) {
        self.log_magnitude.add(weight * log.re);
        self.phase.add(weight * log.im);
        self.factor_count = self.factor_count.saturating_add(1);
    }

    /// Multiplies by another product raised to `sign` (`+1` or `-1`).
    pub fn merge(&mut self, other: &LogProduct, sign: i64) {
        let w = sign as f64;
        self.log_magnitude.add(w * other.log_magnitude.value());
        self.phase.add(w * other.phase.value());
        self.factor_count = self.factor_count.saturating_add(other.factor_count);
    }

    pub fn log_magnitude(&self) -> f64 {
        self.log_magnitude.value()
    }

    /// Unwrapped phase in radians.
    pub fn phase(&self) -> f64 {
        self.phase.value()
    }

    pub fn factor_count(&self) -> u64 {
        self.factor_count
    }

    /// `log_magnitude + i·phase`.
    pub fn log(&self) -> Complex64 {
        Complex64::new(self.log_magnitude(), self.phase())
    }

    /// Exponentiates the accumulated logarithm.
    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.log_magnitude().exp(), self.phase())
    }
}

/// Result of a polynomial extrapolation to `r = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub value: Complex64,
    /// Difference between the two highest extrapolation orders.
    pub error_estimate: f64,
}

impl Extrapolation {
    pub fn converged(&self, tolerance: f64) -> bool {
        self.error_estimate <= tolerance
    }
}

/// Extrapolates samples `(r, v(r))` to `r = 1` with Neville's scheme on the
/// variable `h = r - 1`.
///
/// Samples must be ordered with `r` strictly decreasing toward 1.
pub fn extrapolate_limit(samples: &[(f64, Complex64)]) -> Result<Extrapolation> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples(samples.len()));
    }
    let ordered = samples.iter().all(|(r, _)| *r > 1.0 && r.is_finite())
        && samples.windows(2).all(|w| w[1].0 < w[0].0);
    if !ordered {
        return Err(Error::UnorderedSamples);
    }

    let h: Vec<f64> = samples.iter().map(|(r, _)| r - 1.0).collect();
    let mut p: Vec<Complex64> = samples.iter().map(|(_, v)| *v).collect();
    let n = p.len();
    let mut lower_order = p[n - 1];
    for m in 1..n {
        if m == n - 1 {
            // P over samples 1..n-1, the best estimate that skips the coarsest sample
            lower_order = p[1];
        }
        for i in 0..n - m {
            let (hi, hj) = (h[i], h[i + m]);
            p[i] = (p[i] * (-hj) - p[i + 1] * (-hi)) / (hi - hj);
        }
    }
    Ok(Extrapolation {
        value: p[0],
        error_estimate: (p[0] - lower_order).norm(),
    })
}

/// Neville extrapolation of `v(t)` to `t = 0` along the finest samples,
/// stopping at the order whose change from the previous order is smallest.
/// That change is the error estimate. `t` must be positive and strictly
/// decreasing.
pub(crate) fn extrapolate_adaptive(t: &[f64], v: &[Complex64]) -> Extrapolation {
    let n = v.len();
    let mut p = v.to_vec();
    let mut best = Extrapolation {
        value: p[n - 1],
        error_estimate: f64::INFINITY,
    };
    let mut previous = p[n - 1];
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (p[i] * (-t[i + m]) - p[i + 1] * (-t[i])) / (t[i] - t[i + m]);
        }
        let current = p[n - 1 - m];
        let change = (current - previous).norm();
        if change < best.error_estimate {
            best = Extrapolation {
                value: current,
                error_estimate: change,
            };
        }
        previous = current;
    }
    best
}

/// Parses a complex literal such as `2`, `-0.5`, `3i`, `-i`, `1.2+0.3i` or
/// `1e-3-2.5e1i`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::InvalidArgument(format!("'{text}' is not a complex literal"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some(body) = s.strip_suffix(['i', 'j']) {
        // split at the last sign that is not part of an exponent
        let bytes = body.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            let c = bytes[idx];
            if (c == b'+' || c == b'-') && !matches!(bytes[idx - 1], b'e' | b'E') {
                split = Some(idx);
                break;
            }
        }
        let (re_text, im_text) = match split {
            Some(idx) => (&body[..idx], &body[idx..]),
            None => ("", body),
        };
        let im = match im_text {
            "" | "+" => 1.0,
            "-" => -1.0,
            t => t.parse::<f64>().map_err(|_| bad())?,
        };
        let re = if re_text.is_empty() {
            0.0
        } else {
            re_text.parse::<f64>().map_err(|_| bad())?
        };
        Ok(Complex64::new(re, im))
    } else {
        s.parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad())
    }
}
