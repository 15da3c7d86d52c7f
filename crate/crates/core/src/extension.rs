//! Truncated multiplicative extensions and the tools built on them.
//!
//! [`extend`] multiplies the GEO groups `Q(f, F*_{max=m})` for `m` in
//! `S_max`, which for analytic `f` with `f(0) = 1` converges to `f(z)`.
//! The remaining operations reuse the same products: the identity residual,
//! the truncation-error factors, elastic invariance, and the three `r → 1`
//! tools (factor isolation, factor cutoff, product derivative).

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::AnalyticFunctionModel;
use crate::numerics::{extrapolate_adaptive, extrapolate_limit, ComplexSum, Extrapolation, LogProduct};
use crate::sampling::{
    consolidated_product_log, sampling_product_log, saturating_cap, truncated_product_log,
    RatioSchedule, TruncationSpec,
};
use crate::subsets::{geo_groups, IntegerSubset};

/// Any running partial whose log-magnitude exceeds this is reported as
/// divergent.
pub const DIVERGENCE_LOG_MAGNITUDE: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionResult {
    pub value: Complex64,
    /// Unwrapped logarithm of the value, accumulated without overflow.
    pub log_value: Complex64,
    /// `(m, running product after group m)` in GEO order.
    pub group_partials: Vec<(u32, Complex64)>,
    /// `(m, Q(f, F*_{max=m}))`, so that each partial is the previous one
    /// times the group quotient.
    pub group_quotients: Vec<(u32, Complex64)>,
    pub spec: TruncationSpec,
    /// `f(z)` when it can be evaluated.
    pub reference: Option<Complex64>,
    pub relative_error: Option<f64>,
}

/// Folds per-group log products into an [`ExtensionResult`].
pub(crate) fn finish_groups(
    f: &AnalyticFunctionModel,
    z: Complex64,
    spec: TruncationSpec,
    groups: Vec<(u32, LogProduct)>,
) -> Result<ExtensionResult> {
    let mut running = LogProduct::new();
    let mut value = Complex64::new(1.0, 0.0);
    let mut group_partials = Vec::with_capacity(groups.len());
    let mut group_quotients = Vec::with_capacity(groups.len());
    for (m, group) in groups {
        running.merge(&group, 1);
        let log_magnitude = running.log_magnitude().abs().max(group.log_magnitude().abs());
        if !(log_magnitude <= DIVERGENCE_LOG_MAGNITUDE) {
            return Err(Error::DivergentPartial {
                group: m,
                log_magnitude,
            });
        }
        let quotient = group.value();
        value *= quotient;
        group_quotients.push((m, quotient));
        group_partials.push((m, value));
    }
    let reference = f.evaluate(z).ok();
    let relative_error = reference.map(|r| (value - r).norm() / r.norm());
    Ok(ExtensionResult {
        value,
        log_value: running.log(),
        group_partials,
        group_quotients,
        spec,
        reference,
        relative_error,
    })
}

// One LogProduct per GEO group of `ground`, with per-subset products computed
// in parallel and combined in GEO order.
fn group_products(
    ground: &[u32],
    product: impl Fn(&IntegerSubset) -> Result<LogProduct> + Sync,
) -> Result<Vec<(u32, LogProduct)>> {
    let groups = geo_groups(ground)?;
    let flat: Vec<&IntegerSubset> = groups.iter().flat_map(|(_, g)| g.iter()).collect();
    let products: Vec<Result<LogProduct>> = flat.par_iter().map(|s| product(s)).collect();
    let mut products = products.into_iter();
    let mut out = Vec::with_capacity(groups.len());
    for (m, members) in &groups {
        let mut acc = LogProduct::new();
        for subset in members {
            let p = products.next().expect("one product per subset")?;
            acc.merge(&p, subset.sign());
        }
        out.push((*m, acc));
    }
    Ok(out)
}

/// The truncated extension `Q_N(f, F*(S_max))` at `z`, grouped in GEO order.
pub fn extend(
    f: &AnalyticFunctionModel,
    z: Complex64,
    spec: &TruncationSpec,
) -> Result<ExtensionResult> {
    spec.ratios.check(&spec.s_max)?;
    let groups = group_products(&spec.s_max, |subset| {
        truncated_product_log(f, subset.elements(), z, &spec.ratios, spec.n_max, spec.policy)
    })?;
    finish_groups(f, z, spec.clone(), groups)
}

// exp(d) - 1 without cancellation for small d
fn exp_m1(d: Complex64) -> Complex64 {
    if d.norm() < 1e-3 {
        d * (1.0 + d / 2.0 * (1.0 + d / 3.0 * (1.0 + d / 4.0 * (1.0 + d / 5.0))))
    } else {
        d.exp() - 1.0
    }
}

/// `extend(f, z, spec) / f(z) - 1`, which tends to 0 as the truncation
/// grows. Exactly 0 at `z = 0`.
pub fn identity_residual(
    f: &AnalyticFunctionModel,
    z: Complex64,
    spec: &TruncationSpec,
) -> Result<Complex64> {
    let reference = f.evaluate(z)?;
    let result = extend(f, z, spec)?;
    Ok(exp_m1(result.log_value - reference.ln()))
}

/// The factors of `f(z) ≈ q_n · tail_n · tail_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationErrorFactors {
    /// The truncated extension `Q_N(f, F*(S_max))`.
    pub q_n: Complex64,
    /// `Q(w ↦ f(w / r^N), F*(S_max))` at `z`, the contribution of the
    /// products beyond depth `N`.
    pub tail_n_factor: Complex64,
    /// `f_out(z) / Q(f_out, F*(S_max))` where `f_out` collects the factors
    /// whose order is outside `S_max`; `None` for black-box models.
    pub tail_k_factor: Option<Complex64>,
    pub reference: Complex64,
    /// `q_n · tail_n · tail_k` when the last factor is available.
    pub reconstruction: Option<Complex64>,
    /// `|reconstruction - f(z)| / |f(z)|`.
    pub closure_defect: Option<f64>,
}

// Q(f, F*(ground), z) with every consolidated product run to saturation.
fn saturated_quotient(
    f: &AnalyticFunctionModel,
    ground: &[u32],
    z: Complex64,
    r: Complex64,
) -> Result<LogProduct> {
    let schedule = RatioSchedule::common(r);
    let log_r = schedule.log_ratio(1)?.re;
    let groups = group_products(ground, |subset| {
        let log_scale: f64 = subset
            .elements()
            .iter()
            .map(|&k| schedule.log_root(k).map(|l| l.re))
            .sum::<Result<f64>>()?
            + z.norm().max(f64::MIN_POSITIVE).ln();
        let cap = saturating_cap(log_r, subset.len() as u32, log_scale)?;
        consolidated_product_log(f, subset.elements(), z, r, cap)
    })?;
    let mut acc = LogProduct::new();
    for (_, g) in groups {
        acc.merge(&g, 1);
    }
    Ok(acc)
}

/// Splits `f(z)` into the truncated extension and the two error factors:
/// one from stopping the products at depth `N`, one from leaving out the
/// integers beyond `S_max`. Requires a common ratio.
pub fn truncation_error_factors(
    f: &AnalyticFunctionModel,
    z: Complex64,
    spec: &TruncationSpec,
) -> Result<TruncationErrorFactors> {
    let r = spec
        .ratios
        .common_ratio()
        .ok_or(Error::Unsupported("truncation error factors need a common ratio"))?;
    let reference = f.evaluate(z)?;
    let q_n = extend(f, z, spec)?;

    let shrink = (-(RatioSchedule::common(r).log_ratio(1)? * spec.n_max as f64)).exp();
    let tail_n = saturated_quotient(&f.scaled(shrink), &spec.s_max, z, r)?;

    let tail_k = match f.log_taylor_coeffs() {
        None => None,
        Some(coeffs) => {
            let outside = coeffs
                .iter()
                .enumerate()
                .any(|(i, c)| c.norm() != 0.0 && !spec.s_max.contains(&(i as u32 + 1)));
            if !outside {
                Some(Complex64::new(1.0, 0.0))
            } else {
                let f_out = f
                    .factor_subproduct(|j| !spec.s_max.contains(&j))
                    .expect("model has coefficients");
                let full = f_out.evaluate(z)?;
                let partial = saturated_quotient(&f_out, &spec.s_max, z, r)?;
                Some(full / partial.value())
            }
        }
    };

    let reconstruction = tail_k.map(|k| q_n.value * tail_n.value() * k);
    Ok(TruncationErrorFactors {
        q_n: q_n.value,
        tail_n_factor: tail_n.value(),
        tail_k_factor: tail_k,
        reference,
        reconstruction,
        closure_defect: reconstruction.map(|v| (v - reference).norm() / reference.norm()),
    })
}

/// Largest pairwise relative deviation `|e_i - e_j| / |e_i|` between the
/// extensions under several truncation specs (typically differing only in
/// their ratios). A single spec gives 0.
pub fn elastic_invariance_check(
    f: &AnalyticFunctionModel,
    z: Complex64,
    specs: &[TruncationSpec],
) -> Result<f64> {
    if specs.is_empty() {
        return Err(Error::InvalidArgument("at least one spec is required".into()));
    }
    let values: Vec<Complex64> = specs
        .par_iter()
        .map(|spec| extend(f, z, spec).map(|r| r.value))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            worst = worst.max((a - b).norm() / a.norm());
            worst = worst.max((a - b).norm() / b.norm());
        }
    }
    Ok(worst)
}

/// Depth of the products at a given ratio in an `r → 1` schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CapRule {
    /// `⌈c / (r - 1)⌉`, keeping the geometric tail near `e^{-c}`.
    Scaled(f64),
    Fixed(u32),
}

/// Real ratios decreasing toward 1 and the product depth used at each.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitSchedule {
    ratios: Vec<f64>,
    cap: CapRule,
}

impl Default for LimitSchedule {
    /// `r_j = 1 + 2^{-j}` for `j = 3..=10`, depth `⌈40 / (r - 1)⌉`.
    fn default() -> Self {
        Self {
            ratios: (3..=10).map(|j| 1.0 + 2f64.powi(-j)).collect(),
            cap: CapRule::Scaled(40.0),
        }
    }
}

impl LimitSchedule {
    pub fn new(ratios: Vec<f64>, cap: CapRule) -> Result<Self> {
        if ratios.len() < 3 {
            return Err(Error::TooFewSamples(ratios.len()));
        }
        let ordered = ratios.iter().all(|r| *r > 1.0 && r.is_finite())
            && ratios.windows(2).all(|w| w[1] < w[0]);
        if !ordered {
            return Err(Error::UnorderedSamples);
        }
        match cap {
            CapRule::Scaled(c) if !(c > 0.0) => {
                return Err(Error::InvalidArgument("cap scale must be positive".into()))
            }
            CapRule::Fixed(0) => return Err(Error::ZeroArgument("cap")),
            _ => {}
        }
        Ok(Self { ratios, cap })
    }

    /// `r_j = 1 + 2^{-j}` for `j` in `first..=last` with the given cap rule.
    pub fn dyadic(first: i32, last: i32, cap: CapRule) -> Result<Self> {
        Self::new((first..=last).map(|j| 1.0 + 2f64.powi(-j)).collect(), cap)
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn cap_for(&self, r: f64) -> u32 {
        match self.cap {
            CapRule::Scaled(c) => (c / (r - 1.0)).ceil().min(u32::MAX as f64) as u32,
            CapRule::Fixed(n) => n,
        }
    }

    // `(r, sample(r, cap))` at each ratio, computed in parallel
    fn samples(&self, sample: impl Fn(f64, u32) -> Result<Complex64> + Sync) -> Result<Vec<(f64, Complex64)>> {
        self.ratios
            .par_iter()
            .map(|&r| sample(r, self.cap_for(r)).map(|v| (r, v)))
            .collect()
    }

    // Evaluates `sample` at each ratio and extrapolates to r = 1.
    fn extrapolate(&self, sample: impl Fn(f64, u32) -> Result<Complex64> + Sync) -> Result<Extrapolation> {
        extrapolate_limit(&self.samples(sample)?)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    a / x * b
}

fn one() -> Extrapolation {
    Extrapolation {
        value: Complex64::new(1.0, 0.0),
        error_estimate: 0.0,
    }
}

/// Estimates the factor `f_k(z) = exp(c_k z^k)` as `lim_{r→1} Q(f, F*_{max=k})`
/// by extrapolating the logarithm of the group quotient.
///
/// The other factors leave terms in `log Q` of order `h^{j σ(S) - |S|}` with
/// `h = r - 1` and `σ(S) = Σ_{i∈S} 1/i`, so the limit is taken in the
/// variable `h^{1/L}`, `L = lcm(1..=k)`, choosing the extrapolation order
/// adaptively. The error estimate is carried over to the value; it grows
/// quickly with `k` and callers decide whether it is acceptable.
pub fn isolate_factor(
    f: &AnalyticFunctionModel,
    k: u32,
    z: Complex64,
    schedule: &LimitSchedule,
) -> Result<Extrapolation> {
    if k == 0 {
        return Err(Error::ZeroArgument("factor order k"));
    }
    if k as usize > crate::subsets::DEFAULT_MAX_GROUND {
        return Err(Error::InvalidArgument(format!("k = {k} gives too many subsets")));
    }
    if z.norm() == 0.0 {
        return Ok(one());
    }
    let ground: Vec<u32> = (1..=k).collect();
    let members = geo_groups(&ground)?
        .pop()
        .map(|(_, g)| g)
        .expect("ground set is nonempty");
    let samples = schedule.samples(|r, cap| {
        let mut acc = LogProduct::new();
        for subset in &members {
            let p = consolidated_product_log(f, subset.elements(), z, Complex64::new(r, 0.0), cap)?;
            acc.merge(&p, subset.sign());
        }
        Ok(acc.log())
    })?;
    let l = (1..=k as u64).fold(1, lcm) as f64;
    let t: Vec<f64> = samples.iter().map(|(r, _)| (r - 1.0).powf(1.0 / l)).collect();
    let v: Vec<Complex64> = samples.iter().map(|(_, v)| *v).collect();
    let log = extrapolate_adaptive(&t, &v);
    let value = log.value.exp();
    Ok(Extrapolation {
        value,
        error_estimate: value.norm() * log.error_estimate,
    })
}

/// Outcome of `lim_{r→1} P(f_j, {k}, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffClass {
    /// `j = k`: the limit is the factor itself.
    EqualsFactor,
    /// The limit is 1 (`j > k`, or `c_j z^j = 0`).
    One,
    /// `|P| → 0`.
    Zero,
    /// `|P| → ∞`.
    Infinity,
    /// The log-magnitude trend is too flat or too oscillatory to call.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffResult {
    pub class: CutoffClass,
    /// The limit when it is finite and nonzero.
    pub value: Option<Complex64>,
    /// Fitted exponent `α` in `|log P| ~ (r - 1)^α`.
    pub slope: f64,
    /// `(r, log P(f_j, {k}, z))` along the schedule.
    pub samples: Vec<(f64, Complex64)>,
}

const MAX_CUTOFF_ORDER: u32 = 8;

/// Classifies `lim_{r→1} P(f_j, {k}, z)` for the factor `f_j = exp(c_j z^j)`
/// from the trend of `log P` along the schedule.
pub fn factor_cutoff_limit(
    c_j: Complex64,
    j: u32,
    k: u32,
    z: Complex64,
    schedule: &LimitSchedule,
) -> Result<CutoffResult> {
    if j == 0 || k == 0 {
        return Err(Error::ZeroArgument("factor order"));
    }
    if j > MAX_CUTOFF_ORDER || k > MAX_CUTOFF_ORDER {
        return Err(Error::InvalidArgument(format!(
            "orders j, k must be at most {MAX_CUTOFF_ORDER}"
        )));
    }
    if c_j.norm() == 0.0 || z.norm() == 0.0 {
        return Ok(CutoffResult {
            class: CutoffClass::One,
            value: Some(Complex64::new(1.0, 0.0)),
            slope: f64::INFINITY,
            samples: Vec::new(),
        });
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); j as usize];
    coeffs[j as usize - 1] = c_j;
    let factor = AnalyticFunctionModel::from_log_coefficients(coeffs);

    let samples: Vec<(f64, Complex64)> = schedule
        .ratios()
        .par_iter()
        .map(|&r| {
            let ratios = RatioSchedule::common(r);
            sampling_product_log(&factor, &[k], z, &ratios, schedule.cap_for(r)).map(|p| (r, p.log()))
        })
        .collect::<Result<_>>()?;

    // least-squares slope of ln|L| against ln(r - 1) over the last three samples
    let tail = &samples[samples.len().saturating_sub(3)..];
    let points: Vec<(f64, f64)> = tail
        .iter()
        .map(|(r, l)| ((r - 1.0).ln(), l.norm().max(f64::MIN_POSITIVE).ln()))
        .collect();
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let slope = sxy / sxx;

    let last = samples.last().expect("schedule has samples").1;
    let (class, value) = if slope >= 0.1 {
        (CutoffClass::One, Some(Complex64::new(1.0, 0.0)))
    } else if slope <= -0.1 {
        if last.re.abs() < 0.1 * last.norm() {
            (CutoffClass::Indeterminate, None)
        } else if last.re < 0.0 {
            (CutoffClass::Zero, Some(Complex64::new(0.0, 0.0)))
        } else {
            (CutoffClass::Infinity, None)
        }
    } else if slope.abs() < 0.05 {
        let log = extrapolate_limit(&samples)?;
        (CutoffClass::EqualsFactor, Some(log.value.exp()))
    } else {
        (CutoffClass::Indeterminate, None)
    };
    Ok(CutoffResult {
        class,
        value,
        slope,
        samples,
    })
}

/// `f'(z) ≈ (f(z) / dz) · lim_{r→1} Σ_n log[f(z + (r-1) r^{-n} dz) / f(z)]`,
/// the sum running to the schedule's depth at each ratio.
pub fn product_derivative(
    f: &AnalyticFunctionModel,
    z: Complex64,
    dz: Complex64,
    schedule: &LimitSchedule,
) -> Result<Extrapolation> {
    if dz.norm() == 0.0 {
        return Err(Error::ZeroArgument("dz"));
    }
    let base = f.evaluate(z)?;
    let limit = schedule.extrapolate(|r, cap| {
        let h = r - 1.0;
        let mut sum = ComplexSum::default();
        let mut step = h * dz;
        for _ in 0..cap {
            step /= r;
            let point = z + step;
            sum.add((f.evaluate(point)? / base).ln());
        }
        Ok(sum.value())
    })?;
    let scale = base / dz;
    Ok(Extrapolation {
        value: scale * limit.value,
        error_estimate: scale.norm() * limit.error_estimate,
    })
}
