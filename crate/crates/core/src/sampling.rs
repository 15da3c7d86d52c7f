//! Geometric sampling sequences, sampling products `P` and quotients `Q`.
//!
//! For a subset `S` the product `P(f, S, z)` multiplies `f` over the points
//! `z · ∏_{k∈S} X_{k,n_k}` where `X_{k,n} = [(r_k)^k - 1]^{1/k} / (r_k)^n`.
//! Three truncations are offered:
//!
//! * per-index: every `n_k` runs over `1..=cap` ([`sampling_product`]);
//! * simplex: `Σ n_k <= N`, enumerated directly ([`simplex_sampling_product`]);
//! * consolidated: the simplex truncation for a common ratio, where all
//!   points with the same `n = Σ n_k` coincide and are raised to the number of
//!   compositions of `n` ([`consolidated_product`]).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::function::AnalyticFunctionModel;
use crate::numerics::{principal_arg, principal_root, wrap_phase, LogProduct};
use crate::primes::nth_prime;
use crate::subsets::{composition_weight_next, validate_ground, IntegerSubset};

/// How the reciprocal geometric ratios `r_k` are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum RatioKind {
    /// `r_k = r` for every `k`.
    Common(Complex64),
    /// `r_k = ratios[k - 1]`.
    PerK(Vec<Complex64>),
    /// `r_k = (p_k)^s` with `p_k` the `k`-th prime.
    PrimePower(Complex64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioSchedule {
    pub kind: RatioKind,
    /// Skips the `Re(r_k^k) >= 1/2` check, which only matters when `f` is
    /// not entire.
    pub entire_function_mode: bool,
}

impl RatioSchedule {
    pub fn common(r: impl Into<Complex64>) -> Self {
        Self {
            kind: RatioKind::Common(r.into()),
            entire_function_mode: false,
        }
    }

    pub fn per_k(ratios: Vec<Complex64>) -> Self {
        Self {
            kind: RatioKind::PerK(ratios),
            entire_function_mode: false,
        }
    }

    pub fn prime_power(s: impl Into<Complex64>) -> Self {
        Self {
            kind: RatioKind::PrimePower(s.into()),
            entire_function_mode: false,
        }
    }

    pub fn entire(mut self) -> Self {
        self.entire_function_mode = true;
        self
    }

    pub fn common_ratio(&self) -> Option<Complex64> {
        match self.kind {
            RatioKind::Common(r) => Some(r),
            _ => None,
        }
    }

    /// A logarithm of `r_k`; `exp(n · log_ratio(k)) = r_k^n` for integer `n`.
    pub fn log_ratio(&self, k: u32) -> Result<Complex64> {
        if k == 0 {
            return Err(Error::ZeroArgument("sequence index k"));
        }
        match &self.kind {
            RatioKind::Common(r) => nonzero_log(*r),
            RatioKind::PerK(list) => {
                let r = list.get(k as usize - 1).ok_or_else(|| {
                    Error::InvalidArgument(format!("no ratio given for k = {k}"))
                })?;
                nonzero_log(*r)
            }
            RatioKind::PrimePower(s) => Ok(s * (nth_prime(k as u64)? as f64).ln()),
        }
    }

    pub fn ratio(&self, k: u32) -> Result<Complex64> {
        match &self.kind {
            RatioKind::Common(r) => Ok(*r),
            RatioKind::PerK(_) => Ok(self.log_ratio(k)?.exp()),
            RatioKind::PrimePower(_) => Ok(self.log_ratio(k)?.exp()),
        }
    }

    /// Checks `|r_k| > 1` and, unless in entire-function mode,
    /// `Re(r_k^k) >= 1/2` for every `k` in `ks`.
    pub fn check(&self, ks: &[u32]) -> Result<()> {
        for &k in ks {
            let log_r = self.log_ratio(k)?;
            if log_r.re <= 0.0 {
                return Err(Error::InvalidRatio {
                    k,
                    ratio: self.ratio(k)?,
                    condition: "|r_k| > 1",
                });
            }
            if !self.entire_function_mode {
                let power = log_r * k as f64;
                // Re(r^k) = |r^k| cos(arg r^k) >= 1/2
                if power.im.cos() < 0.5 * (-power.re).exp() {
                    return Err(Error::InvalidRatio {
                        k,
                        ratio: self.ratio(k)?,
                        condition: "Re(r_k^k) >= 1/2",
                    });
                }
            }
        }
        Ok(())
    }

    /// Logarithm of `[(r_k)^k - 1]^{1/k}` on the principal branch.
    pub(crate) fn log_root(&self, k: u32) -> Result<Complex64> {
        let log_r = self.log_ratio(k)?;
        let direct = match self.kind {
            RatioKind::Common(r) => Some(r.powu(k) - 1.0),
            RatioKind::PerK(_) => Some(self.ratio(k)?.powu(k) - 1.0),
            RatioKind::PrimePower(_) => None,
        };
        log_root_of_power_minus_one(log_r, k, direct)
    }
}

fn nonzero_log(r: Complex64) -> Result<Complex64> {
    if r.norm() == 0.0 || !(r.re.is_finite() && r.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("ratio {r} must be finite and nonzero")));
    }
    Ok(r.ln())
}

/// `log [exp(k·log_r) - 1]^{1/k}` with the principal root, computed without
/// forming `exp(k·log_r)` when it would overflow.
pub(crate) fn log_root_of_power_minus_one(
    log_r: Complex64,
    k: u32,
    direct: Option<Complex64>,
) -> Result<Complex64> {
    let power = log_r * k as f64;
    let (log_modulus, arg) = match direct {
        Some(w) if w.re.is_finite() && w.im.is_finite() && power.re < 40.0 => {
            if w.norm() == 0.0 {
                return Err(Error::DegenerateRatio {
                    ratio: log_r.exp(),
                    k,
                });
            }
            (w.norm().ln(), principal_arg(w))
        }
        _ if power.re >= 40.0 => {
            // w = e^P (1 - e^{-P}) with |e^{-P}| < 1e-17
            let correction = Complex64::new(1.0, 0.0) - (-power).exp();
            (
                power.re + correction.norm().ln(),
                wrap_phase(power.im + principal_arg(correction)),
            )
        }
        _ => {
            let w = power.exp() - 1.0;
            if w.norm() == 0.0 {
                return Err(Error::DegenerateRatio {
                    ratio: log_r.exp(),
                    k,
                });
            }
            (w.norm().ln(), principal_arg(w))
        }
    };
    Ok(Complex64::new(log_modulus, arg) / k as f64)
}

/// How far each geometric sequence is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CapPolicy {
    /// Multi-indices with `Σ n_k <= N`; with a common ratio this is the
    /// consolidated product truncated at `n <= N`.
    #[default]
    Simplex,
    /// Every index capped at `⌊N / |S|⌋`.
    PerIndex,
}

/// The truncation triplet `(S_max, N, r)` plus the capping policy.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationSpec {
    pub s_max: Vec<u32>,
    pub n_max: u32,
    pub ratios: RatioSchedule,
    pub policy: CapPolicy,
}

impl TruncationSpec {
    pub fn new(s_max: Vec<u32>, n_max: u32, ratios: RatioSchedule) -> Result<Self> {
        validate_ground(&s_max)?;
        if s_max.is_empty() {
            return Err(Error::InvalidSubset("S_max must be nonempty".into()));
        }
        if n_max == 0 {
            return Err(Error::ZeroArgument("N"));
        }
        Ok(Self {
            s_max,
            n_max,
            ratios,
            policy: CapPolicy::Simplex,
        })
    }

    /// Common real or complex ratio `r`.
    pub fn common(s_max: Vec<u32>, n_max: u32, r: impl Into<Complex64>) -> Result<Self> {
        Self::new(s_max, n_max, RatioSchedule::common(r))
    }

    pub fn with_policy(mut self, policy: CapPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_ratios(&self, ratios: RatioSchedule) -> Self {
        Self {
            ratios,
            ..self.clone()
        }
    }
}

/// `X_{k,n} = principal_root(r^k - 1, k) / r^n`.
pub fn sampling_point(k: u32, n: u32, r: Complex64) -> Result<Complex64> {
    if r.norm() == 0.0 {
        return Err(Error::ZeroArgument("ratio"));
    }
    if k == 0 {
        return Err(Error::ZeroArgument("sequence index k"));
    }
    let w = r.powu(k) - 1.0;
    if w.norm() == 0.0 {
        return Err(Error::DegenerateRatio { ratio: r, k });
    }
    Ok(principal_root(w, k)? / r.powu(n))
}

fn check_subset(subset: &[u32]) -> Result<()> {
    validate_ground(subset)
}

// Per-index log-offsets: log X_{k,n} for n = 1..=cap.
fn index_logs(k: u32, ratios: &RatioSchedule, cap: u32) -> Result<Vec<Complex64>> {
    let log_root = ratios.log_root(k)?;
    let log_r = ratios.log_ratio(k)?;
    Ok((1..=cap).map(|n| log_root - log_r * n as f64).collect())
}

fn evaluate_into(
    acc: &mut LogProduct,
    f: &AnalyticFunctionModel,
    point: Complex64,
    weight: f64,
) -> Result<()> {
    acc.accumulate_log(f.log_evaluate(point)?, weight);
    Ok(())
}

fn single_value(f: &AnalyticFunctionModel, z: Complex64) -> Result<LogProduct> {
    let mut acc = LogProduct::new();
    evaluate_into(&mut acc, f, z, 1.0)?;
    Ok(acc)
}

/// All evaluation points of the per-index truncated product, in the order
/// the product visits them.
pub fn sampling_points(
    subset: &[u32],
    z: Complex64,
    ratios: &RatioSchedule,
    per_index_cap: u32,
) -> Result<Vec<Complex64>> {
    check_subset(subset)?;
    let mut points = Vec::new();
    visit_cube(subset, ratios, per_index_cap, |log_offset| {
        points.push(z * log_offset.exp());
        Ok(())
    })?;
    Ok(points)
}

// Calls `visit` with Σ log X_{k,n_k} for every multi-index in [1, cap]^|S|,
// last index varying fastest.
fn visit_cube(
    subset: &[u32],
    ratios: &RatioSchedule,
    cap: u32,
    mut visit: impl FnMut(Complex64) -> Result<()>,
) -> Result<()> {
    if subset.is_empty() {
        return visit(Complex64::new(0.0, 0.0));
    }
    if cap == 0 {
        return Ok(());
    }
    let logs: Vec<Vec<Complex64>> = subset
        .iter()
        .map(|&k| index_logs(k, ratios, cap))
        .collect::<Result<_>>()?;
    let dims = subset.len();
    let mut index = vec![0usize; dims];
    loop {
        let offset: Complex64 = index.iter().zip(&logs).map(|(&i, l)| l[i]).sum();
        visit(offset)?;
        let mut d = dims;
        loop {
            if d == 0 {
                return Ok(());
            }
            d -= 1;
            index[d] += 1;
            if index[d] < cap as usize {
                break;
            }
            index[d] = 0;
        }
    }
}

/// `P(f, S, z)` with every index `n_k` capped at `per_index_cap`. The empty
/// subset gives `f(z)`.
pub fn sampling_product(
    f: &AnalyticFunctionModel,
    subset: &[u32],
    z: Complex64,
    ratios: &RatioSchedule,
    per_index_cap: u32,
) -> Result<Complex64> {
    Ok(sampling_product_log(f, subset, z, ratios, per_index_cap)?.value())
}

pub fn sampling_product_log(
    f: &AnalyticFunctionModel,
    subset: &[u32],
    z: Complex64,
    ratios: &RatioSchedule,
    per_index_cap: u32,
) -> Result<LogProduct> {
    check_subset(subset)?;
    if subset.is_empty() {
        return single_value(f, z);
    }
    let mut acc = LogProduct::new();
    visit_cube(subset, ratios, per_index_cap, |log_offset| {
        evaluate_into(&mut acc, f, z * log_offset.exp(), 1.0)
    })?;
    Ok(acc)
}

/// `P(f, S, z)` over the multi-indices with `Σ n_k <= n_max`, for any ratio
/// schedule.
pub fn simplex_sampling_product(
    f: &AnalyticFunctionModel,
    subset: &[u32],
    z: Complex64,
    ratios: &RatioSchedule,
    n_max: u32,
) -> Result<Complex64> {
    Ok(simplex_sampling_product_log(f, subset, z, ratios, n_max)?.value())
}

pub fn simplex_sampling_product_log(
    f: &AnalyticFunctionModel,
    subset: &[u32],
    z: Complex64,
    ratios: &RatioSchedule,
    n_max: u32,
) -> Result<LogProduct> {
    check_subset(subset)?;
    if subset.is_empty() {
        return single_value(f, z);
    }
    let dims = subset.len() as u32;
    let mut acc = LogProduct::new();
    if n_max < dims {
        return Ok(acc);
    }
    // index n of each row at position n - 1; the largest usable n_k leaves 1 for each other index
    let cap = n_max - (dims - 1);
    let logs: Vec<Vec<Complex64>> = subset
        .iter()
        .map(|&k| index_logs(k, ratios, cap))
        .collect::<Result<_>>()?;

    fn descend(
        depth: usize,
        budget: u32,
        offset: Complex64,
        logs: &[Vec<Complex64>],
        visit: &mut dyn FnMut(Complex64) -> Result<()>,
    ) -> Result<()> {
        if depth == logs.len() {
            return visit(offset);
        }
        let remaining_dims = (logs.len() - depth - 1) as u32;
        let top = budget - remaining_dims;
        for n in 1..=top {
            descend(depth + 1, budget - n, offset + logs[depth][n as usize - 1], logs, visit)?;
        }
        Ok(())
    }

    descend(0, n_max, Complex64::new(0.0, 0.0), &logs, &mut |log_offset| {
        evaluate_into(&mut acc, f, z * log_offset.exp(), 1.0)
    })?;
    Ok(acc)
}

/// `P(f, S, z)` for a common ratio, consolidated over `n = Σ n_k`:
/// `∏_{n=|S|}^{n_max} f(C_S z / r^n)^{C(n-1, |S|-1)}` with
/// `C_S = ∏_{k∈S} (r^k - 1)^{1/k}`.
pub fn consolidated_product(
    f: &AnalyticFunctionModel,
    subset: &[u32],
    z: Complex64,
    r: Complex64,
    n_max: u32,
) -> Result<Complex64> {
    Ok(consolidated_product_log(f, subset, z, r, n_max)?.value())
}

pub fn consolidated_product_log(
    f: &AnalyticFunctionModel,
    subset: &[u32],
    z: Complex64,
    r: Complex64,
    n_max: u32,
) -> Result<LogProduct> {
    check_subset(subset)?;
    if subset.is_empty() {
        return single_value(f, z);
    }
    let ratios = RatioSchedule::common(r);
    let log_r = ratios.log_ratio(1)?;
    let log_scale: Complex64 = subset
        .iter()
        .map(|&k| ratios.log_root(k))
        .sum::<Result<Complex64>>()?;
    let parts = subset.len() as u64;
    let mut acc = LogProduct::new();
    let mut weight = 1.0;
    for n in parts..=n_max as u64 {
        let point = z * (log_scale - log_r * n as f64).exp();
        evaluate_into(&mut acc, f, point, weight)?;
        weight = composition_weight_next(weight, n, parts);
    }
    Ok(acc)
}

/// The product for one subset under a truncation policy: consolidated for a
/// common ratio under [`CapPolicy::Simplex`], direct simplex enumeration for
/// other schedules, per-index caps `⌊N/|S|⌋` under [`CapPolicy::PerIndex`].
pub fn truncated_product_log(
    f: &AnalyticFunctionModel,
    subset: &[u32],
    z: Complex64,
    ratios: &RatioSchedule,
    n_max: u32,
    policy: CapPolicy,
) -> Result<LogProduct> {
    match (policy, ratios.common_ratio()) {
        (CapPolicy::Simplex, Some(r)) => consolidated_product_log(f, subset, z, r, n_max),
        (CapPolicy::Simplex, None) => simplex_sampling_product_log(f, subset, z, ratios, n_max),
        (CapPolicy::PerIndex, _) => {
            let cap = n_max / subset.len().max(1) as u32;
            sampling_product_log(f, subset, z, ratios, cap)
        }
    }
}

/// `Q(f, F, z)`: products of odd-cardinality subsets over products of
/// even-cardinality subsets, multiplied in the family's order.
pub fn sampling_quotient(
    f: &AnalyticFunctionModel,
    family: &[IntegerSubset],
    z: Complex64,
    ratios: &RatioSchedule,
    n_max: u32,
    policy: CapPolicy,
) -> Result<Complex64> {
    Ok(sampling_quotient_log(f, family, z, ratios, n_max, policy)?.value())
}

pub fn sampling_quotient_log(
    f: &AnalyticFunctionModel,
    family: &[IntegerSubset],
    z: Complex64,
    ratios: &RatioSchedule,
    n_max: u32,
    policy: CapPolicy,
) -> Result<LogProduct> {
    let mut acc = LogProduct::new();
    for subset in family {
        let p = truncated_product_log(f, subset.elements(), z, ratios, n_max, policy)?;
        acc.merge(&p, subset.sign());
    }
    Ok(acc)
}

/// Smallest consolidated cap `n` past which the neglected factors
/// `f(C z / r^n)^{C(n-1, parts-1)}` contribute below `1e-18` to the log,
/// given `log_scale = ln |C z|` and `log_ratio = ln |r| > 0`.
pub(crate) fn saturating_cap(log_ratio: f64, parts: u32, log_scale: f64) -> Result<u32> {
    if log_ratio <= 0.0 {
        return Err(Error::InvalidArgument("|r| must exceed 1".into()));
    }
    const TARGET: f64 = -41.5; // ln(1e-18)
    const LIMIT: u64 = 50_000_000;
    let parts = parts.max(1) as u64;
    let log_scale = log_scale.max(0.0);
    let mut log_weight = 0.0;
    let mut n = parts;
    // past the peak the weight ratio n/(n-p+1) stays below |r|
    let peak = ((parts - 1) as f64 * log_ratio.exp() / log_ratio.exp_m1()).ceil() as u64;
    loop {
        if n >= peak && log_weight + log_scale - n as f64 * log_ratio < TARGET {
            return Ok(n as u32);
        }
        if n > LIMIT {
            return Err(Error::InvalidArgument(
                "ratio too close to 1 for a converged product".into(),
            ));
        }
        log_weight += (n as f64).ln() - ((n + 1 - parts) as f64).ln();
        n += 1;
    }
}
