//! Primes, factorization, Greatest Prime Order (GPO), the generalized Möbius
//! function `μ*(n, s)` and the prime functional identity.
//!
//! GPO lists 1 first and then the integers grouped by their greatest prime
//! factor, in increasing order of that prime; inside a group integers appear
//! in increasing numeric order. The truncation [`GpoBounds`] keeps integers
//! built from the first `M` primes with total exponent at most `E`.

use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extension::{finish_groups, ExtensionResult};
use crate::function::AnalyticFunctionModel;
use crate::numerics::{ComplexSum, LogProduct};
use crate::sampling::{log_root_of_power_minus_one, RatioSchedule, TruncationSpec};

/// Largest `k` accepted by [`nth_prime`].
pub const MAX_PRIME_INDEX: u64 = 100_000;
const SIEVE_LIMIT: usize = 1_300_000;

fn prime_table() -> &'static [u64] {
    static TABLE: OnceLock<Vec<u64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut composite = vec![false; SIEVE_LIMIT + 1];
        let mut primes = Vec::with_capacity(MAX_PRIME_INDEX as usize + 1000);
        for i in 2..=SIEVE_LIMIT {
            if composite[i] {
                continue;
            }
            primes.push(i as u64);
            let mut j = i * i;
            while j <= SIEVE_LIMIT {
                composite[j] = true;
                j += i;
            }
        }
        primes
    })
}

/// The `k`-th prime, `p_1 = 2`.
pub fn nth_prime(k: u64) -> Result<u64> {
    if k == 0 {
        return Err(Error::ZeroArgument("prime index"));
    }
    if k > MAX_PRIME_INDEX {
        return Err(Error::OutOfSieveRange(k));
    }
    Ok(prime_table()[k as usize - 1])
}

/// `π(x)`, the number of primes `<= x`.
pub fn prime_pi(x: u64) -> Result<u64> {
    if x > SIEVE_LIMIT as u64 {
        return Err(Error::OutOfSieveRange(x));
    }
    Ok(prime_table().partition_point(|&p| p <= x) as u64)
}

/// Canonical factorization `n = ∏ p^e`, primes increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub n: u64,
    pub prime_powers: Vec<(u64, u32)>,
}

impl Factorization {
    /// `ω(n)`, the number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.prime_powers.len()
    }

    /// `Ω(n)`, the prime factors counted with multiplicity.
    pub fn big_omega(&self) -> u32 {
        self.prime_powers.iter().map(|&(_, e)| e).sum()
    }

    /// The set `P(n)` of prime factors.
    pub fn primes(&self) -> Vec<u64> {
        self.prime_powers.iter().map(|&(p, _)| p).collect()
    }

    pub fn is_squarefree(&self) -> bool {
        self.prime_powers.iter().all(|&(_, e)| e == 1)
    }

    pub fn greatest_prime(&self) -> Option<u64> {
        self.prime_powers.last().map(|&(p, _)| p)
    }
}

/// Trial division by the sieved primes; `factorize(1)` is empty.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::ZeroArgument("n"));
    }
    let mut rest = n;
    let mut prime_powers = Vec::new();
    for &p in prime_table() {
        if p * p > rest {
            break;
        }
        if rest.is_multiple_of(p) {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            prime_powers.push((p, e));
        }
    }
    if rest > 1 {
        let limit = SIEVE_LIMIT as u64;
        if rest > limit && rest / limit > limit {
            // a cofactor above SIEVE_LIMIT^2 might be composite
            return Err(Error::OutOfSieveRange(n));
        }
        prime_powers.push((rest, 1));
    }
    Ok(Factorization { n, prime_powers })
}

/// Truncation of the GPO stream: first `M` primes, total exponent `<= E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GpoBounds {
    pub max_prime_index: u32,
    pub max_exponent_sum: u32,
}

impl GpoBounds {
    /// Fails unless every admissible integer fits in 127 bits.
    pub fn new(max_prime_index: u32, max_exponent_sum: u32) -> Result<Self> {
        if max_prime_index == 0 {
            return Err(Error::ZeroArgument("max prime index"));
        }
        if max_exponent_sum == 0 {
            return Err(Error::ZeroArgument("max exponent sum"));
        }
        let too_large = Error::BoundsTooLarge {
            max_prime_index,
            max_exponent_sum,
        };
        let p = nth_prime(max_prime_index as u64).map_err(|_| too_large.clone())?;
        if (p as f64).log2() * max_exponent_sum as f64 >= 127.0 {
            return Err(too_large);
        }
        Ok(Self {
            max_prime_index,
            max_exponent_sum,
        })
    }
}

/// One integer of the GPO stream with its exponent vector over `p_1..p_m`,
/// `m` being the index of its greatest prime (empty for 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GpoEntry {
    pub n: u128,
    pub exponents: Vec<u8>,
}

impl GpoEntry {
    /// Index `m` of the greatest prime, 0 for `n = 1`.
    pub fn group(&self) -> u32 {
        self.exponents.len() as u32
    }

    pub fn omega(&self) -> usize {
        self.exponents.iter().filter(|&&e| e > 0).count()
    }
}

fn gpo_group(m: u32, budget: u32) -> Vec<GpoEntry> {
    let primes: Vec<u128> = (1..=m as u64)
        .map(|k| nth_prime(k).expect("checked by GpoBounds") as u128)
        .collect();
    let mut out = Vec::new();
    let mut exponents = vec![0u8; m as usize];

    fn fill(
        depth: usize,
        left: u32,
        value: u128,
        primes: &[u128],
        exponents: &mut Vec<u8>,
        out: &mut Vec<GpoEntry>,
    ) {
        let last = depth == primes.len() - 1;
        let min = u32::from(last);
        let mut v = value * primes[depth].pow(min);
        for e in min..=left {
            exponents[depth] = e as u8;
            if last {
                out.push(GpoEntry {
                    n: v,
                    exponents: exponents.clone(),
                });
            } else {
                fill(depth + 1, left - e, v, primes, exponents, out);
            }
            v *= primes[depth];
        }
        exponents[depth] = 0;
    }

    fill(0, budget, 1, &primes, &mut exponents, &mut out);
    out.sort_unstable_by_key(|entry| entry.n);
    out
}

/// The truncated GPO stream with exponent vectors, starting with 1.
pub fn gpo_entries(bounds: GpoBounds) -> Vec<GpoEntry> {
    let mut all = vec![GpoEntry {
        n: 1,
        exponents: Vec::new(),
    }];
    for m in 1..=bounds.max_prime_index {
        all.extend(gpo_group(m, bounds.max_exponent_sum));
    }
    all
}

/// The truncated GPO stream of integers, starting with 1.
pub fn gpo_enumerate(bounds: GpoBounds) -> Vec<u128> {
    gpo_entries(bounds).into_iter().map(|e| e.n).collect()
}

/// `μ(n)`: `(-1)^ω(n)` for squarefree `n`, else 0.
pub fn moebius(n: u64) -> Result<i8> {
    let f = factorize(n)?;
    if !f.is_squarefree() {
        return Ok(0);
    }
    Ok(if f.omega() % 2 == 0 { 1 } else { -1 })
}

// log of [p^{s π(p)} - 1]^{1/π(p)} for the k-th prime p
fn log_prime_root(k: u64, s: Complex64) -> Result<Complex64> {
    let p = nth_prime(k)?;
    let log_p = (p as f64).ln();
    log_root_of_power_minus_one(s * log_p, k as u32, None)
}

/// `μ*(n, s) = (-1)^ω(n) ∏_{p | n} [p^{s π(p)} - 1]^{1/π(p)} / n^s`, with
/// `μ*(1, s) = 1`. Powers of `p` are formed in log space, so large `Re(s)`
/// does not overflow.
pub fn moebius_star(n: u64, s: Complex64) -> Result<Complex64> {
    if n == 1 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let f = factorize(n)?;
    let mut log = Complex64::new(0.0, 0.0);
    for &(p, e) in &f.prime_powers {
        let k = prime_pi(p)?;
        log += log_prime_root(k, s)? - s * (e as f64 * (p as f64).ln());
    }
    let sign = if f.omega() % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * log.exp())
}

/// `|μ*(n, s) - μ(n)|` for real `s`.
pub fn moebius_limit_deviation(n: u64, s: f64) -> Result<f64> {
    let star = moebius_star(n, Complex64::new(s, 0.0))?;
    Ok((star - moebius(n)? as f64).norm())
}

/// One term `μ*(n, s)` of the GPO sum.
#[derive(Debug, Clone, PartialEq)]
pub struct MuStarTerm {
    pub n: u128,
    pub s: Complex64,
    pub value: Complex64,
    pub omega: usize,
    /// Index of the greatest prime factor, 0 for `n = 1`.
    pub group: u32,
}

/// `log(∏_{p|n} [p^{sπ(p)} - 1]^{1/π(p)} / n^s)` for a GPO entry.
fn entry_log_coefficient(entry: &GpoEntry, roots: &[Complex64], log_primes: &[f64], s: Complex64) -> Complex64 {
    let mut log = Complex64::new(0.0, 0.0);
    for (i, &e) in entry.exponents.iter().enumerate() {
        if e > 0 {
            log += roots[i] - s * (e as f64 * log_primes[i]);
        }
    }
    log
}

struct PrimeRoots {
    roots: Vec<Complex64>,
    log_primes: Vec<f64>,
}

fn prime_roots(m: u32, s: Complex64) -> Result<PrimeRoots> {
    let roots = (1..=m as u64)
        .map(|k| log_prime_root(k, s))
        .collect::<Result<Vec<_>>>()?;
    let log_primes = (1..=m as u64)
        .map(|k| nth_prime(k).map(|p| (p as f64).ln()))
        .collect::<Result<Vec<_>>>()?;
    Ok(PrimeRoots { roots, log_primes })
}

/// The terms `μ*(n, s)` in GPO order.
pub fn mu_star_terms(s: Complex64, bounds: GpoBounds) -> Result<Vec<MuStarTerm>> {
    let table = prime_roots(bounds.max_prime_index, s)?;
    Ok(gpo_entries(bounds)
        .into_iter()
        .map(|entry| {
            let omega = entry.omega();
            let value = if entry.n == 1 {
                Complex64::new(1.0, 0.0)
            } else {
                let sign = if omega % 2 == 0 { 1.0 } else { -1.0 };
                sign * entry_log_coefficient(&entry, &table.roots, &table.log_primes, s).exp()
            };
            MuStarTerm {
                n: entry.n,
                s,
                value,
                omega,
                group: entry.group(),
            }
        })
        .collect())
}

/// Running sums of `μ*(n, s)` in GPO order, including `n = 1`; the last
/// entry is the identity defect at these bounds.
pub fn mu_star_partial_sums(s: Complex64, bounds: GpoBounds) -> Result<Vec<(u128, Complex64)>> {
    let mut sum = ComplexSum::default();
    Ok(mu_star_terms(s, bounds)?
        .into_iter()
        .map(|term| {
            sum.add(term.value);
            (term.n, sum.value())
        })
        .collect())
}

/// Running sums of `μ(n)` in GPO order.
pub fn mu_partial_sums(bounds: GpoBounds) -> Vec<(u128, i64)> {
    let mut sum = 0i64;
    gpo_entries(bounds)
        .into_iter()
        .map(|entry| {
            if entry.exponents.iter().all(|&e| e <= 1) {
                sum += if entry.omega() % 2 == 0 { 1 } else { -1 };
            }
            (entry.n, sum)
        })
        .collect()
}

/// The prime functional identity truncated at `bounds`:
/// `∏_{n >= 2, GPO} f(c_n z)^{(-1)^{ω(n)-1}}` with
/// `c_n = ∏_{p|n} [p^{sπ(p)} - 1]^{1/π(p)} / n^s = (-1)^{ω(n)} μ*(n, s)`.
///
/// This is the extension with ratios `r_k = p_k^s`, ground set `{1..M}` and
/// budget `Σ n_k <= E`; the returned spec records that equivalent truncation.
pub fn prime_extend(
    f: &AnalyticFunctionModel,
    z: Complex64,
    s: Complex64,
    bounds: GpoBounds,
) -> Result<ExtensionResult> {
    // |2^s| > 1 and Re(2^s) >= 1/2
    RatioSchedule::prime_power(s).check(&[1])?;
    let table = prime_roots(bounds.max_prime_index, s)?;
    let spec = TruncationSpec::new(
        (1..=bounds.max_prime_index).collect(),
        bounds.max_exponent_sum,
        RatioSchedule::prime_power(s),
    )?;

    let groups: Vec<LogProduct> = (1..=bounds.max_prime_index)
        .into_par_iter()
        .map(|m| {
            let mut acc = LogProduct::new();
            for entry in gpo_group(m, bounds.max_exponent_sum) {
                let coefficient =
                    entry_log_coefficient(&entry, &table.roots, &table.log_primes, s).exp();
                let point = z * coefficient;
                let sign = if entry.omega() % 2 == 1 { 1.0 } else { -1.0 };
                acc.accumulate_log(f.log_evaluate(point)?, sign);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let labelled = (1..=bounds.max_prime_index).zip(groups).collect();
    finish_groups(f, z, spec, labelled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::builtin;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn prime_table_examples() {
        assert_eq!(nth_prime(1).unwrap(), 2);
        assert_eq!(nth_prime(25).unwrap(), 97);
        assert_eq!(nth_prime(100_000).unwrap(), 1_299_709);
        assert_eq!(prime_pi(5).unwrap(), 3);
        assert_eq!(prime_pi(1).unwrap(), 0);
        assert!(nth_prime(100_001).is_err());
        for k in [1u64, 2, 10, 1000, 99_999] {
            assert_eq!(prime_pi(nth_prime(k).unwrap()).unwrap(), k);
        }
    }

    #[test]
    fn sieve_matches_trial_division() {
        let is_prime = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
        let brute: Vec<u64> = (2..2000).filter(|&n| is_prime(n)).collect();
        assert_eq!(&prime_table()[..brute.len()], &brute[..]);
    }

    #[test]
    fn factorization_examples() {
        let one = factorize(1).unwrap();
        assert_eq!(one.omega(), 0);
        assert!(one.prime_powers.is_empty());
        assert_eq!(factorize(12).unwrap().prime_powers, vec![(2, 2), (3, 1)]);
        let primorial = factorize(9_699_690).unwrap();
        assert_eq!(primorial.primes(), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert!(primorial.is_squarefree());
        let big = factorize(2 * 1_000_000_007).unwrap();
        assert_eq!(big.primes(), vec![2, 1_000_000_007]);
        let semiprime = factorize(1_299_709 * 1_000_003).unwrap();
        assert_eq!(semiprime.primes(), vec![1_000_003, 1_299_709]);
    }

    #[test]
    fn factorization_multiplies_back() {
        for n in 1..5000u64 {
            let f = factorize(n).unwrap();
            let product: u64 = f.prime_powers.iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(product, n);
        }
    }

    #[test]
    fn gpo_small() {
        let b = GpoBounds::new(2, 3).unwrap();
        assert_eq!(gpo_enumerate(b), vec![1, 2, 4, 8, 3, 6, 9, 12, 18, 27]);
    }

    #[test]
    fn gpo_bounds_overflow() {
        assert!(GpoBounds::new(6, 24).is_ok());
        assert!(matches!(
            GpoBounds::new(2, 200),
            Err(Error::BoundsTooLarge { .. })
        ));
    }

    #[test]
    fn moebius_values() {
        assert_eq!(moebius(1).unwrap(), 1);
        assert_eq!(moebius(6).unwrap(), 1);
        assert_eq!(moebius(12).unwrap(), 0);
        assert_eq!(moebius(30).unwrap(), -1);
    }

    #[test]
    fn moebius_star_examples() {
        assert_eq!(moebius_star(1, c(0.3, 7.0)).unwrap(), c(1.0, 0.0));
        assert!((moebius_star(2, c(1.0, 0.0)).unwrap() - c(-0.5, 0.0)).norm() < 1e-15);
        assert!((moebius_star(4, c(1.0, 0.0)).unwrap() - c(-0.25, 0.0)).norm() < 1e-15);
        // n = 3, s = 1: π(3) = 2, -(3^2 - 1)^(1/2) / 3
        let v = moebius_star(3, c(1.0, 0.0)).unwrap();
        assert!((v.re + 8f64.sqrt() / 3.0).abs() < 1e-15);
    }

    #[test]
    fn moebius_limit() {
        assert_eq!(moebius_limit_deviation(1, 30.0).unwrap(), 0.0);
        let d2 = moebius_limit_deviation(2, 30.0).unwrap();
        assert!((d2 - 2f64.powi(-30)).abs() < 1e-20);
        let d4 = moebius_limit_deviation(4, 30.0).unwrap();
        let expected = (2f64.powi(30) - 1.0) / 4f64.powi(30);
        assert!((d4 - expected).abs() < 1e-22);
        // large Re(s) must not overflow
        let v = moebius_star(97, c(100.0, 0.0)).unwrap();
        assert!((v + 1.0).norm() < 1e-12);
        // with Im(s) != 0 the principal root leaves a root of unity behind
        let w = moebius_star(97, c(100.0, 3.0)).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mu_sums_close_each_group() {
        let b = GpoBounds::new(4, 8).unwrap();
        let sums = mu_partial_sums(b);
        assert_eq!(sums[0], (1, 1));
        let entries = gpo_entries(b);
        for i in 1..entries.len() {
            let closes = i + 1 == entries.len() || entries[i + 1].group() != entries[i].group();
            if closes {
                assert_eq!(sums[i].1, 0, "after n = {}", sums[i].0);
            }
        }
    }

    #[test]
    fn mu_star_sign_matches_exponent() {
        let s = c(2.0, 0.5);
        let b = GpoBounds::new(3, 5).unwrap();
        let table = prime_roots(3, s).unwrap();
        for (term, entry) in mu_star_terms(s, b).unwrap().iter().zip(gpo_entries(b)).skip(1) {
            let coefficient = entry_log_coefficient(&entry, &table.roots, &table.log_primes, s).exp();
            // the μ* sign (-1)^ω is minus the product exponent (-1)^(ω-1)
            let exponent = if term.omega % 2 == 1 { 1.0 } else { -1.0 };
            assert!((term.value + exponent * coefficient).norm() < 1e-14);
            let direct = moebius_star(term.n as u64, s).unwrap();
            assert!((direct - term.value).norm() < 1e-13);
        }
    }

    #[test]
    fn prime_extend_origin_and_coefficient() {
        let f = builtin("exp").unwrap();
        let b = GpoBounds::new(3, 6).unwrap();
        let at_zero = prime_extend(&f, c(0.0, 0.0), c(2.0, 0.0), b).unwrap();
        assert_eq!(at_zero.value, c(1.0, 0.0));
        let s = c(1.5, 0.4);
        let coefficient = prime_roots(1, s).unwrap().roots[0].exp() / c(2.0, 0.0).powc(s);
        assert!((coefficient + moebius_star(2, s).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn prime_extend_rejects_small_s() {
        let f = builtin("exp").unwrap();
        let b = GpoBounds::new(2, 4).unwrap();
        assert!(prime_extend(&f, c(1.0, 0.0), c(-0.5, 0.0), b).is_err());
    }
}
