use mulext::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn subsets_of(ground: &[u32]) -> Vec<IntegerSubset> {
    enumerate_geo(ground).unwrap().collect()
}

/// A single factor `exp(c_k z^k)` as a model.
fn single_factor(k: u32, ck: Complex64) -> AnalyticFunctionModel {
    let mut coeffs = vec![c(0.0, 0.0); k as usize];
    coeffs[k as usize - 1] = ck;
    AnalyticFunctionModel::from_log_coefficients(coeffs)
}

fn small_complex(radius: f64) -> impl Strategy<Value = Complex64> {
    (0.0..radius, -std::f64::consts::PI..std::f64::consts::PI)
        .prop_map(|(m, a)| Complex64::from_polar(m, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn principal_root_round_trips(w in small_complex(50.0), k in 1u32..8) {
        prop_assume!(w.norm() > 1e-6);
        let root = principal_root(w, k).unwrap();
        prop_assert!(rel(root.powu(k), w) < 1e-12);
        let arg = root.arg();
        let half_width = std::f64::consts::PI / k as f64;
        prop_assert!(arg > -half_width - 1e-12 && arg <= half_width + 1e-12);
    }

    #[test]
    fn log_product_round_trips(
        factors in proptest::collection::vec((small_complex(3.0), -3i64..4), 1..12)
    ) {
        let mut acc = LogProduct::new();
        let mut direct = c(1.0, 0.0);
        for &(w, e) in &factors {
            let w = w + 0.5;
            prop_assume!(w.norm() > 0.1);
            acc.accumulate(w, e).unwrap();
            direct *= w.powi(e as i32);
        }
        prop_assert!(rel(acc.value(), direct) < 1e-11);
    }

    #[test]
    fn single_factor_is_invariant(
        k in 1u32..=6,
        ck in small_complex(1.0),
        r in 1.5f64..3.0,
        z in small_complex(1.0),
    ) {
        let f = single_factor(k, ck);
        let p = sampling_product(&f, &[k], z, &RatioSchedule::common(r), 60).unwrap();
        prop_assert!(rel(p, f.evaluate(z).unwrap()) < 1e-8);
    }

    #[test]
    fn factor_removes_its_own_index(
        k in 1u32..=3,
        mask in 0u32..8,
        ck in small_complex(1.0),
        r in 2.5f64..3.0,
        z in small_complex(1.0),
    ) {
        let mut with_k: Vec<u32> = (1..=3).filter(|j| mask & (1 << (j - 1)) != 0).collect();
        if !with_k.contains(&k) {
            with_k.push(k);
            with_k.sort_unstable();
        }
        let without_k: Vec<u32> = with_k.iter().copied().filter(|&j| j != k).collect();
        let f = single_factor(k, ck);
        let ratios = RatioSchedule::common(r);
        let a = sampling_product(&f, &with_k, z, &ratios, 24).unwrap();
        let b = sampling_product(&f, &without_k, z, &ratios, 24).unwrap();
        prop_assert!(rel(a, b) < 1e-8, "S = {:?}: {} vs {}", with_k, a, b);
    }

    #[test]
    fn product_is_multiplicative(
        a in proptest::collection::vec(small_complex(0.5), 1..4),
        b in proptest::collection::vec(small_complex(0.5), 1..4),
        mask in 1u32..8,
        z in small_complex(1.0),
    ) {
        let f = AnalyticFunctionModel::from_log_coefficients(a);
        let g = AnalyticFunctionModel::from_log_coefficients(b);
        let fg = f.product(&g);
        let subset: Vec<u32> = (1..=3).filter(|j| mask & (1 << (j - 1)) != 0).collect();
        let ratios = RatioSchedule::common(2.0);
        let lhs = sampling_product(&fg, &subset, z, &ratios, 12).unwrap();
        let rhs = sampling_product(&f, &subset, z, &ratios, 12).unwrap()
            * sampling_product(&g, &subset, z, &ratios, 12).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-10);
    }

    #[test]
    fn quotient_is_additive_over_disjoint_families(
        coeffs in proptest::collection::vec(small_complex(0.5), 1..5),
        split in proptest::collection::vec(any::<bool>(), 15),
        z in small_complex(0.8),
    ) {
        let f = AnalyticFunctionModel::from_log_coefficients(coeffs);
        let family = subsets_of(&[1, 2, 3, 4]);
        let (f1, f2): (Vec<_>, Vec<_>) = family
            .iter()
            .cloned()
            .zip(split)
            .partition(|(_, left)| *left);
        let f1: Vec<IntegerSubset> = f1.into_iter().map(|(s, _)| s).collect();
        let f2: Vec<IntegerSubset> = f2.into_iter().map(|(s, _)| s).collect();
        let ratios = RatioSchedule::common(2.0);
        let q = |fam: &[IntegerSubset]| {
            sampling_quotient(&f, fam, z, &ratios, 24, CapPolicy::Simplex).unwrap()
        };
        prop_assert!(rel(q(&family), q(&f1) * q(&f2)) < 1e-10);
    }

    #[test]
    fn points_stay_inside_the_disk_of_z(
        mask in 1u32..32,
        r in 1.05f64..4.0,
        z in small_complex(5.0),
    ) {
        prop_assume!(z.norm() > 1e-3);
        let subset: Vec<u32> = (1..=5).filter(|j| mask & (1 << (j - 1)) != 0).collect();
        let points = sampling_points(&subset, z, &RatioSchedule::common(r), 4).unwrap();
        for p in points {
            prop_assert!(p.norm() < z.norm());
        }
    }

    #[test]
    fn points_scale_with_z(mask in 1u32..16, r in 1.2f64..3.0, z in small_complex(3.0)) {
        let subset: Vec<u32> = (1..=4).filter(|j| mask & (1 << (j - 1)) != 0).collect();
        let ratios = RatioSchedule::common(r);
        let one = sampling_points(&subset, z, &ratios, 5).unwrap();
        let two = sampling_points(&subset, 2.0 * z, &ratios, 5).unwrap();
        prop_assert_eq!(one.len(), two.len());
        for (a, b) in one.iter().zip(&two) {
            prop_assert!((2.0 * a - b).norm() <= 1e-15 * b.norm().max(1.0));
        }
    }

    #[test]
    fn poly_exp_is_the_product_of_its_factors(
        coeffs in proptest::collection::vec(small_complex(1.0), 1..6),
        z in small_complex(1.5),
    ) {
        let f = AnalyticFunctionModel::from_log_coefficients(coeffs.clone());
        let mut product = c(1.0, 0.0);
        for k in 1..=coeffs.len() as u32 {
            product *= f.factor(k).unwrap().value(z);
        }
        prop_assert!(rel(product, f.evaluate(z).unwrap()) < 1e-12);
    }

    #[test]
    fn bump_is_even(x in 0.05f64..3.0, y in -0.2f64..0.2) {
        let f = builtin("bump").unwrap();
        let a = f.evaluate(c(x, y)).unwrap();
        let b = f.evaluate(c(-x, -y)).unwrap();
        prop_assert!((a - b).norm() <= 1e-15 * a.norm().max(1.0));
    }

    #[test]
    fn geo_groups_have_zero_sign_sum(len in 1usize..10) {
        let ground: Vec<u32> = (1..=len as u32).collect();
        let groups = geo_groups(&ground).unwrap();
        prop_assert_eq!(groups.len(), len);
        for (i, (m, members)) in groups.iter().enumerate() {
            prop_assert_eq!(*m, ground[i]);
            prop_assert_eq!(members.len(), 1usize << i);
            prop_assert!(members.iter().all(|s| s.greatest() == *m));
            let signed: i64 = members.iter().map(|s| s.sign()).sum();
            prop_assert_eq!(signed, if i == 0 { 1 } else { 0 });
        }
    }

    #[test]
    fn gpo_matches_brute_force(m in 1u32..=4, e in 1u32..=10) {
        let primes: Vec<u64> = (1..=m as u64).map(|k| nth_prime(k).unwrap()).collect();
        // every product of at most `e` primes from the list, with repetition
        let mut brute: Vec<u64> = vec![1];
        let mut layer: Vec<(u64, usize)> = vec![(1, 0)];
        for _ in 0..e {
            let mut next = Vec::new();
            for &(n, from) in &layer {
                for (i, &p) in primes.iter().enumerate().skip(from) {
                    next.push((n * p, i));
                }
            }
            brute.extend(next.iter().map(|&(n, _)| n));
            layer = next;
        }
        brute.sort_by_key(|&n| (factorize(n).unwrap().greatest_prime().unwrap_or(1), n));
        let got: Vec<u64> = gpo_enumerate(GpoBounds::new(m, e).unwrap())
            .into_iter()
            .map(|n| n as u64)
            .collect();
        prop_assert_eq!(got, brute);
    }

    #[test]
    fn sign_bookkeeping_matches_cardinality(mask in 1u32..(1 << 8)) {
        let elements: Vec<u32> = (1..=8).filter(|j| mask & (1 << (j - 1)) != 0).collect();
        let s = IntegerSubset::new(elements.clone()).unwrap();
        let expected = if elements.len() % 2 == 1 { 1 } else { -1 };
        prop_assert_eq!(s.sign(), expected);
        prop_assert_eq!(s.greatest(), *elements.last().unwrap());
    }

    #[test]
    fn prime_extend_matches_extend(
        sigma in 1.0f64..3.0,
        z in small_complex(0.5),
        m in 1u32..=3,
    ) {
        let f = AnalyticFunctionModel::from_log_coefficients(vec![c(1.0, 0.0), c(0.3, 0.0)]);
        let s = c(sigma, 0.0);
        let bounds = GpoBounds::new(m, 12).unwrap();
        let primed = prime_extend(&f, z, s, bounds).unwrap();
        let spec = TruncationSpec::new((1..=m).collect(), 12, RatioSchedule::prime_power(s)).unwrap();
        let direct = extend(&f, z, &spec).unwrap();
        prop_assert!(rel(primed.value, direct.value) < 1e-10);
    }

    #[test]
    fn partials_telescope(
        coeffs in proptest::collection::vec(small_complex(0.5), 1..5),
        z in small_complex(0.8),
    ) {
        let f = AnalyticFunctionModel::from_log_coefficients(coeffs);
        let spec = TruncationSpec::common(vec![1, 2, 3, 4], 24, 2.0).unwrap();
        let result = extend(&f, z, &spec).unwrap();
        let mut running = c(1.0, 0.0);
        for ((m, partial), (mq, quotient)) in result.group_partials.iter().zip(&result.group_quotients) {
            prop_assert_eq!(m, mq);
            running *= quotient;
            prop_assert!(rel(*partial, running) < 1e-14);
        }
        prop_assert_eq!(result.value, result.group_partials.last().unwrap().1);
    }

    #[test]
    fn single_index_truncation_error_is_exact(
        c1 in small_complex(1.0),
        z in small_complex(1.0),
        r in 1.5f64..3.0,
        n in 5u32..40,
    ) {
        let f = AnalyticFunctionModel::from_log_coefficients(vec![c1]);
        let spec = TruncationSpec::common(vec![1], n, r).unwrap();
        let factors = truncation_error_factors(&f, z, &spec).unwrap();
        let rebuilt = factors.q_n * factors.tail_n_factor * factors.tail_k_factor.unwrap();
        prop_assert!(rel(rebuilt, f.evaluate(z).unwrap()) < 1e-12);
    }

    #[test]
    fn mu_star_bounded_when_every_prime_root_is_admissible(
        n in 2u64..10_000,
        sigma in 0.05f64..3.0,
        t in -10.0f64..10.0,
    ) {
        let s = c(sigma, t);
        let f = factorize(n).unwrap();
        let admissible = f.primes().iter().all(|&p| {
            let k = prime_pi(p).unwrap() as f64;
            (s * k * (p as f64).ln()).exp().re >= 0.5
        });
        prop_assume!(admissible);
        prop_assert!(moebius_star(n, s).unwrap().norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn mu_star_bounded_for_real_s(n in 1u64..100_000, s in 0.01f64..40.0) {
        prop_assert!(moebius_star(n, c(s, 0.0)).unwrap().norm() <= 1.0 + 1e-12);
    }
}

#[test]
fn index_removal_with_five_indices() {
    let f = single_factor(3, c(0.7, -0.2));
    let ratios = RatioSchedule::common(3.0);
    let z = c(0.6, 0.3);
    let a = sampling_product(&f, &[1, 2, 3, 4, 5], z, &ratios, 20).unwrap();
    let b = sampling_product(&f, &[1, 2, 4, 5], z, &ratios, 20).unwrap();
    assert!(rel(a, b) < 1e-8, "{a} vs {b}");
}

#[test]
fn residual_shrinks_as_n_grows() {
    let f = builtin("poly-exp:1,0.5").unwrap();
    let z = c(0.7, 0.2);
    let mut previous = f64::INFINITY;
    for n in [12, 24, 36, 48] {
        let spec = TruncationSpec::common(vec![1, 2], n, 2.0).unwrap();
        let residual = identity_residual(&f, z, &spec).unwrap().norm();
        assert!(residual < previous, "N = {n}: {residual} >= {previous}");
        previous = residual;
    }
}
