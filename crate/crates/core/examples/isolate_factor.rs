//! Recovers individual factors `exp(c_k z^k)` from a black-box function by
//! driving the ratio toward 1, and shows how one factor behaves inside
//! another index's product.

use mulext::{builtin, factor_cutoff_limit, isolate_factor, CapRule, LimitSchedule};
use num_complex::Complex64;

fn main() -> mulext::Result<()> {
    let f = builtin("poly-exp:1,1,-0.5")?;
    let schedule = LimitSchedule::default();
    let z = Complex64::new(1.0, 0.0);
    for k in 1..=4 {
        let est = isolate_factor(&f, k, z, &schedule)?;
        let exact = f.factor(k).map(|factor| factor.value(z)).unwrap_or_default();
        println!(
            "f_{k}(1) ≈ {:.10} ±{:.1e}, exact {:.10}",
            est.value.re, est.error_estimate, exact.re
        );
    }

    println!();
    let coarse = LimitSchedule::dyadic(3, 8, CapRule::Scaled(40.0))?;
    for (j, k) in [(2, 1), (1, 1), (1, 2), (3, 2)] {
        let result = factor_cutoff_limit(Complex64::new(1.0, 0.0), j, k, z, &coarse)?;
        println!(
            "lim P(f_{j}, {{{k}}}) : {:?} (slope {:.2})",
            result.class, result.slope
        );
    }
    Ok(())
}
