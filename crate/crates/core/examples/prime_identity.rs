//! The extension with ratios `p_k^s` over the first primes, and the running
//! sums of μ*(n, s) in greatest-prime order.

use mulext::{mu_star_partial_sums, prime_extend, AnalyticFunctionModel, GpoBounds};
use num_complex::Complex64;

fn main() -> mulext::Result<()> {
    let s = Complex64::new(2.0, 0.0);
    let f = AnalyticFunctionModel::from_log_coefficients(vec![Complex64::new(1.0, 0.0)]);
    let z = Complex64::new(1.0, 0.0);

    println!("{:>3} {:>20} {:>12}", "E", "P", "|Σ μ*|");
    for e in [8, 12, 16, 20, 24] {
        let bounds = GpoBounds::new(6, e)?;
        let p = prime_extend(&f, z, s, bounds)?;
        let (_, sum) = *mu_star_partial_sums(s, bounds)?.last().unwrap();
        println!("{e:>3} {:>20.15} {:>12.3e}", p.value.re, sum.norm());
    }
    println!("    {:>20.15}", std::f64::consts::E);

    let bounds = GpoBounds::new(3, 6)?;
    println!("\nrunning sums, M = 3, E = 6:");
    for (n, sum) in mu_star_partial_sums(s, bounds)? {
        println!("  n = {n:>4}: {:+.6}", sum.re);
    }
    Ok(())
}
