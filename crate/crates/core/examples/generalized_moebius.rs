//! Generalized Möbius values μ*(n, s) next to the classical μ(n).

use mulext::{moebius, moebius_limit_deviation, moebius_star};
use num_complex::Complex64;

fn main() -> mulext::Result<()> {
    println!("{:>4} {:>4} {:>14} {:>14} {:>14}", "n", "μ", "s = 1", "s = 4", "s = 2+3i");
    for n in 1..=16u64 {
        let one = moebius_star(n, Complex64::new(1.0, 0.0))?;
        let four = moebius_star(n, Complex64::new(4.0, 0.0))?;
        let complex = moebius_star(n, Complex64::new(2.0, 3.0))?;
        println!(
            "{n:>4} {:>4} {:>14.8} {:>14.8} {:>14}",
            moebius(n)?,
            one.re,
            four.re,
            format!("{:.4}{:+.4}i", complex.re, complex.im)
        );
    }

    println!("\nlargest |μ*(n, s) - μ(n)| for n <= 1000:");
    for s in [5.0, 10.0, 20.0, 40.0] {
        let worst = (1..=1000u64)
            .map(|n| moebius_limit_deviation(n, s))
            .collect::<mulext::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!("  s = {s:>4}: {worst:.3e}");
    }
    Ok(())
}
