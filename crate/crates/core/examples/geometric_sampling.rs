//! Evaluation points and sampling products for a few small index sets.
//!
//! `cargo run --example geometric_sampling`

use mulext::{builtin, consolidated_product, sampling_points, sampling_product, RatioSchedule};
use num_complex::Complex64;

fn main() -> mulext::Result<()> {
    let f = builtin("poly-exp:1,0.5")?;
    let z = Complex64::new(0.8, 0.0);
    let ratios = RatioSchedule::common(2.0);

    println!("first points of P(f, {{1, 2}}, z) with r = 2:");
    for p in sampling_points(&[1, 2], z, &ratios, 3)? {
        println!("  {:.6}{:+.6}i", p.re, p.im);
    }

    println!("\n{:>10} {:>20} {:>20}", "S", "cube, cap 20", "consolidated, N 40");
    for subset in [vec![1], vec![2], vec![1, 2]] {
        let cube = sampling_product(&f, &subset, z, &ratios, 20)?;
        let consolidated = consolidated_product(&f, &subset, z, 2.0.into(), 40)?;
        println!("{:>10} {:>20.15} {:>20.15}", format!("{subset:?}"), cube.re, consolidated.re);
    }

    let quotient = sampling_product(&f, &[1], z, &ratios, 60)?
        * sampling_product(&f, &[2], z, &ratios, 60)?
        / sampling_product(&f, &[1, 2], z, &ratios, 30)?;
    println!("\nP({{1}}) P({{2}}) / P({{1,2}}) = {:.15}", quotient.re);
    println!("f(z)                      = {:.15}", f.evaluate(z)?.re);
    Ok(())
}
