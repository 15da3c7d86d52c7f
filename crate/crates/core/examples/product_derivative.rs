//! Derivatives from a product of function values.

use mulext::{builtin, product_derivative, LimitSchedule};
use num_complex::Complex64;

fn main() -> mulext::Result<()> {
    let schedule = LimitSchedule::default();
    let dz = Complex64::new(0.5, 0.0);

    let f = builtin("half-sine")?;
    println!("{:>6} {:>16} {:>16} {:>10}", "x", "product", "cos(x)/2", "est");
    for i in 0..=4 {
        let x = -1.0 + 0.5 * i as f64;
        let d = product_derivative(&f, Complex64::new(x, 0.0), dz, &schedule)?;
        println!(
            "{x:>6} {:>16.12} {:>16.12} {:>10.1e}",
            d.value.re,
            0.5 * x.cos(),
            d.error_estimate
        );
    }

    let exp = builtin("exp")?;
    let z = Complex64::new(0.3, 0.4);
    let d = product_derivative(&exp, z, dz, &schedule)?;
    println!("\nd/dz exp at {z}: {:.12}, exact {:.12}", d.value, z.exp());
    Ok(())
}
