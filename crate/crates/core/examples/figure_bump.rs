//! The flat bump `1 - exp(-1/x²)` rebuilt from its even factors, printed as
//! CSV on (0, 1.5].
//!
//! The function is not analytic at the origin, so the extension is only
//! expected to follow it away from zero.

use mulext::{builtin, extend, TruncationSpec};
use num_complex::Complex64;

fn main() -> mulext::Result<()> {
    let f = builtin("bump")?;
    let spec = TruncationSpec::common(vec![2, 4, 6, 8], 20, 2f64.sqrt())?;

    println!("z_re,z_im,ext_re,ext_im,ref_re,ref_im,rel_err");
    let mut worst: f64 = 0.0;
    for i in 1..=60 {
        let x = 0.025 * i as f64;
        let result = extend(&f, Complex64::new(x, 0.0), &spec)?;
        let reference = result.reference.unwrap_or_default();
        if x >= 0.3 {
            worst = worst.max((result.value - reference).norm());
        }
        println!(
            "{x},0,{},{},{},{},{}",
            result.value.re,
            result.value.im,
            reference.re,
            reference.im,
            result.relative_error.unwrap_or(f64::NAN)
        );
    }
    eprintln!("max |ext - f| on [0.3, 1.5]: {worst:.3e}");
    Ok(())
}
