//! Writes the extension of `1 + sin(x)/2` on [-1, 1] as CSV, the input of the
//! plotting script.
//!
//! `cargo run --release --example figure_half_sine > half_sine.csv`

use mulext::{builtin, extend, TruncationSpec};
use num_complex::Complex64;

fn main() -> mulext::Result<()> {
    let f = builtin("half-sine")?;
    let spec = TruncationSpec::common(vec![1, 2, 3, 4], 40, 2.0)?;
    let points = 201;

    println!("z_re,z_im,ext_re,ext_im,ref_re,ref_im,rel_err");
    for i in 0..points {
        let x = if i == points - 1 {
            1.0
        } else {
            -1.0 + 2.0 * i as f64 / (points - 1) as f64
        };
        let result = extend(&f, Complex64::new(x, 0.0), &spec)?;
        let reference = result.reference.unwrap_or_default();
        println!(
            "{x},0,{},{},{},{},{}",
            result.value.re,
            result.value.im,
            reference.re,
            reference.im,
            result.relative_error.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
