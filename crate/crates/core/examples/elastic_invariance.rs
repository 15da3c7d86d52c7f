//! The same extension computed with different sampling ratios.

use mulext::{builtin, elastic_invariance_check, extend, RatioSchedule, TruncationSpec};
use num_complex::Complex64;

fn main() -> mulext::Result<()> {
    let f = builtin("poly-exp:0.7,-0.2,0.1")?;
    let z = Complex64::new(1.0, 0.0);
    let smax = vec![1, 2, 3];

    let mut specs = Vec::new();
    for r in [1.5, 2.0, 3.0] {
        let spec = TruncationSpec::common(smax.clone(), 60, r)?;
        println!("r = {r}: {:.14}", extend(&f, z, &spec)?.value.re);
        specs.push(spec);
    }
    println!("largest relative spread: {:.2e}", elastic_invariance_check(&f, z, &specs)?);

    let complex = TruncationSpec::new(
        smax,
        120,
        RatioSchedule::common(Complex64::new(1.2, 0.3)).entire(),
    )?;
    let value = extend(&f, z, &complex)?.value;
    println!("r = 1.2+0.3i: {:.14}{:+.1e}i", value.re, value.im);
    println!("f(z)        : {:.14}", f.evaluate(z)?.re);
    Ok(())
}
