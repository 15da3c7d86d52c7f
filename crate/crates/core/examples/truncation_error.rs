//! Splits f(z) into the truncated extension times its two tail factors, one
//! for the depth cut and one for the factors left out of S_max.

use mulext::{builtin, identity_residual, truncation_error_factors, TruncationSpec};
use num_complex::Complex64;

fn main() -> mulext::Result<()> {
    let z = Complex64::new(0.5, 0.0);

    // exp(z) has a single factor, so the decomposition closes exactly
    let exp = builtin("exp")?;
    println!("{:>4} {:>14} {:>14} {:>12}", "N", "q_n", "tail_n", "defect");
    for n in [5, 10, 20, 40] {
        let spec = TruncationSpec::common(vec![1], n, 2.0)?;
        let e = truncation_error_factors(&exp, z, &spec)?;
        println!(
            "{n:>4} {:>14.10} {:>14.10} {:>12.2e}",
            e.q_n.re,
            e.tail_n_factor.re,
            e.closure_defect.unwrap_or(f64::NAN)
        );
    }

    // with factors outside S_max the tail_k factor carries the rest
    let f = builtin("poly-exp:1,0.5,-0.3")?;
    println!("\nS_max = {{1, 2}} for exp(z + z²/2 - 0.3 z³):");
    for n in [10, 20, 40] {
        let spec = TruncationSpec::common(vec![1, 2], n, 2.0)?;
        let e = truncation_error_factors(&f, z, &spec)?;
        let residual = identity_residual(&f, z, &spec)?;
        println!(
            "  N = {n:>2}: tail_n {:.3e}, tail_k {:.6}, residual {:.3e}",
            (e.tail_n_factor - 1.0).norm(),
            e.tail_k_factor.unwrap_or_default().re,
            residual.norm()
        );
    }
    println!("  the residual settles at 1/tail_k - 1 once tail_n reaches 1");
    Ok(())
}
