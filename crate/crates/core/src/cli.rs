//! The `mulext` command line.
//!
//! Every subcommand prints a table (default) or CSV. Options may also come
//! from a `key=value` file given with `--config`; keys are the long option
//! names without dashes and flags on the command line take precedence.
//!
//! Exit codes: 0 on success, 1 when the engine fails, 2 for bad arguments or
//! configuration.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Error;
use crate::extension::{
    elastic_invariance_check, extend, factor_cutoff_limit, identity_residual, isolate_factor,
    product_derivative, truncation_error_factors, CapRule, ExtensionResult, LimitSchedule,
};
use crate::function::{builtin, factor_value, AnalyticFunctionModel};
use crate::numerics::parse_complex;
use crate::primes::{moebius, moebius_star, mu_partial_sums, mu_star_terms, prime_extend, GpoBounds};
use crate::sampling::{CapPolicy, RatioSchedule, TruncationSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ENGINE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mulext",
    version,
    about = "Multiplicative extension of analytic functions from values on geometric sequences"
)]
struct Cli {
    /// key=value file supplying defaults for any long option
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Truncated extension of f on a grid of z
    Extend(ExtendArgs),
    /// extension / f(z) - 1
    Identity(ExtendArgs),
    /// Truncation-error factors q_n, tail_n, tail_k
    Errors(ExtendArgs),
    /// Spread of the extension across several ratios
    Invariance(InvarianceArgs),
    /// Isolate the factor f_k(z) by letting r approach 1
    Factor(FactorArgs),
    /// Classify lim P(f_j, {k}) as r approaches 1
    Cutoff(CutoffArgs),
    /// Derivative of f from a product of values
    Derive(DeriveArgs),
    /// Generalized Möbius values for n = 1..nmax
    Mustar(MuStarArgs),
    /// Running sums of μ*(n, s) or μ(n) in greatest-prime order
    Primesum(PrimeSumArgs),
    /// The prime functional identity evaluated on a grid of z
    PrimeExtend(PrimeExtendArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Default, PartialEq, Eq)]
enum Format {
    #[default]
    Table,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum, Default)]
enum Policy {
    #[default]
    Simplex,
    PerIndex,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PointArgs {
    /// Single evaluation point (complex literal)
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    /// start:stop:count, endpoints may be complex
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
}

#[derive(Debug, Args)]
struct FunctionArg {
    /// exp, half-sine, bump or poly-exp:c1,c2,...
    #[arg(long = "fn", value_name = "NAME", default_value = "exp", allow_hyphen_values = true)]
    function: String,
}

#[derive(Debug, Args)]
struct TruncationArgs {
    /// Ground set S_max, comma separated
    #[arg(long, default_value = "1")]
    smax: String,
    /// Depth N
    #[arg(long, default_value_t = 40)]
    n: u32,
    /// Common ratio
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["ratios", "prime_s"])]
    r: Option<String>,
    /// Per-k ratios r_1,r_2,...
    #[arg(long, allow_hyphen_values = true, conflicts_with = "prime_s")]
    ratios: Option<String>,
    /// Use r_k = p_k^s
    #[arg(long = "prime-s", allow_hyphen_values = true)]
    prime_s: Option<String>,
    /// Skip the Re(r_k^k) >= 1/2 check
    #[arg(long)]
    entire: bool,
    #[arg(long, value_enum, default_value_t = Policy::Simplex)]
    policy: Policy,
}

#[derive(Debug, Args)]
struct ExtendArgs {
    #[command(flatten)]
    function: FunctionArg,
    #[command(flatten)]
    truncation: TruncationArgs,
    #[command(flatten)]
    points: PointArgs,
    /// Leave the reference columns empty
    #[arg(long = "hide-reference")]
    hide_reference: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct InvarianceArgs {
    #[command(flatten)]
    function: FunctionArg,
    #[arg(long, default_value = "1")]
    smax: String,
    #[arg(long, default_value_t = 60)]
    n: u32,
    /// Ratios to compare, comma separated
    #[arg(long = "r-list", default_value = "1.5,2,3", allow_hyphen_values = true)]
    r_list: String,
    #[arg(long)]
    entire: bool,
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    z: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct LimitArgs {
    /// Dyadic levels first:last, r_j = 1 + 2^-j
    #[arg(long = "limit-levels", default_value = "3:10")]
    limit_levels: String,
    /// Depth ceil(c / (r - 1)) at each ratio
    #[arg(long = "cap-scale", default_value_t = 40.0)]
    cap_scale: f64,
    /// Fixed depth instead of the scaled one
    #[arg(long)]
    n: Option<u32>,
}

#[derive(Debug, Args)]
struct FactorArgs {
    #[command(flatten)]
    function: FunctionArg,
    #[arg(long)]
    k: u32,
    #[command(flatten)]
    points: PointArgs,
    #[command(flatten)]
    limit: LimitArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CutoffArgs {
    /// Coefficient c_j of the factor exp(c_j z^j)
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    cj: String,
    #[arg(long)]
    j: u32,
    #[arg(long)]
    k: u32,
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    z: String,
    #[command(flatten)]
    limit: LimitArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct DeriveArgs {
    #[command(flatten)]
    function: FunctionArg,
    #[command(flatten)]
    points: PointArgs,
    #[arg(long, allow_hyphen_values = true, default_value = "0.5")]
    dz: String,
    #[command(flatten)]
    limit: LimitArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct MuStarArgs {
    #[arg(long, allow_hyphen_values = true)]
    s: String,
    #[arg(long, default_value_t = 30)]
    nmax: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long = "max-prime-index", default_value_t = 6)]
    max_prime_index: u32,
    #[arg(long = "exp-budget", default_value_t = 24)]
    exp_budget: u32,
}

#[derive(Debug, Args)]
struct PrimeSumArgs {
    #[arg(long, allow_hyphen_values = true, default_value = "2")]
    s: String,
    #[command(flatten)]
    bounds: BoundsArgs,
    /// Sum the classical μ(n) instead
    #[arg(long)]
    classical: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct PrimeExtendArgs {
    #[command(flatten)]
    function: FunctionArg,
    #[arg(long, allow_hyphen_values = true, default_value = "2")]
    s: String,
    #[command(flatten)]
    bounds: BoundsArgs,
    #[command(flatten)]
    points: PointArgs,
    #[arg(long = "hide-reference")]
    hide_reference: bool,
    #[command(flatten)]
    output: OutputArgs,
}

enum Failure {
    Config(String),
    Engine(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn engine_at(z: Complex64) -> impl Fn(Error) -> Failure {
    move |e| Failure::Engine(format!("at z = {}: {e}", fmt_complex(z)))
}

/// Formats a float as its shortest round-trip decimal, switching to
/// exponent notation for very large or small magnitudes.
pub fn fmt_float(x: f64) -> String {
    // no negative zero in the output
    let x = if x == 0.0 { 0.0 } else { x };
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        fmt_float(z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", fmt_float(z.re), fmt_float(-z.im))
    } else {
        format!("{}+{}i", fmt_float(z.re), fmt_float(z.im))
    }
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    // printed after the rows in table format only
    notes: Vec<String>,
}

impl Table {
    fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                out.push_str(&self.header.join(","));
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
            }
            Format::Table => {
                let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
                for row in &self.rows {
                    for (w, cell) in widths.iter_mut().zip(row) {
                        *w = (*w).max(cell.chars().count());
                    }
                }
                let line = |cells: Vec<&str>| {
                    cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:>w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                };
                out.push_str(&line(self.header.clone()));
                out.push('\n');
                for row in &self.rows {
                    out.push_str(line(row.iter().map(String::as_str).collect()).trim_end());
                    out.push('\n');
                }
                for note in &self.notes {
                    out.push_str(note);
                    out.push('\n');
                }
            }
        }
        out
    }
}

fn parse_u32_list(text: &str) -> CliResult<Vec<u32>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Failure::Config(format!("'{t}' is not a positive integer")))
        })
        .collect()
}

fn parse_complex_list(text: &str) -> CliResult<Vec<Complex64>> {
    Ok(text.split(',').map(parse_complex).collect::<Result<Vec<_>, _>>()?)
}

fn points(args: &PointArgs) -> CliResult<Vec<Complex64>> {
    match (&args.z, &args.grid) {
        (Some(_), Some(_)) => Err(Failure::Config("give either --z or --grid, not both".into())),
        (Some(z), None) => Ok(vec![parse_complex(z)?]),
        (None, Some(grid)) => parse_grid(grid),
        (None, None) => Err(Failure::Config("an evaluation point --z or --grid is required".into())),
    }
}

fn parse_grid(text: &str) -> CliResult<Vec<Complex64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, count] = parts[..] else {
        return Err(Failure::Config(format!("grid '{text}' is not start:stop:count")));
    };
    let (start, stop) = (parse_complex(start)?, parse_complex(stop)?);
    let count: usize = count
        .trim()
        .parse()
        .ok()
        .filter(|&c| c > 0)
        .ok_or_else(|| Failure::Config(format!("grid count '{count}' must be a positive integer")))?;
    if count == 1 {
        return Ok(vec![start]);
    }
    let span = stop - start;
    let last = (count - 1) as f64;
    Ok((0..count)
        .map(|i| if i + 1 == count { stop } else { start + span * i as f64 / last })
        .collect())
}

fn model(args: &FunctionArg) -> CliResult<AnalyticFunctionModel> {
    Ok(builtin(&args.function)?)
}

fn truncation(args: &TruncationArgs) -> CliResult<TruncationSpec> {
    let mut ratios = match (&args.r, &args.ratios, &args.prime_s) {
        (_, Some(list), _) => RatioSchedule::per_k(parse_complex_list(list)?),
        (_, _, Some(s)) => RatioSchedule::prime_power(parse_complex(s)?),
        (Some(r), _, _) => RatioSchedule::common(parse_complex(r)?),
        (None, None, None) => RatioSchedule::common(2.0),
    };
    ratios.entire_function_mode = args.entire;
    let policy = match args.policy {
        Policy::Simplex => CapPolicy::Simplex,
        Policy::PerIndex => CapPolicy::PerIndex,
    };
    let spec = TruncationSpec::new(parse_u32_list(&args.smax)?, args.n, ratios)?.with_policy(policy);
    spec.ratios.check(&spec.s_max)?;
    Ok(spec)
}

fn limit_schedule(args: &LimitArgs) -> CliResult<LimitSchedule> {
    let (first, last) = args
        .limit_levels
        .split_once(':')
        .and_then(|(a, b)| Some((a.trim().parse::<i32>().ok()?, b.trim().parse::<i32>().ok()?)))
        .ok_or_else(|| Failure::Config(format!("limit levels '{}' are not first:last", args.limit_levels)))?;
    let cap = match args.n {
        Some(n) => CapRule::Fixed(n),
        None => CapRule::Scaled(args.cap_scale),
    };
    Ok(LimitSchedule::dyadic(first, last, cap)?)
}

// Runs `work` on every point in parallel, keeping grid order; the first
// failure in grid order wins.
fn per_point<T: Send>(
    zs: &[Complex64],
    work: impl Fn(Complex64) -> Result<T, Error> + Sync,
) -> CliResult<Vec<T>> {
    let results: Vec<Result<T, Error>> = zs.par_iter().map(|&z| work(z)).collect();
    results
        .into_iter()
        .zip(zs)
        .map(|(r, &z)| r.map_err(engine_at(z)))
        .collect()
}

fn extension_table(
    zs: &[Complex64],
    results: Vec<ExtensionResult>,
    hide_reference: bool,
    format: Format,
) -> Table {
    let mut header = vec!["z_re", "z_im", "ext_re", "ext_im", "ref_re", "ref_im", "rel_err"];
    if format == Format::Table {
        header.push("groups");
    }
    let mut table = Table::new(header);
    for (z, result) in zs.iter().zip(results) {
        let reference = if hide_reference { None } else { result.reference };
        let mut row = vec![
            fmt_float(z.re),
            fmt_float(z.im),
            fmt_float(result.value.re),
            fmt_float(result.value.im),
            reference.map(|r| fmt_float(r.re)).unwrap_or_default(),
            reference.map(|r| fmt_float(r.im)).unwrap_or_default(),
            reference
                .and(result.relative_error)
                .map(fmt_float)
                .unwrap_or_default(),
        ];
        if format == Format::Table {
            row.push(result.group_partials.len().to_string());
        }
        table.rows.push(row);
    }
    table
}

fn cmd_extend(args: &ExtendArgs) -> CliResult<Table> {
    let f = model(&args.function)?;
    let spec = truncation(&args.truncation)?;
    let zs = points(&args.points)?;
    let results = per_point(&zs, |z| extend(&f, z, &spec))?;
    Ok(extension_table(&zs, results, args.hide_reference, args.output.format))
}

fn cmd_identity(args: &ExtendArgs) -> CliResult<Table> {
    let f = model(&args.function)?;
    let spec = truncation(&args.truncation)?;
    let zs = points(&args.points)?;
    let residuals = per_point(&zs, |z| identity_residual(&f, z, &spec))?;
    let mut table = Table::new(vec!["z_re", "z_im", "res_re", "res_im", "abs_res"]);
    for (z, res) in zs.iter().zip(residuals) {
        table.rows.push(vec![
            fmt_float(z.re),
            fmt_float(z.im),
            fmt_float(res.re),
            fmt_float(res.im),
            fmt_float(res.norm()),
        ]);
    }
    Ok(table)
}

fn cmd_errors(args: &ExtendArgs) -> CliResult<Table> {
    let f = model(&args.function)?;
    let spec = truncation(&args.truncation)?;
    let zs = points(&args.points)?;
    let parts = per_point(&zs, |z| truncation_error_factors(&f, z, &spec))?;
    let mut table = Table::new(vec![
        "z_re", "z_im", "q_re", "q_im", "tail_n_re", "tail_n_im", "tail_k_re", "tail_k_im",
        "recon_re", "recon_im", "ref_re", "ref_im", "defect",
    ]);
    let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
    for (z, p) in zs.iter().zip(parts) {
        table.rows.push(vec![
            fmt_float(z.re),
            fmt_float(z.im),
            fmt_float(p.q_n.re),
            fmt_float(p.q_n.im),
            fmt_float(p.tail_n_factor.re),
            fmt_float(p.tail_n_factor.im),
            opt(p.tail_k_factor.map(|t| t.re)),
            opt(p.tail_k_factor.map(|t| t.im)),
            opt(p.reconstruction.map(|t| t.re)),
            opt(p.reconstruction.map(|t| t.im)),
            fmt_float(p.reference.re),
            fmt_float(p.reference.im),
            opt(p.closure_defect),
        ]);
    }
    if table.rows.iter().any(|r| r[6].is_empty()) {
        table
            .notes
            .push("tail_k unavailable: the function has no log-Taylor coefficients".into());
    }
    Ok(table)
}

fn cmd_invariance(args: &InvarianceArgs) -> CliResult<Table> {
    let f = model(&args.function)?;
    let z = parse_complex(&args.z)?;
    let s_max = parse_u32_list(&args.smax)?;
    let specs: Vec<TruncationSpec> = parse_complex_list(&args.r_list)?
        .into_iter()
        .map(|r| {
            let mut ratios = RatioSchedule::common(r);
            ratios.entire_function_mode = args.entire;
            let spec = TruncationSpec::new(s_max.clone(), args.n, ratios)?;
            spec.ratios.check(&spec.s_max)?;
            Ok(spec)
        })
        .collect::<Result<_, Error>>()?;
    let values = specs
        .iter()
        .map(|spec| extend(&f, z, spec).map(|r| r.value))
        .collect::<Result<Vec<_>, _>>()
        .map_err(engine_at(z))?;
    let deviation = elastic_invariance_check(&f, z, &specs).map_err(engine_at(z))?;
    let mut table = Table::new(vec!["r_re", "r_im", "ext_re", "ext_im", "max_deviation"]);
    for (spec, v) in specs.iter().zip(values) {
        let r = spec.ratios.common_ratio().expect("common ratios");
        table.rows.push(vec![
            fmt_float(r.re),
            fmt_float(r.im),
            fmt_float(v.re),
            fmt_float(v.im),
            fmt_float(deviation),
        ]);
    }
    Ok(table)
}

fn cmd_factor(args: &FactorArgs) -> CliResult<Table> {
    let f = model(&args.function)?;
    let schedule = limit_schedule(&args.limit)?;
    let zs = points(&args.points)?;
    let estimates = per_point(&zs, |z| isolate_factor(&f, args.k, z, &schedule))?;
    let mut table = Table::new(vec![
        "z_re", "z_im", "factor_re", "factor_im", "error_estimate", "exact_re", "exact_im",
    ]);
    for (z, e) in zs.iter().zip(estimates) {
        let exact = f.coefficient(args.k).map(|c| factor_value(c, args.k, *z));
        table.rows.push(vec![
            fmt_float(z.re),
            fmt_float(z.im),
            fmt_float(e.value.re),
            fmt_float(e.value.im),
            fmt_float(e.error_estimate),
            exact.map(|v| fmt_float(v.re)).unwrap_or_default(),
            exact.map(|v| fmt_float(v.im)).unwrap_or_default(),
        ]);
    }
    Ok(table)
}

fn cmd_cutoff(args: &CutoffArgs) -> CliResult<Table> {
    let c = parse_complex(&args.cj)?;
    let z = parse_complex(&args.z)?;
    let schedule = limit_schedule(&args.limit)?;
    let result = factor_cutoff_limit(c, args.j, args.k, z, &schedule).map_err(engine_at(z))?;
    let class = format!("{:?}", result.class)
        .chars()
        .flat_map(|ch| {
            let lower = ch.to_ascii_lowercase();
            if ch.is_ascii_uppercase() {
                vec!['_', lower]
            } else {
                vec![ch]
            }
        })
        .skip(1)
        .collect::<String>();
    let mut table = Table::new(vec!["j", "k", "class", "value_re", "value_im", "slope"]);
    table.rows.push(vec![
        args.j.to_string(),
        args.k.to_string(),
        class,
        result.value.map(|v| fmt_float(v.re)).unwrap_or_default(),
        result.value.map(|v| fmt_float(v.im)).unwrap_or_default(),
        fmt_float(result.slope),
    ]);
    Ok(table)
}

fn cmd_derive(args: &DeriveArgs) -> CliResult<Table> {
    let f = model(&args.function)?;
    let dz = parse_complex(&args.dz)?;
    let schedule = limit_schedule(&args.limit)?;
    let zs = points(&args.points)?;
    let estimates = per_point(&zs, |z| product_derivative(&f, z, dz, &schedule))?;
    let mut table = Table::new(vec!["z_re", "z_im", "deriv_re", "deriv_im", "error_estimate"]);
    for (z, e) in zs.iter().zip(estimates) {
        table.rows.push(vec![
            fmt_float(z.re),
            fmt_float(z.im),
            fmt_float(e.value.re),
            fmt_float(e.value.im),
            fmt_float(e.error_estimate),
        ]);
    }
    Ok(table)
}

fn cmd_mustar(args: &MuStarArgs) -> CliResult<Table> {
    let s = parse_complex(&args.s)?;
    if args.nmax == 0 {
        return Err(Failure::Config("--nmax must be positive".into()));
    }
    let mut table = Table::new(vec!["n", "mu_star_re", "mu_star_im", "mu", "sum_re", "sum_im"]);
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 1..=args.nmax {
        let value = moebius_star(n, s).map_err(|e| Failure::Engine(format!("at n = {n}: {e}")))?;
        sum += value;
        table.rows.push(vec![
            n.to_string(),
            fmt_float(value.re),
            fmt_float(value.im),
            moebius(n)?.to_string(),
            fmt_float(sum.re),
            fmt_float(sum.im),
        ]);
    }
    Ok(table)
}

fn cmd_primesum(args: &PrimeSumArgs) -> CliResult<Table> {
    let bounds = GpoBounds::new(args.bounds.max_prime_index, args.bounds.exp_budget)?;
    if args.classical {
        let mut table = Table::new(vec!["n", "sum"]);
        for (n, sum) in mu_partial_sums(bounds) {
            table.rows.push(vec![n.to_string(), sum.to_string()]);
        }
        return Ok(table);
    }
    let s = parse_complex(&args.s)?;
    RatioSchedule::prime_power(s).check(&[1])?;
    let terms = mu_star_terms(s, bounds).map_err(|e| Failure::Engine(e.to_string()))?;
    let mut table = Table::new(vec!["n", "group", "mu_star_re", "mu_star_im", "sum_re", "sum_im"]);
    let sums = crate::primes::mu_star_partial_sums(s, bounds)
        .map_err(|e| Failure::Engine(e.to_string()))?;
    for (term, (_, sum)) in terms.iter().zip(&sums) {
        table.rows.push(vec![
            term.n.to_string(),
            term.group.to_string(),
            fmt_float(term.value.re),
            fmt_float(term.value.im),
            fmt_float(sum.re),
            fmt_float(sum.im),
        ]);
    }
    if let Some((_, last)) = sums.last() {
        table.notes.push(format!(
            "{} terms, final |sum| = {}",
            sums.len(),
            fmt_float(last.norm())
        ));
    }
    Ok(table)
}

fn cmd_prime_extend(args: &PrimeExtendArgs) -> CliResult<Table> {
    let f = model(&args.function)?;
    let s = parse_complex(&args.s)?;
    let bounds = GpoBounds::new(args.bounds.max_prime_index, args.bounds.exp_budget)?;
    RatioSchedule::prime_power(s).check(&[1])?;
    let zs = points(&args.points)?;
    let results = per_point(&zs, |z| prime_extend(&f, z, s, bounds))?;
    Ok(extension_table(&zs, results, args.hide_reference, args.output.format))
}

/// Reads `key=value` lines, skipping blanks and `#` comments.
fn read_config(path: &PathBuf) -> CliResult<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut entries = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Failure::Config(format!("{}:{}: expected key=value", path.display(), i + 1))
        })?;
        entries.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(entries)
}

const BOOLEAN_KEYS: [&str; 3] = ["entire", "classical", "hide-reference"];

// Inserts config entries as long options right after the subcommand, skipping
// any option the command line already sets.
fn merge_config(args: &[String]) -> CliResult<Vec<String>> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            let value = iter
                .next()
                .ok_or_else(|| Failure::Config("--config needs a path".into()))?;
            path = Some(PathBuf::from(value));
        } else if let Some(value) = arg.strip_prefix("--config=") {
            path = Some(PathBuf::from(value));
        } else {
            rest.push(arg.clone());
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let entries = read_config(&path)?;
    let given = |key: &str| {
        let flag = format!("--{key}");
        rest.iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
    };
    let mut injected = Vec::new();
    for (key, value) in &entries {
        if given(key) {
            continue;
        }
        if BOOLEAN_KEYS.contains(&key.as_str()) {
            match value.as_str() {
                "true" | "1" | "yes" => injected.push(format!("--{key}")),
                "false" | "0" | "no" => {}
                _ => return Err(Failure::Config(format!("{key} expects true or false"))),
            }
        } else {
            injected.push(format!("--{key}={value}"));
        }
    }
    // the subcommand is the first argument that is not an option
    let position = rest
        .iter()
        .position(|a| !a.starts_with('-'))
        .map(|p| p + 1)
        .unwrap_or(rest.len());
    rest.splice(position..position, injected);
    Ok(rest)
}

/// Runs the command line `args` (without the program name), writing results
/// to `out` and diagnostics to `err`. Returns the process exit code.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(Failure::Config(msg)) | Err(Failure::Engine(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_CONFIG;
        }
    };
    let cli = match Cli::try_parse_from(std::iter::once("mulext".to_string()).chain(args)) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_CONFIG
                }
            };
        }
    };
    let (table, output) = match &cli.command {
        Command::Extend(a) => (cmd_extend(a), &a.output),
        Command::Identity(a) => (cmd_identity(a), &a.output),
        Command::Errors(a) => (cmd_errors(a), &a.output),
        Command::Invariance(a) => (cmd_invariance(a), &a.output),
        Command::Factor(a) => (cmd_factor(a), &a.output),
        Command::Cutoff(a) => (cmd_cutoff(a), &a.output),
        Command::Derive(a) => (cmd_derive(a), &a.output),
        Command::Mustar(a) => (cmd_mustar(a), &a.output),
        Command::Primesum(a) => (cmd_primesum(a), &a.output),
        Command::PrimeExtend(a) => (cmd_prime_extend(a), &a.output),
    };
    let table = match table {
        Ok(t) => t,
        Err(Failure::Config(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_CONFIG;
        }
        Err(Failure::Engine(msg)) => {
            let _ = writeln!(err, "engine error {msg}");
            return EXIT_ENGINE;
        }
    };
    let text = table.render(output.format);
    let written = match &output.output {
        Some(path) => fs::write(path, text),
        None => out.write_all(text.as_bytes()),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: cannot write output: {e}");
            EXIT_ENGINE
        }
    }
}
