use std::path::PathBuf;
use std::process::{Command, Output};

fn mulext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mulext"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mulext-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|line| line.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

#[test]
fn half_sine_csv_has_header_and_all_rows() {
    let out = mulext(&[
        "extend", "--fn", "half-sine", "--smax", "1,2,3,4", "--n", "40", "--r", "2",
        "--grid=-1:1:201", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("z_re,z_im,ext_re,ext_im,ref_re,ref_im,rel_err"));
    assert_eq!(lines.count(), 201);
    let rows = csv_rows(&text);
    assert_eq!(rows[0][0], -1.0);
    assert_eq!(rows[200][0], 1.0);
    assert!(rows.iter().all(|r| r[6] < 1e-4));
}

#[test]
fn bump_grid_row_count() {
    let out = mulext(&[
        "extend", "--fn", "bump", "--smax", "2,4,6,8", "--n", "20", "--r", "1.4142135623730951",
        "--grid", "0.2:1.5:131", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 132);
}

#[test]
fn output_is_byte_stable() {
    let args = [
        "extend", "--fn", "poly-exp:1,0.5,-0.25", "--smax", "1,2,3", "--grid", "0:1:17",
        "--format", "csv",
    ];
    let first = mulext(&args);
    let second = mulext(&args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn domain_violation_exits_with_engine_code() {
    let out = mulext(&["extend", "--fn", "half-sine", "--smax", "1,2", "--z", "7"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("z = 7"), "{err}");
}

#[test]
fn bad_arguments_exit_with_config_code() {
    assert_eq!(mulext(&["extend", "--fn", "cosine"]).status.code(), Some(2));
    assert_eq!(mulext(&["extend", "--smax", "0,1"]).status.code(), Some(2));
    assert_eq!(mulext(&["nonsense"]).status.code(), Some(2));
    assert_eq!(mulext(&["extend", "--r", "0.5"]).status.code(), Some(2));
}

#[test]
fn help_exits_cleanly() {
    let out = mulext(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("prime-extend"));
}

#[test]
fn config_file_supplies_defaults_and_command_line_wins() {
    let config = scratch("run.conf");
    std::fs::write(&config, "# defaults\nfn = poly-exp:1,1\nsmax = 1,2\nz = 0.5\nformat = csv\n").unwrap();
    let config = config.to_str().unwrap();

    let from_file = mulext(&["extend", "--config", config]);
    assert_eq!(from_file.status.code(), Some(0));
    let rows = csv_rows(&stdout(&from_file));
    assert_eq!(rows.len(), 1);
    assert!((rows[0][2] - 0.75f64.exp()).abs() < 1e-8);

    let overridden = mulext(&["extend", "--config", config, "--z", "0.25"]);
    let rows = csv_rows(&stdout(&overridden));
    assert_eq!(rows[0][0], 0.25);
    assert!((rows[0][2] - 0.3125f64.exp()).abs() < 1e-8);
}

#[test]
fn output_flag_writes_a_file() {
    let path = scratch("ext.csv");
    let out = mulext(&[
        "extend", "--z", "1", "--format", "csv", "--output", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn mustar_at_large_s_starts_with_one() {
    let out = mulext(&["mustar", "--s", "30", "--nmax", "20", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1).unwrap(), "1,1,0,1,1,0");
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 20);
    for row in &rows {
        assert!((row[1] - row[3]).abs() < 1e-8, "n = {}", row[0]);
    }
}

#[test]
fn prime_sum_ends_near_zero() {
    let out = mulext(&["primesum", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let last = csv_rows(&stdout(&out)).pop().unwrap();
    assert!(last[4].hypot(last[5]) <= 0.05);
}

#[test]
fn derivative_of_exp_at_origin() {
    let out = mulext(&["derive", "--fn", "exp", "--z", "0", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let row = &csv_rows(&stdout(&out))[0];
    assert!((row[2] - 1.0).abs() < 1e-6 && row[3].abs() < 1e-6);
}

#[test]
fn run_writes_to_the_given_sink() {
    let args: Vec<String> = ["mustar", "--s", "2", "--nmax", "4", "--format", "csv"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut out = Vec::new();
    let mut err = Vec::new();
    assert_eq!(mulext::cli::run(&args, &mut out, &mut err), 0);
    assert_eq!(String::from_utf8(out).unwrap().lines().count(), 5);
    assert!(err.is_empty());
}
