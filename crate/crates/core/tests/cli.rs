//! End-to-end tests of the command-line surface: exit codes, CSV shapes,
//! output determinism (including across worker-thread counts), file output,
//! and agreement between the in-process entry point and the compiled binary.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_delayloop"))
}

fn run_argv(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary spawns")
}

fn stdout_of(args: &[&str]) -> String {
    let out = run_argv(args);
    assert!(
        out.status.success(),
        "expected success for {args:?}, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

fn code_of(args: &[&str]) -> i32 {
    run_argv(args).status.code().expect("exit code")
}

/// Pulls `value` out of a `quantity,value` CSV body.
fn csv_value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key},")))
        .unwrap_or_else(|| panic!("missing row {key} in:\n{text}"))
        .parse()
        .expect("numeric cell")
}

#[test]
fn tune_reports_the_predictor_point_with_its_indices() {
    let text = stdout_of(&["tune", "--controller", "sp", "--tp", "2.5"]);
    assert!(text.starts_with("quantity,value\n"));
    assert!((csv_value(&text, "h") - 1.239).abs() <= 2e-3);
    assert!((csv_value(&text, "h_i") * 2.5 - 1.849).abs() <= 2e-3);
    assert!((csv_value(&text, "po_y") - 0.0105).abs() <= 1e-4);
    assert!((csv_value(&text, "po_v") - 0.10).abs() <= 1e-4);
    assert!(csv_value(&text, "ise") > 0.0);
}

#[test]
fn simulate_csv_has_the_standard_grid_and_header() {
    let text = stdout_of(&[
        "simulate",
        "--controller",
        "proposed",
        "--tp",
        "1",
        "--hi",
        "0.272",
    ]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,y,v");
    assert_eq!(lines.len(), 702); // header + 701 samples at 0.01 spacing
    assert_eq!(lines[1], "0,1,0");
    assert!(lines[701].starts_with("7,"));
}

#[test]
fn chart_csv_lists_every_documented_curve_family() {
    let text = stdout_of(&["chart", "--controller", "pi", "--tp", "1", "--grid", "8"]);
    assert!(text.starts_with("curve,x,y\n"));
    for label in ["gamma_s", "gamma_p30", "gamma_p45", "gamma_p60", "gamma_y", "gamma_v"] {
        assert!(text.contains(&format!("\n{label},")), "missing {label}");
    }
    let text = stdout_of(&["chart", "--controller", "proposed", "--grid", "6"]);
    assert!(text.contains("\ngamma_b,"), "missing band-holding curve");
}

#[test]
fn table1_emits_thirteen_rows_with_deviation_columns() {
    let text = stdout_of(&["table1"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "t_p,pi_h,pi_h_dev,pi_hi,pi_hi_dev,pi_ise,pi_ise_dev,\
         sp_h,sp_h_dev,sp_hi,sp_hi_dev,sp_ise,sp_ise_dev,\
         prop_hi,prop_hi_dev,prop_ise,prop_ise_dev"
    );
    assert_eq!(lines.len(), 14);
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 17, "bad row: {line}");
    }
    assert!(lines[1].starts_with("0.1,"));
    assert!(lines[13].starts_with("10,"));
}

#[test]
fn table1_output_is_byte_identical_across_runs_and_thread_counts() {
    let one = bin()
        .args(["table1"])
        .env("DELAYLOOP_THREADS", "1")
        .output()
        .expect("binary spawns");
    let four = bin()
        .args(["table1"])
        .env("DELAYLOOP_THREADS", "4")
        .output()
        .expect("binary spawns");
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn table1_strict_flags_out_of_tolerance_cells_with_exit_three() {
    // The slow-row proportional-integral cells genuinely miss the published
    // figures (the error-integral valley there is flat, and the published
    // points carry zero response overshoot), so strict mode reports failure
    // while still printing the full table.
    let out = run_argv(&["table1", "--strict"]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 14);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("tolerance"), "stderr: {err}");
}

#[test]
fn margins_at_zero_time_constant_report_the_exact_corner_values() {
    let text = stdout_of(&["margins", "--tp", "0"]);
    // Cells carry nine significant digits, so the round trip is exact only
    // where the value itself is (the ultimate gain is exactly one).
    assert!((csv_value(&text, "z_a") - std::f64::consts::PI).abs() <= 5e-9);
    assert_eq!(csv_value(&text, "h_ultimate"), 1.0);
    assert!(text.contains("h_ultimate,1\n"));
    assert!((csv_value(&text, "h_i_max") - std::f64::consts::FRAC_PI_2).abs() <= 5e-9);
}

#[test]
fn svg_output_is_a_self_contained_drawing() {
    let text = stdout_of(&[
        "simulate",
        "--controller",
        "sp",
        "--tp",
        "1",
        "--h",
        "1.239",
        "--hi",
        "1.849",
        "--format",
        "svg",
    ]);
    assert!(text.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
    assert!(text.trim_end().ends_with("</svg>"));
}

#[test]
fn exit_codes_follow_the_documented_mapping() {
    // 0: success paths, including help and version.
    assert_eq!(code_of(&["--help"]), 0);
    assert_eq!(code_of(&["--version"]), 0);
    // 2: usage and argument errors.
    assert_eq!(code_of(&["unknown-subcommand"]), 2);
    assert_eq!(code_of(&["simulate", "--controller", "bogus"]), 2);
    assert_eq!(code_of(&["tune", "--controller", "pi", "--tp=-1"]), 2);
    assert_eq!(code_of(&["table1", "--format", "svg"]), 2);
    assert_eq!(code_of(&["simulate", "--controller", "pi", "--tp", "1", "--hi", "0.7"]), 2);
    // 3: structurally infeasible requests.
    assert_eq!(
        code_of(&["simulate", "--controller", "sp", "--tp", "1", "--h", "1.239", "--hi", "0.1"]),
        3,
        "an over-damped predictor loop has no oscillatory closed form"
    );
    assert_eq!(
        code_of(&["margins", "--tp", "1", "--h", "3"]),
        3,
        "no integral gain stabilizes a proportional gain past the supremum"
    );
    // 4: numerical-domain failures.
    assert_eq!(
        code_of(&["simulate", "--controller", "pi", "--tp", "0.0005", "--h", "0.5", "--hi", "0.5"]),
        4,
        "time constants below the basis floor are rejected"
    );
}

#[test]
fn out_flag_writes_the_file_and_keeps_stdout_empty() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("margins.csv");
    let out = bin()
        .args(["margins", "--tp", "1", "--out"])
        .arg(&path)
        .output()
        .expect("binary spawns");
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("quantity,value\n"));
    assert!(text.contains("h_ultimate,2.38162492\n"));

    // 1: I/O failure when the destination cannot be created.
    let bad = dir.path().join("no-such-dir").join("x.csv");
    let out = bin()
        .args(["margins", "--tp", "1", "--out"])
        .arg(&bad)
        .output()
        .expect("binary spawns");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn in_process_entry_point_matches_the_spawned_binary() {
    let dir = tempfile::tempdir().unwrap();
    let in_proc = dir.path().join("in_proc.csv");
    let spawned = dir.path().join("spawned.csv");
    let code = delayloop::cli::run([
        "delayloop",
        "tune",
        "--controller",
        "proposed",
        "--tp",
        "0.55",
        "--out",
        in_proc.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let out = bin()
        .args(["tune", "--controller", "proposed", "--tp", "0.55", "--out"])
        .arg(&spawned)
        .output()
        .expect("binary spawns");
    assert!(out.status.success());
    assert_eq!(
        std::fs::read_to_string(&in_proc).unwrap(),
        std::fs::read_to_string(&spawned).unwrap()
    );
}
