//! End-to-end tests of the `catflip` binary: output contracts, exit codes,
//! determinism, config precedence, and agreement between the CLI surface
//! and the engine crate called directly.

use std::process::{Command, Output};

use catflip_cli::config::figure_configs;
use catflip_cli::rows::CSV_HEADER;

use catflip_core::fock_core::{outer, FockSpace};
use catflip_core::liouville::{
    first_order_leakage_rate, invariants, second_order_leakage_curvature, PerturbationSpec,
};

/// Frozen closed-form values, cross-checked against an independent
/// high-precision implementation.
const LOSS_TOTAL_A1: f64 = 1.9496886716184168e-4;
const LOSS_FIRST_A4: f64 = 4.5014074953370436e-9;
const LOSS_SECOND_A4: f64 = 1.9817263971293928e-8;
const DETUNING_TOTAL_A1: f64 = 1.2577051728514713e-3;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catflip"))
        .args(args)
        .output()
        .expect("spawn catflip")
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catflip"))
        .args(args)
        .env(key, value)
        .output()
        .expect("spawn catflip")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr_error(out: &Output) -> serde_json::Value {
    let text = String::from_utf8(out.stderr.clone()).expect("utf8 stderr");
    let line = text
        .lines()
        .rev()
        .find(|l| l.starts_with('{'))
        .unwrap_or_else(|| panic!("no error JSON on stderr: {text:?}"));
    serde_json::from_str(line).expect("stderr JSON parses")
}

/// Parse CSV text into (header, rows-of-cells).
fn parse_csv(text: &str) -> (String, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().expect("csv header").to_string();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn cell(row: &[String], idx: usize) -> f64 {
    row[idx].parse().unwrap_or_else(|_| panic!("cell {idx} not a float: {row:?}"))
}

fn assert_rel(got: f64, want: f64, tol: f64, what: &str) {
    let rel = (got - want).abs() / want.abs().max(1e-300);
    assert!(rel <= tol, "{what}: got {got:e}, want {want:e} (rel {rel:.2e})");
}

fn assert_config_error(args: &[&str], what: &str) {
    let out = run(args);
    assert_eq!(out.status.code(), Some(2), "{what}: {out:?}");
    let err = stderr_error(&out);
    assert_eq!(err["code"], 2, "{what}");
    assert!(!err["message"].as_str().unwrap().is_empty(), "{what}");
    assert!(!err["context"].as_str().unwrap().is_empty(), "{what}");
}

// ---------------------------------------------------------------------------
// rate

#[test]
fn rate_photon_loss_closed_form_row() {
    let out = run(&[
        "rate",
        "--perturbation",
        "photon_loss",
        "--kappa1",
        "0.01",
        "--alpha2",
        "4",
        "--method",
        "analytic",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let (header, rows) = parse_csv(&stdout_str(&out));
    assert_eq!(header, CSV_HEADER);
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row.len(), 8);
    assert_eq!(row[0], "4.0000000000000000e0");
    assert_rel(cell(row, 1), LOSS_FIRST_A4, 1e-9, "first order");
    assert_rel(cell(row, 2), LOSS_SECOND_A4, 1e-9, "second order");
    assert_rel(
        cell(row, 3),
        LOSS_FIRST_A4 + LOSS_SECOND_A4,
        1e-9,
        "total",
    );
    // Spectral columns were not requested: empty cells, flag still ok.
    assert_eq!(row[4], "");
    assert_eq!(row[5], "");
    assert_eq!(row[6], "");
    assert_eq!(row[7], "ok");
}

#[test]
fn rate_zero_drive_vanishes_and_nulls_mirror_in_json() {
    let out = run(&[
        "rate",
        "--perturbation",
        "zgate",
        "--epsilon-z",
        "0",
        "--alpha2",
        "2",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let row: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    for field in [
        "gamma_analytic_first",
        "gamma_analytic_second",
        "gamma_analytic_total",
    ] {
        let v = row[field].as_f64().unwrap();
        assert!(v.abs() <= 1e-15, "{field} = {v:e}");
    }
    assert!(row["gamma_spectral"].is_null());
    assert!(row["overlap_score"].is_null());
    assert!(row["dim_used"].is_null());
    assert_eq!(row["reliability_flag"], "ok");
}

#[test]
fn rate_detuning_pinned_value() {
    let out = run(&[
        "rate", "--delta", "0.1", "--alpha2", "1", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let row: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(row["gamma_analytic_first"].as_f64().unwrap(), 0.0);
    assert_rel(
        row["gamma_analytic_total"].as_f64().unwrap(),
        DETUNING_TOTAL_A1,
        1e-9,
        "detuning total",
    );
}

#[test]
fn rate_decay_fit_corroborates_analytic() {
    let out = run(&[
        "rate",
        "--perturbation",
        "photon_loss",
        "--kappa1",
        "0.01",
        "--alpha2",
        "1",
        "--method",
        "analytic",
        "--method",
        "decay_fit",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let row: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let fitted = row["gamma_spectral"].as_f64().unwrap();
    assert_rel(fitted, LOSS_TOTAL_A1, 0.10, "fitted rate");
    assert!(row["overlap_score"].is_null());
    assert!(row["dim_used"].as_u64().unwrap() >= 20);
    assert_eq!(row["reliability_flag"], "ok");
}

// ---------------------------------------------------------------------------
// sweep

#[test]
fn sweep_is_byte_deterministic_with_exact_header() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |path: &std::path::Path| {
        vec![
            "sweep".to_string(),
            "--perturbation".into(),
            "photon_loss".into(),
            "--kappa1".into(),
            "0.01".into(),
            "--alpha2".into(),
            "0.5".into(),
            "--alpha2".into(),
            "1.0".into(),
            "--method".into(),
            "analytic".into(),
            "--out".into(),
            path.display().to_string(),
        ]
    };
    for path in [&a, &b] {
        let argv = args(path);
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        let out = run(&argv);
        assert_eq!(out.status.code(), Some(0), "{out:?}");
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b, "identical config must give identical bytes");

    let text = String::from_utf8(bytes_a).unwrap();
    assert!(text.ends_with('\n'));
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, CSV_HEADER);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "5.0000000000000000e-1");
    assert_eq!(rows[1][0], "1.0000000000000000e0");
    assert_rel(cell(&rows[1], 3), LOSS_TOTAL_A1, 1e-9, "loss total at 1");
}

#[test]
fn sweep_spectral_route_agrees_at_moderate_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("row.json");
    let out = run(&[
        "sweep",
        "--perturbation",
        "photon_loss",
        "--kappa1",
        "0.01",
        "--alpha2",
        "1.0",
        "--method",
        "analytic",
        "--method",
        "spectral",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let row = &rows.as_array().unwrap()[0];
    assert_eq!(row["reliability_flag"], "ok");
    let ratio =
        row["gamma_spectral"].as_f64().unwrap() / row["gamma_analytic_total"].as_f64().unwrap();
    assert!((0.85..=1.15).contains(&ratio), "ratio {ratio}");
    let score = row["overlap_score"].as_f64().unwrap();
    assert!((0.05..=0.95).contains(&score), "score {score}");
    assert!(row["dim_used"].as_u64().unwrap() >= 20);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{
            "perturbation": {"kind": "photon_loss", "kappa1": 0.02},
            "alpha2_grid": [1.0],
            "methods": ["analytic"]
        }"#,
    )
    .unwrap();
    let out_path = dir.path().join("row.csv");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--kappa1",
        "0.01",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let (_, rows) = parse_csv(&std::fs::read_to_string(&out_path).unwrap());
    // κ1 = 0.01 from the flag, not 0.02 from the file.
    assert_rel(cell(&rows[0], 3), LOSS_TOTAL_A1, 1e-9, "override total");
}

// ---------------------------------------------------------------------------
// exit codes

#[test]
fn config_errors_exit_2_with_error_json() {
    assert_config_error(
        &["sweep", "--config", "/nonexistent/run.json"],
        "missing config file",
    );
    assert_config_error(
        &["sweep", "--perturbation", "photon_loss", "--kappa1", "0.01"],
        "missing grid",
    );
    assert_config_error(
        &["rate", "--kappa1", "0.01", "--alpha2", "0.01"],
        "alpha2 below the degeneracy floor",
    );
    assert_config_error(
        &["rate", "--kappa1", "-0.5", "--alpha2", "1"],
        "negative strength",
    );
    assert_config_error(
        &["rate", "--delta", "0.1", "--kappa1", "0.01", "--alpha2", "1"],
        "two strength flags without a kind",
    );
    assert_config_error(
        &[
            "rate",
            "--perturbation",
            "detuning",
            "--delta",
            "0.1",
            "--kappa1",
            "0.01",
            "--alpha2",
            "1",
        ],
        "strength flag of a different kind",
    );
    assert_config_error(
        &[
            "rate", "--kappa1", "0.01", "--alpha2", "1", "--alpha2", "2",
        ],
        "rate with more than one grid point",
    );
    assert_config_error(
        &["rate", "--kappa1", "0.01", "--alpha2", "1", "--method", "magic"],
        "unknown method name",
    );
}

#[test]
fn bad_config_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    let empty_grid = write(
        "empty.json",
        r#"{"perturbation": {"kind": "photon_loss", "kappa1": 0.01}, "alpha2_grid": []}"#,
    );
    assert_config_error(
        &["sweep", "--config", empty_grid.to_str().unwrap()],
        "empty grid",
    );
    let decreasing = write(
        "decreasing.json",
        r#"{"perturbation": {"kind": "photon_loss", "kappa1": 0.01}, "alpha2_grid": [1.0, 0.5]}"#,
    );
    assert_config_error(
        &["sweep", "--config", decreasing.to_str().unwrap()],
        "non-increasing grid",
    );
    let unknown_key = write(
        "unknown.json",
        r#"{"perturbation": {"kind": "photon_loss", "kappa1": 0.01},
            "alpha2_grid": [1.0], "sneaky": true}"#,
    );
    assert_config_error(
        &["sweep", "--config", unknown_key.to_str().unwrap()],
        "unknown config key",
    );
    let not_json = write("mangled.json", "{this is not json");
    assert_config_error(
        &["sweep", "--config", not_json.to_str().unwrap()],
        "mangled JSON",
    );
}

#[test]
fn bad_thread_env_exits_2() {
    let out = run_env(
        &[
            "sweep",
            "--perturbation",
            "photon_loss",
            "--kappa1",
            "0.01",
            "--alpha2",
            "1.0",
        ],
        "CATFLIP_THREADS",
        "many",
    );
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    assert_eq!(stderr_error(&out)["code"], 2);
}

#[test]
fn inadequate_cutoff_exits_3() {
    let out = run(&[
        "rate",
        "--perturbation",
        "photon_loss",
        "--kappa1",
        "0.01",
        "--alpha2",
        "2",
        "--method",
        "spectral",
        "--dim",
        "14",
    ]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    let err = stderr_error(&out);
    assert_eq!(err["code"], 3);
    assert!(!err["message"].as_str().unwrap().is_empty());
}

#[test]
fn unmeasurably_small_rate_flags_floor() {
    let out = run(&[
        "rate",
        "--perturbation",
        "zgate",
        "--epsilon-z",
        "0",
        "--alpha2",
        "2",
        "--method",
        "spectral",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let row: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let gamma = row["gamma_spectral"].as_f64().unwrap();
    assert!((0.0..1e-12).contains(&gamma), "gamma {gamma:e}");
    assert_eq!(row["reliability_flag"], "floor");
}

// ---------------------------------------------------------------------------
// leakage

#[test]
fn leakage_unperturbed_stabilizer_stays_clean() {
    let out = run(&[
        "leakage",
        "--perturbation",
        "none",
        "--alpha2",
        "1",
        "--t-max",
        "1",
        "--samples",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let (header, rows) = parse_csv(&stdout_str(&out));
    assert_eq!(header, "t,leakage");
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][0], "0.0000000000000000e0");
    for row in &rows {
        let l = cell(row, 1);
        assert!(l.abs() <= 1e-10, "leakage {l:e} at t = {}", row[0]);
    }
}

/// Early-time trace of one perturbation: returns (h, l(h), l(2h)).
fn early_leakage(args: &[&str]) -> (f64, f64, f64) {
    let mut argv = vec![
        "leakage",
        "--alpha2",
        "1",
        "--t-max",
        "0.002",
        "--samples",
        "2",
    ];
    argv.extend_from_slice(args);
    let out = run(&argv);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let (_, rows) = parse_csv(&stdout_str(&out));
    assert_eq!(rows.len(), 3);
    (cell(&rows[1], 0), cell(&rows[1], 1), cell(&rows[2], 1))
}

#[test]
fn leakage_gain_slope_matches_first_order_rate() {
    let (h, l1, l2) = early_leakage(&["--perturbation", "photon_gain", "--kappa", "0.01"]);
    // Second-difference estimate of the linear coefficient.
    let slope = (4.0 * l1 - l2) / (2.0 * h);

    let alpha2 = 1.0f64;
    let space = FockSpace::for_alpha2(alpha2).unwrap();
    let basis = invariants(&space, alpha2.sqrt()).unwrap();
    let rho0 = outer(&basis.zero_c, &basis.zero_c);
    let spec = PerturbationSpec::PhotonGain { kappa: 0.01 };
    let expected = first_order_leakage_rate(&spec, &rho0, &basis).unwrap();
    assert!(expected > 0.0);
    assert_rel(slope, expected, 0.05, "gain slope");
}

#[test]
fn leakage_loss_curvature_matches_second_order() {
    let (h, l1, l2) = early_leakage(&["--perturbation", "photon_loss", "--kappa1", "0.01"]);
    // The t-linear estimator annihilates the t² term; what is left is the
    // (absent) first-order rate plus O(h²).
    let slope = (4.0 * l1 - l2) / (2.0 * h);
    assert!(slope.abs() <= 1e-9, "first-order residue {slope:e}");
    // l(t) = C t²/2, so the quadratic coefficient estimator gives C/2.
    let quad = (8.0 * l1 - l2) / (4.0 * h * h);

    let alpha2 = 1.0f64;
    let space = FockSpace::for_alpha2(alpha2).unwrap();
    let basis = invariants(&space, alpha2.sqrt()).unwrap();
    let rho0 = outer(&basis.zero_c, &basis.zero_c);
    let spec = PerturbationSpec::PhotonLoss { kappa1: 0.01 };
    let expected = second_order_leakage_curvature(&spec, &rho0, &basis).unwrap();
    assert!(expected > 0.0);
    assert_rel(2.0 * quad, expected, 0.05, "loss curvature");
}

// ---------------------------------------------------------------------------
// validate

#[test]
fn validate_invariants_suite_is_green() {
    let out = run(&["validate", "--suite", "invariants"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(report["suite"], "invariants");
    assert_eq!(report["failed"], 0);
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.len() >= 7);
    for check in checks {
        assert_eq!(check["pass"], true, "{check}");
        assert!(check["tolerance"].as_f64().unwrap() > 0.0);
        assert!(check["measured"].is_number(), "{check}");
        assert!(!check["name"].as_str().unwrap().is_empty());
    }
    assert_eq!(report["passed"].as_u64().unwrap() as usize, checks.len());
}

#[test]
fn validate_tables_suite_is_green() {
    let out = run(&["validate", "--suite", "tables"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(report["suite"], "tables");
    assert_eq!(report["failed"], 0);
    assert!(report["checks"].as_array().unwrap().len() >= 13);
}

// ---------------------------------------------------------------------------
// shipped recipes

#[test]
fn shipped_sweep_recipes_match_builtin_configs() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("..")
        .join("..")
        .join("configs");
    for (name, builtin) in figure_configs() {
        let path = dir.join(format!("{name}.json"));
        let text = std::fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("missing recipe {}: {e}", path.display()));
        let parsed: catflip_cli::config::RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, builtin, "{name} drifted from the built-in recipe");
        parsed.validate().unwrap();
    }
}
