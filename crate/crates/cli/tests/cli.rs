use std::path::Path;
use std::process::{Command, Output};

use mzi_core::interferometer::build_model;
use mzi_core::metrology::{phase_grid, scan_model};
use mzi_core::{DetectionScheme, InterferometerConfig};
use serde_json::Value;

fn mzi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mzi"))
        .args(args)
        .env_remove("MZI_QUAD_ORDER")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn records(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader
        .headers()
        .unwrap()
        .iter()
        .map(str::to_string)
        .collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn real(field: &str) -> f64 {
    field.parse().unwrap()
}

#[test]
fn parity_scan_hits_shot_noise_at_origin() {
    let text = stdout(&mzi(&[
        "scan",
        "--scheme",
        "parity",
        "-N",
        "200",
        "--gamma",
        "0",
        "--phi",
        "-0.8:0.8:401",
    ]));
    let (header, rows) = records(&text);
    assert_eq!(header, ["phi", "signal", "p_plus", "delta_phi", "fisher"]);
    assert_eq!(rows.len(), 401);
    let best = rows
        .iter()
        .min_by(|a, b| real(&a[3]).total_cmp(&real(&b[3])))
        .unwrap();
    assert_eq!(real(&best[0]), 0.0);
    assert!((real(&best[3]) - 0.0707107).abs() < 1e-7);
    assert!(rows.iter().any(|r| r[3] == "inf"));
    assert!(text.ends_with('\n') && !text.contains('\r'));
}

#[test]
fn scan_round_trips_exact_values() {
    let text = stdout(&mzi(&[
        "scan",
        "--scheme",
        "zero-nonzero",
        "-N",
        "200",
        "--gamma",
        "1e-4",
        "--phi",
        "0:0.5:51",
    ]));
    let cfg = InterferometerConfig::new(200.0, 1e-4, 1.0).unwrap();
    let model = build_model(&cfg, DetectionScheme::ZeroNonzero).unwrap();
    let scan = scan_model(&model, &phase_grid(0.0, 0.5, 51).unwrap()).unwrap();
    let (_, rows) = records(&text);
    for (row, expected) in rows.iter().zip(&scan.rows) {
        let values: Vec<f64> = row.iter().map(|f| real(f)).collect();
        let wanted = [
            expected.phi,
            expected.signal,
            expected.p_plus,
            expected.delta_phi,
            expected.fisher,
        ];
        for (got, want) in values.iter().zip(wanted) {
            assert_eq!(got.to_bits(), want.to_bits());
        }
    }

    let json = stdout(&mzi(&[
        "scan",
        "--scheme",
        "zero-nonzero",
        "-N",
        "200",
        "--gamma",
        "1e-4",
        "--phi",
        "0:0.5:51",
        "--format",
        "json",
    ]));
    let value: Value = serde_json::from_str(&json).unwrap();
    let keys: Vec<&str> = value
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    assert_eq!(
        keys,
        [
            "command",
            "scheme",
            "p0",
            "photons",
            "gamma",
            "transmission",
            "phase_unit",
            "rows"
        ]
    );
    let rows = value["rows"].as_array().unwrap();
    assert_eq!(rows[0]["delta_phi"], Value::String("inf".into()));
    for (row, expected) in rows.iter().zip(&scan.rows).skip(1) {
        assert_eq!(
            row["delta_phi"].as_f64().unwrap().to_bits(),
            expected.delta_phi.to_bits()
        );
        assert_eq!(
            row["signal"].as_f64().unwrap().to_bits(),
            expected.signal.to_bits()
        );
    }
}

#[test]
fn diffusion_lowers_homodyne_peak() {
    let peak = |gamma: &str| {
        let text = stdout(&mzi(&[
            "scan",
            "--scheme",
            "homodyne-zero",
            "-N",
            "200",
            "--gamma",
            gamma,
        ]));
        let (_, rows) = records(&text);
        rows.iter()
            .map(|r| real(&r[1]))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    assert!(peak("1e-3") < peak("0"));
}

#[test]
fn pi_units_rescale_phase_column() {
    let text = stdout(&mzi(&[
        "scan",
        "--scheme",
        "parity",
        "-N",
        "50",
        "--phi",
        "0:0.5:3",
        "--pi-units",
    ]));
    let (_, rows) = records(&text);
    assert_eq!(
        rows.iter().map(|r| real(&r[0])).collect::<Vec<_>>(),
        [0.0, 0.25, 0.5]
    );
}

#[test]
fn invalid_inputs_exit_2() {
    for args in [
        vec![
            "scan",
            "--scheme",
            "parity",
            "-N",
            "200",
            "--phi",
            "0.5:0.5:10",
        ],
        vec!["scan", "--scheme", "parity", "-N", "200", "--phi", "0:1:1"],
        vec!["scan", "--scheme", "parity", "-N", "-3"],
        vec!["scan", "--scheme", "laser", "-N", "200"],
        vec!["scan", "-N", "200"],
        vec!["scan", "--scheme", "parity", "-N", "200", "--format", "xml"],
        vec![
            "best",
            "--scheme",
            "parity",
            "-N",
            "200",
            "--bracket",
            "0:3",
        ],
        vec![
            "estimate",
            "--scheme",
            "parity",
            "-N",
            "100",
            "--phi-true",
            "0.1",
            "--trials",
            "10",
        ],
        vec!["scan", "--no-such-flag"],
    ] {
        let out = mzi(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn io_failure_exits_3() {
    let out = mzi(&[
        "scan",
        "--scheme",
        "parity",
        "-N",
        "10",
        "--output",
        "/nonexistent/dir/out.csv",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = mzi(&["scan", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn best_sweep_orders_schemes() {
    let text = stdout(&mzi(&[
        "best",
        "--scheme",
        "parity",
        "--scheme",
        "zero-nonzero",
        "--gamma",
        "1e-4",
        "--n-log",
        "1:4:7",
        "--check",
    ]));
    let (header, rows) = records(&text);
    assert_eq!(
        header,
        [
            "scheme",
            "N",
            "phi_min",
            "delta_phi_min_exact",
            "delta_phi_min_analytic",
            "delta_phi_min_series",
            "shot_noise",
            "status"
        ]
    );
    let (parity, zero) = rows.split_at(7);
    for (p, z) in parity.iter().zip(zero) {
        assert_eq!(p[1], z[1]);
        assert!(real(&z[3]) <= real(&p[3]));
        assert_eq!(p[7], "ok");
    }
}

#[test]
fn best_homodyne_and_noiseless_parity() {
    let text = stdout(&mzi(&[
        "best",
        "--scheme",
        "homodyne-zero",
        "--n",
        "50,200,1000",
    ]));
    let (_, rows) = records(&text);
    for row in &rows {
        let scaled = real(&row[3]) * real(&row[1]).sqrt();
        assert!((scaled - 1.03).abs() < 0.015, "{scaled}");
    }
    let text = stdout(&mzi(&["best", "--scheme", "parity", "-N", "200"]));
    let (_, rows) = records(&text);
    assert_eq!(real(&rows[0][2]), 0.0);
    assert!((real(&rows[0][3]) - 1.0 / 200f64.sqrt()).abs() < 1e-15);
}

#[test]
fn best_records_failures_in_row() {
    let out = mzi(&[
        "best",
        "--scheme",
        "homodyne-window",
        "--p0",
        "10",
        "-N",
        "200",
    ]);
    let (_, rows) = records(&stdout(&out));
    assert_eq!(rows[0][3], "");
    assert!(rows[0][7].contains("infinite"));
}

#[test]
fn fwhm_rows_and_missing_crossing() {
    let text = stdout(&mzi(&[
        "fwhm", "--scheme", "parity", "-N", "200", "--check",
    ]));
    let (header, rows) = records(&text);
    assert_eq!(header, ["N", "gamma", "fwhm_exact", "fwhm_analytic"]);
    assert!((real(&rows[0][2]) / real(&rows[0][3]) - 1.0).abs() < 0.02);

    let text = stdout(&mzi(&[
        "fwhm",
        "--scheme",
        "zero-nonzero",
        "--gamma",
        "1e-2",
        "--n",
        "1000,3000,10000",
    ]));
    let (_, rows) = records(&text);
    assert!((real(&rows[2][2]) / 0.3330 - 1.0).abs() < 0.01);

    let out = mzi(&["fwhm", "--scheme", "parity", "-N", "0"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn estimate_is_reproducible() {
    let args = [
        "estimate",
        "--scheme",
        "parity",
        "-N",
        "100",
        "--phi-true",
        "0.15",
        "--seed",
        "7",
        "--format",
        "json",
    ];
    let first = mzi(&args);
    let second = mzi(&args);
    assert_eq!(stdout(&first), stdout(&second));
    let value: Value = serde_json::from_str(&stdout(&first)).unwrap();
    let ratio = value["std_ratio"].as_f64().unwrap();
    assert!((0.85..=1.15).contains(&ratio));
    let ratio_again =
        value["empirical_std"].as_f64().unwrap() / value["predicted_std"].as_f64().unwrap();
    assert_eq!(ratio.to_bits(), ratio_again.to_bits());
    assert_eq!(value["trials"], 10000);
}

#[test]
fn estimate_aborts_exit_5() {
    let out = mzi(&[
        "estimate",
        "--scheme",
        "parity",
        "-N",
        "100",
        "--gamma",
        "1e-3",
        "--phi-true",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out_path = dir.path().join("scan.json");
    std::fs::write(
        &cfg,
        format!("# parity run\nscheme = parity\nphotons = 50\nphi = -0.5:0.5:11\nformat = json\noutput = {}\n", out_path.display()),
    )
    .unwrap();
    let out = mzi(&["scan", "--config", cfg.to_str().unwrap(), "-N", "200"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let value: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(value["photons"], 200.0);
    assert_eq!(value["rows"].as_array().unwrap().len(), 11);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);

    std::fs::write(&cfg, "photons = 50\ncolour = red\n").unwrap();
    assert_eq!(
        mzi(&["scan", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn quadrature_order_from_environment() {
    let run = |order: &str| {
        Command::new(env!("CARGO_BIN_EXE_mzi"))
            .args([
                "scan", "--scheme", "parity", "-N", "200", "--gamma", "1e-4", "--phi", "0:0.3:7",
            ])
            .env("MZI_QUAD_ORDER", order)
            .output()
            .unwrap()
    };
    let low = run("64");
    let high = run("128");
    let (_, a) = records(&stdout(&low));
    let (_, b) = records(&stdout(&high));
    for (x, y) in a.iter().zip(&b) {
        assert!((real(&x[2]) - real(&y[2])).abs() < 1e-9);
    }
    assert_eq!(run("1").status.code(), Some(2));
    assert_eq!(run("many").status.code(), Some(2));
}

#[test]
fn check_passes_on_valid_runs() {
    for args in [
        vec![
            "scan",
            "--scheme",
            "homodyne-window",
            "--p0",
            "0.5",
            "-N",
            "50",
            "--check",
        ],
        vec![
            "scan", "--scheme", "parity", "-N", "200", "--gamma", "1e-3", "--check",
        ],
        vec![
            "fwhm", "--scheme", "parity", "--gamma", "1e-2", "--n-log", "1:4:4", "--check",
        ],
        vec![
            "estimate",
            "--scheme",
            "zero-nonzero",
            "-N",
            "100",
            "--gamma",
            "1e-3",
            "--phi-true",
            "0.15",
            "--check",
        ],
    ] {
        let out = mzi(&args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn output_file_replaced_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("best.csv");
    std::fs::write(&path, "stale").unwrap();
    let out = mzi(&[
        "best",
        "--scheme",
        "parity",
        "-N",
        "200",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("scheme,N,"));
    assert!(Path::new(&path).exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}
