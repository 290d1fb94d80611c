use std::process::{Command, Output};

use serde_json::Value;

fn instance(name: &str) -> String {
    format!("{}/instances/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn mixsel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixsel"))
        .args(args)
        .env_remove("MIXSEL_CAP")
        .output()
        .expect("spawn mixsel")
}

fn json(out: &Output) -> Value {
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(mixsel(&["--help"]).status.code(), Some(0));
    assert_eq!(mixsel(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(mixsel(&["solve"]).status.code(), Some(2));
}

#[test]
fn malformed_and_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = mixsel(&[
        "solve",
        "--instance",
        bad.to_str().unwrap(),
        "--alpha",
        "0.5",
        "--delta",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = mixsel(&[
        "solve",
        "--instance",
        "/nonexistent/x.json",
        "--alpha",
        "0.5",
        "--delta",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = mixsel(&[
        "solve",
        "--instance",
        &instance("mixture_mid.json"),
        "--alpha",
        "1.5",
        "--delta",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cap_exceeded_exit_code() {
    let out = mixsel(&[
        "--cap",
        "10",
        "solve",
        "--instance",
        &instance("mixture_mid.json"),
        "--alpha",
        "0.25",
        "--delta",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn solve_reports_value_and_guarantee() {
    let v = json(&mixsel(&[
        "solve",
        "--instance",
        &instance("mixture_mid.json"),
        "--alpha",
        "0.25",
        "--delta",
        "0.5",
    ]));
    assert!(v["value"].is_number());
    assert!(v["guarantee"].as_f64().unwrap() > 0.0);
}

#[test]
fn signal_persuasion() {
    let v = json(&mixsel(&[
        "signal",
        "--instance",
        &instance("persuasion.json"),
        "--epsilon",
        "0.5",
    ]));
    assert!(v["value"].is_number());
    assert!(v["scheme"].is_object() || v["signals"].is_array());
}

#[test]
fn applications_smoke() {
    let runs: [&[&str]; 6] = [
        &[
            "lottery",
            "solve",
            "--instance",
            &instance("lottery.json"),
            "--epsilon",
            "0.5",
        ],
        &[
            "auction",
            "signal",
            "--instance",
            &instance("auction_pooling.json"),
            "--epsilon",
            "0.2",
        ],
        &[
            "vote",
            "sum",
            "--instance",
            &instance("vote_persuasion.json"),
            "--epsilon",
            "0.1",
        ],
        &[
            "vote",
            "thresh",
            "--instance",
            &instance("vote_persuasion.json"),
            "--epsilon",
            "0.1",
        ],
        &[
            "game",
            "zerosum",
            "--instance",
            &instance("game_zerosum.json"),
            "--epsilon",
            "0.5",
        ],
        &[
            "game",
            "signal",
            "--instance",
            &instance("game_coordination.json"),
            "--epsilon",
            "0.25",
            "--s",
            "6",
        ],
    ];
    for args in runs {
        let v = json(&mixsel(args));
        let value = match (v.get("result"), v.get("value")) {
            (Some(r), _) => &r["value"],
            (None, Some(x)) => x,
            (None, None) => &v["revenue"],
        };
        assert!(value.is_number(), "{args:?}: {v}");
    }
}

#[test]
fn auction_pooling_value() {
    let v = json(&mixsel(&[
        "auction",
        "signal",
        "--instance",
        &instance("auction_pooling.json"),
        "--epsilon",
        "0.1",
    ]));
    assert!(v["value"].as_f64().unwrap() >= 0.4, "{v}");
}

#[test]
fn generators_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    let out = mixsel(&[
        "gen",
        "gnp",
        "--n",
        "9",
        "--seed",
        "3",
        "--out",
        g.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let graph: Value = serde_json::from_str(&std::fs::read_to_string(&g).unwrap()).unwrap();
    assert_eq!(graph["n"], 9);
    let m = json(&mixsel(&[
        "gen",
        "is-matrix",
        "--graph",
        g.to_str().unwrap(),
    ]));
    assert!(m.is_object());
    let with_loops = json(&mixsel(&[
        "gen", "planted", "--n", "12", "--k", "4", "--seed", "1",
    ]));
    assert!(with_loops.is_object());
}

#[test]
fn verify_quick_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let v = json(&mixsel(&[
        "verify",
        "is-reduction",
        "--quick",
        "--csv",
        csv.to_str().unwrap(),
    ]));
    assert_eq!(v["passed"], true);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some(mixsel::experiments::CSV_HEADER));
    assert!(text.lines().count() > 1);
}

#[test]
fn fourier_check_passes() {
    let v = json(&mixsel(&[
        "fourier",
        "check",
        "--objective",
        "lottery",
        "--n",
        "5",
        "--trials",
        "20",
    ]));
    assert_eq!(v["passed"], true);
}
