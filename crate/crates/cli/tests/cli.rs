use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn pme(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pme-tube"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn text(o: &Output) -> String {
    format!(
        "{}{}",
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    )
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Every artifact listed in the manifest exists with the recorded hash.
fn assert_manifest_verifies(out: &Path) -> Value {
    let m = json(&out.join("manifest.json"));
    let artifacts = m["artifacts"].as_array().unwrap();
    assert!(!artifacts.is_empty());
    for a in artifacts {
        let bytes = fs::read(out.join(a["path"].as_str().unwrap())).unwrap();
        assert_eq!(
            hex::encode(Sha256::digest(&bytes)),
            a["sha256"].as_str().unwrap()
        );
        assert_eq!(bytes.len() as u64, a["bytes"].as_u64().unwrap());
    }
    m
}

fn hashes(manifest: &Value) -> Vec<(String, String)> {
    manifest["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| {
            (
                a["path"].as_str().unwrap().to_owned(),
                a["sha256"].as_str().unwrap().to_owned(),
            )
        })
        .collect()
}

const SMALL_EVOLVE: &[&str] = &[
    "evolve",
    "--nz",
    "9",
    "--ny",
    "128",
    "--y-extent",
    "12",
    "--tau-end",
    "2",
    "--snapshot-interval",
    "0.5",
];

#[test]
fn section_cross_checks_pass_and_manifest_verifies() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pme(
        tmp.path(),
        &[
            "section",
            "--L",
            "3.14159265",
            "--m",
            "2",
            "--n",
            "201",
            "--dilate",
            "2",
            "--out",
            "s",
        ],
    );
    assert_eq!(code(&o), 0, "{}", text(&o));
    let out = tmp.path().join("s");
    for f in [
        "profile_relax.csv",
        "profile_shoot.json",
        "profile_dilated.csv",
        "report.json",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let m = assert_manifest_verifies(&out);
    assert_eq!(m["passed"], true);
    assert_eq!(m["command"], "section");
    assert!(m["version"].is_string() && m["timings"]["total"].is_number());
    let names: Vec<_> = m["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"agreement") && names.contains(&"dilation"));
    let report = json(&out.join("report.json"));
    assert!((report["cstar"].as_f64().unwrap() - 1.0).abs() < 1e-7);
}

#[test]
fn degenerate_exponent_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pme(tmp.path(), &["section", "--m", "1", "--out", "s"]);
    assert_eq!(code(&o), 2);
    assert!(text(&o).contains("degenerate exponent"), "{}", text(&o));
}

#[test]
fn super_barrier_tail_shift_matches_ln_f0() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pme(
        tmp.path(),
        &[
            "barriers", "--kind", "super", "--f0", "0.5", "--m", "2", "--out", "b",
        ],
    );
    assert_eq!(code(&o), 0, "{}", text(&o));
    let csv = fs::read_to_string(tmp.path().join("b/barrier.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "tau,f,g,g_minus_cstar_tau");
    let last: Vec<f64> = csv
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    assert!((last[3] - 0.5f64.ln()).abs() < 1e-3, "{last:?}");
    let meta = json(&tmp.path().join("b/barrier.json"));
    assert!(meta["closed_form_gap"].as_f64().unwrap() < 1e-8);
}

#[test]
fn slow_sub_barrier_shift_is_reported_as_a_failed_check() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pme(
        tmp.path(),
        &[
            "barriers", "--kind", "sub", "--delta0", "0.05", "--out", "b",
        ],
    );
    assert_eq!(code(&o), 1, "{}", text(&o));
    let m = assert_manifest_verifies(&tmp.path().join("b"));
    assert_eq!(m["passed"], false);
    assert!(text(&o).contains("ceiling: PASS"));
}

#[test]
fn config_round_trips_and_flags_override_it() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, r#"{"barriers": {"kind": "sub", "f0": 0.3, "tau_end": 5.0}, "evolve": {"datum": {"kind": "two_bump"}}}"#).unwrap();
    let o = pme(
        tmp.path(),
        &[
            "--config",
            "c.json",
            "--save-config",
            "s1.json",
            "barriers",
            "--f0",
            "0.4",
            "--out",
            "b",
        ],
    );
    assert!(code(&o) <= 1, "{}", text(&o));
    let saved = json(&tmp.path().join("s1.json"));
    assert_eq!(saved["barriers"]["kind"], "sub");
    assert_eq!(saved["barriers"]["f0"], 0.4);
    assert_eq!(saved["barriers"]["tau_end"], 5.0);
    assert_eq!(saved["evolve"]["datum"]["kind"], "two_bump");
    let echo = json(&tmp.path().join("b/manifest.json"))["config"].clone();
    assert_eq!(echo, saved["barriers"]);

    // parse -> serialize -> parse is the identity
    let o = pme(
        tmp.path(),
        &[
            "--config",
            "s1.json",
            "--save-config",
            "s2.json",
            "barriers",
            "--out",
            "b",
        ],
    );
    assert!(code(&o) <= 1, "{}", text(&o));
    assert_eq!(
        fs::read_to_string(tmp.path().join("s1.json")).unwrap(),
        fs::read_to_string(tmp.path().join("s2.json")).unwrap()
    );
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    for doc in [
        r#"{"sectoin": {}}"#,
        r#"{"section": {"M": 2}}"#,
        r#"{"evolve": {"datum": {"kind": "bump", "hight": 1}}}"#,
    ] {
        fs::write(tmp.path().join("c.json"), doc).unwrap();
        let o = pme(tmp.path(), &["--config", "c.json", "section", "--out", "s"]);
        assert_eq!(code(&o), 2, "{doc}: {}", text(&o));
        assert!(text(&o).contains("unknown field"), "{}", text(&o));
    }
}

#[test]
fn missing_config_file_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pme(tmp.path(), &["--config", "nope.json", "section"]);
    assert_eq!(code(&o), 4, "{}", text(&o));
}

#[test]
fn evolve_with_end_before_start_keeps_only_the_initial_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pme(
        tmp.path(),
        &[
            "evolve",
            "--nz",
            "9",
            "--ny",
            "64",
            "--y-extent",
            "8",
            "--tau-end",
            "0",
            "--out",
            "e",
        ],
    );
    assert_eq!(code(&o), 0, "{}", text(&o));
    let snaps: Vec<_> = fs::read_dir(tmp.path().join("e/snapshots"))
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "bin"))
        .collect();
    assert_eq!(snaps.len(), 1);
    assert_eq!(json(&tmp.path().join("e/evolve.json"))["steps"], 0);
}

#[test]
fn evolve_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let mut a: Vec<&str> = SMALL_EVOLVE.to_vec();
    a.extend(["--out", "a"]);
    let mut b: Vec<&str> = SMALL_EVOLVE.to_vec();
    b.extend(["--out", "b"]);
    assert_eq!(code(&pme(tmp.path(), &a)), 0);
    assert_eq!(code(&pme(tmp.path(), &b)), 0);
    let ma = assert_manifest_verifies(&tmp.path().join("a"));
    let mb = assert_manifest_verifies(&tmp.path().join("b"));
    assert_eq!(hashes(&ma), hashes(&mb));
    assert_eq!(ma["config"], mb["config"]);
    let fronts = fs::read_to_string(tmp.path().join("a/fronts.csv")).unwrap();
    assert_eq!(fronts.lines().next().unwrap(), "tau,z,gamma");
}

#[test]
fn truncation_guard_advises_a_larger_window() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pme(
        tmp.path(),
        &[
            "evolve",
            "--nz",
            "9",
            "--ny",
            "64",
            "--y-extent",
            "3",
            "--tau-end",
            "4",
            "--out",
            "e",
        ],
    );
    assert_eq!(code(&o), 3, "{}", text(&o));
    assert!(text(&o).contains("enlarge the y extent"), "{}", text(&o));
}

#[test]
fn csv_datum_import() {
    let tmp = tempfile::tempdir().unwrap();
    // export a built-in datum as CSV, then feed it back
    let o = pme(
        tmp.path(),
        &[
            "evolve",
            "--nz",
            "9",
            "--ny",
            "64",
            "--y-extent",
            "8",
            "--tau-end",
            "0",
            "--csv",
            "--out",
            "e",
        ],
    );
    assert_eq!(code(&o), 0, "{}", text(&o));
    let snap = fs::read_to_string(tmp.path().join("e/snapshots/snap_00000.csv")).unwrap();
    assert_eq!(snap.lines().next().unwrap(), "z,y,value");
    // the snapshot holds rescaled values; any nonnegative field will do as a datum
    fs::write(tmp.path().join("datum.csv"), &snap).unwrap();
    let args = [
        "evolve",
        "--nz",
        "9",
        "--ny",
        "64",
        "--y-extent",
        "8",
        "--tau-end",
        "1",
        "--datum-csv",
        "datum.csv",
        "--out",
        "f",
    ];
    let o = pme(tmp.path(), &args);
    assert_eq!(code(&o), 0, "{}", text(&o));
    assert_eq!(
        json(&tmp.path().join("f/manifest.json"))["config"]["datum"]["kind"],
        "csv"
    );

    // wrong grid
    let o = pme(
        tmp.path(),
        &[
            "evolve",
            "--nz",
            "9",
            "--ny",
            "65",
            "--y-extent",
            "8",
            "--datum-csv",
            "datum.csv",
            "--out",
            "g",
        ],
    );
    assert_eq!(code(&o), 2, "{}", text(&o));
    fs::write(tmp.path().join("bad.csv"), "z,y,value\n0,x,1\n").unwrap();
    let o = pme(
        tmp.path(),
        &[
            "evolve",
            "--nz",
            "9",
            "--ny",
            "64",
            "--y-extent",
            "8",
            "--datum-csv",
            "bad.csv",
            "--out",
            "g",
        ],
    );
    assert_eq!(code(&o), 2, "{}", text(&o));
}

#[test]
fn wave_with_the_critical_speed_passes_its_invariants() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pme(
        tmp.path(),
        &[
            "wave",
            "--auto-cstar",
            "--nz",
            "16",
            "--n-xi",
            "151",
            "--out",
            "w",
        ],
    );
    assert_eq!(code(&o), 0, "{}", text(&o));
    let out = tmp.path().join("w");
    assert_manifest_verifies(&out);
    let csv = fs::read_to_string(out.join("wave.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "z,xi,value");
    assert_eq!(csv.lines().count(), 1 + 16 * 151);
    let meta = json(&out.join("wave.json"));
    assert!((meta["speed"].as_f64().unwrap() - 1.0).abs() < 0.2);
}

#[test]
fn verify_selection_and_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    // run-based audits need a run
    let o = pme(tmp.path(), &["verify", "--audit", "speed", "--out", "v"]);
    assert_eq!(code(&o), 2, "{}", text(&o));

    let o = pme(
        tmp.path(),
        &[
            "verify", "--audit", "stepper", "--audit", "scaling", "--out", "v",
        ],
    );
    assert_eq!(code(&o), 0, "{}", text(&o));
    let summary = fs::read_to_string(tmp.path().join("v/summary.txt")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    assert!(
        summary.starts_with("criterion 3 scaling identity: PASS"),
        "{summary}"
    );
    assert_manifest_verifies(&tmp.path().join("v"));

    let o = pme(tmp.path(), &["verify", "--audit", "barriers", "--out", "v"]);
    assert_eq!(code(&o), 1, "{}", text(&o));
}

#[test]
fn verify_reads_a_persisted_run() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args: Vec<&str> = SMALL_EVOLVE.to_vec();
    args.extend(["--out", "run"]);
    assert_eq!(code(&pme(tmp.path(), &args)), 0);
    let o = pme(
        tmp.path(),
        &["verify", "--run", "run", "--audit", "outer", "--out", "v"],
    );
    assert!(code(&o) <= 1, "{}", text(&o));
    let results = json(&tmp.path().join("v/verify.json"));
    assert_eq!(results[0]["audit"], "outer");
    assert_eq!(results[0]["criterion"], 5);

    let o = pme(
        tmp.path(),
        &[
            "verify", "--run", "missing", "--audit", "outer", "--out", "v",
        ],
    );
    assert_eq!(code(&o), 4, "{}", text(&o));
}

#[test]
fn foreign_output_directories_are_left_alone() {
    let tmp = tempfile::tempdir().unwrap();
    fs::create_dir(tmp.path().join("mine")).unwrap();
    fs::write(tmp.path().join("mine/notes.txt"), "keep").unwrap();
    let o = pme(tmp.path(), &["barriers", "--out", "mine"]);
    assert_eq!(code(&o), 2, "{}", text(&o));
    assert_eq!(
        fs::read_to_string(tmp.path().join("mine/notes.txt")).unwrap(),
        "keep"
    );
    // our own output is replaced on rerun
    assert_eq!(code(&pme(tmp.path(), &["barriers", "--out", "b"])), 0);
    assert_eq!(code(&pme(tmp.path(), &["barriers", "--out", "b"])), 0);
}
