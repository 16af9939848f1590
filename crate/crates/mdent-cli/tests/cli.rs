use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_mdent"))
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn mdent")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(out)).expect("stdout is JSON")
}

fn write_ghz(dir: &Path) -> PathBuf {
    let path = dir.join("ghz3.json");
    let out = run(&["construct", "--known", "ghz3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    path
}

#[test]
fn every_run_echoes_seed_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let ghz = write_ghz(dir.path());
    let out = run(&["entropy", "--in", ghz.to_str().unwrap()]);
    assert!(out.status.success());
    let err = stderr(&out);
    assert!(err.contains("# seed 24301"), "{}", err);
    assert!(err.contains("# config entropy"), "{}", err);
}

#[test]
fn entropy_of_ghz_is_ln2_at_every_order() {
    let dir = tempfile::tempdir().unwrap();
    let ghz = write_ghz(dir.path());
    let out = run(&["--json", "entropy", "--in", ghz.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["support"], 2);
    for row in v["entropies"].as_array().unwrap() {
        let s = row["entropy"].as_f64().unwrap();
        assert!((s - 2f64.ln()).abs() < 1e-12, "S_{} = {}", row["q"], s);
    }
}

#[test]
fn minimize_ghz_finds_ln2_and_emits_replay_fields() {
    let dir = tempfile::tempdir().unwrap();
    let ghz = write_ghz(dir.path());
    let out = run(&["--json", "minimize", "--in", ghz.to_str().unwrap(), "--restarts", "8"]);
    assert!(out.status.success());
    let v = json(&out);
    let s = v["entropy"].as_f64().unwrap();
    assert!((s - 2f64.ln()).abs() < 1e-6, "entropy {}", s);
    assert_eq!(v["units"].as_array().unwrap().len(), 3);
    assert_eq!(v["units"][0].as_array().unwrap().len(), 2);
    assert_eq!(v["units"][0][0].as_array().unwrap().len(), 2);
    assert_eq!(v["units"][0][0][0].as_array().unwrap().len(), 2);
    assert_eq!(v["seed"], 24301);
    assert!(!v["trace"].as_array().unwrap().is_empty());
}

#[test]
fn gme_of_ghz_reports_half_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let ghz = write_ghz(dir.path());
    let out = run(&["--json", "gme", "--in", ghz.to_str().unwrap(), "--restarts", "10"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["lambda"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!((v["s_inf_min"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-8);
    assert!((v["gme"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(v["factors"].as_array().unwrap().len(), 3);
}

#[test]
fn generate_writes_loadable_state_and_verify_accepts_it() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ame43.json");
    let out = run(&[
        "--json",
        "generate",
        "--n",
        "4",
        "--d",
        "3",
        "--k",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["success"], true);
    assert!(v["f_final"].as_f64().unwrap() > 1.0 - 1e-9);

    let body: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(body["n_parties"], 4);
    assert!(body["f_final"].is_number());
    assert!(body["iterations"].is_number());
    assert!(body["seed"].is_number());

    let ver = run(&["verify", "--in", path.to_str().unwrap()]);
    assert!(ver.status.success());
    assert!(stdout(&ver).contains("uniform = true"));
}

#[test]
fn generate_four_qubit_ame_fails_with_exit_one() {
    let out = run(&["--json", "generate", "--n", "4", "--d", "2", "--k", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["success"], false);
    assert!(v["f_final"].as_f64().unwrap() < 1.0 - 1e-4);
    assert!(stderr(&out).contains("did not converge"));
}

#[test]
fn construct_latin_square_state_is_one_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ame33.json");
    let out = run(&["construct", "--design", "ls", "--d", "3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let ver = run(&["--json", "verify", "--in", path.to_str().unwrap(), "--k", "1"]);
    assert!(ver.status.success());
    let v = json(&ver);
    assert_eq!(v["is_uniform"], true);
    assert!(v["max_deviation"].as_f64().unwrap() < 1e-12);
}

#[test]
fn construct_ols_design_is_ame_4_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("oa43.json");
    let out = run(&["construct", "--design", "ols", "--d", "3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let ver = run(&["verify", "--in", path.to_str().unwrap(), "--k", "2"]);
    assert!(ver.status.success());
}

#[test]
fn construct_ols_for_two_levels_is_a_domain_error() {
    let out = run(&["construct", "--design", "ols", "--d", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn construct_without_out_prints_state_json() {
    let out = run(&["construct", "--known", "ame_4_3"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["n_parties"], 4);
    assert_eq!(v["local_dim"], 3);
    assert_eq!(v["amplitudes"].as_array().unwrap().len(), 81);
}

#[test]
fn verify_rejects_nonuniform_state_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // A product state is not even 1-uniform.
    let path = dir.path().join("prod.json");
    std::fs::write(
        &path,
        r#"{"n_parties": 2, "local_dim": 2, "amplitudes": [[1,0],[0,0],[0,0],[0,0]]}"#,
    )
    .unwrap();
    let out = run(&["verify", "--in", path.to_str().unwrap(), "--k", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("uniform = false"));
}

#[test]
fn sparsify_ghz_keeps_support_two() {
    let dir = tempfile::tempdir().unwrap();
    let ghz = write_ghz(dir.path());
    let sparse = dir.path().join("sparse.json");
    let out = run(&[
        "--json",
        "sparsify",
        "--in",
        ghz.to_str().unwrap(),
        "--restarts",
        "8",
        "--out",
        sparse.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["support_before"], 2);
    assert_eq!(v["support_after"], 2);
    assert!(sparse.exists());
}

#[test]
fn ensemble_csv_has_header_records_and_stats() {
    let out = run(&[
        "ensemble", "--source", "haar", "--n", "3", "--d", "2", "--size", "12",
        "--quantities", "S2,Sinf",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# mdent ensemble source=haar n=3 d=2 size=12"));
    assert!(text.contains("index,seed,S2,Sinf"));
    assert!(text.contains("# stats"));
    assert!(text.contains("# bounds"));
    let records = text
        .lines()
        .skip_while(|l| !l.starts_with("index,"))
        .skip(1)
        .take_while(|l| !l.starts_with('#'))
        .count();
    assert_eq!(records, 12);
}

#[test]
fn ensemble_json_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "ensemble", "--source", "haar", "--n", "3", "--d", "2", "--size", "6",
        "--format", "json", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["size"], 6);
    assert_eq!(v["records"].as_array().unwrap().len(), 6);
}

#[test]
fn ensemble_from_files_reads_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let ghz = write_ghz(dir.path());
    let out = run(&[
        "ensemble", "--source", "files", "--in", ghz.to_str().unwrap(),
        "--n", "3", "--d", "2", "--size", "1",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let row = text.lines().nth(2).unwrap();
    let s2: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((s2 - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn sweep_q_csv_is_monotone_for_ghz() {
    let dir = tempfile::tempdir().unwrap();
    let ghz = write_ghz(dir.path());
    let out = run(&[
        "sweep-q", "--in", ghz.to_str().unwrap(), "--q-grid", "1.5,2,4,8",
        "--restarts", "4",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let vals: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(vals.len(), 4);
    for w in vals.windows(2) {
        assert!(w[1] <= w[0] + 5e-3);
    }
    for v in vals {
        assert!((v - 2f64.ln()).abs() < 1e-6);
    }
}

#[test]
fn same_argv_and_seed_give_byte_identical_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let ghz = write_ghz(dir.path());
    let args = [
        "--json", "minimize", "--in", ghz.to_str().unwrap(), "--restarts", "6",
        "--seed", "99",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));

    let e = ["ensemble", "--source", "haar", "--n", "3", "--d", "2", "--size", "8"];
    let c = run(&e);
    let d = run(&e);
    assert_eq!(stdout(&c), stdout(&d));
}

#[test]
fn seed_flag_changes_stderr_echo_and_results_stay_valid() {
    let dir = tempfile::tempdir().unwrap();
    let ghz = write_ghz(dir.path());
    let out = run(&["minimize", "--in", ghz.to_str().unwrap(), "--seed", "7", "--restarts", "4"]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("# seed 7"));
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["minimize"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["construct", "--design", "ls"]);
    assert_eq!(out.status.code(), Some(2), "--design without --d is a usage error");
}

#[test]
fn missing_input_file_exits_one() {
    let out = run(&["entropy", "--in", "/nonexistent/state.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn threads_flag_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let ghz = write_ghz(dir.path());
    let out = run(&["minimize", "--in", ghz.to_str().unwrap(), "--threads", "1", "--restarts", "4"]);
    assert!(out.status.success(), "{}", stderr(&out));
}
