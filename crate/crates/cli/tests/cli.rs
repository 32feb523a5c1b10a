use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mvdeg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvdeg"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn five_sample_golden_value() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("x.csv"), "x\n1\n2\n3\n4\n5\n").unwrap();
    let out = mvdeg(
        dir.path(),
        &["entropy", "--signal", "x.csv", "--m", "2", "--c", "2", "--max-scale", "1", "--graph", "zero"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert_eq!(csv, "method,tau,mean,sd,n_realizations\nmvDEG,1,0.75,0,1\n");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("curve.json")).unwrap()).unwrap();
    assert_eq!(json["embedding"]["m"], 2);
    assert_eq!(json["curves"][0]["records"][0]["mean"], 0.75);
}

#[test]
fn undefined_scales_are_flagged_with_exit_zero() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("x.csv"), "x\n1\n2\n3\n4\n5\n").unwrap();
    let out = mvdeg(dir.path(), &["entropy", "--signal", "x.csv", "--m", "2", "--c", "2", "--max-scale", "3"]);
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert!(csv.contains("mvDEG,3,undefined,undefined,1"), "{csv}");
}

#[test]
fn thirty_seven_station_gaussian_graph() {
    let dir = TempDir::new().unwrap();
    let mut coords = String::from("station_id,x,y\n");
    for i in 0..37 {
        coords.push_str(&format!("S{i},{},{}\n", (i % 7) as f64 * 1.5, (i / 7) as f64 * 2.0));
    }
    fs::write(dir.path().join("stations.csv"), coords).unwrap();
    let gen = mvdeg(dir.path(), &["generate", "--kind", "wgn", "--p", "37", "--n", "744", "--seed", "3"]);
    assert_eq!(code(&gen), 0, "{}", stderr(&gen));
    let out = mvdeg(
        dir.path(),
        &[
            "entropy", "--signal", "signal.csv", "--graph", "gaussian", "--coords", "stations.csv",
            "--sigma1-sq", "4.0", "--sigma2", "3.0", "--max-scale", "5",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("curve.json")).unwrap()).unwrap();
    assert_eq!(json["channels"], 37);
    let records = json["curves"][0]["records"].as_array().unwrap();
    assert_eq!(records.len(), 5);
    for r in records {
        let h = r["mean"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&h));
    }
}

#[test]
fn missing_header_exits_2() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("x.csv"), "1,2\n3,4\n5,6\n").unwrap();
    let out = mvdeg(dir.path(), &["entropy", "--signal", "x.csv"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 1"), "{}", stderr(&out));
}

#[test]
fn bad_cell_exits_2_with_position() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("x.csv"), "a,b\n1,2\n3,oops\n").unwrap();
    let out = mvdeg(dir.path(), &["entropy", "--signal", "x.csv"]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("line 3") && err.contains("column 2"), "{err}");
}

#[test]
fn graph_signal_mismatch_exits_3() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&mvdeg(dir.path(), &["generate", "--kind", "wgn", "--p", "3", "--n", "100"])), 0);
    assert_eq!(code(&mvdeg(dir.path(), &["graph", "--kind", "complete", "--p", "2"])), 0);
    let out = mvdeg(dir.path(), &["entropy", "--signal", "signal.csv", "--graph", "graph.json"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn graph_file_round_trip() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&mvdeg(dir.path(), &["generate", "--kind", "wgn", "--p", "3", "--n", "300"])), 0);
    let g = mvdeg(dir.path(), &["graph", "--kind", "correlation", "--signal", "signal.csv"]);
    assert_eq!(code(&g), 0, "{}", stderr(&g));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("graph.json")).unwrap()).unwrap();
    assert_eq!(doc["n"], 3);
    let from_file = mvdeg(dir.path(), &["entropy", "--signal", "signal.csv", "--graph", "graph.json", "--out-prefix", "a"]);
    let direct = mvdeg(dir.path(), &["entropy", "--signal", "signal.csv", "--graph", "correlation", "--out-prefix", "b"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(code(&direct), 0);
    assert_eq!(
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("b.csv")).unwrap()
    );
}

#[test]
fn generate_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let args = ["generate", "--kind", "mixture", "--q", "2", "--n", "15000", "--seed", "7"];
    assert_eq!(code(&mvdeg(dir.path(), &[&args[..], &["--out", "a.csv"]].concat())), 0);
    assert_eq!(code(&mvdeg(dir.path(), &[&args[..], &["--out", "b.csv"]].concat())), 0);
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(
        fs::read(dir.path().join("a.json")).unwrap(),
        fs::read(dir.path().join("b.json")).unwrap()
    );
    let sidecar: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(sidecar["spec"]["kind"], "mixture");
    assert_eq!(sidecar["spec"]["q"], 2);
    assert!(sidecar["generator_version"].as_str().unwrap().starts_with("chacha20"));
}

#[test]
fn non_psd_correlation_exits_4_with_minor() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("corr.json"),
        "[[1.0, 0.9, 0.1], [0.9, 1.0, 0.9], [0.1, 0.9, 1.0]]",
    )
    .unwrap();
    let out = mvdeg(dir.path(), &["generate", "--kind", "correlated", "--corr", "corr.json"]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("order 3"), "{}", stderr(&out));
}

#[test]
fn correlated_generation_accepts_object_form() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("corr.json"), r#"{"corr": [[1, 0.5], [0.5, 1]]}"#).unwrap();
    let out = mvdeg(dir.path(), &["generate", "--kind", "correlated", "--corr", "corr.json", "--n", "50"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("signal.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51);
    assert_eq!(csv.lines().next().unwrap().split(',').count(), 2);
}

#[test]
fn one_over_f_shape() {
    let dir = TempDir::new().unwrap();
    let out = mvdeg(dir.path(), &["generate", "--kind", "one_over_f", "--p", "3", "--n", "744"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("signal.csv")).unwrap();
    let mut lines = csv.lines();
    lines.next();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 744);
    assert!(rows.iter().all(|r| r.split(',').count() == 3));
}

#[test]
fn bench_records_classical_refusal() {
    let dir = TempDir::new().unwrap();
    let out = mvdeg(
        dir.path(),
        &["bench", "--methods", "classical", "--N", "2000", "--p", "8", "--m", "5", "--repetitions", "1"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("bench.json")).unwrap()).unwrap();
    let records = report["records"].as_array().unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["outcome"], "refused-capacity");
    assert_eq!(records[0]["pattern_count"], "1313383968");
    let csv = fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with("refused-capacity"), "{csv}");
}

#[test]
fn bench_empty_length_list_exits_1() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&mvdeg(dir.path(), &["bench", "--N"])), 1);
    assert_eq!(code(&mvdeg(dir.path(), &["bench", "--N", ""])), 1);
}

#[test]
fn usage_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&mvdeg(dir.path(), &["nope"])), 1);
    assert_eq!(code(&mvdeg(dir.path(), &["entropy"])), 1);
    assert_eq!(code(&mvdeg(dir.path(), &["generate", "--kind", "mixture"])), 1);
    assert_eq!(code(&mvdeg(dir.path(), &["entropy", "--signal", "missing.csv"])), 1);
    assert_eq!(code(&mvdeg(dir.path(), &["--help"])), 0);
}

#[test]
fn ensemble_preset_and_config() {
    let dir = TempDir::new().unwrap();
    let out = mvdeg(
        dir.path(),
        &["ensemble", "--preset", "degree", "--realizations", "2", "--max-scale", "2", "--n", "200", "--seed", "5"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("ensemble.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5 * 2);
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("ensemble.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["realizations"], 2);
    assert_eq!(report["report"]["seeds"].as_array().unwrap().len(), 2);

    fs::write(
        dir.path().join("exp.json"),
        r#"{"label": "tiny", "conditions": [{"label": "w", "spec": {"kind": "wgn", "p": 2, "n": 200, "seed": 0}}],
            "graph": "complete", "embedding": {"m": 3, "c": 5, "max_scale": 2}, "realizations": 2, "seed": 1}"#,
    )
    .unwrap();
    let out = mvdeg(dir.path(), &["ensemble", "--config", "exp.json", "--out-prefix", "tiny"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("tiny.csv")).unwrap();
    assert!(csv.contains("mvDEG[w],1,"), "{csv}");

    fs::write(dir.path().join("broken.json"), "{\"label\": ").unwrap();
    assert_eq!(code(&mvdeg(dir.path(), &["ensemble", "--config", "broken.json"])), 2);
    let one = mvdeg(dir.path(), &["ensemble", "--config", "exp.json", "--realizations", "1"]);
    assert_eq!(code(&one), 1);
}
