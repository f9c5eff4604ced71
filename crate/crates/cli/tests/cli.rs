use std::process::{Command, Output};

fn seshadri(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seshadri")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn epsilon_of_a_square_class_is_the_root() {
    let o = seshadri(&["epsilon", "-m", "[[0,8],[8,0]]", "-c", "1,1", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"]["q"], "4");
    assert_eq!(v["attained_by"], serde_json::json!(["SqrtBound"]));
}

#[test]
fn epsilon_accepts_rational_classes_and_rescales() {
    let whole = seshadri(&["epsilon", "-m", "[[0,4],[4,0]]", "-c", "1,1"]);
    assert!(stdout(&whole).starts_with("epsilon 8/3 "));
    let half = seshadri(&["epsilon", "-m", "[[0,4],[4,0]]", "-c", "1/2,1/2"]);
    assert!(stdout(&half).starts_with("epsilon 4/3 "));
}

#[test]
fn json_result_round_trips() {
    let o = seshadri(&["epsilon", "-m", "[[0,4],[4,0]]", "-c", "2,1", "--json"]);
    let text = stdout(&o);
    let r = seshadri::SeshadriResult::from_json(&text).unwrap();
    assert_eq!(format!("{}\n", r.to_json()), text);
}

#[test]
fn exit_codes() {
    assert_eq!(seshadri(&["epsilon", "-m", "[[0,4],[4,0]]", "-c", "1,-1"]).status.code(), Some(3));
    assert_eq!(seshadri(&["epsilon", "-m", "[[0,4],[3,0]]", "-c", "1,1"]).status.code(), Some(2));
    assert_eq!(seshadri(&["epsilon", "-m", "[[0,4],[4,0]]", "-c", "1,x"]).status.code(), Some(2));
    assert_eq!(seshadri(&["epsilon", "-m", "[[0,4],[4,0]]", "-c", "1,1,1"]).status.code(), Some(2));
    assert_eq!(seshadri(&["epsilon", "-m", "[[0,4],[4,0]]"]).status.code(), Some(2));
    assert_eq!(seshadri(&["plot", "-m", "[[0,1,1],[1,0,1],[1,1,0]]"]).status.code(), Some(3));
    assert_eq!(seshadri(&["plot", "-m", "[[0,4],[4,0]]", "--formats", "png"]).status.code(), Some(2));
    assert_eq!(seshadri(&["survey", "--family", "[[0,n],[n]]", "--range", "n=1..2"]).status.code(), Some(2));
}

#[test]
fn matrix_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, r#"{"matrix": [[0,4],[4,0]]}"#).unwrap();
    let o = seshadri(&["epsilon", "-m", path.to_str().unwrap(), "-c", "1,1"]);
    assert!(stdout(&o).starts_with("epsilon 8/3 "));
}

#[test]
fn plot_writes_files_and_gap_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = seshadri(&["plot", "-m", "[[0,4],[4,0]]", "--delta", "1/100", "--out", out, "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["segments"], 3);
    assert_eq!(v["gaps"]["uncovered"], serde_json::json!([]));
    for f in ["seshadri.csv", "seshadri.svg", "seshadri.tex", "gaps.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("seshadri.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn plot_reports_the_gap_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = seshadri(&["plot", "-m", "[[0,8],[8,0]]", "--delta", "1/100", "--formats", "csv", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("gaps.json")).unwrap()).unwrap();
    let covers_zero = report["uncovered"].as_array().unwrap().iter().any(|g| {
        let lo = seshadri::quad::parse_rational(g["lo"].as_str().unwrap()).unwrap();
        let hi = seshadri::quad::parse_rational(g["hi"].as_str().unwrap()).unwrap();
        lo < seshadri::quad::rat(0, 1) && seshadri::quad::rat(0, 1) < hi
    });
    assert!(covers_zero);
}

#[test]
fn output_is_deterministic() {
    let args = ["curves", "-m", "[[0,1,1],[1,0,1],[1,1,0]]", "-c", "1,1,1", "--json"];
    let a = seshadri(&args);
    let b = seshadri(&args);
    assert_eq!(a.stdout, b.stdout);
    let seq = Command::new(env!("CARGO_BIN_EXE_seshadri")).args(args).env("SESHADRI_THREADS", "1").output().unwrap();
    assert_eq!(a.stdout, seq.stdout);
}

#[test]
fn elliptic_and_verify() {
    let o = seshadri(&["elliptic", "-m", "[[0,1,1],[1,0,1],[1,1,0]]", "--radius", "1"]);
    assert_eq!(stdout(&o), "(0,0,1)\n(0,1,0)\n(1,0,0)\n");
    let o = seshadri(&["verify", "-m", "[[0,4],[4,0]]", "-c", "1,1"]);
    assert_eq!(stdout(&o), "true\n");
}

#[test]
fn survey_table() {
    let o = seshadri(&["survey", "--family", "[[0,n],[n,0]]", "--range", "n=1..3", "--delta", "1/50", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["piecewise_linear"] == true));
    assert_eq!(rows[2]["params"]["n"], 3);
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_seshadri"))
        .args(["epsilon", "-m", "[[0,4],[4,0]]", "-c", "1,1"])
        .env("SESHADRI_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
