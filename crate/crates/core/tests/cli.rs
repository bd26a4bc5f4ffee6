use serde_json::Value;
use spine_rectify::volume::{write_stack, ActivationStack, Geometry};
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spine-rectify")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn synth_infer_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let preds = dir.path().join("preds");
    let out = run(&["synth", "--out", p(&data), "--cases", "3", "--random", "--seed", "4"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for c in ["case_000", "case_001", "case_002"] {
        assert!(data.join(c).join("stack").join("stack.json").is_file());
        assert!(data.join(c).join("truth.json").is_file());
    }

    let out = run(&["infer", "--data", p(&data), "--out", p(&preds), "--mode", "optim", "--jobs", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let pred = read_json(&preds.join("case_000.json"));
    let keys: Vec<&str> = pred.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["case", "mode", "energy", "anatomically_plausible", "vertebrae"]);
    assert_eq!(pred["mode"], "optim");
    let v0 = pred["vertebrae"][0].as_object().unwrap();
    let vkeys: Vec<&str> = v0.keys().map(String::as_str).collect();
    assert_eq!(vkeys, ["label", "name", "x_mm", "y_mm", "z_mm", "activation"]);
    assert_eq!(read_json(&preds.join("status").join("case_001.json"))["status"], "ok");

    let report_dir = dir.path().join("report");
    let out = run(&["eval", "--pred", p(&preds), "--truth", p(&data), "--out", p(&report_dir)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("Id Rate") && table.contains("All"));
    let report = read_json(&report_dir.join("report.json"));
    assert_eq!(report["overall"]["id_rate"], 1.0);
    assert!(report_dir.join("report.txt").is_file());
}

#[test]
fn truth_against_itself_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    assert_eq!(code(&run(&["synth", "--out", p(&data), "--cases", "2", "--start", "T3", "--count", "6"])), 0);
    let out = run(&["eval", "--pred", p(&data), "--truth", p(&data)]);
    assert_eq!(code(&out), 0);
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("100.00"), "{table}");
    assert!(table.contains("0.00"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for run_id in ["a", "b"] {
        let data = dir.path().join(run_id).join("data");
        let preds = dir.path().join(run_id).join("preds");
        let args = ["synth", "--out", p(&data), "--cases", "2", "--random", "--label-shift", "0.2", "--jitter", "2"];
        assert_eq!(code(&run(&args)), 0);
        assert_eq!(code(&run(&["infer", "--data", p(&data), "--out", p(&preds)])), 0);
        files.push((
            std::fs::read(data.join("case_001").join("stack").join("channel_05.vgf")).unwrap(),
            std::fs::read(preds.join("case_001.json")).unwrap(),
        ));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn floats_have_six_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let preds = dir.path().join("preds");
    assert_eq!(code(&run(&["synth", "--out", p(&data), "--amplitude", "17.3"])), 0);
    assert_eq!(code(&run(&["infer", "--data", p(&data), "--out", p(&preds)])), 0);
    let text = std::fs::read_to_string(preds.join("case_000.json")).unwrap();
    let pred: Value = serde_json::from_str(&text).unwrap();
    for v in pred["vertebrae"].as_array().unwrap() {
        for key in ["x_mm", "y_mm", "z_mm", "activation"] {
            let x = v[key].as_f64().unwrap();
            let digits: String = format!("{x:e}").split('e').next().unwrap().chars().filter(char::is_ascii_digit).collect();
            assert!(digits.trim_start_matches('0').len() <= 6, "{key} = {x}");
        }
    }
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("x");
    let cases = [
        vec!["synth", "--out", p(&out_dir), "--count", "0"],
        vec!["synth", "--out", p(&out_dir), "--start", "T1", "--count", "30"],
        vec!["synth", "--out", p(&out_dir), "--start", "Q9"],
        vec!["synth", "--out", p(&out_dir), "--label-shift", "1.5"],
        vec!["synth", "--out", p(&out_dir), "--jobs", "0"],
        vec!["infer", "--data", p(&out_dir), "--out", p(&out_dir), "--mode", "fast"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let out = run(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let bad_cfg = dir.path().join("bad.toml");
    std::fs::write(&bad_cfg, "delta = -1.0\n").unwrap();
    assert_eq!(code(&run(&["synth", "--out", p(&out_dir), "--config", p(&bad_cfg)])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn empty_stack_is_a_case_failure() {
    let dir = tempfile::tempdir().unwrap();
    let case = dir.path().join("data").join("blank");
    let g = Geometry::new([10, 10, 20], [2.0; 3], [0.0; 3]).unwrap();
    write_stack(&ActivationStack::zeros(g, 26).unwrap(), case.join("stack")).unwrap();
    let preds = dir.path().join("preds");
    let out = run(&["infer", "--data", p(&dir.path().join("data")), "--out", p(&preds)]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no vertebra"));
    assert_eq!(read_json(&preds.join("status").join("blank.json"))["status"], "no_vertebra");
}

#[test]
fn eval_reports_missing_cases() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let preds = dir.path().join("preds");
    assert_eq!(code(&run(&["synth", "--out", p(&data), "--cases", "2"])), 0);
    assert_eq!(code(&run(&["infer", "--data", p(&data), "--out", p(&preds)])), 0);
    std::fs::remove_file(preds.join("case_001.json")).unwrap();
    let out = run(&["eval", "--pred", p(&preds), "--truth", p(&data)]);
    assert_ne!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("case_001"));
}

#[test]
fn rectify_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let rect = dir.path().join("rect");
    assert_eq!(code(&run(&["synth", "--out", p(&data), "--start", "L1", "--count", "3"])), 0);
    let case = data.join("case_000");
    let out = run(&["rectify", "--data", p(&case), "--out", p(&rect), "--dump-centerline"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(rect.join("centerline.csv").is_file());
    assert!(rect.join("rectified").join("combined.vgf").is_file());

    let svg_path = dir.path().join("signals.svg");
    let out = run(&["plot", "--signals", p(&rect.join("signals.csv")), "--out", p(&svg_path), "--title", "L1-L3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert_eq!(svg.matches("class=\"peak\"").count(), 3);
    assert!(svg.contains("L1-L3"));
}
