use std::path::PathBuf;
use std::process::{Command, Output};

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gaborkit"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gaborkit-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (status.code().unwrap(), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

#[test]
fn tight_on_indicator() {
    let dir = scratch("tight");
    let w = dir.join("chi.json");
    std::fs::write(&w, r#"{"grid_den":1,"lo":0,"re":[1.0],"im":[0.0]}"#).unwrap();
    let (code, out, _) = run(exe().args(["tight", "--a", "1", "--b", "1", "--window"]).arg(&w));
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["verdict"], "normalized-tight");

    let g = dir.join("g.json");
    std::fs::write(&g, r#"{"grid_den":2,"lo":0,"re":[1.0,0.5],"im":[0.0,0.0]}"#).unwrap();
    let (code, out, _) = run(exe().args(["tight", "--window"]).arg(&g));
    assert_eq!(code, 1, "not tight is a failing verdict");
    assert!(out.contains("not-tight"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn malformed_window_is_input_error_with_position() {
    let dir = scratch("bad");
    let w = dir.join("bad.json");
    std::fs::write(&w, "{\"grid_den\": 1,\n \"lo\": 0,\n \"re\": [1.0,,]}").unwrap();
    let (code, _, err) = run(exe().args(["cc", "--window"]).arg(&w));
    assert_eq!(code, 2);
    assert!(err.contains("line 3 column"), "{err}");
    let (code, _, _) = run(exe().args(["cc", "--a", "x/2"]));
    assert_eq!(code, 2);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn walnut_diag_uncond_on_ex63_writes_growing_csv() {
    let dir = scratch("diag");
    let (code, _, _) = run(exe()
        .args(["walnut-diag", "--regime", "uncond", "--gallery", "ex6.3", "--truncation", "1024", "--out"])
        .arg(&dir));
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.join("walnut_uncond.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("spec_size,low,high"));
    let highs: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(highs.len() > 4 && highs.last().unwrap() > &(highs[0] * 1.2));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["exit_code"], 0);
    let report = std::fs::read_to_string(dir.join("report.jsonl")).unwrap();
    assert!(report.contains("\"truncation\":1024"), "truncation is echoed");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn gallery_and_oracle_commands() {
    let (code, out, _) = run(exe().args(["gallery", "list"]));
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 7);
    let (code, _, _) = run(exe().args(["gallery", "run", "ex4.13"]));
    assert_eq!(code, 0);
    let (code, _, err) = run(exe().args(["gallery", "run", "ex5.4"]));
    assert_eq!(code, 2, "{err}");

    let dir = scratch("oracle");
    let d = dir.join("sys.json");
    std::fs::write(&d, r#"{"N":8,"a":2,"L":4,"re":[1,1,0,0,0,0,0,0],"im":[0,0,0,0,0,0,0,0]}"#).unwrap();
    let (code, out, _) = run(exe().args(["oracle-verify", "--discrete"]).arg(&d));
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert!(v["walnut_residual"].as_f64().unwrap() <= 1e-10);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn cli_matches_library() {
    use gaborkit::correlations::{cc_check, correlation_family};
    use gaborkit::model::{GridSpec, LatticeParams, StepFunction};
    let dir = scratch("lib");
    let w = dir.join("g.json");
    std::fs::write(&w, r#"{"grid_den":2,"lo":0,"re":[1.0,0.5],"im":[0.0,0.0]}"#).unwrap();
    let (_, out, _) = run(exe().args(["cc", "--window"]).arg(&w));
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    let g = StepFunction::from_real(GridSpec { den: 2 }, 0, &[1.0, 0.5]);
    let lib = cc_check(&correlation_family(&g, &LatticeParams::integer(1, 1)).unwrap());
    assert_eq!(v["report"], serde_json::to_value(&lib).unwrap());
    std::fs::remove_dir_all(dir).unwrap();
}
