use std::path::PathBuf;
use std::process::{Command, Output};

fn bdx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bdx")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bdx-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn params_derive_and_validate() {
    let out = bdx(&["params", "--derive", "2,2,0.916515"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("b = [0.916515000000, 0.400000318469]"), "{text}");
    assert!(text.contains("valid: ok"));
    // b_2 would exceed 1/2
    assert_eq!(bdx(&["params", "--derive", "2,2,0.5"]).status.code(), Some(2));
    assert_eq!(bdx(&["params", "--derive", "2,2"]).status.code(), Some(2));

    let dir = scratch("params");
    let bad = dir.join("bad.toml");
    std::fs::write(&bad, "n = 2\nb = [0.9, 0.6]\nr = 2\n").unwrap();
    let out = bdx(&["params", "--params", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("b_2 = 0.6 >= 1/2"), "{}", stdout(&out));
    assert_eq!(bdx(&["ts-norm", "--vec", "1:1", "--params", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn ts_norm_inline_and_file() {
    let out = bdx(&["ts-norm", "--vec", "1:1 2:1", "--witness"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("1.31651513899\n"), "{text}");
    assert!(text.contains("witness"));
    let dir = scratch("ts");
    let file = dir.join("x.txt");
    std::fs::write(&file, "3:-1\n1:1\n").unwrap();
    let out = bdx(&["ts-norm", "--vec", file.to_str().unwrap()]);
    assert_eq!(stdout(&out), "1.31651513899\n");
    assert_eq!(bdx(&["ts-norm", "--vec", "1:x"]).status.code(), Some(2));
    assert_eq!(bdx(&["ts-norm", "--vec", "0:1"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(bdx(&["bogus"]).status.code(), Some(2));
    assert_eq!(bdx(&[]).status.code(), Some(2));
    assert_eq!(bdx(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(bdx(&["bd-build", "--stages", "0"]).status.code(), Some(2));
    let out = bdx(&["bd-build", "--filters", "/nonexistent/filters.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert_eq!(bdx(&["--help"]).status.code(), Some(0));
}

#[test]
fn registry_dump_and_cache() {
    let dir = scratch("reg");
    let out_file = dir.join("reg.txt");
    let out = bdx(&["bd-build", "--stages", "3", "--out", out_file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "stage 1: 1 new, 1 total\nstage 2: 2 new, 3 total\nstage 3: 10 new, 13 total\n");
    let dump = std::fs::read_to_string(&out_file).unwrap();
    assert_eq!(dump.lines().count(), 14);
    assert_eq!(stdout(&bdx(&["bd-build", "--stages", "3"])), dump);

    let cache = dir.join("cache");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_bdx"))
            .args(["bd-build", "--stages", "3"])
            .env("BDX_CACHE_DIR", &cache)
            .output()
            .unwrap()
    };
    assert_eq!(stdout(&run()), dump);
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 1);
    assert_eq!(stdout(&run()), dump);
}

#[test]
fn bd_norm_of_base_unit() {
    let out = bdx(&["bd-norm", "--vec", "0:1", "--horizon", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "stage 1\nhorizon 4\nnorm 1.00000000000\nincrement 0\n");
    // position 13 first appears at stage 4
    assert_eq!(bdx(&["bd-norm", "--vec", "13:1", "--horizon", "3"]).status.code(), Some(2));
    assert!(stdout(&bdx(&["bd-norm", "--vec", "13:1", "--horizon", "4"])).starts_with("stage 4\n"));
}

#[test]
fn analyze_gamma_json() {
    let out = bdx(&["analyze-gamma", "--id", "20", "--r", "1", "--tree"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["gamma"], 20);
    assert_eq!(doc["rank"], 4);
    assert!(doc["evaluation"]["entries"].is_array());
    assert!(doc["r_analysis"]["result"].is_object() || doc["r_analysis"]["result"].is_string());
    assert_eq!(doc["tree"]["nodes"][0]["parent"], serde_json::Value::Null);
    assert_eq!(bdx(&["analyze-gamma", "--id", "999"]).status.code(), Some(2));
}

#[test]
fn verify_suites() {
    for suite in ["tsirelson", "bd", "analysis", "prop14"] {
        let out = bdx(&["verify", "--suite", suite]);
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
        assert!(!stdout(&out).contains("FAIL"));
    }
    let out = bdx(&["verify", "--suite", "all", "--derive", "3,2,0.9"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).ends_with("14/14 checks passed\n"));
}

#[test]
fn saturation_is_byte_identical() {
    let dir = scratch("sat");
    let (a, b) = (dir.join("a.csv"), dir.join("b.csv"));
    let first = bdx(&["experiment", "saturation", "--seed", "3", "--scale", "2", "--out", a.to_str().unwrap()]);
    let second =
        bdx(&["experiment", "saturation", "--seed", "3", "--scale", "2", "--out", b.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(first.status.code(), Some(0), "{}", stdout(&first));
    assert_eq!(first.stdout, second.stdout);
    let csv = std::fs::read_to_string(&a).unwrap();
    assert_eq!(csv, std::fs::read_to_string(&b).unwrap());
    assert!(csv.starts_with("instance,coeff_hash,ts,bd,ratio,horizon\n"));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn saturation_json_report() {
    let dir = scratch("json");
    let path = dir.join("report.json");
    let out = bdx(&["experiment", "saturation", "--seed", "4", "--scale", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["config"]["seed"], 4);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 6);
    assert_eq!(doc["ok"], true);
}
