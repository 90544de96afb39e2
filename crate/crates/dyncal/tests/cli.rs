use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dyncal::io;
use dyncal_core::spline_dps::fit_cubic_spline;
use dyncal_core::{BuiltinSimulator, Simulator, TargetSeries};
use serde_json::Value;

fn dyncal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyncal")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn easom_target(dir: &Path) -> PathBuf {
    let sim = BuiltinSimulator::easom();
    let path = dir.join("easom_target.csv");
    io::write_series(&path, sim.times(), &sim.reference_series()).unwrap();
    path
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_EASOM: &str = r#"{"simulator":"easom","n0":10,"budget":24,"candidates":800,"grid_size":1500,"seed":4}"#;

#[test]
fn dps_on_easom_target() {
    let tmp = tempfile::tempdir().unwrap();
    let target = easom_target(tmp.path());
    let out = tmp.path().join("dps");
    let o = dyncal(&["dps", "--target", p(&target), "--out-dir", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let d = json(&out.join("dps.json"));
    assert_eq!(d["dps"], serde_json::json!([145, 37, 132]));
    assert_eq!(d["k_selected"], 3);
    let path = fs::read_to_string(out.join("mse_path.csv")).unwrap();
    assert_eq!(path.lines().count(), 12);
    assert!(path.starts_with("knots,mse\n0,"));
}

#[test]
fn single_knot_dps_is_the_exhaustive_optimum() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = BuiltinSimulator::harari_steinberg();
    let target = tmp.path().join("hs.csv");
    io::write_series(&target, sim.times(), &sim.reference_series()).unwrap();
    let out = tmp.path().join("dps");
    let o = dyncal(&["dps", "--target", p(&target), "--k-max", "1", "--out-dir", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let series = TargetSeries::new(sim.times().to_vec(), sim.reference_series()).unwrap();
    let best = (2..series.len())
        .map(|k| (fit_cubic_spline(&series, &[k]).unwrap().mse, k))
        .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
        .1;
    assert_eq!(json(&out.join("dps.json"))["dps"], serde_json::json!([best]));
}

#[test]
fn malformed_target_row_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(tmp.path(), "bad.csv", "t,value\n0,1\n0.5,oops\n1,2\n");
    let o = dyncal(&["dps", "--target", p(&bad), "--out-dir", p(&tmp.path().join("o"))]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    let o = dyncal(&["dps", "--target", p(&tmp.path().join("missing.csv"))]);
    assert_eq!(code(&o), 1);
}

#[test]
fn calibrate_writes_all_artifacts_and_replays_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "easom.json", SMALL_EASOM);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let o = dyncal(&["calibrate", "--config", p(&cfg), "--out-dir", p(&a)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["config.json", "training.csv", "responses.csv", "result.json", "trace.csv", "overlay.csv", "mse_path.csv", "metrics.csv"] {
        assert!(a.join(f).is_file(), "{f}");
    }
    let result = json(&a.join("result.json"));
    assert_eq!(result["method"], "msce");
    assert_eq!(result["simulator_calls"], 24);
    assert!(result["metrics"]["rmse"].as_f64().unwrap() < 1e-3);
    let training = fs::read_to_string(a.join("training.csv")).unwrap();
    assert_eq!(training.lines().count(), 25);
    assert_eq!(training.lines().filter(|l| l.contains(",initial,")).count(), 10);
    let responses = fs::read_to_string(a.join("responses.csv")).unwrap();
    assert_eq!(responses.lines().count(), 201);
    assert_eq!(responses.lines().next().unwrap().split(',').count(), 25);
    assert_eq!(fs::read_to_string(a.join("trace.csv")).unwrap().lines().count(), 15);

    // replay from the resolved config alone, using a different thread count
    let o = dyncal(&["--threads", "1", "calibrate", "--config", p(&a.join("config.json")), "--out-dir", p(&b)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["result.json", "training.csv", "responses.csv", "trace.csv", "config.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "easom.json", SMALL_EASOM);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&dyncal(&["calibrate", "--config", p(&cfg), "--seed", "11", "--out-dir", p(&a)])), 0);
    assert_eq!(json(&a.join("config.json"))["seed"], 11);
    assert_eq!(code(&dyncal(&["calibrate", "--config", p(&cfg), "--out-dir", p(&b)])), 0);
    assert_ne!(fs::read(a.join("training.csv")).unwrap(), fs::read(b.join("training.csv")).unwrap());
}

#[test]
fn budget_and_config_errors_have_distinct_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = p(&tmp.path().join("o")).to_owned();
    let small = write(tmp.path(), "small.json", r#"{"simulator":"easom","n0":15,"budget":10}"#);
    let o = dyncal(&["calibrate", "--config", p(&small), "--out-dir", &out]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let tight = write(tmp.path(), "tight.json", r#"{"simulator":"easom","n0":10,"budget":12,"candidates":500}"#);
    assert_eq!(code(&dyncal(&["calibrate", "--config", p(&tight), "--out-dir", &out])), 3);
    let unknown = write(tmp.path(), "unknown.json", r#"{"simulator":"lorenz"}"#);
    let o = dyncal(&["calibrate", "--config", p(&unknown), "--out-dir", &out]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("lorenz"));
    let garbled = write(tmp.path(), "garbled.json", "{ not json");
    assert_eq!(code(&dyncal(&["calibrate", "--config", p(&garbled), "--out-dir", &out])), 2);
    assert_eq!(code(&dyncal(&["calibrate", "--config", p(&tmp.path().join("none.json"))])), 1);
    assert_eq!(code(&dyncal(&["frobnicate"])), 2);
    assert_eq!(code(&dyncal(&["--help"])), 0);
}

fn external_config(dir: &Path, script_body: &str) -> String {
    let script = write(dir, "sim.sh", script_body);
    format!(
        r#"{{"simulator":{{"command":["sh","{}"],"native_bounds":[[0,1],[0,1]],"time_grid":{{"lo":0,"hi":1,"len":200}}}},
            "target":{{"series":{{"times":{},"values":{}}}}},"n0":10,"budget":20,"candidates":500,"grid_size":1000}}"#,
        p(&script),
        serde_json::to_string(BuiltinSimulator::easom().times()).unwrap(),
        serde_json::to_string(&BuiltinSimulator::easom().reference_series()).unwrap(),
    )
}

#[test]
fn external_failures_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = p(&tmp.path().join("o")).to_owned();
    let protocol = write(tmp.path(), "protocol.json", &external_config(tmp.path(), "printf 't,value\\n0,1\\n' > output.csv"));
    let o = dyncal(&["calibrate", "--config", p(&protocol), "--out-dir", &out]);
    assert_eq!(code(&o), 5, "{}", stderr(&o));
    let sub = tmp.path().join("p");
    fs::create_dir(&sub).unwrap();
    let process = write(tmp.path(), "process.json", &external_config(&sub, "exit 9"));
    let o = dyncal(&["calibrate", "--config", p(&process), "--out-dir", &out]);
    assert_eq!(code(&o), 6, "{}", stderr(&o));
}

#[test]
fn external_calibration_matches_builtin() {
    let tmp = tempfile::tempdir().unwrap();
    let ext = format!(
        r#"{{"simulator":{{"command":["{}","easom"],"native_bounds":[[0,1],[0,1]],"time_grid":{{"lo":0,"hi":1,"len":200}}}},
            "target":{{"input":[0.8,0.2]}},"n0":10,"budget":20,"candidates":500,"grid_size":1000}}"#,
        env!("CARGO_BIN_EXE_builtin-sim")
    );
    let ext = write(tmp.path(), "ext.json", &ext);
    let local = write(tmp.path(), "local.json", r#"{"simulator":"easom","n0":10,"budget":20,"candidates":500,"grid_size":1000}"#);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let exch = tmp.path().join("exchange");
    let o = Command::new(env!("CARGO_BIN_EXE_dyncal"))
        .args(["calibrate", "--config", p(&ext), "--out-dir", p(&a)])
        .env("DYNCAL_EXCHANGE_DIR", &exch)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(exch.join("input.csv").is_file());
    assert_eq!(code(&dyncal(&["calibrate", "--config", p(&local), "--out-dir", p(&b)])), 0);
    for f in ["training.csv", "responses.csv", "trace.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(json(&a.join("result.json"))["x_opt"], json(&b.join("result.json"))["x_opt"]);
}

#[test]
fn hm_run_and_audit() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "hm.json",
        r#"{"simulator":"easom","cutoff":2.0,"n0":12,"candidates":1000,"stage_cap":5,"max_stages":3,"seed":1}"#,
    );
    let out = tmp.path().join("hm");
    let o = dyncal(&["hm", "--config", p(&cfg), "--out-dir", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let result = json(&out.join("result.json"));
    assert_eq!(result["method"], "history_matching");
    let calls = result["simulator_calls"].as_u64().unwrap() as usize;
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let rows: Vec<&str> = trace.lines().skip(1).collect();
    assert_eq!(rows.len() + 12, calls);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[5], "max_implausibility");
        assert!(f[6].parse::<f64>().unwrap() <= 2.0, "{row}");
    }
    for c in ["0", "-1"] {
        let bad = write(tmp.path(), "bad.json", &format!(r#"{{"simulator":"easom","cutoff":{c}}}"#));
        assert_eq!(code(&dyncal(&["hm", "--config", p(&bad), "--out-dir", p(&out)])), 2);
    }
}

#[test]
fn simulate_builtin_and_empty_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = write(tmp.path(), "x.csv", "x1,x2\n0.8,0.2\n0.1,0.9\n");
    let out = tmp.path().join("y.csv");
    let o = dyncal(&["simulate", "--simulator", "easom", "--inputs", p(&inputs), "--output", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,run1,run2");
    assert_eq!(lines.len(), 201);
    let reference = BuiltinSimulator::easom().reference_series();
    for (line, want) in lines[1..].iter().zip(&reference) {
        let got: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(got.to_bits(), want.to_bits());
    }

    for (name, body) in [("empty.csv", ""), ("header.csv", "x1,x2\n")] {
        let inputs = write(tmp.path(), name, body);
        let out = tmp.path().join(format!("{name}.out"));
        let o = dyncal(&["simulate", "--simulator", "easom", "--inputs", p(&inputs), "--output", p(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert_eq!(fs::read_to_string(&out).unwrap(), "");
    }

    let o = dyncal(&["simulate", "--simulator", "nope", "--inputs", p(&inputs), "--output", p(&out)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn simulate_native_units_and_external_echo() {
    let tmp = tempfile::tempdir().unwrap();
    let x0 = BuiltinSimulator::bliznyuk().reference_input();
    let inputs = write(tmp.path(), "x.csv", &format!("x1,x2,x3,x4,x5\n{}\n", x0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")));
    let out = tmp.path().join("y.csv");
    let o = dyncal(&["simulate", "--simulator", "bliznyuk", "--inputs", p(&inputs), "--output", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let reference = BuiltinSimulator::bliznyuk().reference_series();
    let got: Vec<f64> = fs::read_to_string(&out).unwrap().lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    let worst = got.iter().zip(&reference).map(|(a, b)| (a - b).abs() / b.abs()).fold(0.0, f64::max);
    // scaling then unscaling may move the input by an ulp
    assert!(worst < 1e-12, "{worst}");

    write(tmp.path(), "echo.sh", "printf 't,value\\n0,7\\n0.5,7\\n1,7\\n' > output.csv");
    let spec = write(
        tmp.path(),
        "echo.json",
        &format!(r#"{{"command":["sh","{}"],"native_bounds":[[0,1]],"time_grid":[0,0.5,1]}}"#, p(&tmp.path().join("echo.sh"))),
    );
    let inputs = write(tmp.path(), "one.csv", "x1\n0.5\n");
    let out = tmp.path().join("echo.out");
    let o = dyncal(&["simulate", "--simulator", p(&spec), "--inputs", p(&inputs), "--scaled", "--output", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(&out).unwrap(),
        "t,run1\n0.0000000000000000e0,7.0000000000000000e0\n5.0000000000000000e-1,7.0000000000000000e0\n1.0000000000000000e0,7.0000000000000000e0\n"
    );
}

#[test]
fn evaluate_reports_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let target = write(tmp.path(), "g0.csv", "t,value\n0,1\n1,2\n2,4\n3,3\n");
    let solution = write(tmp.path(), "g.csv", "t,value\n0,1.5\n1,2\n2,3.5\n3,3\n");
    let out = tmp.path().join("m.json");
    let o = dyncal(&["evaluate", "--solution", p(&solution), "--target", p(&target), "--output", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = json(&out);
    assert!((m["rmse"].as_f64().unwrap() - 0.125f64.sqrt()).abs() < 1e-15);
    // ||g0 - g||^2 = 0.5 and ||g0 - mean||^2 = 5
    assert!((m["normd_ratio"].as_f64().unwrap() - 0.1).abs() < 1e-15);
    assert!((m["nse"].as_f64().unwrap() - 0.9).abs() < 1e-15);

    let o = dyncal(&["evaluate", "--solution", p(&target), "--target", p(&target)]);
    assert_eq!(code(&o), 0);
    let m: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(m["rmse"], 0.0);
    let short = write(tmp.path(), "short.csv", "t,value\n0,1\n");
    assert_eq!(code(&dyncal(&["evaluate", "--solution", p(&short), "--target", p(&target)])), 7);
}
