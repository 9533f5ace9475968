use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_renewal-arma");
const RUNNING: [&str; 6] = ["--head", "0.2,0.3", "--r", "0.6", "--M", "5"];

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn assert_schema(name: &str, doc: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(name);
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

fn with(extra: &[&'static str]) -> Vec<&'static str> {
    let mut v = RUNNING.to_vec();
    v.extend_from_slice(extra);
    v
}

#[test]
fn factorize_running_example() {
    let mut args = vec!["factorize"];
    args.extend(with(&["--hmax", "5"]));
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_schema("factorize.schema.json", &doc);
    let phi: Vec<f64> = serde_json::from_value(doc["phi"].clone()).unwrap();
    assert!((phi[0] + 0.2).abs() < 1e-12 && (phi[1] + 0.02).abs() < 1e-12);
    assert_eq!(doc["gamma"].as_array().unwrap().len(), 6);
    assert!(doc["gamma"][1].as_f64().unwrap() < 0.0);
    assert_eq!(doc["params"]["head"][0].as_f64(), Some(0.2));
}

#[test]
fn factorize_geometric_is_white_noise() {
    let out = run(&["factorize", "--head", "0.5", "--r", "0.5", "--M", "1"]);
    let doc = stdout_json(&out);
    assert_eq!(doc["phi"], serde_json::json!([]));
    assert_eq!(doc["theta"], serde_json::json!([]));
    assert!((doc["k"].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn factorize_from_pgf() {
    let out = run(&[
        "factorize",
        "--pgf-num",
        "0,0.5",
        "--pgf-den",
        "1,-0.5",
        "--M",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_schema("factorize.schema.json", &doc);
    assert!((doc["k"].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn factorize_error_codes() {
    let lattice = run(&["factorize", "--head", "0,1", "--r", "0", "--allow-zero-f1"]);
    assert_eq!(lattice.status.code(), Some(3));
    let too_much_mass = run(&["factorize", "--head", "0.7,0.6", "--r", "0"]);
    assert_eq!(too_much_mass.status.code(), Some(3));
    let missing = run(&["factorize", "--r", "0.5"]);
    assert_eq!(missing.status.code(), Some(2));
    let bogus = run(&["factorize", "--nope"]);
    assert_eq!(bogus.status.code(), Some(2));
    let ok = run(&["factorize", "--head", "0.4,0.6", "--r", "0"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn simulate_is_reproducible_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for path in [&a, &b] {
        let mut args = vec!["simulate"];
        args.extend(with(&["--steps", "2000", "--seed", "11", "--out"]));
        args.push(path.to_str().unwrap());
        assert_eq!(run(&args).status.code(), Some(0));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    assert_eq!(lines.next(), Some("t,y"));
    assert_eq!(text.lines().count(), 2002);
    assert!(!text.contains('\r'));

    let manifest_path = dir.path().join("a.csv.manifest.json");
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_schema("manifest.schema.json", &manifest);
    let replay = run(&[
        "simulate",
        "--config",
        manifest_path.to_str().unwrap(),
        "--out",
        c.to_str().unwrap(),
    ]);
    assert_eq!(replay.status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
    let replayed: Value = stdout_json(&replay);
    assert_eq!(
        replayed["outputs"][0]["sha256"],
        manifest["outputs"][0]["sha256"]
    );
}

#[test]
fn simulate_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let mut args = vec!["simulate"];
    args.extend(with(&[
        "--steps", "50", "--seed", "3", "--format", "json", "--out",
    ]));
    args.push(path.to_str().unwrap());
    assert_eq!(run(&args).status.code(), Some(0));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_schema("series.schema.json", &doc);
    assert_eq!(doc["values"].as_array().unwrap().len(), 50);
    assert_eq!(doc["meta"]["config"]["seed"], 3);
}

#[test]
fn simulate_argument_and_io_errors() {
    let mut args = vec!["simulate"];
    args.extend(with(&["--steps", "0", "--out", "unused.csv"]));
    assert_eq!(run(&args).status.code(), Some(2));
    let mut args = vec!["simulate"];
    args.extend(with(&["--steps", "5", "--out", "/nonexistent-dir/x.csv"]));
    assert_eq!(run(&args).status.code(), Some(1));
}

#[test]
fn verify_quick_and_corrupted_model() {
    let mut args = vec!["verify"];
    args.extend(RUNNING);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_schema("verify.schema.json", &doc);
    assert_eq!(doc["passed"], true);

    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    std::fs::write(
        &model,
        r#"{"phi":[1.5,-0.2],"theta":[0.006],"k":0.65,"M":5,"mu":3.05,"sigma2":1.06}"#,
    )
    .unwrap();
    args.extend(["--model", model.to_str().unwrap()]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(5));
    let doc = stdout_json(&out);
    assert_schema("verify.schema.json", &doc);
    let gate = doc["gates"]
        .as_array()
        .unwrap()
        .iter()
        .find(|g| g["name"] == "causal_invertible")
        .unwrap();
    assert_eq!(gate["passed"], false);
}

#[test]
fn verify_simulated_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let mut args = vec!["simulate"];
    args.extend(with(&["--steps", "1000000", "--seed", "5", "--out"]));
    args.push(path.to_str().unwrap());
    assert_eq!(run(&args).status.code(), Some(0));
    let out = run(&["verify", "--series", path.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = stdout_json(&out);
    let mean = doc["gates"]
        .as_array()
        .unwrap()
        .iter()
        .find(|g| g["name"] == "mc_mean")
        .unwrap();
    assert_eq!(mean["passed"], true);
    assert_eq!(doc["steps"], 1_000_000);
}

#[test]
fn markov_tables() {
    let mut args = vec!["markov"];
    args.extend(with(&["--mgf", "0,0,0", "--mgf", "0.1,0.2,0.3"]));
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_schema("markov.schema.json", &doc);
    assert!((doc["conditionals"]["p1g00"].as_f64().unwrap() - 0.4).abs() < 1e-15);
    assert_eq!(doc["mgf"][0]["value"].as_f64(), Some(1.0));

    let out = run(&["markov", "--head", "0.2,0.3,0.1", "--r", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsupported order"));
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"head":[0.2,0.3],"r":0.6,"M":5,"hmax":2}"#).unwrap();
    let from_file = stdout_json(&run(&["factorize", "--config", cfg.to_str().unwrap()]));
    let mut args = vec!["factorize"];
    args.extend(with(&["--hmax", "2"]));
    let from_flags = stdout_json(&run(&args));
    assert_eq!(from_file, from_flags);

    std::fs::write(&cfg, r#"{"head":[0.2,0.3],"unknown":1}"#).unwrap();
    assert_eq!(
        run(&["factorize", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn thread_cap_keeps_output_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let path = dir.path().join(format!("t{threads}.csv"));
        let mut args = vec!["simulate"];
        args.extend(with(&["--steps", "1000", "--seed", "9", "--out"]));
        args.push(path.to_str().unwrap());
        let child = Command::new(BIN)
            .args(&args)
            .env("RENEWAL_ARMA_THREADS", threads)
            .output()
            .unwrap();
        assert!(child.status.success());
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let bad = Command::new(BIN)
        .args(["factorize", "--head", "0.5", "--r", "0.5"])
        .env("RENEWAL_ARMA_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
