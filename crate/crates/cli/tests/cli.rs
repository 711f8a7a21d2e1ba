use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

use serde_json::Value;
use tempfile::TempDir;

fn srw(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_srw"))
        .args(args)
        .output()
        .expect("binary runs");
    let code = out.status.code().expect("exit code");
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, json)
}

fn dir() -> &'static Path {
    static DIR: OnceLock<TempDir> = OnceLock::new();
    DIR.get_or_init(|| TempDir::new().unwrap()).path()
}

fn write(name: &str, text: &str) -> PathBuf {
    let p = dir().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const CYCLE: &str = r#"{"alphabet": ["a", "b"], "window": 1, "rules": [[["a"], ["b"]]]}"#;

fn toy(name: &str, s: &str, t: &str, tp: &str, m: usize, c: Option<f64>) -> String {
    let tok = |x: &str| serde_json::to_string(&x.chars().map(String::from).collect::<Vec<_>>()).unwrap();
    let c = c.map(|c| format!(r#", "c": {c}"#)).unwrap_or_default();
    let text = format!(
        r#"{{"system": {CYCLE}, "s": {}, "t": {}, "t_prime": {}, "m": {m}{c}}}"#,
        tok(s),
        tok(t),
        tok(tp)
    );
    write(name, &text).display().to_string()
}

const H: &str = "qubits 1\nh 0\n";
const HH: &str = "qubits 1\nh 0\n---\nh 0\n";
const TOFFOLI: &str = "# controls 0, 1; target 2\nqubits 3\ntoffoli 0\n";

/// Compiles once per (circuit, input, mode) and caches the path.
fn compiled(name: &str, circuit: &str, input: &str, mode: &str) -> (PathBuf, PathBuf, Value) {
    let c = write(&format!("{name}.txt"), circuit);
    let out = dir().join(format!("{name}-{input}-{mode}.json"));
    let (code, json) = srw(&[
        "compile",
        "--circuit",
        c.to_str().unwrap(),
        "--input",
        input,
        "--m-mode",
        mode,
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{json}");
    (c, out, json)
}

fn h_instance() -> &'static (PathBuf, PathBuf, Value) {
    static H_MINIMAL: OnceLock<(PathBuf, PathBuf, Value)> = OnceLock::new();
    H_MINIMAL.get_or_init(|| compiled("h", H, "0", "minimal"))
}

#[test]
fn toy_cycle_delta_is_two() {
    let p = toy("cycle.json", "aa", "bb", "ab", 2, None);
    let (code, json) = srw(&["delta", "--instance", &p]);
    assert_eq!(code, 0);
    assert_eq!(json["schema"], "srw-result/1");
    assert_eq!(json["command"], "delta");
    assert_eq!(json["outputs"]["exact"], "2");
    assert_eq!(json["outputs"]["sign"], "positive");
}

#[test]
fn zero_delta_exits_four() {
    let p = toy("cycle-zero.json", "aa", "ab", "ba", 2, None);
    let (code, json) = srw(&["delta", "--instance", &p, "--exact"]);
    assert_eq!(code, 4);
    assert_eq!(json["outputs"]["exact"], "0");
}

#[test]
fn scaled_delta_and_sign_agreement() {
    let p = toy("cycle-scaled.json", "aa", "bb", "ab", 2, Some(2.0));
    let (code, json) = srw(&["delta", "--instance", &p, "--scaled"]);
    assert_eq!(code, 0);
    assert_eq!(json["outputs"]["scaled"], 0.5);
    for n in 0..8 {
        let n = n.to_string();
        let (a, _) = srw(&["delta", "--instance", &p, "--steps", &n]);
        let (b, _) = srw(&["delta", "--instance", &p, "--steps", &n, "--scaled"]);
        assert_eq!(a, b, "n = {n}");
    }
    let bare = toy("cycle-noscale.json", "aa", "bb", "ab", 2, None);
    assert_eq!(srw(&["delta", "--instance", &bare, "--scaled"]).0, 2);
    assert_eq!(srw(&["delta", "--instance", &bare, "--scaled", "--c", "2"]).1["outputs"]["scaled"], 0.5);
}

#[test]
fn budget_exhaustion_exits_three() {
    let p = toy("cycle-budget.json", "aa", "bb", "ab", 2, None);
    let (code, json) = srw(&["--vertex-budget", "2", "delta", "--instance", &p]);
    assert_eq!(code, 3);
    assert!(json["error"].as_str().unwrap().contains("budget"));
}

#[test]
fn parse_errors_exit_two() {
    let bad = write("bad.json", "{ not json");
    assert_eq!(srw(&["delta", "--instance", bad.to_str().unwrap()]).0, 2);
    assert_eq!(srw(&["delta", "--instance", "/nonexistent/x.json"]).0, 2);
    assert_eq!(srw(&["delta"]).0, 2);
    assert_eq!(srw(&["spectral", "--ell", "x", "--m", "1"]).0, 2);
    let circuit = write("bad.txt", "qubits 1\nhadamard 0\n");
    let out = dir().join("never.json");
    let args = ["compile", "--circuit", circuit.to_str().unwrap(), "--input", "0", "-o", out.to_str().unwrap()];
    assert_eq!(srw(&args).0, 2);
    let good = write("good.txt", H);
    let args = ["compile", "--circuit", good.to_str().unwrap(), "--input", "01x", "-o", out.to_str().unwrap()];
    assert_eq!(srw(&args).0, 2);
    assert!(!out.exists());
}

#[test]
fn unsupported_schema_version() {
    let (code, json) = srw(&["--schema-version", "2", "spectral", "--ell", "2", "--m", "1"]);
    assert_eq!(code, 2);
    assert!(json["error"].as_str().unwrap().contains("schema"));
}

#[test]
fn spectral_corner_example() {
    let (code, json) = srw(&["spectral", "--ell", "2", "--m", "1"]);
    assert_eq!(code, 0, "{json}");
    assert_eq!(json["outputs"]["corner_exact"], "1");
    assert!(json["outputs"]["deviation"].as_f64().unwrap() <= 1e-6);
    let (code, json) = srw(&["spectral", "--ell", "64", "--m", "2000"]);
    assert_eq!(code, 0, "{json}");
    assert_eq!(json["outputs"]["corner_exact"], "0");
    let (code, json) = srw(&["spectral", "--ell", "64", "--m", "1999"]);
    assert_eq!(code, 0, "{json}");
    assert_eq!(json["outputs"]["bounds"]["upper_holds"], true);
}

#[test]
fn compile_hadamard() {
    let (_, path, json) = h_instance();
    let out = &json["outputs"];
    assert_eq!(out["alphabet_size"], 224);
    assert_eq!(out["window"], 3);
    assert_eq!(out["ell"], 64);
    assert_eq!(out["d_parity"], 0);
    let inst: Value = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path).unwrap())).unwrap();
    assert_eq!(inst["system"]["alphabet"].as_array().unwrap().len(), 224);
    assert_eq!(inst["m"], out["m"]);
    assert!(inst["s"][0].as_str().unwrap().split('.').count() == 4);
}

#[test]
fn compile_is_deterministic() {
    let (c, first, _) = h_instance();
    let second = dir().join("h-again.json");
    let (code, _) = srw(&[
        "compile",
        "--circuit",
        c.to_str().unwrap(),
        "--input",
        "0",
        "--m-mode",
        "minimal",
        "-o",
        second.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let a = std::fs::read(first).unwrap();
    let b = std::fs::read(&second).unwrap();
    assert!(a == b, "outputs differ");
    std::fs::remove_file(second).unwrap();
}

#[test]
fn m_modes_are_ordered() {
    let c = write("h-modes.txt", H);
    let mut ms = Vec::new();
    for mode in ["sign_only", "minimal", "paper"] {
        let out = dir().join(format!("h-mode-{mode}.json"));
        let (code, json) = srw(&[
            "compile",
            "--circuit",
            c.to_str().unwrap(),
            "--input",
            "0",
            "--m-mode",
            mode,
            "-o",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        ms.push(json["outputs"]["m"].as_u64().unwrap());
        std::fs::remove_file(out).unwrap();
    }
    assert!(ms[0] <= ms[1] && ms[1] <= ms[2], "{ms:?}");
    assert_eq!(ms[2], 65 * 65 * 65);
}

#[test]
fn golden_circuits_verify() {
    let (c, inst, _) = h_instance();
    let (code, json) = srw(&["verify", "--instance", inst.to_str().unwrap(), "--circuit", c.to_str().unwrap(), "--input", "0"]);
    assert_eq!(code, 0, "{}", json["summary"]);
    assert_eq!(json["outputs"]["sigma"], -1);
    let names: Vec<&str> = json["outputs"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"parity_zeros"), "{names:?}");
    for (name, circuit, input) in [("hh", HH, "0"), ("toffoli", TOFFOLI, "110")] {
        let (c, inst, _) = compiled(name, circuit, input, "minimal");
        let (code, json) = srw(&["verify", "--instance", inst.to_str().unwrap(), "--circuit", c.to_str().unwrap(), "--input", input]);
        assert_eq!(code, 0, "{name}: {}", json["summary"]);
        std::fs::remove_file(inst).unwrap();
    }
}

#[test]
fn verify_rejects_mismatched_circuit() {
    let (_, inst, _) = h_instance();
    let other = write("other.txt", "qubits 2\nh 0\n");
    let (code, json) = srw(&["verify", "--instance", inst.to_str().unwrap(), "--circuit", other.to_str().unwrap(), "--input", "00"]);
    assert_eq!(code, 1);
    assert_eq!(json["passed"], false);
}

#[test]
fn estimate_is_reproducible_and_within_bound() {
    let (_, inst, _) = h_instance();
    let p = inst.to_str().unwrap();
    let args = ["estimate", "--instance", p, "--samples", "20000", "--seed", "11"];
    let (code, a) = srw(&args);
    assert!(code == 0 || code == 1 || code == 4);
    let (_, b) = srw(&args);
    let (_, single) = srw(&["--threads", "1", "estimate", "--instance", p, "--samples", "20000", "--seed", "11"]);
    let mean = |v: &Value, k: &str| v["outputs"]["sampled"][k].as_f64().unwrap().to_bits();
    for k in ["mean_plus", "mean_minus"] {
        assert_eq!(mean(&a, k), mean(&b, k));
        assert_eq!(mean(&a, k), mean(&single, k));
    }
    let out = &a["outputs"];
    let est = out["sampled"]["estimate"].as_f64().unwrap();
    let exact = out["exact"].as_f64().unwrap();
    let bound = out["sampled"]["bias_bound"].as_f64().unwrap() + out["sampled"]["half_width"].as_f64().unwrap();
    assert!((est - exact).abs() <= bound, "{est} vs {exact} ± {bound}");
    let (code, json) = srw(&["estimate", "--instance", p, "--samples", "100", "--theta", "1.5"]);
    assert_eq!(code, 2, "{json}");
}
