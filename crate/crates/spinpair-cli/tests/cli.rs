use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn spinpair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinpair")).args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = spinpair(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn outputs(args: &[&str]) -> Value {
    ok_json(args)["outputs"].clone()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const BELL00: &str = r#"{"dim": 4, "re": [0.7071067811865476, 0, 0, 0.7071067811865476], "im": [0, 0, 0, 0]}"#;

#[test]
fn threshold_example() {
    let o = outputs(&["threshold", "--nu-e", "95e9", "--nucleus", "1H", "--transfer"]);
    assert!((num(&o["t_critical_kelvin"]) - 5.17).abs() < 0.01, "{o}");
    assert!((num(&o["field_tesla"]) - 3.39).abs() < 0.01);
}

#[test]
fn threshold_without_transfer_is_colder() {
    let o = outputs(&["threshold", "--nu-e", "95e9"]);
    assert!((num(&o["t_critical_kelvin"]) - 0.83).abs() < 0.01, "{o}");
}

#[test]
fn tppi_example() {
    let o = outputs(&["tppi", "--nu1", "1.0e6", "--nu2", "5.2e6", "--seq", "mw24,rf34", "--init", "3", "--detect", "mw24,rf34"]);
    assert_eq!(o["class"], "DIFFERENCE");
    assert!((num(&o["peak_hz"]) - 4.2e6).abs() <= num(&o["bin_hz"]), "{o}");
}

#[test]
fn tppi_rows() {
    for (init, rf, mw, class, peak) in [
        ("3", "rf34", "mw24", "DIFFERENCE", 4.2e6),
        ("1", "rf12", "mw24", "SUM", 6.2e6),
        ("3", "rf34", "mw13", "SUM", 6.2e6),
        ("1", "rf12", "mw13", "DIFFERENCE", 4.2e6),
    ] {
        let seq = format!("{mw},{rf}");
        let o = outputs(&["tppi", "--seq", &seq, "--init", init, "--detect", &seq]);
        assert_eq!(o["class"], class, "{seq} from {init}");
        assert!((num(&o["peak_hz"]) - peak).abs() <= num(&o["bin_hz"]));
        let d = outputs(&["tppi", "--seq", &seq, "--init", init, "--detect", &seq, "--dephase"]);
        assert_eq!(d["class"], "SINGLE_FREQUENCIES");
        assert!(d["peak_hz"].is_null());
    }
}

#[test]
fn entangle_bell_example() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bell00.json", BELL00);
    let o = outputs(&["entangle", "--state", s(&p)]);
    assert!((num(&o["concurrence"]) - 1.0).abs() < 1e-9);
    assert!((num(&o["negativity"]) - 0.5).abs() < 1e-9);
    assert_eq!(o["ppt"], false);
    assert!((num(&o["entropy_of_entanglement_bits"]) - 1.0).abs() < 1e-9);
}

#[test]
fn entangle_larger_cut() {
    // |Φ⁺⟩ on qubits (0,2) and (1,3): two ebits across the 4x4 cut
    let mut re = vec![0.0; 16];
    for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        re[(a << 3) | (b << 2) | (a << 1) | b] = 0.5;
    }
    let doc = serde_json::json!({"dim": 16, "re": re, "im": vec![0.0; 16]});
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "pairs.json", &doc.to_string());
    let o = outputs(&["entangle", "--state", s(&p), "--cut", "4x4"]);
    assert!((num(&o["negativity"]) - 1.5).abs() < 1e-9, "{o}");
    assert!((num(&o["log_negativity_bits"]) - 2.0).abs() < 1e-9);
    assert!(o["concurrence"].is_null());
    assert_eq!(o["entangled"], true);
}

#[test]
fn thermal_bell_circuit() {
    let cold = outputs(&["thermal", "--temperature", "2", "--nu-e", "95e9", "--transfer"]);
    assert_eq!(cold["bell_circuit"]["entangled"], true);
    assert!(num(&cold["margin"]) > 0.0);
    let warm = outputs(&["thermal", "--temperature", "10", "--nu-e", "95e9"]);
    assert_eq!(warm["bell_circuit"]["entangled"], false);
    assert!(num(&warm["margin"]) < 0.0);
}

#[test]
fn sdc_decodes_every_message() {
    for m in ["00", "01", "10", "11"] {
        let o = outputs(&["sdc", "--p-i", "1", "--p-s", "1", "--message", m]);
        assert_eq!(o["decoded_message"], m);
        assert!((num(&o["witness_f"]) + 0.5).abs() < 1e-9);
    }
    let mixed = outputs(&["sdc", "--p-i", "0.6", "--p-s", "0.6"]);
    assert_eq!(mixed["entangled"], false);
}

#[test]
fn witness_theorem_holds() {
    let o = outputs(&["witness-theorem", "--points", "21"]);
    assert_eq!(o["holds"], true);
    assert!(num(&o["max_residual"]) < 1e-10);
    assert_eq!(o["sign_flip"]["impossibility_confirmed"], true);
}

#[test]
fn lines_in_hz() {
    let o = outputs(&["lines", "--nu-e", "9.5e9", "--nu-n", "14.5e6", "--a", "3e6"]);
    let e: Vec<f64> = o["endor_lines_hz"].as_array().unwrap().iter().map(num).collect();
    assert!((e[0] - 13.0e6).abs() < 1.0 && (e[1] - 16.0e6).abs() < 1.0, "{e:?}");
    assert_eq!(o["endor_regime"], "NU_CENTERED");
}

#[test]
fn fit_relax_through_csv() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("t_s,signal\n");
    for k in 0..20 {
        let t = k as f64 * 0.5 / 19.0;
        csv += &format!("{t},{}\n", 3.0 * (-2.0 * t / 0.2f64).exp());
    }
    let input = write(&dir, "t2.csv", &csv);
    let out = dir.path().join("fit.csv");
    let o = outputs(&["fit-relax", "--input", s(&input), "--model", "t2", "--out", s(&out)]);
    assert!((num(&o["fit"]["time_constant"]) - 0.2).abs() < 1e-6, "{o}");
    let written = fs::read_to_string(out).unwrap();
    assert!(written.starts_with("t_s,observed,fitted\n"));
    assert_eq!(written.lines().count(), 21);
}

#[test]
fn fit_tensor_through_csv() {
    // diagonal g with g_x ≠ g_y ≠ g_z
    let g = [2.002, 2.005, 2.009f64];
    let mut csv = String::from("plane,angle_deg,value\n");
    for (plane, i, j) in [("xy", 0, 1), ("yz", 1, 2), ("zx", 2, 0)] {
        for a in (0..180).step_by(20) {
            let t = (a as f64).to_radians();
            let v = (g[i].powi(2) * t.cos().powi(2) + g[j].powi(2) * t.sin().powi(2)).sqrt();
            csv += &format!("{plane},{a},{v}\n");
        }
    }
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "ang.csv", &csv);
    let o = outputs(&["fit-tensor", "--input", s(&input)]);
    let pv: Vec<f64> = o["principal_values"].as_array().unwrap().iter().map(num).collect();
    for (got, want) in pv.iter().zip(g) {
        assert!((got - want).abs() < 1e-9, "{pv:?}");
    }
    assert_eq!(o["sign_unknown"], false);
    let a = outputs(&["fit-tensor", "--input", s(&input), "--quantity", "a"]);
    assert_eq!(a["sign_unknown"], true);
}

#[test]
fn pulses_cnot_table() {
    // MW π on ω₂₄ flips the electron only when the nucleus is |1⟩
    for (init, want) in [(1, 1), (2, 4), (3, 3), (4, 2)] {
        let o = outputs(&["pulses", "--init", &init.to_string(), "--seq", "mw24:pi:0"]);
        let p: Vec<f64> = o["populations"].as_array().unwrap().iter().map(num).collect();
        assert!((p[want - 1] - 1.0).abs() < 1e-12, "{init}: {p:?}");
        assert!(o["unitary"].is_object());
    }
    let d = outputs(&["pulses", "--init", "1", "--seq", "mw13:pi/2:90,dephase"]);
    assert!(d["unitary"].is_null());
}

#[test]
fn pulses_csv_trace() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("trace.csv");
    ok_json(&["pulses", "--epsilon", "0.3", "--pseudo-pure", "--seq", "mw13:pi:90", "--out", s(&out)]);
    let text = fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,label,p1,p2,p3,p4"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = spinpair(&["threshold", "--nu-e", "95e9", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn validation_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"dim": 4, "re": [1, 1, 0, 0], "im": [0, 0, 0, 0]}"#);
    let cases: Vec<Vec<&str>> = vec![
        vec!["threshold", "--nu-e", "-1"],
        vec!["thermal", "--temperature", "0", "--nu-e", "95e9"],
        vec!["sdc", "--p-i", "0.4", "--p-s", "0.9"],
        vec!["sdc", "--p-i", "0.9", "--p-s", "0.9", "--message", "2x"],
        vec!["tppi", "--seq", "mw24,rf34", "--init", "3", "--detect", "mw13,rf34"],
        vec!["tppi", "--seq", "mw24,rf34", "--init", "7", "--detect", "mw24,rf34"],
        vec!["lines", "--nu-e", "0", "--nu-n", "1e6", "--a", "1e6"],
        vec!["entangle", "--state", s(&bad)],
        vec!["entangle", "--state", "/nonexistent/state.json"],
        vec!["pulses", "--init", "1", "--seq", "mw14:pi:0"],
        vec!["fit-relax", "--input", "/nonexistent.csv", "--model", "t1"],
    ];
    for args in cases {
        let out = spinpair(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.starts_with("error:"), "{args:?}: {err}");
    }
}

#[test]
fn reruns_are_identical() {
    let dir = TempDir::new().unwrap();
    let runs = [
        vec!["sdc", "--p-i", "0.8", "--p-s", "0.7", "--n", "101", "--trials", "2000", "--seed", "7"],
        vec!["tppi", "--seq", "mw13,rf12", "--init", "1", "--detect", "mw13,rf12"],
        vec!["threshold", "--nu-e", "9.5e9"],
    ];
    for args in runs {
        assert_eq!(spinpair(&args).stdout, spinpair(&args).stdout, "{args:?}");
    }
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    ok_json(&["tppi", "--seq", "mw24,rf12", "--init", "1", "--detect", "mw24,rf12", "--out", s(&a)]);
    ok_json(&["tppi", "--seq", "mw24,rf12", "--init", "1", "--detect", "mw24,rf12", "--out", s(&b)]);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn seed_changes_monte_carlo() {
    let base = ["sdc", "--p-i", "0.55", "--p-s", "0.55", "--n", "51", "--trials", "4000"];
    let run = |seed: &str| {
        let mut args = base.to_vec();
        args.extend(["--seed", seed]);
        outputs(&args)["monte_carlo"]["error_rate_i"].clone()
    };
    assert_ne!(run("1"), run("2"));
    // a binomial majority of 51 draws at p = 0.55 errs about 23% of the time
    let rate = num(&run("1"));
    assert!((rate - 0.237).abs() < 0.03, "{rate}");
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    jsonschema::validator_for(&doc).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn outputs_match_published_schemas() {
    let dir = TempDir::new().unwrap();
    let bell = write(&dir, "bell.json", BELL00);
    let relax = write(&dir, "r.csv", "t_s,signal\n0,0\n1,0.63\n2,0.86\n3,0.95\n4,0.98\n5,0.99\n");
    let mut ang = String::from("plane,angle_deg,value\n");
    for p in ["xy", "yz", "zx"] {
        for a in [0, 45, 90, 135] {
            ang += &format!("{p},{a},{}\n", 2.0 + 0.001 * (a as f64 / 45.0));
        }
    }
    let ang = write(&dir, "a.csv", &ang);
    let runs: Vec<Vec<&str>> = vec![
        vec!["threshold", "--nu-e", "95e9", "--transfer"],
        vec!["threshold", "--nu-e", "95e9", "--nu-n", "1.44e8"],
        vec!["thermal", "--temperature", "3", "--nu-e", "95e9"],
        vec!["thermal", "--temperature", "3", "--nu-e", "95e9", "--transfer"],
        vec!["sdc", "--p-i", "0.9", "--p-s", "0.6", "--message", "11"],
        vec!["sdc", "--p-i", "0.5", "--p-s", "0.6", "--n", "11", "--trials", "10"],
        vec!["witness-theorem", "--points", "5", "--flip-points", "3"],
        vec!["tppi", "--seq", "mw24,rf34", "--init", "3", "--detect", "mw24,rf34"],
        vec!["tppi", "--seq", "mw24,rf34", "--init", "3", "--detect", "mw24,rf34", "--dephase"],
        vec!["lines", "--nu-e", "9.5e9", "--nu-n", "1e6", "--a", "-20e6"],
        vec!["fit-tensor", "--input", s(&ang), "--quantity", "a"],
        vec!["fit-relax", "--input", s(&relax), "--model", "t1"],
        vec!["entangle", "--state", s(&bell)],
        vec!["pulses", "--init", "1", "--seq", "mw13:pi/2:90,rf12:pi:0"],
        vec!["pulses", "--epsilon", "0.2", "--pseudo-pure", "--seq", "dephase"],
    ];
    for args in runs {
        let doc = ok_json(&args);
        assert_eq!(doc["subcommand"], args[0]);
        let v = schema(args[0]);
        let errors: Vec<String> = v.iter_errors(&doc).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
    }
}

#[test]
fn schemas_reject_malformed_records() {
    let mut doc = ok_json(&["tppi", "--seq", "mw24,rf34", "--init", "3", "--detect", "mw24,rf34"]);
    doc["outputs"]["class"] = Value::from("TRIANGLE");
    assert!(!schema("tppi").is_valid(&doc));
    let mut doc = ok_json(&["threshold", "--nu-e", "95e9"]);
    doc["outputs"].as_object_mut().unwrap().remove("t_critical_kelvin");
    assert!(!schema("threshold").is_valid(&doc));
}
