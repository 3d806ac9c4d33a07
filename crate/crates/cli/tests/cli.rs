//! End-to-end tests of the `orbiflow` binary: command semantics, output
//! formats against the published schemas, and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_orbiflow"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn orbiflow")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("orbiflow-test-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

// ---------------------------------------------------------------------------
// Minimal JSON-schema checker (type / required / properties / items / enum).
// ---------------------------------------------------------------------------

fn type_matches(ty: &str, v: &serde_json::Value) -> bool {
    match ty {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "integer" => v.is_i64() || v.is_u64(),
        "number" => v.is_number(),
        _ => false,
    }
}

fn validate(schema: &serde_json::Value, value: &serde_json::Value, path: &str) -> Result<(), String> {
    if let Some(ty) = schema.get("type") {
        let ok = match ty {
            serde_json::Value::String(s) => type_matches(s, value),
            serde_json::Value::Array(list) => list
                .iter()
                .any(|t| t.as_str().map(|s| type_matches(s, value)).unwrap_or(false)),
            _ => false,
        };
        if !ok {
            return Err(format!("{path}: type mismatch ({ty} vs {value})"));
        }
    }
    if let Some(allowed) = schema.get("enum").and_then(|e| e.as_array()) {
        if !allowed.contains(value) {
            return Err(format!("{path}: {value} not in enum"));
        }
    }
    if let Some(req) = schema.get("required").and_then(|r| r.as_array()) {
        for key in req {
            let key = key.as_str().unwrap();
            if value.get(key).is_none() {
                return Err(format!("{path}: missing required `{key}`"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(|p| p.as_object()) {
        if let Some(obj) = value.as_object() {
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    validate(sub, v, &format!("{path}.{key}"))?;
                }
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, v) in arr.iter().enumerate() {
                validate(items, v, &format!("{path}[{i}]"))?;
            }
        }
    }
    Ok(())
}

fn check_schema(schema_file: &str, json_text: &str) {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(schema_file);
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&root).unwrap()).unwrap();
    let value: serde_json::Value = serde_json::from_str(json_text).unwrap();
    validate(&schema, &value, "$").unwrap_or_else(|e| panic!("{schema_file}: {e}"));
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

#[test]
fn classify_builtin_models() {
    let o = run(&["classify", "--model", "spherical"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "spherical  eigs: 1,1,1  verdict: StrictlyUnstable\n");
    let o = run(&["classify", "--model", "hyperbolic"]);
    assert!(stdout(&o).contains("StrictlyStable"));
    let o = run(&["classify", "--model", "flat"]);
    assert!(stdout(&o).contains("Marginal"));
    let o = run(&["classify", "--model", "no-such-model"]);
    assert!(!o.status.success());
}

#[test]
fn classify_all_builtin_agrees_with_table() {
    let o = run(&["classify", "--all-builtin"]);
    assert!(o.status.success(), "registry disagrees with the expected table");
    assert!(!stdout(&o).contains("MISMATCH"));
    assert_eq!(stdout(&o).lines().count(), 10);
}

#[test]
fn classify_from_file() {
    let dir = tmpdir("classify");
    let path = dir.join("point.json");
    std::fs::write(
        &path,
        r#"{"lambda": 0.5, "scal": 0.0, "rplus": [[0,0,0],[0,0,0],[0,0,0]]}"#,
    )
    .unwrap();
    let o = run(&["classify", "--file", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("StrictlyUnstable"));
}

// ---------------------------------------------------------------------------
// flow
// ---------------------------------------------------------------------------

#[test]
fn flow_exact_sphere_rates() {
    let o = run(&[
        "flow", "--rplus", "1,1,1", "--zeta0", "1,0,0", "--t0", "-10", "--t1", "0", "--steps",
        "20",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,zeta_x,zeta_y,zeta_z,eps0,delta");
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let (t, zx) = (cols[0], cols[1]);
        let znorm = (cols[1] * cols[1] + cols[2] * cols[2] + cols[3] * cols[3]).sqrt();
        assert!((znorm - (2.0 * t).exp()).abs() < 1e-10 * (2.0 * t).exp().max(1e-300));
        assert!(zx >= 0.0);
    }
}

#[test]
fn flow_immortal_decreasing() {
    let o = run(&[
        "flow", "--immortal", "--rplus", "-1,-1,-1", "--zeta0", "2,0,1", "--t0", "0", "--t1",
        "5", "--steps", "10",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut prev = f64::INFINITY;
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let n = (cols[1] * cols[1] + cols[2] * cols[2] + cols[3] * cols[3]).sqrt();
        assert!(n < prev);
        prev = n;
    }
}

#[test]
fn flow_with_eta_file_and_sidecar() {
    let dir = tmpdir("flow-eta");
    let eta_path = dir.join("eta.csv");
    // Admissible η with envelope e^{2.6t}: |η| = 0.5·e^{2.6t}.
    let mut eta = String::from("t,eta_x,eta_y,eta_z\n");
    for k in 0..=200 {
        let t = -6.0 + 6.0 * k as f64 / 200.0;
        let v = 0.5 * (2.6 * t).exp();
        eta.push_str(&format!("{t},{v},0,0\n"));
    }
    std::fs::write(&eta_path, eta).unwrap();
    let out = dir.join("path.csv");
    let sidecar = dir.join("sandwich.json");
    let o = run(&[
        "flow",
        "--rplus",
        "1,1,1",
        "--zeta0",
        "4,0,0",
        "--t0",
        "-5",
        "--t1",
        "0",
        "--steps",
        "40",
        "--eta-file",
        eta_path.to_str().unwrap(),
        "--eta0",
        "2.6",
        "--eta-bound",
        "1.0",
        "--out",
        out.to_str().unwrap(),
        "--sidecar",
        sidecar.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let side = std::fs::read_to_string(&sidecar).unwrap();
    check_schema("flow-sidecar.schema.json", &side);
    let v: serde_json::Value = serde_json::from_str(&side).unwrap();
    assert_eq!(v["within_sandwich"], serde_json::Value::Bool(true));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("t,zeta_x,zeta_y,zeta_z,eps0,delta\n"));
    assert_eq!(csv.lines().count(), 42);
}

#[test]
fn flow_output_deterministic() {
    let dir = tmpdir("flow-det");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    for p in [&a, &b] {
        let o = run(&[
            "flow", "--rplus", "1,2,3,0.1,0,0.2", "--zeta0", "1,1,1", "--t0", "-4", "--t1",
            "0", "--steps", "64", "--out", p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

// ---------------------------------------------------------------------------
// topology
// ---------------------------------------------------------------------------

fn topology_of(desc: &str, name: &str) -> serde_json::Value {
    let dir = tmpdir("topology");
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, desc).unwrap();
    check_schema("orbifold-descriptor.schema.json", desc);
    let o = run(&["topology", "--orbifold", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    check_schema("topology-result.schema.json", &text);
    serde_json::from_str(&text).unwrap()
}

#[test]
fn topology_paper_cases() {
    // Suspension, both anti-selfdual gluings.
    let v = topology_of(
        r#"{"chi_orb":2,"sigma_orb":0,"singularities":[
            {"type":"A","k":1,"orientation":"+"},{"type":"A","k":1,"orientation":"+"}]}"#,
        "susp",
    );
    assert_eq!(v["chi"], 4);
    assert_eq!(v["sigma"], -2);
    assert_eq!(v["b_plus"], 0);
    assert_eq!(v["b_minus"], 2);

    // Doubling across E8: b± = 8, σ = 0.
    let v = topology_of(
        r#"{"chi_orb":2,"sigma_orb":0,"singularities":[
            {"type":"E8","orientation":"+"},{"type":"E8","orientation":"-"}]}"#,
        "e8",
    );
    assert_eq!(v["b_plus"], 8);
    assert_eq!(v["b_minus"], 8);
    assert_eq!(v["sigma"], 0);

    // Davis quotient with a balanced orientation split.
    let mut sing = Vec::new();
    for k in 0..122 {
        let o = if k < 61 { "+" } else { "-" };
        sing.push(format!(r#"{{"type":"A","k":1,"orientation":"{o}"}}"#));
    }
    let desc = format!(
        r#"{{"chi_orb":74,"sigma_orb":0,"singularities":[{}]}}"#,
        sing.join(",")
    );
    let v = topology_of(&desc, "davis");
    assert_eq!(v["chi"], 196);
    assert_eq!(v["sigma"], 0);
    assert_eq!(v["b_plus"], 97);
    assert_eq!(v["b_minus"], 97);
}

// ---------------------------------------------------------------------------
// convert-time
// ---------------------------------------------------------------------------

#[test]
fn convert_time_values() {
    let o = run(&["convert-time", "--lambda", "3", "--tbar", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    check_schema("convert-time.schema.json", &text);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!((v["that"].as_f64().unwrap() + 1.0 / 6.0).abs() < 1e-15);

    let o = run(&["convert-time", "--lambda", "-3", "--that", "1", "--rplus", "-1,-1,-1"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["metric_scale"].as_f64().unwrap() - 6.0).abs() < 1e-10);
    let zh = v["zeta_hat"][0].as_f64().unwrap();
    assert!((zh - 6.0f64.powf(2.0 / 3.0)).abs() < 1e-10);

    // Round trip through t̂ and back.
    let o = run(&["convert-time", "--lambda", "3", "--tbar", "-1.7"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let that = v["that"].as_f64().unwrap();
    let o = run(&["convert-time", "--lambda", "3", "--that", &format!("{that}")]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["tbar"].as_f64().unwrap() + 1.7).abs() < 1e-12);

    let o = run(&["convert-time", "--lambda", "0", "--tbar", "1"]);
    assert!(!o.status.success());
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[test]
fn verify_eh_suite_passes() {
    let o = run(&["verify", "--suite", "eh", "--seed", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("L² norms 2π²|ζ|²"));
    assert!(text.contains("pointwise norm 2ε⁴/(ε⁴+r⁴)"));
    assert!(text.contains("0 failures"));
}

#[test]
fn verify_flow_suite_has_sandwich_trials() {
    let o = run(&["verify", "--suite", "flow", "--seed", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("Duhamel sandwich trials"));
}

#[test]
fn verify_logs_byte_identical() {
    let a = run(&["verify", "--suite", "all", "--seed", "7"]);
    let b = run(&["verify", "--suite", "all", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_rejects_unknown_suite() {
    let o = run(&["verify", "--suite", "nonsense"]);
    assert!(!o.status.success());
}

// ---------------------------------------------------------------------------
// glue-scan
// ---------------------------------------------------------------------------

#[test]
fn glue_scan_outputs_and_schema() {
    let dir = tmpdir("glue");
    let prefix = dir.join("scan");
    let o = bin()
        .args([
            "glue-scan",
            "--orbifold",
            "spherical",
            "--delta-exp",
            "0.6",
            "--eps-list",
            "0.125,0.0744,0.0442,0.0263,0.015625",
            "--grid-n",
            "600",
            "--out-prefix",
            prefix.to_str().unwrap(),
        ])
        .env("ORBIFLOW_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary_path = format!("{}-summary.json", prefix.display());
    let text = std::fs::read_to_string(&summary_path).unwrap();
    check_schema("glue-summary.schema.json", &text);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["fits_valid"], serde_json::Value::Bool(true));
    assert!(v["rm_ratio"].as_f64().unwrap() <= 3.0);
    for key in [
        "rm_ratio_le_3",
        "scal_slope_ge_03",
        "wplus_slope_ge_03",
        "gram_diag_within_10pct",
        "gram_offdiag_decays",
        "gram_g_c_orthogonal",
    ] {
        assert_eq!(v["pass"][key], serde_json::Value::Bool(true), "{key}");
    }
    for k in 0..5 {
        let tsv = std::fs::read_to_string(format!("{}-eps{k}.tsv", prefix.display())).unwrap();
        assert!(tsv.starts_with("r\trm\tric_dev\tscal_dev\twplus\n"));
        assert!(tsv.lines().count() > 500);
    }
}

#[test]
fn glue_scan_rejects_bad_exponent() {
    let o = run(&["glue-scan", "--delta-exp", "0.7", "--eps-list", "0.05"]);
    assert!(!o.status.success());
}

// ---------------------------------------------------------------------------
// config file
// ---------------------------------------------------------------------------

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tmpdir("config");
    let cfg = dir.join("orbiflow.toml");
    std::fs::write(
        &cfg,
        "[flow]\nrplus = \"1,1,1\"\nzeta0 = \"2,0,0\"\nt0 = -2.0\nt1 = 0.0\nsteps = 4\n\n[classify]\nmodel = \"hyperbolic\"\n",
    )
    .unwrap();
    // Flow takes everything from the config.
    let o = run(&["--config", cfg.to_str().unwrap(), "flow"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 6);
    let first = text.lines().nth(1).unwrap();
    assert!(first.starts_with("-2,"));
    // Classify from config, then overridden on the command line.
    let o = run(&["--config", cfg.to_str().unwrap(), "classify"]);
    assert!(stdout(&o).contains("hyperbolic"));
    let o = run(&["--config", cfg.to_str().unwrap(), "classify", "--model", "spherical"]);
    assert!(stdout(&o).contains("spherical"));
}
