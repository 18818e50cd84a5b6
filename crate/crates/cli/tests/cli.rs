use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn poincare(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poincare"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env_remove("POINCARE_OUT_DIR")
        .env_remove("POINCARE_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

fn schema(name: &str) -> Value {
    read_json(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs").join(format!("{name}.schema.json")))
}

fn type_matches(expected: &str, v: &Value) -> bool {
    match expected {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "number" => v.is_number(),
        "integer" => v.is_i64() || v.is_u64(),
        other => panic!("unsupported schema type {other}"),
    }
}

/// Checks `type`, `required`, `properties` and `items`, the keywords the shipped schemas use.
fn validate(schema: &Value, v: &Value, path: &str) -> Result<(), String> {
    if let Some(t) = schema.get("type") {
        let ok = match t {
            Value::String(s) => type_matches(s, v),
            Value::Array(ts) => ts.iter().any(|t| type_matches(t.as_str().unwrap(), v)),
            _ => panic!("bad type keyword at {path}"),
        };
        if !ok {
            return Err(format!("{path}: expected {t}, found {v}"));
        }
    }
    if let (Some(req), Some(obj)) = (schema.get("required").and_then(Value::as_array), v.as_object()) {
        for key in req {
            let key = key.as_str().unwrap();
            if !obj.contains_key(key) {
                return Err(format!("{path}: missing `{key}`"));
            }
        }
    }
    if let (Some(props), Some(obj)) = (schema.get("properties").and_then(Value::as_object), v.as_object()) {
        for (key, sub) in props {
            if let Some(child) = obj.get(key) {
                validate(sub, child, &format!("{path}.{key}"))?;
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        for (i, child) in arr.iter().enumerate() {
            validate(items, child, &format!("{path}[{i}]"))?;
        }
    }
    Ok(())
}

fn assert_valid(name: &str, path: &Path) {
    let doc = read_json(path);
    if let Err(e) = validate(&schema(name), &doc, "$") {
        panic!("{} does not match {name}: {e}", path.display());
    }
}

fn assert_manifest(dir: &Path, command: &str, exit: i32) -> Value {
    let path = dir.join(format!("{command}.manifest.json"));
    assert_valid("manifest", &path);
    let m = read_json(&path);
    assert_eq!(m["command"], command);
    assert_eq!(m["exit_code"], exit);
    assert!(dir.join(format!("{command}.conf")).exists());
    m
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&poincare(dir.path(), &["--help"])), 0);
    assert_eq!(code(&poincare(dir.path(), &["--version"])), 0);
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(code(&poincare(out, &["no-such-command"])), 64);
    assert_eq!(code(&poincare(out, &["domains", "--rho", "0.9"])), 64);
    assert_eq!(code(&poincare(out, &["domains", "--set", "bogus=1"])), 64);
    assert_eq!(code(&poincare(out, &["domains", "--set", "rho"])), 64);
    assert_eq!(code(&poincare(out, &["certify-delta", "--period", "6", "--delta", "1.0"])), 64);
    let conf = out.join("bad.conf");
    std::fs::write(&conf, "period = 8\nrho 0.05\n").unwrap();
    let res = poincare(out, &["--config", conf.to_str().unwrap(), "domains"]);
    assert_eq!(code(&res), 64);
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 2"));
}

#[test]
fn flags_override_set_which_overrides_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let conf = out.join("run.conf");
    std::fs::write(&conf, "period = 6\nrho = 0.07\nseed = 5\n").unwrap();
    let c = conf.to_str().unwrap();
    assert_eq!(code(&poincare(out, &["--config", c, "--set", "rho=0.06", "domains", "--rho", "0.04"])), 0);
    let m = assert_manifest(out, "domains", 0);
    assert_eq!(m["config"]["rho"], 0.04);
    assert_eq!(m["config"]["period"], 6);
    assert_eq!(m["config"]["seed"], 5);

    assert_eq!(code(&poincare(out, &["--config", c, "--set", "rho=0.06", "domains"])), 0);
    assert_eq!(assert_manifest(out, "domains", 0)["config"]["rho"], 0.06);
    assert_eq!(code(&poincare(out, &["--config", c, "domains"])), 0);
    assert_eq!(assert_manifest(out, "domains", 0)["config"]["rho"], 0.07);
}

#[test]
fn out_dir_flag_beats_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (env_dir, flag_dir) = (dir.path().join("env"), dir.path().join("flag"));
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_poincare")).args(["cascade", "--n-max", "3"]).args(extra).env("POINCARE_OUT_DIR", &env_dir).output().unwrap()
    };
    assert_eq!(code(&run(&[])), 0);
    assert!(env_dir.join("cascade.json").exists());
    assert_eq!(code(&run(&["--out-dir", flag_dir.to_str().unwrap()])), 0);
    assert!(flag_dir.join("cascade.json").exists());
}

#[test]
fn find_param_and_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(code(&poincare(out, &["find-param", "--period", "3"])), 0);
    assert_valid("find-param", &out.join("find-param.json"));
    let c = read_json(&out.join("find-param.json"))["root"]["c"].as_f64().unwrap();
    assert!((c - 1.754_877_666).abs() < 1e-9);
    assert_eq!(code(&poincare(out, &["find-param", "--pattern", "+--"])), 0);
    assert_eq!(code(&poincare(out, &["find-param", "--pattern", "+x"])), 64);

    assert_eq!(code(&poincare(out, &["fixed-point", "--period", "2", "--degree", "16"])), 0);
    assert_valid("fixed-point", &out.join("fixed-point.json"));
    let fp = read_json(&out.join("fixed-point.json"));
    assert!((fp["lambda"].as_f64().unwrap() + 0.3995).abs() < 1e-3);
    assert_manifest(out, "fixed-point", 0);
}

#[test]
fn domains_series_and_cascade() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(code(&poincare(out, &["domains", "--period", "6"])), 0);
    assert_valid("domain-summary", &out.join("domains.json"));
    assert_eq!(code(&poincare(out, &["domains", "--period", "2"])), 64);

    assert_eq!(code(&poincare(out, &["series", "--period", "6", "--family", "A'<-[U\\V']-+A'", "--depth", "8", "--delta", "1.8"])), 0);
    assert_valid("series-bound", &out.join("series.json"));
    assert!(std::fs::read_to_string(out.join("series-levels.csv")).unwrap().starts_with("depth,count,sum"));
    assert_eq!(code(&poincare(out, &["series", "--period", "6", "--family", "A'<-[Q]-A'"])), 64);

    assert_eq!(code(&poincare(out, &["cascade", "--n-max", "6"])), 0);
    assert_valid("cascade-estimate", &out.join("cascade.json"));
    assert_manifest(out, "cascade", 0);
}

#[test]
fn certify_delta_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(code(&poincare(out, &["certify-delta", "--period", "6", "--delta", "1.9"])), 0);
    assert_valid("delta-certificate", &out.join("certify-delta.json"));
    assert_eq!(read_json(&out.join("certify-delta.json"))["status"], "CERTIFIED");
    assert!(out.join("certify-delta.txt").exists());
    assert_manifest(out, "certify-delta", 0);

    assert_eq!(code(&poincare(out, &["certify-delta", "--period", "6", "--delta-range", "1.5,2.0", "--tol", "0.1"])), 0);
    assert_valid("delta-bisection", &out.join("certify-delta.json"));

    assert_eq!(code(&poincare(out, &["certify-delta", "--period", "6", "--delta-range", "1.0,1.01"])), 2);
    assert_eq!(read_json(&out.join("certify-delta.json"))["status"], "NONE");
    assert_manifest(out, "certify-delta", 2);
}

#[test]
fn certify_area_writes_both_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(code(&poincare(out, &["certify-area", "--period", "8", "--mc-samples", "2000", "--seed", "3"])), 0);
    assert_valid("area-certificate", &out.join("certify-area.json"));
    assert_valid("escape-fraction", &out.join("escape-fraction.json"));
    let m = assert_manifest(out, "certify-area", 0);
    let artifacts: Vec<&str> = m["artifacts"].as_array().unwrap().iter().map(|a| a.as_str().unwrap()).collect();
    for name in ["certify-area.conf", "certify-area.json", "escape-fraction.json", "escape-fraction.csv", "certify-area.txt"] {
        assert!(artifacts.contains(&name), "{name}");
    }
}

#[test]
fn dimension_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(code(&poincare(out, &["dimension", "--c", "0", "--resolutions", "32,64,128,256", "--max-iter", "200"])), 0);
    assert_valid("dimension-estimate", &out.join("dimension.json"));
    assert_eq!(code(&poincare(out, &["dimension", "--c", "0", "--resolutions", "64,32"])), 64);

    assert_eq!(code(&poincare(out, &["render", "--c", "-1", "--width", "40", "--height", "30", "--max-iter", "50"])), 0);
    let ppm = std::fs::read(out.join("render.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n40 30\n255\n"));
    assert_eq!(ppm.len(), b"P6\n40 30\n255\n".len() + 40 * 30 * 3);
    assert_eq!(code(&poincare(out, &["render", "--c", "0", "--format", "gif"])), 64);
}

#[test]
fn lemma_checks_report_failures_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let res = poincare(out, &["lemma-checks", "--period", "12"]);
    let expected = if read_json(&out.join("lemma-checks.json"))["pass"] == true { 0 } else { 2 };
    assert_eq!(code(&res), expected);
    assert_valid("lemma-checks", &out.join("lemma-checks.json"));
    assert!(std::fs::read_to_string(out.join("lemma-class.csv")).unwrap().starts_with("p,"));
    assert_manifest(out, "lemma-checks", expected);
}
