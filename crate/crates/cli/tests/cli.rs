use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_conlab"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .env_remove("CONLAB_SEED")
        .args(args)
        .output()
        .unwrap_or_else(|e| panic!("failed to run conlab {args:?}: {e}"))
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

/// Temp dir holding every catalog entry's files.
fn workspace() -> TempDir {
    let dir = TempDir::new().expect("temp dir");
    for name in ["flat2", "sphere2", "hyperbolic2", "klein2", "flat-vn0", "cone-of-hyperbolic2"] {
        let out = run_in(dir.path(), &["catalog", "emit", name, "."]);
        assert!(out.status.success(), "emit {name} failed");
    }
    dir
}

fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/report.v1.json");
    serde_json::from_str(&std::fs::read_to_string(path).expect("schema file")).expect("schema is JSON")
}

/// Validates the subset of JSON Schema the report schema uses.
fn validate(value: &Value, schema: &Value, root: &Value, at: &str) -> Result<(), String> {
    if let Some(r) = schema.get("$ref").and_then(Value::as_str) {
        let name = r.strip_prefix("#/$defs/").ok_or_else(|| format!("unsupported ref {r}"))?;
        return validate(value, &root["$defs"][name], root, at);
    }
    if let Some(c) = schema.get("const") {
        if value != c {
            return Err(format!("{at}: expected {c}, got {value}"));
        }
    }
    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(value) {
            return Err(format!("{at}: {value} not in enum"));
        }
    }
    if let Some(t) = schema.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "boolean" => value.is_boolean(),
            "number" => value.is_number(),
            "integer" => value.is_u64() || value.is_i64(),
            other => return Err(format!("unsupported type {other}")),
        };
        if !ok {
            return Err(format!("{at}: expected {t}, got {value}"));
        }
    }
    if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
        if value.as_f64().is_some_and(|v| v < min) {
            return Err(format!("{at}: {value} below {min}"));
        }
    }
    if let Some(obj) = value.as_object() {
        let props = schema.get("properties").and_then(Value::as_object);
        for key in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            let key = key.as_str().expect("required keys are strings");
            if !obj.contains_key(key) {
                return Err(format!("{at}: missing `{key}`"));
            }
        }
        for (k, v) in obj {
            match props.and_then(|p| p.get(k)) {
                Some(s) => validate(v, s, root, &format!("{at}.{k}"))?,
                None if schema.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    return Err(format!("{at}: unexpected key `{k}`"))
                }
                None => {}
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), value.as_array()) {
        for (i, v) in arr.iter().enumerate() {
            validate(v, items, root, &format!("{at}[{i}]"))?;
        }
    }
    Ok(())
}

fn assert_valid(doc: &Value) {
    let s = schema();
    if let Err(e) = validate(doc, &s, &s, "$") {
        panic!("report violates schema: {e}\n{doc:#}");
    }
}

#[test]
fn catalog_list_names_every_entry() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["catalog", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_valid(&doc);
    let names: Vec<&str> = doc["details"]["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    for want in ["flat2", "sphere2", "hyperbolic2", "klein2", "flat-vn0", "cone-of-hyperbolic2"] {
        assert!(names.contains(&want), "missing {want} in {names:?}");
    }
}

#[test]
fn catalog_emit_writes_declared_files() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["catalog", "emit", "sphere2", "emitted"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    for f in doc["details"]["files"].as_array().unwrap() {
        let p = dir.path().join("emitted").join(f.as_str().unwrap());
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with('#'), "{} lacks its derivation comment", p.display());
    }
    let out = run_in(dir.path(), &["catalog", "emit", "no-such-entry", "x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn catalog_check_passes_for_every_entry() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["catalog", "check"]);
    let doc = json(&out);
    assert_valid(&doc);
    assert_eq!(out.status.code(), Some(0), "{doc:#}");
    assert!(doc["details"]["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn sphere_field_is_basic_special_with_negative_k() {
    let ws = workspace();
    let out = run_in(
        ws.path(),
        &["verify", "concircular", "--metric", "sphere2.metric", "--field", "sphere2.conc"],
    );
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_valid(&doc);
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["details"]["classification"], "basic, special, K=-1");
}

#[test]
fn flat_to_klein_geodesics_map_to_geodesics() {
    let ws = workspace();
    let out = run_in(
        ws.path(),
        &[
            "geodesic", "map-check", "--g", "flat2.metric", "--gbar", "klein2.metric", "--x0", "0.1", "0.1", "--v0",
            "1", "0.5",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_valid(&doc);
    assert!(doc["reports"][0]["max"].as_f64().unwrap() < 1e-8);
}

#[test]
fn failed_check_exits_one_and_still_reports() {
    let ws = workspace();
    let out = run_in(
        ws.path(),
        &["verify", "levicivita", "--g", "flat2.metric", "--gbar", "warped2.metric"],
    );
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_valid(&doc);
    assert_eq!(doc["pass"], false);
    assert!(doc["reports"][0]["max"].as_f64().unwrap() > 1e-2);
}

#[test]
fn usage_and_io_errors_exit_two() {
    let ws = workspace();
    let out = run_in(ws.path(), &["verify", "concircular", "--metric", "missing.metric", "--field", "sphere2.conc"]);
    assert_eq!(out.status.code(), Some(2));
    let doc = json(&out);
    assert_valid(&doc);
    assert_eq!(doc["error"]["kind"], "io");

    let out = run_in(ws.path(), &["verify", "concircular", "--metric", "sphere2.metric", "--field", "sphere2.sol"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run_in(ws.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let out = run_in(ws.path(), &["catalog", "list", "--tol", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn singular_metric_exits_three() {
    let ws = workspace();
    std::fs::write(
        ws.path().join("fold.metric"),
        "dim = 2\ncoord 0 = x\ncoord 1 = y\ndomain 0 = -1 1\ndomain 1 = -1 1\ng 0 0 = x\ng 1 1 = 1\n",
    )
    .unwrap();
    let out = run_in(
        ws.path(),
        &["verify", "concircular", "--metric", "fold.metric", "--field", "flat2.radial.conc", "--lattice", "3"],
    );
    assert_eq!(out.status.code(), Some(3));
    let doc = json(&out);
    assert_valid(&doc);
    assert_eq!(doc["error"]["kind"], "singular-metric");
}

#[test]
fn identical_invocations_give_identical_bytes() {
    let ws = workspace();
    let args = ["jordan", "check-axioms", "--metric", "sphere2.metric", "--element", "sphere2.sol", "--element", "sphere2-b.sol"];
    let a = run_in(ws.path(), &args);
    let b = run_in(ws.path(), &args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let c = run_in(ws.path(), &[&args[..], &["--seed", "7"]].concat());
    assert_ne!(a.stdout, c.stdout, "seed must change the sample points");
}

#[test]
fn seed_comes_from_the_environment() {
    let ws = workspace();
    let out = Command::new(bin())
        .current_dir(ws.path())
        .env("CONLAB_SEED", "99")
        .args(["verify", "sinyukov", "--metric", "sphere2.metric", "--field", "sphere2.sol"])
        .output()
        .unwrap();
    assert_eq!(json(&out)["details"]["grid"]["seed"], 99);
}

#[test]
fn per_equation_tolerance_override_applies() {
    let ws = workspace();
    let base = ["verify", "concircular", "--metric", "sphere2.metric", "--field", "sphere2.conc"];
    let out = run_in(ws.path(), &[&base[..], &["--tol-eq", "concircular=1e-30"]].concat());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["reports"][0]["tolerance"], 1e-30);
    // An override for another equation leaves this one alone.
    let out = run_in(ws.path(), &[&base[..], &["--tol-eq", "sinyukov=1e-30"]].concat());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn cone_build_then_lift_and_check() {
    let ws = workspace();
    let out = run_in(ws.path(), &["cone", "build", "--metric", "sphere2.metric", "--k", "-1", "--out", "cone/sphere.metric"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_valid(&json(&out));
    let side: Value = serde_json::from_str(&std::fs::read_to_string(ws.path().join("cone/sphere.json")).unwrap()).unwrap();
    assert_eq!(side["K"], -1.0);
    assert_eq!(side["base"], "../sphere2.metric");
    assert_eq!(side["x0_domain"], serde_json::json!([-0.5, 0.5]));

    let out = run_in(
        ws.path(),
        &["cone", "lift-field", "--cone", "cone/sphere.json", "--field", "sphere2.conc", "--out", "cone/f.cov"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["details"]["round_trip"]["max_ulps"].as_u64().unwrap() <= 1);
    let out = run_in(
        ws.path(),
        &["cone", "lift-solution", "--cone", "cone/sphere.json", "--field", "sphere2.sol", "--out", "cone/a.sol"],
    );
    assert_eq!(out.status.code(), Some(0));
    for f in ["cone/f.cov", "cone/a.sol"] {
        let out = run_in(ws.path(), &["cone", "check-parallel", "--cone", "cone/sphere.json", "--field", f]);
        assert_eq!(out.status.code(), Some(0), "{f} not parallel");
    }
    let out = run_in(ws.path(), &["cone", "check-convergent", "--cone", "cone/sphere.json"]);
    assert_eq!(out.status.code(), Some(0));

    // A field with the wrong K is refused before lifting.
    let out = run_in(
        ws.path(),
        &["cone", "lift-field", "--cone", "cone-of-hyperbolic2.json", "--field", "sphere2.conc"],
    );
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn product_file_passes_vnk() {
    let ws = workspace();
    let out = run_in(
        ws.path(),
        &["jordan", "multiply", "--metric", "sphere2.metric", "--left", "sphere2.sol", "--right", "sphere2-b.sol", "--out", "p.sol"],
    );
    assert_eq!(out.status.code(), Some(0));
    let out = run_in(ws.path(), &["verify", "vnk", "--metric", "sphere2.metric", "--field", "p.sol"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn jordan_isomorphism_and_ideal_pass_on_sphere() {
    let ws = workspace();
    let out = run_in(
        ws.path(),
        &["jordan", "check-isomorphism", "--metric", "sphere2.metric", "--element", "sphere2.sol", "--element", "sphere2-b.sol"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_valid(&json(&out));
    let out = run_in(
        ws.path(),
        &[
            "jordan", "check-ideal", "--metric", "sphere2.metric", "--generator", "sphere2.conc", "--generator",
            "sphere2-b.conc", "--generator", "sphere2-c.conc", "--element", "sphere2.reflect.sol",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_valid(&doc);
    assert_eq!(doc["details"]["generator_rank"], 6);
    assert_eq!(doc["details"]["coefficient_matrices"][0].as_array().unwrap().len(), 3);
}

#[test]
fn corollary_selects_e_and_sequence_detects_obstruction() {
    let ws = workspace();
    let out = run_in(ws.path(), &["verify", "corollary1", "--metric", "hyperbolic2.metric", "--field", "hyperbolic2.null.sol"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["details"]["e"], 0);

    let out = run_in(
        ws.path(),
        &["fields", "build-sequence", "--metric", "flat-vn0.metric", "--solution", "flat-vn0.sol", "--phi", "flat-vn0.phi"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["details"]["length"], 2);
    let out = run_in(
        ws.path(),
        &["fields", "build-sequence", "--metric", "flat-vn0.metric", "--solution", "flat-vn0.sol", "--phi", "flat-vn0.obstructed.phi"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["details"]["obstruction"]["index"], 1);
}

#[test]
fn geodesic_integrate_writes_tsv_rows() {
    let ws = workspace();
    let out = run_in(
        ws.path(),
        &["geodesic", "integrate", "--metric", "hyperbolic2.metric", "--x0", "1", "0", "--v0", "0.3", "-0.2", "--steps", "50", "--out", "t.tsv"],
    );
    assert_eq!(out.status.code(), Some(0));
    let tsv = std::fs::read_to_string(ws.path().join("t.tsv")).unwrap();
    let rows: Vec<&str> = tsv.lines().collect();
    assert_eq!(rows.len(), 51);
    assert!(rows.iter().all(|r| r.split('\t').count() == 5));
}

#[test]
fn transfer_reports_rho_at_point() {
    let ws = workspace();
    let out = run_in(
        ws.path(),
        &["fields", "transfer-rho", "--g", "flat2.metric", "--gbar", "klein2.metric", "--field", "flat2.const.conc", "--at", "0.1", "-0.2"],
    );
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_valid(&doc);
    assert!(doc["details"]["rho_bar"].as_f64().unwrap().is_finite());
}

#[test]
fn human_view_is_a_table() {
    let ws = workspace();
    let out = run_in(ws.path(), &["verify", "sinyukov", "--metric", "sphere2.metric", "--field", "sphere2.sol", "--human"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("verify sinyukov: PASS"));
    assert!(text.contains("equation"));
    assert!(serde_json::from_str::<Value>(&text).is_err());
}
