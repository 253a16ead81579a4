use std::collections::BTreeSet;
use std::process::Command;

use serde_json::Value;

fn schema() -> Value {
    serde_json::from_str(include_str!("../schema/config.schema.json")).unwrap()
}

fn resolve<'a>(schema: &'a Value, node: &'a Value) -> &'a Value {
    match node["$ref"].as_str() {
        Some(r) => resolve(schema, &schema["$defs"][r.trim_start_matches("#/$defs/")]),
        None => node,
    }
}

fn effective_config(cmd: &str) -> Value {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.json");
    std::fs::write(&cfg, "{}").unwrap();
    let out = dir.path().join("report.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_pfaffnet"))
        .args([cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.code() == Some(0), "{cmd} rejected an empty config");
    let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    sidecar["config"].clone()
}

#[test]
fn schema_properties_match_the_default_configs() {
    let schema = schema();
    for cmd in ["format", "bound", "verify-chain", "zeros", "betti", "rankdrop"] {
        let node = resolve(&schema, &schema["$defs"][cmd]);
        assert_eq!(node["additionalProperties"], false, "{cmd}");
        let declared: BTreeSet<&str> = node["properties"]
            .as_object()
            .unwrap()
            .keys()
            .map(String::as_str)
            .collect();
        let config = effective_config(cmd);
        let actual: BTreeSet<&str> = config.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(declared, actual, "{cmd}");
        for (key, prop) in node["properties"].as_object().unwrap() {
            if let Some(default) = prop.get("default") {
                assert_eq!(default, &config[key], "{cmd}.{key}");
            }
        }
    }
}

#[test]
fn schema_lists_every_tagged_variant() {
    let schema = schema();
    let consts = |def: &str, tag: &str| -> BTreeSet<String> {
        schema["$defs"][def]["oneOf"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v["properties"][tag]["const"].as_str().unwrap().to_string())
            .collect()
    };
    let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    assert_eq!(
        consts("bound_request", "formula"),
        set(&["zero_bound", "betti_bound", "gv_bound", "rankdrop_bound", "network"])
    );
    assert_eq!(consts("betti_source", "kind"), set(&["fixture", "network"]));
    assert_eq!(consts("family", "kind"), set(&["fixture", "file", "random"]));
}
