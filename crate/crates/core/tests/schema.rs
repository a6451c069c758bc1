use std::collections::BTreeSet;

use parcel_sim::experiments::ExperimentConfig;
use serde_json::Value;

fn schema() -> Value {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/config.schema.json"))
        .expect("schema present");
    serde_json::from_str(&text).expect("schema is JSON")
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

#[test]
fn schema_lists_every_config_field() {
    let s = schema();
    let config: Value = serde_json::from_str(&ExperimentConfig::default().to_json()).unwrap();
    assert_eq!(keys(&s["properties"]), keys(&config));
}

#[test]
fn schema_defaults_match_config_defaults() {
    let s = schema();
    let config: Value = serde_json::from_str(&ExperimentConfig::default().to_json()).unwrap();
    for (field, spec) in s["properties"].as_object().unwrap() {
        if let Some(d) = spec.get("default") {
            assert_eq!(d, &config[field], "default of `{field}`");
        }
    }
}

#[test]
fn schema_nested_objects_match() {
    let s = schema();
    let config: Value = serde_json::from_str(&ExperimentConfig::default().to_json()).unwrap();
    for field in ["occlusion", "noise"] {
        assert_eq!(keys(&s["properties"][field]["properties"]), keys(&config[field]), "{field}");
    }
    let drone = serde_json::to_value(parcel_sim::geometry::DroneSpec::big()).unwrap();
    assert_eq!(keys(&s["$defs"]["drone"]["properties"]), keys(&drone));
    let payload = serde_json::to_value(parcel_sim::geometry::PayloadSpec::none()).unwrap();
    assert_eq!(keys(&s["$defs"]["payload"]["properties"]), keys(&payload));
}
