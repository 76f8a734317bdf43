use std::path::{Path, PathBuf};
use std::process::Command;

use biasview_core::config::PipelineConfig;
use biasview_gateway::StudyConfig;
use serde_json::Value;

fn biasview(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_biasview")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn shipped_configs_load() {
    let study = StudyConfig::load(&repo().join("config/study.toml")).unwrap();
    study.validate().unwrap();
    let pipeline = PipelineConfig::load(&repo().join("config/pipeline.toml")).unwrap();
    assert_eq!(pipeline, PipelineConfig::default());
    assert_eq!(study.pipeline_config().unwrap(), pipeline);
}

#[test]
fn generate_ingest_analyze_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("gen");
    let printed = biasview(&[
        "generate", "--out", gen.to_str().unwrap(), "--hotel-id", "h1", "--mean", "3.2", "--spread", "2.0",
        "--gain", "8", "--base-rate", "0.1", "--population", "4000", "--seed", "3",
    ]);
    assert!(printed.starts_with("h1"));
    let manifest = read_json(&gen.join("manifest.json"));
    assert_eq!(manifest["hotels"][0]["hotel_id"], "h1");

    let ingested = dir.path().join("ingested");
    biasview(&["ingest", "--input", gen.join("reviews.jsonl").to_str().unwrap(), "--out", ingested.to_str().unwrap()]);
    assert_eq!(
        std::fs::read_to_string(gen.join("reviews.jsonl")).unwrap(),
        std::fs::read_to_string(ingested.join("reviews.jsonl")).unwrap()
    );

    let first = dir.path().join("a.json");
    let second = dir.path().join("b.json");
    for out in [&first, &second] {
        biasview(&["analyze", "--corpus", gen.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    }
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
    let bundle = read_json(&first);
    assert_eq!(bundle["bundle_version"], "analysis-bundle/1");
    assert_eq!(bundle["hotels"][0]["histogram"], manifest["hotels"][0]["reported_histogram"]);
}

#[test]
fn study_preset_matches_bundled_corpus() {
    let dir = tempfile::tempdir().unwrap();
    biasview(&["generate", "--preset", "study", "--seed", "2020", "--out", dir.path().to_str().unwrap()]);
    let bundled = repo().join("crates/core/data/study");
    for name in ["reviews.jsonl", "hotels.jsonl", "manifest.json"] {
        assert_eq!(
            std::fs::read(dir.path().join(name)).unwrap(),
            std::fs::read(bundled.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn stats_reports_on_telemetry() {
    let dir = tempfile::tempdir().unwrap();
    let logs = dir.path().join("logs");
    std::fs::create_dir(&logs).unwrap();
    let started = |id: &str, condition: &str| {
        format!(
            r#"{{"record":"started","session_id":"{id}","condition":"{condition}","t_ms":0,"hotel_order":["hotel-01"]}}"#
        )
    };
    let events: Vec<String> = (0..102)
        .map(|i| format!(r#"{{"t_ms":{i},"kind":"CLICK","rating":{},"widget":"bar"}}"#, i % 5 + 1))
        .collect();
    for (i, condition) in ["BASELINE", "BIAS_AWARE", "BASELINE", "BIAS_AWARE"].iter().enumerate() {
        let id = format!("s{i}");
        let answer = if *condition == "BASELINE" { 4 } else { 2 };
        let items: Vec<String> = (1..=if *condition == "BASELINE" { 8 } else { 12 })
            .map(|q| format!(r#""Q{q}":{answer}"#))
            .collect();
        let lines = [
            started(&id, condition),
            format!(r#"{{"record":"events","seq":0,"events":[{}]}}"#, events.join(",")),
            format!(r#"{{"record":"questionnaire","t_ms":600000,"answers":{{{}}}}}"#, items.join(",")),
            r#"{"record":"ended","t_ms":600000}"#.to_string(),
        ];
        std::fs::write(logs.join(format!("{id}.jsonl")), lines.join("\n") + "\n").unwrap();
    }
    let out = dir.path().join("report.json");
    biasview(&["stats", "--logs", logs.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let report = read_json(&out);
    assert_eq!(report["excluded_sessions"], serde_json::json!([]));
    assert_eq!(report["questions"].as_array().unwrap().len(), 12);
}
