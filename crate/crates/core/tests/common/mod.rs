#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use mra_core::flop::{parse_flop_config, FlopConfig};
use mra_core::model::{load_record_lenient, parse_record, FanoRecord};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn bytes(rel: &str) -> Vec<u8> {
    let p = data_dir().join(rel);
    std::fs::read(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn record(rel: &str) -> FanoRecord {
    parse_record(&bytes(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn lenient(rel: &str) -> FanoRecord {
    load_record_lenient(&bytes(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn flop(rel: &str) -> FlopConfig {
    parse_flop_config(&bytes(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn json_files(sub: &str) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(data_dir().join(sub))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".json"))
        .map(|n| format!("{sub}/{n}"))
        .collect();
    v.sort();
    v
}
