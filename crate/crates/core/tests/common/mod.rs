#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use planrec::generator::WorldModel;
use planrec::{parse_kb, KnowledgeBase, Transcript};

pub const TASKS: &[&str] = &[
    "remove-red-drive-1",
    "remove-red-drive-2",
    "replace-red-with-green-1",
    "replace-red-with-green-2",
    "replace-red-with-spare-1",
    "replace-red-with-spare-2",
    "swap-red-with-green-1",
    "swap-red-with-green-2",
    "toy-blocks-ai",
    "toy-blocks-il",
    "toy-blocks-um",
];

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn kb(name: &str) -> Arc<KnowledgeBase> {
    Arc::new(parse_kb(&read(name)).unwrap())
}

pub fn battery() -> Arc<KnowledgeBase> {
    kb("battery.kb")
}

pub fn battery_world() -> Arc<WorldModel> {
    Arc::new(WorldModel::parse(&read("battery.world")).unwrap())
}

pub fn task(name: &str) -> Transcript {
    Transcript::parse(&read(&format!("tasks/{name}.demo"))).unwrap()
}
