#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use benchkeeper::config::Config;
use benchkeeper::provider::{Rule, ScriptedProvider};
use benchkeeper::suite;
use benchkeeper_core::BenchmarkSuite;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let dest = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &dest);
        } else {
            fs::copy(entry.path(), dest).unwrap();
        }
    }
}

/// A private copy of the fixture tree; returns the temp dir guard and its path.
pub fn fixture_copy() -> (tempfile::TempDir, PathBuf) {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("fx");
    copy_dir(&fixtures(), &root);
    (tmp, root)
}

pub fn config(root: &Path) -> Config {
    Config::load(&root.join("config.json")).unwrap()
}

pub fn load_suite(root: &Path) -> BenchmarkSuite {
    suite::load_suite(&root.join("suite")).unwrap()
}

pub fn rule(when: &[&str], reply: &str) -> Rule {
    Rule { when: when.iter().map(|s| s.to_string()).collect(), unless: vec![], capture: None, reply: reply.into() }
}

pub fn scripted(id: &str, rules: Vec<Rule>) -> ScriptedProvider {
    ScriptedProvider::from_rules(id, rules)
}
