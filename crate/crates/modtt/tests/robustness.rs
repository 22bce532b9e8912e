//! The pipeline reports malformed input as errors, never panics: every
//! prefix and a few mutations of every corpus file either elaborate or
//! produce a diagnostic.

use std::fs;
use std::path::{Path, PathBuf};

use modtt::elaborate_source;

fn corpus_files() -> Vec<PathBuf> {
    let mut out = Vec::new();
    for sub in ["good", "bad"] {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../corpus")
            .join(sub);
        for entry in fs::read_dir(dir).unwrap().filter_map(Result::ok) {
            let p = entry.path();
            if p.extension().and_then(|e| e.to_str()) == Some("mtt") {
                out.push(p);
            }
        }
    }
    out
}

#[test]
fn prefixes_never_panic() {
    for file in corpus_files() {
        let source = fs::read_to_string(&file).unwrap();
        let mut cut = 0;
        while cut <= source.len() {
            if source.is_char_boundary(cut) {
                let _ = elaborate_source(&source[..cut]);
            }
            cut += 7;
        }
        let _ = elaborate_source(&source);
    }
}

#[test]
fn token_deletions_never_panic() {
    for file in corpus_files() {
        let source = fs::read_to_string(&file).unwrap();
        let words: Vec<&str> = source.split_whitespace().collect();
        for skip in 0..words.len().min(120) {
            let mutated: Vec<&str> = words
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, w)| *w)
                .collect();
            let _ = elaborate_source(&mutated.join(" "));
        }
    }
}
