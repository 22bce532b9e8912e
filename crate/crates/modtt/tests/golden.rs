//! Golden elaboration output: `--emit-core` text is byte-stable for every
//! good corpus file. Run with UPDATE_GOLDEN=1 to regenerate after an
//! intentional change.

use std::fs;
use std::path::{Path, PathBuf};

use modtt::{elaborate_source, emit_core};

fn corpus_good() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/good")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("golden")
}

#[test]
fn emit_core_is_byte_stable() {
    let mut files: Vec<PathBuf> = fs::read_dir(corpus_good())
        .unwrap()
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("mtt"))
        .collect();
    files.sort();
    let update = std::env::var("UPDATE_GOLDEN").is_ok();
    for file in files {
        let source = fs::read_to_string(&file).unwrap();
        let defs = elaborate_source(&source).unwrap();
        let emitted = emit_core(&defs);
        // Determinism across runs of the same build.
        let defs2 = elaborate_source(&source).unwrap();
        assert_eq!(emitted, emit_core(&defs2), "nondeterministic elaboration");

        let stem = file.file_stem().unwrap().to_str().unwrap();
        let golden_path = golden_dir().join(format!("{}.golden", stem));
        if update {
            fs::create_dir_all(golden_dir()).unwrap();
            fs::write(&golden_path, &emitted).unwrap();
        } else {
            let golden = fs::read_to_string(&golden_path).unwrap_or_else(|_| {
                panic!(
                    "missing golden file {}; run with UPDATE_GOLDEN=1",
                    golden_path.display()
                )
            });
            assert_eq!(
                emitted,
                golden,
                "stale golden output for {}",
                file.display()
            );
        }
    }
}
