//! Golden documents parse and re-serialize byte-identically.

use std::path::PathBuf;

use ctorus::docs::{check_canonical, oracle_to_text, parse_oracle, Document};

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("golden")
}

fn files(ext: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(golden_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    v.sort();
    v
}

#[test]
fn ctdata_goldens_are_canonical() {
    let fs = files("ctdata");
    assert!(fs.len() >= 6);
    for f in fs {
        let text = std::fs::read_to_string(&f).unwrap();
        let d = check_canonical(&text).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        assert_eq!(Document::parse(&text).unwrap(), d);
        assert_eq!(d.to_text(), text, "{}", f.display());
    }
}

#[test]
fn oracle_goldens_are_canonical() {
    let fs = files("oracle");
    assert!(fs.len() >= 4);
    for f in fs {
        let text = std::fs::read_to_string(&f).unwrap();
        let o = parse_oracle(&text).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        assert_eq!(oracle_to_text(&o), text, "{}", f.display());
    }
}
