use std::path::PathBuf;
use std::sync::Arc;

use pgog::io::{emit_instance, emit_quotient, parse_instance, parse_quotient, IoError};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn read(name: &str) -> String {
    std::fs::read_to_string(dir().join(name)).unwrap()
}

#[test]
fn instance_fixtures_are_canonical() {
    for name in ["dihedral", "c2amalgam", "c3amalgam", "c4amalgam", "c3loop", "fictitious"] {
        let text = read(&format!("{name}.json"));
        let g = parse_instance(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(emit_instance(&g), text, "{name}");
    }
}

#[test]
fn quotient_fixtures_are_canonical() {
    for (inst, quot, index) in [
        ("c2amalgam", "c2q", 2),
        ("c3amalgam", "c3q", 3),
        ("c4amalgam", "c4q", 2),
        ("c3loop", "c3loopq", 3),
    ] {
        let g = Arc::new(parse_instance(&read(&format!("{inst}.json"))).unwrap());
        let text = read(&format!("{quot}.json"));
        let spec = parse_quotient(g, &text).unwrap_or_else(|e| panic!("{quot}: {e}"));
        assert_eq!(spec.index, index);
        assert_eq!(emit_quotient(&spec), text, "{quot}");
    }
}

#[test]
fn invalid_fixtures_are_rejected() {
    for name in ["noninjective", "wrongprime"] {
        let err = parse_instance(&read(&format!("{name}.json"))).unwrap_err();
        assert!(matches!(err, IoError::Invalid(_)), "{name}: {err}");
    }
}
