//! The template gallery file, the malformed-input corpus and the golden diagrams.

mod common;

use std::fs;

use common::{check_golden, data_dir, expected_pos, gallery, gallery_space, golden_diagrams};
use tapkit_core::tapdsl::parser::parse;
use tapkit_core::tapdsl::print::print_file;
use tapkit_core::{Causality, Error};

#[test]
fn gallery_file_is_the_printed_gallery() {
    let text = print_file(&gallery_space(), &gallery());
    check_golden("data/gallery.tap", &text).unwrap();
}

#[test]
fn gallery_file_reparses_to_templates() {
    let text = fs::read_to_string(data_dir().join("data/gallery.tap")).unwrap();
    let file = parse(&text).unwrap();
    assert_eq!(file.space.as_deref(), Some(&*gallery_space()));
    assert_eq!(file.tappings, gallery());
}

#[test]
fn gallery_classes() {
    for t in gallery() {
        let expected = if t.name().starts_with("multi_step") { Causality::Buffered } else { Causality::Causal };
        assert_eq!(t.validate().class, expected, "{}", t.name());
    }
}

#[test]
fn malformed_corpus_errors_are_positioned() {
    let mut entries: Vec<_> = fs::read_dir(data_dir().join("data/malformed")).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    assert!(entries.len() >= 10);
    for path in entries {
        let text = fs::read_to_string(&path).unwrap();
        let (line, col) = expected_pos(&text);
        match parse(&text) {
            Err(Error::Parse { pos, msg }) => {
                assert_eq!((pos.line, pos.col), (line, col), "{}: {msg}", path.display());
            }
            other => panic!("{}: expected a parse error, got {other:?}", path.display()),
        }
    }
}

#[test]
fn golden_dot_output() {
    for (file, dot) in golden_diagrams() {
        check_golden(file, &dot).unwrap();
    }
}
