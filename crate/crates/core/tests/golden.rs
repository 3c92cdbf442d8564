//! Compiled output of the corpus pinned against checked-in goldens.
//! Regenerate with `UPDATE_GOLDEN=1 cargo test --test golden`.

mod common;

use std::path::PathBuf;

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.txt"))
}

fn check(name: &str) {
    let actual = common::render_golden(&common::corpus(name));
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{name} differs from its golden");
}

#[test]
fn example4() {
    check("example4");
}

#[test]
fn example5() {
    check("example5");
}

#[test]
fn example6() {
    check("example6");
}

#[test]
fn example7() {
    check("example7");
}

#[test]
fn example7b() {
    check("example7b");
}

#[test]
fn example8() {
    check("example8");
}

#[test]
fn example9() {
    check("example9");
}
