//! End-to-end runs of the binary on the golden documents.

use std::path::PathBuf;
use std::process::{Command, Output};

fn golden(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/golden")
        .join(name)
        .display()
        .to_string()
}

fn ctorus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctorus")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn line<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn lfactor_at_good_place_of_split_gm() {
    let o = ctorus(&["lfactor", "--input", &golden("split_gm.ctdata"), "--place", "q=5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1 - 1/5*t\n");
}

#[test]
fn lfactor_unlisted_place_from_oracle() {
    let args = ["lfactor", "--input", &golden("norm1_qi.ctdata"), "--place", "q=3", "--oracle", &golden("mod4.oracle")];
    let o = ctorus(&args);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1 + 1/3*t\n");
}

#[test]
fn dualize_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let once = dir.path().join("once.ctdata");
    let twice = dir.path().join("twice.ctdata");
    let input = golden("constant_Z.ctdata");
    let o = ctorus(&["dualize", "--input", &input, "--output", once.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let dual = std::fs::read_to_string(&once).unwrap();
    assert!(dual.contains("kind = \"torus\""));
    assert_eq!(dual, std::fs::read_to_string(golden("split_gm.ctdata")).unwrap());
    let o = ctorus(&["dualize", "--input", once.to_str().unwrap(), "--output", twice.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&twice).unwrap(), std::fs::read(&input).unwrap());
}

#[test]
fn verify_sv_norm_one_qi_passes() {
    let args = [
        "verify-sv",
        "--input",
        &golden("norm1_qi.ctdata"),
        "--oracle",
        &golden("mod4.oracle"),
        "--tolerance",
        "1e-8",
    ];
    let o = ctorus(&args);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(line(&text, "verdict"), "pass");
    assert!(line(&text, "leading").starts_with("1.2732395"));
    assert!(line(&text, "chi").starts_with("1.2732395"));
}

#[test]
fn verify_sv_json_report() {
    let args = ["verify-sv", "--input", &golden("norm1_qsqrt-3.ctdata"), "--oracle", &golden("mod3.oracle"), "--json"];
    let o = ctorus(&args);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["order"], 0);
    // 3 sqrt(3) / pi
    assert!(v["chi"].as_str().unwrap().starts_with("1.6539866"));
}

#[test]
fn verify_sv_without_route_is_tautological() {
    let o = ctorus(&["verify-sv", "--input", &golden("split_gm.ctdata")]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(line(&stdout(&o), "verdict"), "decomposition-only (tautological)");
}

#[test]
fn verify_sv_fails_under_wrong_oracle() {
    // The mod-4 oracle describes Q(i), not Q(sqrt5).
    let args = ["verify-sv", "--input", &golden("norm1_qsqrt5.ctdata"), "--oracle", &golden("mod4.oracle")];
    let o = ctorus(&args);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(line(&stdout(&o), "verdict"), "fail");
}

#[test]
fn verify_sv_function_field() {
    let o = ctorus(&["verify-sv", "--input", &golden("split_gm_p1f3.ctdata")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(line(&text, "order"), "1");
    // (1 - 1/3) log 3
    assert!(line(&text, "chi").starts_with("0.7324081924"));
}

#[test]
fn lseries_both_modes() {
    let o = ctorus(&["lseries", "--input", &golden("split_gm_p1f3.ctdata")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(line(&stdout(&o), "rational"), "1 - 4/3*t + 1/3*t^2");
    let o = ctorus(&["lseries", "--input", &golden("split_gm.ctdata"), "--truncate", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    // 1 / zeta(3)
    let v: f64 = line(&stdout(&o), "value").parse().unwrap();
    assert!((v - 1.0 / 1.202_056_903_159_594).abs() < 1e-6);
    let o = ctorus(&["lseries", "--input", &golden("split_gm.ctdata"), "--mode", "ff"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn read_only_subcommands() {
    let f = golden("norm1_qsqrt5.ctdata");
    for (cmd, expect) in [
        ("validate", "valid torus over Z"),
        ("bidual-check", "bidual: identity"),
        ("conductor", "5: a = 1, c = 1/2"),
        ("decompose", "-1 * G_m over the fixed field of [0, 1]"),
        ("chi", "chi = 2.3233718095"),
        ("order", "order = 0"),
    ] {
        let o = ctorus(&[cmd, "--input", &f]);
        assert_eq!(o.status.code(), Some(0), "{cmd}");
        assert!(stdout(&o).contains(expect), "{cmd}: {}", stdout(&o));
    }
    let o = ctorus(&["validate", "--input", &golden("constant_Z.ctdata"), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["kind"], "sheaf");
}

#[test]
fn input_errors_exit_two() {
    let f = golden("split_gm.ctdata");
    let (oracle, sheaf, qi) = (golden("mod4.oracle"), golden("constant_Z.ctdata"), golden("norm1_qi.ctdata"));
    let cases: Vec<Vec<&str>> = vec![
        vec!["order", "--input", &f, "--bogus"],
        vec!["frobnicate", "--input", &f],
        vec!["chi", "--input", "/nonexistent.ctdata"],
        vec!["chi", "--input", &f, "--precision", "10"],
        vec!["verify-sv", "--input", &f, "--tolerance", "-1"],
        vec!["lfactor", "--input", &f, "--place", "p=5"],
        vec!["lseries", "--input", &f, "--truncate", "0"],
        vec!["lseries", "--input", &f, "--s", "1"],
        vec!["chi", "--input", &oracle],
        vec!["chi", "--input", &sheaf],
        vec!["lseries", "--input", &qi],
    ];
    for args in cases {
        let o = ctorus(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    let o = ctorus(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for cmd in ["validate", "dualize", "bidual-check", "lfactor", "lseries", "conductor", "decompose", "chi", "order", "verify-sv"] {
        assert!(stdout(&o).contains(cmd), "{cmd}");
    }
}
