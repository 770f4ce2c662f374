use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use scgs_core::grammar::EXAMPLE_GRAMMAR;

fn scgs(args: &[&str], stdin: &str, env: &[(&str, &str)]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_scgs"))
        .args(args)
        .envs(env.iter().copied())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8(bytes.to_vec()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("scgs-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn example_files(tag: &str) -> (PathBuf, PathBuf) {
    let g = scratch(&format!("{tag}.g"));
    std::fs::write(&g, EXAMPLE_GRAMMAR).unwrap();
    let s = scratch(&format!("{tag}.s"));
    let out = scgs(&["transform", g.to_str().unwrap(), "-o", s.to_str().unwrap()], "", &[]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    (g, s)
}

#[test]
fn enumerate_from_stdin() {
    let out = scgs(&["enumerate", "--max-len", "4"], EXAMPLE_GRAMMAR, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(text(&out.stdout), "bc\nbcd\nbcdd\nbed\nbedd\n");
    assert_eq!(text(&out.stderr), "truncated: false\n");
}

#[test]
fn membership_exit_codes() {
    let (_, s) = example_files("member");
    let s = s.to_str().unwrap();
    let yes = scgs(&["member", s, "bed", "--trace"], "", &[]);
    assert_eq!(yes.status.code(), Some(0));
    let stdout = text(&yes.stdout);
    assert!(stdout.starts_with("yes\n1 P1_AtoBC {A -> B C} @0 : [+.A...] => [-.B..|] [.|C..|]\n"));
    assert!(stdout.trim_end().ends_with("=> b e d"));
    let no = scgs(&["member", s, "cb"], "", &[]);
    assert_eq!((no.status.code(), text(&no.stdout)), (Some(1), "no\n".to_string()));
    let bad = scgs(&["member", s, "xyz"], "", &[]);
    assert_eq!(bad.status.code(), Some(65));
    assert!(text(&bad.stderr).starts_with("error:"));
}

#[test]
fn equivalence_of_grammar_and_reduced_system() {
    let (g, _) = example_files("equal");
    let r = scratch("example2.s");
    let out = scgs(&["transform", g.to_str().unwrap(), "--degree2", "-o", r.to_str().unwrap()], "", &[]);
    assert!(out.status.success());
    let out = scgs(&["equiv", g.to_str().unwrap(), r.to_str().unwrap(), "--max-len", "4"], "", &[]);
    assert_eq!(text(&out.stdout), "EQUAL ({bc, bcd, bcdd, bed, bedd})\n");
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn equivalence_reports_differences() {
    let (g, _) = example_files("differ");
    let lit = scratch("literal.s");
    let out = scgs(&["transform", g.to_str().unwrap(), "--no-strand-blocking", "-o", lit.to_str().unwrap()], "", &[]);
    assert!(out.status.success());
    let out = scgs(&["equiv", g.to_str().unwrap(), lit.to_str().unwrap(), "--max-len", "4"], "", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(text(&out.stdout), "DIFFERENT\n> debd\n> dedb\n");
}

#[test]
fn invariant_checks_and_report() {
    let (_, s) = example_files("checks");
    let out = scgs(&["claims", s.to_str().unwrap(), "--max-len", "3", "--sequential"], "", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));
    assert_eq!(text(&out.stdout).matches(": PASS").count(), 4);
    let out = scgs(&["transform", "--report"], EXAMPLE_GRAMMAR, &[]);
    assert!(text(&out.stderr).contains("total 921 rules, max degree 3"));
}

#[test]
fn kuroda_round_trip_through_stdin() {
    let out = scgs(&["kuroda"], "nonterminals: S\nterminals: a b\nstart: S\nrules:\nS -> a b\n", &[]);
    assert!(out.status.success());
    let out = scgs(&["enumerate"], &text(&out.stdout), &[]);
    assert_eq!(text(&out.stdout), "ab\n");
}

#[test]
fn thread_variable() {
    let out = scgs(&["enumerate", "--max-len", "3"], EXAMPLE_GRAMMAR, &[("SCGS_THREADS", "2")]);
    assert_eq!(text(&out.stdout), "bc\nbcd\nbed\n");
    let out = scgs(&["enumerate"], EXAMPLE_GRAMMAR, &[("SCGS_THREADS", "zero")]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn error_exit_codes() {
    assert_eq!(scgs(&["validate", "/definitely/missing"], "", &[]).status.code(), Some(64));
    assert_eq!(scgs(&["enumerate", "--bogus"], "", &[]).status.code(), Some(64));
    let out = scgs(&["validate"], "nonterminals: S\nterminals: a\nstart: S\nrules:\nS a -> a\n", &[]);
    assert_eq!(out.status.code(), Some(65));
    assert!(text(&out.stderr).starts_with("error:"));
    assert_eq!(scgs(&["claims"], EXAMPLE_GRAMMAR, &[]).status.code(), Some(65));
}

#[test]
fn fuzz_smoke() {
    let out = scgs(&["fuzz", "--seed", "3", "--count", "3", "--max-len", "3"], "", &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&out.stdout).ends_with("3 of 3 grammars agree\n"));
}
