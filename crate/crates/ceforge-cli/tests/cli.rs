//! End-to-end tests of the command-line binary: exit codes, report text,
//! determinism of fan-out, and file round trips through the subcommands.

use std::path::PathBuf;
use std::process::{Command, Output};

const TWO_CHAIN: &str =
    "poset {\n  elements p q\n  relation p q\n}\ncoefficients Z\nrank p 1\nrank q 1\nblock p<-q {\n  2\n}\n";
const THREE_TORSION: &str =
    "poset {\n  elements p q\n  relation p q\n}\ncoefficients Z\nrank p 1\nrank q 1\nblock p<-q {\n  3\n}\n";
const NEGATED_TWO_CHAIN: &str =
    "poset {\n  elements p q\n  relation p q\n}\ncoefficients Z\nrank p 1\nrank q 1\nblock p<-q {\n  -2\n}\n";
const CHAIN_Z2: &str =
    "poset {\n  elements a b c\n  relation a b\n  relation b c\n}\ncoefficients Z2\nrank a 1\nrank b 1\nrank c 1\nblock b<-c {\n  1\n}\n";
const CHAIN_Z2_TWISTED: &str =
    "poset {\n  elements a b c\n  relation a b\n  relation b c\n}\ncoefficients Z2\nrank a 1\nrank b 1\nrank c 1\nblock a<-c {\n  1\n}\nblock b<-c {\n  1\n}\n";
const MS_WITH_EDGE: &str =
    "poset {\n  elements p q\n  relation p q\n}\ncoefficients Z2\nmode chain\nrank p 1\nrank q 1\ndegree p 0\ndegree q 1\nblock p<-q {\n  1\n}\n";
const MS_WITHOUT_EDGE: &str =
    "poset {\n  elements p q\n  relation p q\n}\ncoefficients Z2\nmode chain\nrank p 1\nrank q 1\ndegree p 0\ndegree q 1\n";
const NON_STRICT_Z2: &str =
    "poset {\n  elements p q\n  relation p q\n}\ncoefficients Z2\nrank p 2\nrank q 1\nblock p<-p {\n  0 1\n  0 0\n}\n";

fn tmp_file(name: &str, text: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, text).expect("test files are writable");
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ceforge"))
        .args(args)
        .output()
        .expect("the binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("the binary exits normally")
}

#[test]
fn validate_accepts_a_canonical_instance() {
    let f = tmp_file("validate_ok.inst", TWO_CHAIN);
    let out = run(&["validate", f.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("PASS"), "stdout: {text}");
    assert!(text.contains("2 generators"), "stdout: {text}");
}

#[test]
fn parse_errors_exit_two_with_a_line_number() {
    let f = tmp_file("validate_truncated.inst", "poset {\n  elements p q\n");
    let out = run(&["validate", f.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = stderr_of(&out);
    assert!(err.contains("parse error"), "stderr: {err}");
    assert!(err.contains("line 3"), "stderr: {err}");
    assert!(stdout_of(&out).is_empty());
}

#[test]
fn missing_files_and_bad_masks_exit_two() {
    let out = run(&["validate", "/nonexistent/v.inst"]);
    assert_eq!(code(&out), 2);
    let f = tmp_file("mask_args.inst", TWO_CHAIN);
    let out = run(&["homology", f.to_str().unwrap(), "--convex", "zz"]);
    assert_eq!(code(&out), 2);
    assert!(stderr_of(&out).contains("unknown element label"), "stderr: {}", stderr_of(&out));
}

#[test]
fn element_cap_is_enforced() {
    let f = tmp_file("cap.inst", CHAIN_Z2);
    let out = Command::new(env!("CARGO_BIN_EXE_ceforge"))
        .args(["validate", f.to_str().unwrap()])
        .env("CEFORGE_MAX_ELEMENTS", "2")
        .output()
        .expect("the binary runs");
    assert_eq!(code(&out), 2);
    assert!(stderr_of(&out).contains("CEFORGE_MAX_ELEMENTS"), "stderr: {}", stderr_of(&out));
}

#[test]
fn homology_prints_torsion_presentations() {
    let f = tmp_file("homology.inst", TWO_CHAIN);
    let out = run(&["homology", f.to_str().unwrap(), "--convex", "p,q"]);
    assert_eq!(code(&out), 0);
    assert!(stdout_of(&out).contains("Z/2"), "stdout: {}", stdout_of(&out));
}

#[test]
fn ce_prints_the_term_of_a_nested_pair() {
    let f = tmp_file("ce_pair.inst", TWO_CHAIN);
    let out = run(&["ce", f.to_str().unwrap(), "--alpha", "-", "--beta", "p,q"]);
    assert_eq!(code(&out), 0);
    let text = stdout_of(&out);
    assert!(text.contains("alpha={}"), "stdout: {text}");
    assert!(text.contains("Z/2"), "stdout: {text}");
}

#[test]
fn ce_verify_passes_and_reports_byte_identically_across_jobs() {
    let f = tmp_file("ce_verify.inst", CHAIN_Z2_TWISTED);
    let first = run(&["ce-verify", f.to_str().unwrap(), "--max-downsets", "64"]);
    assert_eq!(code(&first), 0, "stderr: {}", stderr_of(&first));
    let text = stdout_of(&first);
    assert!(text.contains("PASS"), "stdout: {text}");
    assert!(text.contains("triangles"), "stdout: {text}");
    let again = run(&["ce-verify", f.to_str().unwrap(), "--max-downsets", "64"]);
    assert_eq!(first.stdout, again.stdout, "repeated runs must agree byte for byte");
    let fanned = run(&["ce-verify", f.to_str().unwrap(), "--max-downsets", "64", "--jobs", "4"]);
    assert_eq!(code(&fanned), 0);
    assert_eq!(first.stdout, fanned.stdout, "fan-out must not change the report");
}

#[test]
fn compare_refutes_with_a_nested_down_set_pair() {
    let f1 = tmp_file("compare_two.inst", TWO_CHAIN);
    let f2 = tmp_file("compare_three.inst", THREE_TORSION);
    let out = run(&["compare", f1.to_str().unwrap(), f2.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let text = stdout_of(&out);
    assert!(text.contains("not isomorphic"), "stdout: {text}");
    assert!(text.contains("alpha={}"), "stdout: {text}");
    assert!(text.contains("beta={p,q}"), "stdout: {text}");
    assert!(text.contains("Z/2 vs Z/3"), "stdout: {text}");
}

#[test]
fn compare_confirms_and_serializes_the_isomorphism() {
    let f = tmp_file("compare_self.inst", TWO_CHAIN);
    let out = run(&["compare", f.to_str().unwrap(), f.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout_of(&out);
    assert!(text.contains("PASS"), "stdout: {text}");
    assert!(text.contains("ce-iso {"), "stdout: {text}");
}

#[test]
fn compare_reports_budget_exhaustion_distinctly() {
    // Equal term presentations but no certificate either way within the
    // budget: the infinite integer hom families cannot be enumerated.
    let f1 = tmp_file("budget_pos.inst", TWO_CHAIN);
    let f2 = tmp_file("budget_neg.inst", NEGATED_TWO_CHAIN);
    let out = run(&["compare", f1.to_str().unwrap(), f2.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let text = stdout_of(&out);
    assert!(text.contains("budget"), "stdout: {text}");
    assert!(!text.contains("not isomorphic"), "stdout: {text}");
}

#[test]
fn compare_then_build_iso_round_trips_through_files() {
    let f1 = tmp_file("pipe_c.inst", CHAIN_Z2);
    let f2 = tmp_file("pipe_a.inst", CHAIN_Z2_TWISTED);
    let iso = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("pipe.ce");
    let out = run(&[
        "compare",
        f1.to_str().unwrap(),
        f2.to_str().unwrap(),
        "--out",
        iso.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stdout: {}", stdout_of(&out));
    assert!(iso.exists());
    let map = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("pipe.map");
    let built = run(&[
        "build-iso",
        f1.to_str().unwrap(),
        f2.to_str().unwrap(),
        "--ce-iso",
        iso.to_str().unwrap(),
        "--out",
        map.to_str().unwrap(),
    ]);
    assert_eq!(code(&built), 0, "stdout: {}", stdout_of(&built));
    let text = stdout_of(&built);
    assert!(text.contains("conjugacy"), "stdout: {text}");
    assert!(text.contains("PASS"), "stdout: {text}");
    let map_text = std::fs::read_to_string(&map).expect("chain map written");
    assert!(map_text.starts_with("map {"), "map file: {map_text}");
    // The constructed isomorphism must correct the twist below the top grade.
    assert!(map_text.contains("block a<-b"), "map file: {map_text}");
    let rebuilt = run(&[
        "build-iso",
        f1.to_str().unwrap(),
        f2.to_str().unwrap(),
        "--ce-iso",
        iso.to_str().unwrap(),
    ]);
    assert_eq!(code(&rebuilt), 0);
    assert!(
        stdout_of(&rebuilt).contains(map_text.trim_end()),
        "printing and writing must produce the same document"
    );
}

#[test]
fn connect_reduces_and_its_output_validates() {
    let f = tmp_file("connect_in.inst", NON_STRICT_Z2);
    let prefix = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("connect_out");
    let out = run(&["connect", f.to_str().unwrap(), "--out", prefix.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stdout: {}", stdout_of(&out));
    let reduced = prefix.with_extension("a.inst");
    assert!(reduced.exists(), "reduction file missing");
    let text = std::fs::read_to_string(&reduced).expect("reduction written");
    assert!(text.contains("coefficients Z2"), "reduced instance: {text}");
    assert!(text.contains("rank p 0"), "the within-grade pair must cancel: {text}");
    let check = run(&["validate", reduced.to_str().unwrap()]);
    assert_eq!(code(&check), 0, "stderr: {}", stderr_of(&check));
    for ext in ["f.map", "g.map", "h.map"] {
        assert!(prefix.with_extension(ext).exists(), "{ext} missing");
    }
}

#[test]
fn connect_refuses_integer_coefficients_with_the_obstruction() {
    let f = tmp_file("connect_z.inst", TWO_CHAIN);
    let out = run(&["connect", f.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let text = stdout_of(&out);
    assert!(text.contains("field coefficients required"), "stdout: {text}");
    assert!(text.contains("invariant factors [2]"), "stdout: {text}");
}

#[test]
fn morse_smale_single_and_pair_verdicts() {
    let f1 = tmp_file("ms_edge.inst", MS_WITH_EDGE);
    let f2 = tmp_file("ms_no_edge.inst", MS_WITHOUT_EDGE);
    let single = run(&["morse-smale", f1.to_str().unwrap(), "--mu", "0,1"]);
    assert_eq!(code(&single), 0);
    assert!(stdout_of(&single).contains("PASS"), "stdout: {}", stdout_of(&single));
    let equal = run(&["morse-smale", f1.to_str().unwrap(), f1.to_str().unwrap(), "--mu", "0,1"]);
    assert_eq!(code(&equal), 0, "stdout: {}", stdout_of(&equal));
    let distinct =
        run(&["morse-smale", f1.to_str().unwrap(), f2.to_str().unwrap(), "--mu", "0,1"]);
    assert_eq!(code(&distinct), 1);
    assert!(
        stdout_of(&distinct).contains("differ"),
        "stdout: {}",
        stdout_of(&distinct)
    );
}

#[test]
fn morse_smale_reports_reasons_on_failure() {
    let f = tmp_file("ms_bad_mu.inst", MS_WITH_EDGE);
    let out = run(&["morse-smale", f.to_str().unwrap(), "--mu", "1,0"]);
    assert_eq!(code(&out), 1);
    let text = stdout_of(&out);
    assert!(text.contains("reason:"), "stdout: {text}");
    assert!(text.contains("FAIL"), "stdout: {text}");
}
