use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn qfol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfol")).args(args).output().expect("binary runs")
}

fn run(cmd: &str, input: &str, extra: &[&str]) -> (String, i32) {
    let path = fixture(input);
    let mut args = vec![cmd, "--input", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = qfol(&args);
    (String::from_utf8(out.stdout).unwrap(), out.status.code().unwrap())
}

/// Compares against `tests/golden/<name>`; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {name}"));
    assert_eq!(actual, expected, "report differs from {name}");
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).expect("report is JSON")
}

#[test]
fn leafspace_kronecker() {
    let (out, code) = run("leafspace", "kronecker.toml", &[]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["results"]["gamma"], serde_json::json!(["1", "l"]));
    assert_eq!(v["results"]["action"], "translations");
    assert_eq!(v["verdict"], "quasifold_chart");
    golden("leafspace_kronecker.json", &out);
}

#[test]
fn closure_kronecker() {
    let (out, code) = run("closure", "kronecker.toml", &[]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["results"]["closure_dim"], 2);
    assert_eq!(v["results"]["structure_dim"], 1);
    assert_eq!(v["results"]["dense"], true);
    assert_eq!(v["numeric"]["closure_dim_estimate"], 2);
    golden("closure_kronecker.json", &out);
}

#[test]
fn deckgroup_three_torus() {
    let (out, code) = run("deckgroup", "torus3.toml", &[]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["results"]["canonical_generators"], serde_json::json!([["1", "0"], ["0", "1"], ["l", "m"]]));
    golden("deckgroup_torus3.json", &out);
}

#[test]
fn sameleaf_identical_points() {
    let (out, code) = run("sameleaf", "sameleaf.toml", &[]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["verdict"], "same_leaf");
    golden("sameleaf.json", &out);
}

#[test]
fn suspend_two_strips() {
    let (out, code) = run("suspend", "suspension.toml", &[]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["results"]["round_trip"], true);
    assert_eq!(v["results"]["riemannian"], true);
    assert_eq!(v["results"]["strips"], 2);
    golden("suspend.json", &out);
}

#[test]
fn check_cocycle_rotation_and_box() {
    let (out, code) = run("check-cocycle", "suspension_rotation.toml", &[]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["results"]["cross_strip_equal"], serde_json::json!([true, false]));
    golden("check_cocycle.json", &out);
}

#[test]
fn check_godement_two_strips() {
    let (out, code) = run("check-godement", "suspension.toml", &[]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["results"]["samples"], 100);
    golden("check_godement.json", &out);
}

#[test]
fn localmodel_order_three() {
    let (out, code) = run("localmodel", "localmodel_rotation.toml", &["--wordlen", "3"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["results"]["isotropy"]["order"], 3);
    assert_eq!(v["results"]["finite_order"], 3);
    golden("localmodel_rotation.json", &out);
}

#[test]
fn effective_kernels() {
    let (out, code) = run("effective", "localmodel_rotation.toml", &["--wordlen", "3"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "nontrivial_kernel");
    assert_eq!(v["results"]["kernel_lattice"], serde_json::json!([["3"]]));
    golden("effective_rotation.json", &out);

    let (out, code) = run("effective", "localmodel_kronecker.toml", &[]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "trivial_kernel");
    assert_eq!(v["results"]["exact"], true);
}

#[test]
fn orbit_eq_zero_half() {
    let (out, code) = run("orbit-eq", "orbit_eq.toml", &[]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "unequal");
    assert_eq!(v["results"]["method"], "exact");
    golden("orbit_eq.json", &out);
}

#[test]
fn orbit_eq_other_verdicts() {
    let (out, code) = run("orbit-eq", "orbit_eq_equal.toml", &[]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["results"]["witness"]["coefficients"], serde_json::json!(["3", "2"]));

    let (out, code) = run("orbit-eq", "orbit_eq_dilation.toml", &[]);
    assert_eq!(code, 2);
    assert_eq!(json(&out)["verdict"], "not_within_bound");
}

#[test]
fn atlas_rescaling_certifies() {
    let (out, code) = run("atlas-pseudogroup", "atlas_rescaling.toml", &["--wordlen", "2"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "certified");
    assert_eq!(v["results"]["query"]["verdict"], "equal");
    golden("atlas_rescaling.json", &out);

    let (out, code) = run("atlas-pseudogroup", "atlas_half.toml", &["--wordlen", "1"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "uncertified");
    assert_eq!(v["results"]["transitions"][0]["failed_generator"], 1);
}

#[test]
fn text_format() {
    let (out, code) = run("leafspace", "kronecker.toml", &["--format", "text"]);
    assert_eq!(code, 0);
    golden("leafspace_kronecker.txt", &out);
}

#[test]
fn reports_are_byte_stable() {
    for (cmd, input) in [
        ("closure", "torus3.toml"),
        ("check-godement", "suspension_rotation.toml"),
        ("orbit-eq", "orbit_eq_equal.toml"),
    ] {
        let a = run(cmd, input, &["--seed", "5"]);
        let b = run(cmd, input, &["--seed", "5"]);
        assert_eq!(a, b, "{cmd} differs between runs");
    }
}

#[test]
fn timings_only_on_request() {
    let (out, _) = run("deckgroup", "kronecker.toml", &[]);
    assert!(json(&out).get("timings").is_none());
    let (out, _) = run("deckgroup", "kronecker.toml", &["--timings"]);
    assert!(json(&out)["timings"]["total_ms"].is_number());
}

#[test]
fn exact_reports_have_no_numeric_section() {
    let (out, _) = run("leafspace", "kronecker.toml", &[]);
    assert!(json(&out).get("numeric").is_none());
}

#[test]
fn malformed_input_exits_one_with_location() {
    for (input, needle) in [("bad_syntax.toml", "line 2"), ("bad_scalar.toml", "directions[0][1]")] {
        let path = fixture(input);
        let out = qfol(&["leafspace", "--input", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1));
        assert!(out.stdout.is_empty());
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains(needle), "{err}");
    }
}

#[test]
fn missing_and_unknown_inputs() {
    assert_eq!(qfol(&["leafspace"]).status.code(), Some(1));
    assert_eq!(qfol(&["nonsense"]).status.code(), Some(1));
    assert_eq!(qfol(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.toml");
    assert_eq!(qfol(&["closure", "--input", missing.to_str().unwrap()]).status.code(), Some(1));

    let unknown = dir.path().join("unknown.toml");
    std::fs::write(&unknown, "n = 2\ndirections = [[\"1\", \"1\"]]\nbogus = 1\n").unwrap();
    let out = qfol(&["closure", "--input", unknown.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("bogus"));

    let missing_field = dir.path().join("nodirs.toml");
    std::fs::write(&missing_field, "n = 2\n").unwrap();
    let out = qfol(&["closure", "--input", missing_field.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("directions"));
}
