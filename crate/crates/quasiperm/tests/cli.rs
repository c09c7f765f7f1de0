use quasiperm::cli::run;
use quasiperm::fixtures::{fixtures_dir, six_by_six_path};
use serde_json::Value;

const EIGHT: &str = "1342,1423,2314,2431,3124,3241,4132,4213";
const V4: &str = "1234,2143,3412,4321";

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("quasiperm").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let (code, out, err) = call(&full);
    let v: Value = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}{err}"));
    assert_eq!(v["schema"], "v1", "{out}");
    (code, v)
}

fn six() -> String {
    six_by_six_path(&fixtures_dir()).display().to_string()
}

#[test]
fn density() {
    let (code, out, _) = call(&["density", "--pattern", "21", "--host", "312"]);
    assert_eq!((code, out.trim()), (0, "2/3"));
    let (code, out, _) = call(&["--approx", "density", "--pattern", "21", "--host", "312"]);
    assert_eq!(code, 0);
    assert!(out.contains("2/3") && out.contains('≈'));
    assert_eq!(call(&["density", "--pattern", "22", "--host", "312"]).0, 2);
}

#[test]
fn usage_errors() {
    assert_eq!(call(&[]).0, 2);
    let (code, _, err) = call(&["density", "--pattern", "21"]);
    assert_eq!(code, 2);
    assert!(err.contains("--host"), "{err}");
    assert_eq!(call(&["--help"]).0, 0);
    assert_eq!(
        call(&["--jobs", "2", "density", "--pattern", "1", "--host", "1"]).0,
        0
    );
}

#[test]
fn step_density() {
    let (code, v) = json(&["step-density", "--matrix", &six(), "--set", EIGHT]);
    assert_eq!((code, v["sum"].as_str()), (0, Some("25/72")));
    let (code, v) = json(&["step-density", "--matrix", &six(), "--order", "3"]);
    assert_eq!((code, v["densities"].as_array().unwrap().len()), (0, 6));
    assert_eq!(
        call(&["step-density", "--matrix", "/nonexistent.json", "--set", EIGHT]).0,
        2
    );
}

#[test]
fn cover_gradient_hessian_inertia() {
    let (code, v) = json(&["cover", "--set", EIGHT]);
    assert_eq!((code, &v["constant"]), (0, &Value::Bool(true)));
    let (code, v) = json(&["gradient", "--set", "1234", "--n", "4", "--check"]);
    assert_eq!(code, 0);
    assert_eq!(v["gradient"][0], "1061/24576");
    assert_eq!(v["formula_matches_expansion"], true);
    assert_eq!(call(&["gradient", "--set", "1234", "--n", "1"]).0, 2);

    let (code, v) = json(&["hessian", "--set", V4, "--n", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["hessian"][0][0], "64/243");
    assert_eq!(v["inertia"]["pos"], 4);

    let (code, v) = json(&["inertia", "--set", EIGHT]);
    assert_eq!((code, &v["inertia"]["neg"]), (0, &Value::from(16)));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    std::fs::write(&path, "1,2\n2,1\n").unwrap();
    let (code, v) = json(&["inertia", "--matrix", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(
        (v["inertia"]["pos"].as_u64(), v["inertia"]["neg"].as_u64()),
        (Some(1), Some(1))
    );
    std::fs::write(&path, "1,2\n3,1\n").unwrap();
    assert_eq!(call(&["inertia", "--matrix", path.to_str().unwrap()]).0, 2);
}

#[test]
fn certify() {
    let (code, v) = json(&["certify", "set8a"]);
    assert_eq!(
        (code, v["scale"].as_str(), &v["pass"]),
        (0, Some("2/3"), &Value::Bool(true))
    );
    let (code, v) = json(&["certify", "set8a", "--mutate", "M[0][0]=-1"]);
    assert_eq!((code, &v["pass"]), (1, &Value::Bool(false)));
    assert_eq!(call(&["certify", "nope"]).0, 2);
    assert_eq!(call(&["certify", "set8a", "--mutate", "Q=1"]).0, 2);
    assert_eq!(call(&["certify", "--mutate", "M[0][0]=1"]).0, 2);
    let (code, v) = json(&["certify"]);
    assert_eq!((code, v["certificates"].as_array().unwrap().len()), (0, 4));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let cert = quasiperm::core::flag::builtin_certificate("set8b").unwrap();
    std::fs::write(&path, quasiperm::format::certificate_json(&cert).to_string()).unwrap();
    let (code, v) = json(&["certify", "--file", path.to_str().unwrap()]);
    assert_eq!((code, v["scale"].as_str()), (0, Some("2")));
}

#[test]
fn relations_enumerate_exceptional() {
    let (code, v) = json(&["relations"]);
    assert_eq!((code, &v["pass"]), (0, &Value::Bool(true)));
    let (code, v) = json(&["enumerate", "--size", "8"]);
    assert_eq!((code, v["count"].as_u64()), (0, Some(65)));
    assert_eq!(call(&["enumerate", "--size", "5"]).0, 2);
    let (code, v) = json(&["exceptional"]);
    assert_eq!((code, v["count"].as_u64()), (0, Some(13)));
}

#[test]
fn classify() {
    let (code, v) = json(&["classify", "--set", "1234,1432,2143,2341,3214,3412,4123,4321"]);
    assert_eq!((code, v["verdict"].as_str()), (0, Some("sigma-forcing")));
    let (code, v) = json(&["classify", "--set", "2413"]);
    assert_eq!((code, v["verdict"].as_str()), (0, Some("gradient")));
    let (code, v) = json(&["classify", "--set", EIGHT]);
    assert_eq!((code, v["verdict"].as_str()), (0, Some("witness")));
    assert_eq!(v["evidence"]["low_sum"], "5/24");
    let (code, v) = json(&["classify", "--set", V4, "--budget", "small", "--no-fixtures"]);
    assert_eq!((code, v["verdict"].as_str()), (1, Some("pending")));
    assert_eq!(call(&["classify", "--set", "12345"]).0, 2);
}

#[test]
fn search_and_blend() {
    let (code, v) = json(&["search", "--set", EIGHT, "--budget", "small"]);
    assert_eq!(code, 0);
    assert_eq!(
        (v["low_sum"].as_str(), v["high_sum"].as_str()),
        (Some("5/24"), Some("661/1875"))
    );
    let (code, _) = json(&[
        "search",
        "--set",
        "1234,1243,2134,2143,3412,3421,4312,4321",
        "--budget",
        "small",
    ]);
    assert_eq!(code, 1);

    let dir = tempfile::tempdir().unwrap();
    let low = dir.path().join("low.csv");
    let high = dir.path().join("high.csv");
    std::fs::write(&low, "0,1\n1,0\n").unwrap();
    std::fs::write(&high, "1,0\n0,1\n").unwrap();
    let (code, v) = json(&[
        "blend",
        "--set",
        "1234",
        "--low",
        low.to_str().unwrap(),
        "--high",
        high.to_str().unwrap(),
        "--bits",
        "8",
    ]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["interval"]["width"], "1/256");
    // Both ends on the same side: no crossing to certify.
    let (code, _) = json(&[
        "blend",
        "--set",
        "1234",
        "--low",
        high.to_str().unwrap(),
        "--high",
        high.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
}
