use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ratimpl")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn stdout(args: &[&str]) -> String {
    String::from_utf8(run(args).stdout).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["check", "ex1b"]), 0);
    assert_eq!(code(&["check", "ex1a", "--axiom", "nwa"]), 1);
    assert_eq!(code(&["check", "ex4", "--axiom", "smm-star"]), 1);
    assert_eq!(code(&["check", "ex4", "--axiom", "bogus"]), 2);
    assert_eq!(code(&["check", "no-such-example"]), 2);
    assert_eq!(code(&["partition", "ex4", "--axiom", "nwa"]), 2);
    assert_eq!(code(&["mechanism", "ex7", "--variant", "theorem1"]), 1);
    assert_eq!(code(&["examples", "ex6", "ex7"]), 0);
}

#[test]
fn json_output_is_stable() {
    let args = ["--format", "json", "partition", "ex4", "--axiom", "smm-star-star"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    let text = a.as_str();
    assert!(text.contains("\"block-against\""));
    assert!(v.to_string().contains("\"theta4\""));
}

#[test]
fn text_reports_name_the_failing_agent() {
    let out = stdout(&["check", "ex1a", "--axiom", "nwa"]);
    assert_eq!(out.matches("agent=i4").count(), 3);
}

#[test]
fn mechanism_file_certifies() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let p = path.to_str().unwrap();
    assert_eq!(code(&["mechanism", "ex4", "--variant", "theorem1", "--nmax", "3", "--out", p]), 0);
    assert_eq!(code(&["certify", p]), 0);

    // a menu entry repeated twice is rejected as malformed input
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let sigma = v["sigma"].as_array_mut().unwrap();
    let dup = sigma[0].clone();
    sigma.push(dup);
    fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(code(&["certify", p]), 2);

    assert_eq!(code(&["certify", "ex1b", "--variant", "theorem2"]), 0);
}

#[test]
fn solve_games() {
    let dir = tempfile::tempdir().unwrap();
    let pd = dir.path().join("pd.json");
    fs::write(
        &pd,
        r#"{"players":["row","col"],"strategies":[["C","D"],["C","D"]],"payoffs":[[3,0,5,1],[3,5,0,1]]}"#,
    )
    .unwrap();
    let out = run(&["--format", "json", "solve", pd.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["survivors"]["row"], serde_json::json!(["D"]));

    // a constant outcome cannot follow a moving social choice function
    let bound = dir.path().join("const.json");
    fs::write(
        &bound,
        r#"{"environment":"ex1b","players":["i1","i2","i3"],"strategies":[["x"],["x"],["x"]],
            "outcomes":{"sparse":[],"default":"a"}}"#,
    )
    .unwrap();
    assert_eq!(code(&["solve", bound.to_str().unwrap()]), 1);
}
