use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("../../corpus");
    p.push(name);
    p.display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toposforge"))
        .args(args)
        .env_remove("TOPOSFORGE_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> (serde_json::Value, i32) {
    let mut all = args.to_vec();
    all.extend(["--out", "-"]);
    let o = run(&all);
    (serde_json::from_slice(&o.stdout).expect("json report"), o.status.code().unwrap())
}

#[test]
fn check_axioms_reports_the_bound_for_u6() {
    let cat = corpus("interval.cat");
    let (r, code) = json(&["check-axioms", "--cat", &cat, "--bound", "2", "--exhaustive"]);
    assert_eq!(code, 0);
    let u6 = r["sections"].as_array().unwrap().iter().find(|s| s["name"] == "U6").unwrap();
    assert_eq!(u6["asserted"], false);
    assert!(u6["notes"][0].as_str().unwrap().contains("needed bound 4"));
    for s in r["sections"].as_array().unwrap().iter().filter(|s| s["name"] != "U6" && s["name"] != "U2") {
        assert_eq!(s["counts"]["fail"], 0, "{}", s["name"]);
    }
}

#[test]
fn strictify_on_the_interval() {
    let (r, code) = json(&["strictify", "--cat", &corpus("interval.cat"), "--bounds", "2,6"]);
    assert_eq!(code, 0);
    assert_eq!(r["status"], "pass");
}

#[test]
fn glue_on_the_point_and_interval() {
    let (r, code) = json(&["glue", "--cat", &corpus("point.cat"), "--bounds", "2,4"]);
    assert_eq!(code, 0);
    let strict = r["sections"].as_array().unwrap().iter().find(|s| s["name"] == "realign at syntax").unwrap();
    assert_eq!(strict["counts"]["pass"], 100);
    let (r, code) = json(&["glue", "--cat", &corpus("interval.cat"), "--bounds", "3,3"]);
    assert_eq!(code, 0);
    let naive = r["sections"].as_array().unwrap().iter().find(|s| s["name"] == "naive classifier").unwrap();
    assert!(naive["counts"]["fail"].as_u64().unwrap() > 0);
}

#[test]
fn glue_rejects_decreasing_bounds() {
    let o = run(&["glue", "--cat", &corpus("interval.cat"), "--bounds", "3,2"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn input_errors_exit_with_three() {
    let o = run(&["sheafify", "--site", &corpus("unstable.site")]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("transitivity"));
    let o = run(&[
        "classify",
        "--cat",
        &corpus("interval.cat"),
        "--family",
        &corpus("interval-oversized.json"),
        "--bound",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("fiber over 0"));
    assert_eq!(run(&["classify", "--bounds", "1,2,3"]).status.code(), Some(3));
    assert_eq!(run(&["--no-such-flag"]).status.code(), Some(3));
}

#[test]
fn caps_make_runs_inconclusive() {
    let o = Command::new(env!("CARGO_BIN_EXE_toposforge"))
        .args(["strictify", "--cat", &corpus("interval.cat"), "--bounds", "2,6"])
        .env("TOPOSFORGE_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
}

#[test]
fn realign_a_problem_file() {
    let (r, code) = json(&[
        "realign",
        "--cat",
        &corpus("interval.cat"),
        "--bound",
        "3",
        "--problem",
        &corpus("interval-problem.json"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["data"]["solution"]["points"]["0"], serde_json::json!([1, 0]));
}

#[test]
fn classify_sheafify_soa_roundtrip_pass() {
    let cases: Vec<Vec<String>> = vec![
        vec!["classify".into(), "--cat".into(), corpus("interval.cat"), "--family".into(), corpus("interval-family.json"), "--bound".into(), "3".into()],
        vec!["sheafify".into(), "--site".into(), corpus("dense-interval.site"), "--presheaf".into(), corpus("interval-subterminal.presheaf")],
        vec!["soa".into(), "--site".into(), corpus("joint-parallel-pair.site"), "--stages".into(), "2".into()],
        vec!["u8-search".into(), "--site".into(), corpus("dense-interval.site")],
        vec!["roundtrip".into(), "--cat".into(), corpus("span.cat"), "--instances".into(), "30".into()],
    ];
    for c in cases {
        let args: Vec<&str> = c.iter().map(String::as_str).collect();
        let o = run(&args);
        assert_eq!(o.status.code(), Some(0), "{:?}\n{}", args, stdout(&o));
    }
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        vec!["glue", "--cat", "interval.cat", "--bounds", "3,3", "--seed", "7"],
        vec!["soa", "--site", "dense-interval.site", "--stages", "2"],
        vec!["roundtrip", "--cat", "parallel-pair.cat", "--instances", "40"],
        vec!["check-axioms", "--cat", "span.cat", "--bound", "2"],
    ];
    for (k, case) in cases.iter().enumerate() {
        let args: Vec<String> =
            case.iter().map(|a| if a.ends_with(".cat") || a.ends_with(".site") { corpus(a) } else { a.to_string() }).collect();
        let mut outs = Vec::new();
        for run_no in 0..2 {
            let path = dir.path().join(format!("{k}-{run_no}.json"));
            let mut all: Vec<&str> = args.iter().map(String::as_str).collect();
            let p = path.display().to_string();
            all.extend(["--out", &p]);
            let o = run(&all);
            assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
            outs.push((std::fs::read(&path).unwrap(), o.stdout));
        }
        assert_eq!(outs[0], outs[1], "{case:?}");
    }
}
