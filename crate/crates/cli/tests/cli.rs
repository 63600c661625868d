use std::process::{Command, Output};

fn hnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hnn")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn presentation(name: &str) -> String {
    format!("{}/../../presentations/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn normal_form() {
    let o = hnn(&["nf", "--preset", "gn", "3", "x2 y2^-1 y1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "y2^-1 y1 y2 x2 y2^-1");
}

#[test]
fn trace_reports_each_step() {
    let o = hnn(&["nf", "--preset", "gn", "3", "--trace", "x2 y2^-1 y1"]);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("init x2 y2^-1 y1 nu="));
    assert!(lines[1].starts_with("#1 pos="));
    assert!(lines.contains(&"final y2^-1 y1 y2 x2 y2^-1"));
}

#[test]
fn equality_exit_codes() {
    let o = hnn(&["eq", "--preset", "gn", "3", "x1 y2", "y2 x1"]);
    assert_eq!((o.status.code(), stdout(&o).trim().to_string()), (Some(0), "true".into()));
    let o = hnn(&["eq", "--preset", "gn", "3", "x1 y1", "y1 x1"]);
    assert_eq!((o.status.code(), stdout(&o).trim().to_string()), (Some(1), "false".into()));
}

#[test]
fn semidirect_words() {
    let o = hnn(&["eq", "--preset", "p2", "2", "t x1 t^-1", "y1 x1 y1^-1"]);
    assert_eq!(o.status.code(), Some(1), "t pushes right through phi^-1");
    let o = hnn(&["eq", "--preset", "p2", "2", "t^-1 x1 t", "y1 x1 y1^-1"]);
    assert_eq!(o.status.code(), Some(0));
    let o = hnn(&["nf", "--preset", "p2", "2", "x1 t"]);
    assert_eq!(stdout(&o).trim(), "x1 t");
}

#[test]
fn parse_errors_exit_2() {
    assert_eq!(hnn(&["nf", "--preset", "gn", "3", "x9"]).status.code(), Some(2));
    assert_eq!(hnn(&["nf", "--preset", "zz", "3", "x1"]).status.code(), Some(2));
    assert_eq!(hnn(&["nf", "x1"]).status.code(), Some(2));
    assert_eq!(hnn(&["braid-phi", "--preset", "gn", "3", "x1"]).status.code(), Some(2));
}

#[test]
fn rules_listing() {
    let o = hnn(&["rules", "--preset", "gn", "4", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["count"], 36);
}

#[test]
fn confluence_of_files() {
    let ok = presentation("general.hnn");
    let bad = presentation("nested.hnn");
    let o = hnn(&["confluence", "--file", &ok, "--random", "--trials", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = hnn(&["confluence", "--file", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("NOT confluent"));
}

#[test]
fn braid_freeness_refutation() {
    let o = hnn(&["braid-check-free", "--preset", "p2", "3", "--w", "y1 x1", "--w", "x2"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("refuted"));
    assert!(out.contains("[y1 x1, t]"));
}

#[test]
fn braid_freeness_with_oracle() {
    let o = hnn(&[
        "braid-check-free", "--preset", "p2", "3", "--w", "x1", "--w", "x2", "--oracle", "--syllables", "4", "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "certified");
    assert_eq!(v["oracle"]["verdict"], "pass");
}

#[test]
fn lax_mode_is_conditional() {
    let o = hnn(&["braid-check-free", "--preset", "p2", "3", "--w", "x1 x2 x2^-1", "--w", "x2", "--lax", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["conditional"], true);
}

#[test]
fn pingpong_certificates() {
    let base = ["pingpong-certify", "--preset", "gn", "3", "--spec", "A = x1 @ x1", "--spec", "B = x2 @ x2"];
    let o = hnn(&[&base[..], &["--orbit", "A = x1", "--orbit", "B = x2"]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = hnn(&base);
    assert_eq!(o.status.code(), Some(3), "no intersection evidence");
    let o = hnn(&["pingpong-certify", "--preset", "gn", "3", "--spec", "A = x1 @ x1", "--spec", "B = x1 @ x1"]);
    assert_eq!(o.status.code(), Some(1), "overlapping supports");
}

#[test]
fn pingpong_oracle_and_danilevich() {
    let o = hnn(&["pingpong-oracle", "--preset", "p2", "2", "--spec", "A = x1", "--spec", "T = t", "--syllables", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let o = hnn(&["danilevich", "--preset", "p2", "3", "--h", "y1 x1", "--syllables", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("witness"));
}

#[test]
fn braid_phi_round_trip() {
    let o = hnn(&["braid-phi", "--preset", "p2", "3", "x1"]);
    assert_eq!(stdout(&o).trim(), "y1 x1 y1^-1");
    let o = hnn(&["braid-phi", "--preset", "p2", "3", "--power", "-1", "y1 x1 y1^-1"]);
    assert_eq!(stdout(&o).trim(), "x1");
}

#[test]
fn braid_verify_small_case() {
    let o = hnn(&["braid-verify", "--preset", "p2", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
