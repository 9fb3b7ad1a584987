use std::path::PathBuf;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_abelperc");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("ABELPERC_CACHE_DIR").output().expect("spawn abelperc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("abelperc-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

const SMALL: &[&str] = &["--seed", "5", "--trials", "200", "--window", "16"];

#[test]
fn estimate_pc_is_reproducible() {
    let args = [SMALL, &["estimate-pc", "2;", "3; 1,1,-1"]].concat();
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.starts_with("group,key,rank,p_hat,ci,window,trials,method,seed,stream,p_hat_2l,drift\n"));
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn rank_one_gets_the_sentinel() {
    let o = run(&[SMALL, &["estimate-pc", "[Z; 1, 3, 4]"]].concat());
    assert!(o.status.success());
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    assert!(row.contains(",1,1,0,") && row.contains("rank-sentinel"), "{row}");
    assert!(stderr(&o).contains("the critical parameter is constant equal to 1"));
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = scratch("spec");
    let spec = dir.join("bad.spec");
    std::fs::write(&spec, "abelperc-spec 1\nbogus line\n").unwrap();
    let o = run(&["locality", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    let o = run(&["estimate-pc", "[Z; 1, 2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unbalanced"));
}

#[test]
fn fc_check_verdicts() {
    let w = golden("witness.txt");
    let ok = run(&["--seed", "1000003", "fc-check", w.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stderr(&ok).contains("PASS worst"));
    let bad = run(&["--seed", "1000003", "fc-check", "--eta", "0.000001", w.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("FAIL worst"));
}

#[test]
fn distance_reports_both_metrics() {
    let o = run(&["distance", "2;", "2; 0,3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "g,h,k_max,mg_distance,mg_radius,bs_distance,bs_radius\n\"2;\",\"2; 0,3\",6,0.25,2,1,0\n");
}

#[test]
fn cache_hits_reproduce_fresh_output() {
    let dir = scratch("cache");
    let args = [SMALL, &["--cache-dir", dir.to_str().unwrap(), "estimate-pc", "3; 1,1,-1"]].concat();
    let fresh = run(&args);
    assert!(fresh.status.success());
    assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
    let hit = run(&args);
    assert_eq!(fresh.stdout, hit.stdout);
    assert_eq!(run(&[SMALL, &["estimate-pc", "3; 1,1,-1"]].concat()).stdout, fresh.stdout);
}

#[test]
fn renorm_demo_matches_golden() {
    let o = run(&["--seed", "7", "renorm-demo", "--runs", "30"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), std::fs::read_to_string(golden("renorm_demo.txt")).unwrap());
}
