use std::path::{Path, PathBuf};

use kex_cli::run;
use serde_json::Value;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn kex(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("kex").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(text: &str) -> Value {
    serde_json::from_str(text.trim()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SEVEN_CYCLE: &str = r#"{"n":7,"altruists":[],"arcs":[[0,1],[1,2],[2,3],[3,4],[4,5],[5,6],[6,0]],"l_p":0,"l_c":7,"t":3}"#;

#[test]
fn solve_reports_yes_with_stats() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "c7.json", SEVEN_CYCLE);
    let o = kex(&["solve", s(&inst)]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v = json(&o.stdout);
    assert_eq!(v["answer"], "yes");
    assert_eq!(v["stats"]["mode"], "deterministic");
    assert_eq!(v["stats"]["variant"], "corrected");
    assert_eq!(v["stats"]["seed"], Value::Null);
    assert_eq!(v["stats"]["t_star"], 7);
    assert_eq!(v["solution"]["cycles"][0].as_array().unwrap().len(), 7);
}

#[test]
fn solve_no_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "c7.json", SEVEN_CYCLE);
    let o = kex(&["solve", s(&inst), "--target", "8"]);
    assert_eq!(o.code, 1);
    let v = json(&o.stdout);
    assert_eq!(v["answer"], "no");
    assert_eq!(v["solution"], Value::Null);
}

#[test]
fn solve_maximize_reports_t_star() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "c7.json", SEVEN_CYCLE);
    let o = kex(&[
        "solve",
        s(&inst),
        "--maximize",
        "--mode",
        "randomized",
        "--seed",
        "5",
    ]);
    assert_eq!(o.code, 0);
    let v = json(&o.stdout);
    assert_eq!(v["answer"], 7);
    assert_eq!(v["stats"]["seed"], 5);
}

#[test]
fn randomized_without_seed_logs_one() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "c7.json", SEVEN_CYCLE);
    let o = kex(&["solve", s(&inst), "--mode", "randomized"]);
    assert!(json(&o.stdout)["stats"]["seed"].is_u64());
}

#[test]
fn timeout_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "c7.json", SEVEN_CYCLE);
    let o = kex(&[
        "solve",
        s(&inst),
        "--mode",
        "randomized",
        "--seed",
        "1",
        "--timeout-ms",
        "0",
    ]);
    assert_eq!(o.code, 3);
    assert!(o.stderr.contains("error"));
}

#[test]
fn palette_cap_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "c7.json", SEVEN_CYCLE);
    let o = kex(&["solve", s(&inst), "--k-max", "1"]);
    assert_eq!(o.code, 3, "{}", o.stderr);
}

#[test]
fn malformed_instance_exits_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "bad.json", "{\"n\": 3,\n \"arcs\": [[0,1],]}");
    let o = kex(&["solve", s(&inst)]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("line 2"), "{}", o.stderr);
}

#[test]
fn invalid_instance_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "loop.json",
        r#"{"n":2,"altruists":[],"arcs":[[0,0]],"l_p":0,"l_c":2,"t":1}"#,
    );
    assert_eq!(kex(&["solve", s(&inst)]).code, 2);
}

#[test]
fn unknown_flag_exits_two() {
    assert_eq!(kex(&["solve", "--bogus"]).code, 2);
}

#[test]
fn help_and_version_exit_zero() {
    let o = kex(&["--help"]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.contains("solve"));
    assert_eq!(kex(&["--version"]).code, 0);
}

#[test]
fn verify_accepts_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "c7.json", SEVEN_CYCLE);
    let good = write(
        dir.path(),
        "good.json",
        r#"{"chains":[],"cycles":[[2,3,4,5,6,0,1]]}"#,
    );
    let o = kex(&["verify", s(&inst), s(&good)]);
    assert_eq!(o.code, 0);
    assert_eq!(json(&o.stdout)["covered"], 7);

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"chains":[],"cycles":[[0,1,2],[2,3]]}"#,
    );
    let o = kex(&["verify", s(&inst), s(&bad)]);
    assert_eq!(o.code, 1);
    assert_eq!(json(&o.stdout)["valid"], false);
    assert!(!o.stderr.is_empty());
}

#[test]
fn oracle_agrees_and_caps() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "c7.json", SEVEN_CYCLE);
    let o = kex(&["oracle", s(&inst)]);
    assert_eq!(o.code, 0);
    assert_eq!(json(&o.stdout)["t_star"], 7);
    assert_eq!(kex(&["oracle", s(&inst), "--max-vertices", "5"]).code, 3);
}

#[test]
fn planted_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.json");
    let o = kex(&[
        "gen",
        "plant",
        "--chains",
        "2,1",
        "--cycles",
        "3",
        "--noise",
        "5",
        "--seed",
        "4",
        "--solution-out",
        s(&sol),
    ]);
    assert_eq!(o.code, 0);
    let inst = write(dir.path(), "inst.json", &o.stdout);
    let v = kex(&["verify", s(&inst), s(&sol)]);
    assert_eq!(v.code, 0);
    assert_eq!(json(&v.stdout)["covered"], 6);
    let solved = kex(&["solve", s(&inst)]);
    assert_eq!(solved.code, 0);
}

#[test]
fn gen_random_is_seeded() {
    let args = [
        "gen",
        "random",
        "--n",
        "8",
        "--altruists",
        "2",
        "--arc-prob",
        "0.3",
        "--l-p",
        "3",
        "--l-c",
        "3",
        "--seed",
        "11",
    ];
    let a = kex(&args);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, kex(&args).stdout);
    assert_eq!(json(&a.stdout)["n"], 8);
}

#[test]
fn reduce_binpack_writes_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let side = dir.path().join("side.json");
    let o = kex(&[
        "reduce",
        "binpack-cycles",
        "--weights",
        "1,1,2",
        "--bins",
        "2",
        "--scale",
        "1",
        "--sidecar",
        s(&side),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let inst = write(dir.path(), "inst.json", &o.stdout);
    let side = json(&std::fs::read_to_string(&side).unwrap());
    assert_eq!(side["expected"], "yes");
    assert_eq!(side["certificate_map"]["gadget"], "bin_packing");
    let oracle = kex(&["oracle", s(&inst), "--max-vertices", "64"]);
    let target = json(&o.stdout)["t"].clone();
    assert_eq!(json(&oracle.stdout)["t_star"], target);
}

#[test]
fn reduce_rejects_bad_divisibility() {
    let o = kex(&["reduce", "binpack-paths", "--weights", "1,2", "--bins", "2"]);
    assert_eq!(o.code, 2);
}

#[test]
fn reduce_kpath_and_three_partition() {
    let o = kex(&[
        "reduce", "kpath", "--n", "3", "--arcs", "0-1,1-2", "--k", "3",
    ]);
    assert_eq!(o.code, 0);
    assert_eq!(json(&o.stdout)["t"], 3);
    assert_eq!(
        kex(&["reduce", "kpath", "--n", "3", "--arcs", "0:1", "--k", "2"]).code,
        2
    );

    let dir = tempfile::tempdir().unwrap();
    let side = dir.path().join("side.json");
    let o = kex(&[
        "reduce",
        "3part",
        "--values",
        "1,1,2",
        "--target",
        "3",
        "--sidecar",
        s(&side),
    ]);
    assert_eq!(o.code, 0);
    let side = json(&std::fs::read_to_string(&side).unwrap());
    assert_eq!(side["expected"], "no");
    assert_eq!(side["certificate_map"]["shift"]["constant"], 30);
}

#[test]
fn detect_finds_colorful_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "c7.json", SEVEN_CYCLE);
    let colors = "0,1,2,3,4,5,6";
    let o = kex(&[
        "detect",
        s(&inst),
        "--colors",
        colors,
        "--set",
        "0,1,2,3,4,5,6",
        "--cycle",
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert_eq!(json(&o.stdout)["witness"][0], 0);
    let o = kex(&[
        "detect",
        s(&inst),
        "--colors",
        colors,
        "--set",
        "0,1,2",
        "--cycle",
    ]);
    assert_eq!(o.code, 1);
    assert_eq!(json(&o.stdout)["found"], false);
}

#[test]
fn detect_finds_colorful_chain() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "chain.json",
        r#"{"n":3,"altruists":[0],"arcs":[[0,1],[1,2]],"l_p":2,"l_c":0,"t":2}"#,
    );
    let o = kex(&["detect", s(&inst), "--colors", "0,0,1", "--set", "0,1"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert_eq!(json(&o.stdout)["witness"], serde_json::json!([0, 1, 2]));
}

#[test]
fn family_cache_is_verified() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fam.txt");
    let o = kex(&[
        "family",
        "--n",
        "9",
        "--k",
        "3",
        "--verify",
        "--out",
        s(&path),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("9 3\n"));
    let fam = kex_core::io::read_family_cache(&text).unwrap();
    assert_eq!(kex_core::verify_family(&fam), Ok(()));
}

#[test]
fn bench_emits_one_row_per_instance_and_mode() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite");
    let o = kex(&[
        "gen",
        "suite",
        s(&suite),
        "--targets",
        "4,5",
        "--per-t",
        "2",
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    std::fs::write(suite.join("broken.json"), "not json").unwrap();
    let o = kex(&["bench", s(&suite), "--seed", "2"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(
        lines[0],
        "instance,n,t,mode,colorings_tried,dp_transitions,wall_time_ms,answer,error"
    );
    assert_eq!(lines.len(), 1 + 5 * 3);
    assert!(lines[1].starts_with("broken.json"));
    assert!(lines
        .iter()
        .skip(4)
        .all(|l| !l.ends_with(',') || l.contains(",yes,") || l.contains(",no,")));
}

#[test]
fn bench_on_empty_directory_prints_header() {
    let dir = tempfile::tempdir().unwrap();
    let o = kex(&["bench", s(dir.path())]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout.lines().count(), 1);
}

#[test]
fn seed_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "c7.json", SEVEN_CYCLE);
    std::env::set_var("KEX_SEED", "42");
    let o = kex(&["solve", s(&inst), "--mode", "randomized"]);
    std::env::remove_var("KEX_SEED");
    assert_eq!(json(&o.stdout)["stats"]["seed"], 42);
}
