use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn treecut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treecut")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn slot_args<'a>(cmd: &'a str, thesaurus: &'a str, triples: &'a str) -> Vec<&'a str> {
    vec![cmd, "--thesaurus", thesaurus, "--triples", triples, "--head", "fly", "--slot", "arg1"]
}

#[test]
fn generalize_fly() {
    let (th, tr) = (fixture("animal.txt"), fixture("fly.tsv"));
    let o = treecut(&slot_args("generalize", th.to_str().unwrap(), tr.to_str().unwrap()));
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<String> = stdout(&o).lines().filter(|l| !l.starts_with('#')).skip(1).map(str::to_string).collect();
    assert_eq!(rows, ["BIRD\t0.8\tbird,crow,eagle", "INSECT\t0.2\tbee"]);
}

#[test]
fn generalize_threshold_filters() {
    let (th, tr) = (fixture("animal.txt"), fixture("fly.tsv"));
    let mut args = slot_args("generalize", th.to_str().unwrap(), tr.to_str().unwrap());
    args.extend(["--threshold", "0.9"]);
    let o = treecut(&args);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| !l.starts_with('#')).count(), 1, "only the header row remains");

    args.truncate(args.len() - 1);
    args.push("0.5");
    let rows: Vec<String> = stdout(&treecut(&args))
        .lines()
        .filter(|l| l.starts_with("BIRD") || l.starts_with("INSECT"))
        .map(str::to_string)
        .collect();
    assert_eq!(rows, ["BIRD\t0.8\tbird,crow,eagle"]);
}

#[test]
fn generalize_structured_output() {
    let (th, tr) = (fixture("animal.txt"), fixture("fly.tsv"));
    let mut args = slot_args("generalize", th.to_str().unwrap(), tr.to_str().unwrap());
    args.extend(["--format", "structured"]);
    let o = treecut(&args);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["cut"], serde_json::json!(["BIRD", "INSECT"]));
    assert_eq!(v["entries"][0]["label"], "BIRD");
    assert_eq!(v["entries"][0]["probability"], 0.8);
    // Deterministic.
    assert_eq!(stdout(&treecut(&args)), stdout(&o));
}

#[test]
fn missing_file_exits_2() {
    let th = fixture("animal.txt");
    let o = treecut(&slot_args("generalize", th.to_str().unwrap(), "/nonexistent/triples.tsv"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonexistent"));
}

#[test]
fn malformed_thesaurus_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "ROOT\n\t\t\tdeep\n").unwrap();
    let tr = fixture("fly.tsv");
    let o = treecut(&slot_args("generalize", bad.to_str().unwrap(), tr.to_str().unwrap()));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_sample_exits_3() {
    let (th, tr) = (fixture("animal.txt"), fixture("fly.tsv"));
    let o = treecut(&[
        "generalize",
        "--thesaurus",
        th.to_str().unwrap(),
        "--triples",
        tr.to_str().unwrap(),
        "--head",
        "walk",
        "--slot",
        "arg1",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(treecut(&["generalize"]).status.code(), Some(2));
    assert_eq!(treecut(&["frobnicate"]).status.code(), Some(2));
    let help = treecut(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("Exit codes"));
}

#[test]
fn lengths_table() {
    let (th, tr) = (fixture("animal.txt"), fixture("fly.tsv"));
    let o = treecut(&slot_args("lengths", th.to_str().unwrap(), tr.to_str().unwrap()));
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().filter(|l| l.starts_with('[')).map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 5);
    let l_prime: Vec<&str> = rows.iter().map(|r| r[3]).collect();
    assert_eq!(l_prime, ["28.07", "28.05", "28.20", "29.03", "29.19"]);
    let best: Vec<&str> = rows.iter().filter(|r| r[5] == "*").map(|r| r[0]).collect();
    assert_eq!(best, ["[BIRD, INSECT]"]);
}

#[test]
fn lengths_single_leaf() {
    let dir = tempfile::tempdir().unwrap();
    let th = dir.path().join("one.txt");
    std::fs::write(&th, "bird\n").unwrap();
    let tr = fixture("fly.tsv");
    let o = treecut(&slot_args("lengths", th.to_str().unwrap(), tr.to_str().unwrap()));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with('[')).count(), 1);
}

#[test]
fn lengths_enumeration_limit_exits_4() {
    let (th, tr) = (fixture("animal.txt"), fixture("fly.tsv"));
    let mut args = slot_args("lengths", th.to_str().unwrap(), tr.to_str().unwrap());
    args.extend(["--enum-limit", "4"]);
    let o = treecut(&args);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("5 cuts"));
}

fn ppattach(extra: &[&str]) -> Output {
    let (th, tr, te) = (fixture("animal.txt"), fixture("train.tsv"), fixture("pp.tsv"));
    let mut args = vec![
        "ppattach",
        "--thesaurus",
        th.to_str().unwrap(),
        "--triples",
        tr.to_str().unwrap(),
        "--test",
        te.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    treecut(&args)
}

fn coverage(o: &Output, strategy: &str) -> String {
    stdout(o)
        .lines()
        .find(|l| l.split('\t').next() == Some(strategy))
        .map(|l| l.split('\t').nth(1).unwrap().to_string())
        .expect("strategy row")
}

#[test]
fn ppattach_strategies() {
    let o = ppattach(&["--strategy", "default"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(coverage(&o, "default"), "100.0");
    let o = ppattach(&["--strategy", "combined"]);
    assert_eq!(coverage(&o, "combined"), "100.0");
    let o = ppattach(&["--strategy", "mdl"]);
    assert_eq!(coverage(&o, "mdl"), "75.0");
    let all = ppattach(&[]);
    assert_eq!(stdout(&all).lines().count(), 8);
}

#[test]
fn ppattach_verbose_lists_decisions() {
    let o = ppattach(&["--strategy", "combined", "--verbose"]);
    let text = stdout(&o);
    assert!(text.contains("combined\tfly\tcloud\targ1\tzebra\tnoun\tdefault"));
    assert!(text.contains("combined\tfly\tswarm\targ1\tswallow\tverb\tmdl"));
}

#[test]
fn ppattach_unknown_strategy_exits_5() {
    assert_eq!(ppattach(&["--strategy", "oracle"]).status.code(), Some(5));
}

#[test]
fn ppattach_untagged_training_exits_2() {
    let (th, te) = (fixture("animal.txt"), fixture("pp.tsv"));
    let tr = fixture("fly.tsv");
    let o = treecut(&[
        "ppattach",
        "--thesaurus",
        th.to_str().unwrap(),
        "--triples",
        tr.to_str().unwrap(),
        "--test",
        te.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

fn synth(dir: &Path, tag: &str, seed: &str, extra: &[&str]) -> (String, String, String) {
    let paths = [dir.join(format!("{tag}.th")), dir.join(format!("{tag}.tr")), dir.join(format!("{tag}.te"))];
    let mut args = vec![
        "synth",
        "--thesaurus",
        paths[0].to_str().unwrap(),
        "--triples",
        paths[1].to_str().unwrap(),
        "--test",
        paths[2].to_str().unwrap(),
        "--seed",
        seed,
    ];
    args.extend_from_slice(extra);
    let o = treecut(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let read = |p: &PathBuf| std::fs::read_to_string(p).unwrap();
    (read(&paths[0]), read(&paths[1]), read(&paths[2]))
}

#[test]
fn synth_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = synth(dir.path(), "a", "5", &[]);
    let b = synth(dir.path(), "b", "5", &[]);
    assert_eq!(a, b);
    let c = synth(dir.path(), "c", "6", &[]);
    assert_ne!(a.1, c.1);
    assert_ne!(a.2, c.2);
}

#[test]
fn synth_size_zero_writes_headers_only() {
    let dir = tempfile::tempdir().unwrap();
    let (_, train, test) = synth(dir.path(), "z", "1", &["--train-size", "0", "--test-size", "0"]);
    assert_eq!(train.lines().count(), 1);
    assert!(train.starts_with('#'));
    assert_eq!(test.lines().count(), 1);
    assert!(test.starts_with('#'));
}

#[test]
fn synth_output_feeds_ppattach() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "s", "2", &["--train-size", "500", "--test-size", "50"]);
    let p = |ext: &str| dir.path().join(format!("s.{ext}"));
    let o = treecut(&[
        "ppattach",
        "--thesaurus",
        p("th").to_str().unwrap(),
        "--triples",
        p("tr").to_str().unwrap(),
        "--test",
        p("te").to_str().unwrap(),
        "--format",
        "structured",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 7);
    for row in rows {
        assert_eq!(row["n_total"], 50);
        let name = row["strategy"].as_str().unwrap();
        if ["default", "combined", "combined2"].contains(&name) {
            assert_eq!(row["coverage"], 100.0);
        }
    }
}
