use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fieldnorm::corpus::{worked_example, ArticleSet, Corpus, FieldYearKey, WORLD};
use fieldnorm::report::read_csv;
use fieldnorm::Indicator;

fn fieldnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fieldnorm")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = fieldnorm(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_corpus(dir: &Path, corpus: &Corpus) -> PathBuf {
    let d = dir.join("corpus");
    corpus.write(&d).unwrap();
    d
}

fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn compute_worked_example() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_corpus(tmp.path(), &worked_example());
    let out = tmp.path().join("r.csv");
    let stdout = ok(&["compute", "--input-dir", p(&input), "--indicators", "mnlcs", "--ci", "formula", "--output", p(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("\nGROUP,ALL,10,MNLCS,1.08952,"), "{text}");
    assert!(text.contains("\nWORLD,ALL,20,MNLCS,1.00000,"), "{text}");
    assert!(stdout.lines().any(|l| l.starts_with("GROUP (n=10): MNLCS 1.08952")), "{stdout}");
    assert!(stdout.lines().any(|l| l.starts_with("WORLD")));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("r.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["alpha"], 0.05);
    assert_eq!(meta["percentile"], "nearest-rank");
}

#[test]
fn undefined_mnpc_is_not_fatal() {
    let tmp = tempfile::tempdir().unwrap();
    let key = |f: &str| FieldYearKey::new(f, 2016).unwrap();
    let corpus = Corpus::from_sets([
        ArticleSet::new(WORLD, key("A"), vec![0, 0, 0]).unwrap(),
        ArticleSet::new(WORLD, key("B"), vec![1, 0, 3]).unwrap(),
        ArticleSet::new("G", key("A"), vec![2, 0]).unwrap(),
        ArticleSet::new("G", key("B"), vec![0, 1]).unwrap(),
    ])
    .unwrap();
    let input = write_corpus(tmp.path(), &corpus);
    let out = tmp.path().join("r.csv");
    ok(&["compute", "--input-dir", p(&input), "--indicators", "mnpc,emnpc", "--output", p(&out)]);
    let rows = read_csv(&out).unwrap();
    let mnpc = rows.iter().find(|r| r.group == "G" && r.scope == "ALL" && r.indicator == Indicator::Mnpc).unwrap();
    assert!(!mnpc.defined);
    assert!(mnpc.lower.is_none() && mnpc.upper.is_none());
    assert!(mnpc.notes.contains("zero world proportion"));
    let emnpc = rows.iter().find(|r| r.group == "G" && r.scope == "ALL" && r.indicator == Indicator::Emnpc).unwrap();
    assert!(emnpc.defined);
}

#[test]
fn compute_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_corpus(tmp.path(), &worked_example());
    let run = |name: &str| {
        let out = tmp.path().join(name);
        ok(&[
            "compute", "--input-dir", p(&input), "--indicators", "mnlcs,prop", "--ci", "bootstrap",
            "--bootstrap-iters", "400", "--seed", "7", "--output", p(&out),
        ]);
        fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn sample_sizes_and_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let key = FieldYearKey::new("F", 2016).unwrap();
    let corpus = Corpus::from_sets([
        ArticleSet::new(WORLD, key.clone(), (0..10_000).map(|i| i % 7).collect()).unwrap(),
        ArticleSet::new("G", key, (0..300).map(|i| i % 5).collect()).unwrap(),
    ])
    .unwrap();
    let input = write_corpus(tmp.path(), &corpus);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        ok(&["sample", "--input-dir", p(&input), "--sample-size", "500", "--seed", "3", "--output-dir", p(out)]);
    }
    let sampled = Corpus::load(&a).unwrap();
    let k = FieldYearKey::new("F", 2016).unwrap();
    assert_eq!(sampled.world(&k).unwrap().len(), 500);
    assert_eq!(sampled.get("G", &k).unwrap().len(), 300);
    assert_eq!(tree(&a), tree(&b));
}

#[test]
fn simulate_one_scenario_and_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        ok(&["simulate", "--n", "50", "--fields", "X,Y", "--seed", "4", "--output-dir", p(out)]);
    }
    assert_eq!(tree(&a), tree(&b));
    let dirs: Vec<_> = fs::read_dir(&a).unwrap().filter_map(|e| e.ok()).filter(|e| e.path().is_dir()).collect();
    assert_eq!(dirs.len(), 1);
    let corpus = Corpus::load(dirs[0].path()).unwrap();
    assert_eq!(corpus.len(), 4);
    assert!(a.join("scenarios.csv").exists());
}

#[test]
fn simulate_sparse_preset_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("w");
    ok(&["simulate", "--mu", "0.8", "--zero-inflation", "0.98", "--n", "20000", "--output-dir", p(&out)]);
    let corpus = Corpus::load(out.join("scenario_000")).unwrap();
    for cell in corpus.cells() {
        let rate = cell.cited() as f64 / cell.len() as f64;
        assert!((0.01..=0.03).contains(&rate), "{rate}");
    }
}

#[test]
fn compare_ci_single_corpus() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    ok(&["simulate", "--n", "400", "--seed", "2", "--output-dir", p(&sim)]);
    let out = tmp.path().join("cmp.csv");
    let stdout = ok(&[
        "compare-ci", "--input-dir", p(&sim.join("scenario_000")), "--indicators", "mnlcs",
        "--bootstrap-iters", "300", "--output", p(&out),
    ]);
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "source,indicator,count,gaps,lower_avg,upper_avg,lower_abs,upper_abs,lower_max,upper_max");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("GROUP,MNLCS,1,0,"));
    assert!(stdout.contains("GROUP MNLCS: 1 compared"));
    let detail = fs::read_to_string(tmp.path().join("cmp.csv.detail.csv")).unwrap();
    assert_eq!(detail.lines().count(), 2);
}

#[test]
fn compare_ci_grid_and_scenario_tree() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    let grid = ["--mu", "0.5,1.5", "--n", "300", "--seed", "5"];
    let mut args = vec!["simulate"];
    args.extend(grid);
    args.extend(["--output-dir", p(&sim)]);
    ok(&args);

    let from_tree = tmp.path().join("tree.csv");
    ok(&["compare-ci", "--input-dir", p(&sim), "--seed", "5", "--bootstrap-iters", "200", "--output", p(&from_tree)]);
    let from_grid = tmp.path().join("grid.csv");
    let mut args = vec!["compare-ci", "--bootstrap-iters", "200", "--output", p(&from_grid)];
    args.extend(grid);
    ok(&args);
    let a = fs::read_to_string(from_tree).unwrap();
    assert!(a.lines().nth(1).unwrap().starts_with("GROUP,MNLCS,2,0,"), "{a}");
    assert_eq!(a, fs::read_to_string(from_grid).unwrap());
}

#[test]
fn hard_errors_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let out = fieldnorm(&["compute", "--input-dir", p(&tmp.path().join("missing")), "--output", p(&tmp.path().join("r.csv"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing"));

    let bad = tmp.path().join("bad");
    fs::create_dir(&bad).unwrap();
    fs::write(bad.join("G__F__2016.tsv"), "article_id\tcount\na\t1\nb\tx\n").unwrap();
    let out = fieldnorm(&["compute", "--input-dir", p(&bad), "--output", p(&tmp.path().join("r.csv"))]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("G__F__2016.tsv:3"), "{err}");

    let out = fieldnorm(&["compute", "--input-dir", "x", "--output", "y", "--alpha", "0.7"]);
    assert!(!out.status.success());
}
