use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dagpost::formats::{EdgeMatrixRecord, EstimateRecord};
use tempfile::TempDir;

const TOY: &str = "Rain,Sprinkler,Wet\n\
yes,no,yes\nno,yes,yes\nno,no,no\nyes,no,yes\nno,no,no\nno,yes,yes\nyes,yes,yes\nno,no,no\n\
no,no,yes\nyes,no,yes\nno,yes,no\nno,no,no\nyes,no,yes\nno,yes,yes\nno,no,no\nyes,no,no\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dagpost"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn shuffled_toy() -> String {
    let mut lines: Vec<&str> = TOY.lines().collect();
    let header = lines.remove(0);
    lines.reverse();
    lines.swap(0, 5);
    format!("{header}\n{}\n", lines.join("\n"))
}

#[test]
fn exact_edges_shape_determinism_and_row_order() {
    let d = TempDir::new().unwrap();
    let data = write(d.path(), "toy.csv", TOY);
    let shuffled = write(d.path(), "shuffled.csv", &shuffled_toy());
    let (a, b, c) = (d.path().join("a.json"), d.path().join("b.json"), d.path().join("c.json"));
    ok(&["exact-edges", "--data", s(&data), "--max-indegree", "2", "--out", s(&a)]);
    ok(&["exact-edges", "--data", s(&data), "--max-indegree", "2", "--out", s(&b)]);
    ok(&["exact-edges", "--data", s(&shuffled), "--max-indegree", "2", "--out", s(&c)]);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let rec: EdgeMatrixRecord = serde_json::from_str(&text).unwrap();
    assert_eq!(rec.p_edge.len(), 3);
    for i in 0..3 {
        assert_eq!(rec.p_edge[i].len(), 3);
        assert_eq!(rec.p_edge[i][i], 0.0);
    }
    let other: EdgeMatrixRecord = serde_json::from_str(&fs::read_to_string(&c).unwrap()).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!((rec.p_edge[i][j] - other.p_edge[i][j]).abs() < 1e-12);
        }
    }
}

#[test]
fn dds_is_reproducible_across_workers_and_cache() {
    let d = TempDir::new().unwrap();
    let data = write(d.path(), "toy.csv", TOY);
    let base = ["dds", "--data", s(&data), "--samples", "3000", "--seed", "5"];
    let runs: Vec<Vec<u8>> = [
        vec!["--workers", "1"],
        vec!["--workers", "3"],
        vec!["--cache-capacity", "0"],
        vec!["--cache-capacity", "3"],
    ]
    .iter()
    .map(|extra| {
        let args: Vec<&str> = base.iter().copied().chain(extra.iter().copied()).collect();
        ok(&args).stdout
    })
    .collect();
    assert_eq!(String::from_utf8_lossy(&runs[0]).lines().count(), 3000);
    for r in &runs[1..] {
        assert_eq!(r, &runs[0]);
    }
    let summary = d.path().join("summary.json");
    ok(&["dds", "--data", s(&data), "--samples", "200", "--summary", s(&summary), "--out", s(&d.path().join("x.jsonl"))]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    for key in ["dp", "orders", "dags", "total"] {
        assert!(v["timings"][key].as_f64().unwrap() >= 0.0);
    }
    assert_eq!(v["n_samples"], 200);
}

#[test]
fn iwdds_and_estimate_agree() {
    let d = TempDir::new().unwrap();
    let data = write(d.path(), "toy.csv", TOY);
    let dump = d.path().join("samples.jsonl");
    let feats = ["--feature", "edge(Rain,Wet)", "--feature", "path(Rain,Wet) & !path(Sprinkler,Wet)"];
    let mut a: Vec<&str> = vec!["iwdds", "--data", s(&data), "--samples", "500", "--seed", "9"];
    a.extend(feats);
    let iw: Vec<EstimateRecord> = serde_json::from_slice(&ok(&a).stdout).unwrap();
    ok(&["dds", "--data", s(&data), "--samples", "500", "--seed", "9", "--out", s(&dump)]);
    let mut b: Vec<&str> = vec!["estimate", "--data", s(&data), "--samples-file", s(&dump)];
    b.extend(feats);
    let est: Vec<EstimateRecord> = serde_json::from_slice(&ok(&b).stdout).unwrap();
    assert_eq!(iw.len(), 2);
    assert_eq!(iw[0].feature, "edge(Rain,Wet)");
    for (x, y) in iw.iter().zip(&est) {
        assert_eq!(x.value, y.value);
        assert_eq!(x.delta, y.delta);
        let [lo, hi] = x.interval.unwrap();
        assert!(lo <= hi && (hi - lo - (1.0 - x.delta.unwrap())).abs() < 1e-12);
        assert_eq!(x.n_samples, 500);
        assert_eq!(x.seed, Some(9));
    }
    // the oracle's exact value sits inside the interval
    let o: serde_json::Value =
        serde_json::from_slice(&ok(&["oracle", "--data", s(&data), "--feature", "edge(Rain,Wet)"]).stdout).unwrap();
    let exact = o["features"][0]["structure_modular"].as_f64().unwrap();
    let [lo, hi] = iw[0].interval.unwrap();
    assert!(lo - 1e-9 <= exact && exact <= hi + 1e-9);
}

#[test]
fn score_cache_is_reused() {
    let d = TempDir::new().unwrap();
    let data = write(d.path(), "toy.csv", TOY);
    let cache = d.path().join("scores.json");
    ok(&["score-dump", "--data", s(&data), "--score", "k2", "--out", s(&cache)]);
    let dumped = fs::read_to_string(&cache).unwrap();
    let direct = ok(&["exact-edges", "--data", s(&data), "--score", "k2"]).stdout;
    let cached = ok(&["exact-edges", "--data", s(&data), "--score", "k2", "--score-cache", s(&cache)]).stdout;
    assert_eq!(direct, cached);
    assert_eq!(fs::read_to_string(&cache).unwrap(), dumped);
    // a different configuration refreshes the cache file
    ok(&["exact-edges", "--data", s(&data), "--score", "bdeu", "--ess", "3", "--score-cache", s(&cache)]);
    assert_ne!(fs::read_to_string(&cache).unwrap(), dumped);
}

#[test]
fn validate_writes_json_and_csv() {
    let d = TempDir::new().unwrap();
    let data = write(d.path(), "toy.csv", TOY);
    let (out, csv) = (d.path().join("r.json"), d.path().join("r.csv"));
    ok(&["validate", "--data", s(&data), "--kind", "sampling", "--samples", "20000", "--threshold", "0.05", "--out", s(&out), "--csv", s(&csv)]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["metric"], "total_variation");
    assert!(fs::read_to_string(&csv).unwrap().starts_with("metric,index,value\n"));
    let h = ok(&["validate", "--data", s(&data), "--repetitions", "5", "--epsilon", "0.1", "--delta", "0.1"]).stdout;
    let v: serde_json::Value = serde_json::from_slice(&h).unwrap();
    assert_eq!(v["samples_per_run"], 150);
    assert_eq!(v["edges"].as_array().unwrap().len(), 6);
}

#[test]
fn exit_codes() {
    let d = TempDir::new().unwrap();
    let data = write(d.path(), "toy.csv", TOY);
    let wide = write(
        d.path(),
        "wide.csv",
        "A,B,C,D,E,F,G\n0,1,0,1,0,1,0\n1,0,1,0,1,0,1\n0,0,1,1,0,0,1\n",
    );
    let ragged = write(d.path(), "ragged.csv", "A,B\n1,2\n1\n");
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["dds", "--data", s(&data), "--bogus"]), 2);
    assert_eq!(code(&["dds", "--data", s(&data), "--samples", "0"]), 2);
    assert_eq!(code(&["dds", "--data", s(&data), "--ess", "-1"]), 2);
    assert_eq!(code(&["dds", "--data", s(&data), "--max-indegree", "3"]), 2);
    assert_eq!(code(&["iwdds", "--data", s(&data), "--feature", "edge(Rain,Rain)"]), 2);
    assert_eq!(code(&["iwdds", "--data", s(&data), "--feature", "edge(Rain,Snow)"]), 2);
    assert_eq!(code(&["oracle", "--data", s(&wide)]), 3);
    assert_eq!(code(&["exact-edges", "--data", s(&data), "--max-variables", "2"]), 3);
    assert_eq!(code(&["exact-edges", "--data", s(&d.path().join("missing.csv"))]), 4);
    assert_eq!(code(&["exact-edges", "--data", s(&ragged)]), 4);
    assert_eq!(code(&["--help"]), 0);
    let err = String::from_utf8(run(&["oracle", "--data", s(&wide)]).stderr).unwrap();
    assert!(err.contains("limited to 6"), "{err}");
}
