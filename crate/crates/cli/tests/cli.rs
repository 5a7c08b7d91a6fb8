use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsc"))
        .args(args)
        .env_remove("GSC_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn simulate(dir: &Path, seed: &str) -> [String; 3] {
    let out = gsc(&[
        "simulate",
        "two-region",
        "--seed",
        seed,
        "--out",
        dir.to_str().unwrap(),
    ]);
    json(&out);
    ["genome.txt", "a.bed", "b.bed"].map(|f| dir.join(f).to_str().unwrap().to_string())
}

#[test]
fn simulate_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = gsc(&[
        "simulate",
        "two-region",
        "--seed",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let v = json(&out);
    assert_eq!(v["seed"], 4);
    assert_eq!(v["result"]["length"], 20000);
    assert_eq!(v["result"]["truth"], serde_json::json!([0, 10000, 20000]));
    for f in ["a.bed", "b.bed", "genome.txt", "truth.txt", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert_eq!(
        fs::read_to_string(dir.path().join("genome.txt")).unwrap(),
        "sim\t20000\n"
    );
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest, v);
}

#[test]
fn simulated_tracks_round_trip_through_subsample() {
    let dir = tempfile::tempdir().unwrap();
    let [g, a, b] = simulate(dir.path(), "9");
    let v = json(&gsc(&[
        "subsample",
        "--genome",
        &g,
        "--a",
        &a,
        "--b",
        &b,
        "--block-length",
        "1000",
        "--replicates",
        "200",
        "--segmentation",
        dir.path().join("truth.txt").to_str().unwrap(),
        "--seed",
        "1",
    ]));
    let r = &v["result"];
    assert_eq!(r["segmentation"], serde_json::json!([0, 10000, 20000]));
    assert_eq!(r["replicates"]["count"], 200);
    let obs = r["observed"].as_f64().unwrap();
    let ci = &r["ci_gaussian"];
    assert!(ci["lower"].as_f64().unwrap() < obs && obs < ci["upper"].as_f64().unwrap());
}

#[test]
fn self_overlap_is_significant() {
    let dir = tempfile::tempdir().unwrap();
    let [g, a, _] = simulate(dir.path(), "2");
    let v = json(&gsc(&[
        "test",
        "--genome",
        &g,
        "--a",
        &a,
        "--b",
        &a,
        "--block-length",
        "1000",
        "--replicates",
        "500",
        "--seed",
        "8",
    ]));
    let t = &v["result"]["test"];
    assert_eq!(t["observed"], 1.0);
    assert!(t["p_value"].as_f64().unwrap() < 0.01);
}

#[test]
fn same_seed_gives_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let [g, a, b] = simulate(dir.path(), "3");
    let run = |threads: &str| {
        let out = gsc(&[
            "test",
            "--genome",
            &g,
            "--a",
            &a,
            "--b",
            &b,
            "--statistic",
            "region-overlap",
            "--block-length",
            "500",
            "--outer-multiplier",
            "4",
            "--replicates",
            "300",
            "--seed",
            "11",
            "--threads",
            threads,
        ]);
        assert!(out.status.success());
        out.stdout
    };
    let first = run("1");
    assert_eq!(first, run("1"));
    assert_eq!(first, run("3"));
}

#[test]
fn missing_seed_is_generated_and_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let [g, a, b] = simulate(dir.path(), "3");
    let args = [
        "subsample",
        "--genome",
        &g,
        "--a",
        &a,
        "--b",
        &b,
        "--block-length",
        "2000",
        "--replicates",
        "50",
    ];
    let v = json(&gsc(&args));
    let seed = v["seed"].as_u64().unwrap().to_string();
    let mut again = args.to_vec();
    again.extend(["--seed", &seed]);
    assert_eq!(json(&gsc(&again)), v);
}

#[test]
fn missing_input_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let [g, a, _] = simulate(dir.path(), "1");
    let out = gsc(&[
        "test",
        "--genome",
        &g,
        "--a",
        &a,
        "--b",
        "/no/such/file.bed",
        "--block-length",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/file.bed"));
}

#[test]
fn unknown_sequence_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let [g, a, _] = simulate(dir.path(), "1");
    let bad = dir.path().join("bad.bed");
    fs::write(&bad, "chrZ\t1\t5\n").unwrap();
    let out = gsc(&[
        "test",
        "--genome",
        &g,
        "--a",
        &a,
        "--b",
        bad.to_str().unwrap(),
        "--block-length",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("chrZ"));
}

#[test]
fn infeasible_block_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let [g, a, b] = simulate(dir.path(), "1");
    let out = gsc(&[
        "test",
        "--genome",
        &g,
        "--a",
        &a,
        "--b",
        &b,
        "--block-length",
        "15000",
        "--no-segmentation",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("15000"));
}

#[test]
fn empty_region_gives_empty_track() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let v = json(&gsc(&[
        "simulate",
        "two-region",
        "--regions",
        "5000:0:10:10:5,5000:0.02:10:10:5",
        "--seed",
        "6",
        "--out",
        d,
    ]));
    assert_eq!(v["result"]["truth"], serde_json::json!([0, 5000, 10000]));
    let a = fs::read_to_string(dir.path().join("a.bed")).unwrap();
    assert!(a
        .lines()
        .all(|l| l.split('\t').nth(1).unwrap().parse::<u64>().unwrap() >= 4900));
    let g = dir.path().join("genome.txt");
    let empty = dir.path().join("empty.bed");
    fs::write(&empty, "").unwrap();
    let v = json(&gsc(&[
        "subsample",
        "--genome",
        g.to_str().unwrap(),
        "--a",
        empty.to_str().unwrap(),
        "--b",
        dir.path().join("b.bed").to_str().unwrap(),
        "--statistic",
        "mean-overlap",
        "--block-length",
        "500",
        "--replicates",
        "50",
        "--no-segmentation",
        "--seed",
        "1",
    ]));
    assert_eq!(v["result"]["observed"], 0.0);
}

#[test]
fn segment_reports_regions() {
    let dir = tempfile::tempdir().unwrap();
    let [g, a, b] = simulate(dir.path(), "21");
    let out = dir.path().join("seg");
    let v = json(&gsc(&[
        "segment",
        "--genome",
        &g,
        "--a",
        &a,
        "--b",
        &b,
        "--min-segment",
        "2000",
        "--threshold-b",
        "20",
        "--block-length",
        "1000",
        "--out",
        out.to_str().unwrap(),
    ]));
    let cuts = v["result"]["cuts"].as_array().unwrap();
    assert_eq!(cuts.first().unwrap(), 0);
    assert_eq!(cuts.last().unwrap(), 20000);
    assert_eq!(
        v["result"]["regions"].as_array().unwrap().len(),
        cuts.len() - 1
    );
    assert!(out.join("segmentation.txt").exists());
}

#[test]
fn tsv_output_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let [g, a, b] = simulate(dir.path(), "5");
    let out = gsc(&[
        "select-block-size",
        "--genome",
        &g,
        "--a",
        &a,
        "--b",
        &b,
        "--replicates",
        "100",
        "--grid-steps",
        "4",
        "--no-segmentation",
        "--seed",
        "2",
        "--format",
        "tsv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| l.split('\t').count() == 2));
    assert!(text.lines().any(|l| l.starts_with("result.chosen\t")));
}

#[test]
fn quick_reproduce_emits_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = gsc(&[
        "reproduce",
        "size",
        "--quick",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let v = json(&out);
    assert_eq!(v["study"], "size");
    assert!(!v["checks"].as_array().unwrap().is_empty());
    assert!(dir.path().join("size.json").exists());
    assert!(dir.path().join("size_histograms.tsv").exists());
}
