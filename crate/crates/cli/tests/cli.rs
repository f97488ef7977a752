use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use betagos_cli::manifest::{sha256_hex, RunManifest};

fn betagos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_betagos"))
        .args(args)
        .env_remove("BETAGOS_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn manifest(dir: &Path) -> RunManifest {
    RunManifest::load(&dir.join("manifest.json")).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(code(&betagos(&["frobnicate"])), 2);
    assert_eq!(code(&betagos(&["simulate", "--kind", "nope"])), 2);
    assert_eq!(code(&betagos(&["--help"])), 0);
}

#[test]
fn missing_input_file_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = betagos(&["fit", "--input", "/definitely/not/here.csv", "--out-dir", s(dir.path())]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn invalid_parameters_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = s(dir.path());
    assert_eq!(code(&betagos(&["simulate", "--kind", "mixture", "--weights", "0.5,0.6", "--out-dir", d])), 2);
    assert_eq!(code(&betagos(&["moments", "--schedule", "const:0,1", "--out-dir", d])), 2);
    assert_eq!(code(&betagos(&["simulate", "--kind", "dp", "--n", "0", "--out-dir", d])), 2);
}

#[test]
fn malformed_csv_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("y.csv");
    fs::write(&input, "y\n0.1\n0.2\nabc\n0.4\n").unwrap();
    let out = betagos(&["fit", "--input", s(&input), "--out-dir", s(dir.path()), "--iters", "20", "--burnin", "0", "--thin", "1"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn simulate_then_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let fit = dir.path().join("fit");
    let out = betagos(&["--seed", "7", "--out-dir", s(&sim), "simulate", "--kind", "hmm-two-regime", "--n", "60"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let data = sim.join("replicate_0000.csv");
    let out = betagos(&[
        "--seed", "8", "--out-dir", s(&fit), "fit", "--input", s(&data), "--truth", s(&data), "--iters", "400",
        "--burnin", "100", "--thin", "2",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(fit.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["observations"], 60);
    let matched = summary["summary"]["accuracy"]["matched"].as_f64().unwrap();
    assert!(matched > 0.8, "matched accuracy {matched}");
    let partition = fs::read_to_string(fit.join("partition.csv")).unwrap();
    assert_eq!(partition.lines().count(), 61);

    let m = manifest(&fit);
    assert_eq!(m.subcommand, "fit");
    assert_eq!(m.seed, 8);
    assert_eq!(m.inputs.len(), 2);
    assert_eq!(m.inputs[0].sha256, sha256_hex(&fs::read(&data).unwrap()));
    for f in &m.outputs {
        assert_eq!(f.sha256, sha256_hex(&fs::read(fit.join(&f.path)).unwrap()), "{}", f.path);
    }
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let d = dir.path().join(name);
        let out = betagos(&["--seed", "3", "--threads", threads, "--out-dir", s(&d), "simulate", "--kind", "betagos", "--replicates", "4"]);
        assert_eq!(code(&out), 0);
        manifest(&d).outputs.iter().map(|f| f.sha256.clone()).collect::<Vec<_>>()
    };
    let a = run("a", "1");
    assert_eq!(a, run("b", "1"));
    assert_eq!(a, run("c", "3"));
}

#[test]
fn sequence_output_uses_one_based_labels() {
    let dir = tempfile::tempdir().unwrap();
    let out = betagos(&["--out-dir", s(dir.path()), "--format", "json", "simulate", "--kind", "sequence", "--n", "30"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("sequence_0000.json")).unwrap()).unwrap();
    let labels: Vec<u64> = v["labels"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(labels[0], 1);
    assert!(labels.iter().enumerate().all(|(i, &c)| c >= 1 && c as usize <= i + 1));
    assert_eq!(v["weights"].as_array().unwrap().len(), 30);
}

#[test]
fn moments_table_has_harmonic_mean() {
    let dir = tempfile::tempdir().unwrap();
    let out = betagos(&["--out-dir", s(dir.path()), "moments", "--schedule", "theta:1", "--n", "10", "--limits"]);
    assert_eq!(code(&out), 0);
    let mut rdr = csv::Reader::from_path(dir.path().join("moments.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "expected_k").unwrap();
    let row = rdr.records().next().unwrap().unwrap();
    let ek: f64 = row[col].parse().unwrap();
    let h11: f64 = (1..=11).map(|j| 1.0 / j as f64).sum();
    assert!((ek - h11).abs() < 1e-12);
    assert!(dir.path().join("limits.json").exists());
}

#[test]
fn call_writes_regions_for_each_sample() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("samples.csv");
    let mut text = String::from("sample_id,clone_id,chromosome,kb_start,kb_end,log2_ratio\n");
    for sample in ["A", "B"] {
        for i in 0..40 {
            let shift = if (15..25).contains(&i) { 0.8 } else { 0.0 };
            let noise = ((i * 37 % 11) as f64 - 5.0) * 0.01;
            text.push_str(&format!("{sample},c{i},1,{},{},{}\n", i * 100, i * 100 + 50, shift + noise));
        }
    }
    fs::write(&input, text).unwrap();
    let out = betagos(&["--out-dir", s(dir.path()), "call", "--input", s(&input), "--iters", "600", "--burnin", "200", "--thin", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("regions.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let sig = headers.iter().position(|h| h == "significant").unwrap();
    let first = headers.iter().position(|h| h == "first_clone").unwrap();
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    for sample in ["A", "B"] {
        assert!(rows.iter().any(|r| &r[0] == sample && &r[sig] == "true" && &r[first] == "c15"), "{rows:?}");
    }
    let freq = fs::read_to_string(dir.path().join("frequency.csv")).unwrap();
    assert_eq!(freq.lines().count(), 41);
}

#[test]
fn tiny_benchmark_and_manifest_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = betagos(&[
        "--seed", "5", "--out-dir", s(dir.path()), "benchmark", "--generators", "mixture", "--replicates", "1",
        "--n", "30", "--iters", "200", "--burnin", "50", "--thin", "1",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("benchmark.json")).unwrap()).unwrap();
    assert_eq!(report["cells"].as_array().unwrap().len(), 2);
    let m = manifest(dir.path());
    assert_eq!(m.subcommand, "benchmark");
    assert_eq!(m.substreams.iter().filter(|s| s.label.starts_with("chain/")).count(), 2);
    // Re-running the recorded argv reproduces every output byte for byte.
    let again = dir.path().join("again");
    let mut argv: Vec<&str> = m.argv[1..].iter().map(String::as_str).collect();
    let pos = argv.iter().position(|a| *a == "--out-dir").unwrap();
    argv[pos + 1] = s(&again);
    assert_eq!(code(&betagos(&argv)), 0);
    let digests = |m: &RunManifest| m.outputs.iter().map(|f| f.sha256.clone()).collect::<Vec<_>>();
    assert_eq!(digests(&m), digests(&manifest(&again)));
}

#[test]
fn thread_count_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_betagos"))
        .args(["--out-dir", s(dir.path()), "simulate", "--kind", "dp"])
        .env("BETAGOS_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(manifest(dir.path()).config["threads"], 2);
}
