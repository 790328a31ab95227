//! Acceptance gate, binary half: the end-to-end pipeline criterion and the
//! sharded-determinism criterion. Criteria 1 through 7 and 10 live in the
//! core crate's acceptance suite.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_garble")).args(args).output().expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert_eq!(
        out.status.code(),
        Some(0),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn eval_rows(csv: &str) -> Vec<(String, f64, u64, u64)> {
    csv.lines()
        .skip(2)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].to_string(), f[2].parse().unwrap(), f[3].parse().unwrap(), f[4].parse().unwrap())
        })
        .collect()
}

fn evaluate_csv(hyp: &Path, corruption: &Path) -> Vec<(String, f64, u64, u64)> {
    let out = run(&[
        "evaluate",
        "--hyp",
        hyp.to_str().unwrap(),
        "--corruption",
        corruption.to_str().unwrap(),
    ]);
    assert_ok(&out);
    eval_rows(&String::from_utf8_lossy(&out.stdout))
}

#[test]
fn acceptance_8_end_to_end_pipeline() {
    let tmp = TempDir::new().unwrap();

    // Identity leg: zero noise in, identity decode, zero error out.
    let corpus = tmp.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    fs::write(corpus.join("a.txt"), "invoice 4821 total 93.50 euros payment 4821 received")
        .unwrap();
    fs::write(corpus.join("b.txt"), "receipt 7730 total 12.00 euros").unwrap();
    let noisy = tmp.path().join("clean.jsonl");
    assert_ok(&run(&[
        "corrupt",
        "--corpus",
        corpus.to_str().unwrap(),
        "--gamma",
        "0.0",
        "--seed",
        "1",
        "--out",
        noisy.to_str().unwrap(),
    ]));
    let hyp = tmp.path().join("hyp.jsonl");
    assert_ok(&run(&[
        "denoise",
        "--input",
        noisy.to_str().unwrap(),
        "--train",
        corpus.to_str().unwrap(),
        "--gamma",
        "0.0",
        "--out",
        hyp.to_str().unwrap(),
    ]));
    let rows = evaluate_csv(&hyp, &noisy);
    assert_eq!(rows[0].1, 0.0, "identity baseline row: {rows:?}");
    assert_eq!(rows[1].1, 0.0, "identity system row: {rows:?}");

    // Pass-through leg: a hypothesis file that copies the noisy text must
    // score identically to the baseline.
    let noisy2 = tmp.path().join("noisy.jsonl");
    assert_ok(&run(&[
        "corrupt",
        "--corpus",
        corpus.to_str().unwrap(),
        "--epsilon",
        "0.2",
        "--seed",
        "2",
        "--out",
        noisy2.to_str().unwrap(),
    ]));
    let copied = tmp.path().join("copied.jsonl");
    let mut text = String::from("{\"_config\":{\"mode\":\"copy\"}}\n");
    for line in fs::read_to_string(&noisy2).unwrap().lines().skip(1) {
        let rec: Value = serde_json::from_str(line).unwrap();
        text.push_str(
            &serde_json::json!({
                "id": rec["id"], "chunk_index": rec["chunk_index"], "hyp": rec["noisy"]
            })
            .to_string(),
        );
        text.push('\n');
    }
    fs::write(&copied, text).unwrap();
    let rows = evaluate_csv(&copied, &noisy2);
    assert_eq!(rows[0].1, rows[1].1, "pass-through must equal baseline: {rows:?}");
    assert_eq!(rows[0].3, rows[1].3);
    assert!(rows[0].1 > 0.0, "the 20% channel should corrupt something");

    // Analytic leg: 9000/1000 two-word corpus under the 20% two-letter
    // channel. The optimal unigram decoder always answers "a", so its
    // error rate is exactly the mass of "b"; the untreated baseline sits
    // near the flip rate 0.2.
    let two = tmp.path().join("two");
    fs::create_dir(&two).unwrap();
    let mut text = String::new();
    for i in 0..10_000 {
        text.push(if i < 9000 { 'a' } else { 'b' });
        text.push(' ');
    }
    fs::write(two.join("doc.txt"), text.trim_end()).unwrap();

    let model = tmp.path().join("ab.json");
    assert_ok(&run(&[
        "noise",
        "uniform",
        "--alphabet",
        "ab",
        "--epsilon",
        "0.2",
        "--out",
        model.to_str().unwrap(),
    ]));
    let noisy3 = tmp.path().join("two_noisy.jsonl");
    assert_ok(&run(&[
        "corrupt",
        "--corpus",
        two.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--seed",
        "3",
        "--out",
        noisy3.to_str().unwrap(),
    ]));
    let hyp3 = tmp.path().join("two_hyp.jsonl");
    assert_ok(&run(&[
        "denoise",
        "--input",
        noisy3.to_str().unwrap(),
        "--train",
        two.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--out",
        hyp3.to_str().unwrap(),
    ]));
    let rows = evaluate_csv(&hyp3, &noisy3);
    let (baseline, system) = (&rows[0], &rows[1]);
    assert_eq!(baseline.2, 10_000);
    assert_eq!(system.1, 0.1, "always-a decoding errs on exactly the b tokens");
    let n = baseline.2 as f64;
    let sigma =
        (baseline.1 * (1.0 - baseline.1) / n + system.1 * (1.0 - system.1) / n).sqrt();
    let gap_sigmas = (baseline.1 - system.1) / sigma;
    assert!(
        gap_sigmas >= 5.0,
        "baseline {} vs system {}: gap only {gap_sigmas:.1} sigma",
        baseline.1,
        system.1
    );

    println!(
        "ACCEPTANCE 8: PASS - identity pipeline scores 0; pass-through equals baseline; \
         two-word corpus baseline {:.4} vs unigram {:.4}, gap {gap_sigmas:.0} sigma (limit 5)",
        baseline.1, system.1
    );
}

#[test]
fn acceptance_9_sharded_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let corpus = tmp.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    fs::write(corpus.join("a.txt"), "invoice 4821 total 93.50 euros payment 4821 received")
        .unwrap();
    fs::write(corpus.join("b.txt"), "receipt 7730 total 12.00 euros").unwrap();

    let mut outputs: Vec<(String, Vec<u8>)> = Vec::new();
    for shards in ["1", "4", "16"] {
        let path: PathBuf = tmp.path().join(format!("sweep_{shards}.csv"));
        let out = run(&[
            "complexity",
            "--corpus",
            corpus.to_str().unwrap(),
            "--seed",
            "42",
            "--samples",
            "50000",
            "--shards",
            shards,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_ok(&out);
        outputs.push((shards.to_string(), fs::read(&path).unwrap()));
    }
    let reference = &outputs[0].1;
    assert!(reference.len() > 200, "report looks empty");
    for (shards, bytes) in &outputs[1..] {
        assert_eq!(bytes, reference, "{shards} shards changed the bytes");
    }
    println!(
        "ACCEPTANCE 9: PASS - seed 42 sweep identical across 1, 4, and 16 shards ({} bytes)",
        reference.len()
    );
}
