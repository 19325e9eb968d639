use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tcomqa_core::backends::stub::StubServer;

const CORPUS: &str = "Emma will be home soon and she will let Will know\n\
                      The dog barks at the mailman.\n\
                      \n\
                      The tall bartender checked ID.\n";

fn tcomqa(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcomqa"))
        .args(args)
        .current_dir(dir)
        .env_remove("TCOM_ENDPOINT")
        .env_remove("TCOM_MARKERS")
        .env_remove("TCOM_VECTORS")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn setup() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    fs::write(root.join("corpus.txt"), CORPUS).unwrap();
    fs::write(
        root.join("vectors.txt"),
        "4 2\nevery 1 0\neach 1 0\nyear 0 1\ndog 0.6 0.8\n",
    )
    .unwrap();
    (dir, root)
}

#[test]
fn extract_mock_smoke() {
    let (_d, root) = setup();
    let o = tcomqa(
        &root,
        &["extract", "--corpus", "corpus.txt", "--out", "out.jsonl"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("contexts: 3"));
    let lines = fs::read_to_string(root.join("out.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 15);
    assert!(lines.contains(r#""question":"When will Emma be home?","answer":"6 PM""#));
}

#[test]
fn extract_is_byte_identical_across_runs() {
    let (_d, root) = setup();
    for out in ["a.jsonl", "b.jsonl"] {
        let o = tcomqa(
            &root,
            &[
                "extract",
                "--corpus",
                "corpus.txt",
                "--out",
                out,
                "--seed",
                "3",
            ],
        );
        assert_eq!(code(&o), 0);
    }
    assert_eq!(
        fs::read(root.join("a.jsonl")).unwrap(),
        fs::read(root.join("b.jsonl")).unwrap()
    );
}

#[test]
fn extract_usage_errors_exit_one() {
    let (_d, root) = setup();
    let cases: &[&[&str]] = &[
        &[
            "extract",
            "--corpus",
            "corpus.txt",
            "--out",
            "o.jsonl",
            "--validator",
            "semantic",
        ],
        &[
            "extract",
            "--corpus",
            "corpus.txt",
            "--out",
            "o.jsonl",
            "--theta",
            "1.5",
        ],
        &[
            "extract",
            "--corpus",
            "corpus.txt",
            "--out",
            "o.jsonl",
            "--backend",
            "http",
        ],
        &[
            "extract",
            "--corpus",
            "corpus.txt",
            "--out",
            "o.jsonl",
            "--properties",
            "weather",
        ],
        &[
            "extract",
            "--corpus",
            "corpus.txt",
            "--out",
            "o.jsonl",
            "--max-parallel",
            "0",
        ],
        &["extract", "--corpus", "corpus.txt"],
        &["nonsense"],
    ];
    for args in cases {
        let o = tcomqa(&root, args);
        assert_eq!(code(&o), 1, "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert!(!root.join("o.jsonl").exists());
}

#[test]
fn missing_corpus_is_a_runtime_failure() {
    let (_d, root) = setup();
    let o = tcomqa(
        &root,
        &["extract", "--corpus", "nope.txt", "--out", "o.jsonl"],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn help_exits_zero_without_side_effects() {
    let (_d, root) = setup();
    let before: Vec<_> = fs::read_dir(&root).unwrap().collect();
    for sub in ["extract", "validate", "sweep", "evaluate", "report"] {
        let o = tcomqa(&root, &[sub, "--help"]);
        assert_eq!(code(&o), 0, "{sub}");
        assert!(stdout(&o).contains("Usage"));
    }
    assert_eq!(code(&tcomqa(&root, &["--help"])), 0);
    assert_eq!(fs::read_dir(&root).unwrap().count(), before.len());
}

#[test]
fn refuses_to_overwrite_without_force() {
    let (_d, root) = setup();
    fs::write(root.join("out.jsonl"), "keep me").unwrap();
    let o = tcomqa(
        &root,
        &["extract", "--corpus", "corpus.txt", "--out", "out.jsonl"],
    );
    assert_eq!(code(&o), 1);
    assert_eq!(
        fs::read_to_string(root.join("out.jsonl")).unwrap(),
        "keep me"
    );
    let o = tcomqa(
        &root,
        &[
            "extract",
            "--corpus",
            "corpus.txt",
            "--out",
            "out.jsonl",
            "--force",
        ],
    );
    assert_eq!(code(&o), 0);
}

#[test]
fn semantic_extract_records_theta_and_rejects() {
    let (_d, root) = setup();
    let o = tcomqa(
        &root,
        &[
            "extract",
            "--corpus",
            "corpus.txt",
            "--out",
            "out.jsonl",
            "--validator",
            "semantic",
            "--vectors",
            "vectors.txt",
            "--theta",
            "0.9",
            "--keep-rejects",
            "--json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let valid = report["questions_valid"].as_u64().unwrap();
    let rejected = fs::read_to_string(root.join("out.rejected.jsonl"))
        .unwrap()
        .lines()
        .count() as u64;
    assert_eq!(
        valid + rejected,
        report["questions_generated"].as_u64().unwrap()
    );
    for line in fs::read_to_string(root.join("out.jsonl")).unwrap().lines() {
        assert!(line.contains(r#""theta":0.9"#), "{line}");
    }
}

#[test]
fn http_backend_against_stub_with_flag_over_env() {
    let (_d, root) = setup();
    let stub = StubServer::start_protocol().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_tcomqa"))
        .args([
            "extract",
            "--corpus",
            "corpus.txt",
            "--out",
            "out.jsonl",
            "--backend",
            "http",
        ])
        .args([
            "--endpoint",
            stub.url(),
            "--created-at",
            "2024-01-02T03:04:05Z",
        ])
        .env("TCOM_ENDPOINT", "http://127.0.0.1:9")
        .current_dir(&root)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(root.join("out.jsonl")).unwrap();
    assert!(text.contains(r#""answer":"6 PM""#), "{text}");
    assert!(text.contains("2024-01-02T03:04:05Z"));
    assert!(!text.contains("</s>"));
}

#[test]
fn http_backend_reads_endpoint_from_env() {
    let (_d, root) = setup();
    let stub = StubServer::start_protocol().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_tcomqa"))
        .args([
            "extract",
            "--corpus",
            "corpus.txt",
            "--out",
            "out.jsonl",
            "--backend",
            "http",
        ])
        .env("TCOM_ENDPOINT", stub.url())
        .current_dir(&root)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stub.stats().requests() >= 15);
}

#[test]
fn unreachable_endpoint_with_abort_exits_two() {
    let (_d, root) = setup();
    let o = tcomqa(
        &root,
        &[
            "extract",
            "--corpus",
            "corpus.txt",
            "--out",
            "out.jsonl",
            "--backend",
            "http",
            "--endpoint",
            "http://127.0.0.1:9",
            "--max-retries",
            "0",
            "--timeout",
            "2",
            "--fail-policy",
            "abort",
        ],
    );
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

fn write_pairs(root: &Path) {
    fs::write(
        root.join("pairs.jsonl"),
        "{\"context\":\"The dog barks every year.\",\"question\":\"How often does the dog bark?\"}\n\
         {\"context\":\"The dog barks.\",\"question\":\"Does the dog bark?\"}\n\
         {\"context\":\"Every year passes.\",\"question\":\"How long does each year last?\"}\n",
    )
    .unwrap();
}

#[test]
fn sweep_sorts_thetas_and_is_monotone() {
    let (_d, root) = setup();
    write_pairs(&root);
    let o = tcomqa(
        &root,
        &[
            "sweep",
            "--pairs",
            "pairs.jsonl",
            "--vectors",
            "vectors.txt",
            "--thetas",
            "0.9,0.1,0.5",
            "--json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    let thetas: Vec<f64> = rows.iter().map(|r| r["theta"].as_f64().unwrap()).collect();
    assert_eq!(thetas, [0.1, 0.5, 0.9]);
    let fracs: Vec<f64> = rows
        .iter()
        .map(|r| r["accept_fraction"].as_f64().unwrap())
        .collect();
    assert!(fracs.windows(2).all(|w| w[0] >= w[1]), "{fracs:?}");

    let o = tcomqa(
        &root,
        &[
            "sweep",
            "--pairs",
            "pairs.jsonl",
            "--vectors",
            "vectors.txt",
        ],
    );
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("0.50"));
}

#[test]
fn sweep_empty_pairs_exits_two() {
    let (_d, root) = setup();
    fs::write(root.join("empty.jsonl"), "").unwrap();
    let o = tcomqa(
        &root,
        &[
            "sweep",
            "--pairs",
            "empty.jsonl",
            "--vectors",
            "vectors.txt",
        ],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn validate_writes_verdicts() {
    let (_d, root) = setup();
    write_pairs(&root);
    let o = tcomqa(
        &root,
        &[
            "validate",
            "--pairs",
            "pairs.jsonl",
            "--validator",
            "both",
            "--vectors",
            "vectors.txt",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let rows: Vec<serde_json::Value> = out
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 3);
    // no marker in "Does the dog bark?"
    assert_eq!(rows[1]["accepted"], false);
    assert_eq!(rows[1]["id"], "P000002");
}

#[test]
fn evaluate_votes_three_two_split() {
    let (_d, root) = setup();
    let mut votes = String::new();
    for (j, l) in ["valid", "valid", "invalid", "valid", "invalid"]
        .iter()
        .enumerate()
    {
        votes.push_str(&format!(
            "{{\"item_id\":\"q1\",\"judge_id\":\"j{j}\",\"label\":\"{l}\"}}\n"
        ));
    }
    fs::write(root.join("votes.jsonl"), votes).unwrap();
    let o = tcomqa(&root, &["evaluate", "--votes", "votes.jsonl"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "q1\tvalid\n");
}

#[test]
fn evaluate_labeled_prints_three_decimals() {
    let (_d, root) = setup();
    let mut rows = String::new();
    let spec = [
        (true, "valid"),
        (true, "valid"),
        (true, "valid"),
        (true, "valid"),
        (true, "valid"),
        (true, "valid"),
        (true, "invalid"),
        (false, "valid"),
        (true, "uncertain"),
        (false, "uncertain"),
    ];
    for (i, (p, g)) in spec.iter().enumerate() {
        rows.push_str(&format!(
            "{{\"item_id\":\"i{i}\",\"prediction\":{p},\"gold\":\"{g}\"}}\n"
        ));
    }
    fs::write(root.join("labeled.jsonl"), rows).unwrap();
    let o = tcomqa(&root, &["evaluate", "--labeled", "labeled.jsonl"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("precision 0.857"), "{out}");
    assert!(out.contains("recall    0.857"), "{out}");
    assert!(out.contains("excluded 2"), "{out}");
}

#[test]
fn evaluate_answers_identical_files() {
    let (_d, root) = setup();
    fs::write(
        root.join("answers.jsonl"),
        "{\"item_id\":\"a\",\"property\":\"frequency\",\"answer\":\"every year\"}\n\
         {\"item_id\":\"b\",\"property\":\"duration\",\"answer\":\"each dog\"}\n",
    )
    .unwrap();
    let o = tcomqa(
        &root,
        &[
            "evaluate",
            "--answers",
            "answers.jsonl",
            "--gold",
            "answers.jsonl",
            "--vectors",
            "vectors.txt",
            "--json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for line in table["lines"].as_array().unwrap() {
        if let Some(ss) = line["ss_mean"].as_f64() {
            assert_eq!(ss, 1.0);
        }
    }
    assert_eq!(table["avg_ss"].as_f64(), Some(1.0));
}

#[test]
fn evaluate_conflicting_modes_exit_one() {
    let (_d, root) = setup();
    let o = tcomqa(&root, &["evaluate", "--votes", "a", "--labeled", "b"]);
    assert_eq!(code(&o), 1);
    let o = tcomqa(&root, &["evaluate"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn report_text_and_json() {
    let (_d, root) = setup();
    let mut rows = String::new();
    for (p, n) in [("duration", 27), ("typical time", 26)] {
        for i in 0..30 {
            rows.push_str(&format!(
                "{{\"property\":\"{p}\",\"de_correct\":{}}}\n",
                i < n
            ));
        }
    }
    fs::write(root.join("rows.jsonl"), rows).unwrap();
    let o = tcomqa(&root, &["report", "--rows", "rows.jsonl"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("90.00%"), "{out}");
    assert!(out.contains("86.67%"), "{out}");
    assert!(out.contains("88.33%"), "{out}");
    let o = tcomqa(
        &root,
        &[
            "report",
            "--rows",
            "rows.jsonl",
            "--json",
            "--out",
            "t.json",
        ],
    );
    assert_eq!(code(&o), 0);
    let t: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(root.join("t.json")).unwrap()).unwrap();
    assert_eq!(t["lines"][0]["de_correct"], 27);
    assert_eq!(
        code(&tcomqa(
            &root,
            &["report", "--rows", "rows.jsonl", "--out", "t.json"]
        )),
        1
    );
}
