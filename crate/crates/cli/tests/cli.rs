//! End-to-end checks of the command-line surface: exit codes, file outputs,
//! and error messages.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn polysum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polysum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_corpus(path: &Path) {
    fs::write(
        path,
        concat!(
            "{\"id\":\"a\",\"language\":\"en\",\"sentences\":[\"the cat sat\",\"dogs bark loudly\"],\"summary\":[\"dogs bark loudly\"]}\n",
            "{\"id\":\"b\",\"language\":\"en\",\"sentences\":[\"birds fly high\",\"fish swim deep\"],\"summary\":[\"birds fly high\"]}\n",
        ),
    )
    .unwrap();
}

#[test]
fn oracle_labels_writes_one_line_per_document() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let out = dir.path().join("labels.jsonl");
    write_corpus(&corpus);

    let output = polysum(&[
        "oracle-labels",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].contains("\"id\":\"a\""));
    assert!(lines[0].contains("\"positive\":[1]"));
    assert!(lines[1].contains("\"id\":\"b\""));
    assert!(lines[1].contains("\"positive\":[0]"));
}

#[test]
fn missing_required_flag_exits_one_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("labels.jsonl");
    let output = polysum(&["oracle-labels", "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("--corpus"), "stderr: {stderr}");
}

#[test]
fn unknown_flag_exits_one_with_usage() {
    let output = polysum(&["oracle-labels", "--bogus"]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.to_lowercase().contains("usage"), "stderr: {stderr}");
}

#[test]
fn version_prints_a_build_identifier() {
    let output = polysum(&["--version"]);
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn malformed_corpus_exits_one_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let out = dir.path().join("labels.jsonl");
    fs::write(&corpus, "not json\n").unwrap();
    let output = polysum(&[
        "oracle-labels",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains(":1:"), "stderr: {stderr}");
}

#[test]
fn augment_prefix_provider_translates_both_sides() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let out = dir.path().join("augmented.jsonl");
    write_corpus(&corpus);

    let output = polysum(&[
        "augment",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--provider",
        "prefix",
    ]);
    assert!(output.status.success(), "{output:?}");
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("xx_the xx_cat xx_sat"));
    assert!(text.contains("xx_dogs xx_bark xx_loudly"));
    assert!(text.contains("\"language\":\"fr\""));
}

#[test]
fn augment_word_replacement_requires_dictionary() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let out = dir.path().join("augmented.jsonl");
    write_corpus(&corpus);
    let output = polysum(&[
        "augment",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--rate",
        "0.5",
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("--dict"));
}

#[test]
fn augment_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    write_corpus(&corpus);
    let dict = dir.path().join("dict.txt");
    fs::write(&dict, "cat chat\ndogs chiens\nbark aboient\n").unwrap();

    let mut outputs = Vec::new();
    for name in ["first.jsonl", "second.jsonl"] {
        let out = dir.path().join(name);
        let output = polysum(&[
            "augment",
            "--corpus",
            corpus.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--rate",
            "0.6",
            "--seed",
            "9",
            "--dict",
            dict.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "{output:?}");
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn output_bytes_do_not_depend_on_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    write_corpus(&corpus);
    let mut outputs = Vec::new();
    for (jobs, name) in [("1", "one.jsonl"), ("4", "four.jsonl")] {
        let out = dir.path().join(name);
        let output = polysum(&[
            "--jobs",
            jobs,
            "oracle-labels",
            "--corpus",
            corpus.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "{output:?}");
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let out_from_config = dir.path().join("from-config.jsonl");
    let out_from_flag = dir.path().join("from-flag.jsonl");
    write_corpus(&corpus);
    let config = dir.path().join("run.conf");
    fs::write(
        &config,
        format!(
            "# experiment manifest\ncorpus = {}\nout = {}\n",
            corpus.display(),
            out_from_config.display()
        ),
    )
    .unwrap();

    // Config alone supplies both paths.
    let output = polysum(&["--config", config.to_str().unwrap(), "oracle-labels"]);
    assert!(output.status.success(), "{output:?}");
    assert!(out_from_config.exists());

    // A flag beats the config value.
    let output = polysum(&[
        "--config",
        config.to_str().unwrap(),
        "oracle-labels",
        "--out",
        out_from_flag.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    assert!(out_from_flag.exists());
    assert_eq!(
        fs::read(&out_from_config).unwrap(),
        fs::read(&out_from_flag).unwrap()
    );
}
