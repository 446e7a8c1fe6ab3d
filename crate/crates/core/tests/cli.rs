use std::path::Path;
use std::process::{Command, Output};

use oneshot::synth::write_toy_workspace;

const SUBCOMMANDS: [&str; 8] = [
    "split-tasks",
    "split",
    "featurize",
    "train",
    "eval",
    "grid",
    "report",
    "inspect-embeddings",
];

fn oneshot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oneshot"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn split_tasks_counts_and_force() {
    let dir = tempfile::tempdir().unwrap();
    let ws = write_toy_workspace(dir.path(), 10, 1, 1).unwrap();
    let out = dir.path().join("tasks");
    let o = oneshot(&["split-tasks", "--source", s(&ws.source), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<String> = stdout(&o).lines().map(|l| l.split('\t').take(2).collect::<Vec<_>>().join(" ")).collect();
    assert_eq!(lines, ["DC 20", "DR 20", "DCR 30"]);
    assert!(out.join("run-manifest.json").is_file());

    let dc = out.join("DC.csv");
    let before = std::fs::read(&dc).unwrap();
    let o = oneshot(&["split-tasks", "--source", s(&ws.source), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--force"));
    assert_eq!(std::fs::read(&dc).unwrap(), before);
    let o = oneshot(&["split-tasks", "--source", s(&ws.source), "--out", s(&out), "--force"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn split_records_drawn_seed_for_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let ws = write_toy_workspace(dir.path(), 10, 1, 2).unwrap();
    let dcr = &ws.datasets[2].1;
    let a = dir.path().join("a");
    assert_eq!(oneshot(&["split", "--corpus", s(dcr), "--out", s(&a)]).status.code(), Some(0));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("run-manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed_source"], "entropy");
    let seed = manifest["seeds"]["split"].as_u64().unwrap();
    let b = dir.path().join("b");
    let seed = seed.to_string();
    let o = oneshot(&["split", "--corpus", s(dcr), "--out", s(&b), "--seed", &seed]);
    assert_eq!(o.status.code(), Some(0));
    for f in ["support.csv", "query.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
}

#[test]
fn featurize_train_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let ws = write_toy_workspace(dir.path(), 20, 1, 3).unwrap();
    let dcr = &ws.datasets[2].1;
    let sp = dir.path().join("split");
    let p = |n: &str| dir.path().join(n);
    let run = |args: &[&str]| {
        let o = oneshot(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        stdout(&o)
    };
    run(&["split", "--corpus", s(dcr), "--out", s(&sp), "--seed", "4"]);
    let support = sp.join("support.csv");
    let query = sp.join("query.csv");
    for (corpus, out) in [(&support, p("xs.jsonl")), (&query, p("xq.jsonl"))] {
        run(&[
            "featurize", "--corpus", s(corpus), "--fit-on", s(dcr), "--kind", "char-ngrams", "--out", s(&out),
        ]);
    }
    let text = run(&[
        "train", "--matrix", s(&p("xs.jsonl")), "--corpus", s(&support), "--model", "nbc", "--out", s(&p("m.json")),
    ]);
    assert!(text.contains("training_accuracy\t1.0000"), "{text}");
    let text = run(&[
        "eval", "--model", s(&p("m.json")), "--matrix", s(&p("xq.jsonl")), "--corpus", s(&query), "--out",
        s(&p("e.json")),
    ]);
    assert!(text.starts_with("accuracy\t0."), "{text}");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p("e.json")).unwrap()).unwrap();
    assert_eq!(report["recall"], report["accuracy"]);
    assert!(p("m.json.manifest.json").is_file());
}

#[test]
fn train_rejects_bad_hyperparameter() {
    let dir = tempfile::tempdir().unwrap();
    let ws = write_toy_workspace(dir.path(), 10, 1, 4).unwrap();
    let x = dir.path().join("x.jsonl");
    let o = oneshot(&["featurize", "--corpus", s(&ws.datasets[0].1), "--kind", "bow", "--out", s(&x)]);
    assert_eq!(o.status.code(), Some(0));
    let m = dir.path().join("m.json");
    let o = oneshot(&[
        "train", "--matrix", s(&x), "--corpus", s(&ws.datasets[0].1), "--model", "svm", "--param", "c=-1", "--out",
        s(&m), "--seed", "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!m.exists());
}

fn small_config(ws: &oneshot::synth::ToyWorkspace, models: &str) -> String {
    format!(
        "repeats = 2\nbase_seed = 5\noutput_dir = \"out\"\n\n[[datasets]]\nname = \"DC\"\npath = \"{}\"\n\n\
         [[featurizers]]\nkind = \"bow\"\n\n{models}",
        ws.datasets[0].1.display()
    )
}

#[test]
fn grid_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ws = write_toy_workspace(dir.path(), 10, 1, 5).unwrap();
    let cfg = dir.path().join("g.toml");

    std::fs::write(&cfg, small_config(&ws, "[[models]]\nkind = \"nbc\"\n")).unwrap();
    let o = oneshot(&["grid", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("failed\t0"));
    let out = dir.path().join("out");
    assert!(out.join("grid.json").is_file());
    assert!(out.join("DC/accuracy_heatmap.svg").is_file());
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("run-manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed_source"], "config");
    assert_eq!(m["seeds"]["base_seed"], 5);

    let missing = small_config(&ws, "[[models]]\nkind = \"nbc\"\n").replace("DC.csv", "nope.csv");
    std::fs::write(&cfg, missing).unwrap();
    std::fs::remove_dir_all(&out).unwrap();
    let o = oneshot(&["grid", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.csv"));
    assert!(!out.exists(), "no cell may run on a config error");

    let bad = "[[models]]\nkind = \"nbc\"\n\n[[models]]\nkind = \"svm\"\nc = -1.0\n";
    std::fs::write(&cfg, small_config(&ws, bad)).unwrap();
    let o = oneshot(&["grid", "--config", s(&cfg), "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let g = oneshot::experiment::GridResult::from_json(&std::fs::read_to_string(out.join("grid.json")).unwrap())
        .unwrap();
    assert_eq!(g.failed_cells().count(), 1);
    assert!(g.cell("DC", "BoW + TF-IDF", "NBC").unwrap().summary.is_some());
    let table = std::fs::read_to_string(out.join("DC/table.csv")).unwrap();
    assert!(table.contains("failed"), "{table}");

    let o = oneshot(&["report", "--grid", s(&out.join("grid.json")), "--out", s(&dir.path().join("again"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        std::fs::read(out.join("DC/accuracy_bars.svg")).unwrap(),
        std::fs::read(dir.path().join("again/DC/accuracy_bars.svg")).unwrap()
    );
}

#[test]
fn io_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = oneshot(&["report", "--grid", s(&dir.path().join("absent.json")), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn inspect_embeddings_reports_oov_subwords() {
    let dir = tempfile::tempdir().unwrap();
    let ws = write_toy_workspace(dir.path(), 10, 1, 6).unwrap();
    let o = oneshot(&[
        "inspect-embeddings", "--path", s(&ws.fasttext), "--format", "fasttext", "--word", "qqzzy", "--bucket-count",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["lookups"][0]["in_vocabulary"], false);
    assert_eq!(v["lookups"][0]["subwords"][0], "<qq");
    assert!(v["summary"]["entries"].as_u64().unwrap() > 0);
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(oneshot(&["--help"]).status.code(), Some(0));
    assert_eq!(oneshot(&["--version"]).status.code(), Some(0));
    assert_eq!(oneshot(&["grid"]).status.code(), Some(1));
    assert_eq!(oneshot(&["no-such-command"]).status.code(), Some(1));
}

/// Every flag printed by `--help` must appear in the README's command
/// reference, and vice versa for each subcommand section.
#[test]
fn readme_lists_every_flag() {
    let readme = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md")).unwrap();
    for sub in SUBCOMMANDS {
        let help = stdout(&oneshot(&[sub, "--help"]));
        let mut flags: Vec<&str> = help
            .split(|c: char| c.is_whitespace() || c == ',' || c == '[' || c == ']')
            .map(|w| w.trim_end_matches(|c: char| !c.is_ascii_alphanumeric()))
            .filter(|w| w.starts_with("--") && w.len() > 2)
            .filter(|w| *w != "--help" && *w != "--verbose")
            .collect();
        flags.sort_unstable();
        flags.dedup();
        let heading = format!("### `{sub}`");
        let start = readme.find(&heading).unwrap_or_else(|| panic!("README lacks {heading}"));
        let section = &readme[start + heading.len()..];
        let end = ["\n### ", "\n## "].iter().filter_map(|h| section.find(h)).min();
        let section = &section[..end.unwrap_or(section.len())];
        for f in &flags {
            assert!(section.contains(&format!("`{f}")), "README section {sub} lacks {f}");
        }
        for w in section.split('`').skip(1).step_by(2) {
            if let Some(flag) = w.split_whitespace().next().filter(|f| f.starts_with("--")) {
                assert!(flags.contains(&flag), "README documents {flag} for {sub}, --help does not");
            }
        }
    }
}

#[test]
fn readme_config_parses() {
    let readme = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md")).unwrap();
    let start = readme.find("```toml\n").unwrap() + "```toml\n".len();
    let block = &readme[start..start + readme[start..].find("```").unwrap()];
    let cfg = oneshot::experiment::GridConfig::from_toml_str(block).unwrap();
    assert_eq!(cfg.n_cells(), 10);
}
