use std::path::Path;
use std::process::{Command, Output};

fn propset(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_propset"))
        .current_dir(dir)
        .env_remove("PROPSET_OUT")
        .args(args)
        .output()
        .unwrap()
}

fn error_json(out: &Output) -> serde_json::Value {
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr.clone()).unwrap();
    let line = stderr.lines().last().unwrap();
    serde_json::from_str(line).unwrap()
}

#[test]
fn errors_are_single_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = propset(dir.path(), &["split", "--edges", "missing.tsv", "--kind", "random", "--seed", "1", "--out", "s"]);
    assert_eq!(error_json(&out)["error"], "io");

    let out = propset(dir.path(), &["generate", "sbm", "--p", "0.3", "--q", "0.03", "--out", "g"]);
    assert_eq!(error_json(&out)["error"], "usage");

    let out = propset(dir.path(), &["generate", "sbm", "--p", "1.3", "--q", "0.03", "--seed", "2", "--out", "g"]);
    assert_eq!(error_json(&out)["error"], "invalid_config");
}

#[test]
fn help_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = propset(dir.path(), &["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("generate"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_propset"))
        .current_dir(dir.path())
        .env("PROPSET_OUT", "from-env")
        .args(["generate", "jin", "--nodes", "50", "--iterations", "200", "--seed", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let edges = std::fs::read_to_string(dir.path().join("from-env/edges.tsv")).unwrap();
    assert!(edges.lines().all(|l| l.starts_with('#') || l.split('\t').count() == 3));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("from-env/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "generate jin");
    assert_eq!(manifest["seed"], 3);
}

#[test]
fn sbm_workflow_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |args: &[&str]| {
        let out = propset(d, args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    run(&["generate", "sbm", "--blocks", "50,50", "--p", "0.3", "--q", "0.0333", "--seed", "7", "--out", "gen"]);
    run(&["split", "--edges", "gen/edges.tsv", "--kind", "sbm", "--blocks", "gen/blocks.json", "--seed", "7", "--out", "split"]);
    run(&["propose", "--split", "split", "--filter", "common-neighbors", "--k", "300", "--seed", "7", "--out", "prop"]);
    run(&["rank", "--split", "split", "--rank", "common-neighbors", "--proposal", "prop/proposal.tsv", "--seed", "7", "--out", "rank"]);
    run(&["rank", "--split", "split", "--rank", "common-neighbors", "--seed", "7", "--out", "base"]);

    let proposal = std::fs::read_to_string(d.join("prop/proposal.tsv")).unwrap();
    assert_eq!(proposal.lines().filter(|l| !l.starts_with('#')).count(), 300);
    let results: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("rank/results.json")).unwrap()).unwrap();
    assert_eq!(results["best_k"], 300);
    assert_eq!(results["K"], 10);
    let base: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("base/results.json")).unwrap()).unwrap();
    assert_eq!(base["best_k"], 0);

    run(&["replay", "rank/manifest.json", "--out", "rank2"]);
    assert_eq!(
        std::fs::read(d.join("rank/results.json")).unwrap(),
        std::fs::read(d.join("rank2/results.json")).unwrap()
    );
}
