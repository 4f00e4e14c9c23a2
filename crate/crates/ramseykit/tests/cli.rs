//! End-to-end runs of the `ramseykit` binary: exit codes, formats, file
//! inputs, and the result cache.

use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ramseykit"));
    c.env_remove("RAMSEYKIT_CACHE");
    c
}

fn stdout_of(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn arrow_holds_exit_zero() {
    let out = bin()
        .args(["arrow", "--C", "k6", "--B", "k3", "--A", "k2", "--k", "2", "--d", "1", "--mode", "copies", "--format", "machine"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("verdict=holds"), "{text}");
    assert!(text.contains("command=arrow"));
}

#[test]
fn arrow_fails_is_still_exit_zero_with_certificate() {
    let out = bin()
        .args(["arrow", "--C", "k5", "--B", "k3", "--A", "k2", "--k", "2", "--d", "1", "--format", "machine"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "a fails verdict is still a verdict");
    let text = stdout_of(&out);
    assert!(text.contains("verdict=fails"));
    assert!(text.contains("coloring:"), "certificate block expected: {text}");
    assert!(text.contains("{0,1} -> 0"), "{text}");
}

#[test]
fn undecided_budget_exit_two() {
    let out = bin()
        .args(["arrow", "--C", "k6", "--B", "k3", "--A", "k2", "--k", "2", "--d", "1", "--budget", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_and_empty_files_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.structure");
    std::fs::write(&empty, "").unwrap();
    let out = bin().args(["aut", "--A", empty.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));

    let bad = dir.path().join("bad.structure");
    std::fs::write(&bad, "signature: E/2\nsize: x\n").unwrap();
    let out = bin().args(["aut", "--A", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(err.contains("line 2"), "diagnostics carry the line: {err}");
}

#[test]
fn structure_files_round_trip_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p3.structure");
    std::fs::write(&path, "signature: E/2\nsize: 3\nE: (0,1) (1,0) (1,2) (2,1)\n").unwrap();
    let out = bin()
        .args(["embeddings", "--A", "k2", "--B", path.to_str().unwrap(), "--format", "machine"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).contains("verdict=4 embeddings"));
}

#[test]
fn witness_command_finds_the_six_chain() {
    let out = bin()
        .args(["witness", "--class", "linear-orders", "--B", "chain3", "--A", "chain2", "--k", "2", "--d", "1", "--cap", "8", "--format", "machine"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).contains("verdict=found size=6"));
}

#[test]
fn chain_command_builds_and_verifies() {
    let out = bin()
        .args(["chain", "--class", "linear-orders", "--B", "chain3", "--step", "chain2:2", "--step", "chain1:2", "--cap", "12", "--samples", "50", "--format", "machine"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("chain_sizes=3,6,11"), "{text}");
    assert!(text.contains("samples_verified=50"), "{text}");
}

#[test]
fn expansion_subcommands_run() {
    let out = bin()
        .args(["expansion", "forgetful", "--class", "ordered-graphs", "--n", "3", "--format", "machine"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).contains("verdict=fail at size 3"));

    let out = bin()
        .args(["expansion", "admissible", "--class", "digraphs-edge-compatible", "--A", "dcycle3", "--format", "machine"])
        .output()
        .unwrap();
    assert!(stdout_of(&out).contains("verdict=0 admissible orders"));

    let out = bin()
        .args(["expansion", "order-forgetful", "--B", "c4", "--A", "p3", "--format", "machine"])
        .output()
        .unwrap();
    assert!(stdout_of(&out).contains("verdict=not-found (exhaustive)"));
}

#[test]
fn ergodic_subcommands_run() {
    let out = bin()
        .args(["ergodic", "cylinder", "--class", "ordered-pure-sets", "--ambient", "set6", "--order", "3<0<5", "--format", "machine"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).contains("verdict=1/6"));

    let out = bin()
        .args(["ergodic", "polytope", "--class", "ordered-pure-sets", "--n", "3", "--format", "machine"])
        .output()
        .unwrap();
    assert!(stdout_of(&out).contains("verdict=feasible, unique"));

    let out = bin()
        .args([
            "ergodic", "concentrate", "--class", "ordered-pure-sets", "--ambient", "set6",
            "--a-dom", "0", "--B", "set2", "--b-order", "0<1", "--a-map", "0",
            "--n-max", "4", "--format", "machine",
        ])
        .output()
        .unwrap();
    let text = stdout_of(&out);
    assert!(text.contains("verdict=bounds hold"), "{text}");
    assert!(text.contains("step=3 ratio=4/5 bound=4/5 ok=true"), "{text}");
}

#[test]
fn cache_replays_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["arrow", "--C", "k5", "--B", "k3", "--A", "k2", "--k", "2", "--d", "1", "--format", "machine"];
    let cold = bin()
        .env("RAMSEYKIT_CACHE", dir.path())
        .args(args)
        .output()
        .unwrap();
    let entries = std::fs::read_dir(dir.path()).unwrap().count();
    assert!(entries > 0, "cache populated");
    let warm = bin()
        .env("RAMSEYKIT_CACHE", dir.path())
        .args(args)
        .output()
        .unwrap();
    assert_eq!(cold.stdout, warm.stdout, "warm cache changes nothing");
    assert_eq!(cold.status.code(), warm.status.code());
    // And both agree with an uncached run.
    let uncached = bin().args(args).output().unwrap();
    assert_eq!(cold.stdout, uncached.stdout);
}

#[test]
fn cache_preserves_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["arrow", "--C", "k6", "--B", "k3", "--A", "k2", "--k", "2", "--d", "1", "--budget", "3", "--format", "machine"];
    let cold = bin().env("RAMSEYKIT_CACHE", dir.path()).args(args).output().unwrap();
    assert_eq!(cold.status.code(), Some(2));
    let warm = bin().env("RAMSEYKIT_CACHE", dir.path()).args(args).output().unwrap();
    assert_eq!(warm.status.code(), Some(2));
    assert_eq!(cold.stdout, warm.stdout);
}

#[test]
fn catalog_suites_pass() {
    for suite in ["ramsey-basics", "forgetful"] {
        let out = bin().args(["catalog", suite, "--format", "machine"]).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{suite}: {}", stdout_of(&out));
        let text = stdout_of(&out);
        assert!(!text.contains("FAIL"), "{suite}: {text}");
    }
}

#[test]
fn machine_output_has_no_timing() {
    let out = bin()
        .args(["aut", "--A", "p3", "--format", "machine"])
        .output()
        .unwrap();
    let text = stdout_of(&out);
    assert!(!text.contains("time"), "machine output stays reproducible: {text}");
    assert!(text.contains("version="));
    assert!(text.contains("input.A="));
}
