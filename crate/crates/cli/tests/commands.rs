//! The subcommands, in-process and through the binary.

use std::path::PathBuf;
use std::process::Command;

use llp_match::run;

fn fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    path.to_string_lossy().into_owned()
}

fn solve(name: &str, algorithm: &str, extra: &[&str]) -> llp_match::Output {
    let path = fixture(name);
    let mut args = vec!["llp-match", "solve", &path, "--algorithm", algorithm];
    args.extend_from_slice(extra);
    run(args)
}

#[test]
fn constrained_fixture() {
    let out = solve("fig5_regret.smp", "constrained", &[]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout.lines().last(), Some("P1:w1 P2:w3 P3:w4 P4:w2"));
    let traced = solve("fig5_regret.smp", "constrained", &["--trace"]);
    let g: Vec<&str> = traced
        .stdout
        .lines()
        .filter_map(|l| l.strip_prefix("trace "))
        .map(|l| l.rsplit("g=").next().unwrap())
        .collect();
    assert_eq!(g, ["1,2,1,1", "1,2,2,1", "2,2,2,1", "2,2,3,1"]);
}

#[test]
fn stable_and_constrained_agree_without_constraints() {
    let body = |out: llp_match::Output| -> Vec<String> {
        out.stdout.lines().filter(|l| !l.starts_with("solver")).map(String::from).collect()
    };
    for flags in [&[][..], &["--trace"], &["--format", "machine"]] {
        let stable = solve("fig5.smp", "stable", flags);
        let constrained = solve("fig5.smp", "constrained", flags);
        assert_eq!(stable.code, 0);
        assert_eq!(body(stable), body(constrained));
    }
    assert_eq!(solve("fig5.smp", "stable", &[]).stdout.lines().last(), Some("P1:w4 P2:w3 P3:w1 P4:w2"));
}

#[test]
fn nonexistence_exits_with_two() {
    let out = solve("irving.smp", "strong", &[]);
    assert_eq!(out.code, 2);
    assert!(out.stdout.contains("no strongly stable marriage"));
    let out = solve("indiff2.smp", "super", &[]);
    assert_eq!(out.code, 2);
    assert!(out.stdout.contains("no super stable marriage"));
}

#[test]
fn errors_exit_with_one() {
    assert_eq!(solve("fig5_regret.smp", "stable", &[]).code, 1);
    assert_eq!(solve("irving.smp", "constrained", &[]).code, 1);
    assert_eq!(solve("no-such-file.smp", "stable", &[]).code, 1);
    assert_eq!(run(["llp-match", "solve"]).code, 1);
    let out = run(["llp-match", "simulate", &fixture("fig5.smp"), "--seeds", "0"]);
    assert_eq!(out.code, 1);
}

#[test]
fn weak_breaks_ties_by_seed() {
    for seed in 0..10 {
        let out = solve("indiff2.smp", "weak", &["--seed", &seed.to_string()]);
        assert_eq!(out.code, 0);
        assert!(out.stdout.contains(&format!("seed {seed}\n")));
    }
}

#[test]
fn machine_format_is_key_value() {
    let out = solve("fig5_regret.smp", "super", &["--format", "machine", "--trace", "--timing"]);
    assert!(out.stdout.lines().all(|l| l.split_once('=').is_some_and(|(k, _)| !k.contains(' '))));
    assert!(out.stdout.contains("matching=P1:w1 P2:w3 P3:w4 P4:w2\n"));
    assert!(out.stdout.contains("wall_ms="));
}

#[test]
fn output_is_deterministic() {
    for algorithm in ["constrained", "super", "weak"] {
        let first = solve("fig5_regret.smp", algorithm, &["--trace"]);
        assert_eq!(first, solve("fig5_regret.smp", algorithm, &["--trace"]));
    }
    let args = ["llp-match", "simulate", &fixture("fig5_regret.smp"), "--seeds", "16", "--trace"];
    assert_eq!(run(args), run(args));
}

#[test]
fn schedules_reach_the_same_matching() {
    for schedule in ["parallel", "stale"] {
        for seed in 0..5 {
            let out = solve("fig5_regret.smp", "constrained", &["--schedule", schedule, "--seed", &seed.to_string()]);
            assert_eq!(out.stdout.lines().last(), Some("P1:w1 P2:w3 P3:w4 P4:w2"));
        }
    }
}

#[test]
fn simulate_fixtures() {
    let out = run(["llp-match", "simulate", &fixture("fig5.smp"), "--seeds", "100"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.ends_with("runs 100\nagree 100/100\nbounds_ok 100/100\n"));

    let out = run(["llp-match", "simulate", &fixture("fig5_regret.smp"), "--seeds", "100", "--format", "machine"]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout.matches("matching=P1:w1 P2:w3 P3:w4 P4:w2\n").count(), 100);

    let out = run(["llp-match", "simulate", &fixture("tiny1.smp"), "--seeds", "1", "--format", "machine"]);
    assert!(out.stdout.contains("\napplication=2\n"));

    let seeds: Vec<u64> = run(["llp-match", "simulate", &fixture("fig5.smp"), "--seeds", "20", "--seed", "7", "--format", "machine"])
        .stdout
        .lines()
        .filter_map(|l| l.strip_prefix("seed="))
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(seeds, (7..27).collect::<Vec<_>>());
}

#[test]
fn simulate_reports_divergent_modes() {
    // Under a mode that skips ranks silently some instances settle on the
    // wrong matching; the command must notice.
    let dir = std::env::temp_dir().join(format!("llp-match-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("skip.smp");
    let generated = run(["llp-match", "generate", "--n", "4", "--seed", "1"]).stdout;
    std::fs::write(&path, format!("{generated}regret_le 4 1\nedge 1 4 3 1\nedge 1 4 2 1\n")).unwrap();
    let path = path.to_string_lossy().into_owned();
    let good = run(["llp-match", "simulate", &path, "--seeds", "40", "--scheduler", "adversarial"]);
    assert_ne!(good.code, 1, "{}", good.stderr);
    let mut caught = false;
    for scheduler in ["random", "adversarial"] {
        let bad = run(["llp-match", "simulate", &path, "--seeds", "40", "--scheduler", scheduler, "--advance-mode", "skip-silently"]);
        caught |= bad.code == 1 && bad.stderr.contains("differs");
    }
    assert!(caught);
}

#[test]
fn verify_fixtures() {
    for name in ["fig5.smp", "fig5_regret.smp", "irving.smp", "indiff2.smp", "tiny1.smp"] {
        let out = run(["llp-match", "verify", &fixture(name)]);
        assert_eq!(out.code, 0, "{name}: {}", out.stdout);
        assert!(out.stdout.ends_with("all agree\n"));
    }
    let out = run(["llp-match", "verify", &fixture("indiff2.smp")]).stdout;
    assert!(out.contains("super agree: none"));
    let out = run(["llp-match", "verify", &fixture("irving.smp")]).stdout;
    assert!(out.contains("strong agree: none"));
}

#[test]
fn verify_rejects_large_instances() {
    let dir = std::env::temp_dir().join(format!("llp-match-large-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("large.smp");
    std::fs::write(&path, run(["llp-match", "generate", "--n", "9"]).stdout).unwrap();
    let out = run(["llp-match", "verify", &path.to_string_lossy()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("too large"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_llp-match");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let ok = status(&["solve", &fixture("fig5.smp"), "--algorithm", "stable"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).ends_with("P1:w4 P2:w3 P3:w1 P4:w2\n"));
    assert_eq!(status(&["solve", &fixture("irving.smp"), "--algorithm", "strong"]).status.code(), Some(2));
    let bad = status(&["solve", &fixture("fig5.smp")]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(!bad.stderr.is_empty());
    assert_eq!(status(&["--help"]).status.code(), Some(0));
}
