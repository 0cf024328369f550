//! Acceptance checks. Each test prints one `PASS`/`FAIL` line with what was
//! measured; tolerances and time limits are pinned below.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use llp_match::format::{parse_instance, write_instance, Instance};
use llp_match_core::csmp::{run_constrained, SolveOptions};
use llp_match_core::gen::generate;
use llp_match_core::llp::{solve, JobScheduling, Schedule, ShortestPath, Value, UNREACHABLE};
use llp_match_core::oracle::{all_in_class, classify, enumerate_matchings, minimum_stable, rank_vector, Class};
use llp_match_core::sim::{simulate, simulate_observed, SchedulerMode, SimConfig, SimOutcome};
use llp_match_core::ties::{join, meet, solve_strongly_stable, solve_superstable};
use llp_match_core::{compile_constraints, solve_constrained, solve_stable, ProposalVector, SolveError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> Instance {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    parse_instance(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Runs `check` and prints its verdict line; fails on a wrong result or a
/// blown time limit.
fn criterion(id: u32, title: &str, limit: Duration, check: impl FnOnce() -> Result<String, String>) {
    let start = Instant::now();
    let result = check();
    let elapsed = start.elapsed();
    let (verdict, detail) = match &result {
        Ok(d) if elapsed <= limit => ("PASS", d.clone()),
        Ok(d) => ("FAIL", format!("{d}; took {elapsed:?}, limit {limit:?}")),
        Err(d) => ("FAIL", d.clone()),
    };
    println!("criterion {id:2} {verdict} {title}: {detail} [{elapsed:.2?}]");
    assert_eq!(verdict, "PASS", "criterion {id}: {detail}");
}

#[test]
fn criterion_01_worked_constrained_trace() {
    criterion(1, "constrained trace on the four-couple instance", Duration::from_secs(1), || {
        let instance = fixture("fig5_regret.smp");
        let run = run_constrained(&instance.profile, &instance.constraints, SolveOptions::default())
            .map_err(|e| e.to_string())?;
        let mut sequence = vec![vec![1, 1, 1, 1]];
        sequence.extend(run.trace.iter().map(|r| r.g_after.to_vec()));
        let expected = vec![vec![1, 1, 1, 1], vec![1, 2, 1, 1], vec![1, 2, 2, 1], vec![2, 2, 2, 1], vec![2, 2, 3, 1]];
        if sequence != expected {
            return Err(format!("g sequence {sequence:?}"));
        }
        let matching = run.outcome.map_err(|e| e.to_string())?.matching.to_string();
        if matching != "P1:w1 P2:w3 P3:w4 P4:w2" {
            return Err(format!("matching {matching}"));
        }
        Ok(format!("{} steps, {matching}", run.trace.len()))
    });
}

#[test]
fn criterion_02_man_optimal_stable() {
    criterion(2, "unconstrained man-optimal matching", Duration::from_secs(1), || {
        let matching = solve_stable(&fixture("fig5.smp").profile).map_err(|e| e.to_string())?.to_string();
        if matching == "P1:w4 P2:w3 P3:w1 P4:w2" {
            Ok(matching)
        } else {
            Err(format!("got {matching}"))
        }
    });
}

#[test]
fn criterion_03_oracle_equivalence_strict() {
    criterion(3, "constrained solver equals exhaustive minimum", Duration::from_secs(30), || {
        let (mut agree, mut constrained, mut infeasible) = (0, 0, 0);
        for seed in 0..200u64 {
            let n = 3 + (seed as usize % 4);
            let count = if seed % 2 == 0 { 0 } else { 1 + (seed as usize / 2) % 3 };
            let (profile, constraints) = generate(n, 0.0, count, 31_000 + seed);
            constrained += usize::from(!constraints.is_empty());
            let expected = minimum_stable(&profile, &constraints, Class::Classic).map_err(|e| e.to_string())?;
            infeasible += usize::from(expected.is_none());
            let found = match solve_constrained(&profile, &constraints) {
                Ok(s) => Some(s.matching),
                Err(e) if e.is_nonexistence() => None,
                Err(e) => return Err(format!("seed {seed}: {e}")),
            };
            if found == expected {
                agree += 1;
            } else {
                let instance = Instance { profile, constraints };
                return Err(format!("seed {seed} disagrees:\n{}", write_instance(&instance)));
            }
        }
        Ok(format!("{agree}/200 agree ({constrained} constrained, {infeasible} infeasible)"))
    });
}

/// Tied instances with `n` in 3..=5.
fn tied_corpus() -> impl Iterator<Item = (u64, Instance)> {
    (0..200u64).map(|seed| {
        let n = 3 + (seed as usize % 3);
        let density = [0.2, 0.35, 0.5][(seed as usize / 3) % 3];
        let (profile, _) = generate(n, density, 0, 41_000 + seed);
        (
            seed,
            Instance {
                profile,
                constraints: Vec::new(),
            },
        )
    })
}

#[test]
fn criterion_04_oracle_equivalence_ties() {
    criterion(4, "super and strong solvers against exhaustive search", Duration::from_secs(60), || {
        let (mut super_exist, mut strong_exist, mut tied) = (0, 0, 0);
        for (seed, instance) in tied_corpus() {
            let p = &instance.profile;
            tied += usize::from(!p.is_strict());
            let dump = |what: &str| format!("seed {seed}: {what}\n{}", write_instance(&instance));
            let expected = minimum_stable(p, &[], Class::Super).map_err(|e| e.to_string())?;
            match solve_superstable(p, &[]) {
                Ok(s) if Some(&s.matching) == expected.as_ref() && classify(&s.matching, p, &[]).super_stable => {
                    super_exist += 1
                }
                Err(SolveError::NoSuperStable) if expected.is_none() => {}
                other => return Err(dump(&format!("super solver {other:?}, oracle {expected:?}"))),
            }
            let exists = minimum_stable(p, &[], Class::Strong).map_err(|e| e.to_string())?.is_some();
            match solve_strongly_stable(p) {
                Ok(s) if exists && classify(&s.matching, p, &[]).strongly_stable => strong_exist += 1,
                Err(SolveError::NoStronglyStable) if !exists => {}
                other => return Err(dump(&format!("strong solver {other:?}, oracle existence {exists}"))),
            }
        }
        Ok(format!(
            "200/200 agree ({tied} with ties; super-stable in {super_exist}, strongly stable in {strong_exist})"
        ))
    });
}

#[test]
fn criterion_05_nonexistence_fixtures() {
    criterion(5, "nonexistence fixtures", Duration::from_secs(1), || {
        let indifferent = fixture("indiff2.smp").profile;
        if solve_superstable(&indifferent, &[]) != Err(SolveError::NoSuperStable) {
            return Err(String::from("indiff2 has a super-stable answer"));
        }
        let irving = fixture("irving.smp").profile;
        if solve_strongly_stable(&irving) != Err(SolveError::NoStronglyStable) {
            return Err(String::from("irving has a strongly stable answer"));
        }
        // The only matching man 2 could otherwise keep, the identity, is
        // blocked by man 2 and woman 1: he is indifferent, she prefers him.
        let identity = enumerate_matchings(2).unwrap().next().unwrap();
        let blocked = irving.mrank(1, 0) <= irving.mrank(1, 1) && irving.wrank(0, 1) < irving.wrank(0, 0);
        if !blocked || classify(&identity, &irving, &[]).strongly_stable {
            return Err(String::from("identity is not blocked by (m2, w1)"));
        }
        Ok(String::from("indiff2: no super stable marriage; irving: no strongly stable marriage"))
    });
}

#[test]
fn criterion_06_superstable_sublattice() {
    criterion(6, "super-stable rank vectors closed under meet and join", Duration::from_secs(60), || {
        let (mut pairs, mut instances_with_two) = (0, 0);
        for (seed, instance) in tied_corpus() {
            let p = &instance.profile;
            let vectors: BTreeSet<Vec<usize>> = all_in_class(p, &[], Class::Super)
                .map_err(|e| e.to_string())?
                .iter()
                .map(|m| rank_vector(m, p))
                .collect();
            instances_with_two += usize::from(vectors.len() >= 2);
            for a in &vectors {
                for b in &vectors {
                    let (x, y) = (ProposalVector::new(a.clone()), ProposalVector::new(b.clone()));
                    pairs += 1;
                    if !vectors.contains(&meet(&x, &y).to_vec()) || !vectors.contains(&join(&x, &y).to_vec()) {
                        return Err(format!("seed {seed}: {a:?} and {b:?} not closed"));
                    }
                }
            }
        }
        Ok(format!("{pairs} pairs closed ({instances_with_two} instances with two or more vectors)"))
    });
}

/// Twenty strict instances with `n <= 6`, half constrained, including the
/// two four-couple fixtures.
fn protocol_corpus() -> Vec<Instance> {
    let mut corpus = vec![fixture("fig5.smp"), fixture("fig5_regret.smp")];
    for i in 0..18u64 {
        let n = 3 + (i as usize % 4);
        let count = if i % 2 == 0 { 0 } else { 1 + (i as usize / 2) % 3 };
        let (profile, constraints) = generate(n, 0.0, count, 51_000 + i);
        corpus.push(Instance { profile, constraints });
    }
    corpus
}

fn sim_config(seed: u64) -> SimConfig {
    SimConfig {
        scheduler: if seed.is_multiple_of(2) {
            SchedulerMode::Random
        } else {
            SchedulerMode::Adversarial
        },
        ..SimConfig::seeded(seed)
    }
}

#[test]
fn criterion_07_distributed_convergence() {
    criterion(7, "protocol outcome equals sequential solver", Duration::from_secs(60), || {
        let (mut runs, mut infeasible) = (0, 0);
        for (k, instance) in protocol_corpus().iter().enumerate() {
            let expected = solve_constrained(&instance.profile, &instance.constraints);
            for seed in 0..100 {
                let first = simulate(&instance.profile, &instance.constraints, sim_config(seed))
                    .map_err(|e| format!("instance {k} seed {seed}: {e}"))?;
                let same = match (&first.outcome, &expected) {
                    (SimOutcome::Matched { matching, .. }, Ok(s)) => *matching == s.matching,
                    (SimOutcome::NoConstrainedStableMarriage { .. }, Err(e)) => e.is_nonexistence(),
                    _ => false,
                };
                if !same {
                    return Err(format!("instance {k} seed {seed}: {:?} vs {expected:?}", first.outcome));
                }
                let second = simulate(&instance.profile, &instance.constraints, sim_config(seed)).unwrap();
                if second.log != first.log {
                    return Err(format!("instance {k} seed {seed}: logs differ between repeats"));
                }
                infeasible += usize::from(expected.is_err());
                runs += 1;
            }
        }
        Ok(format!("{runs}/2000 runs match, logs identical on repeat ({infeasible} infeasible runs)"))
    });
}

#[test]
fn criterion_08_message_bounds() {
    criterion(8, "message bounds", Duration::from_secs(60), || {
        let mut runs = 0;
        for instance in protocol_corpus() {
            for seed in 0..100 {
                let report = simulate(&instance.profile, &instance.constraints, sim_config(seed)).unwrap();
                report.check_bounds(instance.profile.n()).map_err(|e| format!("seed {seed}: {e}"))?;
                runs += 1;
            }
        }
        let four_couples = fixture("fig5.smp");
        for seed in 0..100 {
            let report = simulate(&four_couples.profile, &[], sim_config(seed)).unwrap();
            let (application, m) = (report.counters.application(), report.unsuccessful());
            if application != 12 || m != 2 {
                return Err(format!("seed {seed}: {application} application messages, m = {m}"));
            }
            if application != 2 * m + 2 * 4 {
                return Err(String::from("bound not met with equality"));
            }
        }
        Ok(format!("0 violations in {runs} runs; unconstrained four-couple run: 12 application messages, m = 2"))
    });
}

#[test]
fn criterion_09_termination_exactness() {
    criterion(9, "termination detected exactly at quiescence", Duration::from_secs(60), || {
        let mut runs = 0;
        for (k, instance) in protocol_corpus().iter().enumerate() {
            for seed in 0..100 {
                let mut busy_before_end = true;
                let mut last = (0, usize::MAX);
                let report = simulate_observed(&instance.profile, &instance.constraints, sim_config(seed), |view| {
                    if last.0 != 0 && last.1 == 0 {
                        busy_before_end = false;
                    }
                    last = (view.step, view.in_transit);
                })
                .map_err(|e| format!("instance {k} seed {seed}: {e}"))?;
                if let SimOutcome::Matched { .. } = report.outcome {
                    let exact = report.detected_at == Some(report.steps) && last == (report.steps, 0);
                    if !exact || !busy_before_end {
                        return Err(format!("instance {k} seed {seed}: detected {:?}", report.detected_at));
                    }
                }
                runs += 1;
            }
        }
        Ok(format!("0 violations in {runs} runs"))
    });
}

fn longest_path(durations: &[Value], pre: &[Vec<usize>]) -> Vec<Value> {
    let mut done = vec![0; durations.len()];
    for j in 0..durations.len() {
        done[j] = pre[j].iter().map(|&i| done[i]).max().unwrap_or(0) + durations[j];
    }
    done
}

fn bellman_ford(n: usize, source: usize, edges: &[(usize, usize, Value)]) -> Vec<Value> {
    let mut dist = vec![UNREACHABLE; n];
    dist[source] = 0;
    for _ in 0..n {
        for &(a, b, w) in edges {
            if dist[a] != UNREACHABLE && dist[a] + w < dist[b] {
                dist[b] = dist[a] + w;
            }
        }
    }
    dist
}

#[test]
fn criterion_10_engine_properties() {
    criterion(10, "engine instantiations against oracles under all schedules", Duration::from_secs(10), || {
        let mut schedules = vec![Schedule::Sequential];
        for seed in 0..2 {
            schedules.push(Schedule::Parallel { seed });
            schedules.extend((0..=3).map(|staleness| Schedule::Stale { seed, staleness }));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for k in 0..100 {
            let n = rng.gen_range(1..=10);
            let durations: Vec<Value> = (0..n).map(|_| rng.gen_range(0..10)).collect();
            let pre: Vec<Vec<usize>> = (0..n).map(|j| (0..j).filter(|_| rng.gen_bool(0.3)).collect()).collect();
            let expected = longest_path(&durations, &pre);
            let problem = JobScheduling::new(durations, pre).map_err(|e| e.to_string())?;
            for &schedule in &schedules {
                if solve(&problem, schedule).map_err(|e| e.to_string())? != expected {
                    return Err(format!("jobs instance {k} under {schedule:?}"));
                }
            }
        }
        for k in 0..100 {
            let n = rng.gen_range(1..=10);
            let mut edges = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    if a != b && rng.gen_bool(0.25) {
                        edges.push((a, b, rng.gen_range(0..20)));
                    }
                }
            }
            let source = rng.gen_range(0..n);
            let expected = bellman_ford(n, source, &edges);
            let problem = ShortestPath::new(n, source, &edges);
            for &schedule in &schedules {
                if solve(&problem, schedule).map_err(|e| e.to_string())? != expected {
                    return Err(format!("shortest-path instance {k} under {schedule:?}"));
                }
            }
        }
        Ok(format!("200/200 instances match under {} schedules", schedules.len()))
    });
}

#[test]
fn fixtures_compile() {
    for name in ["fig5.smp", "fig5_regret.smp", "irving.smp", "indiff2.smp", "tiny1.smp"] {
        let instance = fixture(name);
        compile_constraints(&instance.profile.break_ties_by_id(), &instance.constraints).unwrap();
    }
}
