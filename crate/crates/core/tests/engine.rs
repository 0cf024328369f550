//! Engine instantiations against independent oracles, across schedules.

use llp_match_core::llp::{
    solve, solve_observed, solve_threaded, JobScheduling, LatticeLinear, Order, Schedule, ShortestPath, Value,
    UNREACHABLE,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random DAG: job `j` may only depend on lower-numbered jobs.
fn random_jobs(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Value>, Vec<Vec<usize>>) {
    let durations = (0..n).map(|_| rng.gen_range(0..10)).collect();
    let pre = (0..n)
        .map(|j| (0..j).filter(|_| rng.gen_bool(0.3)).collect())
        .collect();
    (durations, pre)
}

/// Earliest completion times by dynamic programming in index order.
fn longest_path(durations: &[Value], pre: &[Vec<usize>]) -> Vec<Value> {
    let mut done = vec![0; durations.len()];
    for j in 0..durations.len() {
        let start = pre[j].iter().map(|&i| done[i]).max().unwrap_or(0);
        done[j] = start + durations[j];
    }
    done
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize, Value)> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(0.25) {
                edges.push((a, b, rng.gen_range(0..20)));
            }
        }
    }
    edges
}

/// Relaxes every edge until nothing changes.
fn relaxation(n: usize, source: usize, edges: &[(usize, usize, Value)]) -> Vec<Value> {
    let mut dist = vec![UNREACHABLE; n];
    dist[source] = 0;
    loop {
        let mut changed = false;
        for &(a, b, w) in edges {
            if dist[a] != UNREACHABLE && dist[a] + w < dist[b] {
                dist[b] = dist[a] + w;
                changed = true;
            }
        }
        if !changed {
            return dist;
        }
    }
}

fn schedules() -> Vec<Schedule> {
    let mut all = vec![Schedule::Sequential];
    for seed in 0..3 {
        all.push(Schedule::Parallel { seed });
        for staleness in 0..=3 {
            all.push(Schedule::Stale { seed, staleness });
        }
    }
    all
}

#[test]
fn job_scheduling_matches_longest_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let n = rng.gen_range(1..=10);
        let (t, pre) = random_jobs(&mut rng, n);
        let expected = longest_path(&t, &pre);
        let problem = JobScheduling::new(t, pre).unwrap();
        for schedule in schedules() {
            assert_eq!(solve(&problem, schedule).unwrap(), expected, "{schedule:?}");
        }
        assert_eq!(solve_threaded(&problem, 3).unwrap(), expected);
    }
}

#[test]
fn shortest_path_matches_relaxation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.gen_range(1..=10);
        let edges = random_graph(&mut rng, n);
        let source = rng.gen_range(0..n);
        let expected = relaxation(n, source, &edges);
        let problem = ShortestPath::new(n, source, &edges);
        for schedule in schedules() {
            assert_eq!(solve(&problem, schedule).unwrap(), expected, "{schedule:?}");
        }
        assert_eq!(solve_threaded(&problem, 4).unwrap(), expected);
    }
}

#[test]
fn job_fixpoint_is_minimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let n = rng.gen_range(1..=8);
        let (t, pre) = random_jobs(&mut rng, n);
        let problem = JobScheduling::new(t.clone(), pre).unwrap();
        let g = solve(&problem, Schedule::Sequential).unwrap();
        // Lowering any component either breaks its own lower bound t[j] or
        // makes some index forbidden.
        for j in 0..n {
            if g[j] == t[j] {
                continue;
            }
            let mut lower = g.clone();
            lower[j] -= 1;
            assert!((0..n).any(|k| problem.forbidden(&lower, k)), "{lower:?} satisfies the predicate");
        }
    }
}

#[test]
fn traces_are_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let n = rng.gen_range(2..=10);
        let edges = random_graph(&mut rng, n);
        let problem = ShortestPath::new(n, 0, &edges);
        let mut last = problem.initial();
        solve_observed(&problem, Schedule::Parallel { seed: 1 }, |step| {
            assert!(Order::Descending.dominated(&last, step.state));
            last = step.state.to_vec();
        })
        .unwrap();

        let (t, pre) = random_jobs(&mut rng, n);
        let problem = JobScheduling::new(t, pre).unwrap();
        let mut last = problem.initial();
        solve_observed(&problem, Schedule::Stale { seed: 2, staleness: 3 }, |step| {
            assert!(Order::Ascending.dominated(&last, step.state));
            last = step.state.to_vec();
        })
        .unwrap();
    }
}

#[test]
fn fixed_examples() {
    let jobs = JobScheduling::new(vec![1, 1, 1], vec![vec![], vec![0], vec![0, 1]]).unwrap();
    assert_eq!(solve(&jobs, Schedule::Sequential).unwrap(), vec![1, 2, 3]);
    let lone = ShortestPath::new(1, 0, &[]);
    assert_eq!(solve(&lone, Schedule::Sequential).unwrap(), vec![0]);
    let pair = ShortestPath::new(2, 0, &[(0, 1, 7)]);
    assert_eq!(solve(&pair, Schedule::Sequential).unwrap(), vec![0, 7]);
}

proptest! {
    /// If index `j` is forbidden at `g`, it stays forbidden at any `h >= g`
    /// that agrees with `g` on `j`.
    #[test]
    fn job_forbidden_is_monotone_safe(
        seed in any::<u64>(),
        bumps in prop::collection::vec(0u64..5, 8),
        start in prop::collection::vec(0u64..20, 8),
        j in 0usize..8,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t, pre) = random_jobs(&mut rng, 8);
        let problem = JobScheduling::new(t, pre).unwrap();
        let g = start;
        let mut h: Vec<Value> = g.iter().zip(&bumps).map(|(a, b)| a + b).collect();
        h[j] = g[j];
        if problem.forbidden(&g, j) {
            prop_assert!(problem.forbidden(&h, j));
        }
    }

    #[test]
    fn shortest_forbidden_is_monotone_safe(
        seed in any::<u64>(),
        drops in prop::collection::vec(0u64..5, 6),
        start in prop::collection::vec(0u64..30, 6),
        j in 0usize..6,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges = random_graph(&mut rng, 6);
        let problem = ShortestPath::new(6, 0, &edges);
        let g = start;
        let mut h: Vec<Value> = g.iter().zip(&drops).map(|(a, b)| a.saturating_sub(*b)).collect();
        h[j] = g[j];
        if problem.forbidden(&g, j) {
            prop_assert!(problem.forbidden(&h, j));
        }
    }

    #[test]
    fn schedules_are_confluent(seed in any::<u64>(), schedule_seed in any::<u64>(), staleness in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=10);
        let (t, pre) = random_jobs(&mut rng, n);
        let problem = JobScheduling::new(t, pre).unwrap();
        let reference = solve(&problem, Schedule::Sequential).unwrap();
        prop_assert_eq!(&solve(&problem, Schedule::Parallel { seed: schedule_seed }).unwrap(), &reference);
        prop_assert_eq!(&solve(&problem, Schedule::Stale { seed: schedule_seed, staleness }).unwrap(), &reference);
    }
}
