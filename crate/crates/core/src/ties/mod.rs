//! Super-stable and strongly stable marriage for profiles with ties.
//!
//! The state is again a proposal vector, now over tie-groups: man `j` is
//! proposing to every woman in his group `g[j]` at once. The proposal graph
//! `Y(g)` links each woman to the best men among everyone who has proposed
//! to her so far.

use alloc::vec::Vec;

use crate::csmp::{Reason, Run, Solution, SolveError, TraceRecord};
use crate::llp::{self, LatticeLinear, LlpError, Schedule, Value};
use crate::model::{compile_constraints, Constraint, ConstraintPoset, Matching, PreferenceProfile, ProposalVector};

mod graph;

pub use graph::{BipartiteGraph, DeficiencyReport};

/// Men who have proposed to `w` under `g`, and the best rank among them.
fn proposers(profile: &PreferenceProfile, g: &[usize], w: usize) -> (Vec<usize>, usize) {
    let suitors: Vec<usize> = (0..g.len()).filter(|&i| profile.mrank(i, w) <= g[i]).collect();
    let best = suitors.iter().map(|&i| profile.wrank(w, i)).min().unwrap_or(usize::MAX);
    let top = suitors.into_iter().filter(|&i| profile.wrank(w, i) == best).collect();
    (top, best)
}

/// `Y(g)`: each woman is joined to the men she ranks best among all who
/// have proposed to her; women without proposals stay isolated.
pub fn build_y(profile: &PreferenceProfile, g: &[usize]) -> BipartiteGraph {
    let mut y = BipartiteGraph::new(profile.n());
    for w in 0..profile.n() {
        for m in proposers(profile, g, w).0 {
            y.add_edge(m, w);
        }
    }
    y
}

/// `Y(g)` restricted to live engagements: a woman loses all her edges once
/// one of her best proposers has moved past her, since she can then only
/// accept a strictly better man.
pub fn build_y_pruned(profile: &PreferenceProfile, g: &[usize]) -> BipartiteGraph {
    let mut y = BipartiteGraph::new(profile.n());
    for w in 0..profile.n() {
        let (top, _) = proposers(profile, g, w);
        if top.iter().all(|&m| profile.mrank(m, w) == g[m]) {
            for m in top {
                y.add_edge(m, w);
            }
        }
    }
    y
}

/// Componentwise minimum of two proposal vectors.
pub fn meet(a: &ProposalVector, b: &ProposalVector) -> ProposalVector {
    a.meet(b)
}

/// Componentwise maximum of two proposal vectors.
pub fn join(a: &ProposalVector, b: &ProposalVector) -> ProposalVector {
    a.join(b)
}

/// The super-stable predicate, optionally with regret and floor constraints.
#[derive(Debug, Clone)]
pub struct SuperStableProblem<'a> {
    profile: &'a PreferenceProfile,
    poset: &'a ConstraintPoset,
}

impl<'a> SuperStableProblem<'a> {
    pub fn new(profile: &'a PreferenceProfile, poset: &'a ConstraintPoset) -> Self {
        SuperStableProblem { profile, poset }
    }

    /// Man `j` must move on when every woman in his current group has
    /// another proposer she likes at least as much, or when a constraint
    /// demands it.
    pub fn forbidden_superstable(&self, g: &[usize], j: usize) -> Option<Reason> {
        let p = self.profile;
        let taken = p.group(j, g[j]).iter().all(|&z| {
            (0..g.len())
                .filter(|&i| i != j)
                .any(|i| p.mrank(i, z) <= g[i] && p.wrank(z, i) <= p.wrank(z, j))
        });
        if taken {
            Some(Reason::BlockedByWoman)
        } else if self.poset.blocks(g, j) {
            Some(Reason::ConstraintViolation)
        } else {
            None
        }
    }
}

fn ranks(g: &[Value]) -> Vec<usize> {
    g.iter().map(|&v| v as usize).collect()
}

impl LatticeLinear for SuperStableProblem<'_> {
    fn len(&self) -> usize {
        self.profile.n()
    }

    fn initial(&self) -> Vec<Value> {
        self.poset.floor().iter().map(|&f| f as Value).collect()
    }

    fn bound(&self, j: usize) -> Value {
        self.poset.ceiling()[j] as Value
    }

    fn forbidden(&self, g: &[Value], j: usize) -> bool {
        self.forbidden_superstable(&ranks(g), j).is_some()
    }

    fn advance(&self, g: &[Value], j: usize) -> Value {
        g[j] + 1
    }
}

fn check_ties_constraints(constraints: &[Constraint]) -> Result<(), SolveError> {
    for c in constraints {
        match c {
            Constraint::Forbid { .. } => return Err(SolveError::UnsupportedConstraint("forbid")),
            Constraint::Edge { .. } => return Err(SolveError::UnsupportedConstraint("edge")),
            Constraint::RegretLe { .. } | Constraint::Floor(_) => {}
        }
    }
    Ok(())
}

/// Man-optimal super-stable matching subject to regret and floor
/// constraints.
pub fn solve_superstable(profile: &PreferenceProfile, constraints: &[Constraint]) -> Result<Solution, SolveError> {
    run_superstable(profile, constraints, Schedule::Sequential)?.outcome
}

/// [`solve_superstable`] with an advancement trace.
pub fn run_superstable(
    profile: &PreferenceProfile,
    constraints: &[Constraint],
    schedule: Schedule,
) -> Result<Run, SolveError> {
    check_ties_constraints(constraints)?;
    let poset = compile_constraints(profile, constraints)?;
    let problem = SuperStableProblem::new(profile, &poset);
    let mut before = ranks(&problem.initial());
    let mut trace = Vec::new();
    let result = llp::solve_observed(&problem, schedule, |step| {
        let advanced = step
            .advanced
            .iter()
            .map(|&j| (j, problem.forbidden_superstable(&before, j).unwrap_or(Reason::BlockedByWoman)))
            .collect();
        before = ranks(step.state);
        trace.push(TraceRecord {
            step: step.number,
            forbidden_set: step.forbidden.to_vec(),
            advanced,
            g_after: ProposalVector::new(before.clone()),
        });
    });
    let outcome = match result {
        Ok(g) => {
            let g = ranks(&g);
            let y = build_y_pruned(profile, &g);
            if y.is_perfect_matching() {
                let wives = (0..g.len()).map(|m| y.neighbors(m).next().expect("degree one")).collect();
                Ok(Solution {
                    matching: Matching::total(wives).expect("perfect matching"),
                    ranks: ProposalVector::new(g),
                })
            } else {
                Err(SolveError::NoSuperStable)
            }
        }
        Err(LlpError::Infeasible { .. }) => Err(SolveError::NoSuperStable),
        Err(e) => unreachable!("super-stable predicate is well formed: {e}"),
    };
    Ok(Run { outcome, trace })
}

/// A strongly stable matching, found by advancing the critical set of the
/// proposal graph until the graph has a perfect matching.
pub fn solve_strongly_stable(profile: &PreferenceProfile) -> Result<Solution, SolveError> {
    run_strongly_stable(profile).outcome
}

/// [`solve_strongly_stable`] with an advancement trace. Among the perfect
/// matchings of the final graph the lexicographically least is returned.
pub fn run_strongly_stable(profile: &PreferenceProfile) -> Run {
    let n = profile.n();
    let mut g = alloc::vec![1usize; n];
    let mut trace = Vec::new();
    loop {
        let y = build_y_pruned(profile, &g);
        let report = y.deficiency_report();
        if report.deficiency == 0 {
            let wives = y.least_perfect_matching().expect("deficiency zero");
            let outcome = Ok(Solution {
                matching: Matching::total(wives).expect("perfect matching"),
                ranks: ProposalVector::new(g),
            });
            return Run { outcome, trace };
        }
        let critical = report.critical_set;
        if critical.iter().any(|&m| g[m] == profile.group_count(m)) {
            return Run {
                outcome: Err(SolveError::NoStronglyStable),
                trace,
            };
        }
        for &m in &critical {
            g[m] += 1;
        }
        trace.push(TraceRecord {
            step: trace.len() + 1,
            forbidden_set: critical.clone(),
            advanced: critical.iter().map(|&m| (m, Reason::Critical)).collect(),
            g_after: ProposalVector::new(g.clone()),
        });
    }
}
