//! Man-optimal stable marriage, plain and under external constraints, for
//! profiles without ties.
//!
//! The state is the proposal vector `g`: man `j` is currently proposing to
//! `mpref[j][g[j]]` and has already proposed to everyone he ranks above her.
//! A man is forbidden (must move on) when his current woman has a proposal
//! from someone she likes better, when she is a forbidden partner for him,
//! or when he has not yet made a proposal that an executed proposal of
//! another man depends on.

use alloc::vec::Vec;

use crate::llp::{self, LatticeLinear, LlpError, Schedule, Value};
use crate::model::{compile_constraints, Constraint, ConstraintPoset, Matching, ModelError, PreferenceProfile, ProposalVector};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("this solver needs strict preferences; the profile has ties")]
    TiesPresent,
    #[error("{0} constraints are not supported by this solver")]
    UnsupportedConstraint(&'static str),
    #[error("no stable marriage: man {} ran out of proposals", .man + 1)]
    NoStableMarriage { man: usize },
    #[error("no constrained stable marriage: man {} ran out of proposals", .man + 1)]
    NoConstrainedStableMarriage { man: usize },
    #[error("no super stable marriage")]
    NoSuperStable,
    #[error("no strongly stable marriage")]
    NoStronglyStable,
}

impl SolveError {
    /// True for verdicts saying no matching of the requested kind exists, as
    /// opposed to bad input.
    pub fn is_nonexistence(&self) -> bool {
        matches!(
            self,
            SolveError::NoStableMarriage { .. }
                | SolveError::NoConstrainedStableMarriage { .. }
                | SolveError::NoSuperStable
                | SolveError::NoStronglyStable
        )
    }
}

/// Why a man had to advance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Reason {
    /// His current woman has a better proposal.
    BlockedByWoman,
    /// His current woman is a forbidden partner.
    ForbiddenPair,
    /// A proposal of his must precede an executed proposal of another man.
    ConstraintViolation,
    /// He belongs to the critical set of the proposal graph.
    Critical,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::BlockedByWoman => "blocked-by-woman",
            Reason::ForbiddenPair => "forbidden-pair",
            Reason::ConstraintViolation => "constraint-violation",
            Reason::Critical => "critical",
        }
    }
}

/// One advancement step of a solver run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    /// 1-based.
    pub step: usize,
    /// Men forbidden before the step.
    pub forbidden_set: Vec<usize>,
    /// Men advanced in this step, each with the reason.
    pub advanced: Vec<(usize, Reason)>,
    pub g_after: ProposalVector,
}

/// How the first forbidden disjunct is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Evaluation {
    /// Scan every proposal `k <= g[i]` of every other man.
    #[default]
    Reference,
    /// Look up each other man's rank of the woman directly.
    Indexed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveOptions {
    pub schedule: Schedule,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub matching: Matching,
    pub ranks: ProposalVector,
}

/// A traced run. Compile errors are reported before a run starts; the
/// outcome only carries nonexistence verdicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub outcome: Result<Solution, SolveError>,
    pub trace: Vec<TraceRecord>,
}

/// The constrained marriage predicate over a strict profile.
#[derive(Debug, Clone)]
pub struct MarriageProblem<'a> {
    profile: &'a PreferenceProfile,
    poset: &'a ConstraintPoset,
    evaluation: Evaluation,
}

impl<'a> MarriageProblem<'a> {
    /// `profile` must be strict.
    pub fn new(profile: &'a PreferenceProfile, poset: &'a ConstraintPoset, evaluation: Evaluation) -> Self {
        debug_assert!(profile.is_strict());
        MarriageProblem {
            profile,
            poset,
            evaluation,
        }
    }

    /// Whether man `j` is forbidden in `g` (1-based ranks), and why.
    pub fn forbidden_marriage(&self, g: &[usize], j: usize) -> Option<Reason> {
        let p = self.profile;
        let z = p.mpref(j, g[j]);
        let mine = p.wrank(z, j);
        let outranked = match self.evaluation {
            Evaluation::Reference => (0..g.len())
                .filter(|&i| i != j)
                .any(|i| (1..=g[i]).any(|k| p.mpref(i, k) == z && p.wrank(z, i) < mine)),
            Evaluation::Indexed => (0..g.len())
                .filter(|&i| i != j)
                .any(|i| p.mrank(i, z) <= g[i] && p.wrank(z, i) < mine),
        };
        if outranked {
            Some(Reason::BlockedByWoman)
        } else if self.poset.is_forbidden_pair(j, z) {
            Some(Reason::ForbiddenPair)
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

impl LatticeLinear for MarriageProblem<'_> {
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
        self.forbidden_marriage(&ranks(g), j).is_some()
    }

    fn advance(&self, g: &[Value], j: usize) -> Value {
        g[j] + 1
    }

    /// Rejections are handled before constraint-driven advances.
    fn priority(&self, g: &[Value], j: usize) -> u32 {
        match self.forbidden_marriage(&ranks(g), j) {
            Some(Reason::ConstraintViolation) => 1,
            _ => 0,
        }
    }
}

fn matching_at(profile: &PreferenceProfile, g: &[usize]) -> Matching {
    Matching::total((0..g.len()).map(|m| profile.mpref(m, g[m])).collect())
        .expect("a fixpoint assigns distinct women")
}

/// Man-optimal stable matching of a strict profile.
pub fn solve_stable(profile: &PreferenceProfile) -> Result<Matching, SolveError> {
    if !profile.is_strict() {
        return Err(SolveError::TiesPresent);
    }
    let poset = ConstraintPoset::empty(profile);
    let problem = MarriageProblem::new(profile, &poset, Evaluation::Indexed);
    match llp::solve(&problem, Schedule::Sequential) {
        Ok(g) => Ok(matching_at(profile, &ranks(&g))),
        Err(LlpError::Infeasible { index, .. }) => Err(SolveError::NoStableMarriage { man: index }),
        Err(e) => unreachable!("marriage predicate is well formed: {e}"),
    }
}

/// Man-optimal stable matching satisfying `constraints`.
pub fn solve_constrained(profile: &PreferenceProfile, constraints: &[Constraint]) -> Result<Solution, SolveError> {
    run_constrained(profile, constraints, SolveOptions::default())?.outcome
}

/// [`solve_constrained`] with a full advancement trace.
pub fn run_constrained(
    profile: &PreferenceProfile,
    constraints: &[Constraint],
    options: SolveOptions,
) -> Result<Run, SolveError> {
    if !profile.is_strict() {
        return Err(SolveError::TiesPresent);
    }
    let poset = compile_constraints(profile, constraints)?;
    Ok(run_compiled(profile, &poset, options))
}

/// Runs the constrained solver on an already compiled poset.
pub fn run_compiled(profile: &PreferenceProfile, poset: &ConstraintPoset, options: SolveOptions) -> Run {
    let problem = MarriageProblem::new(profile, poset, options.evaluation);
    let mut before = ranks(&problem.initial());
    let mut trace = Vec::new();
    let result = llp::solve_observed(&problem, options.schedule, |step| {
        let advanced = step
            .advanced
            .iter()
            .map(|&j| {
                let reason = problem.forbidden_marriage(&before, j).unwrap_or(Reason::BlockedByWoman);
                (j, reason)
            })
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
            Ok(Solution {
                matching: matching_at(profile, &g),
                ranks: ProposalVector::new(g),
            })
        }
        Err(LlpError::Infeasible { index, .. }) => Err(SolveError::NoConstrainedStableMarriage { man: index }),
        Err(e) => unreachable!("marriage predicate is well formed: {e}"),
    };
    Run { outcome, trace }
}
