//! Generic lattice-linear predicate fixpoint engine.
//!
//! A problem describes a bounded lattice of integer vectors, a `forbidden`
//! test per index and an `advance` function giving the value a forbidden
//! index must at least reach. The engine repeatedly advances forbidden
//! indices until none is left, returning the least vector (in the problem's
//! [`Order`]) on which no index is forbidden, or [`LlpError::Infeasible`]
//! when some advance would overshoot the bound.
//!
//! Because the predicate is lattice-linear, the result does not depend on
//! which forbidden indices are advanced first, nor on whether `forbidden` is
//! evaluated against slightly stale copies of the other components. The
//! [`Schedule`] variants exercise exactly that freedom.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod job;
mod shortest;
#[cfg(feature = "std")]
mod threaded;

pub use job::{JobScheduling, JobSchedulingError};
pub use shortest::{ShortestPath, UNREACHABLE};
#[cfg(feature = "std")]
pub use threaded::solve_threaded;

/// Component type of every state vector handled by the engine.
pub type Value = u64;

/// Direction in which components advance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Order {
    /// The usual lattice: components only grow, the bound is a top.
    #[default]
    Ascending,
    /// The order-reversed lattice: components only shrink, the bound is a
    /// floor.
    Descending,
}

impl Order {
    /// Whether moving a component from `from` to `to` is strict progress.
    pub fn advances(self, from: Value, to: Value) -> bool {
        match self {
            Order::Ascending => to > from,
            Order::Descending => to < from,
        }
    }

    /// Whether `value` lies beyond `bound`.
    pub fn exceeds(self, value: Value, bound: Value) -> bool {
        match self {
            Order::Ascending => value > bound,
            Order::Descending => value < bound,
        }
    }

    /// `a <= b` in this order, componentwise.
    pub fn dominated(self, a: &[Value], b: &[Value]) -> bool {
        a.iter().zip(b).all(|(&x, &y)| x == y || self.advances(x, y))
    }
}

/// A lattice-linear predicate together with its advancement rule.
///
/// Implementations must obey two contracts the engine relies on:
///
/// - `advance(g, j)` strictly progresses `g[j]` whenever `forbidden(g, j)`;
/// - `forbidden` is monotone-safe: if `forbidden(g, j)` and `h` is at or
///   beyond `g` with `h[j] == g[j]`, then `forbidden(h, j)`.
///
/// The first is checked at run time ([`LlpError::Malformed`]); the second is
/// what makes every schedule converge to the same fixpoint.
pub trait LatticeLinear {
    /// Number of components.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn order(&self) -> Order {
        Order::Ascending
    }

    /// Starting vector. It must already lie within the bounds.
    fn initial(&self) -> Vec<Value>;

    /// Bound on component `j`: a top for ascending problems, a floor for
    /// descending ones.
    fn bound(&self, j: usize) -> Value;

    fn forbidden(&self, g: &[Value], j: usize) -> bool;

    /// New value for a forbidden component `j`.
    fn advance(&self, g: &[Value], j: usize) -> Value;

    /// Tie-break used by [`Schedule::Sequential`]: among forbidden indices,
    /// the lowest `(priority, index)` pair advances first.
    fn priority(&self, _g: &[Value], _j: usize) -> u32 {
        0
    }
}

impl<P: LatticeLinear + ?Sized> LatticeLinear for &P {
    fn len(&self) -> usize {
        (**self).len()
    }
    fn order(&self) -> Order {
        (**self).order()
    }
    fn initial(&self) -> Vec<Value> {
        (**self).initial()
    }
    fn bound(&self, j: usize) -> Value {
        (**self).bound(j)
    }
    fn forbidden(&self, g: &[Value], j: usize) -> bool {
        (**self).forbidden(g, j)
    }
    fn advance(&self, g: &[Value], j: usize) -> Value {
        (**self).advance(g, j)
    }
    fn priority(&self, g: &[Value], j: usize) -> u32 {
        (**self).priority(g, j)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LlpError {
    /// No vector within the bounds satisfies the predicate.
    #[error("infeasible: component {index} must reach {attempted}, beyond bound {bound}")]
    Infeasible {
        index: usize,
        attempted: Value,
        bound: Value,
    },
    /// The problem broke the strict-progress contract.
    #[error("malformed problem: advance of component {index} from {current} to {proposed} is not progress")]
    Malformed {
        index: usize,
        current: Value,
        proposed: Value,
    },
    #[error("initial vector has {actual} components, expected {expected}")]
    WrongLength { expected: usize, actual: usize },
}

/// Order in which forbidden indices are advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// One index per step: the lowest `(priority, index)` among the
    /// forbidden ones. Deterministic reference ordering.
    #[default]
    Sequential,
    /// Each step advances a seeded random non-empty subset of the forbidden
    /// indices simultaneously, all computed from the same snapshot.
    Parallel { seed: u64 },
    /// Each step picks one forbidden index and evaluates it against a
    /// snapshot up to `staleness` updates old (its own component is always
    /// current). Readers fall back to a fresh snapshot after `staleness + 1`
    /// consecutive no-op reads.
    Stale { seed: u64, staleness: usize },
}

/// One advancement step, as reported to observers.
#[derive(Debug)]
pub struct Step<'a> {
    /// 1-based step number.
    pub number: usize,
    /// Indices forbidden in the state before the step.
    pub forbidden: &'a [usize],
    /// Indices advanced in this step.
    pub advanced: &'a [usize],
    /// State after the step.
    pub state: &'a [Value],
}

/// Runs `problem` to its least fixpoint.
pub fn solve<P: LatticeLinear + ?Sized>(
    problem: &P,
    schedule: Schedule,
) -> Result<Vec<Value>, LlpError> {
    solve_observed(problem, schedule, |_| {})
}

/// Like [`solve`], calling `observer` after every step.
pub fn solve_observed<P, F>(
    problem: &P,
    schedule: Schedule,
    mut observer: F,
) -> Result<Vec<Value>, LlpError>
where
    P: LatticeLinear + ?Sized,
    F: FnMut(&Step<'_>),
{
    let n = problem.len();
    let order = problem.order();
    let mut g = problem.initial();
    if g.len() != n {
        return Err(LlpError::WrongLength {
            expected: n,
            actual: g.len(),
        });
    }
    for (j, &v) in g.iter().enumerate() {
        let bound = problem.bound(j);
        if order.exceeds(v, bound) {
            return Err(LlpError::Infeasible {
                index: j,
                attempted: v,
                bound,
            });
        }
    }

    let seed = match schedule {
        Schedule::Sequential => 0,
        Schedule::Parallel { seed } | Schedule::Stale { seed, .. } => seed,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut history: VecDeque<Vec<Value>> = VecDeque::new();
    let mut idle_reads = 0usize;
    let mut step = 0usize;
    let mut forbidden = Vec::with_capacity(n);
    let mut advanced = Vec::with_capacity(n);

    loop {
        forbidden.clear();
        forbidden.extend((0..n).filter(|&j| problem.forbidden(&g, j)));
        if forbidden.is_empty() {
            return Ok(g);
        }
        advanced.clear();

        match schedule {
            Schedule::Sequential => {
                let j = *forbidden
                    .iter()
                    .min_by_key(|&&j| (problem.priority(&g, j), j))
                    .expect("non-empty");
                g[j] = checked_advance(problem, &g, j)?;
                advanced.push(j);
            }
            Schedule::Parallel { .. } => {
                for &j in &forbidden {
                    if rng.gen_bool(0.5) {
                        advanced.push(j);
                    }
                }
                if advanced.is_empty() {
                    advanced.push(forbidden[rng.gen_range(0..forbidden.len())]);
                }
                let updates = advanced
                    .iter()
                    .map(|&j| checked_advance(problem, &g, j).map(|v| (j, v)))
                    .collect::<Result<Vec<_>, _>>()?;
                for (j, v) in updates {
                    g[j] = v;
                }
            }
            Schedule::Stale { staleness, .. } => {
                let j = forbidden[rng.gen_range(0..forbidden.len())];
                let age = if idle_reads > staleness || history.is_empty() {
                    0
                } else {
                    rng.gen_range(0..=staleness.min(history.len()))
                };
                let mut view = if age == 0 {
                    g.clone()
                } else {
                    history[history.len() - age].clone()
                };
                view[j] = g[j];
                if problem.forbidden(&view, j) {
                    idle_reads = 0;
                    let v = checked_advance(problem, &view, j)?;
                    history.push_back(g.clone());
                    if history.len() > staleness {
                        history.pop_front();
                    }
                    g[j] = v;
                    advanced.push(j);
                } else {
                    idle_reads += 1;
                    continue;
                }
            }
        }

        step += 1;
        observer(&Step {
            number: step,
            forbidden: &forbidden,
            advanced: &advanced,
            state: &g,
        });
    }
}

fn checked_advance<P: LatticeLinear + ?Sized>(
    problem: &P,
    view: &[Value],
    j: usize,
) -> Result<Value, LlpError> {
    let order = problem.order();
    let current = view[j];
    let proposed = problem.advance(view, j);
    if !order.advances(current, proposed) {
        return Err(LlpError::Malformed {
            index: j,
            current,
            proposed,
        });
    }
    let bound = problem.bound(j);
    if order.exceeds(proposed, bound) {
        return Err(LlpError::Infeasible {
            index: j,
            attempted: proposed,
            bound,
        });
    }
    Ok(proposed)
}
