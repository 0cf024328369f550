//! Brute-force ground truth for small instances.
//!
//! Everything here is computed from the raw tie-groups by direct scans over
//! all `n!` perfect matchings and all `n^2` pairs. Nothing is shared with
//! the solvers, so a solver bug cannot hide behind a shared helper.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{Constraint, Matching, PreferenceProfile};

/// Largest `n` the oracle accepts.
pub const MAX_N: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("instance too large for exhaustive search: n = {n}, limit {MAX_N}")]
    TooLarge { n: usize },
    #[error("the class has no componentwise least rank vector")]
    LatticeViolation,
}

/// Stability verdicts for one perfect matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StabilityClass {
    /// Profile is strict and no pair strictly prefers each other.
    pub classic_stable: bool,
    /// No pair where both strictly prefer each other.
    pub weakly_stable: bool,
    /// No pair where both weakly prefer each other.
    pub super_stable: bool,
    /// No pair where one strictly and the other weakly prefers.
    pub strongly_stable: bool,
    pub satisfies_constraints: bool,
}

/// Stability notion selected by [`minimum_stable`]. Every class is
/// intersected with the constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Classic,
    Weak,
    Super,
    Strong,
}

impl StabilityClass {
    pub fn is(&self, class: Class) -> bool {
        self.satisfies_constraints
            && match class {
                Class::Classic => self.classic_stable,
                Class::Weak => self.weakly_stable,
                Class::Super => self.super_stable,
                Class::Strong => self.strongly_stable,
            }
    }
}

/// All `n!` perfect matchings in lexicographic order of the wife sequence.
pub fn enumerate_matchings(n: usize) -> Result<Permutations, OracleError> {
    if n > MAX_N {
        return Err(OracleError::TooLarge { n });
    }
    Ok(Permutations {
        next: Some((0..n).collect()),
    })
}

/// Iterator behind [`enumerate_matchings`].
#[derive(Debug, Clone)]
pub struct Permutations {
    next: Option<Vec<usize>>,
}

impl Iterator for Permutations {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        let current = self.next.take()?;
        let mut p = current.clone();
        // Standard next-permutation step.
        if let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) {
            let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot exists");
            p.swap(i - 1, j);
            p[i..].reverse();
            self.next = Some(p);
        }
        Some(Matching::total(current).expect("permutation"))
    }
}

/// Rank tables rebuilt from the raw tie-groups.
struct Ranks {
    n: usize,
    man: Vec<Vec<usize>>,
    woman: Vec<Vec<usize>>,
    strict: bool,
}

impl Ranks {
    fn of(profile: &PreferenceProfile) -> Self {
        let table = |lists: &[Vec<Vec<usize>>]| {
            let mut t = vec![vec![0; lists.len()]; lists.len()];
            for (a, list) in lists.iter().enumerate() {
                for (k, group) in list.iter().enumerate() {
                    for &x in group {
                        t[a][x] = k + 1;
                    }
                }
            }
            t
        };
        let strict = profile
            .men_prefs()
            .iter()
            .chain(profile.women_prefs())
            .flatten()
            .all(|group| group.len() == 1);
        Ranks {
            n: profile.men_prefs().len(),
            man: table(profile.men_prefs()),
            woman: table(profile.women_prefs()),
            strict,
        }
    }
}

/// Classifies the perfect matching `wife` (wife of each man).
#[allow(clippy::needless_range_loop)]
fn classify_with(ranks: &Ranks, wife: &[usize], constraints: &[Constraint]) -> StabilityClass {
    let n = ranks.n;
    let mut husband = vec![0; n];
    for (m, &w) in wife.iter().enumerate() {
        husband[w] = m;
    }
    let (mut weak, mut sup, mut strong) = (true, true, true);
    for m in 0..n {
        for w in 0..n {
            if wife[m] == w {
                continue;
            }
            let man_now = ranks.man[m][wife[m]];
            let man_there = ranks.man[m][w];
            let woman_now = ranks.woman[w][husband[w]];
            let woman_there = ranks.woman[w][m];
            let man_strict = man_there < man_now;
            let man_weak = man_there <= man_now;
            let woman_strict = woman_there < woman_now;
            let woman_weak = woman_there <= woman_now;
            if man_strict && woman_strict {
                weak = false;
            }
            if man_weak && woman_weak {
                sup = false;
            }
            if (man_weak && woman_strict) || (man_strict && woman_weak) {
                strong = false;
            }
        }
    }
    let regret: Vec<usize> = (0..n).map(|m| ranks.man[m][wife[m]]).collect();
    let satisfies = constraints.iter().all(|c| match *c {
        Constraint::RegretLe { a, b } => regret[a] <= regret[b],
        Constraint::Forbid { man, woman } => wife[man] != woman,
        Constraint::Floor(ref floor) => regret.iter().zip(floor).all(|(r, f)| r >= f),
        Constraint::Edge { from, to } => regret[to.man] < to.rank || regret[from.man] >= from.rank,
    });
    StabilityClass {
        classic_stable: ranks.strict && weak,
        weakly_stable: weak,
        super_stable: sup,
        strongly_stable: strong,
        satisfies_constraints: satisfies,
    }
}

/// Stability flags of a total `matching`.
pub fn classify(matching: &Matching, profile: &PreferenceProfile, constraints: &[Constraint]) -> StabilityClass {
    let wife: Vec<usize> = (0..matching.len())
        .map(|m| matching.wife(m).expect("classify needs a total matching"))
        .collect();
    classify_with(&Ranks::of(profile), &wife, constraints)
}

/// Every perfect matching in `class`, in enumeration order.
pub fn all_in_class(
    profile: &PreferenceProfile,
    constraints: &[Constraint],
    class: Class,
) -> Result<Vec<Matching>, OracleError> {
    let ranks = Ranks::of(profile);
    Ok(enumerate_matchings(ranks.n)?
        .filter(|m| {
            let wife: Vec<usize> = m.pairs().map(|(_, w)| w).collect();
            classify_with(&ranks, &wife, constraints).is(class)
        })
        .collect())
}

/// Each man's rank of his wife, from the raw tie-groups.
pub fn rank_vector(matching: &Matching, profile: &PreferenceProfile) -> Vec<usize> {
    let ranks = Ranks::of(profile);
    matching.pairs().map(|(m, w)| ranks.man[m][w]).collect()
}

/// The member of `class` whose rank vector is the componentwise minimum.
/// When several matchings share that vector (possible with ties) the first
/// in enumeration order is returned.
pub fn minimum_stable(
    profile: &PreferenceProfile,
    constraints: &[Constraint],
    class: Class,
) -> Result<Option<Matching>, OracleError> {
    let members = all_in_class(profile, constraints, class)?;
    let Some(first) = members.first() else {
        return Ok(None);
    };
    let vectors: Vec<Vec<usize>> = members.iter().map(|m| rank_vector(m, profile)).collect();
    let mut least = rank_vector(first, profile);
    for v in &vectors {
        for (l, x) in least.iter_mut().zip(v) {
            *l = (*l).min(*x);
        }
    }
    match vectors.iter().position(|v| *v == least) {
        Some(i) => Ok(Some(members[i].clone())),
        None => Err(OracleError::LatticeViolation),
    }
}
