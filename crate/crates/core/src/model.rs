//! Instances: preference profiles with ties, external constraints, and the
//! precedence poset over proposal events that constraints compile into.
//!
//! Men and women are identified by 0-based indices; ranks are 1-based
//! (rank 1 is an agent's top tie-group). Display impls and error messages
//! use 1-based ids, matching the instance file format.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

/// Which side of the market an agent is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Man,
    Woman,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Man => "man",
            Side::Woman => "woman",
        })
    }
}

/// A shifted-by-one id for messages.
struct Id(usize);

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("instance must have at least one man and one woman")]
    Empty,
    #[error("expected {expected} {side} preference lists, got {actual}")]
    WrongCount {
        side: Side,
        expected: usize,
        actual: usize,
    },
    #[error("{side} {} has an empty tie-group", Id(*.agent))]
    EmptyGroup { side: Side, agent: usize },
    #[error("{side} {} lists unknown id {}", Id(*.agent), Id(*.id))]
    UnknownId { side: Side, agent: usize, id: usize },
    #[error("{side} {} lists {} more than once", Id(*.agent), Id(*.id))]
    Duplicate { side: Side, agent: usize, id: usize },
    #[error("{side} {} does not rank {}", Id(*.agent), Id(*.missing))]
    Incomplete {
        side: Side,
        agent: usize,
        missing: usize,
    },
    #[error("constraint refers to unknown {side} {}", Id(*.id))]
    ConstraintId { side: Side, id: usize },
    #[error("constraint refers to rank {rank} of man {}, who has {groups} ranks", Id(*.man))]
    ConstraintRank {
        man: usize,
        rank: usize,
        groups: usize,
    },
    #[error("floor has {actual} entries for {expected} men")]
    FloorLength { expected: usize, actual: usize },
    #[error("precedence edge between two proposals of man {}", Id(*.0))]
    SelfEdge(usize),
    #[error("constraints form a precedence cycle through proposal {} of man {}", .0.rank, Id(.0.man))]
    CyclicConstraints(Event),
    #[error("{0} constraints are not supported on profiles with ties")]
    TiesUnsupported(&'static str),
    #[error("assignment gives woman {} to more than one man", Id(*.0))]
    NotInjective(usize),
}

/// Preference lists of both sides as ordered tie-groups, plus derived rank
/// tables. Every list is complete: its groups partition all ids of the other
/// side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceProfile {
    men: Vec<Vec<Vec<usize>>>,
    women: Vec<Vec<Vec<usize>>>,
    /// `mrank[m][w]`: 1-based index of the group holding `w` in `m`'s list.
    mrank: Vec<Vec<usize>>,
    /// `wrank[w][m]`, analogous.
    wrank: Vec<Vec<usize>>,
}

impl PreferenceProfile {
    pub fn new(men: Vec<Vec<Vec<usize>>>, women: Vec<Vec<Vec<usize>>>) -> Result<Self, ModelError> {
        let n = men.len();
        if n == 0 {
            return Err(ModelError::Empty);
        }
        if women.len() != n {
            return Err(ModelError::WrongCount {
                side: Side::Woman,
                expected: n,
                actual: women.len(),
            });
        }
        let mrank = rank_table(Side::Man, &men, n)?;
        let wrank = rank_table(Side::Woman, &women, n)?;
        Ok(PreferenceProfile {
            men,
            women,
            mrank,
            wrank,
        })
    }

    /// Profile without ties: `men[m]` and `women[w]` are plain orderings.
    pub fn strict(men: Vec<Vec<usize>>, women: Vec<Vec<usize>>) -> Result<Self, ModelError> {
        let singletons =
            |lists: Vec<Vec<usize>>| lists.into_iter().map(|l| l.into_iter().map(|x| vec![x]).collect()).collect();
        Self::new(singletons(men), singletons(women))
    }

    pub fn n(&self) -> usize {
        self.men.len()
    }

    pub fn men_prefs(&self) -> &[Vec<Vec<usize>>] {
        &self.men
    }

    pub fn women_prefs(&self) -> &[Vec<Vec<usize>>] {
        &self.women
    }

    /// Number of tie-groups in man `m`'s list.
    pub fn group_count(&self, m: usize) -> usize {
        self.men[m].len()
    }

    /// Man `m`'s tie-group at 1-based `rank`.
    pub fn group(&self, m: usize, rank: usize) -> &[usize] {
        &self.men[m][rank - 1]
    }

    /// The woman at 1-based `rank` for man `m`; the first of the group when
    /// the group is a tie.
    pub fn mpref(&self, m: usize, rank: usize) -> usize {
        self.men[m][rank - 1][0]
    }

    pub fn mrank(&self, m: usize, w: usize) -> usize {
        self.mrank[m][w]
    }

    pub fn wrank(&self, w: usize, m: usize) -> usize {
        self.wrank[w][m]
    }

    /// True when every tie-group on both sides is a singleton.
    pub fn is_strict(&self) -> bool {
        self.men.iter().chain(&self.women).all(|l| l.iter().all(|g| g.len() == 1))
    }

    /// Orders each tie-group by id, yielding a strict profile. Any stable
    /// matching of the result is weakly stable for `self`.
    pub fn break_ties_by_id(&self) -> PreferenceProfile {
        self.break_ties_with(|group| group.sort_unstable())
    }

    /// Splits every tie-group into singletons, ordering each group with
    /// `arrange`.
    pub fn break_ties_with<F: FnMut(&mut Vec<usize>)>(&self, mut arrange: F) -> PreferenceProfile {
        let mut split = |lists: &[Vec<Vec<usize>>]| -> Vec<Vec<Vec<usize>>> {
            lists
                .iter()
                .map(|list| {
                    list.iter()
                        .flat_map(|group| {
                            let mut g = group.clone();
                            arrange(&mut g);
                            g.into_iter().map(|x| vec![x])
                        })
                        .collect()
                })
                .collect()
        };
        let men = split(&self.men);
        let women = split(&self.women);
        PreferenceProfile::new(men, women).expect("splitting groups keeps lists complete")
    }
}

fn rank_table(side: Side, lists: &[Vec<Vec<usize>>], n: usize) -> Result<Vec<Vec<usize>>, ModelError> {
    let mut table = vec![vec![0; n]; lists.len()];
    for (agent, list) in lists.iter().enumerate() {
        for (k, group) in list.iter().enumerate() {
            if group.is_empty() {
                return Err(ModelError::EmptyGroup { side, agent });
            }
            for &id in group {
                if id >= n {
                    return Err(ModelError::UnknownId { side, agent, id });
                }
                if table[agent][id] != 0 {
                    return Err(ModelError::Duplicate { side, agent, id });
                }
                table[agent][id] = k + 1;
            }
        }
        if let Some(missing) = table[agent].iter().position(|&r| r == 0) {
            return Err(ModelError::Incomplete { side, agent, missing });
        }
    }
    Ok(table)
}

/// A proposal event: man `man` proposing at 1-based `rank`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub man: usize,
    pub rank: usize,
}

impl Event {
    pub fn new(man: usize, rank: usize) -> Self {
        Event { man, rank }
    }
}

/// External constraints on the man-rank vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    /// Regret of man `a` is at most the regret of man `b`.
    RegretLe { a: usize, b: usize },
    /// `man` must not be matched with `woman`.
    Forbid { man: usize, woman: usize },
    /// The proposal vector is at least this (1-based ranks, one per man).
    Floor(Vec<usize>),
    /// Proposal `from` must precede proposal `to`.
    Edge { from: Event, to: Event },
}

impl Constraint {
    /// Forces `man` to marry `woman` in an instance of size `n`, as one
    /// forbidden pair for every other woman. Advancing past `woman` then
    /// exhausts his list.
    pub fn forced_pair(n: usize, man: usize, woman: usize) -> Vec<Constraint> {
        (0..n)
            .filter(|&w| w != woman)
            .map(|w| Constraint::Forbid { man, woman: w })
            .collect()
    }
}

/// Compiled constraints: precedence edges between proposals of different
/// men, forbidden pairs, and the rank window each man may occupy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintPoset {
    edges: BTreeSet<(Event, Event)>,
    /// `by_source[j]` holds `(s, target)` for each edge `(j, s) -> target`.
    by_source: Vec<Vec<(usize, Event)>>,
    /// `prerequisites[i][r - 1]` holds the sources of edges into `(i, r)`.
    prerequisites: Vec<Vec<Vec<Event>>>,
    forbidden_pairs: BTreeSet<(usize, usize)>,
    floor: Vec<usize>,
    ceiling: Vec<usize>,
}

impl ConstraintPoset {
    /// The unconstrained poset for `profile`.
    pub fn empty(profile: &PreferenceProfile) -> Self {
        let n = profile.n();
        ConstraintPoset {
            edges: BTreeSet::new(),
            by_source: vec![Vec::new(); n],
            prerequisites: (0..n).map(|m| vec![Vec::new(); profile.group_count(m)]).collect(),
            forbidden_pairs: BTreeSet::new(),
            floor: vec![1; n],
            ceiling: (0..n).map(|m| profile.group_count(m)).collect(),
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (Event, Event)> + '_ {
        self.edges.iter().copied()
    }

    /// Number of cross-man precedence edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty() && self.forbidden_pairs.is_empty() && self.floor.iter().all(|&f| f == 1)
    }

    /// Sources of the edges into proposal `(man, rank)`.
    pub fn prerequisites(&self, man: usize, rank: usize) -> &[Event] {
        &self.prerequisites[man][rank - 1]
    }

    pub fn is_forbidden_pair(&self, man: usize, woman: usize) -> bool {
        self.forbidden_pairs.contains(&(man, woman))
    }

    pub fn forbidden_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.forbidden_pairs.iter().copied()
    }

    /// Least admissible rank per man, closed under the precedence edges.
    pub fn floor(&self) -> &[usize] {
        &self.floor
    }

    /// Greatest admissible rank per man.
    pub fn ceiling(&self) -> &[usize] {
        &self.ceiling
    }

    /// Whether the proposals executed in `g` are downward closed: no edge
    /// leads from an unexecuted proposal to an executed one.
    pub fn is_consistent(&self, g: &[usize]) -> bool {
        (0..g.len()).all(|j| !self.blocks(g, j))
    }

    /// Whether some proposal of man `j` that `g` has not executed yet must
    /// precede an executed proposal of another man. Such a man has to
    /// advance.
    pub fn blocks(&self, g: &[usize], j: usize) -> bool {
        self.by_source[j]
            .iter()
            .any(|&(s, to)| s > g[j] && to.rank <= g[to.man])
    }
}

/// Validates `constraints` against `profile` and compiles them.
///
/// `RegretLe { a, b }` becomes the edges `(b, r) -> (a, r)` for every rank
/// `r` both men have, so man `a` reaches rank `r` only after man `b` did.
/// Forbidden pairs and floors are recorded as is; floors are then closed
/// under the edges. Forbidden pairs and raw edges need a strict profile.
pub fn compile_constraints(
    profile: &PreferenceProfile,
    constraints: &[Constraint],
) -> Result<ConstraintPoset, ModelError> {
    let n = profile.n();
    let mut poset = ConstraintPoset::empty(profile);
    let man = |id: usize| {
        if id < n {
            Ok(id)
        } else {
            Err(ModelError::ConstraintId { side: Side::Man, id })
        }
    };
    let rank = |m: usize, r: usize| {
        let groups = profile.group_count(m);
        if (1..=groups).contains(&r) {
            Ok(r)
        } else {
            Err(ModelError::ConstraintRank { man: m, rank: r, groups })
        }
    };

    for constraint in constraints {
        match *constraint {
            Constraint::RegretLe { a, b } => {
                let (a, b) = (man(a)?, man(b)?);
                if a == b {
                    continue;
                }
                let (la, lb) = (profile.group_count(a), profile.group_count(b));
                for r in 1..=la.min(lb) {
                    poset.edges.insert((Event::new(b, r), Event::new(a, r)));
                }
                poset.ceiling[a] = poset.ceiling[a].min(lb);
            }
            Constraint::Forbid { man: m, woman } => {
                if !profile.is_strict() {
                    return Err(ModelError::TiesUnsupported("forbid"));
                }
                let m = man(m)?;
                if woman >= n {
                    return Err(ModelError::ConstraintId {
                        side: Side::Woman,
                        id: woman,
                    });
                }
                poset.forbidden_pairs.insert((m, woman));
            }
            Constraint::Floor(ref floor) => {
                if floor.len() != n {
                    return Err(ModelError::FloorLength {
                        expected: n,
                        actual: floor.len(),
                    });
                }
                for (m, &f) in floor.iter().enumerate() {
                    poset.floor[m] = poset.floor[m].max(rank(m, f)?);
                }
            }
            Constraint::Edge { from, to } => {
                if !profile.is_strict() {
                    return Err(ModelError::TiesUnsupported("edge"));
                }
                let from = Event::new(man(from.man)?, rank(from.man, from.rank)?);
                let to = Event::new(man(to.man)?, rank(to.man, to.rank)?);
                if from.man == to.man {
                    return Err(ModelError::SelfEdge(from.man));
                }
                poset.edges.insert((from, to));
            }
        }
    }

    for &(from, to) in &poset.edges {
        poset.by_source[from.man].push((from.rank, to));
        poset.prerequisites[to.man][to.rank - 1].push(from);
    }
    if let Some(event) = find_cycle(profile, &poset) {
        return Err(ModelError::CyclicConstraints(event));
    }
    close_floor(&mut poset);
    Ok(poset)
}

/// Kahn's algorithm over all proposal events, with the implicit chain
/// `(m, r) -> (m, r + 1)` for every man.
fn find_cycle(profile: &PreferenceProfile, poset: &ConstraintPoset) -> Option<Event> {
    let n = profile.n();
    let offset: Vec<usize> = (0..n)
        .scan(0, |acc, m| {
            let start = *acc;
            *acc += profile.group_count(m);
            Some(start)
        })
        .collect();
    let total: usize = (0..n).map(|m| profile.group_count(m)).sum();
    let index = |e: Event| offset[e.man] + e.rank - 1;
    let mut successors = vec![Vec::new(); total];
    let mut indegree = vec![0usize; total];
    for m in 0..n {
        for r in 1..profile.group_count(m) {
            successors[index(Event::new(m, r))].push(index(Event::new(m, r + 1)));
            indegree[index(Event::new(m, r + 1))] += 1;
        }
    }
    for &(from, to) in &poset.edges {
        successors[index(from)].push(index(to));
        indegree[index(to)] += 1;
    }
    let mut ready: Vec<usize> = (0..total).filter(|&v| indegree[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = ready.pop() {
        seen += 1;
        for &w in &successors[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.push(w);
            }
        }
    }
    if seen == total {
        return None;
    }
    let stuck = (0..total).find(|&v| indegree[v] > 0)?;
    let man = offset.iter().rposition(|&o| o <= stuck)?;
    Some(Event::new(man, stuck - offset[man] + 1))
}

/// Raises floors until they form a consistent state: if man `i` must reach
/// rank `r` and `(j, s) -> (i, r)`, then man `j` must reach rank `s`.
fn close_floor(poset: &mut ConstraintPoset) {
    let mut changed = true;
    while changed {
        changed = false;
        for &(from, to) in &poset.edges {
            if poset.floor[to.man] >= to.rank && poset.floor[from.man] < from.rank {
                poset.floor[from.man] = from.rank;
                changed = true;
            }
        }
    }
}

/// Per-man rank vector: the coordinate in the proposal lattice.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProposalVector(Vec<usize>);

impl ProposalVector {
    pub fn new(ranks: Vec<usize>) -> Self {
        ProposalVector(ranks)
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    /// Componentwise minimum.
    pub fn meet(&self, other: &ProposalVector) -> ProposalVector {
        ProposalVector(self.0.iter().zip(&other.0).map(|(&a, &b)| a.min(b)).collect())
    }

    /// Componentwise maximum.
    pub fn join(&self, other: &ProposalVector) -> ProposalVector {
        ProposalVector(self.0.iter().zip(&other.0).map(|(&a, &b)| a.max(b)).collect())
    }

    /// `self <= other` componentwise.
    pub fn le(&self, other: &ProposalVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl Deref for ProposalVector {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for ProposalVector {
    fn from(ranks: Vec<usize>) -> Self {
        ProposalVector(ranks)
    }
}

impl fmt::Display for ProposalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("]")
    }
}

/// Injective partial map from men to women.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matching(Vec<Option<usize>>);

impl Matching {
    /// Checks injectivity.
    pub fn new(partner: Vec<Option<usize>>) -> Result<Self, ModelError> {
        let mut taken = BTreeSet::new();
        for &w in partner.iter().flatten() {
            if !taken.insert(w) {
                return Err(ModelError::NotInjective(w));
            }
        }
        Ok(Matching(partner))
    }

    /// Total matching; `partner[m]` is man `m`'s wife.
    pub fn total(partner: Vec<usize>) -> Result<Self, ModelError> {
        Self::new(partner.into_iter().map(Some).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_total(&self) -> bool {
        self.0.iter().all(Option::is_some)
    }

    pub fn wife(&self, man: usize) -> Option<usize> {
        self.0[man]
    }

    pub fn husband(&self, woman: usize) -> Option<usize> {
        self.0.iter().position(|&w| w == Some(woman))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().enumerate().filter_map(|(m, w)| w.map(|w| (m, w)))
    }

    /// Each matched man's rank of his wife; unmatched men get rank 0.
    pub fn rank_vector(&self, profile: &PreferenceProfile) -> ProposalVector {
        ProposalVector(
            self.0
                .iter()
                .enumerate()
                .map(|(m, w)| w.map_or(0, |w| profile.mrank(m, w)))
                .collect(),
        )
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (m, w)) in self.pairs().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "P{}:w{}", m + 1, w + 1)?;
        }
        Ok(())
    }
}
