//! Bipartite graphs between men and women: maximum matchings, Hall
//! deficiency and critical sets.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

/// Undirected bipartite graph on `n` men and `n` women.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    /// `adj[m]`: women adjacent to man `m`.
    adj: Vec<BTreeSet<usize>>,
}

/// Outcome of a deficiency analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeficiencyReport {
    pub max_matching_size: usize,
    /// `max |Z| - |N(Z)|` over all sets of men `Z`, including the empty set.
    pub deficiency: usize,
    /// Least set of men attaining the deficiency; empty iff it is zero.
    pub critical_set: Vec<usize>,
}

impl BipartiteGraph {
    pub fn new(n: usize) -> Self {
        BipartiteGraph {
            adj: vec![BTreeSet::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::new(n);
        for (m, w) in edges {
            g.add_edge(m, w);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, man: usize, woman: usize) {
        assert!(man < self.n() && woman < self.n(), "edge ({man}, {woman}) out of range");
        self.adj[man].insert(woman);
    }

    pub fn has_edge(&self, man: usize, woman: usize) -> bool {
        self.adj[man].contains(&woman)
    }

    pub fn neighbors(&self, man: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[man].iter().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(m, ws)| ws.iter().map(move |&w| (m, w)))
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum()
    }

    /// Women adjacent to at least one man of `men`.
    pub fn neighborhood(&self, men: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        men.into_iter().flat_map(|m| self.adj[m].iter().copied()).collect()
    }

    /// Whether the graph itself is a perfect matching: every man and every
    /// woman has exactly one incident edge.
    pub fn is_perfect_matching(&self) -> bool {
        let mut woman_degree = vec![0usize; self.n()];
        for (_, w) in self.edges() {
            woman_degree[w] += 1;
        }
        self.adj.iter().all(|ws| ws.len() == 1) && woman_degree.iter().all(|&d| d == 1)
    }

    /// A maximum matching as `partner[man]`, by augmenting paths.
    pub fn maximum_matching(&self) -> Vec<Option<usize>> {
        let n = self.n();
        let mut man_of: Vec<Option<usize>> = vec![None; n];
        let mut visited = vec![false; n];
        for m in 0..n {
            visited.iter_mut().for_each(|v| *v = false);
            self.augment(m, &mut man_of, &mut visited);
        }
        let mut partner = vec![None; n];
        for (w, m) in man_of.iter().enumerate() {
            if let Some(m) = *m {
                partner[m] = Some(w);
            }
        }
        partner
    }

    /// Kuhn's search for an augmenting path from `m`.
    fn augment(&self, m: usize, man_of: &mut [Option<usize>], visited: &mut [bool]) -> bool {
        for &w in &self.adj[m] {
            if visited[w] {
                continue;
            }
            visited[w] = true;
            let free = match man_of[w] {
                None => true,
                Some(other) => self.augment(other, man_of, visited),
            };
            if free {
                man_of[w] = Some(m);
                return true;
            }
        }
        false
    }

    pub fn has_perfect_matching(&self) -> bool {
        self.maximum_matching().iter().all(Option::is_some)
    }

    /// The perfect matching that is lexicographically least as a sequence of
    /// women indexed by man, if any.
    pub fn least_perfect_matching(&self) -> Option<Vec<usize>> {
        if !self.has_perfect_matching() {
            return None;
        }
        let n = self.n();
        let mut fixed = self.clone();
        let mut chosen = Vec::with_capacity(n);
        for m in 0..n {
            let candidates: Vec<usize> = fixed.adj[m].iter().copied().collect();
            let pick = candidates.into_iter().find(|&w| {
                let mut trial = fixed.clone();
                trial.pin(m, w);
                trial.has_perfect_matching()
            })?;
            fixed.pin(m, pick);
            chosen.push(pick);
        }
        Some(chosen)
    }

    /// Keeps `(m, w)` as the only edge at both `m` and `w`.
    fn pin(&mut self, m: usize, w: usize) {
        for (other, ws) in self.adj.iter_mut().enumerate() {
            if other != m {
                ws.remove(&w);
            }
        }
        self.adj[m] = BTreeSet::from([w]);
    }

    /// `|Z| - |N(Z)|`, saturating at zero.
    pub fn deficiency_of(&self, men: &[usize]) -> usize {
        men.len().saturating_sub(self.neighborhood(men.iter().copied()).len())
    }

    /// Maximum matching size, deficiency and critical set.
    ///
    /// The critical set is built from a maximum matching: unmatched men plus
    /// every man reachable from them along alternating paths. A final pass
    /// drops, in increasing id order, any man whose removal keeps the
    /// deficiency.
    pub fn deficiency_report(&self) -> DeficiencyReport {
        let n = self.n();
        let partner = self.maximum_matching();
        let size = partner.iter().flatten().count();
        let deficiency = n - size;
        if deficiency == 0 {
            return DeficiencyReport {
                max_matching_size: size,
                deficiency,
                critical_set: Vec::new(),
            };
        }

        let mut man_of = vec![None; n];
        for (m, w) in partner.iter().enumerate() {
            if let Some(w) = *w {
                man_of[w] = Some(m);
            }
        }
        let mut reached = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&m| partner[m].is_none()).collect();
        for &m in &stack {
            reached[m] = true;
        }
        while let Some(m) = stack.pop() {
            for &w in &self.adj[m] {
                if let Some(next) = man_of[w] {
                    if !reached[next] {
                        reached[next] = true;
                        stack.push(next);
                    }
                }
            }
        }

        let mut critical: Vec<usize> = (0..n).filter(|&m| reached[m]).collect();
        let mut i = 0;
        while i < critical.len() {
            let mut without = critical.clone();
            without.remove(i);
            if self.deficiency_of(&without) == deficiency {
                critical = without;
            } else {
                i += 1;
            }
        }
        DeficiencyReport {
            max_matching_size: size,
            deficiency,
            critical_set: critical,
        }
    }
}
