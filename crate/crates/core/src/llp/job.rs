//! Minimum completion times for jobs with prerequisites.

use alloc::vec::Vec;

use super::{LatticeLinear, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JobSchedulingError {
    #[error("prerequisites form a cycle through job {0}")]
    CyclicPrerequisites(usize),
    #[error("job {job} lists prerequisite {prerequisite}, but there are only {count} jobs")]
    UnknownJob {
        job: usize,
        prerequisite: usize,
        count: usize,
    },
    #[error("{durations} durations but {prerequisites} prerequisite lists")]
    LengthMismatch {
        durations: usize,
        prerequisites: usize,
    },
}

/// `G[j] >= t[j]` and `G[j] >= G[i] + t[j]` for every prerequisite `i` of
/// `j`. The least such vector holds the earliest completion times.
#[derive(Debug, Clone)]
pub struct JobScheduling {
    durations: Vec<Value>,
    prerequisites: Vec<Vec<usize>>,
    horizon: Value,
}

impl JobScheduling {
    pub fn new(
        durations: Vec<Value>,
        prerequisites: Vec<Vec<usize>>,
    ) -> Result<Self, JobSchedulingError> {
        let n = durations.len();
        if prerequisites.len() != n {
            return Err(JobSchedulingError::LengthMismatch {
                durations: n,
                prerequisites: prerequisites.len(),
            });
        }
        for (job, pre) in prerequisites.iter().enumerate() {
            if let Some(&prerequisite) = pre.iter().find(|&&i| i >= n) {
                return Err(JobSchedulingError::UnknownJob {
                    job,
                    prerequisite,
                    count: n,
                });
            }
        }
        if let Some(job) = find_cycle(&prerequisites) {
            return Err(JobSchedulingError::CyclicPrerequisites(job));
        }
        // No completion time can exceed the sum of all durations.
        let horizon = durations.iter().sum();
        Ok(JobScheduling {
            durations,
            prerequisites,
            horizon,
        })
    }

    fn earliest(&self, g: &[Value], j: usize) -> Value {
        self.prerequisites[j]
            .iter()
            .map(|&i| g[i] + self.durations[j])
            .max()
            .unwrap_or(0)
    }
}

impl LatticeLinear for JobScheduling {
    fn len(&self) -> usize {
        self.durations.len()
    }

    fn initial(&self) -> Vec<Value> {
        self.durations.clone()
    }

    fn bound(&self, _j: usize) -> Value {
        self.horizon
    }

    fn forbidden(&self, g: &[Value], j: usize) -> bool {
        g[j] < self.earliest(g, j)
    }

    fn advance(&self, g: &[Value], j: usize) -> Value {
        self.earliest(g, j)
    }
}

/// Kahn's algorithm; returns some job left on a cycle.
fn find_cycle(prerequisites: &[Vec<usize>]) -> Option<usize> {
    let n = prerequisites.len();
    let mut dependents = alloc::vec![Vec::new(); n];
    let mut pending: Vec<usize> = prerequisites.iter().map(Vec::len).collect();
    for (j, pre) in prerequisites.iter().enumerate() {
        for &i in pre {
            dependents[i].push(j);
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&j| pending[j] == 0).collect();
    let mut done = 0;
    while let Some(i) = ready.pop() {
        done += 1;
        for &j in &dependents[i] {
            pending[j] -= 1;
            if pending[j] == 0 {
                ready.push(j);
            }
        }
    }
    (done < n).then(|| (0..n).find(|&j| pending[j] > 0).expect("cycle member"))
}
