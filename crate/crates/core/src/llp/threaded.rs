//! Multi-threaded driver: each worker owns a disjoint set of components and
//! advances them against whatever (possibly stale) values of the others it
//! last read. There is no barrier between advances.
//!
//! Every stored value stays at or below the least fixpoint, so any vector
//! assembled from stored values on which nothing is forbidden *is* the least
//! fixpoint. Workers use that to terminate without a consistent cut.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::thread;

use super::{checked_advance, LatticeLinear, LlpError, Value};

/// Solves `problem` with `workers` threads (at least one).
pub fn solve_threaded<P>(problem: &P, workers: usize) -> Result<Vec<Value>, LlpError>
where
    P: LatticeLinear + Sync + ?Sized,
{
    let n = problem.len();
    let order = problem.order();
    let initial = problem.initial();
    if initial.len() != n {
        return Err(LlpError::WrongLength {
            expected: n,
            actual: initial.len(),
        });
    }
    for (j, &v) in initial.iter().enumerate() {
        let bound = problem.bound(j);
        if order.exceeds(v, bound) {
            return Err(LlpError::Infeasible {
                index: j,
                attempted: v,
                bound,
            });
        }
    }
    if n == 0 {
        return Ok(initial);
    }

    let workers = workers.clamp(1, n);
    let state: Vec<AtomicU64> = initial.into_iter().map(AtomicU64::new).collect();
    let done = AtomicBool::new(false);
    let result: Mutex<Option<Result<Vec<Value>, LlpError>>> = Mutex::new(None);

    let finish = |outcome: Result<Vec<Value>, LlpError>| {
        let mut slot = result.lock().expect("result lock");
        if slot.is_none() {
            *slot = Some(outcome);
        }
        done.store(true, Ordering::Release);
    };

    thread::scope(|scope| {
        for worker in 0..workers {
            let state = &state;
            let done = &done;
            let finish = &finish;
            scope.spawn(move || {
                let owned: Vec<usize> = (worker..n).step_by(workers).collect();
                let mut view = vec![0; n];
                while !done.load(Ordering::Acquire) {
                    for (slot, cell) in view.iter_mut().zip(state) {
                        *slot = cell.load(Ordering::Acquire);
                    }
                    let mut progressed = false;
                    for &j in &owned {
                        if !problem.forbidden(&view, j) {
                            continue;
                        }
                        match checked_advance(problem, &view, j) {
                            Ok(v) => {
                                state[j].store(v, Ordering::Release);
                                view[j] = v;
                                progressed = true;
                            }
                            Err(e) => {
                                finish(Err(e));
                                return;
                            }
                        }
                    }
                    if !progressed {
                        if (0..n).all(|j| !problem.forbidden(&view, j)) {
                            finish(Ok(view));
                            return;
                        }
                        thread::yield_now();
                    }
                }
            });
        }
    });

    result
        .into_inner()
        .expect("result lock")
        .expect("a worker always reports")
}
