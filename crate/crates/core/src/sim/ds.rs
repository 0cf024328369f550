//! Dijkstra-Scholten termination detection for a diffusing computation.
//!
//! Each non-root process joins the spanning tree through the first message
//! that activates it, remembers the sender as its parent, and acknowledges
//! every other application message at once with a signal. A process leaves
//! the tree, signalling its parent, once it is passive and every message it
//! sent has been signalled back. The root detects termination when its own
//! deficit returns to zero.

use alloc::vec;
use alloc::vec::Vec;

/// Bookkeeping event reported by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsEvent {
    /// `from` sent an application message.
    Sent { from: usize },
    /// `at` received an application message from `from`.
    Received { at: usize, from: usize },
    /// `at` finished handling a message and is passive.
    Passive { at: usize },
    /// `at` received a signal.
    Signal { at: usize },
}

/// What the ledger asks the simulator to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsAction {
    /// Send a signal from `from` to `to`.
    Signal { from: usize, to: usize },
    TerminationDetected,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DsLedger {
    root: usize,
    parent: Vec<Option<usize>>,
    deficit: Vec<usize>,
    initiated: bool,
    detected: bool,
}

impl DsLedger {
    /// Ledger for processes `0..processes` with the environment at `root`.
    pub fn new(processes: usize, root: usize) -> Self {
        DsLedger {
            root,
            parent: vec![None; processes],
            deficit: vec![0; processes],
            initiated: false,
            detected: false,
        }
    }

    pub fn parent(&self, p: usize) -> Option<usize> {
        self.parent[p]
    }

    pub fn deficit(&self, p: usize) -> usize {
        self.deficit[p]
    }

    /// Whether `p` is currently part of the tree (the root always is once it
    /// has sent something).
    pub fn engaged(&self, p: usize) -> bool {
        if p == self.root {
            self.initiated && !self.detected
        } else {
            self.parent[p].is_some()
        }
    }

    pub fn detected(&self) -> bool {
        self.detected
    }

    /// Applies one event.
    pub fn step(&mut self, event: DsEvent) -> Option<DsAction> {
        match event {
            DsEvent::Sent { from } => {
                self.deficit[from] += 1;
                if from == self.root {
                    self.initiated = true;
                }
                None
            }
            DsEvent::Received { at, from } => {
                if at == self.root || self.parent[at].is_some() {
                    Some(DsAction::Signal { from: at, to: from })
                } else {
                    self.parent[at] = Some(from);
                    None
                }
            }
            DsEvent::Passive { at } => self.detach(at),
            DsEvent::Signal { at } => {
                self.deficit[at] = self.deficit[at]
                    .checked_sub(1)
                    .expect("signal without outstanding message");
                if at == self.root {
                    if self.deficit[at] == 0 && self.initiated && !self.detected {
                        self.detected = true;
                        return Some(DsAction::TerminationDetected);
                    }
                    None
                } else {
                    self.detach(at)
                }
            }
        }
    }

    fn detach(&mut self, at: usize) -> Option<DsAction> {
        if at == self.root || self.deficit[at] != 0 {
            return None;
        }
        let parent = self.parent[at].take()?;
        Some(DsAction::Signal { from: at, to: parent })
    }
}

/// Functional form of [`DsLedger::step`].
pub fn ds_termination(mut ledger: DsLedger, event: DsEvent) -> (DsLedger, Option<DsAction>) {
    let action = ledger.step(event);
    (ledger, action)
}
