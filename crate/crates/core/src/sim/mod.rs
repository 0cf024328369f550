//! Deterministic discrete-event simulation of the asynchronous constrained
//! marriage protocol.
//!
//! An environment process sends `initiate` to every man. Men propose to
//! women in preference order and ask other men to advance when one of their
//! proposals has prerequisites; women keep the best proposal seen so far and
//! reject the rest. Women never accept explicitly. Channels are reliable and
//! FIFO; at every step a seeded scheduler picks a non-empty channel and
//! delivers its head. Termination is detected with Dijkstra-Scholten
//! signalling, after which the environment reads off the matching.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{compile_constraints, Constraint, ConstraintPoset, Matching, ModelError, PreferenceProfile, ProposalVector};

mod ds;

pub use ds::{ds_termination, DsAction, DsEvent, DsLedger};

/// Process identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pid {
    Env,
    Man(usize),
    Woman(usize),
}

impl Pid {
    fn index(self, n: usize) -> usize {
        match self {
            Pid::Env => 0,
            Pid::Man(i) => 1 + i,
            Pid::Woman(w) => 1 + n + w,
        }
    }

    fn from_index(index: usize, n: usize) -> Pid {
        match index {
            0 => Pid::Env,
            i if i <= n => Pid::Man(i - 1),
            i => Pid::Woman(i - 1 - n),
        }
    }
}

impl fmt::Display for Pid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pid::Env => f.write_str("env"),
            Pid::Man(i) => write!(f, "P{}", i + 1),
            Pid::Woman(w) => write!(f, "w{}", w + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Initiate,
    Propose { man: usize },
    Reject { woman: usize },
    Advance { woman: usize },
    Signal,
}

impl Kind {
    pub fn is_application(self) -> bool {
        self != Kind::Signal
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Initiate => f.write_str("initiate"),
            Kind::Propose { man } => write!(f, "propose(P{})", man + 1),
            Kind::Reject { woman } => write!(f, "reject(w{})", woman + 1),
            Kind::Advance { woman } => write!(f, "advance(w{})", woman + 1),
            Kind::Signal => f.write_str("signal"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Message {
    pub kind: Kind,
    pub src: Pid,
    pub dst: Pid,
    /// Position on its channel, from 0.
    pub seq: u64,
    /// Global send order, from 0.
    pub sent_at: u64,
}

/// Which channel delivers next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchedulerMode {
    /// Uniform over non-empty channels.
    #[default]
    Random,
    /// The channel whose head was sent most recently, so the oldest
    /// messages wait longest.
    Adversarial,
}

/// How a man reacts to `advance(q)` when he has not yet reached `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdvanceMode {
    /// Propose to every woman passed on the way, ending with `q`.
    #[default]
    ProposeSkipped,
    /// Skip to `q` and propose only to her; do nothing if `q` is already
    /// behind him.
    SkipSilently,
    /// Like `SkipSilently`, but always send a proposal to the current woman
    /// afterwards, even when no rank was skipped.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimConfig {
    pub seed: u64,
    pub scheduler: SchedulerMode,
    pub advance_mode: AdvanceMode,
    /// Keep one log line per delivery.
    pub record_log: bool,
}

impl SimConfig {
    pub fn seeded(seed: u64) -> Self {
        SimConfig {
            seed,
            record_log: true,
            ..SimConfig::default()
        }
    }
}

/// Message counts of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counters {
    pub initiate: usize,
    pub propose: usize,
    /// Proposals standing at the end: the man is still at the woman and
    /// she holds him.
    pub propose_success: usize,
    pub propose_fail: usize,
    pub reject: usize,
    pub advance: usize,
    /// Dijkstra-Scholten signals.
    pub ds_overhead: usize,
}

impl Counters {
    pub fn application(&self) -> usize {
        self.initiate + self.propose + self.reject + self.advance
    }

    pub fn total(&self) -> usize {
        self.application() + self.ds_overhead
    }

    /// `key=value` lines.
    pub fn summary(&self) -> String {
        format!(
            "initiate={}\npropose={}\npropose_success={}\npropose_fail={}\nreject={}\nadvance={}\napplication={}\nds_overhead={}\ntotal={}\n",
            self.initiate,
            self.propose,
            self.propose_success,
            self.propose_fail,
            self.reject,
            self.advance,
            self.application(),
            self.ds_overhead,
            self.total()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimOutcome {
    Matched { matching: Matching, ranks: ProposalVector },
    /// A man ran out of proposals and announced it; the run stopped there.
    NoConstrainedStableMarriage { man: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimReport {
    pub outcome: SimOutcome,
    pub counters: Counters,
    /// Number of deliveries.
    pub steps: usize,
    /// Delivery at which termination was detected.
    pub detected_at: Option<usize>,
    /// Cross-man precedence edges of the compiled constraints.
    pub edges: usize,
    pub log: Vec<String>,
}

impl SimReport {
    /// Unsuccessful proposals.
    pub fn unsuccessful(&self) -> usize {
        self.counters.propose_fail
    }

    pub fn check_bounds(&self, n: usize) -> Result<(), BoundViolation> {
        check_message_bounds(&self.counters, n, self.unsuccessful(), self.edges)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("the protocol needs strict preferences")]
    TiesPresent,
    #[error("simulator stuck at step {step}: no message in transit but no termination detected")]
    Stuck { step: usize },
    #[error("termination detected at step {step} with messages still in transit")]
    PrematureTermination { step: usize },
    #[error("woman {} traded down from rank {from} to rank {to}", .woman + 1)]
    WomanRegressed { woman: usize, from: usize, to: usize },
    #[error("final state is inconsistent: man {} is not held by woman {}", .man + 1, .woman + 1)]
    Inconsistent { man: usize, woman: usize },
}

/// Snapshot handed to observers after every delivery.
#[derive(Debug)]
pub struct SimView<'a> {
    pub step: usize,
    pub g: &'a [usize],
    pub partner: &'a [Option<usize>],
    pub in_transit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("message bound exceeded: {application} application messages (limit {application_limit}), {total} in all (limit {total_limit})")]
pub struct BoundViolation {
    pub application: usize,
    pub application_limit: usize,
    pub total: usize,
    pub total_limit: usize,
}

/// Checks `application <= 2m + 2n + e` and `total <= 4m + 4n + 2e`, where
/// `m` counts unsuccessful proposals and `e` cross-man precedence edges.
pub fn check_message_bounds(counters: &Counters, n: usize, m: usize, e: usize) -> Result<(), BoundViolation> {
    let application_limit = 2 * m + 2 * n + e;
    let total_limit = 4 * m + 4 * n + 2 * e;
    let (application, total) = (counters.application(), counters.total());
    if application <= application_limit && total <= total_limit {
        Ok(())
    } else {
        Err(BoundViolation {
            application,
            application_limit,
            total,
            total_limit,
        })
    }
}

struct World<'a> {
    profile: &'a PreferenceProfile,
    poset: &'a ConstraintPoset,
    mode: AdvanceMode,
    n: usize,
    /// Highest rank each man has entered; 0 before he starts.
    reached: Vec<usize>,
    partner: Vec<Option<usize>>,
    channels: BTreeMap<(usize, usize), VecDeque<Message>>,
    next_seq: BTreeMap<(usize, usize), u64>,
    sent: u64,
    ledger: DsLedger,
    counters: Counters,
    aborted: Option<usize>,
    delta: Vec<String>,
    logging: bool,
}

impl World<'_> {
    fn note(&mut self, token: impl FnOnce() -> String) {
        if self.logging {
            self.delta.push(token());
        }
    }

    fn send(&mut self, src: Pid, dst: Pid, kind: Kind) {
        let key = (src.index(self.n), dst.index(self.n));
        let seq = self.next_seq.entry(key).or_insert(0);
        let message = Message {
            kind,
            src,
            dst,
            seq: *seq,
            sent_at: self.sent,
        };
        *seq += 1;
        self.sent += 1;
        self.channels.entry(key).or_default().push_back(message);
        match kind {
            Kind::Initiate => self.counters.initiate += 1,
            Kind::Propose { .. } => self.counters.propose += 1,
            Kind::Reject { .. } => self.counters.reject += 1,
            Kind::Advance { .. } => self.counters.advance += 1,
            Kind::Signal => self.counters.ds_overhead += 1,
        }
        if kind.is_application() {
            self.ledger.step(DsEvent::Sent { from: key.0 });
        }
        if src != Pid::Env {
            self.note(|| format!("send={kind}>{dst}"));
        }
    }

    fn apply_ds(&mut self, action: Option<DsAction>) -> bool {
        match action {
            Some(DsAction::Signal { from, to }) => {
                let (from, to) = (Pid::from_index(from, self.n), Pid::from_index(to, self.n));
                self.send(from, to, Kind::Signal);
                false
            }
            Some(DsAction::TerminationDetected) => true,
            None => false,
        }
    }

    /// Man `i` moves forward to rank `target`, entering every rank in
    /// between: prerequisite advances first, then a proposal (only at
    /// `target` unless skipped women are proposed to as well).
    fn reach(&mut self, i: usize, target: usize) {
        let poset = self.poset;
        for r in self.reached[i] + 1..=target {
            self.reached[i] = r;
            self.note(|| format!("g={r}"));
            for e in poset.prerequisites(i, r) {
                let w = self.profile.mpref(e.man, e.rank);
                self.send(Pid::Man(i), Pid::Man(e.man), Kind::Advance { woman: w });
            }
            if r == target || self.mode == AdvanceMode::ProposeSkipped {
                self.propose(i);
            }
        }
        while self.aborted.is_none() && poset.is_forbidden_pair(i, self.current(i)) {
            self.next(i);
        }
    }

    fn current(&self, i: usize) -> usize {
        self.profile.mpref(i, self.reached[i])
    }

    fn propose(&mut self, i: usize) {
        let w = self.current(i);
        self.send(Pid::Man(i), Pid::Woman(w), Kind::Propose { man: i });
    }

    /// Man `i` gives up his current proposal.
    fn next(&mut self, i: usize) {
        if self.reached[i] >= self.poset.ceiling()[i] {
            self.aborted = Some(i);
            self.note(|| String::from("announce=no-constrained-stable-marriage"));
            return;
        }
        self.reach(i, self.reached[i] + 1);
    }

    fn man(&mut self, i: usize, kind: Kind) {
        match kind {
            Kind::Initiate => {
                // An advance may have set him going already.
                let floor = self.poset.floor()[i];
                if floor > self.reached[i] {
                    self.reach(i, floor);
                }
            }
            Kind::Reject { woman } => {
                if self.reached[i] > 0 && self.current(i) == woman {
                    self.next(i);
                }
            }
            Kind::Advance { woman } => {
                let target = self.profile.mrank(i, woman);
                if target > self.reached[i] {
                    self.reach(i, target);
                } else if self.mode == AdvanceMode::Literal {
                    self.propose(i);
                }
            }
            Kind::Propose { .. } | Kind::Signal => unreachable!("men receive no {kind}"),
        }
    }

    /// Proposal vector as seen by an observer; men not yet started count as
    /// being at rank 1.
    fn g(&self) -> Vec<usize> {
        self.reached.iter().map(|&r| r.max(1)).collect()
    }

    fn woman(&mut self, w: usize, kind: Kind) -> Result<(), SimError> {
        let Kind::Propose { man: j } = kind else {
            unreachable!("women receive no {kind}");
        };
        match self.partner[w] {
            None => {
                self.partner[w] = Some(j);
                self.note(|| format!("partner=P{}", j + 1));
            }
            Some(p) if p == j => {}
            Some(p) => {
                let (old, new) = (self.profile.wrank(w, p), self.profile.wrank(w, j));
                let loser = if new < old {
                    self.partner[w] = Some(j);
                    self.note(|| format!("partner=P{}", j + 1));
                    p
                } else {
                    j
                };
                self.send(Pid::Woman(w), Pid::Man(loser), Kind::Reject { woman: w });
                let kept = self.profile.wrank(w, self.partner[w].expect("engaged"));
                if kept > old {
                    return Err(SimError::WomanRegressed { woman: w, from: old, to: kept });
                }
            }
        }
        Ok(())
    }

    fn in_transit(&self) -> usize {
        self.channels.values().map(VecDeque::len).sum()
    }
}

/// Runs the protocol on `profile` under `constraints`.
pub fn simulate(
    profile: &PreferenceProfile,
    constraints: &[Constraint],
    config: SimConfig,
) -> Result<SimReport, SimError> {
    simulate_observed(profile, constraints, config, |_| {})
}

/// Like [`simulate`], calling `observer` after every delivery.
pub fn simulate_observed<F>(
    profile: &PreferenceProfile,
    constraints: &[Constraint],
    config: SimConfig,
    mut observer: F,
) -> Result<SimReport, SimError>
where
    F: FnMut(&SimView<'_>),
{
    if !profile.is_strict() {
        return Err(SimError::TiesPresent);
    }
    let poset = compile_constraints(profile, constraints)?;
    let n = profile.n();
    let mut world = World {
        profile,
        poset: &poset,
        mode: config.advance_mode,
        n,
        reached: vec![0; n],
        partner: vec![None; n],
        channels: BTreeMap::new(),
        next_seq: BTreeMap::new(),
        sent: 0,
        ledger: DsLedger::new(2 * n + 1, 0),
        counters: Counters::default(),
        aborted: None,
        delta: Vec::new(),
        logging: config.record_log,
    };
    for i in 0..n {
        world.send(Pid::Env, Pid::Man(i), Kind::Initiate);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut log = Vec::new();
    let mut step = 0;
    let mut detected_at = None;
    while world.aborted.is_none() && detected_at.is_none() {
        let key = match config.scheduler {
            SchedulerMode::Random => {
                if world.channels.is_empty() {
                    return Err(SimError::Stuck { step });
                }
                let k = rng.gen_range(0..world.channels.len());
                *world.channels.keys().nth(k).expect("in range")
            }
            SchedulerMode::Adversarial => *world
                .channels
                .iter()
                .max_by_key(|(_, q)| q.front().map(|m| m.sent_at))
                .ok_or(SimError::Stuck { step })?
                .0,
        };
        let queue = world.channels.get_mut(&key).expect("non-empty channel");
        let message = queue.pop_front().expect("non-empty channel");
        if queue.is_empty() {
            world.channels.remove(&key);
        }
        step += 1;
        world.delta.clear();
        let (src, dst) = key;

        let terminated = if message.kind == Kind::Signal {
            let action = world.ledger.step(DsEvent::Signal { at: dst });
            world.apply_ds(action)
        } else {
            let action = world.ledger.step(DsEvent::Received { at: dst, from: src });
            if action.is_none() {
                world.note(|| format!("ds=parent({})", message.src));
            }
            world.apply_ds(action);
            match message.dst {
                Pid::Man(i) => world.man(i, message.kind),
                Pid::Woman(w) => world.woman(w, message.kind)?,
                Pid::Env => unreachable!("the environment only receives signals"),
            }
            let action = world.ledger.step(DsEvent::Passive { at: dst });
            world.apply_ds(action)
        };
        if terminated {
            world.note(|| String::from("terminated"));
            if world.in_transit() != 0 {
                return Err(SimError::PrematureTermination { step });
            }
            detected_at = Some(step);
        }

        if config.record_log {
            let delta = if world.delta.is_empty() {
                String::from("-")
            } else {
                world.delta.join(" ")
            };
            log.push(format!(
                "step={step} deliver {} src={} dst={} | {delta}",
                message.kind, message.src, message.dst
            ));
        }
        observer(&SimView {
            step,
            g: &world.g(),
            partner: &world.partner,
            in_transit: world.in_transit(),
        });
    }

    let mut counters = world.counters;
    let g = world.g();
    let standing = (0..n)
        .filter(|&i| world.partner[profile.mpref(i, g[i])] == Some(i))
        .count();
    counters.propose_success = standing;
    counters.propose_fail = counters.propose - standing;

    let outcome = if let Some(man) = world.aborted {
        SimOutcome::NoConstrainedStableMarriage { man }
    } else {
        for (i, &rank) in g.iter().enumerate() {
            let w = profile.mpref(i, rank);
            if world.partner[w] != Some(i) {
                return Err(SimError::Inconsistent { man: i, woman: w });
            }
        }
        let wives = (0..n).map(|i| profile.mpref(i, g[i])).collect();
        SimOutcome::Matched {
            matching: Matching::total(wives).expect("women hold distinct men"),
            ranks: ProposalVector::new(g),
        }
    };
    Ok(SimReport {
        outcome,
        counters,
        steps: step,
        detected_at,
        edges: poset.edge_count(),
        log,
    })
}
