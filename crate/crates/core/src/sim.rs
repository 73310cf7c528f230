//! Discrete-event loop: Poisson arrivals, exponential lifetimes, wrap-around
//! handover, and time-weighted bandwidth accounting. A run is a pure
//! function of its spec — identical spec and seed give identical records,
//! and replications parallelize without changing any of them.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::admission::{admit, release, AdmissionDecision};
use crate::error::Error;
use crate::metrics::{ClassCounters, MetricsRecord};
use crate::model::{CellState, Origin, Request};
use crate::traffic::{
    handover_reoffer, lifecycle_samples, next_interarrival, pick_class, sample_dwell,
    TrafficRates,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    NewArrival,
    DwellExpiry(u64),
    CallEnd(u64),
}

/// Heap entry. Ordering is (time, insertion sequence); each call has at
/// most one pending event, so same-call ties cannot occur, and the
/// duration-vs-dwell tie is resolved toward completion at scheduling time.
#[derive(Debug, Clone, Copy)]
struct Event {
    time_s: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.time_s.total_cmp(&other.time_s).is_eq() && self.seq == other.seq
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.time_s
            .total_cmp(&other.time_s)
            .then(self.seq.cmp(&other.seq))
    }
}

/// Everything one run needs. `check_invariants` swaps the debug-only spot
/// checks for a full state validation after every event (slow; meant for
/// soak tests).
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub config: crate::model::SchemeConfig,
    pub rates: TrafficRates,
    pub horizon_s: f64,
    pub warmup_s: f64,
    pub seed: u64,
    pub check_invariants: bool,
}

impl RunSpec {
    pub fn validate(&self) -> Result<(), Error> {
        self.config.validate()?;
        self.rates.validate()?;
        if !self.horizon_s.is_finite() || self.horizon_s <= 0.0 {
            return Err(Error::config(
                "sim.horizon_s",
                format!("horizon {} must be positive", self.horizon_s),
            ));
        }
        if !self.warmup_s.is_finite() || self.warmup_s < 0.0 || self.warmup_s >= self.horizon_s {
            return Err(Error::config(
                "sim.warmup_s",
                format!(
                    "warmup {} must lie in [0, horizon {})",
                    self.warmup_s, self.horizon_s
                ),
            ));
        }
        if self.rates.weights.background.len() != self.config.background_classes.len() {
            return Err(Error::config(
                "arrival.ratio",
                format!(
                    "{} background weight(s) for {} configured background class(es)",
                    self.rates.weights.background.len(),
                    self.config.background_classes.len()
                ),
            ));
        }
        Ok(())
    }

    /// Canonical experiment identity — everything except the seed.
    fn fingerprint(&self) -> String {
        format!(
            "{:?}|{:?}|{}|{}",
            self.config, self.rates, self.horizon_s, self.warmup_s
        )
    }
}

struct Scheduler {
    heap: BinaryHeap<Reverse<Event>>,
    seq: u64,
}

impl Scheduler {
    fn new() -> Scheduler {
        Scheduler {
            heap: BinaryHeap::new(),
            seq: 0,
        }
    }

    fn push(&mut self, time_s: f64, kind: EventKind) {
        self.seq += 1;
        self.heap.push(Reverse(Event {
            time_s,
            seq: self.seq,
            kind,
        }));
    }

    fn pop(&mut self) -> Option<Event> {
        self.heap.pop().map(|Reverse(e)| e)
    }

    /// Whichever of service completion and cell departure comes first;
    /// exact ties complete the call rather than handing it over.
    fn departure(&mut self, call_id: u64, now_s: f64, duration_s: f64, dwell_s: f64) {
        if duration_s <= dwell_s {
            self.push(now_s + duration_s, EventKind::CallEnd(call_id));
        } else {
            self.push(now_s + dwell_s, EventKind::DwellExpiry(call_id));
        }
    }
}

/// Time-weighted bandwidth accumulator clipped to the measurement window.
struct Integrals {
    last_t: f64,
    warmup_s: f64,
    horizon_s: f64,
    mbs_kbps_s: f64,
    non_mbs_kbps_s: f64,
}

impl Integrals {
    fn advance(&mut self, state: &CellState, now_s: f64) {
        let from = self.last_t.max(self.warmup_s);
        let to = now_s.min(self.horizon_s);
        if to > from {
            self.mbs_kbps_s += (to - from) * state.mbs_used().kbps() as f64;
            self.non_mbs_kbps_s += (to - from) * state.non_mbs_used().kbps() as f64;
        }
        self.last_t = now_s;
    }
}

/// Simulates `[0, horizon]` and returns the run's counters and bandwidth
/// integrals, measured over `[warmup, horizon]`.
pub fn run(spec: &RunSpec) -> Result<MetricsRecord, Error> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut state = CellState::new(spec.config.clone())?;
    let mut sched = Scheduler::new();
    let mut record = MetricsRecord {
        voice: ClassCounters::default(),
        unicast: ClassCounters::default(),
        background: ClassCounters::default(),
        integral_mbs_kbps_s: 0.0,
        integral_non_mbs_kbps_s: 0.0,
        horizon_s: spec.horizon_s,
        warmup_s: spec.warmup_s,
        capacity_kbps: spec.config.capacity_kbps,
        seed: spec.seed,
        events_processed: 0,
        config_fingerprint: spec.fingerprint(),
    };
    let mut integrals = Integrals {
        last_t: 0.0,
        warmup_s: spec.warmup_s,
        horizon_s: spec.horizon_s,
        mbs_kbps_s: 0.0,
        non_mbs_kbps_s: 0.0,
    };

    if spec.rates.total_new_rate > 0.0 {
        let gap = next_interarrival(&mut rng, spec.rates.total_new_rate)?;
        sched.push(gap, EventKind::NewArrival);
    }

    while let Some(event) = sched.pop() {
        if event.time_s > spec.horizon_s {
            break;
        }
        debug_assert!(event.time_s >= state.clock_s, "event scheduled in the past");
        integrals.advance(&state, event.time_s);
        state.clock_s = event.time_s;
        record.events_processed += 1;
        let counting = event.time_s >= spec.warmup_s;

        match event.kind {
            EventKind::NewArrival => {
                // Keep the arrival stream flowing first so the draw order
                // stays independent of this arrival's fate.
                let gap = next_interarrival(&mut rng, spec.rates.total_new_rate)?;
                sched.push(event.time_s + gap, EventKind::NewArrival);

                let class = pick_class(&mut rng, &spec.rates.weights)?;
                let (duration, dwell) = lifecycle_samples(&mut rng, class, &spec.rates);
                let request = Request::for_class(class, Origin::New, duration, &spec.config)?;
                let counters = record.class_mut(class.kind());
                if counting {
                    counters.offered_new += 1;
                }
                match admit(&mut state, &request, event.time_s + dwell) {
                    AdmissionDecision::Admitted { call_id, .. } => {
                        if counting {
                            record.class_mut(class.kind()).admitted_new += 1;
                        }
                        sched.departure(call_id, event.time_s, duration, dwell);
                    }
                    AdmissionDecision::Blocked => {
                        if counting {
                            record.class_mut(class.kind()).blocked_new += 1;
                        }
                    }
                    AdmissionDecision::Dropped => {
                        unreachable!("new arrivals are blocked, never dropped")
                    }
                }
            }
            EventKind::CallEnd(call_id) => {
                let call = release(&mut state, call_id)?;
                if counting {
                    record.class_mut(call.class.kind()).completed += 1;
                }
            }
            EventKind::DwellExpiry(call_id) => {
                // Wrap-around: the call leaves this cell and simultaneously
                // arrives at a statistically identical neighbor, folded onto
                // the same cell. The re-offer therefore competes against the
                // cell with the departing incarnation still in place — a
                // neighbor would be just as loaded. Releasing first would
                // hand the re-offer its own freed bandwidth and no handover
                // could ever drop.
                let call = state.call(call_id)?.clone();
                match handover_reoffer(&call, &spec.config, event.time_s) {
                    None => {
                        // Tie of residual and dwell: treated as completion.
                        let departed = release(&mut state, call_id)?;
                        if counting {
                            record.class_mut(departed.class.kind()).completed += 1;
                        }
                    }
                    Some(request) => {
                        if counting {
                            record.class_mut(call.class.kind()).offered_handover += 1;
                        }
                        let dwell = sample_dwell(&mut rng, &spec.rates);
                        match admit(&mut state, &request, event.time_s + dwell) {
                            AdmissionDecision::Admitted { call_id: new_id, .. } => {
                                if counting {
                                    record.class_mut(call.class.kind()).admitted_handover += 1;
                                }
                                sched.departure(
                                    new_id,
                                    event.time_s,
                                    request.residual_s,
                                    dwell,
                                );
                            }
                            AdmissionDecision::Dropped => {
                                if counting {
                                    let c = record.class_mut(call.class.kind());
                                    c.dropped_handover += 1;
                                    c.forced_terminations += 1;
                                }
                            }
                            AdmissionDecision::Blocked => {
                                unreachable!("handovers are dropped, never blocked")
                            }
                        }
                        // Either way the old incarnation departs now; its
                        // release restores whatever the re-offer degraded —
                        // including, in a lightly loaded cell, the re-offer
                        // itself back toward full quality.
                        release(&mut state, call_id)?;
                    }
                }
            }
        }

        if spec.check_invariants
            || (cfg!(debug_assertions) && record.events_processed % 4096 == 0)
        {
            state.validate()?;
        } else if cfg!(debug_assertions) {
            state.validate_cheap()?;
        }
    }

    integrals.advance(&state, spec.horizon_s);
    record.integral_mbs_kbps_s = integrals.mbs_kbps_s;
    record.integral_non_mbs_kbps_s = integrals.non_mbs_kbps_s;
    record.validate()?;
    Ok(record)
}

/// Runs one replication per seed, optionally across threads. Results come
/// back in seed order either way.
pub fn replicate(
    spec: &RunSpec,
    seeds: &[u64],
    parallel: bool,
) -> Result<Vec<MetricsRecord>, Error> {
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::config(
            "sweep.seed",
            "replication seeds must be distinct",
        ));
    }
    let specs: Vec<RunSpec> = seeds
        .iter()
        .map(|&seed| RunSpec {
            seed,
            ..spec.clone()
        })
        .collect();
    if parallel {
        specs.par_iter().map(run).collect()
    } else {
        specs.iter().map(run).collect()
    }
}
