//! Call admission and release.
//!
//! Admission works down a reclaim ladder until the request's target fits:
//! free capacity, then (adaptive scheme only) broadcast-layer reclaim,
//! background degradation, and finally — for handovers only — unicast layer
//! removal. Handovers get priority twice over: they enter at their minimum
//! rate and may climb one more ladder step than fresh arrivals. Releases
//! undo the ladder in reverse before giving leftovers back to the
//! broadcast pool.

use crate::allocation::greedy_layers;
use crate::error::Error;
use crate::model::{
    Bandwidth, CallState, CellState, Origin, Request, Scheme, TrafficClass,
};

/// One allocation change applied while admitting a call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationTarget {
    MbsSession(usize),
    Call(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mutation {
    pub target: MutationTarget,
    pub old_kbps: Bandwidth,
    pub new_kbps: Bandwidth,
}

/// Outcome of an admission attempt. `Blocked` is a rejected new call,
/// `Dropped` a rejected handover.
#[derive(Debug, Clone, PartialEq)]
pub enum AdmissionDecision {
    Admitted {
        call_id: u64,
        allocated_kbps: Bandwidth,
        mutations: Vec<Mutation>,
    },
    Blocked,
    Dropped,
}

/// Pool split at an instant. The broadcast side of a fixed reserve counts
/// in full even when sessions cannot use all of it; the identity
/// `mbs + non_mbs + free == capacity` always holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolSnapshot {
    pub mbs_kbps: Bandwidth,
    pub non_mbs_kbps: Bandwidth,
    pub free_kbps: Bandwidth,
}

pub fn snapshot_pools(state: &CellState) -> PoolSnapshot {
    PoolSnapshot {
        mbs_kbps: state.mbs_pool(),
        non_mbs_kbps: state.non_mbs_used(),
        free_kbps: state.free(),
    }
}

/// Undoable record of a state change; richer than [`Mutation`] because
/// rolling back a unicast call needs its layer count, not just kbps.
#[derive(Debug, Clone, Copy)]
enum JournalEntry {
    Session {
        session_id: usize,
        old_layers: usize,
        new_layers: usize,
    },
    Call {
        call_id: u64,
        old_kbps: Bandwidth,
        new_kbps: Bandwidth,
        old_layers: Option<usize>,
    },
}

impl JournalEntry {
    fn to_mutation(self, state: &CellState) -> Mutation {
        match self {
            JournalEntry::Session {
                session_id,
                old_layers,
                new_layers,
            } => {
                let profile = &state.sessions()[session_id - 1].profile;
                Mutation {
                    target: MutationTarget::MbsSession(session_id),
                    old_kbps: profile.bandwidth(old_layers).expect("journaled layers valid"),
                    new_kbps: profile.bandwidth(new_layers).expect("journaled layers valid"),
                }
            }
            JournalEntry::Call {
                call_id,
                old_kbps,
                new_kbps,
                ..
            } => Mutation {
                target: MutationTarget::Call(call_id),
                old_kbps,
                new_kbps,
            },
        }
    }
}

fn rollback(state: &mut CellState, journal: &[JournalEntry]) {
    for entry in journal.iter().rev() {
        match *entry {
            JournalEntry::Session {
                session_id,
                old_layers,
                ..
            } => state.set_session_layers(session_id, old_layers),
            JournalEntry::Call {
                call_id,
                old_kbps,
                old_layers,
                ..
            } => state
                .set_call_allocation(call_id, old_kbps, old_layers)
                .expect("journaled call exists"),
        }
    }
}

/// Replans the broadcast sessions into `budget` and applies every layer
/// change, journaling each touched session. Budget must be at or above the
/// session floor.
fn apply_session_plan(state: &mut CellState, budget: Bandwidth, journal: &mut Vec<JournalEntry>) {
    let mut layers = Vec::with_capacity(state.sessions().len());
    greedy_layers(state.sessions(), state.removal_order(), budget, &mut layers);
    for i in 0..layers.len() {
        let session = &state.sessions()[i];
        let (session_id, old_layers) = (session.session_id, session.active_layers());
        if layers[i] != old_layers {
            state.set_session_layers(session_id, layers[i]);
            journal.push(JournalEntry::Session {
                session_id,
                old_layers,
                new_layers: layers[i],
            });
        }
    }
}

/// Degrades background calls to their per-class minimum, oldest admitted
/// first, until `target` fits or victims run out.
fn degrade_background(state: &mut CellState, target: Bandwidth, journal: &mut Vec<JournalEntry>) {
    let mut victims: Vec<(f64, u64)> = state
        .calls()
        .values()
        .filter(|c| matches!(c.class, TrafficClass::Background(_)) && c.allocated_kbps > c.min_kbps)
        .map(|c| (c.admit_time_s, c.call_id))
        .collect();
    victims.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for (_, call_id) in victims {
        if state.free() >= target {
            return;
        }
        let call = state.call(call_id).expect("victim exists");
        let (old_kbps, new_kbps) = (call.allocated_kbps, call.min_kbps);
        state
            .set_call_allocation(call_id, new_kbps, None)
            .expect("victim exists");
        journal.push(JournalEntry::Call {
            call_id,
            old_kbps,
            new_kbps,
            old_layers: None,
        });
    }
}

/// Strips unicast enhancement layers one at a time — always from a call
/// holding the most layers, newest admitted breaking ties — until `target`
/// fits or every call sits at the profile floor.
fn degrade_unicast(state: &mut CellState, target: Bandwidth, journal: &mut Vec<JournalEntry>) {
    let floor = state.config.unicast_profile.min_layers();
    while state.free() < target {
        let mut best: Option<(usize, f64, u64)> = None;
        for c in state.calls().values() {
            if c.class != TrafficClass::UnicastVideo {
                continue;
            }
            let layers = c.active_layers.expect("unicast call has layers");
            if layers <= floor {
                continue;
            }
            let key = (layers, c.admit_time_s, c.call_id);
            let better = match best {
                None => true,
                Some(b) => {
                    key.0 > b.0
                        || (key.0 == b.0
                            && (key.1.total_cmp(&b.1).is_gt()
                                || (key.1.total_cmp(&b.1).is_eq() && key.2 > b.2)))
                }
            };
            if better {
                best = Some(key);
            }
        }
        let Some((layers, _, call_id)) = best else {
            return;
        };
        let old_kbps = state.call(call_id).expect("victim exists").allocated_kbps;
        let new_kbps = old_kbps - state.config.unicast_profile.layer_kbps()[layers - 1];
        state
            .set_call_allocation(call_id, new_kbps, Some(layers - 1))
            .expect("victim exists");
        journal.push(JournalEntry::Call {
            call_id,
            old_kbps,
            new_kbps,
            old_layers: Some(layers),
        });
    }
}

/// Attempts to admit `request` at time `state.clock_s`. On success the call
/// enters at exactly its target rate and the decision carries every
/// allocation change made along the way; on failure the state is untouched.
pub fn admit(
    state: &mut CellState,
    request: &Request,
    dwell_deadline_s: f64,
) -> AdmissionDecision {
    let target = match (state.config.scheme, request.origin) {
        (Scheme::Proposed, Origin::Handover) => request.req_min,
        _ => request.req_max,
    };
    let mut journal: Vec<JournalEntry> = Vec::new();

    if state.free() < target && state.config.scheme == Scheme::Proposed {
        // New background traffic never triggers reclaim; it takes leftover
        // capacity or nothing.
        let may_reclaim = request.origin == Origin::Handover
            || matches!(
                request.class,
                TrafficClass::Voice | TrafficClass::UnicastVideo
            );
        if may_reclaim {
            let budget = state
                .config
                .capacity_kbps
                .saturating_sub(state.non_mbs_used() + target)
                .max(state.config.c_min_b());
            apply_session_plan(state, budget, &mut journal);

            if state.free() < target {
                degrade_background(state, target, &mut journal);
            }
            if state.free() < target && request.origin == Origin::Handover {
                degrade_unicast(state, target, &mut journal);
            }
        }
    }

    if state.free() < target {
        rollback(state, &journal);
        debug_assert!(state.validate_cheap().is_ok());
        return match request.origin {
            Origin::New => AdmissionDecision::Blocked,
            Origin::Handover => AdmissionDecision::Dropped,
        };
    }

    let mutations = journal.iter().map(|e| e.to_mutation(state)).collect();
    let active_layers = match request.class {
        TrafficClass::UnicastVideo => {
            let p = &state.config.unicast_profile;
            Some(if target == p.max_bandwidth() {
                p.max_layers()
            } else {
                p.min_layers()
            })
        }
        _ => None,
    };
    let call_id = state.next_call_id();
    let admit_time_s = state.clock_s;
    state.insert_call(CallState {
        call_id,
        class: request.class,
        origin: request.origin,
        allocated_kbps: target,
        min_kbps: request.req_min,
        max_kbps: request.req_max,
        active_layers,
        admit_time_s,
        residual_duration_s: request.residual_s,
        dwell_deadline_s,
    });
    debug_assert!(state.validate_cheap().is_ok());
    AdmissionDecision::Admitted {
        call_id,
        allocated_kbps: target,
        mutations,
    }
}

/// Gives restorable layers back to degraded unicast calls: the call with
/// the fewest layers goes first (oldest admitted breaking ties), and calls
/// whose next layer does not fit are skipped rather than blocking cheaper
/// restorations behind them.
fn restore_unicast(state: &mut CellState) {
    let ceiling = state.config.unicast_profile.max_layers();
    loop {
        let free = state.free();
        let mut best: Option<(usize, f64, u64, Bandwidth)> = None;
        for c in state.calls().values() {
            if c.class != TrafficClass::UnicastVideo {
                continue;
            }
            let layers = c.active_layers.expect("unicast call has layers");
            if layers >= ceiling {
                continue;
            }
            let cost = state.config.unicast_profile.layer_kbps()[layers];
            if cost > free {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => {
                    layers < b.0
                        || (layers == b.0
                            && (c.admit_time_s.total_cmp(&b.1).is_lt()
                                || (c.admit_time_s.total_cmp(&b.1).is_eq() && c.call_id < b.2)))
                }
            };
            if better {
                best = Some((layers, c.admit_time_s, c.call_id, cost));
            }
        }
        let Some((layers, _, call_id, cost)) = best else {
            return;
        };
        let old_kbps = state.call(call_id).expect("candidate exists").allocated_kbps;
        state
            .set_call_allocation(call_id, old_kbps + cost, Some(layers + 1))
            .expect("candidate exists");
    }
}

/// Returns degraded background calls to full rate, oldest admitted first,
/// skipping any whose gap no longer fits.
fn restore_background(state: &mut CellState) {
    let mut candidates: Vec<(f64, u64)> = state
        .calls()
        .values()
        .filter(|c| matches!(c.class, TrafficClass::Background(_)) && c.allocated_kbps < c.max_kbps)
        .map(|c| (c.admit_time_s, c.call_id))
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for (_, call_id) in candidates {
        let call = state.call(call_id).expect("candidate exists");
        let gap = call.max_kbps - call.allocated_kbps;
        if gap <= state.free() {
            let max_kbps = call.max_kbps;
            state
                .set_call_allocation(call_id, max_kbps, None)
                .expect("candidate exists");
        }
    }
}

/// Removes a call and redistributes the freed bandwidth in reverse ladder
/// order: unicast layers come back first, then background rates, and the
/// broadcast pool replans into whatever the calls no longer use. Fixed
/// reserves never degrade anything, so there is nothing to restore there.
pub fn release(state: &mut CellState, call_id: u64) -> Result<CallState, Error> {
    let call = state.remove_call(call_id)?;
    if state.config.scheme == Scheme::Proposed {
        restore_unicast(state);
        restore_background(state);
        let budget = state.config.mbs_budget(state.non_mbs_used());
        let mut journal = Vec::new();
        apply_session_plan(state, budget, &mut journal);
    }
    debug_assert!(state.validate_cheap().is_ok());
    Ok(call)
}
