//! Broadcast-pool planning: how many enhancement layers each session
//! carries for a given bandwidth budget, plus the cell traffic-condition
//! test that gates adaptation.

use std::collections::BTreeMap;

use crate::error::Error;
use crate::model::{Bandwidth, MbsSessionState, SchemeConfig};

/// Cell traffic condition. `Low` means every broadcast session could run at
/// full quality alongside the current call load.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrafficCondition {
    Low,
    Congested,
}

/// Classifies the cell given the aggregate call load `non_mbs_kbps`.
pub fn classify(config: &SchemeConfig, non_mbs_kbps: Bandwidth) -> TrafficCondition {
    if config.capacity_kbps.saturating_sub(non_mbs_kbps) >= config.c_max_b() {
        TrafficCondition::Low
    } else {
        TrafficCondition::Congested
    }
}

/// Result of planning the broadcast pool into a budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MbsAllocationPlan {
    /// Enhancement layers kept, keyed by session id.
    pub per_session_layers: BTreeMap<usize, usize>,
    /// Fewest layers removed from any single session.
    pub min_layers_removed: usize,
    /// How many sessions lost exactly that minimum.
    pub sessions_at_min_removal: usize,
    /// Bandwidth the planned sessions carry in total.
    pub total_kbps: Bandwidth,
}

/// Removal order: least popular session first, with the larger session id
/// breaking ties. Returns indices into the `sessions` slice.
pub(crate) fn removal_order(sessions: &[MbsSessionState]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sessions.len()).collect();
    order.sort_by(|&a, &b| {
        sessions[b]
            .popularity_rank
            .cmp(&sessions[a].popularity_rank)
            .then(sessions[b].session_id.cmp(&sessions[a].session_id))
    });
    order
}

/// Core greedy: start everyone at max quality, then strip one layer per
/// round following `order`, stopping the moment the total fits. `out` is a
/// scratch vector of layer counts parallel to `sessions`; the return value
/// is the planned total, which exceeds `budget` only when every session is
/// already at its floor.
///
/// Because the removal sequence is fixed, a smaller budget always extends a
/// larger budget's removals — plans are nested, so replanning after load
/// changes never reorders quality between sessions.
pub(crate) fn greedy_layers(
    sessions: &[MbsSessionState],
    order: &[usize],
    budget: Bandwidth,
    out: &mut Vec<usize>,
) -> Bandwidth {
    out.clear();
    out.extend(sessions.iter().map(|s| s.profile.max_layers()));
    let mut total: Bandwidth = sessions.iter().map(|s| s.profile.max_bandwidth()).sum();
    if total <= budget {
        return total;
    }
    loop {
        let mut removed_any = false;
        for &i in order {
            if out[i] > sessions[i].profile.min_layers() {
                out[i] -= 1;
                total -= sessions[i].profile.layer_kbps()[out[i]];
                removed_any = true;
                if total <= budget {
                    return total;
                }
            }
        }
        if !removed_any {
            return total; // everyone at floor; caller decides feasibility
        }
    }
}

/// Plans the broadcast sessions into `available` bandwidth. Quality is
/// removed one layer at a time, round-robin from least to most popular, and
/// stops as soon as the pool fits — so the plan keeps as many layers as the
/// budget allows and spreads the loss as evenly as popularity permits.
/// Current session state does not influence the result: the plan is a pure
/// function of the profiles and the budget.
pub fn plan_mbs_allocation(
    sessions: &[MbsSessionState],
    available: Bandwidth,
) -> Result<MbsAllocationPlan, Error> {
    let order = removal_order(sessions);
    let mut layers = Vec::with_capacity(sessions.len());
    let total = greedy_layers(sessions, &order, available, &mut layers);
    if total > available {
        return Err(Error::InfeasibleMbsFloor {
            floor_kbps: total,
            available_kbps: available,
        });
    }
    let mut per_session_layers = BTreeMap::new();
    let mut min_removed = usize::MAX;
    for (i, s) in sessions.iter().enumerate() {
        per_session_layers.insert(s.session_id, layers[i]);
        min_removed = min_removed.min(s.profile.max_layers() - layers[i]);
    }
    if sessions.is_empty() {
        min_removed = 0;
    }
    let sessions_at_min_removal = sessions
        .iter()
        .enumerate()
        .filter(|(i, s)| s.profile.max_layers() - layers[*i] == min_removed)
        .count();
    Ok(MbsAllocationPlan {
        per_session_layers,
        min_layers_removed: min_removed,
        sessions_at_min_removal,
        total_kbps: total,
    })
}
