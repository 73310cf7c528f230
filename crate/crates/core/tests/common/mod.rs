//! Shared helpers for integration tests, chiefly an exhaustive cross-check
//! for the greedy session planner.

use bandsim::model::{Bandwidth, LayerProfile, MbsSessionState};

/// What exhaustive search found for one (profile, session count, budget).
#[derive(Debug, PartialEq, Eq)]
pub struct FairPlanOracle {
    pub total_kbps: Bandwidth,
    pub min_removed: usize,
    pub sessions_at_min: usize,
}

/// Enumerates every active-layer vector for `m` identical sessions, keeps
/// the feasible ones whose removed-layer counts stay within a spread of one
/// (the fair plans), and returns the largest carried total among them.
/// `None` when even the all-floor vector exceeds the budget.
///
/// Deliberately brute force: no round-robin reasoning, no early exit — the
/// point is independence from the production algorithm.
pub fn exhaustive_fair_plan(
    profile: &LayerProfile,
    m: usize,
    budget: Bandwidth,
) -> Option<FairPlanOracle> {
    assert!(m >= 1, "oracle is defined for at least one session");
    let lo = profile.min_layers();
    let hi = profile.max_layers();
    let mut layers = vec![hi; m];
    let mut best: Option<(Bandwidth, usize, usize)> = None;
    loop {
        let removed_max = layers.iter().map(|&l| hi - l).max().unwrap();
        let removed_min = layers.iter().map(|&l| hi - l).min().unwrap();
        if removed_max - removed_min <= 1 {
            let total: Bandwidth = layers
                .iter()
                .map(|&l| profile.bandwidth(l).expect("layers within profile"))
                .sum();
            if total <= budget && best.map_or(true, |(t, _, _)| total > t) {
                let at_min = layers.iter().filter(|&&l| hi - l == removed_min).count();
                best = Some((total, removed_min, at_min));
            }
        }
        // Odometer step over [lo, hi]^m.
        let mut i = 0;
        loop {
            if i == m {
                return best.map(|(total_kbps, min_removed, sessions_at_min)| FairPlanOracle {
                    total_kbps,
                    min_removed,
                    sessions_at_min,
                });
            }
            if layers[i] > lo {
                layers[i] -= 1;
                for l in layers.iter_mut().take(i) {
                    *l = hi;
                }
                break;
            }
            i += 1;
        }
    }
}

/// `m` sessions sharing `profile`, ids 1..=m, popularity given by `ranks`
/// (identity order when empty), all starting at full quality.
pub fn homogeneous_sessions(
    profile: &LayerProfile,
    m: usize,
    ranks: &[usize],
) -> Vec<MbsSessionState> {
    (1..=m)
        .map(|id| {
            let rank = if ranks.is_empty() { id } else { ranks[id - 1] };
            MbsSessionState::new(id, rank, profile.clone(), profile.max_layers())
                .expect("full quality is always within the profile")
        })
        .collect()
}
