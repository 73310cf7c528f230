//! Acceptance gate for the artifact. Each test covers one numbered
//! criterion and prints a single PASS/FAIL verdict line with the measured
//! numbers (visible with `--nocapture`, or automatically on failure):
//!
//! 1. blocking matches the Erlang-B formula in a voice-only cell
//! 2. per-class blocking matches the two-class product-form loss model
//! 3. handover dropping: adaptive scheme at or below both fixed reserves
//! 4. forced termination: adaptive scheme separated below both baselines
//! 5. utilization ordering across schemes
//! 6. session planner equals the exhaustive fair-plan maximizer
//! 7. invariant soak: one-million-event run with per-event validation
//! 8. byte-identical CSV under repetition and parallelism
//! 9. blocking/dropping monotone in offered load
//!
//! Criteria 3, 4, 5 and 9 share one reference sweep (default workload,
//! three schemes × six loads × ten replications), computed once.

mod common;

use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bandsim::allocation::plan_mbs_allocation;
use bandsim::config::parse_config;
use bandsim::metrics::{aggregate, AggregateSummary, MetricStat};
use bandsim::model::{Bandwidth, LayerProfile, Scheme, SchemeConfig};
use bandsim::oracle::{blocking_multiclass, erlang_b};
use bandsim::sim::{replicate, run, RunSpec};
use bandsim::sweep::{run_sweep, SweepSpec};
use bandsim::traffic::TrafficRates;
use bandsim::Error;

fn verdict(criterion: usize, name: &str, ok: bool, detail: String) -> bool {
    println!(
        "acceptance {criterion} ({name}): {} — {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    ok
}

fn fixed(kbps: u64) -> Scheme {
    Scheme::FixedMbs {
        reserved_kbps: Bandwidth(kbps),
    }
}

fn upper(s: &MetricStat) -> f64 {
    s.mean + s.ci_half_width.unwrap_or(0.0)
}

fn lower(s: &MetricStat) -> f64 {
    s.mean - s.ci_half_width.unwrap_or(0.0)
}

struct Cell {
    scheme: Scheme,
    lambda: f64,
    stats: AggregateSummary,
}

/// Default-workload sweep shared by the ordering and monotonicity criteria.
fn reference_grid() -> &'static [Cell] {
    static GRID: OnceLock<Vec<Cell>> = OnceLock::new();
    GRID.get_or_init(|| {
        let (config, rates, sweep) = parse_config("").expect("defaults are valid");
        let mut cells = Vec::new();
        for &scheme in &sweep.schemes {
            for (li, &lambda) in sweep.lambda_values.iter().enumerate() {
                let spec = RunSpec {
                    config: SchemeConfig {
                        scheme,
                        ..config.clone()
                    },
                    rates: TrafficRates {
                        total_new_rate: lambda,
                        ..rates.clone()
                    },
                    horizon_s: sweep.horizon_s,
                    warmup_s: sweep.warmup_s,
                    seed: 0,
                    check_invariants: false,
                };
                let records =
                    replicate(&spec, &sweep.seeds_for(li), true).expect("reference sweep runs");
                cells.push(Cell {
                    scheme,
                    lambda,
                    stats: aggregate(&records).expect("uniform records"),
                });
            }
        }
        cells
    })
}

fn cells_of(scheme: Scheme) -> Vec<&'static Cell> {
    reference_grid()
        .iter()
        .filter(|c| c.scheme == scheme)
        .collect()
}

#[test]
fn criterion_1_erlang_b_equivalence() {
    let started = Instant::now();
    // Ten 64-kbps circuits, no sessions, no adaptation, dwell far beyond any
    // holding time, five Erlangs offered.
    let text = "\
capacity_kbps = 640
voice_kbps = 64
mbs.count = 0
background.max_kbps =
background.xi =
arrival.ratio = 1:0
scheme = fixed:0
duration.voice_s = 100
dwell.mean_s = 1e15
";
    let (config, rates, _) = parse_config(text).expect("valid scenario");
    let spec = RunSpec {
        config,
        rates: TrafficRates {
            total_new_rate: 0.05,
            ..rates
        },
        horizon_s: 200_000.0,
        warmup_s: 20_000.0,
        seed: 0,
        check_invariants: false,
    };
    let seeds: Vec<u64> = (1..=10).collect();
    let stats = aggregate(&replicate(&spec, &seeds, true).expect("runs")).expect("uniform");
    let analytic = erlang_b(10, 5.0);
    let simulated = stats.p_block_voice.mean;
    let tolerance = f64::max(0.10 * analytic, 0.003);
    let elapsed = started.elapsed();
    let ok = (simulated - analytic).abs() <= tolerance && elapsed.as_secs_f64() < 30.0;
    assert!(verdict(
        1,
        "erlang-b equivalence",
        ok,
        format!(
            "simulated {simulated:.6} vs analytic {analytic:.6}, tolerance {tolerance:.6}, {elapsed:.1?}"
        )
    ));
}

#[test]
fn criterion_2_two_class_loss_equivalence() {
    let started = Instant::now();
    // Fixed 6000-kbps reserve pins the twelve sessions at base quality,
    // leaving a 2000-kbps pool shared by 64-kbps voice (20 Erlang) and
    // rigid 500-kbps unicast video (10 Erlang) — a two-class loss system
    // with an enumerable product-form solution.
    let text = "\
capacity_kbps = 8000
scheme = fixed:6000
voice_kbps = 64
unicast.base_kbps = 500
unicast.layer_kbps =
background.max_kbps =
background.xi =
arrival.ratio = 4:1
duration.voice_s = 100
duration.unicast_s = 200
dwell.mean_s = 1e15
";
    let (config, rates, _) = parse_config(text).expect("valid scenario");
    let spec = RunSpec {
        config,
        rates: TrafficRates {
            total_new_rate: 0.25,
            ..rates
        },
        horizon_s: 200_000.0,
        warmup_s: 20_000.0,
        seed: 0,
        check_invariants: false,
    };
    let seeds: Vec<u64> = (21..=30).collect();
    let stats = aggregate(&replicate(&spec, &seeds, true).expect("runs")).expect("uniform");
    let analytic = blocking_multiclass(2_000, &[64, 500], &[20.0, 10.0]).expect("small space");
    let rel_voice = (stats.p_block_voice.mean - analytic[0]).abs() / analytic[0];
    let rel_unicast = (stats.p_block_unicast.mean - analytic[1]).abs() / analytic[1];
    let elapsed = started.elapsed();
    let ok = rel_voice <= 0.10 && rel_unicast <= 0.10 && elapsed.as_secs_f64() < 60.0;
    assert!(verdict(
        2,
        "two-class loss-model equivalence",
        ok,
        format!(
            "voice {:.5} vs {:.5} (rel {:.3}), unicast {:.5} vs {:.5} (rel {:.3}), {elapsed:.1?}",
            stats.p_block_voice.mean,
            analytic[0],
            rel_voice,
            stats.p_block_unicast.mean,
            analytic[1],
            rel_unicast
        )
    ));
}

#[test]
fn criterion_3_handover_dropping_ordering() {
    let proposed = cells_of(Scheme::Proposed);
    let f6 = cells_of(fixed(6_000));
    let f14 = cells_of(fixed(14_000));
    let n = proposed.len();
    let mut ok = true;
    let mut notes = Vec::new();
    for i in 0..n {
        let lambda = proposed[i].lambda;
        let p = &proposed[i].stats.p_drop;
        for (name, base) in [("fixed:6000", &f6[i].stats.p_drop), ("fixed:14000", &f14[i].stats.p_drop)] {
            if p.mean > base.mean {
                ok = false;
                notes.push(format!("λ={lambda}: {:.4} above {name} {:.4}", p.mean, base.mean));
            }
            if i >= n - 3 && upper(p) >= lower(base) {
                ok = false;
                notes.push(format!("λ={lambda}: CI overlaps {name}"));
            }
            if base.mean > 5e-2 && p.mean >= 1e-2 {
                ok = false;
                notes.push(format!(
                    "λ={lambda}: {name} at {:.3} but adaptive dropping {:.4} not negligible",
                    base.mean, p.mean
                ));
            }
        }
    }
    let top = n - 1;
    assert!(verdict(
        3,
        "handover dropping ordering",
        ok,
        format!(
            "at λ={}: proposed {:.5}, fixed:6000 {:.4}, fixed:14000 {:.4}{}",
            proposed[top].lambda,
            proposed[top].stats.p_drop.mean,
            f6[top].stats.p_drop.mean,
            f14[top].stats.p_drop.mean,
            if notes.is_empty() {
                String::new()
            } else {
                format!("; violations: {}", notes.join("; "))
            }
        )
    ));
}

#[test]
fn criterion_4_forced_termination_ordering() {
    let proposed = cells_of(Scheme::Proposed);
    let f6 = cells_of(fixed(6_000));
    let f14 = cells_of(fixed(14_000));
    let n = proposed.len();
    let mut ok = true;
    let mut notes = Vec::new();
    for i in n - 3..n {
        let lambda = proposed[i].lambda;
        let p = &proposed[i].stats.p_forced;
        for (name, base) in [
            ("fixed:6000", &f6[i].stats.p_forced),
            ("fixed:14000", &f14[i].stats.p_forced),
        ] {
            if !(p.mean < base.mean && upper(p) < lower(base)) {
                ok = false;
                notes.push(format!(
                    "λ={lambda}: {:.4} not separated below {name} {:.4}",
                    p.mean, base.mean
                ));
            }
        }
    }
    let top = n - 1;
    assert!(verdict(
        4,
        "forced termination ordering",
        ok,
        format!(
            "at λ={}: proposed {:.5}, fixed:6000 {:.4}, fixed:14000 {:.4}{}",
            proposed[top].lambda,
            proposed[top].stats.p_forced.mean,
            f6[top].stats.p_forced.mean,
            f14[top].stats.p_forced.mean,
            if notes.is_empty() {
                String::new()
            } else {
                format!("; violations: {}", notes.join("; "))
            }
        )
    ));
}

#[test]
fn criterion_5_utilization_ordering() {
    let proposed = cells_of(Scheme::Proposed);
    let f6 = cells_of(fixed(6_000));
    let f14 = cells_of(fixed(14_000));
    let n = proposed.len();
    let mut ok = true;
    let mut notes = Vec::new();
    for i in 0..n {
        let lambda = proposed[i].lambda;
        let u_p = proposed[i].stats.utilization.mean;
        if u_p < f14[i].stats.utilization.mean {
            ok = false;
            notes.push(format!(
                "λ={lambda}: {u_p:.4} below fixed:14000 {:.4}",
                f14[i].stats.utilization.mean
            ));
        }
        if i >= n - 3 && u_p < f6[i].stats.utilization.mean {
            ok = false;
            notes.push(format!(
                "λ={lambda}: {u_p:.4} below fixed:6000 {:.4}",
                f6[i].stats.utilization.mean
            ));
        }
    }
    let top = n - 1;
    assert!(verdict(
        5,
        "utilization ordering",
        ok,
        format!(
            "at λ={}: proposed {:.4}, fixed:6000 {:.4}, fixed:14000 {:.4}{}",
            proposed[top].lambda,
            proposed[top].stats.utilization.mean,
            f6[top].stats.utilization.mean,
            f14[top].stats.utilization.mean,
            if notes.is_empty() {
                String::new()
            } else {
                format!("; violations: {}", notes.join("; "))
            }
        )
    ));
}

#[test]
fn criterion_6_allocation_matches_exhaustive_fair_plans() {
    // Exhaustive part: every session count up to four, several profile
    // shapes up to three layers, both popularity orders, and every budget
    // at 1-kbps resolution from zero to one layer span past full quality.
    let profiles = [
        LayerProfile::new(Bandwidth(7), vec![], 0).unwrap(),
        LayerProfile::new(Bandwidth(10), vec![Bandwidth(5)], 0).unwrap(),
        LayerProfile::new(Bandwidth(10), vec![Bandwidth(5), Bandwidth(3)], 0).unwrap(),
        LayerProfile::new(Bandwidth(10), vec![Bandwidth(5), Bandwidth(3)], 1).unwrap(),
        LayerProfile::new(
            Bandwidth(7),
            vec![Bandwidth(5), Bandwidth(3), Bandwidth(2)],
            0,
        )
        .unwrap(),
        LayerProfile::new(
            Bandwidth(7),
            vec![Bandwidth(5), Bandwidth(3), Bandwidth(2)],
            1,
        )
        .unwrap(),
        LayerProfile::new(
            Bandwidth(7),
            vec![Bandwidth(5), Bandwidth(3), Bandwidth(2)],
            3,
        )
        .unwrap(),
        LayerProfile::new(
            Bandwidth(4),
            vec![Bandwidth(4), Bandwidth(4), Bandwidth(4)],
            0,
        )
        .unwrap(),
    ];
    let mut checked = 0usize;
    let mut mismatches = Vec::new();
    for profile in &profiles {
        for m in 1..=4usize {
            let identity: Vec<usize> = (1..=m).collect();
            let reversed: Vec<usize> = (1..=m).rev().collect();
            for ranks in [identity, reversed] {
                let sessions = common::homogeneous_sessions(profile, m, &ranks);
                let span = profile
                    .layer_kbps()
                    .iter()
                    .map(|b| b.kbps())
                    .max()
                    .unwrap_or_else(|| profile.base_kbps().kbps());
                let top = profile.max_bandwidth().kbps() * m as u64 + span;
                for budget in 0..=top {
                    checked += 1;
                    let plan = plan_mbs_allocation(&sessions, Bandwidth(budget));
                    let oracle = common::exhaustive_fair_plan(profile, m, Bandwidth(budget));
                    match (plan, oracle) {
                        (Ok(plan), Some(oracle)) => {
                            if plan.total_kbps != oracle.total_kbps
                                || plan.min_layers_removed != oracle.min_removed
                                || plan.sessions_at_min_removal != oracle.sessions_at_min
                            {
                                mismatches.push(format!(
                                    "m={m} budget={budget}: plan ({}, P={}, M1={}) vs oracle ({}, P={}, M1={})",
                                    plan.total_kbps,
                                    plan.min_layers_removed,
                                    plan.sessions_at_min_removal,
                                    oracle.total_kbps,
                                    oracle.min_removed,
                                    oracle.sessions_at_min
                                ));
                            }
                        }
                        (Err(Error::InfeasibleMbsFloor { .. }), None) => {}
                        (plan, oracle) => mismatches.push(format!(
                            "m={m} budget={budget}: feasibility disagrees (plan {:?}, oracle {:?})",
                            plan.map(|p| p.total_kbps),
                            oracle.map(|o| o.total_kbps)
                        )),
                    }
                }
            }
        }
    }

    // Randomized part: fairness (removed-layer spread at most one) across
    // 10^5 homogeneous instances with random shapes, floors, popularity
    // permutations, and budgets.
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let mut fairness_violations = 0usize;
    const INSTANCES: usize = 100_000;
    for _ in 0..INSTANCES {
        let m: usize = rng.gen_range(1..=12);
        let n_layers: usize = rng.gen_range(0..=4);
        let base = Bandwidth(rng.gen_range(1..=60));
        let layer_rates: Vec<Bandwidth> =
            (0..n_layers).map(|_| Bandwidth(rng.gen_range(1..=40))).collect();
        let min_layers = rng.gen_range(0..=n_layers);
        let profile = LayerProfile::new(base, layer_rates, min_layers).unwrap();
        let mut ranks: Vec<usize> = (1..=m).collect();
        for i in (1..m).rev() {
            let j = rng.gen_range(0..=i);
            ranks.swap(i, j);
        }
        let sessions = common::homogeneous_sessions(&profile, m, &ranks);
        let budget = Bandwidth(rng.gen_range(0..=profile.max_bandwidth().kbps() * m as u64 + 20));
        match plan_mbs_allocation(&sessions, budget) {
            Ok(plan) => {
                let removed: Vec<usize> = plan
                    .per_session_layers
                    .values()
                    .map(|&l| profile.max_layers() - l)
                    .collect();
                let spread =
                    removed.iter().max().unwrap() - removed.iter().min().unwrap();
                if spread > 1 || plan.total_kbps > budget {
                    fairness_violations += 1;
                }
            }
            Err(_) => {
                // Refusal is only legitimate when even the floor misses.
                if profile.min_bandwidth().kbps() * m as u64 <= budget.kbps() {
                    fairness_violations += 1;
                }
            }
        }
    }

    let ok = mismatches.is_empty() && fairness_violations == 0;
    assert!(verdict(
        6,
        "allocation brute-force equivalence",
        ok,
        format!(
            "{checked} exhaustive cells, {INSTANCES} randomized instances, {} mismatches, {fairness_violations} fairness violations{}",
            mismatches.len(),
            mismatches
                .first()
                .map(|m| format!("; first: {m}"))
                .unwrap_or_default()
        )
    ));
}

#[test]
fn criterion_7_invariant_soak() {
    let started = Instant::now();
    let (config, rates, _) = parse_config("").expect("defaults are valid");
    let spec = RunSpec {
        config: config.clone(),
        rates: TrafficRates {
            total_new_rate: 0.8,
            ..rates.clone()
        },
        horizon_s: 800_000.0,
        warmup_s: 10_000.0,
        seed: 2024,
        check_invariants: true,
    };
    let result = run(&spec);
    // Shorter soaks of the two fixed reserves through the same checker.
    let mut baseline_fault = None;
    for reserve in [6_000, 14_000] {
        let spec = RunSpec {
            config: SchemeConfig {
                scheme: fixed(reserve),
                ..config.clone()
            },
            rates: TrafficRates {
                total_new_rate: 0.8,
                ..rates.clone()
            },
            horizon_s: 60_000.0,
            warmup_s: 1_000.0,
            seed: 2025,
            check_invariants: true,
        };
        if let Err(e) = run(&spec) {
            baseline_fault = Some(format!("fixed:{reserve}: {e}"));
        }
    }
    let elapsed = started.elapsed();
    let (ok, detail) = match (&result, baseline_fault) {
        (Ok(record), None) => (
            record.events_processed >= 1_000_000,
            format!(
                "{} events validated after every one of them, {elapsed:.1?}",
                record.events_processed
            ),
        ),
        (Ok(_), Some(fault)) => (false, fault),
        (Err(e), _) => (false, format!("soak aborted: {e}")),
    };
    assert!(verdict(7, "invariant soak", ok, detail));
}

#[test]
fn criterion_8_byte_identical_csv() {
    let (config, rates, _) = parse_config("").expect("defaults are valid");
    let sweep = SweepSpec {
        lambda_values: vec![0.2, 0.5],
        schemes: vec![Scheme::Proposed, fixed(6_000), fixed(14_000)],
        replications: 3,
        base_seed: 42,
        horizon_s: 20_000.0,
        warmup_s: 2_000.0,
    };
    let first = run_sweep(&config, &rates, &sweep, false).expect("sweep runs");
    let second = run_sweep(&config, &rates, &sweep, false).expect("sweep runs");
    let parallel = run_sweep(&config, &rates, &sweep, true).expect("sweep runs");
    let ok = !first.is_empty() && first == second && first == parallel;
    assert!(verdict(
        8,
        "determinism",
        ok,
        format!(
            "{} bytes; repeat identical: {}, parallel identical: {}",
            first.len(),
            first == second,
            first == parallel
        )
    ));
}

#[test]
fn criterion_9_blocking_and_dropping_monotone_in_load() {
    fn check(
        scheme: Scheme,
        metric: &str,
        series: &[(f64, f64, f64)],
        notes: &mut Vec<String>,
    ) {
        for pair in series.windows(2) {
            let (l0, m0, h0) = pair[0];
            let (l1, m1, h1) = pair[1];
            let slack = h0.max(h1);
            if m1 + slack < m0 {
                notes.push(format!(
                    "{scheme} {metric}: {m0:.4} (λ={l0}) to {m1:.4} (λ={l1}) exceeds slack {slack:.4}"
                ));
            }
        }
    }

    let mut notes = Vec::new();
    for &scheme in &[Scheme::Proposed, fixed(6_000), fixed(14_000)] {
        let cells = cells_of(scheme);
        let pickers: [(&str, fn(&AggregateSummary) -> &MetricStat); 4] = [
            ("p_block_voice", |s| &s.p_block_voice),
            ("p_block_unicast", |s| &s.p_block_unicast),
            ("p_block_background", |s| &s.p_block_background),
            ("p_drop", |s| &s.p_drop),
        ];
        for (metric, pick) in pickers {
            let series: Vec<(f64, f64, f64)> = cells
                .iter()
                .map(|c| {
                    let stat = pick(&c.stats);
                    (c.lambda, stat.mean, stat.ci_half_width.unwrap_or(0.0))
                })
                .collect();
            check(scheme, metric, &series, &mut notes);
        }
    }
    let ok = notes.is_empty();
    assert!(verdict(
        9,
        "monotonicity in offered load",
        ok,
        if ok {
            "12 series (3 schemes × 4 metrics) non-decreasing within one CI half-width".to_string()
        } else {
            format!("violations: {}", notes.join("; "))
        }
    ));
}
