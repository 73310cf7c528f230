//! Event counters, the derived probabilities the experiment reports, and
//! cross-replication aggregation with t-distribution confidence intervals.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::Error;
use crate::model::{Bandwidth, TrafficKind};

/// Raw per-class event counts for one run's measurement window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassCounters {
    pub offered_new: u64,
    pub admitted_new: u64,
    pub blocked_new: u64,
    pub offered_handover: u64,
    pub admitted_handover: u64,
    pub dropped_handover: u64,
    /// Admitted calls that later lost a handover. One per dropped handover:
    /// a drop terminates the call, so no call is ever dropped twice.
    pub forced_terminations: u64,
    pub completed: u64,
}

impl ClassCounters {
    fn add(&mut self, other: &ClassCounters) {
        self.offered_new += other.offered_new;
        self.admitted_new += other.admitted_new;
        self.blocked_new += other.blocked_new;
        self.offered_handover += other.offered_handover;
        self.admitted_handover += other.admitted_handover;
        self.dropped_handover += other.dropped_handover;
        self.forced_terminations += other.forced_terminations;
        self.completed += other.completed;
    }

    fn validate(&self, kind: &str) -> Result<(), Error> {
        if self.offered_new != self.admitted_new + self.blocked_new {
            return Err(Error::config(
                "metrics",
                format!(
                    "{kind}: offered_new {} != admitted {} + blocked {}",
                    self.offered_new, self.admitted_new, self.blocked_new
                ),
            ));
        }
        if self.offered_handover != self.admitted_handover + self.dropped_handover {
            return Err(Error::config(
                "metrics",
                format!(
                    "{kind}: offered_handover {} != admitted {} + dropped {}",
                    self.offered_handover, self.admitted_handover, self.dropped_handover
                ),
            ));
        }
        Ok(())
    }
}

/// Everything one simulation run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub voice: ClassCounters,
    pub unicast: ClassCounters,
    pub background: ClassCounters,
    /// Time integral of carried broadcast bandwidth over the measurement
    /// window, kbps·s. Idle fixed reserve does not count.
    pub integral_mbs_kbps_s: f64,
    /// Time integral of aggregate call bandwidth, kbps·s.
    pub integral_non_mbs_kbps_s: f64,
    pub horizon_s: f64,
    pub warmup_s: f64,
    pub capacity_kbps: Bandwidth,
    pub seed: u64,
    pub events_processed: u64,
    /// Canonical echo of (config, rates, horizon, warmup); aggregation
    /// refuses to mix records from different experiments.
    pub config_fingerprint: String,
}

impl MetricsRecord {
    pub fn class(&self, kind: TrafficKind) -> &ClassCounters {
        match kind {
            TrafficKind::Voice => &self.voice,
            TrafficKind::UnicastVideo => &self.unicast,
            TrafficKind::Background => &self.background,
        }
    }

    pub(crate) fn class_mut(&mut self, kind: TrafficKind) -> &mut ClassCounters {
        match kind {
            TrafficKind::Voice => &mut self.voice,
            TrafficKind::UnicastVideo => &mut self.unicast,
            TrafficKind::Background => &mut self.background,
        }
    }

    pub fn totals(&self) -> ClassCounters {
        let mut t = self.voice;
        t.add(&self.unicast);
        t.add(&self.background);
        t
    }

    pub fn measured_duration_s(&self) -> f64 {
        self.horizon_s - self.warmup_s
    }

    /// Count identities per class plus the physical bound on the bandwidth
    /// integrals.
    pub fn validate(&self) -> Result<(), Error> {
        self.voice.validate("voice")?;
        self.unicast.validate("unicast")?;
        self.background.validate("background")?;
        let ceiling = self.capacity_kbps.kbps() as f64 * self.measured_duration_s();
        let carried = self.integral_mbs_kbps_s + self.integral_non_mbs_kbps_s;
        if carried > ceiling * (1.0 + 1e-9) {
            return Err(Error::config(
                "metrics",
                format!("bandwidth integral {carried} exceeds capacity x time {ceiling}"),
            ));
        }
        Ok(())
    }
}

/// Probabilities and utilization derived from one record. Ratios with a
/// zero denominator report 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedMetrics {
    pub p_block_voice: f64,
    pub p_block_unicast: f64,
    pub p_block_background: f64,
    /// Dropped handovers over offered handovers, all classes pooled.
    pub p_drop: f64,
    /// Forced terminations over admitted new calls: the probability that an
    /// admitted call eventually dies at a cell boundary.
    pub p_forced: f64,
    /// Stricter reading that also counts blocking: (blocked new + dropped
    /// handover) over offered new calls.
    pub p_forced_alt: f64,
    /// Carried bandwidth (broadcast + calls) over capacity x time.
    pub utilization: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn derive(record: &MetricsRecord) -> DerivedMetrics {
    let totals = record.totals();
    let duration = record.measured_duration_s();
    let utilization = if duration > 0.0 {
        (record.integral_mbs_kbps_s + record.integral_non_mbs_kbps_s)
            / (record.capacity_kbps.kbps() as f64 * duration)
    } else {
        0.0
    };
    DerivedMetrics {
        p_block_voice: ratio(record.voice.blocked_new, record.voice.offered_new),
        p_block_unicast: ratio(record.unicast.blocked_new, record.unicast.offered_new),
        p_block_background: ratio(record.background.blocked_new, record.background.offered_new),
        p_drop: ratio(totals.dropped_handover, totals.offered_handover),
        p_forced: ratio(totals.forced_terminations, totals.admitted_new),
        p_forced_alt: ratio(
            totals.blocked_new + totals.dropped_handover,
            totals.offered_new,
        ),
        utilization,
    }
}

/// Sample mean with a 95% confidence half-width; the half-width is absent
/// for a single replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricStat {
    pub mean: f64,
    pub ci_half_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSummary {
    pub replications: usize,
    pub p_block_voice: MetricStat,
    pub p_block_unicast: MetricStat,
    pub p_block_background: MetricStat,
    pub p_drop: MetricStat,
    pub p_forced: MetricStat,
    pub p_forced_alt: MetricStat,
    pub utilization: MetricStat,
}

fn stat(values: &[f64]) -> MetricStat {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return MetricStat {
            mean,
            ci_half_width: None,
        };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("valid dof")
        .inverse_cdf(0.975);
    MetricStat {
        mean,
        ci_half_width: Some(t * (var / n as f64).sqrt()),
    }
}

/// Across-replication summary. Every record must stem from the same
/// experiment (identical fingerprint).
pub fn aggregate(records: &[MetricsRecord]) -> Result<AggregateSummary, Error> {
    let first = records
        .first()
        .ok_or_else(|| Error::config("metrics", "cannot aggregate zero records"))?;
    if let Some(bad) = records
        .iter()
        .find(|r| r.config_fingerprint != first.config_fingerprint)
    {
        return Err(Error::config(
            "metrics",
            format!(
                "mixed experiments in one aggregate (seed {} differs from seed {})",
                bad.seed, first.seed
            ),
        ));
    }
    let derived: Vec<DerivedMetrics> = records.iter().map(derive).collect();
    let of = |f: fn(&DerivedMetrics) -> f64| stat(&derived.iter().map(f).collect::<Vec<_>>());
    Ok(AggregateSummary {
        replications: records.len(),
        p_block_voice: of(|d| d.p_block_voice),
        p_block_unicast: of(|d| d.p_block_unicast),
        p_block_background: of(|d| d.p_block_background),
        p_drop: of(|d| d.p_drop),
        p_forced: of(|d| d.p_forced),
        p_forced_alt: of(|d| d.p_forced_alt),
        utilization: of(|d| d.utilization),
    })
}
