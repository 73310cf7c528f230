//! Stochastic traffic: Poisson arrivals split across classes, exponential
//! call durations and cell dwell times, and the wrap-around handover
//! re-offer that turns a dwell expiry into a handover arrival at the same
//! cell.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::Error;
use crate::model::{CallState, Origin, Request, SchemeConfig, TrafficClass};

/// Integer class-arrival weights; the probability of a class is its weight
/// over the total, exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrivalWeights {
    pub voice: u64,
    pub unicast: u64,
    pub background: Vec<u64>,
}

impl ArrivalWeights {
    pub fn total(&self) -> u64 {
        self.voice + self.unicast + self.background.iter().sum::<u64>()
    }
}

/// Arrival and lifetime parameters for one run. `total_new_rate` may be
/// zero (a cell with no call traffic at all); every mean must be positive.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficRates {
    /// New-call arrivals per second across all classes.
    pub total_new_rate: f64,
    pub weights: ArrivalWeights,
    pub mean_voice_duration_s: f64,
    pub mean_unicast_duration_s: f64,
    pub mean_background_duration_s: f64,
    pub mean_dwell_s: f64,
}

impl TrafficRates {
    /// Reference mix: 5:1:4 voice/unicast/background, 120/300/180 s mean
    /// durations, 540 s mean dwell.
    pub fn defaults(total_new_rate: f64) -> TrafficRates {
        TrafficRates {
            total_new_rate,
            weights: ArrivalWeights {
                voice: 5,
                unicast: 1,
                background: vec![4],
            },
            mean_voice_duration_s: 120.0,
            mean_unicast_duration_s: 300.0,
            mean_background_duration_s: 180.0,
            mean_dwell_s: 540.0,
        }
    }

    pub fn mean_duration(&self, class: TrafficClass) -> f64 {
        match class {
            TrafficClass::Voice => self.mean_voice_duration_s,
            TrafficClass::UnicastVideo => self.mean_unicast_duration_s,
            TrafficClass::Background(_) => self.mean_background_duration_s,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !self.total_new_rate.is_finite() || self.total_new_rate < 0.0 {
            return Err(Error::config(
                "sweep.lambda",
                format!("arrival rate {} must be finite and >= 0", self.total_new_rate),
            ));
        }
        for (key, mean) in [
            ("duration.voice_s", self.mean_voice_duration_s),
            ("duration.unicast_s", self.mean_unicast_duration_s),
            ("duration.background_s", self.mean_background_duration_s),
            ("dwell.mean_s", self.mean_dwell_s),
        ] {
            if !mean.is_finite() || mean <= 0.0 {
                return Err(Error::config(key, format!("mean {mean} must be positive")));
            }
        }
        if self.weights.total() == 0 {
            return Err(Error::config(
                "arrival.ratio",
                "arrival weights must not all be zero",
            ));
        }
        Ok(())
    }
}

/// Exponential interarrival gap for a Poisson stream of the given rate.
pub fn next_interarrival<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> Result<f64, Error> {
    if !rate.is_finite() || rate <= 0.0 {
        return Err(Error::config(
            "sweep.lambda",
            format!("interarrival sampling needs a positive rate, got {rate}"),
        ));
    }
    Ok(Exp::new(rate).expect("rate validated").sample(rng))
}

/// Draws a traffic class with probability exactly proportional to its
/// weight.
pub fn pick_class<R: Rng + ?Sized>(
    rng: &mut R,
    weights: &ArrivalWeights,
) -> Result<TrafficClass, Error> {
    let total = weights.total();
    if total == 0 {
        return Err(Error::config(
            "arrival.ratio",
            "arrival weights must not all be zero",
        ));
    }
    let mut x = rng.gen_range(0..total);
    if x < weights.voice {
        return Ok(TrafficClass::Voice);
    }
    x -= weights.voice;
    if x < weights.unicast {
        return Ok(TrafficClass::UnicastVideo);
    }
    x -= weights.unicast;
    for (i, &w) in weights.background.iter().enumerate() {
        if x < w {
            return Ok(TrafficClass::Background(i));
        }
        x -= w;
    }
    unreachable!("gen_range(0..total) is covered by the weights")
}

/// Independent exponential (duration, dwell) pair for a fresh call of the
/// given class. Draw order is fixed: duration first, then dwell.
pub fn lifecycle_samples<R: Rng + ?Sized>(
    rng: &mut R,
    class: TrafficClass,
    rates: &TrafficRates,
) -> (f64, f64) {
    let duration = Exp::new(1.0 / rates.mean_duration(class))
        .expect("means validated")
        .sample(rng);
    (duration, sample_dwell(rng, rates))
}

/// Fresh dwell sample, drawn anew at every handover re-admission.
pub fn sample_dwell<R: Rng + ?Sized>(rng: &mut R, rates: &TrafficRates) -> f64 {
    Exp::new(1.0 / rates.mean_dwell_s)
        .expect("means validated")
        .sample(rng)
}

/// Builds the handover request for a call whose dwell expired at `now_s`:
/// same class, carrying whatever service time it is still owed. Returns
/// `None` when nothing is owed — a duration ending exactly at the dwell
/// boundary counts as completion, not handover.
pub fn handover_reoffer(
    call: &CallState,
    config: &SchemeConfig,
    now_s: f64,
) -> Option<Request> {
    let remaining = call.residual_duration_s - (now_s - call.admit_time_s);
    if remaining <= 0.0 {
        return None;
    }
    Some(
        Request::for_class(call.class, Origin::Handover, remaining, config)
            .expect("admitted call's class is valid for its config"),
    )
}
