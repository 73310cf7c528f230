//! Flat `key = value` configuration: every key optional, defaults matching
//! the reference workload, unknown or malformed keys rejected with the key
//! path. The same canonical form is echoed into output headers so results
//! are reproducible from the file alone.

use std::path::Path;

use crate::error::Error;
use crate::model::{
    BackgroundClassProfile, Bandwidth, Fraction, LayerProfile, MbsSessionSpec, Scheme,
    SchemeConfig,
};
use crate::sweep::SweepSpec;
use crate::traffic::{ArrivalWeights, TrafficRates};

struct RawConfig {
    entries: Vec<(String, String)>,
    used: Vec<bool>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<RawConfig, Error> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(
                    line,
                    format!("line {}: expected `key = value`", idx + 1),
                ));
            };
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::config(
                    line,
                    format!("line {}: empty key", idx + 1),
                ));
            }
            if entries.iter().any(|(k, _)| *k == key) {
                return Err(Error::config(
                    &key,
                    format!("line {}: duplicate key", idx + 1),
                ));
            }
            entries.push((key, value.trim().to_string()));
        }
        let used = vec![false; entries.len()];
        Ok(RawConfig { entries, used })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.iter().position(|(k, _)| k == key).map(|i| {
            self.used[i] = true;
            self.entries[i].1.clone()
        })
    }

    fn finish(&self) -> Result<(), Error> {
        match self.entries.iter().zip(&self.used).find(|(_, &u)| !u) {
            Some(((key, _), _)) => Err(Error::config(key, "unknown key")),
            None => Ok(()),
        }
    }
}

fn parse_kbps(key: &str, s: &str) -> Result<Bandwidth, Error> {
    s.trim()
        .parse::<u64>()
        .map(Bandwidth)
        .map_err(|_| Error::config(key, format!("`{s}` is not a whole number of kbps")))
}

fn parse_usize(key: &str, s: &str) -> Result<usize, Error> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| Error::config(key, format!("`{s}` is not a non-negative integer")))
}

fn parse_u64(key: &str, s: &str) -> Result<u64, Error> {
    s.trim()
        .parse::<u64>()
        .map_err(|_| Error::config(key, format!("`{s}` is not a non-negative integer")))
}

fn parse_f64(key: &str, s: &str) -> Result<f64, Error> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::config(key, format!("`{s}` is not a number")))
}

fn split_list(s: &str) -> Vec<&str> {
    let s = s.trim();
    if s.is_empty() {
        Vec::new()
    } else {
        s.split(',').map(str::trim).collect()
    }
}

fn parse_kbps_list(key: &str, s: &str) -> Result<Vec<Bandwidth>, Error> {
    split_list(s).into_iter().map(|x| parse_kbps(key, x)).collect()
}

fn parse_usize_list(key: &str, s: &str) -> Result<Vec<usize>, Error> {
    split_list(s).into_iter().map(|x| parse_usize(key, x)).collect()
}

fn parse_f64_list(key: &str, s: &str) -> Result<Vec<f64>, Error> {
    split_list(s).into_iter().map(|x| parse_f64(key, x)).collect()
}

/// Accepts `0.5` (exact decimal) or `1/2` (explicit quotient).
fn parse_fraction(key: &str, s: &str) -> Result<Fraction, Error> {
    let wrap = |e: Error| match e {
        Error::Config { message, .. } => Error::Config {
            key: key.to_string(),
            message,
        },
        other => other,
    };
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_u64(key, num)?;
        let den = parse_u64(key, den)?;
        return Fraction::new(num, den).map_err(wrap);
    }
    Fraction::parse_decimal(s).map_err(wrap)
}

fn parse_fraction_list(key: &str, s: &str) -> Result<Vec<Fraction>, Error> {
    split_list(s).into_iter().map(|x| parse_fraction(key, x)).collect()
}

fn parse_ratio(key: &str, s: &str) -> Result<Vec<u64>, Error> {
    let parts: Vec<&str> = s.trim().split(':').map(str::trim).collect();
    if parts.len() < 2 {
        return Err(Error::config(
            key,
            format!("`{s}` needs at least voice:unicast entries"),
        ));
    }
    parts.into_iter().map(|x| parse_u64(key, x)).collect()
}

fn parse_scheme_list(key: &str, s: &str) -> Result<Vec<Scheme>, Error> {
    let schemes: Vec<Scheme> = split_list(s)
        .into_iter()
        .map(|x| x.parse::<Scheme>())
        .collect::<Result<_, _>>()?;
    if schemes.is_empty() {
        return Err(Error::config(key, "scheme list must not be empty"));
    }
    Ok(schemes)
}

/// Parses configuration text into the allocation config, traffic rates
/// (arrival rate left at zero — the sweep fills it per row), and sweep
/// plan. Omitted keys take the reference defaults.
pub fn parse_config(text: &str) -> Result<(SchemeConfig, TrafficRates, SweepSpec), Error> {
    let mut raw = RawConfig::parse(text)?;

    let capacity_kbps = match raw.take("capacity_kbps") {
        Some(v) => parse_kbps("capacity_kbps", &v)?,
        None => Bandwidth(20_000),
    };
    let voice_kbps = match raw.take("voice_kbps") {
        Some(v) => parse_kbps("voice_kbps", &v)?,
        None => Bandwidth(64),
    };

    let unicast_base = match raw.take("unicast.base_kbps") {
        Some(v) => parse_kbps("unicast.base_kbps", &v)?,
        None => Bandwidth(300),
    };
    let unicast_layers = match raw.take("unicast.layer_kbps") {
        Some(v) => parse_kbps_list("unicast.layer_kbps", &v)?,
        None => vec![Bandwidth(100); 2],
    };
    let unicast_min = match raw.take("unicast.min_layers") {
        Some(v) => parse_usize("unicast.min_layers", &v)?,
        None => 0,
    };
    let unicast_profile = LayerProfile::new(unicast_base, unicast_layers, unicast_min)?;

    let mbs_count = match raw.take("mbs.count") {
        Some(v) => parse_usize("mbs.count", &v)?,
        None => 12,
    };
    let mbs_base = match raw.take("mbs.base_kbps") {
        Some(v) => parse_kbps("mbs.base_kbps", &v)?,
        None => Bandwidth(500),
    };
    let mbs_layers = match raw.take("mbs.layer_kbps") {
        Some(v) => parse_kbps_list("mbs.layer_kbps", &v)?,
        None => vec![Bandwidth(125); 4],
    };
    let mbs_min = match raw.take("mbs.min_layers") {
        Some(v) => parse_usize("mbs.min_layers", &v)?,
        None => 0,
    };
    let popularity = match raw.take("mbs.popularity") {
        Some(v) => {
            let ranks = parse_usize_list("mbs.popularity", &v)?;
            if ranks.len() != mbs_count {
                return Err(Error::config(
                    "mbs.popularity",
                    format!("{} rank(s) for {} session(s)", ranks.len(), mbs_count),
                ));
            }
            ranks
        }
        None => (1..=mbs_count).collect(),
    };
    let mbs_sessions = popularity
        .into_iter()
        .map(|rank| {
            Ok(MbsSessionSpec {
                popularity_rank: rank,
                profile: LayerProfile::new(mbs_base, mbs_layers.clone(), mbs_min)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let bg_max = match raw.take("background.max_kbps") {
        Some(v) => parse_kbps_list("background.max_kbps", &v)?,
        None => vec![Bandwidth(120)],
    };
    let bg_xi = match raw.take("background.xi") {
        Some(v) => parse_fraction_list("background.xi", &v)?,
        None => vec![Fraction::new(1, 2).expect("static fraction"); bg_max.len()],
    };
    if bg_xi.len() != bg_max.len() {
        return Err(Error::config(
            "background.xi",
            format!("{} fraction(s) for {} class(es)", bg_xi.len(), bg_max.len()),
        ));
    }
    let background_classes = bg_max
        .into_iter()
        .zip(bg_xi)
        .enumerate()
        .map(|(i, (max, xi))| BackgroundClassProfile::new(i, max, xi))
        .collect::<Result<Vec<_>, Error>>()?;

    let schemes = match (raw.take("scheme"), raw.take("sweep.schemes")) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "scheme",
                "give either `scheme` or `sweep.schemes`, not both",
            ));
        }
        (Some(v), None) => vec![v.parse::<Scheme>()?],
        (None, Some(v)) => parse_scheme_list("sweep.schemes", &v)?,
        (None, None) => vec![
            Scheme::Proposed,
            Scheme::FixedMbs {
                reserved_kbps: Bandwidth(6_000),
            },
            Scheme::FixedMbs {
                reserved_kbps: Bandwidth(14_000),
            },
        ],
    };

    let ratio = match raw.take("arrival.ratio") {
        Some(v) => parse_ratio("arrival.ratio", &v)?,
        None => {
            if background_classes.len() == 1 {
                vec![5, 1, 4]
            } else {
                return Err(Error::config(
                    "arrival.ratio",
                    format!(
                        "no default ratio for {} background class(es); set it explicitly",
                        background_classes.len()
                    ),
                ));
            }
        }
    };
    if ratio.len() != 2 + background_classes.len() {
        return Err(Error::config(
            "arrival.ratio",
            format!(
                "{} entries for voice + unicast + {} background class(es)",
                ratio.len(),
                background_classes.len()
            ),
        ));
    }
    let weights = ArrivalWeights {
        voice: ratio[0],
        unicast: ratio[1],
        background: ratio[2..].to_vec(),
    };

    let duration = |raw: &mut RawConfig, key: &str, default| match raw.take(key) {
        Some(v) => parse_f64(key, &v),
        None => Ok(default),
    };
    let rates = TrafficRates {
        total_new_rate: 0.0,
        weights,
        mean_voice_duration_s: duration(&mut raw, "duration.voice_s", 120.0)?,
        mean_unicast_duration_s: duration(&mut raw, "duration.unicast_s", 300.0)?,
        mean_background_duration_s: duration(&mut raw, "duration.background_s", 180.0)?,
        mean_dwell_s: duration(&mut raw, "dwell.mean_s", 540.0)?,
    };

    let horizon_s = match raw.take("sim.horizon_s") {
        Some(v) => parse_f64("sim.horizon_s", &v)?,
        None => 200_000.0,
    };
    let warmup_s = match raw.take("sim.warmup_s") {
        Some(v) => parse_f64("sim.warmup_s", &v)?,
        None => horizon_s * 0.1,
    };
    let lambda_values = match raw.take("sweep.lambda") {
        Some(v) => parse_f64_list("sweep.lambda", &v)?,
        None => vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
    };
    let replications = match raw.take("sweep.replications") {
        Some(v) => parse_usize("sweep.replications", &v)?,
        None => 10,
    };
    let base_seed = match raw.take("sweep.seed") {
        Some(v) => parse_u64("sweep.seed", &v)?,
        None => 1,
    };

    raw.finish()?;

    let config = SchemeConfig {
        scheme: schemes[0],
        capacity_kbps,
        mbs_sessions,
        voice_kbps,
        unicast_profile,
        background_classes,
    };
    let sweep = SweepSpec {
        lambda_values,
        schemes,
        replications,
        base_seed,
        horizon_s,
        warmup_s,
    };
    config.validate()?;
    rates.validate()?;
    sweep.validate()?;
    Ok((config, rates, sweep))
}

pub fn load_config(path: &Path) -> Result<(SchemeConfig, TrafficRates, SweepSpec), Error> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::config("config", format!("cannot read {}: {e}", path.display()))
    })?;
    parse_config(&text)
}

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

/// Canonical `key = value` lines describing the effective experiment,
/// suitable both for output headers and for re-parsing. Session profiles
/// built through the API may be heterogeneous; those fall back to one
/// descriptive line per session.
pub fn effective_config_lines(
    config: &SchemeConfig,
    rates: &TrafficRates,
    sweep: &SweepSpec,
) -> Vec<String> {
    let mut lines = vec![
        format!("sweep.schemes = {}", join(&sweep.schemes, ",")),
        format!("capacity_kbps = {}", config.capacity_kbps.kbps()),
        format!("voice_kbps = {}", config.voice_kbps.kbps()),
        format!(
            "unicast.base_kbps = {}",
            config.unicast_profile.base_kbps().kbps()
        ),
        format!(
            "unicast.layer_kbps = {}",
            join(config.unicast_profile.layer_kbps().iter().map(|b| b.kbps()), ",")
        ),
        format!("unicast.min_layers = {}", config.unicast_profile.min_layers()),
        format!("mbs.count = {}", config.mbs_sessions.len()),
    ];
    let homogeneous = config
        .mbs_sessions
        .windows(2)
        .all(|w| w[0].profile == w[1].profile);
    if let (true, Some(first)) = (homogeneous, config.mbs_sessions.first()) {
        lines.push(format!("mbs.base_kbps = {}", first.profile.base_kbps().kbps()));
        lines.push(format!(
            "mbs.layer_kbps = {}",
            join(first.profile.layer_kbps().iter().map(|b| b.kbps()), ",")
        ));
        lines.push(format!("mbs.min_layers = {}", first.profile.min_layers()));
        lines.push(format!(
            "mbs.popularity = {}",
            join(config.mbs_sessions.iter().map(|s| s.popularity_rank), ",")
        ));
    } else {
        for (i, s) in config.mbs_sessions.iter().enumerate() {
            lines.push(format!(
                "# mbs session {} = rank {}, {}+{} kbps, min_layers {}",
                i + 1,
                s.popularity_rank,
                s.profile.base_kbps().kbps(),
                join(s.profile.layer_kbps().iter().map(|b| b.kbps()), ","),
                s.profile.min_layers()
            ));
        }
    }
    lines.push(format!(
        "background.max_kbps = {}",
        join(config.background_classes.iter().map(|b| b.max_kbps.kbps()), ",")
    ));
    lines.push(format!(
        "background.xi = {}",
        join(
            config.background_classes.iter().map(|b| b.degradation_fraction),
            ","
        )
    ));
    let mut ratio = vec![rates.weights.voice, rates.weights.unicast];
    ratio.extend(&rates.weights.background);
    lines.push(format!("arrival.ratio = {}", join(ratio, ":")));
    lines.push(format!("duration.voice_s = {}", rates.mean_voice_duration_s));
    lines.push(format!("duration.unicast_s = {}", rates.mean_unicast_duration_s));
    lines.push(format!(
        "duration.background_s = {}",
        rates.mean_background_duration_s
    ));
    lines.push(format!("dwell.mean_s = {}", rates.mean_dwell_s));
    lines.push(format!("sim.horizon_s = {}", sweep.horizon_s));
    lines.push(format!("sim.warmup_s = {}", sweep.warmup_s));
    lines.push(format!("sweep.lambda = {}", join(&sweep.lambda_values, ",")));
    lines.push(format!("sweep.replications = {}", sweep.replications));
    lines.push(format!("sweep.seed = {}", sweep.base_seed));
    lines
}
