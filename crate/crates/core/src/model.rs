//! Domain model: bandwidth arithmetic, traffic classes, layered media
//! profiles, per-call and per-session state, scheme configuration, and the
//! cell state container that the allocator and admission logic operate on.

use std::collections::BTreeMap;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub, SubAssign};

use crate::error::Error;

/// Bandwidth in kbps. All pool arithmetic is exact integer math; fractional
/// rates never appear because degradation fractions are validated to divide
/// evenly (see [`BackgroundClassProfile`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Bandwidth(pub u64);

impl Bandwidth {
    pub const ZERO: Bandwidth = Bandwidth(0);

    pub fn kbps(self) -> u64 {
        self.0
    }

    pub fn saturating_sub(self, rhs: Bandwidth) -> Bandwidth {
        Bandwidth(self.0.saturating_sub(rhs.0))
    }

    pub fn checked_sub(self, rhs: Bandwidth) -> Option<Bandwidth> {
        self.0.checked_sub(rhs.0).map(Bandwidth)
    }
}

impl Add for Bandwidth {
    type Output = Bandwidth;
    fn add(self, rhs: Bandwidth) -> Bandwidth {
        Bandwidth(self.0 + rhs.0)
    }
}

impl AddAssign for Bandwidth {
    fn add_assign(&mut self, rhs: Bandwidth) {
        self.0 += rhs.0;
    }
}

impl Sub for Bandwidth {
    type Output = Bandwidth;
    fn sub(self, rhs: Bandwidth) -> Bandwidth {
        Bandwidth(self.0 - rhs.0)
    }
}

impl SubAssign for Bandwidth {
    fn sub_assign(&mut self, rhs: Bandwidth) {
        self.0 -= rhs.0;
    }
}

impl Sum for Bandwidth {
    fn sum<I: Iterator<Item = Bandwidth>>(iter: I) -> Bandwidth {
        Bandwidth(iter.map(|b| b.0).sum())
    }
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} kbps", self.0)
    }
}

/// Exact rational in lowest terms, used for degradation fractions so that
/// `max_kbps * xi` stays integral by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fraction {
    num: u64,
    den: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Result<Fraction, Error> {
        if den == 0 {
            return Err(Error::config("fraction", "zero denominator"));
        }
        if num > den {
            return Err(Error::config(
                "fraction",
                format!("{num}/{den} exceeds 1"),
            ));
        }
        let g = gcd(num.max(1), den);
        Ok(Fraction {
            num: num / g,
            den: den / g,
        })
    }

    /// Parses a plain decimal in `[0, 1]` such as `0.5` or `1`. Exact: the
    /// digits are taken over a power-of-ten denominator, no float rounding.
    pub fn parse_decimal(s: &str) -> Result<Fraction, Error> {
        let s = s.trim();
        let bad = || Error::config("fraction", format!("`{s}` is not a decimal in [0, 1]"));
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || frac_part.len() > 12
        {
            return Err(bad());
        }
        let int: u64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let den = 10u64.pow(frac_part.len() as u32);
        let frac: u64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().map_err(|_| bad())?
        };
        Fraction::new(int * den + frac, den)
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    /// `value * self`, requiring the product to be an integer.
    pub fn scale(self, value: Bandwidth) -> Result<Bandwidth, Error> {
        let prod = value.0 * self.num;
        if prod % self.den != 0 {
            return Err(Error::config(
                "fraction",
                format!(
                    "{} * {}/{} is not an integer number of kbps",
                    value.0, self.num, self.den
                ),
            ));
        }
        Ok(Bandwidth(prod / self.den))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Call taxonomy. Background classes are indexed because several may coexist
/// with distinct rates and degradation behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrafficClass {
    Voice,
    UnicastVideo,
    Background(usize),
}

/// Class collapsed over background indices, for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrafficKind {
    Voice,
    UnicastVideo,
    Background,
}

impl TrafficClass {
    pub fn kind(self) -> TrafficKind {
        match self {
            TrafficClass::Voice => TrafficKind::Voice,
            TrafficClass::UnicastVideo => TrafficKind::UnicastVideo,
            TrafficClass::Background(_) => TrafficKind::Background,
        }
    }
}

/// Whether a request is a fresh arrival or a call handed over from a
/// neighboring cell. Handovers are the protected class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    New,
    Handover,
}

/// A layered (scalable) media encoding: mandatory base layer plus orderd
/// enhancement layers. Dropping layer `k` implies layers above `k` are
/// already dropped, so a rate is identified by a layer count alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerProfile {
    base_kbps: Bandwidth,
    enhanced_layer_kbps: Vec<Bandwidth>,
    min_layers: usize,
}

impl LayerProfile {
    pub fn new(
        base_kbps: Bandwidth,
        enhanced_layer_kbps: Vec<Bandwidth>,
        min_layers: usize,
    ) -> Result<LayerProfile, Error> {
        if base_kbps == Bandwidth::ZERO {
            return Err(Error::config("profile.base_kbps", "base layer must be positive"));
        }
        if enhanced_layer_kbps.iter().any(|&b| b == Bandwidth::ZERO) {
            return Err(Error::config(
                "profile.layer_kbps",
                "enhancement layers must be positive",
            ));
        }
        if min_layers > enhanced_layer_kbps.len() {
            return Err(Error::config(
                "profile.min_layers",
                format!(
                    "min_layers {} exceeds layer count {}",
                    min_layers,
                    enhanced_layer_kbps.len()
                ),
            ));
        }
        Ok(LayerProfile {
            base_kbps,
            enhanced_layer_kbps,
            min_layers,
        })
    }

    /// All enhancement layers at the same rate.
    pub fn uniform(
        base_kbps: Bandwidth,
        layer_kbps: Bandwidth,
        layers: usize,
        min_layers: usize,
    ) -> Result<LayerProfile, Error> {
        LayerProfile::new(base_kbps, vec![layer_kbps; layers], min_layers)
    }

    pub fn base_kbps(&self) -> Bandwidth {
        self.base_kbps
    }

    pub fn layer_kbps(&self) -> &[Bandwidth] {
        &self.enhanced_layer_kbps
    }

    pub fn max_layers(&self) -> usize {
        self.enhanced_layer_kbps.len()
    }

    pub fn min_layers(&self) -> usize {
        self.min_layers
    }

    /// Rate when carrying the base layer plus the first `layers` enhancement
    /// layers. Errors outside the profile's allowed range.
    pub fn bandwidth(&self, layers: usize) -> Result<Bandwidth, Error> {
        if layers < self.min_layers || layers > self.enhanced_layer_kbps.len() {
            return Err(Error::LayerRange {
                layers,
                min: self.min_layers,
                max: self.enhanced_layer_kbps.len(),
            });
        }
        Ok(self.base_kbps + self.enhanced_layer_kbps[..layers].iter().copied().sum())
    }

    pub fn min_bandwidth(&self) -> Bandwidth {
        self.bandwidth(self.min_layers).expect("min_layers validated")
    }

    pub fn max_bandwidth(&self) -> Bandwidth {
        self.bandwidth(self.enhanced_layer_kbps.len())
            .expect("max layer count is in range")
    }
}

/// One broadcast/multicast video session. Rank 1 is the most popular; less
/// popular sessions lose layers first under congestion.
#[derive(Debug, Clone, PartialEq)]
pub struct MbsSessionState {
    pub session_id: usize,
    pub popularity_rank: usize,
    pub profile: LayerProfile,
    active_layers: usize,
}

impl MbsSessionState {
    pub fn new(
        session_id: usize,
        popularity_rank: usize,
        profile: LayerProfile,
        active_layers: usize,
    ) -> Result<MbsSessionState, Error> {
        if active_layers < profile.min_layers() || active_layers > profile.max_layers() {
            return Err(Error::LayerRange {
                layers: active_layers,
                min: profile.min_layers(),
                max: profile.max_layers(),
            });
        }
        Ok(MbsSessionState {
            session_id,
            popularity_rank,
            profile,
            active_layers,
        })
    }

    pub fn active_layers(&self) -> usize {
        self.active_layers
    }

    pub(crate) fn set_active_layers(&mut self, layers: usize) {
        debug_assert!(layers >= self.profile.min_layers());
        debug_assert!(layers <= self.profile.max_layers());
        self.active_layers = layers;
    }

    pub fn current_bandwidth(&self) -> Bandwidth {
        self.profile
            .bandwidth(self.active_layers)
            .expect("active_layers kept in range")
    }
}

/// A best-effort traffic class: full rate when the cell is idle, degradable
/// down to `max * xi` under pressure. `xi` must produce an integral floor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackgroundClassProfile {
    pub class_index: usize,
    pub max_kbps: Bandwidth,
    pub degradation_fraction: Fraction,
}

impl BackgroundClassProfile {
    pub fn new(
        class_index: usize,
        max_kbps: Bandwidth,
        degradation_fraction: Fraction,
    ) -> Result<BackgroundClassProfile, Error> {
        if max_kbps == Bandwidth::ZERO {
            return Err(Error::config("background.max_kbps", "rate must be positive"));
        }
        // Fail fast if xi * max is fractional.
        degradation_fraction.scale(max_kbps)?;
        Ok(BackgroundClassProfile {
            class_index,
            max_kbps,
            degradation_fraction,
        })
    }

    pub fn min_kbps(&self) -> Bandwidth {
        self.degradation_fraction
            .scale(self.max_kbps)
            .expect("validated at construction")
    }
}

/// Per-call mutable state tracked by the cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CallState {
    pub call_id: u64,
    pub class: TrafficClass,
    pub origin: Origin,
    pub allocated_kbps: Bandwidth,
    pub min_kbps: Bandwidth,
    pub max_kbps: Bandwidth,
    /// Unicast video only: how many enhancement layers are currently carried.
    pub active_layers: Option<usize>,
    pub admit_time_s: f64,
    /// Service time still owed when the call leaves this cell's coverage.
    pub residual_duration_s: f64,
    pub dwell_deadline_s: f64,
}

/// An admission request, new or handover.
#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub class: TrafficClass,
    pub origin: Origin,
    pub req_min: Bandwidth,
    pub req_max: Bandwidth,
    pub residual_s: f64,
}

impl Request {
    /// Builds a request with the class's min/max bounds from `config`.
    pub fn for_class(
        class: TrafficClass,
        origin: Origin,
        residual_s: f64,
        config: &SchemeConfig,
    ) -> Result<Request, Error> {
        let (req_min, req_max) = config.class_bounds(class)?;
        Ok(Request {
            class,
            origin,
            req_min,
            req_max,
            residual_s,
        })
    }
}

/// Allocation scheme under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Adaptive sharing: broadcast sessions yield layers under congestion
    /// and reclaim them as load recedes.
    Proposed,
    /// Static split: broadcast sessions own a fixed reserve and never adapt.
    FixedMbs { reserved_kbps: Bandwidth },
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Proposed => write!(f, "proposed"),
            Scheme::FixedMbs { reserved_kbps } => write!(f, "fixed:{}", reserved_kbps.0),
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    /// Accepts `proposed` or `fixed:<kbps>`, the same spelling `Display`
    /// emits.
    fn from_str(s: &str) -> Result<Scheme, Error> {
        let s = s.trim();
        if s == "proposed" {
            return Ok(Scheme::Proposed);
        }
        if let Some(rest) = s.strip_prefix("fixed:") {
            let kbps: u64 = rest.parse().map_err(|_| {
                Error::config("scheme", format!("`{rest}` is not a whole kbps reserve"))
            })?;
            return Ok(Scheme::FixedMbs {
                reserved_kbps: Bandwidth(kbps),
            });
        }
        Err(Error::config(
            "scheme",
            format!("`{s}` is not `proposed` or `fixed:<kbps>`"),
        ))
    }
}

/// Static description of one broadcast session in the configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct MbsSessionSpec {
    pub popularity_rank: usize,
    pub profile: LayerProfile,
}

/// Full allocation-side configuration for one simulated cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub capacity_kbps: Bandwidth,
    pub mbs_sessions: Vec<MbsSessionSpec>,
    pub voice_kbps: Bandwidth,
    pub unicast_profile: LayerProfile,
    pub background_classes: Vec<BackgroundClassProfile>,
}

impl Default for SchemeConfig {
    /// Reference workload: 20 Mbps cell, 12 broadcast sessions of
    /// 500 + 4x125 kbps fully degradable, 64 kbps voice, 300 + 2x100 kbps
    /// unicast video, one 120 kbps background class halvable to 60.
    fn default() -> SchemeConfig {
        let mbs_profile = LayerProfile::uniform(Bandwidth(500), Bandwidth(125), 4, 0)
            .expect("static profile is valid");
        SchemeConfig {
            scheme: Scheme::Proposed,
            capacity_kbps: Bandwidth(20_000),
            mbs_sessions: (1..=12)
                .map(|rank| MbsSessionSpec {
                    popularity_rank: rank,
                    profile: mbs_profile.clone(),
                })
                .collect(),
            voice_kbps: Bandwidth(64),
            unicast_profile: LayerProfile::uniform(Bandwidth(300), Bandwidth(100), 2, 0)
                .expect("static profile is valid"),
            background_classes: vec![BackgroundClassProfile::new(
                0,
                Bandwidth(120),
                Fraction::new(1, 2).expect("static fraction"),
            )
            .expect("static background class is valid")],
        }
    }
}

impl SchemeConfig {
    /// Sum of session maxima: the broadcast pool when nothing is degraded.
    pub fn c_max_b(&self) -> Bandwidth {
        self.mbs_sessions
            .iter()
            .map(|s| s.profile.max_bandwidth())
            .sum()
    }

    /// Sum of session minima: the floor the pool can never go below.
    pub fn c_min_b(&self) -> Bandwidth {
        self.mbs_sessions
            .iter()
            .map(|s| s.profile.min_bandwidth())
            .sum()
    }

    /// Capacity left for calls when every session is at max.
    pub fn c_min_nb(&self) -> Bandwidth {
        self.capacity_kbps.saturating_sub(self.c_max_b())
    }

    /// Capacity available to calls when every session is at its floor.
    pub fn c_max_nb(&self) -> Bandwidth {
        self.capacity_kbps.saturating_sub(self.c_min_b())
    }

    /// Min/max requested rate for a class under this configuration.
    pub fn class_bounds(&self, class: TrafficClass) -> Result<(Bandwidth, Bandwidth), Error> {
        match class {
            TrafficClass::Voice => Ok((self.voice_kbps, self.voice_kbps)),
            TrafficClass::UnicastVideo => Ok((
                self.unicast_profile.min_bandwidth(),
                self.unicast_profile.max_bandwidth(),
            )),
            TrafficClass::Background(i) => {
                let bg = self.background_classes.get(i).ok_or_else(|| {
                    Error::config(
                        "background",
                        format!("class index {i} out of range"),
                    )
                })?;
                Ok((bg.min_kbps(), bg.max_kbps))
            }
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.capacity_kbps == Bandwidth::ZERO {
            return Err(Error::config("capacity_kbps", "capacity must be positive"));
        }
        if self.voice_kbps == Bandwidth::ZERO {
            return Err(Error::config("voice_kbps", "voice rate must be positive"));
        }
        if self.c_min_b() > self.capacity_kbps {
            return Err(Error::InfeasibleMbsFloor {
                floor_kbps: self.c_min_b(),
                available_kbps: self.capacity_kbps,
            });
        }
        let mut ranks: Vec<usize> = self
            .mbs_sessions
            .iter()
            .map(|s| s.popularity_rank)
            .collect();
        ranks.sort_unstable();
        ranks.dedup();
        if ranks.len() != self.mbs_sessions.len() {
            return Err(Error::config(
                "mbs.popularity",
                "popularity ranks must be distinct",
            ));
        }
        for (i, bg) in self.background_classes.iter().enumerate() {
            if bg.class_index != i {
                return Err(Error::config(
                    "background",
                    format!("class {} stored at index {}", bg.class_index, i),
                ));
            }
        }
        if let Scheme::FixedMbs { reserved_kbps } = self.scheme {
            if reserved_kbps > self.capacity_kbps {
                return Err(Error::config(
                    "scheme",
                    format!(
                        "reserve {} exceeds capacity {}",
                        reserved_kbps, self.capacity_kbps
                    ),
                ));
            }
            // The reserve must still cover every session floor.
            if self.c_min_b() > reserved_kbps && self.c_min_b() > Bandwidth::ZERO {
                return Err(Error::InfeasibleMbsFloor {
                    floor_kbps: self.c_min_b(),
                    available_kbps: reserved_kbps,
                });
            }
        }
        Ok(())
    }

    /// Budget the broadcast planner may spend: whole cell minus current call
    /// load for the adaptive scheme, the fixed reserve otherwise.
    pub fn mbs_budget(&self, c_nb: Bandwidth) -> Bandwidth {
        match self.scheme {
            Scheme::Proposed => self.capacity_kbps.saturating_sub(c_nb),
            Scheme::FixedMbs { reserved_kbps } => reserved_kbps,
        }
    }
}

/// Live cell: configuration plus the mutable session/call population and
/// cached pool sums kept in lockstep by the mutators.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    pub config: SchemeConfig,
    sessions: Vec<MbsSessionState>,
    calls: BTreeMap<u64, CallState>,
    pub clock_s: f64,
    next_call_id: u64,
    c_b: Bandwidth,
    c_nb: Bandwidth,
    /// Session indices in layer-removal order, fixed at construction.
    removal_order: Vec<usize>,
}

impl CellState {
    /// Initializes an empty cell and gives the broadcast sessions their
    /// initial plan within the scheme's budget.
    pub fn new(config: SchemeConfig) -> Result<CellState, Error> {
        config.validate()?;
        let mut sessions: Vec<MbsSessionState> = config
            .mbs_sessions
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                MbsSessionState::new(
                    i + 1,
                    spec.popularity_rank,
                    spec.profile.clone(),
                    spec.profile.min_layers(),
                )
            })
            .collect::<Result<_, _>>()?;
        let budget = config.mbs_budget(Bandwidth::ZERO);
        let plan = crate::allocation::plan_mbs_allocation(&sessions, budget)?;
        for s in sessions.iter_mut() {
            s.set_active_layers(plan.per_session_layers[&s.session_id]);
        }
        let c_b = sessions.iter().map(|s| s.current_bandwidth()).sum();
        let removal_order = crate::allocation::removal_order(&sessions);
        Ok(CellState {
            config,
            sessions,
            calls: BTreeMap::new(),
            clock_s: 0.0,
            next_call_id: 1,
            c_b,
            c_nb: Bandwidth::ZERO,
            removal_order,
        })
    }

    pub(crate) fn removal_order(&self) -> &[usize] {
        &self.removal_order
    }

    pub fn sessions(&self) -> &[MbsSessionState] {
        &self.sessions
    }

    pub fn calls(&self) -> &BTreeMap<u64, CallState> {
        &self.calls
    }

    pub fn call(&self, call_id: u64) -> Result<&CallState, Error> {
        self.calls.get(&call_id).ok_or(Error::CallNotFound(call_id))
    }

    /// Broadcast pool actually carried right now (sum of session rates).
    pub fn mbs_used(&self) -> Bandwidth {
        self.c_b
    }

    /// Broadcast pool as seen by the divider: what the sessions use under
    /// the adaptive scheme, the whole reserve (idle slack included) under a
    /// fixed split.
    pub fn mbs_pool(&self) -> Bandwidth {
        match self.config.scheme {
            Scheme::Proposed => self.c_b,
            Scheme::FixedMbs { reserved_kbps } => reserved_kbps,
        }
    }

    /// Aggregate call load.
    pub fn non_mbs_used(&self) -> Bandwidth {
        self.c_nb
    }

    /// Capacity not claimed by either pool.
    pub fn free(&self) -> Bandwidth {
        self.config
            .capacity_kbps
            .saturating_sub(self.mbs_pool() + self.c_nb)
    }

    pub(crate) fn next_call_id(&mut self) -> u64 {
        let id = self.next_call_id;
        self.next_call_id += 1;
        id
    }

    pub(crate) fn insert_call(&mut self, call: CallState) {
        self.c_nb += call.allocated_kbps;
        let prev = self.calls.insert(call.call_id, call);
        debug_assert!(prev.is_none(), "call id reused");
    }

    pub(crate) fn remove_call(&mut self, call_id: u64) -> Result<CallState, Error> {
        let call = self
            .calls
            .remove(&call_id)
            .ok_or(Error::CallNotFound(call_id))?;
        self.c_nb -= call.allocated_kbps;
        Ok(call)
    }

    pub(crate) fn set_call_allocation(
        &mut self,
        call_id: u64,
        allocated_kbps: Bandwidth,
        active_layers: Option<usize>,
    ) -> Result<(), Error> {
        let call = self
            .calls
            .get_mut(&call_id)
            .ok_or(Error::CallNotFound(call_id))?;
        self.c_nb = self.c_nb - call.allocated_kbps + allocated_kbps;
        call.allocated_kbps = allocated_kbps;
        call.active_layers = active_layers;
        Ok(())
    }

    pub(crate) fn set_session_layers(&mut self, session_id: usize, layers: usize) {
        let s = &mut self.sessions[session_id - 1];
        debug_assert_eq!(s.session_id, session_id);
        let old = s.current_bandwidth();
        s.set_active_layers(layers);
        self.c_b = self.c_b - old + s.current_bandwidth();
    }

    /// O(1) consistency probe for hot paths (debug builds assert it around
    /// every mutation via the admission layer).
    pub fn validate_cheap(&self) -> Result<(), Error> {
        if self.mbs_pool() + self.c_nb > self.config.capacity_kbps {
            return Err(Error::config(
                "cell",
                format!(
                    "pools exceed capacity: {} + {} > {}",
                    self.mbs_pool(),
                    self.c_nb,
                    self.config.capacity_kbps
                ),
            ));
        }
        Ok(())
    }

    /// Full invariant sweep: cached sums match recomputation, every call is
    /// within its [min, max] band, every session within its layer bounds,
    /// and the two pools fit in the cell.
    pub fn validate(&self) -> Result<(), Error> {
        let c_b: Bandwidth = self.sessions.iter().map(|s| s.current_bandwidth()).sum();
        if c_b != self.c_b {
            return Err(Error::config(
                "cell",
                format!("cached broadcast sum {} != actual {}", self.c_b, c_b),
            ));
        }
        let c_nb: Bandwidth = self.calls.values().map(|c| c.allocated_kbps).sum();
        if c_nb != self.c_nb {
            return Err(Error::config(
                "cell",
                format!("cached call sum {} != actual {}", self.c_nb, c_nb),
            ));
        }
        for s in &self.sessions {
            if s.active_layers() < s.profile.min_layers()
                || s.active_layers() > s.profile.max_layers()
            {
                return Err(Error::LayerRange {
                    layers: s.active_layers(),
                    min: s.profile.min_layers(),
                    max: s.profile.max_layers(),
                });
            }
        }
        if let Scheme::FixedMbs { reserved_kbps } = self.config.scheme {
            if self.c_b > reserved_kbps.min(self.config.c_max_b()) {
                return Err(Error::config(
                    "cell",
                    format!(
                        "broadcast use {} exceeds reserve {}",
                        self.c_b, reserved_kbps
                    ),
                ));
            }
        }
        for call in self.calls.values() {
            if call.allocated_kbps < call.min_kbps || call.allocated_kbps > call.max_kbps {
                return Err(Error::config(
                    "cell",
                    format!(
                        "call {} allocation {} outside [{}, {}]",
                        call.call_id, call.allocated_kbps, call.min_kbps, call.max_kbps
                    ),
                ));
            }
            if call.class == TrafficClass::UnicastVideo {
                let layers = call.active_layers.ok_or_else(|| {
                    Error::config("cell", format!("unicast call {} missing layers", call.call_id))
                })?;
                let expect = self.config.unicast_profile.bandwidth(layers)?;
                if expect != call.allocated_kbps {
                    return Err(Error::config(
                        "cell",
                        format!(
                            "call {} carries {} but layer count {} implies {}",
                            call.call_id, call.allocated_kbps, layers, expect
                        ),
                    ));
                }
            }
        }
        self.validate_cheap()
    }
}
