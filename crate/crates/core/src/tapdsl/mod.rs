//! Tappings: sets of (group, lag, role) taps laid over a sensorimotor matrix.
//!
//! Lags are relative to the anchor time `t = 0`; negative lags reach into the
//! past, positive lags into the future. Each tap is colored as a model input or
//! a model target.

pub mod parser;
pub mod print;
pub mod templates;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use parser::{parse, parse_with_space, TapFile};
pub use print::print_file;
pub use templates::Template;

use crate::error::{Error, Result};
use crate::smcore::{ChannelRef, SensorimotorSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Input,
    Target,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Input => "input",
            Role::Target => "target",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tap {
    pub group: String,
    /// Explicit channel subset; `None` taps every channel of the group.
    pub channels: Option<Vec<usize>>,
    pub lag: i64,
    pub role: Role,
    /// Probability that this tap's cells are dropped in a row.
    pub drop_p: f64,
}

impl Tap {
    pub fn input(group: impl Into<String>, lag: i64) -> Self {
        Tap { group: group.into(), channels: None, lag, role: Role::Input, drop_p: 0.0 }
    }

    pub fn target(group: impl Into<String>, lag: i64) -> Self {
        Tap { group: group.into(), channels: None, lag, role: Role::Target, drop_p: 0.0 }
    }

    pub fn with_channels(mut self, channels: Vec<usize>) -> Self {
        self.channels = Some(channels);
        self
    }

    pub fn with_drop(mut self, p: f64) -> Self {
        self.drop_p = p;
        self
    }

    /// Tapped channel indices in ascending order.
    pub fn channel_indices(&self, space: &SensorimotorSpace) -> Result<Vec<usize>> {
        let dim = space
            .group(&self.group)
            .ok_or_else(|| Error::UnknownGroup(self.group.clone()))?
            .dim;
        Ok(match &self.channels {
            None => (0..dim).collect(),
            Some(c) => {
                let mut c = c.clone();
                c.sort_unstable();
                c
            }
        })
    }
}

/// A named, validated set of taps over one sensorimotor space.
#[derive(Debug, Clone, PartialEq)]
pub struct Tapping {
    name: String,
    taps: Vec<Tap>,
    space: Arc<SensorimotorSpace>,
}

/// One tapped matrix cell after channel expansion.
pub type Cell = (String, usize, i64, Role);

impl Tapping {
    pub fn new(name: impl Into<String>, space: Arc<SensorimotorSpace>, taps: Vec<Tap>) -> Result<Self> {
        let name = name.into();
        let invalid = |msg: String| Error::InvalidTapping { name: name.clone(), msg };
        let mut seen = BTreeSet::new();
        for tap in &taps {
            let dim = space
                .group(&tap.group)
                .ok_or_else(|| Error::UnknownGroup(tap.group.clone()))?
                .dim;
            if let Some(ch) = &tap.channels {
                if ch.is_empty() {
                    return Err(invalid(format!("empty channel list on group `{}`", tap.group)));
                }
                for (i, &c) in ch.iter().enumerate() {
                    if c >= dim {
                        return Err(Error::ChannelOutOfRange { group: tap.group.clone(), index: c, dim });
                    }
                    if ch[..i].contains(&c) {
                        return Err(invalid(format!("channel {c} listed twice on group `{}`", tap.group)));
                    }
                }
            }
            if !(0.0..=1.0).contains(&tap.drop_p) {
                return Err(invalid(format!("drop p={} outside [0,1]", tap.drop_p)));
            }
            for c in tap.channel_indices(&space)? {
                if !seen.insert((tap.group.as_str(), c, tap.lag, tap.role)) {
                    return Err(invalid(format!(
                        "duplicate {} tap on {}[{}] @ {}",
                        tap.role, tap.group, c, tap.lag
                    )));
                }
            }
        }
        if !taps.iter().any(|t| t.role == Role::Input) {
            return Err(invalid("no input taps".into()));
        }
        if !taps.iter().any(|t| t.role == Role::Target) {
            return Err(invalid("no target taps".into()));
        }
        Ok(Tapping { name, taps, space })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn space(&self) -> &Arc<SensorimotorSpace> {
        &self.space
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn inputs(&self) -> impl Iterator<Item = &Tap> {
        self.taps.iter().filter(|t| t.role == Role::Input)
    }

    pub fn targets(&self) -> impl Iterator<Item = &Tap> {
        self.taps.iter().filter(|t| t.role == Role::Target)
    }

    pub fn min_lag(&self) -> i64 {
        self.taps.iter().map(|t| t.lag).min().expect("tapping has taps")
    }

    pub fn max_lag(&self) -> i64 {
        self.taps.iter().map(|t| t.lag).max().expect("tapping has taps")
    }

    /// Window width `max_lag - min_lag + 1`.
    pub fn span(&self) -> usize {
        (self.max_lag() - self.min_lag() + 1) as usize
    }

    /// Every lag moved by `delta`.
    pub fn shifted(&self, delta: i64) -> Tapping {
        let taps = self.taps.iter().cloned().map(|mut t| {
            t.lag += delta;
            t
        });
        Tapping { name: self.name.clone(), taps: taps.collect(), space: self.space.clone() }
    }

    /// Tapped cells after channel expansion.
    pub fn cells(&self) -> BTreeSet<Cell> {
        self.taps
            .iter()
            .flat_map(|t| {
                let chans = t.channel_indices(&self.space).expect("validated on construction");
                chans.into_iter().map(move |c| (t.group.clone(), c, t.lag, t.role))
            })
            .collect()
    }

    /// Tapped (channel, lag) coordinates with roles erased.
    pub fn coordinates(&self) -> BTreeSet<(ChannelRef, i64)> {
        self.cells().into_iter().map(|(g, c, l, _)| (ChannelRef::new(g, c), l)).collect()
    }

    pub fn validate(&self) -> CausalityReport {
        let max_input = self.inputs().map(|t| t.lag).max().expect("has inputs");
        let max_target = self.targets().map(|t| t.lag).max().expect("has targets");
        let class = if max_input > 0 {
            Causality::Acausal
        } else if max_target > 0 {
            Causality::Buffered
        } else {
            Causality::Causal
        };
        CausalityReport { class, buffer_delay: max_target.max(0) as usize }
    }
}

/// Union of two tappings' taps: `a`'s taps, then `b`'s taps not already in `a`.
pub fn compose(a: &Tapping, b: &Tapping, name: impl Into<String>) -> Result<Tapping> {
    if a.space != b.space {
        return Err(Error::SpaceMismatch(a.space.name().into(), b.space.name().into()));
    }
    let mut taps = a.taps.clone();
    for t in &b.taps {
        if !taps.contains(t) {
            taps.push(t.clone());
        }
    }
    Tapping::new(name, a.space.clone(), taps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Causality {
    /// All lags ≤ 0.
    Causal,
    /// Inputs ≤ 0 but some target in the future; rows are emitted late.
    Buffered,
    /// Some input in the future.
    Acausal,
}

impl fmt::Display for Causality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Causality::Causal => "causal",
            Causality::Buffered => "buffered",
            Causality::Acausal => "acausal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CausalityReport {
    pub class: Causality,
    /// Largest positive target lag, in steps.
    pub buffer_delay: usize,
}
