use std::fmt;
use std::time::Duration;

use super::RunMode;

/// Non-fatal conditions observed during one iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct WarnFlags(u8);

impl WarnFlags {
    pub const NONE: WarnFlags = WarnFlags(0);
    /// The inner loop hit `max_steps` before every robot reached its goal.
    pub const INNER_CAP: WarnFlags = WarnFlags(1);
    /// Coverage cost below the oracle's best.
    pub const NEGATIVE_REGRET: WarnFlags = WarnFlags(2);
    /// Some cell had (near-)zero mass under its robot's estimate.
    pub const DEGENERATE_CENTROID: WarnFlags = WarnFlags(4);

    const NAMES: [(WarnFlags, &'static str); 3] = [
        (WarnFlags::INNER_CAP, "inner_cap"),
        (WarnFlags::NEGATIVE_REGRET, "negative_regret"),
        (WarnFlags::DEGENERATE_CENTROID, "degenerate_centroid"),
    ];

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, other: WarnFlags) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn insert(&mut self, other: WarnFlags) {
        self.0 |= other.0;
    }

    pub fn names(self) -> Vec<&'static str> {
        Self::NAMES.iter().filter(|(f, _)| self.contains(*f)).map(|&(_, n)| n).collect()
    }

    /// Inverse of the `Display` form (`a|b`, empty for none).
    pub fn parse(s: &str) -> Option<WarnFlags> {
        let mut out = WarnFlags::NONE;
        for part in s.split('|').filter(|p| !p.is_empty()) {
            let (f, _) = Self::NAMES.iter().find(|(_, n)| *n == part)?;
            out.insert(*f);
        }
        Some(out)
    }
}

impl fmt::Display for WarnFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.names().join("|"))
    }
}

/// Wall-clock time spent in each phase of an iteration. Not deterministic.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimings {
    pub estimate: Duration,
    pub inner_loop: Duration,
    pub exchange: Duration,
    pub fit: Duration,
}

impl PhaseTimings {
    pub fn total(&self) -> Duration {
        self.estimate + self.inner_loop + self.exchange + self.fit
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationMetrics<T> {
    /// 1-based outer iteration.
    pub iteration: usize,
    /// `integral |f - f*|` of the estimate the robots used this iteration.
    pub error: T,
    pub regret: T,
    /// Transfers including the initialization round.
    pub team_cumulative_transfers: usize,
    pub per_robot_cumulative_transfers: Vec<usize>,
    pub mean_per_robot_transfers: T,
    /// Foreign samples offered to robots in this iteration's exchange.
    pub offered: usize,
    /// Foreign samples accepted in this iteration's exchange.
    pub accepted: usize,
    pub inner_loop_steps: usize,
    pub warn: WarnFlags,
    pub timings: PhaseTimings,
}

impl<T> IterationMetrics<T> {
    /// Accepted fraction of offered samples; 1 when nothing was offered.
    pub fn acceptance_rate(&self) -> f64 {
        if self.offered == 0 {
            1.0
        } else {
            self.accepted as f64 / self.offered as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunMetrics<T> {
    pub mode: RunMode,
    pub seed: u64,
    /// Offered and accepted counts of the initialization exchange.
    pub initial_offered: usize,
    pub initial_accepted: usize,
    pub iterations: Vec<IterationMetrics<T>>,
}
