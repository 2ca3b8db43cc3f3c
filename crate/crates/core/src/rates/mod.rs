//! Achievable rates for the NOMA-in-DAS schemes and their baselines.
//!
//! Instantaneous rates live in [`instant`], fading-averaged closed forms in
//! [`ergodic`]. All rates are in bits/s/Hz.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::geometry::{GainMatrix, User, NUM_RRUS, NUM_TX};

pub mod ergodic;
pub mod instant;

pub use ergodic::{
    ergodic_conventional_single_selection, ergodic_rates_noma, ErgodicNomaLink, ErgodicRates,
};
pub use instant::{
    rates_conventional_noma, rates_conventional_single_selection, rates_jt_noma,
    rates_noma_blanket, rates_noma_single, JtLink, NomaLink, RruAssist,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    NomaSingleSelection,
    NomaBlanket,
    ConventionalNoma,
    ConventionalSingleSelection,
    JtNoma,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::NomaSingleSelection,
        SchemeKind::NomaBlanket,
        SchemeKind::ConventionalNoma,
        SchemeKind::ConventionalSingleSelection,
        SchemeKind::JtNoma,
    ];

    pub fn token(self) -> &'static str {
        match self {
            SchemeKind::NomaSingleSelection => "noma_single_selection",
            SchemeKind::NomaBlanket => "noma_blanket",
            SchemeKind::ConventionalNoma => "conventional_noma",
            SchemeKind::ConventionalSingleSelection => "conventional_single_selection",
            SchemeKind::JtNoma => "jt_noma",
        }
    }

    /// Schemes where the center BS splits its power by NOMA and `P_1` is
    /// the decision variable.
    pub fn is_center_noma(self) -> bool {
        matches!(
            self,
            SchemeKind::NomaSingleSelection | SchemeKind::NomaBlanket | SchemeKind::ConventionalNoma
        )
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.token() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
    }
}

/// How total power is divided between the center BS and the RRUs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerSplit {
    pub total: f64,
    pub center: f64,
    pub per_rru: f64,
}

impl PowerSplit {
    pub fn new(total: f64, center: f64, per_rru: f64) -> Result<Self> {
        for (name, v) in [("total", total), ("center", center), ("per-RRU", per_rru)] {
            if !(v >= 0.0 && v.is_finite()) {
                return domain(format!("{name} power must be non-negative and finite, got {v}"));
            }
        }
        let radiated = center + NUM_RRUS as f64 * per_rru;
        if (radiated - total).abs() > 1e-12 * total.max(1.0) {
            return domain(format!(
                "center + 6 x RRU power ({radiated}) does not equal total power ({total})"
            ));
        }
        Ok(PowerSplit { total, center, per_rru })
    }

    /// DAS split with `center_fraction * P` at the center and the rest
    /// shared equally by the RRUs.
    pub fn das(total: f64, center_fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&center_fraction) {
            return domain(format!("center fraction must lie in [0, 1], got {center_fraction}"));
        }
        let center = center_fraction * total;
        Self::new(total, center, (total - center) / NUM_RRUS as f64)
    }

    /// All power at the center BS.
    pub fn conventional(total: f64) -> Result<Self> {
        Self::new(total, total, 0.0)
    }

    /// `P / 7` at every antenna.
    pub fn equal(total: f64) -> Result<Self> {
        let share = total / NUM_TX as f64;
        Self::new(total, share, share)
    }
}

/// A power split together with the weak-user share `P_1` of the center BS.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerBudget {
    split: PowerSplit,
    p1: f64,
}

impl PowerBudget {
    pub fn new(split: PowerSplit, p1: f64) -> Result<Self> {
        if !(0.0..=split.center).contains(&p1) {
            return domain(format!("P_1 = {p1} outside [0, {}]", split.center));
        }
        Ok(PowerBudget { split, p1 })
    }

    pub fn split(&self) -> PowerSplit {
        self.split
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    /// Strong-user share `P_cen - P_1`.
    pub fn p2(&self) -> f64 {
        (self.split.center - self.p1).max(0.0)
    }
}

/// Rates of one evaluation. `z1` and `z2` are the rates at which the weak
/// user's message can be decoded at the weak and strong user.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct RateOutcome {
    pub z1: f64,
    pub z2: f64,
    pub r1: f64,
    pub r2: f64,
    pub outage: bool,
}

impl RateOutcome {
    pub fn min_rate(&self) -> f64 {
        self.r1.min(self.r2)
    }

    pub fn sum_rate(&self) -> f64 {
        self.r1 + self.r2
    }
}

/// Best RRU (1..=6) for `user` by the given gains; ties go to the lowest index.
pub fn select_rru(known: &GainMatrix, user: User) -> usize {
    let mut best = 1;
    for tx in 2..NUM_TX {
        if known.get(tx, user) > known.get(best, user) {
            best = tx;
        }
    }
    best
}

pub(crate) fn check_noise(noise_var: f64) -> Result<()> {
    if noise_var > 0.0 && noise_var.is_finite() {
        Ok(())
    } else {
        domain(format!("noise variance must be positive, got {noise_var}"))
    }
}
