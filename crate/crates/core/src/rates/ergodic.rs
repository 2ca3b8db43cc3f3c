//! Fading-averaged rates when the transmitter only knows the slow fading.
//!
//! Each expectation `E[log2(1 + (sum_i a_i |g_i|^2) / sigma^2)]` over
//! independent Rayleigh links is a hypoexponential capacity mixture (see
//! [`CapacityTermList`]), so
//!
//! ```text
//! E[Z_u] = mixture({L_0u P_cen} + RRU terms {L_qu P_rru}) - C_1(L_0u P_2 / sigma^2)
//! R_2    = C_1(L_0s P_2 / sigma^2)
//! ```
//!
//! with the RRU terms chosen for the weak user (one RRU, or all six). The
//! strong user's SIC expectation uses the same RRU set and its own
//! variances `L_q2`, `L_02`.

use crate::error::Result;
use crate::geometry::{order_by_matrix, GainMatrix, User, UserRoles, CENTER};
use crate::specfun::{capacity1_or_zero, CapacityTermList};

use super::instant::RruAssist;
use super::{check_noise, select_rru, PowerBudget, PowerSplit, RateOutcome, SchemeKind};

/// Closed-form ergodic quantities at one `P_1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErgodicRates {
    pub ez1: f64,
    pub ez2: f64,
    /// `min(E[Z_1], E[Z_2])`, an upper bound on `E[min(Z_1, Z_2)]`.
    pub r1_ub: f64,
    pub r2: f64,
}

impl ErgodicRates {
    pub fn min_rate(&self) -> f64 {
        self.r1_ub.min(self.r2)
    }
}

/// Ergodic counterpart of [`super::NomaLink`]. The mixtures do not depend on
/// `P_1` and are evaluated once.
#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicNomaLink {
    weak_full: f64,
    strong_full: f64,
    weak_center: f64,
    strong_center: f64,
    center_power: f64,
    noise_var: f64,
}

fn products(slow: &GainMatrix, user: User, assist: RruAssist, split: &PowerSplit) -> Vec<f64> {
    let mut out = vec![slow.get(CENTER, user) * split.center];
    match assist {
        RruAssist::None => {}
        RruAssist::Single(q) => out.push(slow.get(q, user) * split.per_rru),
        RruAssist::Blanket => out.extend(slow.rru_column(user).iter().map(|l| l * split.per_rru)),
    }
    out.retain(|&p| p > 0.0);
    out
}

fn mixture(products: &[f64], noise_var: f64) -> Result<f64> {
    if products.is_empty() {
        return Ok(0.0);
    }
    Ok(CapacityTermList::from_products(products, noise_var)?.capacity())
}

impl ErgodicNomaLink {
    pub fn new(
        slow: &GainMatrix,
        roles: UserRoles,
        assist: RruAssist,
        split: PowerSplit,
        noise_var: f64,
    ) -> Result<Self> {
        check_noise(noise_var)?;
        Ok(ErgodicNomaLink {
            weak_full: mixture(&products(slow, roles.weak, assist, &split), noise_var)?,
            strong_full: mixture(&products(slow, roles.strong, assist, &split), noise_var)?,
            weak_center: slow.get(CENTER, roles.weak),
            strong_center: slow.get(CENTER, roles.strong),
            center_power: split.center,
            noise_var,
        })
    }

    /// Link for a center-NOMA scheme with CDI ordering and RRU selection.
    pub fn for_scheme(slow: &GainMatrix, scheme: SchemeKind, split: PowerSplit, noise_var: f64) -> Result<Self> {
        let roles = order_by_matrix(slow);
        let assist = RruAssist::for_scheme(scheme, slow, roles.weak)?;
        Self::new(slow, roles, assist, split, noise_var)
    }

    pub fn center_power(&self) -> f64 {
        self.center_power
    }

    fn c1(&self, gain: f64, p2: f64) -> f64 {
        capacity1_or_zero(gain * p2 / self.noise_var)
    }

    pub fn rates(&self, p1: f64) -> ErgodicRates {
        let p2 = (self.center_power - p1).max(0.0);
        let ez1 = (self.weak_full - self.c1(self.weak_center, p2)).max(0.0);
        let ez2 = (self.strong_full - self.c1(self.strong_center, p2)).max(0.0);
        ErgodicRates {
            ez1,
            ez2,
            r1_ub: ez1.min(ez2),
            r2: self.c1(self.strong_center, p2),
        }
    }
}

/// `(E[Z_1], E[Z_2], R_1^UB, R_2)` for single selection or blanket NOMA
/// (conventional NOMA is accepted too, with no RRU terms).
///
/// Users are ordered by center variance and the RRU chosen by variance.
pub fn ergodic_rates_noma(
    slow: &GainMatrix,
    budget: &PowerBudget,
    scheme: SchemeKind,
    noise_var: f64,
) -> Result<ErgodicRates> {
    Ok(ErgodicNomaLink::for_scheme(slow, scheme, budget.split(), noise_var)?.rates(budget.p1()))
}

/// Exact ergodic rates of the conventional single-selection baseline.
pub fn ergodic_conventional_single_selection(
    slow: &GainMatrix,
    split: &PowerSplit,
    noise_var: f64,
) -> Result<RateOutcome> {
    check_noise(noise_var)?;
    let q = select_rru(slow, User::One);
    let signal_interference = |s: f64, i: f64| -> Result<f64> {
        let mut terms = vec![s, i];
        terms.retain(|&p| p > 0.0);
        Ok((mixture(&terms, noise_var)? - capacity1_or_zero(i / noise_var)).max(0.0))
    };
    let r1 = signal_interference(
        slow.get(q, User::One) * split.per_rru,
        slow.get(CENTER, User::One) * split.center,
    )?;
    let r2 = signal_interference(
        slow.get(CENTER, User::Two) * split.center,
        slow.get(q, User::Two) * split.per_rru,
    )?;
    Ok(RateOutcome { z1: r1, z2: r1, r1, r2, outage: false })
}
