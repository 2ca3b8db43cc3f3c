//! Rates for a single channel realization.

use crate::error::{domain, Result};
use crate::geometry::{ChannelRealization, CsiMode, GainMatrix, User, UserRoles, CENTER, NUM_TX};
use crate::log2_1p;
use crate::specfun::CapacityTermList;

use super::{check_noise, select_rru, PowerBudget, PowerSplit, RateOutcome, SchemeKind};

/// Which RRUs carry the weak user's data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RruAssist {
    None,
    /// Only this RRU (1..=6).
    Single(usize),
    Blanket,
}

impl RruAssist {
    /// The assist pattern of a center-NOMA scheme, with the RRU chosen from
    /// `known` gains.
    pub fn for_scheme(scheme: SchemeKind, known: &GainMatrix, weak: User) -> Result<Self> {
        match scheme {
            SchemeKind::NomaSingleSelection => Ok(RruAssist::Single(select_rru(known, weak))),
            SchemeKind::NomaBlanket => Ok(RruAssist::Blanket),
            SchemeKind::ConventionalNoma => Ok(RruAssist::None),
            other => domain(format!("{other} does not split center power by NOMA")),
        }
    }

    fn received(self, gains: &GainMatrix, user: User, per_rru: f64) -> f64 {
        match self {
            RruAssist::None => 0.0,
            RruAssist::Single(q) => gains.get(q, user) * per_rru,
            RruAssist::Blanket => gains.rru_column(user).iter().sum::<f64>() * per_rru,
        }
    }
}

/// Two-user NOMA at the center BS with RRU help for the weak user, reduced
/// to the six numbers the rates depend on.
///
/// With `a` the center gain and `b` the RRU power received by a user,
/// `Z = log2(1 + (a P_1 + b) / (a P_2 + sigma^2))` and
/// `R_2 = log2(1 + a_s P_2 / sigma^2)` where `P_2 = P_cen - P_1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NomaLink {
    weak_center: f64,
    weak_assist: f64,
    strong_center: f64,
    strong_assist: f64,
    center_power: f64,
    noise_var: f64,
}

impl NomaLink {
    pub fn from_parts(
        weak_center: f64,
        weak_assist: f64,
        strong_center: f64,
        strong_assist: f64,
        center_power: f64,
        noise_var: f64,
    ) -> Result<Self> {
        check_noise(noise_var)?;
        for v in [weak_center, weak_assist, strong_center, strong_assist, center_power] {
            if !(v >= 0.0 && v.is_finite()) {
                return domain(format!("gains and powers must be non-negative and finite, got {v}"));
            }
        }
        Ok(NomaLink {
            weak_center,
            weak_assist,
            strong_center,
            strong_assist,
            center_power,
            noise_var,
        })
    }

    pub fn new(
        gains: &GainMatrix,
        roles: UserRoles,
        assist: RruAssist,
        split: PowerSplit,
        noise_var: f64,
    ) -> Result<Self> {
        Self::from_parts(
            gains.get(CENTER, roles.weak),
            assist.received(gains, roles.weak, split.per_rru),
            gains.get(CENTER, roles.strong),
            assist.received(gains, roles.strong, split.per_rru),
            split.center,
            noise_var,
        )
    }

    /// Link for a center-NOMA `scheme`, selecting the RRU from `known`.
    pub fn for_scheme(
        gains: &GainMatrix,
        known: &GainMatrix,
        scheme: SchemeKind,
        split: PowerSplit,
        roles: UserRoles,
        noise_var: f64,
    ) -> Result<Self> {
        let assist = RruAssist::for_scheme(scheme, known, roles.weak)?;
        Self::new(gains, roles, assist, split, noise_var)
    }

    pub fn weak_center(&self) -> f64 {
        self.weak_center
    }
    pub fn weak_assist(&self) -> f64 {
        self.weak_assist
    }
    pub fn strong_center(&self) -> f64 {
        self.strong_center
    }
    pub fn strong_assist(&self) -> f64 {
        self.strong_assist
    }
    pub fn center_power(&self) -> f64 {
        self.center_power
    }
    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    fn p2(&self, p1: f64) -> f64 {
        (self.center_power - p1).max(0.0)
    }

    fn decode_rate(&self, center: f64, assist: f64, p1: f64, p2: f64) -> f64 {
        log2_1p((center * p1 + assist) / (center * p2 + self.noise_var))
    }

    /// Weak user's message decoded at the weak user.
    pub fn z1(&self, p1: f64) -> f64 {
        self.decode_rate(self.weak_center, self.weak_assist, p1, self.p2(p1))
    }

    /// Weak user's message decoded at the strong user (the SIC step).
    pub fn z2(&self, p1: f64) -> f64 {
        self.decode_rate(self.strong_center, self.strong_assist, p1, self.p2(p1))
    }

    /// Strong user's rate after SIC.
    pub fn r2(&self, p1: f64) -> f64 {
        self.r2_at(self.p2(p1))
    }

    fn r2_at(&self, p2: f64) -> f64 {
        log2_1p(self.strong_center * p2 / self.noise_var)
    }

    pub fn outcome(&self, p1: f64) -> RateOutcome {
        self.outcome_split(p1, self.p2(p1))
    }

    /// Rates with both center powers given. When `P_2` is tiny next to
    /// `P_cen`, `P_cen - P_1` loses its relative precision; solvers that
    /// know `P_2` directly evaluate here instead.
    pub fn outcome_split(&self, p1: f64, p2: f64) -> RateOutcome {
        let z1 = self.decode_rate(self.weak_center, self.weak_assist, p1, p2);
        let z2 = self.decode_rate(self.strong_center, self.strong_assist, p1, p2);
        RateOutcome {
            z1,
            z2,
            r1: z1.min(z2),
            r2: self.r2_at(p2),
            outage: false,
        }
    }

    /// `Z_2 + R_2`, which does not depend on `P_1`.
    pub fn strong_sum_rate(&self) -> f64 {
        log2_1p((self.strong_center * self.center_power + self.strong_assist) / self.noise_var)
    }
}

/// NOMA with single selection: RRU `q` serves the weak user.
pub fn rates_noma_single(
    ch: &ChannelRealization,
    budget: &PowerBudget,
    roles: UserRoles,
    q: usize,
    noise_var: f64,
) -> Result<RateOutcome> {
    if !(1..NUM_TX).contains(&q) {
        return domain(format!("RRU index must lie in 1..=6, got {q}"));
    }
    let link = NomaLink::new(ch.gain(), roles, RruAssist::Single(q), budget.split(), noise_var)?;
    Ok(link.outcome(budget.p1()))
}

/// NOMA with blanket transmission: every RRU serves the weak user.
pub fn rates_noma_blanket(
    ch: &ChannelRealization,
    budget: &PowerBudget,
    roles: UserRoles,
    noise_var: f64,
) -> Result<RateOutcome> {
    let link = NomaLink::new(ch.gain(), roles, RruAssist::Blanket, budget.split(), noise_var)?;
    Ok(link.outcome(budget.p1()))
}

/// Two-user NOMA from the center BS alone with powers `(P_1, P_2)`.
///
/// The weak user's rate is its own decode rate `Z_1`; with users ordered by
/// center gain the strong user's SIC rate `Z_2` is never smaller.
pub fn rates_conventional_noma(
    ch: &ChannelRealization,
    p1: f64,
    p2: f64,
    roles: UserRoles,
    noise_var: f64,
) -> Result<RateOutcome> {
    if !(p1 >= 0.0 && p2 >= 0.0) {
        return domain(format!("NOMA powers must be non-negative, got ({p1}, {p2})"));
    }
    let split = PowerSplit::conventional(p1 + p2)?;
    let link = NomaLink::new(ch.gain(), roles, RruAssist::None, split, noise_var)?;
    let mut out = link.outcome(p1);
    out.r1 = out.z1;
    Ok(out)
}

/// Orthogonal-free DAS baseline: user 2 is served by the center BS and user 1
/// by its best RRU, each treating the other transmission as interference.
pub fn rates_conventional_single_selection(
    ch: &ChannelRealization,
    split: &PowerSplit,
    mode: CsiMode,
    noise_var: f64,
) -> Result<RateOutcome> {
    check_noise(noise_var)?;
    let q = select_rru(ch.known_gains(mode), User::One);
    let g = ch.gain();
    let r1 = log2_1p(
        g.get(q, User::One) * split.per_rru / (g.get(CENTER, User::One) * split.center + noise_var),
    );
    let r2 = log2_1p(
        g.get(CENTER, User::Two) * split.center / (g.get(q, User::Two) * split.per_rru + noise_var),
    );
    Ok(RateOutcome { z1: r1, z2: r1, r1, r2, outage: false })
}

/// Joint-transmission NOMA: every antenna puts a fraction `beta` of its
/// power on the weak user.
#[derive(Clone, Debug, PartialEq)]
pub enum JtLink {
    /// Composite received powers `|h_j|^2 = P_cen |h_0j|^2 + P_rru sum_q |h_qj|^2`.
    Instant { weak: f64, strong: f64, noise_var: f64 },
    /// Hypoexponential terms `L_ij Q_i` per user.
    Ergodic {
        weak: CapacityTermList,
        strong: CapacityTermList,
    },
}

fn composite(gains: &GainMatrix, split: &PowerSplit, user: User) -> f64 {
    split.center * gains.get(CENTER, user) + split.per_rru * gains.rru_column(user).iter().sum::<f64>()
}

fn jt_products(slow: &GainMatrix, split: &PowerSplit, user: User) -> Vec<f64> {
    (0..NUM_TX)
        .map(|tx| {
            let q = if tx == CENTER { split.center } else { split.per_rru };
            slow.get(tx, user) * q
        })
        .filter(|&p| p > 0.0)
        .collect()
}

impl JtLink {
    /// Users ordered by composite instantaneous gain.
    pub fn instantaneous(gains: &GainMatrix, split: &PowerSplit, noise_var: f64) -> Result<(Self, UserRoles)> {
        let roles = UserRoles::from_center_gains(
            composite(gains, split, User::One),
            composite(gains, split, User::Two),
        );
        Ok((Self::with_roles(gains, split, roles, noise_var)?, roles))
    }

    /// Instantaneous link with roles fixed elsewhere (e.g. from statistics).
    pub fn with_roles(gains: &GainMatrix, split: &PowerSplit, roles: UserRoles, noise_var: f64) -> Result<Self> {
        check_noise(noise_var)?;
        Ok(JtLink::Instant {
            weak: composite(gains, split, roles.weak),
            strong: composite(gains, split, roles.strong),
            noise_var,
        })
    }

    /// Users ordered by composite statistical gain `sum_i L_ij Q_i`.
    pub fn ergodic(slow: &GainMatrix, split: &PowerSplit, noise_var: f64) -> Result<(Self, UserRoles)> {
        let roles = UserRoles::from_center_gains(
            composite(slow, split, User::One),
            composite(slow, split, User::Two),
        );
        let weak = CapacityTermList::from_products(&jt_products(slow, split, roles.weak), noise_var)?;
        let strong = CapacityTermList::from_products(&jt_products(slow, split, roles.strong), noise_var)?;
        Ok((JtLink::Ergodic { weak, strong }, roles))
    }

    /// Rates at power ratio `beta`; the ergodic variant returns
    /// `(E[Z_1], E[Z_2], min, R_2)`.
    pub fn outcome(&self, beta: f64) -> RateOutcome {
        let beta = beta.clamp(0.0, 1.0);
        let keep = 1.0 - beta;
        let (z1, z2, r2) = match self {
            JtLink::Instant { weak, strong, noise_var } => {
                let z = |h: f64| log2_1p(beta * h / (keep * h + noise_var));
                (z(*weak), z(*strong), log2_1p(keep * strong / noise_var))
            }
            JtLink::Ergodic { weak, strong } => {
                let ez = |t: &CapacityTermList| (t.capacity() - t.scaled_capacity(keep)).max(0.0);
                (ez(weak), ez(strong), strong.scaled_capacity(keep))
            }
        };
        RateOutcome { z1, z2, r1: z1.min(z2), r2, outage: false }
    }
}

/// JT-NOMA rates at a given `beta`.
pub fn rates_jt_noma(
    ch: &ChannelRealization,
    split: &PowerSplit,
    beta: f64,
    mode: CsiMode,
    noise_var: f64,
) -> Result<RateOutcome> {
    if !(0.0..=1.0).contains(&beta) {
        return domain(format!("beta must lie in [0, 1], got {beta}"));
    }
    let link = match mode {
        CsiMode::InstantaneousCgi => JtLink::instantaneous(ch.gain(), split, noise_var)?.0,
        CsiMode::CdiOnly => JtLink::ergodic(ch.slow(), split, noise_var)?.0,
    };
    Ok(link.outcome(beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{order_users, NUM_TX};

    fn channel(center: [f64; 2], rru: [[f64; 2]; 6]) -> ChannelRealization {
        let mut rows = [[0.0; 2]; NUM_TX];
        rows[0] = center;
        rows[1..].copy_from_slice(&rru);
        ChannelRealization::from_gains(
            GainMatrix::from_rows([[1.0; 2]; NUM_TX]),
            GainMatrix::from_rows(rows),
        )
        .unwrap()
    }

    const ROLES: UserRoles = UserRoles { weak: User::One, strong: User::Two };

    #[test]
    fn single_selection_arithmetic() {
        let mut rru = [[0.0; 2]; 6];
        rru[0] = [2.0, 0.1];
        let ch = channel([1.0, 4.0], rru);
        let split = PowerSplit::new(1.0, 0.5, 1.0 / 12.0).unwrap();
        let budget = PowerBudget::new(split, 0.3).unwrap();
        let out = rates_noma_single(&ch, &budget, ROLES, 1, 1.0).unwrap();
        // log2(1 + (0.3 + 2/12) / (0.2 + 1)) and log2(1.8)
        assert!((out.z1 - 0.473_931_188_332_412_3).abs() < 1e-12);
        assert!((out.r2 - 0.847_996_906_554_950_1).abs() < 1e-12);
        assert_eq!(out.r1, out.z1.min(out.z2));
    }

    #[test]
    fn single_selection_corners() {
        let ch = channel([1.0, 4.0], [[0.0, 0.3]; 6]);
        let split = PowerSplit::new(1.0, 0.5, 1.0 / 12.0).unwrap();
        let out = rates_noma_single(&ch, &PowerBudget::new(split, 0.0).unwrap(), ROLES, 2, 1.0).unwrap();
        assert_eq!(out.z1, 0.0);
        let out = rates_noma_single(&ch, &PowerBudget::new(split, 0.5).unwrap(), ROLES, 2, 1.0).unwrap();
        assert_eq!(out.r2, 0.0);
        assert!(rates_noma_single(&ch, &PowerBudget::new(split, 0.5).unwrap(), ROLES, 0, 1.0).is_err());
    }

    #[test]
    fn blanket_reductions() {
        let split = PowerSplit::das(2.0, 0.5).unwrap();
        let budget = PowerBudget::new(split, 0.4).unwrap();

        let ch = channel([0.7, 3.0], [[0.0; 2]; 6]);
        let blanket = rates_noma_blanket(&ch, &budget, ROLES, 1.0).unwrap();
        let conv = rates_conventional_noma(&ch, 0.4, split.center - 0.4, ROLES, 1.0).unwrap();
        assert!((blanket.z1 - conv.z1).abs() < 1e-15);
        assert!((blanket.r2 - conv.r2).abs() < 1e-15);

        let mut rru = [[0.0; 2]; 6];
        rru[3] = [1.3, 0.2];
        let ch = channel([0.7, 3.0], rru);
        let blanket = rates_noma_blanket(&ch, &budget, ROLES, 1.0).unwrap();
        let single = rates_noma_single(&ch, &budget, ROLES, 4, 1.0).unwrap();
        assert_eq!(blanket, single);
    }

    #[test]
    fn conventional_noma_corners() {
        let ch = channel([0.5, 2.0], [[0.0; 2]; 6]);
        let out = rates_conventional_noma(&ch, 3.0, 0.0, ROLES, 1.0).unwrap();
        assert_eq!(out.r2, 0.0);
        assert!((out.r1 - (1.0f64 + 1.5).log2()).abs() < 1e-14);

        // equal gains: rate splitting adds up to the single-user capacity
        let ch = channel([2.0, 2.0], [[0.0; 2]; 6]);
        let out = rates_conventional_noma(&ch, 1.5, 1.5, ROLES, 1.0).unwrap();
        assert!((out.r1 + out.r2 - (1.0f64 + 6.0).log2()).abs() < 1e-14);
    }

    #[test]
    fn conventional_single_selection_arithmetic() {
        let mut rru = [[0.0; 2]; 6];
        rru[2] = [3.0, 0.5];
        rru[0] = [1.0, 9.0];
        let ch = channel([0.2, 5.0], rru);
        let split = PowerSplit::das(12.0, 0.5).unwrap();
        let out = rates_conventional_single_selection(&ch, &split, CsiMode::InstantaneousCgi, 1.0).unwrap();
        // q = 3: R1 = log2(1 + 3*1 / (0.2*6 + 1)), R2 = log2(1 + 5*6 / (0.5*1 + 1))
        assert!((out.r1 - (1.0f64 + 3.0 / 2.2).log2()).abs() < 1e-14);
        assert!((out.r2 - (1.0f64 + 30.0 / 1.5).log2()).abs() < 1e-14);

        let split0 = PowerSplit::conventional(12.0).unwrap();
        let out = rates_conventional_single_selection(&ch, &split0, CsiMode::InstantaneousCgi, 1.0).unwrap();
        assert_eq!(out.r1, 0.0);

        let loud = channel([1e12, 5.0], rru);
        let out = rates_conventional_single_selection(&loud, &split, CsiMode::InstantaneousCgi, 1.0).unwrap();
        assert!(out.r1 < 1e-9);
    }

    #[test]
    fn jt_endpoints() {
        let ch = channel([0.4, 2.0], [[0.3, 0.1]; 6]);
        let split = PowerSplit::das(10.0, 0.5).unwrap();
        for mode in [CsiMode::InstantaneousCgi, CsiMode::CdiOnly] {
            let zero = rates_jt_noma(&ch, &split, 0.0, mode, 1.0).unwrap();
            assert_eq!((zero.z1, zero.z2), (0.0, 0.0));
            let one = rates_jt_noma(&ch, &split, 1.0, mode, 1.0).unwrap();
            assert_eq!(one.r2, 0.0);
        }
        assert!(rates_jt_noma(&ch, &split, 1.5, CsiMode::InstantaneousCgi, 1.0).is_err());
    }

    #[test]
    fn jt_instant_formula() {
        let ch = channel([0.4, 2.0], [[0.3, 0.1]; 6]);
        let split = PowerSplit::das(10.0, 0.5).unwrap();
        let out = rates_jt_noma(&ch, &split, 0.7, CsiMode::InstantaneousCgi, 1.0).unwrap();
        let h1 = 5.0 * 0.4 + (5.0 / 6.0) * 1.8;
        let h2 = 5.0 * 2.0 + (5.0 / 6.0) * 0.6;
        let z1 = (1.0f64 + 0.7 * h1 / (0.3 * h1 + 1.0)).log2();
        assert!((out.z1 - z1).abs() < 1e-13);
        assert!((out.r2 - (1.0f64 + 0.3 * h2).log2()).abs() < 1e-13);
        assert_eq!(order_users(&ch, CsiMode::InstantaneousCgi).weak, User::One);
    }

    #[test]
    fn strong_sum_is_constant() {
        let link = NomaLink::from_parts(0.3, 0.8, 7.0, 0.05, 5.0, 1.0).unwrap();
        for p1 in [0.0, 0.7, 2.5, 4.9, 5.0] {
            let s = link.z2(p1) + link.r2(p1);
            assert!(((s - link.strong_sum_rate()) / s).abs() < 1e-12);
        }
    }
}
