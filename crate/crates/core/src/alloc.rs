//! Power allocation solvers.
//!
//! All solvers choose the weak user's center-BS power `P_1 in [0, P_cen]`
//! (or the JT-NOMA ratio `beta in [0, 1]`). They rely on two monotonicity
//! facts: `Z_1`, `Z_2` increase and `R_2` decreases in `P_1`, and with the
//! users ordered by center gain `R_1 + R_2` is non-increasing in `P_1`.

use crate::error::{domain, Error, Result};
use crate::rates::{ErgodicNomaLink, JtLink, NomaLink};

/// Bisection stopping width, as a fraction of `P_cen`.
pub const DEFAULT_BISECTION_EPSILON: f64 = 1e-6;
pub const DEFAULT_BETA_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_GRID_POINTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct SolverMeta {
    pub iterations: usize,
    /// `|R_1 - R_2|` (max-min) or `|min(R_1, R_2) - R_t|` (sum-rate) at the
    /// returned point.
    pub residual: f64,
    /// Optimal JT-NOMA power ratio.
    pub beta: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AllocationResult {
    /// `None` exactly when `outage` is set.
    pub p1: Option<f64>,
    /// Power left for the strong user (`P_cen - P_1`, or `(1 - beta) P`),
    /// computed without cancellation.
    pub p2: Option<f64>,
    pub objective: f64,
    pub outage: bool,
    pub meta: SolverMeta,
}

impl AllocationResult {
    fn feasible(p1: f64, p2: f64, objective: f64, meta: SolverMeta) -> Self {
        AllocationResult { p1: Some(p1), p2: Some(p2), objective, outage: false, meta }
    }

    fn outage(meta: SolverMeta) -> Self {
        AllocationResult { p1: None, p2: None, objective: 0.0, outage: true, meta }
    }
}

/// Minimum rate `R_t` both users must reach.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QosConstraint {
    rt: f64,
}

impl QosConstraint {
    pub fn new(rt: f64) -> Result<Self> {
        if !(rt >= 0.0 && rt.is_finite()) {
            return domain(format!("minimum rate must be non-negative, got {rt}"));
        }
        Ok(QosConstraint { rt })
    }

    pub fn rate(&self) -> f64 {
        self.rt
    }
}

/// Non-negative root of `a x^2 + b x - c = 0` for `a, b, c >= 0`, in the
/// cancellation-free form `2c / (b + sqrt(b^2 + 4ac))`.
fn positive_root(a: f64, b: f64, c: f64) -> f64 {
    2.0 * c / (b + (b * b + 4.0 * a * c).sqrt())
}

/// Closed-form max-min allocation with instantaneous CGI.
///
/// `Z_1 = R_2` and `Z_2 = R_2` are quadratics in `P_2 = P_cen - P_1`:
///
/// ```text
/// a_w a_s P_2^2 + s^2 (a_w + a_s) P_2 - s^2 (a_w P_cen + b_w) = 0
/// a_s^2   P_2^2 + 2 s^2 a_s       P_2 - s^2 (a_s P_cen + b_s) = 0
/// ```
///
/// Each has exactly one non-negative root. `min(Z_1, Z_2)` meets `R_2` at
/// the larger of the two `P_1` crossings; a negative crossing means the
/// weak user is ahead even at `P_1 = 0`.
pub fn maxmin_cgi(link: &NomaLink) -> Result<AllocationResult> {
    let s2 = link.noise_var();
    let (aw, bw) = (link.weak_center(), link.weak_assist());
    let (as_, bs) = (link.strong_center(), link.strong_assist());
    let pc = link.center_power();

    // crossings as P_2; +inf when both sides are constant in P_1
    let crossing = |a: f64, b: f64, c: f64| -> Result<f64> {
        if b == 0.0 {
            return Ok(f64::INFINITY);
        }
        let p2 = positive_root(a, b, c);
        if !p2.is_finite() || p2 < 0.0 {
            return Err(Error::Internal(format!(
                "no admissible root for {a} x^2 + {b} x - {c} = 0"
            )));
        }
        Ok(p2)
    };
    let pz1 = crossing(aw * as_, s2 * (aw + as_), s2 * (aw * pc + bw))?;
    let pz2 = crossing(as_ * as_, 2.0 * s2 * as_, s2 * (as_ * pc + bs))?;
    // the larger P_1 crossing; past P_cen the weak user is ahead at P_1 = 0
    let p2 = pz1.min(pz2).min(pc);
    let p1 = (pc - p2).max(0.0);

    let out = link.outcome_split(p1, p2);
    Ok(AllocationResult::feasible(
        p1,
        p2,
        out.min_rate(),
        SolverMeta { iterations: 0, residual: (out.r1 - out.r2).abs(), beta: None },
    ))
}

/// Bisection on `P_1` for the max-min of `(R_1^UB, R_2)` with CDI.
///
/// Both endpoints are checked first: if `R_1^UB >= R_2` already at
/// `P_1 = 0` the strong user can never catch up and 0 is returned. The
/// loop runs while the bracket is wider than `epsilon` and returns the last
/// midpoint.
pub fn maxmin_cdi_bisection(link: &ErgodicNomaLink, epsilon: f64) -> Result<AllocationResult> {
    if !(epsilon > 0.0) {
        return domain(format!("bisection tolerance must be positive, got {epsilon}"));
    }
    let gap = |p: f64| {
        let r = link.rates(p);
        r.r1_ub - r.r2
    };
    let pc = link.center_power();
    let mut iterations = 0;
    let p1 = if gap(0.0) >= 0.0 {
        0.0
    } else if gap(pc) < 0.0 {
        pc
    } else {
        let (mut u, mut v) = (0.0, pc);
        let mut mid = 0.5 * (u + v);
        while v - u > epsilon {
            mid = 0.5 * (u + v);
            if gap(mid) < 0.0 {
                u = mid;
            } else {
                v = mid;
            }
            iterations += 1;
        }
        mid
    };
    let r = link.rates(p1);
    Ok(AllocationResult::feasible(
        p1,
        pc - p1,
        r.min_rate(),
        SolverMeta { iterations, residual: (r.r1_ub - r.r2).abs(), beta: None },
    ))
}

/// Closed-form max-sum-rate allocation under `min(R_1, R_2) >= R_t`.
///
/// `Z_u = R_t` is linear in `P_2`. The smallest `P_1` meeting the weak
/// user's target is optimal, provided the strong user still reaches `R_t`
/// there; otherwise the instance is in outage and contributes zero.
pub fn maxsum_cgi(link: &NomaLink, qos: QosConstraint) -> AllocationResult {
    let s2 = link.noise_var();
    let pc = link.center_power();
    let rt = qos.rate();
    let target = rt.exp2();

    // P_2 at which Z = R_t; Z decreases in P_2
    let crossing = |a: f64, b: f64| -> f64 {
        if a == 0.0 {
            // Z is flat at log2(1 + b / s2)
            return if crate::log2_1p(b / s2) >= rt { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        ((a * pc + b + s2) / target - s2) / a
    };
    let pz = crossing(link.weak_center(), link.weak_assist())
        .min(crossing(link.strong_center(), link.strong_assist()));
    if pz < 0.0 {
        return AllocationResult::outage(SolverMeta::default());
    }
    let p2 = pz.min(pc);
    let p1 = (pc - p2).max(0.0);
    let out = link.outcome_split(p1, p2);
    if out.r2 < rt {
        return AllocationResult::outage(SolverMeta::default());
    }
    AllocationResult::feasible(
        p1,
        p2,
        out.sum_rate(),
        SolverMeta { iterations: 0, residual: (out.min_rate() - rt).abs(), beta: None },
    )
}

/// Objective for the JT-NOMA ratio search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum JtObjective {
    MaxMin,
    MaxSum(QosConstraint),
}

/// Result of a golden-section maximization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoldenSection {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    /// Final bracket.
    pub bracket: (f64, f64),
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `tol`. The endpoints are
/// compared against the interior optimum so monotone objectives return
/// the right boundary.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> GoldenSection {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
        iterations += 1;
    }
    let (mut x, mut value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for end in [lo, hi] {
        let fe = f(end);
        if fe > value {
            x = end;
            value = fe;
        }
    }
    GoldenSection { x, value, iterations, bracket: (a, b) }
}

/// Bisects an increasing `g` for its zero on `[lo, hi]` (requires
/// `g(lo) < 0 <= g(hi)`), to within a few ulps.
fn bisect_increasing<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Numerical search for the JT-NOMA power ratio.
///
/// Max-min: golden-section search on `min(R_1, R_2)`, then the crossing
/// `R_1 = R_2` is polished by bisection when the final bracket contains it.
/// Max-sum: the feasible set `{min(R_1, R_2) >= R_t}` is an interval whose
/// ends are found by bisection; the sum rate is then maximized over it.
/// `p1` reports `beta * total_power`.
pub fn jt_beta_search(link: &JtLink, total_power: f64, objective: JtObjective, tol: f64) -> Result<AllocationResult> {
    if !(tol > 0.0) {
        return domain(format!("beta tolerance must be positive, got {tol}"));
    }
    let meta = |iterations, residual, beta| SolverMeta { iterations, residual, beta: Some(beta) };
    match objective {
        JtObjective::MaxMin => {
            let gs = golden_section_max(|b| link.outcome(b).min_rate(), 0.0, 1.0, tol);
            let mut beta = gs.x;
            let mut value = gs.value;
            let gap = |b: f64| {
                let o = link.outcome(b);
                o.r1 - o.r2
            };
            let (a, b) = gs.bracket;
            let lo = (a - tol).max(0.0);
            let hi = (b + tol).min(1.0);
            if gap(lo) < 0.0 && gap(hi) >= 0.0 {
                let polished = bisect_increasing(gap, lo, hi);
                let v = link.outcome(polished).min_rate();
                if v >= value {
                    beta = polished;
                    value = v;
                }
            }
            let o = link.outcome(beta);
            Ok(AllocationResult::feasible(
                beta * total_power,
                (1.0 - beta) * total_power,
                value,
                meta(gs.iterations, (o.r1 - o.r2).abs(), beta),
            ))
        }
        JtObjective::MaxSum(qos) => {
            let rt = qos.rate();
            let weak_gap = |b: f64| link.outcome(b).r1 - rt;
            let strong_gap = |b: f64| rt - link.outcome(b).r2;
            if weak_gap(1.0) < 0.0 || strong_gap(0.0) > 0.0 {
                return Ok(AllocationResult::outage(SolverMeta::default()));
            }
            let lo = if weak_gap(0.0) >= 0.0 { 0.0 } else { bisect_increasing(weak_gap, 0.0, 1.0) };
            let hi = if strong_gap(1.0) <= 0.0 {
                1.0
            } else {
                // last beta with R_2 >= R_t
                let first_bad = bisect_increasing(|b| strong_gap(b) - f64::MIN_POSITIVE, 0.0, 1.0);
                let mut h = first_bad;
                while h > 0.0 && strong_gap(h) > 0.0 {
                    h = f64::from_bits(h.to_bits() - 1);
                }
                h
            };
            if lo > hi || link.outcome(lo).min_rate() < rt {
                return Ok(AllocationResult::outage(SolverMeta::default()));
            }
            let gs = golden_section_max(|b| link.outcome(b).sum_rate(), lo, hi, tol);
            let o = link.outcome(gs.x);
            Ok(AllocationResult::feasible(
                gs.x * total_power,
                (1.0 - gs.x) * total_power,
                gs.value,
                meta(gs.iterations, (o.min_rate() - rt).abs(), gs.x),
            ))
        }
    }
}

/// Exhaustive search over `grid_points` equally spaced values of `[0, upper]`.
///
/// `curve` returns the objective, or `None` where the point is infeasible.
/// Ties keep the first (smallest) maximizer. With `refine`, a second grid
/// of the same size is laid over the two cells around the coarse optimum.
pub fn brute_force_allocate<F: Fn(f64) -> Option<f64>>(
    curve: F,
    upper: f64,
    grid_points: usize,
    refine: bool,
) -> Result<AllocationResult> {
    if grid_points < 2 {
        return domain(format!("grid needs at least 2 points, got {grid_points}"));
    }
    if !(upper >= 0.0 && upper.is_finite()) {
        return domain(format!("grid upper end must be non-negative, got {upper}"));
    }
    let scan = |lo: f64, hi: f64, best: Option<(f64, f64)>| {
        let step = (hi - lo) / (grid_points - 1) as f64;
        let mut best = best;
        for k in 0..grid_points {
            let x = if k + 1 == grid_points { hi } else { lo + step * k as f64 };
            if let Some(v) = curve(x) {
                if best.map_or(true, |(_, bv)| v > bv) {
                    best = Some((x, v));
                }
            }
        }
        best
    };
    let coarse = scan(0.0, upper, None);
    let mut evaluations = grid_points;
    let Some((mut x, mut v)) = coarse else {
        return Ok(AllocationResult::outage(SolverMeta { iterations: evaluations, ..Default::default() }));
    };
    if refine && upper > 0.0 {
        let spacing = upper / (grid_points - 1) as f64;
        let lo = (x - spacing).max(0.0);
        let hi = (x + spacing).min(upper);
        // keep the coarse point unless strictly improved
        if let Some((fx, fv)) = scan(lo, hi, Some((x, v))) {
            x = fx;
            v = fv;
        }
        evaluations += grid_points;
    }
    Ok(AllocationResult::feasible(x, upper - x, v, SolverMeta { iterations: evaluations, residual: 0.0, beta: None }))
}
