//! Generalized exponential integrals and ergodic Rayleigh capacities.
//!
//! `C_t(x) = e^{1/x} / ln 2 * sum_{k<t} E_{k+1}(1/x)` is the ergodic capacity
//! (bits/s/Hz) of an i.i.d. Rayleigh MISO link with `t` antennas at average
//! SNR `x`. `e^{1/x}` overflows long before the product does, so everything
//! here works with the scaled function `e^y E_n(y)`.

use std::f64::consts::LN_2;

use crate::error::{domain, Error, Result};
use crate::quadrature;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;
const TINY: f64 = 1e-300;

/// Relative distance under which two mixture products count as equal.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;
/// Multiplicative spread applied to equal products.
pub const DEGENERACY_PERTURBATION: f64 = 1e-7;
/// Above this `sum |pi_i|` the partial-fraction sum loses too many digits
/// and the mixture is integrated directly instead.
pub const MAX_WEIGHT_MAGNITUDE: f64 = 1e8;

/// `E_n(x) = int_1^inf e^{-xt} / t^n dt`.
pub fn exp_integral_e(n: u32, x: f64) -> Result<f64> {
    check_args(n, x)?;
    if x == 0.0 {
        return Ok(1.0 / (n - 1) as f64);
    }
    if x > 1.0 {
        Ok(continued_fraction(n, x) * (-x).exp())
    } else {
        Ok(series(n, x))
    }
}

/// `e^x E_n(x)`, finite for every `x >= 0` (except `n = 1, x = 0`).
pub fn scaled_exp_integral_e(n: u32, x: f64) -> Result<f64> {
    check_args(n, x)?;
    if x == 0.0 {
        return Ok(1.0 / (n - 1) as f64);
    }
    if x > 1.0 {
        Ok(continued_fraction(n, x))
    } else {
        Ok(series(n, x) * x.exp())
    }
}

fn check_args(n: u32, x: f64) -> Result<()> {
    if n == 0 {
        return domain("exponential integral order must be at least 1");
    }
    if x.is_nan() || x < 0.0 {
        return domain(format!("exponential integral argument must be non-negative, got {x}"));
    }
    if x.is_infinite() {
        return domain("exponential integral argument must be finite");
    }
    if n == 1 && x == 0.0 {
        return Err(Error::Divergence("E_1(0) is infinite".into()));
    }
    Ok(())
}

/// Power series around 0, used for `x <= 1`.
fn series(n: u32, x: f64) -> f64 {
    let nm1 = (n - 1) as f64;
    let mut sum = if n > 1 { 1.0 / nm1 } else { -x.ln() - EULER_GAMMA };
    let mut fact = 1.0;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        fact *= -x / fi;
        let term = if i as u32 != n - 1 {
            -fact / (fi - nm1)
        } else {
            let psi = -EULER_GAMMA + (1..n).map(|k| 1.0 / k as f64).sum::<f64>();
            fact * (psi - x.ln())
        };
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum
}

/// Modified Lentz evaluation of the continued fraction for `e^x E_n(x)`,
/// used for `x > 1`.
fn continued_fraction(n: u32, x: f64) -> f64 {
    let nm1 = (n - 1) as f64;
    let mut b = x + n as f64;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        let a = -fi * (nm1 + fi);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `C_t(x)` in bits/s/Hz.
pub fn ergodic_capacity(t: u32, x: f64) -> Result<f64> {
    if t == 0 {
        return domain("antenna count must be at least 1");
    }
    if !(x > 0.0 && x.is_finite()) {
        return domain(format!("average SNR must be positive and finite, got {x}"));
    }
    let y = 1.0 / x;
    let mut total = 0.0;
    for k in 1..=t {
        total += scaled_exp_integral_e(k, y)?;
    }
    Ok(total / LN_2)
}

/// `C_1(x)` extended by its limit `C_1(0) = 0`.
pub(crate) fn capacity1_or_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        ergodic_capacity(1, x).expect("non-negative finite SNR")
    }
}

/// Partial-fraction weights `pi_i = prod_{k != i} a_i / (a_i - a_k)`.
///
/// Products that coincide within [`DEGENERACY_TOLERANCE`] are first spread
/// apart multiplicatively by `+-1e-7, +-2e-7, ...`.
pub fn mixture_weights(products: &[f64]) -> Result<Vec<f64>> {
    let resolved = resolve_degeneracy(products)?;
    Ok(weights_of(&resolved))
}

fn weights_of(a: &[f64]) -> Vec<f64> {
    (0..a.len())
        .map(|i| {
            a.iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, &ak)| a[i] / (a[i] - ak))
                .product()
        })
        .collect()
}

fn resolve_degeneracy(products: &[f64]) -> Result<Vec<f64>> {
    if products.is_empty() {
        return domain("mixture needs at least one term");
    }
    if let Some(bad) = products.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return domain(format!("mixture products must be positive and finite, got {bad}"));
    }
    let mut order: Vec<usize> = (0..products.len()).collect();
    order.sort_by(|&i, &j| products[i].total_cmp(&products[j]));

    let mut out = products.to_vec();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() {
            let lo = products[order[end - 1]];
            let hi = products[order[end]];
            if (hi - lo) > DEGENERACY_TOLERANCE * hi {
                break;
            }
            end += 1;
        }
        if end - start > 1 {
            for (rank, &idx) in order[start..end].iter().enumerate() {
                // 0 -> +1, 1 -> -1, 2 -> +2, 3 -> -2, ...
                let step = (rank / 2 + 1) as f64;
                let sign = if rank % 2 == 0 { 1.0 } else { -1.0 };
                out[idx] = products[idx] * (1.0 + sign * step * DEGENERACY_PERTURBATION);
            }
        }
        start = end;
    }
    Ok(out)
}

/// Terms of a hypoexponential capacity mixture: the ergodic rate of
/// `log2(1 + sum_i a_i |g_i|^2 / sigma^2)` for independent unit-mean
/// exponential `|g_i|^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct CapacityTermList {
    products: Vec<f64>,
    weights: Vec<f64>,
    noise_var: f64,
}

impl CapacityTermList {
    /// Terms from the received-power products `a_i = L_i Q_i`.
    pub fn from_products(products: &[f64], noise_var: f64) -> Result<Self> {
        if !(noise_var > 0.0 && noise_var.is_finite()) {
            return domain(format!("noise variance must be positive, got {noise_var}"));
        }
        let products = resolve_degeneracy(products)?;
        let weights = weights_of(&products);
        Ok(CapacityTermList { products, weights, noise_var })
    }

    pub fn products(&self) -> &[f64] {
        &self.products
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn is_well_conditioned(&self) -> bool {
        self.weights.iter().map(|w| w.abs()).sum::<f64>() <= MAX_WEIGHT_MAGNITUDE
    }

    /// `sum_i pi_i C_1(a_i / sigma^2)`.
    pub fn capacity(&self) -> f64 {
        self.scaled_capacity(1.0)
    }

    /// Capacity with every product multiplied by `factor` (weights are
    /// scale-invariant). `factor = 0` gives 0.
    pub fn scaled_capacity(&self, factor: f64) -> f64 {
        if factor == 0.0 {
            return 0.0;
        }
        if !self.is_well_conditioned() {
            return laplace_capacity(&self.products, factor / self.noise_var);
        }
        self.products
            .iter()
            .zip(&self.weights)
            .map(|(&a, &w)| w * capacity1_or_zero(factor * a / self.noise_var))
            .sum()
    }
}

/// `sum_i pi_i C_1(a_i / sigma^2)`, the exact ergodic capacity of the mixture.
pub fn ergodic_capacity_mixture(terms: &CapacityTermList) -> Result<f64> {
    Ok(terms.capacity())
}

/// `E_n(x)` straight from `int_1^inf e^{-xt} t^{-n} dt`, integrated in
/// `v = ln t` with adaptive quadrature. Slow; used as a check on
/// [`exp_integral_e`].
pub fn exp_integral_by_quadrature(n: u32, x: f64) -> Result<f64> {
    if n == 0 || !(x > 0.0 && x.is_finite()) {
        return domain(format!("quadrature check needs n >= 1 and x > 0, got ({n}, {x})"));
    }
    let k = 1.0 - n as f64;
    let integrand = |v: f64| (k * v - x * v.exp()).exp();
    // beyond x t = 745 the integrand underflows
    let top = (745.0 / x).ln().max(1.0);
    let mut points = vec![0.0];
    let knee = (1.0 / x).ln();
    if knee > 0.0 && knee < top {
        points.push(knee);
    }
    points.push(top);
    Ok(quadrature::integrate_pieces(integrand, &points, 1e-13))
}

/// `E[ln(1 + Y)] = int_0^inf e^{-s} (1 - E[e^{-sY}]) / s ds`, integrated in
/// `u = ln s`. Only used when the partial fractions are ill-conditioned.
fn laplace_capacity(products: &[f64], scale: f64) -> f64 {
    let c: Vec<f64> = products.iter().map(|a| a * scale).collect();
    let cmax = c.iter().cloned().fold(0.0, f64::max);
    let integrand = |u: f64| {
        let s = u.exp();
        let mgf: f64 = c.iter().map(|ci| 1.0 / (1.0 + s * ci)).product();
        (-s).exp() * (1.0 - mgf)
    };
    let lo = -cmax.ln() - 40.0;
    let hi = 4.0;
    let mut points = vec![lo];
    let mut u = lo.ceil();
    while u < hi {
        if u > lo {
            points.push(u);
        }
        u += 2.0;
    }
    points.push(hi);
    quadrature::integrate_pieces(integrand, &points, 1e-12) / LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(exp_integral_e(2, 0.0).unwrap(), 1.0);
        let e11 = exp_integral_e(1, 1.0).unwrap();
        assert!((e11 - 0.219_383_934_395_520_3).abs() < 1e-14);
        let e1_10 = exp_integral_e(1, 10.0).unwrap();
        assert!(((e1_10 - 4.156_968_929_685_324e-6) / e1_10).abs() < 1e-9);
    }

    #[test]
    fn argument_errors() {
        assert!(matches!(exp_integral_e(1, -1.0), Err(Error::Domain(_))));
        assert!(matches!(exp_integral_e(1, 0.0), Err(Error::Divergence(_))));
        assert!(matches!(exp_integral_e(0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(ergodic_capacity(1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(ergodic_capacity(1, -2.0), Err(Error::Domain(_))));
        assert!(mixture_weights(&[]).is_err());
    }

    #[test]
    fn capacity_at_unit_snr() {
        // e E_1(1) / ln 2
        let c = ergodic_capacity(1, 1.0).unwrap();
        assert!((c - 0.860_347_382_270_886_8).abs() < 1e-12);
    }

    #[test]
    fn no_overflow_at_low_snr() {
        let c = ergodic_capacity(1, 1e-3).unwrap();
        assert!(c.is_finite() && c > 0.0 && c < 0.0015);
        let c = ergodic_capacity(3, 1e-4).unwrap();
        assert!(c.is_finite() && c > 0.0);
    }

    #[test]
    fn two_term_weights() {
        assert_eq!(mixture_weights(&[3.5]).unwrap(), vec![1.0]);
        let w = mixture_weights(&[2.0, 1.0]).unwrap();
        assert!((w[0] - 2.0).abs() < 1e-15 && (w[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_pair_is_resolved() {
        let w = mixture_weights(&[1.0, 1.0, 3.0]).unwrap();
        assert!(w.iter().all(|v| v.is_finite()));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        let terms = CapacityTermList::from_products(&[1.0, 1.0], 1.0).unwrap();
        // X ~ Gamma(2, 1): E[ln(1 + X)] = 1 by integration by parts
        let reference = 1.0 / LN_2;
        assert!((terms.capacity() - reference).abs() < 1e-6);
    }

    #[test]
    fn triple_degeneracy_uses_integral() {
        let terms = CapacityTermList::from_products(&[2.0, 2.0, 2.0], 1.0).unwrap();
        assert!(!terms.is_well_conditioned());
        // Gamma(3, 2) reference by direct quadrature of log1p against the density
        assert!((terms.capacity() - 2.635_542_921_528_688_5).abs() < 1e-6);
    }

    #[test]
    fn laplace_matches_partial_fractions() {
        for products in [vec![1.0], vec![2.0, 1.0], vec![50.0, 0.3, 7.0, 1e3]] {
            let t = CapacityTermList::from_products(&products, 1.0).unwrap();
            let direct = t.capacity();
            let integral = laplace_capacity(&products, 1.0);
            assert!(((direct - integral) / direct).abs() < 1e-9, "{products:?}");
        }
    }
}
