use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use noma_das::geometry::{
    fig2_placement, sample_fading, sample_ring_placement, GainMatrix, NetworkGeometry, Point, User, CENTER,
    NUM_TX,
};

/// Kolmogorov-Smirnov distance of `xs` from the CDF `cdf`.
fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn fading_power_is_unit_exponential() {
    let slow = GainMatrix::from_rows([[1.0; 2]; NUM_TX]);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut xs = Vec::new();
    for _ in 0..3_000 {
        let ch = sample_fading(&slow, &mut rng);
        for row in ch.gain().rows() {
            xs.extend_from_slice(row);
        }
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    assert!((mean - 1.0).abs() < 4.0 / n.sqrt(), "mean {mean}");
    // 0.1% critical value
    let d = ks_distance(xs, |x| 1.0 - (-x).exp());
    assert!(d < 1.95 / n.sqrt(), "KS distance {d}");
}

#[test]
fn fading_phase_is_uniform() {
    let slow = GainMatrix::from_rows([[2.0; 2]; NUM_TX]);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut phases = Vec::new();
    for _ in 0..3_000 {
        let ch = sample_fading(&slow, &mut rng);
        phases.extend(ch.fading().iter().flatten().map(|g| g.arg()));
    }
    let n = phases.len() as f64;
    let d = ks_distance(phases, |t| (t + std::f64::consts::PI) / std::f64::consts::TAU);
    assert!(d < 1.95 / n.sqrt(), "KS distance {d}");
}

#[test]
fn ring_placement_radii() {
    let geom = NetworkGeometry::default_geometry();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 100_000;
    let (mut far, mut near) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let p = sample_ring_placement(&geom, &mut rng);
        far.push(p.position(User::One).norm());
        near.push(p.position(User::Two).norm());
    }
    assert!(far.iter().all(|r| (0.8..=1.0).contains(r)));
    assert!(near.iter().all(|r| (0.0..=0.3).contains(r)));
    // area-uniform: E[r] = (2/3)(b^3 - a^3)/(b^2 - a^2)
    let far_mean = far.iter().sum::<f64>() / n as f64;
    let near_mean = near.iter().sum::<f64>() / n as f64;
    assert!((far_mean - 0.9037).abs() < 0.003, "far mean {far_mean}");
    assert!((near_mean - 0.2).abs() < 0.003, "near mean {near_mean}");
    let d = ks_distance(far, |r| (r * r - 0.64) / 0.36);
    assert!(d < 1.95 / (n as f64).sqrt());
}

#[test]
fn slow_fading_follows_distance_power_law() {
    let geom = NetworkGeometry::default_geometry();
    let place = fig2_placement(&geom, 0.5).unwrap();
    let slow = geom.slow_fading(&place).unwrap();
    assert!((slow.get(CENTER, User::One) - 0.5f64.powi(-4)).abs() < 1e-9);
    assert!((slow.get(CENTER, User::Two) - 0.2f64.powi(-4)).abs() < 1e-9);
    // first RRU sits on the same ray at 2/3
    let d: f64 = 2.0 / 3.0 - 0.5;
    assert!((slow.get(1, User::One) / d.powi(-4) - 1.0).abs() < 1e-12);
    let far = Point::new(0.5, 0.0).distance(&geom.tx_position(4));
    assert!((slow.get(4, User::One) / far.powi(-4) - 1.0).abs() < 1e-12);
}
