//! Cell layout, user placement and Rayleigh fading channels.
//!
//! Transmitters are indexed `0..7`: index 0 is the center base station and
//! `1..=6` are the RRUs. The cell radius is normalized to 1.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub const NUM_RRUS: usize = 6;
/// Center BS plus the RRUs.
pub const NUM_TX: usize = NUM_RRUS + 1;
pub const CENTER: usize = 0;

pub const CELL_RADIUS: f64 = 1.0;
pub const DEFAULT_PATHLOSS_EXPONENT: f64 = 4.0;
pub const DEFAULT_RRU_RING_RADIUS: f64 = 2.0 / 3.0;

/// Placements closer than this to any antenna are rejected.
pub const MIN_ANTENNA_DISTANCE: f64 = 1e-6;

/// Fixed distance of the near user in the distance sweep.
pub const FIG2_NEAR_DISTANCE: f64 = 0.2;
pub const NEAR_DISK_RADIUS: f64 = 0.3;
pub const FAR_RING_INNER: f64 = 0.8;
pub const FAR_RING_OUTER: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn polar(radius: f64, angle: f64) -> Self {
        Point::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One of the two users. `One` is the far user of a placement and `Two`
/// the near user; which of them is weak depends on the CSI ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum User {
    One,
    Two,
}

impl User {
    pub const ALL: [User; 2] = [User::One, User::Two];

    pub fn index(self) -> usize {
        match self {
            User::One => 0,
            User::Two => 1,
        }
    }

    pub fn other(self) -> User {
        match self {
            User::One => User::Two,
            User::Two => User::One,
        }
    }
}

/// Center BS at the origin plus six RRUs, with a common pathloss exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkGeometry {
    rrus: [Point; NUM_RRUS],
    alpha: f64,
}

impl NetworkGeometry {
    pub fn new(rrus: [Point; NUM_RRUS], alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 2.0) {
            return domain(format!("pathloss exponent must exceed 2, got {alpha}"));
        }
        for (i, p) in rrus.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) || p.norm() > CELL_RADIUS {
                return domain(format!("RRU {} at ({}, {}) lies outside the cell", i + 1, p.x, p.y));
            }
            if p.norm() < MIN_ANTENNA_DISTANCE {
                return domain(format!("RRU {} coincides with the center BS", i + 1));
            }
            for (j, q) in rrus.iter().enumerate().skip(i + 1) {
                if p.distance(q) < MIN_ANTENNA_DISTANCE {
                    return domain(format!("RRUs {} and {} coincide", i + 1, j + 1));
                }
            }
        }
        Ok(NetworkGeometry { rrus, alpha })
    }

    /// Six RRUs evenly spaced on a ring of radius 2/3, the first one on the
    /// positive x-axis, and pathloss exponent 4.
    pub fn default_geometry() -> Self {
        let rrus = std::array::from_fn(|k| {
            Point::polar(DEFAULT_RRU_RING_RADIUS, k as f64 * PI / 3.0)
        });
        NetworkGeometry {
            rrus,
            alpha: DEFAULT_PATHLOSS_EXPONENT,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rru_positions(&self) -> &[Point; NUM_RRUS] {
        &self.rrus
    }

    /// Position of transmitter `tx` (0 = center BS).
    pub fn tx_position(&self, tx: usize) -> Point {
        if tx == CENTER {
            Point::ORIGIN
        } else {
            self.rrus[tx - 1]
        }
    }

    pub fn antennas(&self) -> impl Iterator<Item = Point> + '_ {
        (0..NUM_TX).map(|tx| self.tx_position(tx))
    }

    fn nearest_antenna_distance(&self, p: &Point) -> f64 {
        self.antennas().map(|a| a.distance(p)).fold(f64::INFINITY, f64::min)
    }

    /// Slow-fading variances `L[tx][user] = d^-alpha` for a placement.
    pub fn slow_fading(&self, place: &UserPlacement) -> Result<GainMatrix> {
        let mut m = GainMatrix::zeros();
        for tx in 0..NUM_TX {
            for user in User::ALL {
                let d = self.tx_position(tx).distance(&place.position(user));
                m.set(tx, user, pathloss(d, self.alpha)?);
            }
        }
        Ok(m)
    }
}

impl Default for NetworkGeometry {
    fn default() -> Self {
        NetworkGeometry::default_geometry()
    }
}

/// Distance-based pathloss `1 / d^alpha`.
pub fn pathloss(d: f64, alpha: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return domain(format!("pathloss distance must be positive, got {d}"));
    }
    Ok(d.powf(-alpha))
}

/// Positions of the two users.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UserPlacement {
    user1: Point,
    user2: Point,
}

impl UserPlacement {
    /// `user1` is the far user and `user2` the near user. Both must lie in
    /// the closed unit disk and away from every antenna.
    pub fn new(geom: &NetworkGeometry, user1: Point, user2: Point) -> Result<Self> {
        for (name, p) in [("user 1", user1), ("user 2", user2)] {
            if !(p.x.is_finite() && p.y.is_finite()) || p.norm() > CELL_RADIUS {
                return domain(format!("{name} at ({}, {}) lies outside the cell", p.x, p.y));
            }
            if geom.nearest_antenna_distance(&p) <= MIN_ANTENNA_DISTANCE {
                return domain(format!("{name} at ({}, {}) coincides with an antenna", p.x, p.y));
            }
        }
        Ok(UserPlacement { user1, user2 })
    }

    pub fn position(&self, user: User) -> Point {
        match user {
            User::One => self.user1,
            User::Two => self.user2,
        }
    }
}

/// Near user at distance 0.2 and far user at `far_distance`, both on the
/// positive x-axis (the ray through the first RRU of the default layout).
pub fn fig2_placement(geom: &NetworkGeometry, far_distance: f64) -> Result<UserPlacement> {
    if !(far_distance > 0.0 && far_distance <= CELL_RADIUS) {
        return domain(format!("far-user distance must lie in (0, 1], got {far_distance}"));
    }
    UserPlacement::new(
        geom,
        Point::new(far_distance, 0.0),
        Point::new(FIG2_NEAR_DISTANCE, 0.0),
    )
}

/// Near user area-uniform in the disk of radius 0.3, far user area-uniform
/// in the annulus `[0.8, 1]`. Draws that land on an antenna are redrawn.
pub fn sample_ring_placement<R: Rng + ?Sized>(geom: &NetworkGeometry, rng: &mut R) -> UserPlacement {
    let far = sample_annulus(geom, FAR_RING_INNER, FAR_RING_OUTER, rng);
    let near = sample_annulus(geom, 0.0, NEAR_DISK_RADIUS, rng);
    UserPlacement { user1: far, user2: near }
}

fn sample_annulus<R: Rng + ?Sized>(geom: &NetworkGeometry, inner: f64, outer: f64, rng: &mut R) -> Point {
    loop {
        let u: f64 = rng.gen();
        let r = (inner * inner + (outer * outer - inner * inner) * u).sqrt();
        let p = Point::polar(r, 2.0 * PI * rng.gen::<f64>());
        if geom.nearest_antenna_distance(&p) > MIN_ANTENNA_DISTANCE {
            return p;
        }
    }
}

/// Named user-placement distributions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlacementModel {
    /// Deterministic placement on the RRU ray, parameterized by far distance.
    Fig2,
    Rings,
}

impl FromStr for PlacementModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(PlacementModel::Fig2),
            "rings" => Ok(PlacementModel::Rings),
            other => Err(Error::Config(format!("unknown placement model {other:?}"))),
        }
    }
}

impl fmt::Display for PlacementModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlacementModel::Fig2 => "fig2",
            PlacementModel::Rings => "rings",
        })
    }
}

/// A 7x2 table of non-negative power gains indexed by (transmitter, user).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainMatrix([[f64; 2]; NUM_TX]);

impl GainMatrix {
    pub fn zeros() -> Self {
        GainMatrix([[0.0; 2]; NUM_TX])
    }

    pub fn from_rows(rows: [[f64; 2]; NUM_TX]) -> Self {
        GainMatrix(rows)
    }

    #[inline]
    pub fn get(&self, tx: usize, user: User) -> f64 {
        self.0[tx][user.index()]
    }

    #[inline]
    pub fn set(&mut self, tx: usize, user: User, value: f64) {
        self.0[tx][user.index()] = value;
    }

    /// Gains from the six RRUs to `user`, RRU 1 first.
    pub fn rru_column(&self, user: User) -> [f64; NUM_RRUS] {
        std::array::from_fn(|k| self.get(k + 1, user))
    }

    pub fn rows(&self) -> &[[f64; 2]; NUM_TX] {
        &self.0
    }
}

/// One fading realization: slow fading `L`, fast fading `g ~ CN(0,1)` and
/// power gains `|h|^2 = L |g|^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    slow: GainMatrix,
    fading: [[Complex64; 2]; NUM_TX],
    gain: GainMatrix,
}

impl ChannelRealization {
    pub fn new(slow: GainMatrix, fading: [[Complex64; 2]; NUM_TX]) -> Result<Self> {
        let mut gain = GainMatrix::zeros();
        for tx in 0..NUM_TX {
            for user in User::ALL {
                let l = slow.get(tx, user);
                if !(l > 0.0 && l.is_finite()) {
                    return domain(format!("slow fading L[{tx}][{}] must be positive, got {l}", user.index() + 1));
                }
                gain.set(tx, user, l * fading[tx][user.index()].norm_sqr());
            }
        }
        Ok(ChannelRealization { slow, fading, gain })
    }

    /// Realization whose fast fading is the given magnitude-squared values
    /// with zero phase. Handy for constructing channels with known gains.
    pub fn from_gains(slow: GainMatrix, fading_power: GainMatrix) -> Result<Self> {
        let mut fading = [[Complex64::new(0.0, 0.0); 2]; NUM_TX];
        for (tx, row) in fading.iter_mut().enumerate() {
            for user in User::ALL {
                let p = fading_power.get(tx, user);
                if !(p >= 0.0) {
                    return domain(format!("fading power must be non-negative, got {p}"));
                }
                row[user.index()] = Complex64::new(p.sqrt(), 0.0);
            }
        }
        Self::new(slow, fading)
    }

    pub fn slow(&self) -> &GainMatrix {
        &self.slow
    }

    pub fn fading(&self) -> &[[Complex64; 2]; NUM_TX] {
        &self.fading
    }

    pub fn gain(&self) -> &GainMatrix {
        &self.gain
    }

    /// The gains the transmitter acts on under `mode`.
    pub fn known_gains(&self, mode: CsiMode) -> &GainMatrix {
        match mode {
            CsiMode::InstantaneousCgi => &self.gain,
            CsiMode::CdiOnly => &self.slow,
        }
    }
}

/// Draws a Rayleigh realization for `place`. Fast fading is drawn
/// transmitter-major, real part before imaginary part.
pub fn sample_channel<R: Rng + ?Sized>(
    geom: &NetworkGeometry,
    place: &UserPlacement,
    rng: &mut R,
) -> ChannelRealization {
    let slow = geom
        .slow_fading(place)
        .expect("validated placement has positive distances");
    sample_fading(&slow, rng)
}

/// Draws fresh fast fading on top of known slow fading.
pub fn sample_fading<R: Rng + ?Sized>(slow: &GainMatrix, rng: &mut R) -> ChannelRealization {
    let mut fading = [[Complex64::new(0.0, 0.0); 2]; NUM_TX];
    let mut gain = GainMatrix::zeros();
    for (tx, row) in fading.iter_mut().enumerate() {
        for user in User::ALL {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let g = Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2);
            row[user.index()] = g;
            gain.set(tx, user, slow.get(tx, user) * g.norm_sqr());
        }
    }
    ChannelRealization { slow: *slow, fading, gain }
}

/// What the transmitter knows about the channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsiMode {
    InstantaneousCgi,
    CdiOnly,
}

impl FromStr for CsiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cgi" | "instantaneous" => Ok(CsiMode::InstantaneousCgi),
            "cdi" => Ok(CsiMode::CdiOnly),
            other => Err(Error::Config(format!("unknown CSI mode {other:?}"))),
        }
    }
}

/// Weak/strong labelling of the two users.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UserRoles {
    pub weak: User,
    pub strong: User,
}

impl UserRoles {
    /// Roles from the center-BS gains: the larger one is strong, ties go to
    /// user 1.
    pub fn from_center_gains(g1: f64, g2: f64) -> Self {
        if g1 >= g2 {
            UserRoles { weak: User::Two, strong: User::One }
        } else {
            UserRoles { weak: User::One, strong: User::Two }
        }
    }
}

/// Orders the users by center-BS gain (CGI) or variance (CDI).
pub fn order_users(ch: &ChannelRealization, mode: CsiMode) -> UserRoles {
    order_by_matrix(ch.known_gains(mode))
}

pub fn order_by_matrix(m: &GainMatrix) -> UserRoles {
    UserRoles::from_center_gains(m.get(CENTER, User::One), m.get(CENTER, User::Two))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn default_layout() {
        let g = NetworkGeometry::default_geometry();
        let first = g.rru_positions()[0];
        assert!((first.x - 2.0 / 3.0).abs() < 1e-15 && first.y.abs() < 1e-15);
        assert_eq!(g.alpha(), 4.0);
        for k in 0..NUM_RRUS {
            let a = g.rru_positions()[k];
            let b = g.rru_positions()[(k + 1) % NUM_RRUS];
            let angle = (a.x * b.x + a.y * b.y) / (a.norm() * b.norm());
            assert!((angle.acos().to_degrees() - 60.0).abs() < 1e-9);
        }
    }

    #[test]
    fn pathloss_values() {
        assert_eq!(pathloss(1.0, 4.0).unwrap(), 1.0);
        assert!((pathloss(0.5, 4.0).unwrap() - 16.0).abs() < 1e-12);
        assert!((pathloss(0.2, 4.0).unwrap() - 625.0).abs() < 1e-9);
        assert!(matches!(pathloss(0.0, 4.0), Err(Error::Domain(_))));
        assert!(matches!(pathloss(-1.0, 4.0), Err(Error::Domain(_))));
    }

    #[test]
    fn geometry_validation() {
        let mut rrus = *NetworkGeometry::default_geometry().rru_positions();
        assert!(NetworkGeometry::new(rrus, 2.0).is_err());
        rrus[1] = rrus[0];
        assert!(NetworkGeometry::new(rrus, 4.0).is_err());
        rrus[1] = Point::new(1.5, 0.0);
        assert!(NetworkGeometry::new(rrus, 4.0).is_err());
    }

    #[test]
    fn fig2_layout() {
        let g = NetworkGeometry::default_geometry();
        let p = fig2_placement(&g, 0.9).unwrap();
        assert_eq!(p.position(User::One), Point::new(0.9, 0.0));
        assert_eq!(p.position(User::Two), Point::new(0.2, 0.0));
        assert!(fig2_placement(&g, 0.0).is_err());
        assert!(fig2_placement(&g, 1.01).is_err());
        // on top of the first RRU
        assert!(fig2_placement(&g, 2.0 / 3.0).is_err());
    }

    #[test]
    fn order_users_examples() {
        let slow = GainMatrix::from_rows([[1.0; 2]; NUM_TX]);
        let mut fp = GainMatrix::from_rows([[1.0; 2]; NUM_TX]);
        fp.set(0, User::One, 2.0);
        fp.set(0, User::Two, 3.0);
        let ch = ChannelRealization::from_gains(slow, fp).unwrap();
        assert_eq!(
            order_users(&ch, CsiMode::InstantaneousCgi),
            UserRoles { weak: User::One, strong: User::Two }
        );

        let mut slow = GainMatrix::from_rows([[1.0; 2]; NUM_TX]);
        slow.set(0, User::Two, 625.0);
        let ch = ChannelRealization::from_gains(slow, GainMatrix::from_rows([[1.0; 2]; NUM_TX])).unwrap();
        assert_eq!(order_users(&ch, CsiMode::CdiOnly).strong, User::Two);

        let ch = ChannelRealization::from_gains(
            GainMatrix::from_rows([[1.0; 2]; NUM_TX]),
            GainMatrix::from_rows([[2.0; 2]; NUM_TX]),
        )
        .unwrap();
        assert_eq!(order_users(&ch, CsiMode::InstantaneousCgi).strong, User::One);
    }

    #[test]
    fn ring_support() {
        let g = NetworkGeometry::default_geometry();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let p = sample_ring_placement(&g, &mut rng);
            let far = p.position(User::One).norm();
            assert!(p.position(User::Two).norm() <= NEAR_DISK_RADIUS);
            assert!((FAR_RING_INNER..=FAR_RING_OUTER).contains(&far));
        }
    }

    #[test]
    fn seeded_channels_replay() {
        let g = NetworkGeometry::default_geometry();
        let p = fig2_placement(&g, 0.9).unwrap();
        let a = sample_channel(&g, &p, &mut ChaCha8Rng::seed_from_u64(11));
        let b = sample_channel(&g, &p, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
        for tx in 0..NUM_TX {
            for u in User::ALL {
                let g2 = a.slow().get(tx, u) * a.fading()[tx][u.index()].norm_sqr();
                assert_eq!(a.gain().get(tx, u), g2);
            }
        }
    }
}
