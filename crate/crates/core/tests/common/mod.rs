#![allow(dead_code)]

use noma_das::geometry::{
    order_users, sample_channel, sample_ring_placement, ChannelRealization, CsiMode, NetworkGeometry, Point,
    NUM_RRUS,
};
use noma_das::harness::snr_from_db;
use noma_das::rates::{NomaLink, PowerSplit, SchemeKind};
use rand::Rng;

pub const NOISE_VAR: f64 = 1.0;

pub const CENTER_SCHEMES: [SchemeKind; 3] =
    [SchemeKind::NomaSingleSelection, SchemeKind::NomaBlanket, SchemeKind::ConventionalNoma];

/// Six RRUs on a ring of random radius and rotation, path-loss exponent in [3, 4.5].
pub fn random_geometry<R: Rng>(rng: &mut R) -> NetworkGeometry {
    let radius = rng.gen_range(0.4..0.85);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let rrus = std::array::from_fn(|k| {
        Point::polar(radius, phase + std::f64::consts::TAU * k as f64 / NUM_RRUS as f64)
    });
    NetworkGeometry::new(rrus, rng.gen_range(3.0..4.5)).unwrap()
}

/// Total power for a transmit SNR drawn uniformly in [0, 30] dB.
pub fn random_total_power<R: Rng>(rng: &mut R) -> f64 {
    snr_from_db(rng.gen_range(0.0..30.0)) * NOISE_VAR
}

pub fn random_split<R: Rng>(rng: &mut R, scheme: SchemeKind, total: f64) -> PowerSplit {
    if scheme == SchemeKind::ConventionalNoma {
        PowerSplit::conventional(total).unwrap()
    } else {
        PowerSplit::das(total, rng.gen_range(0.1..0.9)).unwrap()
    }
}

pub struct CgiInstance {
    pub channel: ChannelRealization,
    pub split: PowerSplit,
    pub link: NomaLink,
}

/// A random ring placement, Rayleigh draw and power budget, users ordered
/// by instantaneous center gain.
pub fn random_cgi_instance<R: Rng>(rng: &mut R, scheme: SchemeKind) -> CgiInstance {
    let geom = random_geometry(rng);
    let place = sample_ring_placement(&geom, rng);
    let channel = sample_channel(&geom, &place, rng);
    let total = random_total_power(rng);
    let split = random_split(rng, scheme, total);
    let roles = order_users(&channel, CsiMode::InstantaneousCgi);
    let link = NomaLink::for_scheme(channel.gain(), channel.gain(), scheme, split, roles, NOISE_VAR).unwrap();
    CgiInstance { channel, split, link }
}
