//! Monte-Carlo experiment runner.
//!
//! Every trial owns a ChaCha8 stream `(seed, trial index)`. The stream is
//! restarted at each sweep point, so all sweep points and all schemes see
//! the same placements and fading (common random numbers). Trials are
//! grouped in fixed-size chunks, evaluated in parallel and reduced in chunk
//! order, which makes the output independent of the thread count.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::alloc::{
    jt_beta_search, maxmin_cdi_bisection, maxmin_cgi, maxsum_cgi, JtObjective, QosConstraint,
};
use crate::error::{Error, Result};
use crate::geometry::{
    fig2_placement, order_by_matrix, order_users, sample_fading, sample_ring_placement,
    ChannelRealization, CsiMode, GainMatrix, PlacementModel, FIG2_NEAR_DISTANCE,
};
use crate::rates::{
    ergodic_conventional_single_selection, rates_conventional_single_selection, ErgodicNomaLink,
    JtLink, NomaLink, PowerSplit, RateOutcome, RruAssist, SchemeKind,
};

pub mod config;
pub mod csv;
pub mod plot;

pub use config::{ConfigFile, Settings};
pub use csv::{emit_csv, write_csv};

pub const DEFAULT_TRIALS: usize = 100_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_SNR_DB: f64 = 10.0;
pub const DEFAULT_RT: f64 = 2.0;

/// Trials per parallel work unit. Fixed so the summation order never
/// depends on scheduling.
const CHUNK: usize = 256;

/// A scheme, plus the equal `P/7` power split for conventional single
/// selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SchemeVariant {
    pub kind: SchemeKind,
    pub equal_split: bool,
}

impl SchemeVariant {
    pub const fn new(kind: SchemeKind) -> Self {
        SchemeVariant { kind, equal_split: false }
    }

    pub const fn equal_split() -> Self {
        SchemeVariant { kind: SchemeKind::ConventionalSingleSelection, equal_split: true }
    }

    /// The five schemes and the equal-split variant.
    pub fn all() -> Vec<SchemeVariant> {
        let mut v: Vec<_> = SchemeKind::ALL.into_iter().map(SchemeVariant::new).collect();
        v.insert(4, SchemeVariant::equal_split());
        v
    }

    pub fn token(&self) -> String {
        if self.equal_split {
            format!("{}_equal", self.kind.token())
        } else {
            self.kind.token().to_string()
        }
    }

    /// Output labels of this scheme. Under CDI the optimized schemes report
    /// an upper and a lower bound; conventional single selection is exact.
    pub fn labels(&self, csi: CsiMode) -> Vec<String> {
        match (csi, self.kind) {
            (CsiMode::CdiOnly, k) if k != SchemeKind::ConventionalSingleSelection => {
                vec![format!("{}_upper", self.token()), format!("{}_lower", self.token())]
            }
            _ => vec![self.token()],
        }
    }

    fn split(&self, total: f64, center_fraction: f64) -> Result<PowerSplit> {
        match (self.kind, self.equal_split) {
            (_, true) => PowerSplit::equal(total),
            (SchemeKind::ConventionalNoma, _) => PowerSplit::conventional(total),
            _ => PowerSplit::das(total, center_fraction),
        }
    }
}

impl fmt::Display for SchemeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

impl FromStr for SchemeVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.strip_suffix("_equal") {
            Some("conventional_single_selection") => Ok(SchemeVariant::equal_split()),
            Some(_) => Err(Error::Config(format!("only conventional_single_selection has an _equal variant, got {s:?}"))),
            None => Ok(SchemeVariant::new(s.parse()?)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    FarDistance,
    TransmitSnrDb,
    MinRateRt,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distance" | "far_distance" => Ok(SweepAxis::FarDistance),
            "snr" | "snr_db" => Ok(SweepAxis::TransmitSnrDb),
            "rt" => Ok(SweepAxis::MinRateRt),
            other => Err(Error::Config(format!("unknown sweep axis {other:?}"))),
        }
    }
}

/// Optimization target of an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    MaxMin,
    MaxSum,
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maxmin" => Ok(Objective::MaxMin),
            "maxsum" => Ok(Objective::MaxSum),
            other => Err(Error::Config(format!("unknown objective {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub schemes: Vec<SchemeVariant>,
    pub csi_mode: CsiMode,
    pub objective: Objective,
    pub placement: PlacementModel,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    /// Transmit SNR when the sweep is not over SNR.
    pub snr_db: f64,
    /// Rate target when the sweep is not over `R_t`; max-sum only.
    pub qos: Option<QosConstraint>,
    /// Far-user distance for the on-ray placement when the sweep is not
    /// over distance.
    pub far_distance: f64,
    pub trials: usize,
    pub seed: u64,
    pub settings: Settings,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub scheme: String,
    pub metric_mean: f64,
    pub metric_stderr: f64,
    pub outage_rate: f64,
    pub trials: usize,
}

fn stepped(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|k| start + step * k as f64).collect()
}

/// Far-user distances 0.30, 0.35, ..., 1.00.
pub fn fig2_distances() -> Vec<f64> {
    stepped(0.30, 1.00, 0.05)
}

/// Transmit SNR 0, 5, ..., 30 dB.
pub fn snr_grid_db() -> Vec<f64> {
    stepped(0.0, 30.0, 5.0)
}

/// Rate targets 0, 0.25, ..., 3.
pub fn rt_grid() -> Vec<f64> {
    stepped(0.0, 3.0, 0.25)
}

impl ExperimentSpec {
    fn preset(name: &str, csi_mode: CsiMode, objective: Objective, placement: PlacementModel, axis: SweepAxis, values: Vec<f64>) -> Self {
        ExperimentSpec {
            name: name.to_string(),
            schemes: SchemeVariant::all(),
            csi_mode,
            objective,
            placement,
            sweep_axis: axis,
            sweep_values: values,
            snr_db: DEFAULT_SNR_DB,
            qos: None,
            far_distance: 1.0,
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            settings: Settings::default(),
        }
    }

    /// Max-min versus far-user distance on the RRU ray, CGI, 10 dB.
    pub fn fig2() -> Self {
        Self::preset("fig2", CsiMode::InstantaneousCgi, Objective::MaxMin, PlacementModel::Fig2, SweepAxis::FarDistance, fig2_distances())
    }

    /// Max-min versus SNR, random placement, CGI.
    pub fn fig3() -> Self {
        Self::preset("fig3", CsiMode::InstantaneousCgi, Objective::MaxMin, PlacementModel::Rings, SweepAxis::TransmitSnrDb, snr_grid_db())
    }

    /// Max-min bounds versus SNR, random placement, CDI.
    pub fn fig4() -> Self {
        Self::preset("fig4", CsiMode::CdiOnly, Objective::MaxMin, PlacementModel::Rings, SweepAxis::TransmitSnrDb, snr_grid_db())
    }

    /// Sum rate versus `R_t` at 10 dB.
    pub fn fig5() -> Self {
        Self::preset("fig5", CsiMode::InstantaneousCgi, Objective::MaxSum, PlacementModel::Rings, SweepAxis::MinRateRt, rt_grid())
    }

    /// Sum rate versus SNR at `R_t = 2`.
    pub fn fig6() -> Self {
        let mut s = Self::preset("fig6", CsiMode::InstantaneousCgi, Objective::MaxSum, PlacementModel::Rings, SweepAxis::TransmitSnrDb, snr_grid_db());
        s.qos = Some(QosConstraint::new(DEFAULT_RT).expect("positive constant"));
        s
    }

    /// Column labels in output order.
    pub fn labels(&self) -> Vec<String> {
        self.schemes.iter().flat_map(|s| s.labels(self.csi_mode)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("{}: {msg}", self.name)));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.schemes.is_empty() {
            return bad("no schemes selected".into());
        }
        for (i, s) in self.schemes.iter().enumerate() {
            if self.schemes[..i].contains(s) {
                return bad(format!("scheme {s} listed twice"));
            }
        }
        if self.sweep_values.is_empty() {
            return bad("empty sweep".into());
        }
        if self.sweep_values.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("sweep values must be strictly increasing".into());
        }
        if self.sweep_values.iter().any(|v| !v.is_finite()) || !self.snr_db.is_finite() {
            return bad("sweep values must be finite".into());
        }
        if self.csi_mode == CsiMode::CdiOnly && self.objective == Objective::MaxSum {
            return bad("max-sum allocation is only defined with instantaneous CGI".into());
        }
        match self.sweep_axis {
            SweepAxis::FarDistance => {
                if self.placement != PlacementModel::Fig2 {
                    return bad("a distance sweep needs the fig2 placement".into());
                }
                if self.sweep_values.iter().any(|&d| !(d > FIG2_NEAR_DISTANCE && d <= 1.0)) {
                    return bad(format!("far distances must lie in ({FIG2_NEAR_DISTANCE}, 1]"));
                }
            }
            SweepAxis::MinRateRt => {
                if self.objective != Objective::MaxSum {
                    return bad("an R_t sweep needs the maxsum objective".into());
                }
                if self.sweep_values.iter().any(|&r| r < 0.0) {
                    return bad("rate targets must be non-negative".into());
                }
            }
            SweepAxis::TransmitSnrDb => {}
        }
        if self.objective == Objective::MaxSum && self.sweep_axis != SweepAxis::MinRateRt && self.qos.is_none() {
            return bad("maxsum needs a rate target".into());
        }
        if self.placement == PlacementModel::Fig2
            && self.sweep_axis != SweepAxis::FarDistance
            && !(self.far_distance > FIG2_NEAR_DISTANCE && self.far_distance <= 1.0)
        {
            return bad(format!("far distance must lie in ({FIG2_NEAR_DISTANCE}, 1]"));
        }
        self.settings.validate()
    }

    fn points(&self) -> Result<Vec<SweepPoint>> {
        self.sweep_values
            .iter()
            .map(|&v| {
                let mut p = SweepPoint {
                    snr_db: self.snr_db,
                    far_distance: self.far_distance,
                    qos: self.qos,
                };
                match self.sweep_axis {
                    SweepAxis::FarDistance => p.far_distance = v,
                    SweepAxis::TransmitSnrDb => p.snr_db = v,
                    SweepAxis::MinRateRt => p.qos = Some(QosConstraint::new(v)?),
                }
                Ok(p)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
struct SweepPoint {
    snr_db: f64,
    far_distance: f64,
    qos: Option<QosConstraint>,
}

/// `P / sigma^2` from dB.
pub fn snr_from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// The RNG stream of one trial.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// One trial's value for one output label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub value: f64,
    pub outage: bool,
}

impl Sample {
    fn ok(value: f64) -> Self {
        Sample { value, outage: false }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Accumulator {
    n: usize,
    sum: f64,
    mean: f64,
    m2: f64,
    outages: usize,
}

impl Accumulator {
    fn push(&mut self, s: Sample) {
        self.n += 1;
        self.sum += s.value;
        let delta = s.value - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (s.value - self.mean);
        if s.outage {
            self.outages += 1;
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        if other.n == 0 {
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64 / n as f64);
        self.mean += delta * other.n as f64 / n as f64;
        self.sum += other.sum;
        self.outages += other.outages;
        self.n = n;
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2.max(0.0) / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

/// Per-trial context shared by all schemes at one sweep point.
struct TrialContext<'a> {
    spec: &'a ExperimentSpec,
    point: SweepPoint,
    channel: ChannelRealization,
    /// Extra fading draws on the same slow fading (CDI lower bounds).
    draws: Vec<ChannelRealization>,
}

impl TrialContext<'_> {
    fn total_power(&self) -> f64 {
        snr_from_db(self.point.snr_db) * self.spec.settings.noise_var
    }
}

fn build_context<'a>(spec: &'a ExperimentSpec, point: SweepPoint, trial: usize) -> Result<TrialContext<'a>> {
    let geom = &spec.settings.geometry;
    let mut rng = trial_rng(spec.seed, trial);
    let place = match spec.placement {
        PlacementModel::Fig2 => fig2_placement(geom, point.far_distance)?,
        PlacementModel::Rings => sample_ring_placement(geom, &mut rng),
    };
    let slow = geom.slow_fading(&place)?;
    let channel = sample_fading(&slow, &mut rng);
    let draws = match spec.csi_mode {
        CsiMode::CdiOnly => (0..spec.settings.fading_draws).map(|_| sample_fading(&slow, &mut rng)).collect(),
        CsiMode::InstantaneousCgi => Vec::new(),
    };
    Ok(TrialContext { spec, point, channel, draws })
}

fn qos_sample(out: &RateOutcome, qos: QosConstraint) -> Sample {
    if out.min_rate() >= qos.rate() {
        Sample::ok(out.sum_rate())
    } else {
        Sample { value: 0.0, outage: true }
    }
}

fn evaluate_cgi(ctx: &TrialContext, scheme: SchemeVariant) -> Result<Sample> {
    let settings = &ctx.spec.settings;
    let s2 = settings.noise_var;
    let total = ctx.total_power();
    let split = scheme.split(total, settings.center_fraction)?;
    let gains = ctx.channel.gain();
    let qos = match ctx.spec.objective {
        Objective::MaxMin => None,
        Objective::MaxSum => Some(ctx.point.qos.ok_or_else(|| Error::Config("maxsum needs a rate target".into()))?),
    };
    Ok(match scheme.kind {
        SchemeKind::ConventionalSingleSelection => {
            let out = rates_conventional_single_selection(&ctx.channel, &split, CsiMode::InstantaneousCgi, s2)?;
            match qos {
                None => Sample::ok(out.min_rate()),
                Some(q) => qos_sample(&out, q),
            }
        }
        SchemeKind::JtNoma => {
            let (link, _) = JtLink::instantaneous(gains, &split, s2)?;
            let objective = match qos {
                None => JtObjective::MaxMin,
                Some(q) => JtObjective::MaxSum(q),
            };
            let r = jt_beta_search(&link, total, objective, settings.beta_tolerance)?;
            Sample { value: r.objective, outage: r.outage }
        }
        kind => {
            let roles = order_users(&ctx.channel, CsiMode::InstantaneousCgi);
            let link = NomaLink::for_scheme(gains, gains, kind, split, roles, s2)?;
            let r = match qos {
                None => maxmin_cgi(&link)?,
                Some(q) => maxsum_cgi(&link, q),
            };
            Sample { value: r.objective, outage: r.outage }
        }
    })
}

/// `E[min(Z_1, Z_2)]` estimated as `min(E[Z_1], E[Z_2])` minus the sampled
/// gap `min(mean Z_1, mean Z_2) - mean min(Z_1, Z_2)`, which is never
/// negative. The estimate therefore never exceeds the closed-form bound.
fn min_rate_estimate(bound: f64, draws: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut s1, mut s2, mut smin, mut n) = (0.0, 0.0, 0.0, 0usize);
    for (z1, z2) in draws {
        s1 += z1;
        s2 += z2;
        smin += z1.min(z2);
        n += 1;
    }
    let n = n as f64;
    let gap = ((s1 / n).min(s2 / n) - smin / n).max(0.0);
    (bound - gap).max(0.0)
}

fn evaluate_cdi(ctx: &TrialContext, scheme: SchemeVariant) -> Result<Vec<Sample>> {
    let settings = &ctx.spec.settings;
    let s2 = settings.noise_var;
    let total = ctx.total_power();
    let split = scheme.split(total, settings.center_fraction)?;
    let slow: &GainMatrix = ctx.channel.slow();
    match scheme.kind {
        SchemeKind::ConventionalSingleSelection => {
            let out = ergodic_conventional_single_selection(slow, &split, s2)?;
            Ok(vec![Sample::ok(out.min_rate())])
        }
        SchemeKind::JtNoma => {
            let (link, roles) = JtLink::ergodic(slow, &split, s2)?;
            let r = jt_beta_search(&link, total, JtObjective::MaxMin, settings.beta_tolerance)?;
            let beta = r.meta.beta.expect("JT search reports beta");
            let bound = link.outcome(beta);
            let mut pairs = Vec::with_capacity(ctx.draws.len());
            for d in &ctx.draws {
                let o = JtLink::with_roles(d.gain(), &split, roles, s2)?.outcome(beta);
                pairs.push((o.z1, o.z2));
            }
            let lower = min_rate_estimate(bound.r1, pairs.into_iter()).min(bound.r2);
            Ok(vec![Sample::ok(r.objective), Sample::ok(lower)])
        }
        kind => {
            let link = ErgodicNomaLink::for_scheme(slow, kind, split, s2)?;
            let eps = (settings.bisection_epsilon * split.center).max(f64::MIN_POSITIVE);
            let r = maxmin_cdi_bisection(&link, eps)?;
            let p1 = r.p1.expect("max-min is always feasible");
            let bound = link.rates(p1);
            let roles = order_by_matrix(slow);
            let assist = RruAssist::for_scheme(kind, slow, roles.weak)?;
            let mut pairs = Vec::with_capacity(ctx.draws.len());
            for d in &ctx.draws {
                let o = NomaLink::new(d.gain(), roles, assist, split, s2)?.outcome(p1);
                pairs.push((o.z1, o.z2));
            }
            let lower = min_rate_estimate(bound.r1_ub, pairs.into_iter()).min(bound.r2);
            Ok(vec![Sample::ok(r.objective), Sample::ok(lower)])
        }
    }
}

/// Samples of one trial at one sweep point, in label order.
fn evaluate_trial(spec: &ExperimentSpec, point: SweepPoint, trial: usize, out: &mut Vec<Sample>) -> Result<()> {
    let ctx = build_context(spec, point, trial)?;
    for &scheme in &spec.schemes {
        match spec.csi_mode {
            CsiMode::InstantaneousCgi => out.push(evaluate_cgi(&ctx, scheme)?),
            CsiMode::CdiOnly => out.extend(evaluate_cdi(&ctx, scheme)?),
        }
    }
    Ok(())
}

/// Runs any valid experiment.
pub fn run_custom(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let points = spec.points()?;
    let labels = spec.labels();
    let cells = points.len() * labels.len();
    let chunks = spec.trials.div_ceil(CHUNK);

    let partials: Vec<Result<Vec<Accumulator>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Accumulator::default(); cells];
            let mut samples = Vec::with_capacity(labels.len());
            for trial in c * CHUNK..((c + 1) * CHUNK).min(spec.trials) {
                for (pi, &point) in points.iter().enumerate() {
                    samples.clear();
                    evaluate_trial(spec, point, trial, &mut samples)?;
                    if samples.len() != labels.len() {
                        return Err(Error::Internal("sample count does not match labels".into()));
                    }
                    for (li, &s) in samples.iter().enumerate() {
                        acc[pi * labels.len() + li].push(s);
                    }
                }
            }
            Ok(acc)
        })
        .collect();

    let mut total = vec![Accumulator::default(); cells];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part?.iter()) {
            t.merge(p);
        }
    }

    let mut rows = Vec::with_capacity(cells);
    for (pi, &v) in spec.sweep_values.iter().enumerate() {
        for (li, label) in labels.iter().enumerate() {
            let a = &total[pi * labels.len() + li];
            rows.push(ResultRow {
                sweep_value: v,
                scheme: label.clone(),
                metric_mean: a.sum / a.n as f64,
                metric_stderr: a.stderr(),
                outage_rate: a.outages as f64 / a.n as f64,
                trials: a.n,
            });
        }
    }
    Ok(rows)
}

fn require(spec: &ExperimentSpec, csi: CsiMode, objective: Objective, axis: SweepAxis) -> Result<()> {
    if spec.csi_mode != csi || spec.objective != objective || spec.sweep_axis != axis {
        return Err(Error::Config(format!(
            "{}: expected {csi:?} / {objective:?} / {axis:?}",
            spec.name
        )));
    }
    Ok(())
}

pub fn run_fig2(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    require(spec, CsiMode::InstantaneousCgi, Objective::MaxMin, SweepAxis::FarDistance)?;
    run_custom(spec)
}

pub fn run_fig3(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    require(spec, CsiMode::InstantaneousCgi, Objective::MaxMin, SweepAxis::TransmitSnrDb)?;
    run_custom(spec)
}

pub fn run_fig4(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    require(spec, CsiMode::CdiOnly, Objective::MaxMin, SweepAxis::TransmitSnrDb)?;
    run_custom(spec)
}

pub fn run_fig5(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    require(spec, CsiMode::InstantaneousCgi, Objective::MaxSum, SweepAxis::MinRateRt)?;
    run_custom(spec)
}

pub fn run_fig6(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    require(spec, CsiMode::InstantaneousCgi, Objective::MaxSum, SweepAxis::TransmitSnrDb)?;
    run_custom(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mut spec: ExperimentSpec, trials: usize) -> ExperimentSpec {
        spec.trials = trials;
        spec
    }

    #[test]
    fn scheme_variant_tokens() {
        for s in SchemeVariant::all() {
            assert_eq!(s.token().parse::<SchemeVariant>().unwrap(), s);
        }
        assert!("noma_blanket_equal".parse::<SchemeVariant>().is_err());
        assert_eq!(SchemeVariant::all().len(), 6);
    }

    #[test]
    fn grids() {
        let d = fig2_distances();
        assert_eq!(d.len(), 15);
        assert!((d[14] - 1.0).abs() < 1e-12);
        assert_eq!(snr_grid_db(), vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]);
        assert_eq!(rt_grid().len(), 13);
    }

    #[test]
    fn presets_validate() {
        for s in [ExperimentSpec::fig2(), ExperimentSpec::fig3(), ExperimentSpec::fig4(), ExperimentSpec::fig5(), ExperimentSpec::fig6()] {
            s.validate().unwrap();
        }
    }

    #[test]
    fn invalid_specs() {
        let mut s = ExperimentSpec::fig4();
        s.objective = Objective::MaxSum;
        s.qos = Some(QosConstraint::new(1.0).unwrap());
        assert!(matches!(run_custom(&s), Err(Error::Config(_))));
        let mut s = ExperimentSpec::fig3();
        s.trials = 0;
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::fig3();
        s.sweep_values = vec![0.0, 10.0, 5.0];
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::fig6();
        s.qos = None;
        assert!(s.validate().is_err());
        assert!(run_fig2(&ExperimentSpec::fig3()).is_err());
    }

    #[test]
    fn rows_shape_and_outage_accounting() {
        let spec = small(ExperimentSpec::fig6(), 40);
        let rows = run_fig6(&spec).unwrap();
        assert_eq!(rows.len(), 7 * 6);
        for r in &rows {
            assert_eq!(r.trials, 40);
            assert!((0.0..=1.0).contains(&r.outage_rate));
            assert!(r.metric_stderr >= 0.0);
        }
    }

    #[test]
    fn cdi_bounds_are_ordered() {
        let mut spec = small(ExperimentSpec::fig4(), 8);
        spec.settings.fading_draws = 20;
        let rows = run_fig4(&spec).unwrap();
        assert_eq!(rows.len(), 7 * 10);
        for pair in rows.iter().filter(|r| r.scheme.ends_with("_upper")) {
            let lower = pair.scheme.replace("_upper", "_lower");
            let low = rows.iter().find(|r| r.scheme == lower && r.sweep_value == pair.sweep_value).unwrap();
            assert!(low.metric_mean <= pair.metric_mean + 1e-12, "{} at {}", pair.scheme, pair.sweep_value);
        }
    }

    #[test]
    fn chunked_reduction_matches_serial() {
        let mut a = Accumulator::default();
        let mut parts = [Accumulator::default(), Accumulator::default()];
        for k in 0..100 {
            let s = Sample::ok((k as f64 * 0.37).sin());
            a.push(s);
            parts[k / 60].push(s);
        }
        let mut m = parts[0];
        m.merge(&parts[1]);
        assert!((m.stderr() - a.stderr()).abs() < 1e-14);
        assert_eq!(m.n, 100);
    }
}
