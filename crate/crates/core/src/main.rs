use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use noma_das::alloc::{brute_force_allocate, maxmin_cgi};
use noma_das::geometry::{order_users, sample_channel, sample_ring_placement, CsiMode, PlacementModel};
use noma_das::harness::{
    self, emit_csv, plot, run_custom, write_csv, ConfigFile, ExperimentSpec, Objective, ResultRow,
    SchemeVariant, Settings, SweepAxis,
};
use noma_das::rates::{NomaLink, PowerSplit, SchemeKind};
use noma_das::specfun::{exp_integral_by_quadrature, exp_integral_e};
use noma_das::{Error, Result};

/// NOMA power allocation in a distributed antenna system: Monte-Carlo sweeps.
#[derive(Parser)]
#[command(name = "noma-das", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Max-min rate versus far-user distance (CGI, 10 dB)
    Fig2(RunArgs),
    /// Max-min rate versus transmit SNR (CGI)
    Fig3(RunArgs),
    /// Max-min upper and lower bounds versus transmit SNR (CDI)
    Fig4(RunArgs),
    /// Sum rate versus minimum rate R_t (CGI, 10 dB)
    Fig5(RunArgs),
    /// Sum rate versus transmit SNR (CGI, R_t = 2)
    Fig6(RunArgs),
    /// Any sweep
    Custom(CustomArgs),
    /// Check the special functions and the closed-form allocator against brute force
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Monte-Carlo trials per sweep point
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Transmit SNR values in dB, comma separated
    #[arg(long = "snr-db", value_delimiter = ',', allow_negative_numbers = true)]
    snr_db: Vec<f64>,
    /// Minimum-rate targets in bits/s/Hz, comma separated
    #[arg(long, value_delimiter = ',')]
    rt: Vec<f64>,
    /// Schemes to run, comma separated (default: all)
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<SchemeVariant>,
    /// Also write an SVG chart next to the CSV
    #[arg(long)]
    plot: bool,
    /// TOML configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct CustomArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value = "custom")]
    name: String,
    /// cgi or cdi
    #[arg(long, default_value = "cgi")]
    csi: CsiMode,
    /// maxmin or maxsum
    #[arg(long, default_value = "maxmin")]
    objective: Objective,
    /// fig2 (users on the RRU ray) or rings (random)
    #[arg(long, default_value = "rings")]
    placement: PlacementModel,
    /// distance, snr or rt
    #[arg(long, default_value = "snr")]
    sweep: SweepAxis,
    /// Sweep values (default: taken from --snr-db / --rt or the standard grid)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    values: Vec<f64>,
    /// Far-user distance for the fig2 placement when not sweeping distance
    #[arg(long)]
    far_distance: Option<f64>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Random allocator instances to check
    #[arg(long, default_value_t = 50)]
    instances: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

fn single(values: &[f64], flag: &str, name: &str) -> Result<Option<f64>> {
    match values {
        [] => Ok(None),
        [v] => Ok(Some(*v)),
        _ => Err(Error::Config(format!("{name} takes a single {flag} value"))),
    }
}

/// Applies config and flags to a preset. Flags win over the config file.
fn configure(mut spec: ExperimentSpec, args: &RunArgs, config: &ConfigFile) -> Result<ExperimentSpec> {
    spec.settings = config.settings()?;
    if let Some(t) = args.trials.or(config.run.trials) {
        spec.trials = t;
    }
    if let Some(s) = args.seed.or(config.run.seed) {
        spec.seed = s;
    }
    if !args.scheme.is_empty() {
        spec.schemes = args.scheme.clone();
    }
    if spec.sweep_axis == SweepAxis::TransmitSnrDb {
        if !args.snr_db.is_empty() {
            spec.sweep_values = args.snr_db.clone();
        }
    } else if let Some(v) = single(&args.snr_db, "--snr-db", &spec.name)? {
        spec.snr_db = v;
    }
    if spec.sweep_axis == SweepAxis::MinRateRt {
        if !args.rt.is_empty() {
            spec.sweep_values = args.rt.clone();
        }
    } else if let Some(v) = single(&args.rt, "--rt", &spec.name)? {
        if spec.objective != Objective::MaxSum {
            return Err(Error::Config(format!("{}: --rt only applies to the maxsum objective", spec.name)));
        }
        spec.qos = Some(noma_das::alloc::QosConstraint::new(v)?);
    }
    Ok(spec)
}

fn custom_spec(args: &CustomArgs, config: &ConfigFile) -> Result<ExperimentSpec> {
    let base = match args.sweep {
        SweepAxis::FarDistance => ExperimentSpec::fig2(),
        SweepAxis::TransmitSnrDb => ExperimentSpec::fig3(),
        SweepAxis::MinRateRt => ExperimentSpec::fig5(),
    };
    let mut spec = ExperimentSpec {
        name: args.name.clone(),
        csi_mode: args.csi,
        objective: args.objective,
        placement: args.placement,
        ..base
    };
    if let Some(d) = args.far_distance {
        spec.far_distance = d;
    }
    if spec.objective == Objective::MaxSum && spec.sweep_axis != SweepAxis::MinRateRt {
        spec.qos = Some(noma_das::alloc::QosConstraint::new(harness::DEFAULT_RT)?);
    }
    let mut spec = configure(spec, &args.run, config)?;
    if !args.values.is_empty() {
        spec.sweep_values = args.values.clone();
    }
    Ok(spec)
}

fn axis_label(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::FarDistance => "far-user distance",
        SweepAxis::TransmitSnrDb => "transmit SNR (dB)",
        SweepAxis::MinRateRt => "R_t (bits/s/Hz)",
    }
}

fn metric_label(objective: Objective) -> &'static str {
    match objective {
        Objective::MaxMin => "average max-min rate (bits/s/Hz)",
        Objective::MaxSum => "average sum rate (bits/s/Hz)",
    }
}

fn run(spec: ExperimentSpec, args: &RunArgs, config: &ConfigFile) -> Result<()> {
    let threads = args.threads.or(config.run.threads);
    let rows: Vec<ResultRow> = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| run_custom(&spec))?,
        None => run_custom(&spec)?,
    };
    match &args.out {
        Some(path) => emit_csv(&rows, path)?,
        None => write_csv(&rows, io::stdout().lock()).map_err(|source| Error::Io { path: "<stdout>".into(), source })?,
    }
    if args.plot {
        let svg = match &args.out {
            Some(p) => p.with_extension("svg"),
            None => PathBuf::from(format!("{}.svg", spec.name)),
        };
        plot::write_svg(&rows, &svg, &spec.name, axis_label(spec.sweep_axis), metric_label(spec.objective))?;
    }
    Ok(())
}

fn selftest(args: &SelftestArgs) -> Result<bool> {
    let settings: Settings = load_config(args.config.as_deref())?.settings()?;
    let mut ok = true;
    let mut report = |name: &str, pass: bool, detail: String| {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        ok &= pass;
    };

    let mut worst = 0.0f64;
    let mut worst_recurrence = 0.0f64;
    for n in 1..=7u32 {
        for k in 0..=25 {
            let x = 10f64.powf(-3.0 + 5.0 * k as f64 / 25.0);
            let e = exp_integral_e(n, x)?;
            let q = exp_integral_by_quadrature(n, x)?;
            worst = worst.max(((e - q) / q).abs());
            let next = exp_integral_e(n + 1, x)?;
            let residual = (n as f64 * next - ((-x).exp() - x * e)).abs() / (-x).exp().max(x * e);
            worst_recurrence = worst_recurrence.max(residual);
        }
    }
    report("exp_integral_vs_quadrature", worst < 1e-9, format!("max relative error {worst:.3e}"));
    report("exp_integral_recurrence", worst_recurrence < 1e-9, format!("max residual {worst_recurrence:.3e}"));

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut worst_gap = 0.0f64;
    for i in 0..args.instances {
        let scheme = [SchemeKind::NomaSingleSelection, SchemeKind::NomaBlanket, SchemeKind::ConventionalNoma][i % 3];
        let place = sample_ring_placement(&settings.geometry, &mut rng);
        let ch = sample_channel(&settings.geometry, &place, &mut rng);
        let total = harness::snr_from_db(rng.gen_range(0.0..30.0)) * settings.noise_var;
        let split = if scheme == SchemeKind::ConventionalNoma {
            PowerSplit::conventional(total)?
        } else {
            PowerSplit::das(total, settings.center_fraction)?
        };
        let roles = order_users(&ch, CsiMode::InstantaneousCgi);
        let link = NomaLink::for_scheme(ch.gain(), ch.gain(), scheme, split, roles, settings.noise_var)?;
        let closed = maxmin_cgi(&link)?.objective;
        let grid = brute_force_allocate(|p| Some(link.outcome(p).min_rate()), split.center, settings.grid_points, true)?;
        worst_gap = worst_gap.max(grid.objective - closed);
    }
    report(
        "maxmin_closed_form_vs_grid",
        worst_gap < 1e-6,
        format!("{} instances, largest grid excess {worst_gap:.3e}", args.instances),
    );
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Selftest(args) => selftest(args).map(|ok| if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE }),
        command => {
            let (preset, args) = match command {
                Command::Fig2(a) => (Some(ExperimentSpec::fig2()), a),
                Command::Fig3(a) => (Some(ExperimentSpec::fig3()), a),
                Command::Fig4(a) => (Some(ExperimentSpec::fig4()), a),
                Command::Fig5(a) => (Some(ExperimentSpec::fig5()), a),
                Command::Fig6(a) => (Some(ExperimentSpec::fig6()), a),
                Command::Custom(c) => (None, &c.run),
                Command::Selftest(_) => unreachable!(),
            };
            load_config(args.config.as_deref())
                .and_then(|config| {
                    let spec = match (preset, command) {
                        (Some(p), _) => configure(p, args, &config)?,
                        (None, Command::Custom(c)) => custom_spec(c, &config)?,
                        _ => unreachable!(),
                    };
                    run(spec, args, &config)
                })
                .map(|()| ExitCode::SUCCESS)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
