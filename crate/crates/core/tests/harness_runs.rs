use std::collections::HashMap;

use noma_das::alloc::QosConstraint;
use noma_das::harness::{
    csv::HEADER, emit_csv, run_custom, run_fig3, run_fig5, write_csv, ExperimentSpec, ResultRow, SchemeVariant,
};
use noma_das::rates::SchemeKind;

fn small(mut spec: ExperimentSpec, trials: usize) -> ExperimentSpec {
    spec.trials = trials;
    spec
}

fn keyed(rows: &[ResultRow]) -> HashMap<(u64, String), ResultRow> {
    rows.iter().map(|r| ((r.sweep_value.to_bits(), r.scheme.clone()), r.clone())).collect()
}

#[test]
fn presets_equal_custom_runs() {
    let spec = small(ExperimentSpec::fig3(), 300);
    assert_eq!(run_fig3(&spec).unwrap(), run_custom(&spec).unwrap());
    assert!(run_fig5(&spec).is_err());
}

#[test]
fn half_the_trials_agrees_and_stderr_shrinks() {
    let mut spec = small(ExperimentSpec::fig3(), 4_000);
    spec.sweep_values = vec![10.0, 20.0];
    let full = run_custom(&spec).unwrap();
    spec.trials = 2_000;
    let half = keyed(&run_custom(&spec).unwrap());
    for r in &full {
        let h = &half[&(r.sweep_value.to_bits(), r.scheme.clone())];
        assert!((r.metric_mean - h.metric_mean).abs() <= 4.0 * h.metric_stderr, "{r:?} vs {h:?}");
        let ratio = r.metric_stderr / h.metric_stderr;
        assert!((ratio / std::f64::consts::FRAC_1_SQRT_2 - 1.0).abs() < 0.2, "{}: stderr ratio {ratio}", r.scheme);
    }
}

#[test]
fn outage_accounting() {
    let mut spec = small(ExperimentSpec::fig5(), 500);
    spec.sweep_values = vec![0.0, 2.0, 50.0];
    let rows = run_custom(&spec).unwrap();
    for r in &rows {
        assert!((0.0..=1.0).contains(&r.outage_rate));
        assert_eq!(r.trials, 500);
        if r.sweep_value == 0.0 {
            assert_eq!(r.outage_rate, 0.0, "{}", r.scheme);
        }
        if r.sweep_value == 50.0 {
            assert_eq!(r.outage_rate, 1.0, "{}", r.scheme);
            assert_eq!(r.metric_mean, 0.0);
        }
    }
    // outages count as zero, so the mean is at most (1 - outage) times the best rate
    let mid: Vec<_> = rows.iter().filter(|r| r.sweep_value == 2.0).collect();
    assert!(mid.iter().any(|r| r.outage_rate > 0.0 && r.outage_rate < 1.0));
}

#[test]
fn scheme_subset_and_single_rate_target() {
    let mut spec = small(ExperimentSpec::fig6(), 200);
    spec.schemes = vec![SchemeVariant::new(SchemeKind::NomaBlanket), SchemeVariant::equal_split()];
    spec.qos = Some(QosConstraint::new(1.0).unwrap());
    let rows = run_custom(&spec).unwrap();
    assert_eq!(rows.len(), 2 * spec.sweep_values.len());
    assert_eq!(rows[0].scheme, "noma_blanket");
    assert_eq!(rows[1].scheme, "conventional_single_selection_equal");
}

#[test]
fn invalid_specs_are_rejected() {
    let mut spec = small(ExperimentSpec::fig3(), 0);
    assert!(run_custom(&spec).is_err());
    spec.trials = 10;
    spec.sweep_values.clear();
    assert!(run_custom(&spec).is_err());
}

#[test]
fn csv_round_trips_through_a_csv_reader() {
    let rows = run_custom(&small(ExperimentSpec::fig4(), 100)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig4.csv");
    emit_csv(&rows, &path).unwrap();

    let mut reader = csv::Reader::from_path(&path).unwrap();
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>().join(","), HEADER);
    let mut n = 0;
    for (rec, want) in reader.records().zip(&rows) {
        let rec = rec.unwrap();
        let num = |i: usize| rec[i].parse::<f64>().unwrap();
        assert_eq!(&rec[1], want.scheme);
        for (got, want) in [(num(0), want.sweep_value), (num(2), want.metric_mean), (num(3), want.metric_stderr), (num(4), want.outage_rate)] {
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300), "{got} vs {want}");
        }
        assert_eq!(rec[5].parse::<usize>().unwrap(), want.trials);
        n += 1;
    }
    assert_eq!(n, rows.len());

    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    assert_eq!(buf, std::fs::read(&path).unwrap());
}
