use std::process::{Command, Output};

fn noma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noma-das")).args(args).output().expect("spawn noma-das")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_lists_subcommands() {
    let o = noma(&["--help"]);
    assert!(o.status.success());
    for sub in ["fig2", "fig3", "fig4", "fig5", "fig6", "custom", "selftest"] {
        assert!(stdout(&o).contains(sub), "{sub} missing from help");
    }
}

#[test]
fn fig5_to_file_with_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig5.csv");
    let o = noma(&["fig5", "--trials", "200", "--rt", "0,1.5", "--out", out.to_str().unwrap(), "--plot"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 6);
    let svg = std::fs::read_to_string(out.with_extension("svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("conventional_noma"));
}

#[test]
fn scheme_filter_and_single_snr() {
    let o = noma(&["fig2", "--trials", "100", "--scheme", "noma_blanket,jt_noma", "--snr-db", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.lines().skip(1).all(|l| l.contains(",noma_blanket,") || l.contains(",jt_noma,")));
    assert_eq!(text.lines().count(), 1 + 2 * 15);
}

#[test]
fn custom_cdi_sweep() {
    let o = noma(&[
        "custom", "--csi", "cdi", "--sweep", "distance", "--placement", "fig2", "--values", "0.5,0.9", "--trials", "50",
        "--scheme", "noma_blanket,conventional_single_selection",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("noma_blanket_upper") && text.contains("noma_blanket_lower"));
    assert_eq!(text.lines().count(), 1 + 2 * 3);
}

#[test]
fn config_file_overrides_defaults_and_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[run]\ntrials = 30\nseed = 9\n[power]\ncenter_fraction = 0.3\n").unwrap();
    let a = noma(&["fig6", "--config", cfg.to_str().unwrap(), "--snr-db", "10"]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert!(stdout(&a).lines().nth(1).unwrap().ends_with(",30"));
    let b = noma(&["fig6", "--config", cfg.to_str().unwrap(), "--snr-db", "10", "--trials", "40"]);
    assert!(stdout(&b).lines().nth(1).unwrap().ends_with(",40"));

    std::fs::write(&cfg, "[run]\ntrails = 30\n").unwrap();
    let bad = noma(&["fig6", "--config", cfg.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("trails"));
}

#[test]
fn bad_arguments_fail_cleanly() {
    let o = noma(&["fig3", "--rt", "1", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("maxsum"));
    let o = noma(&["fig2", "--snr-db", "10,20", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(2));
    let o = noma(&["fig3", "--scheme", "nope"]);
    assert!(!o.status.success());
    let o = noma(&["fig3", "--trials", "10", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/dir/x.csv"));
}

#[test]
fn selftest_passes() {
    let o = noma(&["selftest", "--instances", "20"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 3);
}
