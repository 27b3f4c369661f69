use std::process::Command;

use volterra_core::asymptotics::Sequence;
use volterra_core::stochastic::{ForcingKind, Statistic, TailFamily};
use volterra_core::{KernelSpec, Nonlinearity};
use volterra_lab::{run_experiment, EnsembleSection, ExperimentConfig, Mode, Report};

fn config(mode: Mode, horizon: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::from_json(&format!(r#"{{"horizon": {horizon}}}"#)).unwrap();
    c.mode = Some(mode);
    c
}

fn power(exponent: f64) -> Sequence {
    Sequence::Power {
        scale: 1.0,
        exponent,
        alternating: false,
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_volterra-lab"))
}

#[test]
fn zero_kernel_solution_is_the_forcing() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Mode::Solve, 20);
    c.forcing = Some(ForcingKind::Deterministic(power(1.0)));
    c.xi = 3.5;
    c.outputs.dir = Some(dir.path().to_path_buf());
    let r = run_experiment(&c).unwrap();
    assert!(r.all_passed());
    let text = std::fs::read_to_string(dir.path().join("x.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,value"));
    for (n, line) in lines.enumerate() {
        let (idx, v) = line.split_once(',').unwrap();
        assert_eq!(idx.parse::<usize>().unwrap(), n);
        let want = if n == 0 { 3.5 } else { n as f64 };
        assert_eq!(v.parse::<f64>().unwrap(), want);
    }
    assert!(dir.path().join("report.json").exists());
    assert_eq!(r.series_files["x"], dir.path().join("x.csv"));
    assert!(r.series_files["forcing"].exists());
}

#[test]
fn growth2_multiplier_system() {
    let mut c = config(Mode::VerifyGrowth2, 200);
    c.kernel = KernelSpec::Geometric {
        scale: 0.3,
        ratio: 0.5,
        len: 40,
    };
    c.forcing = Some(ForcingKind::Deterministic(Sequence::Exponential {
        rate: 2f64.ln(),
    }));
    let r = run_experiment(&c).unwrap();
    assert!(r.statistics["residual"] < 1e-6);
    assert!((r.statistics["l_theory"] - 1.25).abs() < 1e-12);
    assert!(r.all_passed());
}

#[test]
fn spectrum_of_expanding_kernel() {
    let mut c = config(Mode::Spectrum, 50);
    c.kernel = KernelSpec::Single(2.0);
    let r = run_experiment(&c).unwrap();
    assert_eq!(r.verdicts["summability"], "not_summable");
    assert!((r.statistics["max_modulus"] - 2.0).abs() < 1e-12);
}

#[test]
fn identity_nonlinearity_tracks_exactly() {
    let mut c = config(Mode::VerifyNonlinear, 2000);
    c.kernel = KernelSpec::Single(0.5);
    c.nonlinearity = Some(Nonlinearity::Identity);
    c.forcing = Some(ForcingKind::Deterministic(power(1.0)));
    c.scaling = Some(power(1.0));
    let r = run_experiment(&c).unwrap();
    assert_eq!(r.statistics["gap_final_block_max"], 0.0);
    assert!(r.series["gap_over_a"].values().iter().all(|&v| v == 0.0));
    assert!(r.all_passed(), "{:?}", r.checks);
}

#[test]
fn solow_system_is_finite_positive_on_its_scale() {
    let mut c = config(Mode::VerifyNonlinear, 1024);
    c.kernel = KernelSpec::Single(0.5);
    c.nonlinearity = Some(Nonlinearity::Solow {
        delta: 0.1,
        savings: 0.2,
        production: volterra_core::Production::Power { theta: 0.5 },
    });
    let g = Sequence::Exponential { rate: 1.05f64.ln() };
    c.forcing = Some(ForcingKind::Deterministic(g.clone()));
    c.scaling = Some(g);
    let r = run_experiment(&c).unwrap();
    assert_eq!(r.verdicts["slope"], "flagged");
    assert_eq!(r.verdicts["x_class"], "finite_positive");
    assert_eq!(r.verdicts["forcing_class"], "finite_positive");
    assert!(r.all_passed(), "{:?} {:?}", r.checks, r.statistics);
}

#[test]
fn fluctuation_classes_are_genuine() {
    for (forcing, scale, class) in [
        (power(0.0), power(2.0), "zero"),
        (power(1.0), power(1.0), "finite_positive"),
        (power(2.0), power(1.0), "infinite"),
    ] {
        let mut c = config(Mode::VerifyFluct, 10_000);
        c.kernel = KernelSpec::Single(0.5);
        c.forcing = Some(ForcingKind::Deterministic(forcing));
        c.scaling = Some(scale);
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.verdicts["x_class"], class);
        assert_eq!(r.verdicts["forcing_class"], class);
        assert!(r.all_passed(), "{class}: {:?}", r.checks);
    }
}

#[test]
fn echoed_config_reproduces_statistics_bitwise() {
    let mut c = config(Mode::Ensemble, 5000);
    c.kernel = KernelSpec::Single(0.5);
    c.forcing = Some(ForcingKind::Iid(TailFamily::Normal { sigma: 1.0 }));
    c.seed = 42;
    c.ensemble = Some(EnsembleSection {
        paths: 8,
        statistic: Statistic::PhiAverage {
            phi: volterra_core::asymptotics::ConvexFunctional::Power { p: 2.0 },
        },
        band: (1.0, 1.7),
        min_pass_fraction: 0.5,
        median_band: None,
    });
    let first = run_experiment(&c).unwrap();
    let echoed: Report = serde_json::from_str(&first.to_json()).unwrap();
    assert_eq!(echoed.config, c);
    let second = run_experiment(&echoed.config).unwrap();
    assert_eq!(first.statistics.len(), second.statistics.len());
    for (k, v) in &first.statistics {
        assert_eq!(v.to_bits(), second.statistics[k].to_bits(), "{k}");
    }
    assert_eq!(first.checks, second.checks);
}

#[test]
fn report_round_trips_through_json() {
    let mut c = config(Mode::Spectrum, 100);
    c.kernel = KernelSpec::Explicit {
        coefficients: vec![0.3, 0.2],
        tail_bound: 0.0,
    };
    let r = run_experiment(&c).unwrap();
    let back: Report = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back.checks, r.checks);
    assert_eq!(back.verdicts, r.verdicts);
    assert_eq!(back.config, r.config);
    assert_eq!(back.version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(
        &good,
        r#"{"horizon": 200, "kernel": {"single": 0.5},
            "forcing": {"deterministic": {"exponential": {"rate": 0.6931471805599453}}}}"#,
    )
    .unwrap();
    let status = bin()
        .args(["verify-growth2", "--config"])
        .arg(&good)
        .output()
        .unwrap();
    assert_eq!(
        status.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );

    let strict = dir.path().join("strict.json");
    std::fs::write(
        &strict,
        r#"{"horizon": 20, "kernel": {"single": 0.5}, "tolerances": {"growth2": 1e-300},
            "forcing": {"deterministic": {"exponential": {"rate": 0.6931471805599453}}}}"#,
    )
    .unwrap();
    let out = bin()
        .args(["verify-growth2", "--config"])
        .arg(&strict)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ratio_matches_multiplier"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"horizon": 20, "kernal": {"single": 0.5}}"#).unwrap();
    let out = bin()
        .args(["solve", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kernal"));

    let out = bin()
        .args(["spectrum", "--config"])
        .arg(&good)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let mismatch = dir.path().join("mismatch.json");
    std::fs::write(&mismatch, r#"{"mode": "solve", "horizon": 20}"#).unwrap();
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(&mismatch)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_directory_from_environment_and_seed_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("iid.json");
    std::fs::write(
        &cfg,
        r#"{"horizon": 100, "kernel": {"single": 0.5}, "forcing": {"iid": {"family": "normal", "sigma": 1.0}}}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["solve", "--seed", "5", "--config"])
        .arg(&cfg)
        .env("VOLTERRA_LAB_OUT", &out_dir)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["config"]["seed"], 5);
    assert!(report["series_files"]["x"]
        .as_str()
        .unwrap()
        .ends_with("x.csv"));
    assert!(out_dir.join("forcing.csv").exists());
}

#[test]
fn catalogue_listing_names_all_growth_members() {
    let out = bin().arg("--list-catalogue").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for i in 1..=10 {
        assert!(text.contains(&format!("H{i} ")), "H{i} missing");
    }
    assert!(text.contains("geometric") && text.contains("solow") && text.contains("sqrt_two_log"));
}
