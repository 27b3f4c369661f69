use std::time::Instant;

use volterra_core::asymptotics::{
    convolution_bound, estimate_lambda_log, estimate_limsup_ratio, extract_almost_periodic,
    fluctuation_report, phi_average_bounds, time_average, verify_growth2, verify_growth3,
    ConvexFunctional, LimsupEstimate, PeriodicVerdict, ScalingModel,
};
use volterra_core::spectral::{multiplier_l, rho_of_lambda, spectral_report, Summability};
use volterra_core::stochastic::{
    classify_tail, ensemble_verify, envelope_sums, EnsembleSystem, Factor, ForcingGenerator,
    ForcingKind, TailVerdict,
};
use volterra_core::{
    recover_forcing_nonlinear, resolvent, solve_by_representation, solve_linear_log,
    solve_nonlinear, Kernel, LogTrajectory, Nonlinearity, Trajectory,
};

use crate::config::{ExperimentConfig, Mode};
use crate::error::{CliError, Context};
use crate::nonlinear::verify_nonlinear;
use crate::report::Report;

/// Above this horizon the quadratic-cost resolvent cross-check in solve mode
/// is skipped.
pub const REPRESENTATION_CHECK_LIMIT: usize = 20_000;

/// Noise allowance when checking that dyadic residual sups do not grow.
const DECAY_ABS_TOL: f64 = 1e-12;

/// Runs one experiment and, when `outputs.dir` is set, writes its report and
/// series there.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report, CliError> {
    let mode = config.mode()?;
    if config.horizon == 0 {
        return Err(CliError::Usage("horizon must be at least 1".into()));
    }
    let started = Instant::now();
    let mut report = Report::new(mode, config.clone());
    let cx = Ctx { cfg: config, mode };
    match mode {
        Mode::Solve => solve(&cx, &mut report),
        Mode::Spectrum => spectrum(&cx, &mut report),
        Mode::Classify => classify(&cx, &mut report),
        Mode::VerifyGrowth2 => growth2(&cx, &mut report),
        Mode::VerifyGrowth3 => growth3(&cx, &mut report),
        Mode::VerifyPeriodic => periodic(&cx, &mut report),
        Mode::VerifyErgodic => ergodic(&cx, &mut report),
        Mode::VerifyFluct => fluct(&cx, &mut report),
        Mode::VerifyPhi => phi(&cx, &mut report),
        Mode::Envelope => envelope(&cx, &mut report),
        Mode::Ensemble => ensemble(&cx, &mut report),
        Mode::VerifyNonlinear => verify_nonlinear(&cx, &mut report),
    }?;
    report.wall_clock_seconds = started.elapsed().as_secs_f64();
    if let Some(dir) = &config.outputs.dir {
        report.write(dir, config.outputs.write_series)?;
    }
    log::info!(
        "{mode}: {} checks, {} failed",
        report.checks.len(),
        report.failed_checks().len()
    );
    Ok(report)
}

pub(crate) struct Ctx<'a> {
    pub cfg: &'a ExperimentConfig,
    pub mode: Mode,
}

impl Ctx<'_> {
    fn missing(&self, what: &str) -> CliError {
        CliError::Usage(format!("{} mode needs a `{what}` section", self.mode))
    }

    pub fn kernel(&self) -> Result<Kernel, CliError> {
        self.cfg.kernel.build().in_mode(self.mode)
    }

    pub fn forcing(&self) -> Result<&ForcingKind, CliError> {
        self.cfg
            .forcing
            .as_ref()
            .ok_or_else(|| self.missing("forcing"))
    }

    pub fn generator(&self) -> Result<ForcingGenerator, CliError> {
        Ok(ForcingGenerator::new(
            self.forcing()?.clone(),
            self.cfg.seed,
        ))
    }

    pub fn forcing_log(&self) -> Result<LogTrajectory, CliError> {
        self.generator()?
            .generate_log(self.cfg.horizon)
            .in_mode(self.mode)
    }

    pub fn forcing_plain(&self) -> Result<Trajectory, CliError> {
        self.generator()?
            .generate(self.cfg.horizon)
            .in_mode(self.mode)
    }

    pub fn scale(&self) -> Result<ScalingModel, CliError> {
        let seq = self
            .cfg
            .scaling
            .as_ref()
            .ok_or_else(|| self.missing("scaling"))?;
        ScalingModel::from_sequence(seq, self.cfg.horizon).in_mode(self.mode)
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity, CliError> {
        let f = self
            .cfg
            .nonlinearity
            .clone()
            .unwrap_or(Nonlinearity::Identity);
        f.validate().in_mode(self.mode)?;
        Ok(f)
    }

    fn linear_only(&self, f: &Nonlinearity) -> Result<(), CliError> {
        if f.is_identity() {
            Ok(())
        } else {
            Err(CliError::Usage(format!(
                "{} mode solves the linear equation only",
                self.mode
            )))
        }
    }

    fn solve_log(&self, kernel: &Kernel, h: &LogTrajectory) -> Result<LogTrajectory, CliError> {
        solve_linear_log(kernel, h, self.cfg.xi, self.cfg.horizon).in_mode(self.mode)
    }
}

/// `ln|v|` of a log-form trajectory, for output.
fn ln_abs(t: &LogTrajectory) -> Trajectory {
    let values = t.values().iter().map(|v| v.ln_abs).collect();
    Trajectory::new(t.start(), values).expect("log trajectory is non-empty")
}

/// Max of `|a - b| / max(1, |a|, |b|, |scale|)` over the common range.
pub(crate) fn max_relative_gap(a: &Trajectory, b: &Trajectory, scale: Option<&Trajectory>) -> f64 {
    let Ok((lo, hi)) = a.common_range(b) else {
        return f64::INFINITY;
    };
    (lo..=hi)
        .map(|n| {
            let (u, v) = (a.at_or_zero(n), b.at_or_zero(n));
            let s = scale.map_or(0.0, |s| s.at_or_zero(n).abs());
            (u - v).abs() / 1f64.max(u.abs()).max(v.abs()).max(s)
        })
        .fold(0.0, f64::max)
}

fn snake<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::from("?"),
    }
}

fn record_limsup(report: &mut Report, name: &str, est: &LimsupEstimate) {
    report.stat(&format!("{name}_limsup"), est.value_or_inf());
    report.stat(&format!("{name}_window_max"), est.window_max);
    report.verdict(&format!("{name}_class"), snake(&est.classification));
}

fn solve(cx: &Ctx, report: &mut Report) -> Result<(), CliError> {
    let kernel = cx.kernel()?;
    let f = cx.nonlinearity()?;
    let n = cx.cfg.horizon;
    if cx.cfg.log_domain {
        cx.linear_only(&f)?;
        let h = cx.forcing_log()?;
        let x = cx.solve_log(&kernel, &h)?;
        let last = x.get(n).expect("solution covers the horizon");
        report.stat("x_ln_abs_last", last.ln_abs);
        report.stat("x_sign_last", f64::from(last.sign));
        report.add_series("ln_abs_x", ln_abs(&x));
        report.add_series("ln_abs_forcing", ln_abs(&h));
        return Ok(());
    }
    let h = cx.forcing_plain()?;
    let x = solve_nonlinear(&kernel, &f, &h, cx.cfg.xi, n).in_mode(cx.mode)?;
    report.stat("x_last", x.last().unwrap_or(f64::NAN));
    report.stat("forcing_last", h.last().unwrap_or(f64::NAN));

    let back = recover_forcing_nonlinear(&kernel, &f, &x).in_mode(cx.mode)?;
    let round_trip = max_relative_gap(&back, &h, Some(&x));
    report.stat("forcing_round_trip_gap", round_trip);
    report.check(
        "forcing_round_trip",
        round_trip < cx.cfg.tolerances.representation,
    );

    if f.is_identity() {
        if n <= REPRESENTATION_CHECK_LIMIT {
            let y = solve_by_representation(&kernel, &h, cx.cfg.xi, n).in_mode(cx.mode)?;
            let gap = max_relative_gap(&x, &y, None);
            report.stat("representation_gap", gap);
            report.check(
                "representation_agrees",
                gap < cx.cfg.tolerances.representation,
            );
        } else {
            report.verdict("representation_check", "skipped: horizon above limit");
        }
    }
    report.add_series("x", x);
    report.add_series("forcing", h);
    Ok(())
}

fn spectrum(cx: &Ctx, report: &mut Report) -> Result<(), CliError> {
    let kernel = cx.kernel()?;
    let lambdas = if cx.cfg.lambda_grid.is_empty() {
        vec![0.0, 0.5, 1.0]
    } else {
        cx.cfg.lambda_grid.clone()
    };
    let sr = spectral_report(&kernel, &lambdas, cx.cfg.horizon).in_mode(cx.mode)?;
    report.verdict("summability", snake(&sr.summability));
    report.stat("max_modulus", sr.max_modulus);
    report.stat("tail_mass", sr.tail_mass);
    report.stat("kernel_l1", kernel.l1_norm());
    report.stat("root_count", sr.roots.len() as f64);
    let mut moduli: Vec<f64> = sr.roots.iter().map(|r| r.modulus()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    if !moduli.is_empty() {
        report.add_series(
            "root_moduli",
            Trajectory::new(0, moduli).expect("non-empty"),
        );
    }
    for p in &sr.multipliers {
        let key = |name: &str| format!("{name}@{}", p.lambda);
        report.stat(&key("kappa"), p.kappa);
        if let Some(m) = p.multiplier {
            report.stat(&key("multiplier"), m);
        }
        if let Some(r) = p.rho_star {
            report.stat(&key("rho_star"), r);
        }
        if let (true, Some(_)) = (sr.summability == Summability::Summable, p.multiplier) {
            let rho = rho_of_lambda(
                &kernel,
                p.lambda,
                cx.cfg.horizon,
                Some(cx.cfg.tolerances.rho),
            )
            .in_mode(cx.mode)?;
            report.stat(&key("rho_gap"), rho.gap);
            report.check(
                &key("rho_matches_multiplier"),
                rho.within_tolerance.unwrap_or(false),
            );
            report.add_series(&key("rho_partial_sums"), rho.partial_sums);
        }
    }
    Ok(())
}

fn classify(cx: &Ctx, report: &mut Report) -> Result<(), CliError> {
    let kernel = cx.kernel()?;
    let f = cx.nonlinearity()?;
    let h = cx.forcing_log()?;
    let x = if f.is_identity() {
        cx.solve_log(&kernel, &h)?
    } else {
        let hp = h.to_plain().in_mode(cx.mode)?;
        solve_nonlinear(&kernel, &f, &hp, cx.cfg.xi, cx.cfg.horizon)
            .in_mode(cx.mode)?
            .to_log()
    };
    let summable = volterra_core::spectral::characteristic_roots(&kernel)
        .in_mode(cx.mode)?
        .is_summable();
    report.verdict("kernel", if summable { "summable" } else { "not_summable" });

    let h_lambda = estimate_lambda_log(&h).ok();
    let x_lambda = estimate_lambda_log(&x).ok();
    for (name, est) in [("forcing", &h_lambda), ("x", &x_lambda)] {
        match est {
            Some(e) => {
                report.stat(&format!("{name}_lambda_hat"), e.lambda_hat);
                report.stat(&format!("{name}_lambda_iqr"), e.iqr);
                report.verdict(
                    &format!("{name}_growth"),
                    if e.converged {
                        "g_lambda"
                    } else {
                        "not_identified"
                    },
                );
            }
            None => report.verdict(&format!("{name}_growth"), "undefined_ratio"),
        }
    }
    if let (true, Some(he), Some(xe)) = (summable, &h_lambda, &x_lambda) {
        if he.converged && f.has_unit_slope() {
            let agree = xe.converged
                && (xe.lambda_hat - he.lambda_hat).abs() <= 1e-3 * he.lambda_hat.max(1.0);
            report.check("x_inherits_forcing_lambda", agree);
        }
    }

    if cx.cfg.scaling.is_some() {
        let scale = cx.scale()?;
        let cfg = &cx.cfg.tolerances.limsup;
        let x_est =
            estimate_limsup_ratio(&scale.divide_log(&x).in_mode(cx.mode)?, cfg).in_mode(cx.mode)?;
        let h_est =
            estimate_limsup_ratio(&scale.divide_log(&h).in_mode(cx.mode)?, cfg).in_mode(cx.mode)?;
        record_limsup(report, "x", &x_est);
        record_limsup(report, "forcing", &h_est);
        if summable && f.has_unit_slope() {
            report.check(
                "fluctuation_classes_agree",
                x_est.classification == h_est.classification,
            );
        }
    }

    let tail = cx
        .cfg
        .tail
        .clone()
        .or_else(|| match cx.cfg.forcing.as_ref() {
            Some(ForcingKind::Iid(t)) => Some(t.clone()),
            _ => None,
        });
    if let Some(tail) = tail {
        let cfg = cx.cfg.classifier.clone().unwrap_or_default();
        let c = classify_tail(&tail, &cfg).in_mode(cx.mode)?;
        report.stat("ssv_max_deviation", c.ssv.max_deviation);
        match c.verdict {
            TailVerdict::Rapid => report.verdict("tail", "rapid"),
            TailVerdict::RegularlyVarying {
                alpha,
                case,
                ratio_limit,
            } => {
                report.verdict("tail", format!("regularly_varying_{}", snake(&case)));
                report.stat("tail_alpha", alpha);
                if let Some(l) = ratio_limit {
                    report.stat("tail_ratio_limit", l);
                }
            }
            TailVerdict::Undecided => report.verdict("tail", "undecided"),
        }
    }
    Ok(())
}

fn growth2(cx: &Ctx, report: &mut Report) -> Result<(), CliError> {
    let kernel = cx.kernel()?;
    let h = cx.forcing_log()?;
    let g = verify_growth2(&kernel, &h, cx.cfg.xi).in_mode(cx.mode)?;
    report.verdict("summability", snake(&g.summability));
    report.stat("lambda_hat", g.lambda.lambda_hat);
    report.stat("lambda_iqr", g.lambda.iqr);
    report.stat("l_empirical", g.l_empirical);
    report.stat("l_theory", g.l_theory);
    report.stat("residual", g.residual);
    report.stat("final_ratio", g.final_ratio);
    report.check(
        "ratio_matches_multiplier",
        g.residual < cx.cfg.tolerances.growth2,
    );
    report.add_series("x_over_forcing", g.ratio);
    Ok(())
}

fn growth3(cx: &Ctx, report: &mut Report) -> Result<(), CliError> {
    let kernel = cx.kernel()?;
    cx.linear_only(&cx.nonlinearity()?)?;
    let scale = cx.scale()?;
    let h = cx.forcing_log()?;
    let x = cx.solve_log(&kernel, &h)?;
    let g = verify_growth3(&kernel, &x, &h, &scale, None).in_mode(cx.mode)?;
    let tol = cx.cfg.tolerances.growth3;
    report.stat("lambda", g.lambda);
    report.stat("x_residual_sup", g.solution.residual_sup);
    report.stat("forcing_residual_sup", g.forcing.residual_sup);
    report.check("x_representation", g.solution.residual_sup < tol);
    report.check("forcing_representation", g.forcing.residual_sup < tol);
    report.check(
        "x_residual_decay",
        g.solution.residual_non_increasing(DECAY_ABS_TOL),
    );
    report.check(
        "forcing_residual_decay",
        g.forcing.residual_non_increasing(DECAY_ABS_TOL),
    );
    report.add_series("x_over_a", g.solution.lambda_a_part);
    report.add_series("x_over_a_predicted", g.solution.predicted);
    report.add_series("forcing_over_a", g.forcing.lambda_a_part);
    report.add_series("forcing_over_a_predicted", g.forcing.predicted);
    Ok(())
}

fn periodic(cx: &Ctx, report: &mut Report) -> Result<(), CliError> {
    let kernel = cx.kernel()?;
    cx.linear_only(&cx.nonlinearity()?)?;
    let scale = cx.scale()?;
    let lambda = scale.lambda().ok_or_else(|| {
        CliError::Usage("verify-periodic needs a scaling with a known ratio limit".into())
    })?;
    let h = cx.forcing_log()?;
    let x = cx.solve_log(&kernel, &h)?;
    let g = verify_growth3(&kernel, &x, &h, &scale, Some(lambda)).in_mode(cx.mode)?;
    let ex_x =
        extract_almost_periodic(&g.solution.lambda_a_part, cx.cfg.period_hint).in_mode(cx.mode)?;
    let ex_h =
        extract_almost_periodic(&g.forcing.lambda_a_part, cx.cfg.period_hint).in_mode(cx.mode)?;
    report.stat("lambda", lambda);
    report.stat("representation_residual", g.solution.residual_sup);
    report.stat("x_residual_tail_sup", ex_x.residual_tail_sup);
    report.stat("forcing_residual_tail_sup", ex_h.residual_tail_sup);
    if let Some(p) = ex_x.peak_to_median {
        report.stat("x_peak_to_median", p);
    }
    report.verdict("x_periodicity", snake(&ex_x.verdict));
    report.verdict("forcing_periodicity", snake(&ex_h.verdict));
    let tol = cx.cfg.tolerances.periodic;
    report.check("representation", g.solution.residual_sup < tol);
    report.check("x_periodic", ex_x.verdict == PeriodicVerdict::Periodic);
    report.check(
        "period_matches_forcing",
        ex_x.period.is_some() && ex_x.period == ex_h.period,
    );

    if let (Some(px), Some(ph)) = (
        ex_x.period,
        ex_h.period
            .filter(|ph| ex_x.period.is_some_and(|px| px % ph == 0)),
    ) {
        report.stat("x_period", px as f64);
        report.stat("forcing_period", ph as f64);
        // pi_x(m) = sum_j r(j) lambda^j pi_H(m - j), one full period of m.
        let r = resolvent(&kernel, cx.cfg.horizon).in_mode(cx.mode)?;
        let mut weights = Vec::new();
        let mut power = 1.0f64;
        for &rj in r.values() {
            let w = rj * power;
            weights.push(w);
            power *= lambda;
            if power == 0.0 {
                break;
            }
        }
        let theory: Vec<f64> = (0..px)
            .map(|m| {
                weights
                    .iter()
                    .enumerate()
                    .map(|(j, w)| w * ex_h.pattern[(m % ph + ph - j % ph) % ph])
                    .sum()
            })
            .collect();
        let gap = theory
            .iter()
            .zip(&ex_x.pattern)
            .map(|(t, e)| (t - e).abs())
            .fold(0.0, f64::max);
        report.stat("pattern_gap", gap);
        report.check("pattern_matches_theory", gap < tol);
        report.add_series(
            "x_pattern",
            Trajectory::new(0, ex_x.pattern.clone()).expect("non-empty"),
        );
        report.add_series(
            "x_pattern_theory",
            Trajectory::new(0, theory).expect("non-empty"),
        );
    }
    report.add_series("x_over_a", g.solution.lambda_a_part);
    report.add_series("x_periodic_part", ex_x.pi);
    report.add_series("x_periodic_residual", ex_x.residual);
    Ok(())
}

fn ergodic(cx: &Ctx, report: &mut Report) -> Result<(), CliError> {
    let kernel = cx.kernel()?;
    cx.linear_only(&cx.nonlinearity()?)?;
    let scale = cx.scale()?;
    let lambda = scale.lambda().ok_or_else(|| {
        CliError::Usage("verify-ergodic needs a scaling with a known ratio limit".into())
    })?;
    let h = cx.forcing_log()?;
    let x = cx.solve_log(&kernel, &h)?;
    let x_over_a = scale.divide_log(&x).in_mode(cx.mode)?;
    let h_tail = LogTrajectory::new(1, h.values()[1..].to_vec()).in_mode(cx.mode)?;
    let h_over_a = scale.divide_log(&h_tail).in_mode(cx.mode)?;
    let mu_x_series = time_average(&x_over_a).in_mode(cx.mode)?;
    let mu_h_series = time_average(&h_over_a).in_mode(cx.mode)?;
    let mu_x = mu_x_series.last().unwrap_or(f64::NAN);
    let mu_h = mu_h_series.last().unwrap_or(f64::NAN);
    let l = multiplier_l(&kernel, lambda).in_mode(cx.mode)?;
    let tol = cx.cfg.tolerances.ergodic;
    report.stat("lambda", lambda);
    report.stat("multiplier", l);
    report.stat("x_time_average", mu_x);
    report.stat("forcing_time_average", mu_h);
    report.stat("predicted_from_forcing", l * mu_h);
    report.check(
        "average_matches_forcing_average",
        (mu_x - l * mu_h).abs() < tol,
    );

    // With H = a * U, U i.i.d. uniform, the forcing average has a known mean.
    if let Some(ForcingKind::Modulated {
        base,
        factor: Factor::Uniform { low, high },
    }) = cx.cfg.forcing.as_ref()
    {
        if Some(base) == cx.cfg.scaling.as_ref() {
            let expected = l * 0.5 * (low + high);
            report.stat("expected_limit", expected);
            report.check("average_matches_expectation", (mu_x - expected).abs() < tol);
        }
    }
    report.add_series("x_time_average", mu_x_series);
    report.add_series("forcing_time_average", mu_h_series);
    Ok(())
}

fn fluct(cx: &Ctx, report: &mut Report) -> Result<(), CliError> {
    let kernel = cx.kernel()?;
    let f = cx.nonlinearity()?;
    let scale = cx.scale()?;
    let cfg = &cx.cfg.tolerances.limsup;
    let (fr, x_over_a, h_over_a) = if cx.cfg.log_domain {
        cx.linear_only(&f)?;
        let h = cx.forcing_log()?;
        let x = cx.solve_log(&kernel, &h)?;
        let x_over_a = scale.divide_log(&x).in_mode(cx.mode)?;
        let h_over_a = scale.divide_log(&h).in_mode(cx.mode)?;
        // Bounds are scale-free once both sides are already divided by a.
        let unit = ScalingModel::from_log(0, vec![0.0; cx.cfg.horizon + 1], Some(1.0), "unit")
            .in_mode(cx.mode)?;
        let fr = fluctuation_report(&kernel, &x_over_a, &h_over_a, &unit, cfg).in_mode(cx.mode)?;
        report.verdict("convolution_bound", "skipped: log domain");
        (fr, x_over_a, h_over_a)
    } else {
        let h = cx.forcing_plain()?;
        let x = solve_nonlinear(&kernel, &f, &h, cx.cfg.xi, cx.cfg.horizon).in_mode(cx.mode)?;
        let fr = fluctuation_report(&kernel, &x, &h, &scale, cfg).in_mode(cx.mode)?;
        if scale.is_monotone() {
            let cb = convolution_bound(&kernel, &h, &scale, cfg).in_mode(cx.mode)?;
            report.stat("convolution_lhs", cb.lhs);
            report.stat("convolution_bound", cb.bound);
            report.check("convolution_bound", cb.holds);
        } else {
            report.verdict("convolution_bound", "skipped: scaling not monotone");
        }
        let x_over_a = scale.divide(&x).in_mode(cx.mode)?;
        let h_over_a = scale.divide(&h).in_mode(cx.mode)?;
        (fr, x_over_a, h_over_a)
    };
    record_limsup(report, "x", &fr.x);
    record_limsup(report, "forcing", &fr.forcing);
    report.stat("r_l1", fr.r_l1);
    report.stat("k_l1", fr.k_l1);
    report.check("upper_bound", fr.upper_holds);
    report.check("lower_bound", fr.lower_holds);
    report.check("classes_agree", fr.classes_agree);
    report.add_series("x_over_a", x_over_a);
    report.add_series("forcing_over_a", h_over_a);
    Ok(())
}

fn phi(cx: &Ctx, report: &mut Report) -> Result<(), CliError> {
    let kernel = cx.kernel()?;
    let f = cx.nonlinearity()?;
    let h = cx.forcing_plain()?;
    let x = solve_nonlinear(&kernel, &f, &h, cx.cfg.xi, cx.cfg.horizon).in_mode(cx.mode)?;
    let phi = cx.cfg.phi.unwrap_or(ConvexFunctional::Power { p: 2.0 });
    let b = phi_average_bounds(&kernel, &x, &h, phi).in_mode(cx.mode)?;
    report.verdict("phi", b.phi.name());
    report.verdict("arithmetic", if b.log_domain { "log" } else { "plain" });
    report.stat("lhs", b.lhs);
    report.stat("rhs", b.rhs);
    report.stat("dual_lhs", b.dual_lhs);
    report.stat("dual_rhs", b.dual_rhs);
    report.stat("ln_lhs", b.ln_lhs);
    report.stat("ln_rhs", b.ln_rhs);
    report.stat("r_l1", b.r_l1);
    report.stat("r_l2_squared", b.r_l2_squared);
    report.stat("k_l1", b.k_l1);
    report.stat("window_start", b.window.0 as f64);
    report.check("phi_bound", b.holds);
    report.check("dual_phi_bound", b.dual_holds);
    report.add_series("x", x);
    report.add_series("forcing", h);
    Ok(())
}

fn envelope(cx: &Ctx, report: &mut Report) -> Result<(), CliError> {
    let sec = cx
        .cfg
        .envelope
        .as_ref()
        .ok_or_else(|| cx.missing("envelope"))?;
    let seq = cx
        .cfg
        .scaling
        .as_ref()
        .ok_or_else(|| cx.missing("scaling"))?;
    let a = seq.generate(0, cx.cfg.horizon).in_mode(cx.mode)?;
    let rep = envelope_sums(&sec.tail, &a, &sec.k_grid, cx.cfg.horizon).in_mode(cx.mode)?;
    for row in &rep.rows {
        report.stat(&format!("partial_sum@{}", row.k), row.partial_sum);
        if let Some(e) = row.decay_exponent {
            report.stat(&format!("decay_exponent@{}", row.k), e);
        }
        report.verdict(&format!("series@{}", row.k), snake(&row.verdict));
    }
    if let Some((lo, hi)) = rep.bracket {
        report.stat("bracket_low", lo);
        report.stat("bracket_high", hi);
    }
    if let Some(k) = rep.k_star {
        report.stat("k_star", k);
    }
    report.verdict(
        "threshold",
        match rep.bracket {
            Some(_) => "bracketed",
            None => "not_bracketed",
        },
    );
    let mut rows: Vec<_> = rep.rows.iter().collect();
    rows.sort_by(|a, b| a.k.total_cmp(&b.k));
    let monotone = rows
        .windows(2)
        .all(|w| w[1].partial_sum <= w[0].partial_sum);
    report.check("sums_nonincreasing_in_k", monotone);
    if !rows.is_empty() {
        let sums = rows.iter().map(|r| r.partial_sum).collect();
        report.add_series(
            "partial_sums_by_k_index",
            Trajectory::new(0, sums).expect("non-empty"),
        );
    }
    Ok(())
}

fn ensemble(cx: &Ctx, report: &mut Report) -> Result<(), CliError> {
    let sec = cx
        .cfg
        .ensemble
        .as_ref()
        .ok_or_else(|| cx.missing("ensemble"))?;
    let system = EnsembleSystem {
        kernel: cx.kernel()?,
        forcing: cx.forcing()?.clone(),
        nonlinearity: cx.cfg.nonlinearity.clone(),
        xi: cx.cfg.xi,
        horizon: cx.cfg.horizon,
        log_domain: cx.cfg.log_domain,
        scale: cx.cfg.scaling.clone(),
        statistic: sec.statistic.clone(),
        band: sec.band,
    };
    let rep = ensemble_verify(&system, sec.paths, cx.cfg.seed).in_mode(cx.mode)?;
    report.stat("pass_fraction", rep.pass_fraction);
    report.stat("failures", rep.failures as f64);
    report.stat("paths", sec.paths as f64);
    if let Some(m) = rep.median {
        report.stat("median", m);
    }
    if let (Some(lo), Some(hi)) = (rep.sorted_values.first(), rep.sorted_values.last()) {
        report.stat("min", *lo);
        report.stat("max", *hi);
    }
    report.check("pass_fraction", rep.pass_fraction >= sec.min_pass_fraction);
    if let Some((lo, hi)) = sec.median_band {
        report.check(
            "median_in_band",
            rep.median.is_some_and(|m| m >= lo && m <= hi),
        );
    }
    for o in rep.outcomes.iter().filter(|o| o.error.is_some()) {
        log::warn!("path {}: {}", o.path, o.error.as_deref().unwrap_or(""));
    }
    let per_path = rep
        .outcomes
        .iter()
        .map(|o| o.value.unwrap_or(f64::NAN))
        .collect();
    report.add_series(
        "path_values",
        Trajectory::new(0, per_path).expect("at least one path"),
    );
    Ok(())
}
