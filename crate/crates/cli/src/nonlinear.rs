use volterra_core::asymptotics::{
    dyadic_blocks, estimate_limsup, predict_x_over_a, DecompositionReport, LimsupEstimate,
    ScalingModel,
};
use volterra_core::{resolvent, solve_linear, solve_nonlinear, Trajectory};

use crate::error::{CliError, Context};
use crate::report::Report;
use crate::run::Ctx;

/// Maxima of `g` over the dyadic blocks of `1..=end`.
fn block_maxima(g: &Trajectory, end: usize) -> Vec<f64> {
    dyadic_blocks(1, end)
        .into_iter()
        .map(|(lo, hi)| (lo..=hi).map(|n| g.at_or_zero(n)).fold(0.0, f64::max))
        .collect()
}

/// Each block max is below the previous one, or both are exactly zero.
pub(crate) fn last_blocks_decrease(maxima: &[f64], count: usize) -> bool {
    if maxima.len() < count {
        return false;
    }
    maxima[maxima.len() - count..]
        .windows(2)
        .all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0))
}

fn class_name(est: &LimsupEstimate) -> String {
    match serde_json::to_value(est.classification) {
        Ok(serde_json::Value::String(s)) => s,
        _ => format!("{:?}", est.classification),
    }
}

fn lambda_of(scale: &ScalingModel) -> Option<f64> {
    scale.lambda().or_else(|| {
        let end = scale.end();
        Some(scale.a(end - 1)? / scale.a(end)?).filter(|l| l.is_finite())
    })
}

/// Solves the nonlinear equation and its linearisation at infinity side by
/// side and checks that they agree on the scale `a`.
///
/// For a flagged `f` with `f(x)/x -> c != 1` the linearisation uses the
/// kernel `c k`.
pub(crate) fn verify_nonlinear(cx: &Ctx, report: &mut Report) -> Result<(), CliError> {
    let kernel = cx.kernel()?;
    let f = cx.nonlinearity()?;
    let scale = cx.scale()?;
    let n = cx.cfg.horizon;
    let slope = f.asymptotic_slope();
    let linear = kernel.scaled(slope).in_mode(cx.mode)?;
    report.verdict("nonlinearity", f.name());
    report.verdict(
        "slope",
        if f.has_unit_slope() {
            "unit"
        } else {
            "flagged"
        },
    );
    report.stat("slope", slope);

    let h = cx.forcing_plain()?;
    let x = solve_nonlinear(&kernel, &f, &h, cx.cfg.xi, n).in_mode(cx.mode)?;
    let y = solve_linear(&linear, &h, cx.cfg.xi, n).in_mode(cx.mode)?;

    let gap = Trajectory::from_fn(1, n, |m| {
        (x.at_or_zero(m) - y.at_or_zero(m)).abs() / scale.a(m).unwrap_or(f64::NAN)
    })
    .in_mode(cx.mode)?;
    let maxima = block_maxima(&gap, n);
    let last = maxima.last().copied().unwrap_or(f64::NAN);
    report.stat("gap_final_block_max", last);
    report.stat("gap_block_count", maxima.len() as f64);
    report.check("gap_decreasing", last_blocks_decrease(&maxima, 3));
    report.check("gap_small", last < cx.cfg.tolerances.nonlinear);

    let lambda = lambda_of(&scale)
        .ok_or_else(|| CliError::Usage("scaling ratio limit could not be determined".into()))?;
    let r = resolvent(&linear, n).in_mode(cx.mode)?;
    let h_over_a = Trajectory::from_fn(0, n, |m| {
        if m == 0 {
            0.0
        } else {
            h.at_or_zero(m) / scale.a(m).unwrap_or(f64::NAN)
        }
    })
    .in_mode(cx.mode)?;
    let predicted = predict_x_over_a(&r, lambda, &h_over_a).in_mode(cx.mode)?;
    let x_over_a = scale.divide(&x).in_mode(cx.mode)?;
    let decomposition = DecompositionReport::new(x_over_a.clone(), predicted).in_mode(cx.mode)?;
    report.stat("lambda", lambda);
    report.stat("representation_residual", decomposition.residual_sup);
    report.check(
        "representation",
        decomposition.residual_sup < cx.cfg.tolerances.nonlinear_representation,
    );

    let cfg = &cx.cfg.tolerances.limsup;
    let x_est = estimate_limsup(&x, &scale, cfg).in_mode(cx.mode)?;
    let h_est = estimate_limsup(&h, &scale, cfg).in_mode(cx.mode)?;
    report.stat("x_limsup", x_est.value_or_inf());
    report.stat("forcing_limsup", h_est.value_or_inf());
    report.verdict("x_class", class_name(&x_est));
    report.verdict("forcing_class", class_name(&h_est));
    report.check(
        "classes_agree",
        x_est.classification == h_est.classification,
    );

    report.add_series("gap_over_a", gap);
    report.add_series("x_over_a", x_over_a);
    report.add_series("x_over_a_predicted", decomposition.predicted);
    report.add_series("x", x);
    report.add_series("y_linearised", y);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decrease_rule() {
        assert!(last_blocks_decrease(&[5.0, 3.0, 2.0, 1.0], 3));
        assert!(!last_blocks_decrease(&[3.0, 2.0, 2.0], 3));
        assert!(last_blocks_decrease(&[1.0, 0.0, 0.0], 3));
        assert!(!last_blocks_decrease(&[1.0, 0.5], 3));
    }
}
