use serde::{Deserialize, Serialize};

use super::lambda::{estimate_from_ratios, estimate_lambda_log, tail_start, LambdaEstimate};
use super::limsup::dyadic_blocks;
use super::scaling::ScalingModel;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::solver::{resolvent, solve_linear_log};
use crate::spectral::{characteristic_roots, multiplier_l, Summability};
use crate::trajectory::{LogTrajectory, LogValue, Trajectory};

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Parameter(format!(
            "lambda must lie in [0, 1], got {lambda}"
        )));
    }
    Ok(())
}

fn last_index(t: &Trajectory) -> Result<usize> {
    t.end()
        .ok_or_else(|| Error::Input("empty trajectory".into()))
}

/// `w(j) = r(j) lambda^j` for `j = 0..=n`, cut once `lambda^j` underflows.
fn weights(resolvent: &Trajectory, lambda: f64, n: usize) -> Result<Vec<f64>> {
    if resolvent.start() != 0 || resolvent.len() < n + 1 {
        return Err(Error::Input(format!(
            "resolvent covers {} indices, {} required",
            resolvent.len(),
            n + 1
        )));
    }
    let mut w = Vec::with_capacity(n + 1);
    let mut power = 1.0f64;
    for &rj in &resolvent.values()[..=n] {
        if power == 0.0 {
            break;
        }
        w.push(rj * power);
        power *= lambda;
    }
    Ok(w)
}

/// Right-hand side `sum_{j=0}^{n} r(j) lambda^j h(n-j)` of the solution's
/// asymptotic representation, where `h = lambda_a H` (zero outside its range).
pub fn predict_x_over_a(
    resolvent: &Trajectory,
    lambda: f64,
    lambda_a_h: &Trajectory,
) -> Result<Trajectory> {
    check_lambda(lambda)?;
    let end = last_index(lambda_a_h)?;
    let w = weights(resolvent, lambda, end)?;
    let s = lambda_a_h.start();
    let h = lambda_a_h.values();
    Trajectory::from_fn(s, end, |n| {
        let jmax = (n - s).min(w.len() - 1);
        (0..=jmax).map(|j| w[j] * h[n - j - s]).sum()
    })
}

/// Right-hand side `x(n) - sum_{j=0}^{n-1} k(j) lambda^(j+1) x(n-j-1)` of the
/// forcing's representation, with `x = lambda_a x`.
pub fn predict_h_over_a(
    kernel: &Kernel,
    lambda: f64,
    lambda_a_x: &Trajectory,
) -> Result<Trajectory> {
    check_lambda(lambda)?;
    let end = last_index(lambda_a_x)?;
    let k = kernel.coefficients();
    let mut kw = Vec::with_capacity(k.len());
    let mut power = lambda;
    for &kj in k {
        kw.push(kj * power);
        power *= lambda;
    }
    let s = lambda_a_x.start();
    Trajectory::from_fn(s, end, |n| {
        let mut acc = lambda_a_x.at_or_zero(n);
        for (j, &c) in kw.iter().enumerate().take(n.saturating_sub(s)) {
            acc -= c * lambda_a_x.at_or_zero(n - j - 1);
        }
        acc
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualBlock {
    pub lo: usize,
    pub hi: usize,
    pub sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    /// `g(n)/a(n)`.
    pub lambda_a_part: Trajectory,
    pub predicted: Trajectory,
    /// Sup of `|lambda_a_part - predicted|` over the final quarter.
    pub residual_sup: f64,
    /// Residual sups over dyadic blocks from index 1.
    pub residual_blocks: Vec<ResidualBlock>,
    pub almost_periodic_part: Option<Trajectory>,
    pub time_average: Option<f64>,
}

impl DecompositionReport {
    pub fn new(lambda_a_part: Trajectory, predicted: Trajectory) -> Result<Self> {
        let (lo, hi) = lambda_a_part.common_range(&predicted)?;
        let residual = |n: usize| (lambda_a_part.at_or_zero(n) - predicted.at_or_zero(n)).abs();
        let residual_sup = (tail_start(lo, hi)..=hi).map(residual).fold(0.0, f64::max);
        let residual_blocks = dyadic_blocks(lo, hi)
            .into_iter()
            .map(|(lo, hi)| ResidualBlock {
                lo,
                hi,
                sup: (lo..=hi).map(residual).fold(0.0, f64::max),
            })
            .collect();
        Ok(Self {
            lambda_a_part,
            predicted,
            residual_sup,
            residual_blocks,
            almost_periodic_part: None,
            time_average: None,
        })
    }

    /// Whether the block sups do not increase across the last three blocks
    /// (up to `abs_tol`, which absorbs rounding once the residual is at noise level).
    pub fn residual_non_increasing(&self, abs_tol: f64) -> bool {
        let b = &self.residual_blocks;
        b.len() >= 3
            && b[b.len() - 3..]
                .windows(2)
                .all(|w| w[1].sup <= w[0].sup + abs_tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Growth3Report {
    pub lambda: f64,
    pub solution: DecompositionReport,
    pub forcing: DecompositionReport,
}

/// Checks both asymptotic representations linking `x/a` and `H/a`.
///
/// `x` must start at 0; `forcing` is read from index 1. `lambda` defaults to
/// the scale's own ratio limit, then to an estimate from `a`.
pub fn verify_growth3(
    kernel: &Kernel,
    x: &LogTrajectory,
    forcing: &LogTrajectory,
    scale: &ScalingModel,
    lambda: Option<f64>,
) -> Result<Growth3Report> {
    let end = x
        .end()
        .ok_or_else(|| Error::Input("empty trajectory".into()))?;
    if x.start() != 0 {
        return Err(Error::Input("solution must start at index 0".into()));
    }
    let lambda = match lambda.or(scale.lambda()) {
        Some(l) => l,
        None => scale_lambda(scale)?,
    };
    let x_over_a = scale.divide_log(x)?;
    let h_range = LogTrajectory::new(
        1,
        (1..=end)
            .map(|n| forcing.get(n).unwrap_or(LogValue::ZERO))
            .collect(),
    )?;
    let h_over_a = scale.divide_log(&h_range)?;
    let h_full = Trajectory::new(
        0,
        std::iter::once(0.0)
            .chain(h_over_a.values().iter().copied())
            .collect(),
    )?;
    let r = resolvent(kernel, end)?;
    let x_pred = predict_x_over_a(&r, lambda, &h_full)?;
    let h_pred = predict_h_over_a(kernel, lambda, &x_over_a)?.window(1, end)?;
    Ok(Growth3Report {
        lambda,
        solution: DecompositionReport::new(x_over_a, x_pred)?,
        forcing: DecompositionReport::new(h_over_a, h_pred)?,
    })
}

fn scale_lambda(scale: &ScalingModel) -> Result<f64> {
    let ratios = scale.ratios();
    let est = estimate_from_ratios(&ratios)?;
    if !est.converged {
        return Err(Error::Input(format!(
            "scale `{}` has no settled ratio limit (IQR {:.3e})",
            scale.tag(),
            est.iqr
        )));
    }
    Ok(est.lambda_hat.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Growth2Report {
    pub lambda: LambdaEstimate,
    pub summability: Summability,
    /// Mean of `x(n)/H(n)` over the final quarter.
    pub l_empirical: f64,
    pub l_theory: f64,
    pub residual: f64,
    /// `x(N)/H(N)` at the horizon.
    pub final_ratio: f64,
    pub ratio: Trajectory,
}

/// Solves in log form and compares `x/H` with the multiplier at the
/// estimated ratio limit of `H`.
pub fn verify_growth2(kernel: &Kernel, forcing: &LogTrajectory, xi: f64) -> Result<Growth2Report> {
    let horizon = forcing
        .end()
        .ok_or_else(|| Error::Input("empty forcing".into()))?;
    let h = LogTrajectory::new(
        1,
        (1..=horizon)
            .map(|n| forcing.get(n).unwrap_or(LogValue::ZERO))
            .collect(),
    )?;
    let lambda = match estimate_lambda_log(&h) {
        Err(Error::UndefinedRatio { index }) => {
            return Err(Error::Input(format!(
                "forcing vanishes at n = {index} in the tail window"
            )))
        }
        other => other?,
    };
    if !lambda.converged {
        return Err(Error::Input(format!(
            "ratio H(n-1)/H(n) has not settled (IQR {:.3e})",
            lambda.iqr
        )));
    }
    let spectral = characteristic_roots(kernel)?;
    if !spectral.is_summable() {
        return Err(Error::Input(format!(
            "resolvent is not summable (max root modulus {:.6})",
            spectral.max_modulus
        )));
    }
    let l_theory = multiplier_l(kernel, lambda.lambda_hat.clamp(0.0, 1.0))?;
    let x = solve_linear_log(kernel, forcing, xi, horizon)?;
    let ratio = x.ratio(&h)?;
    let lo = tail_start(1, horizon);
    let window = ratio.window(lo, horizon)?;
    let l_empirical = window.values().iter().sum::<f64>() / window.len() as f64;
    Ok(Growth2Report {
        summability: spectral.summability,
        l_empirical,
        l_theory,
        residual: (l_empirical - l_theory).abs(),
        final_ratio: ratio.last().unwrap_or(f64::NAN),
        lambda,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::Sequence;

    #[test]
    fn zero_lambda_returns_input() {
        let r = resolvent(&Kernel::single(0.5).unwrap(), 20).unwrap();
        let h = Trajectory::from_fn(0, 20, |n| (n as f64).sin()).unwrap();
        assert_eq!(predict_x_over_a(&r, 0.0, &h).unwrap(), h);
        assert_eq!(
            predict_h_over_a(&Kernel::single(0.5).unwrap(), 0.0, &h).unwrap(),
            h
        );
        assert_eq!(predict_h_over_a(&Kernel::zero(), 0.7, &h).unwrap(), h);
    }

    #[test]
    fn geometric_weight_sum() {
        let r = resolvent(&Kernel::single(0.5).unwrap(), 60).unwrap();
        let h = Trajectory::from_fn(0, 60, |_| 1.0).unwrap();
        let p = predict_x_over_a(&r, 1.0, &h).unwrap();
        for (n, v) in p.iter() {
            assert!((v - (2.0 - 0.5f64.powi(n as i32))).abs() < 1e-13);
        }
    }

    #[test]
    fn round_trip_between_representations() {
        let k = Kernel::geometric(0.3, 0.5, 30).unwrap();
        let r = resolvent(&k, 400).unwrap();
        let h = Trajectory::from_fn(0, 400, |n| (n as f64 * 0.7).cos() + 0.5).unwrap();
        let x = predict_x_over_a(&r, 0.8, &h).unwrap();
        let back = predict_h_over_a(&k, 0.8, &x).unwrap();
        for n in 300..=400 {
            assert!((back.get(n).unwrap() - h.get(n).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn growth2_zero_kernel_is_exact() {
        let h = Sequence::Exponential { rate: 2f64.ln() }
            .generate_log(1, 300)
            .unwrap();
        let rep = verify_growth2(&Kernel::zero(), &h, 0.0).unwrap();
        assert_eq!(rep.l_theory, 1.0);
        assert!(rep.ratio.iter().all(|(_, v)| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn growth2_rejects_vanishing_forcing() {
        let h = LogTrajectory::new(
            1,
            (1..=40)
                .map(|n| LogValue::from_f64(if n > 35 { 0.0 } else { 1.0 }))
                .collect(),
        )
        .unwrap();
        assert!(matches!(
            verify_growth2(&Kernel::zero(), &h, 0.0),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn growth3_is_exact_for_geometric_scale() {
        let k = Kernel::geometric(0.3, 0.5, 40).unwrap();
        let seq = Sequence::Exponential { rate: 2f64.ln() };
        let scale = ScalingModel::from_sequence(&seq, 300).unwrap();
        let h = LogTrajectory::new(
            1,
            (1..=300usize)
                .map(|n| {
                    LogValue::from_parts(
                        1,
                        n as f64 * 2f64.ln()
                            + (1.0f64 + if n % 2 == 0 { 0.25 } else { -0.25 }).ln(),
                    )
                })
                .collect(),
        )
        .unwrap();
        let x = solve_linear_log(&k, &h, 1.0, 300).unwrap();
        let rep = verify_growth3(&k, &x, &h, &scale, None).unwrap();
        assert_eq!(rep.lambda, 0.5);
        assert!(rep.solution.residual_sup < 1e-10);
        assert!(rep.forcing.residual_sup < 1e-10);
    }
}
