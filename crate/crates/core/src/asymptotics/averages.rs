use serde::{Deserialize, Serialize};

use super::limsup::l1;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::solver::resolvent;
use crate::trajectory::Trajectory;

/// Relative slack on the averaged bounds.
pub const PHI_SLACK: f64 = 1e-6;

/// Running Cesàro mean `mu(n) = (1/n) sum_{j=1}^n g(j)`, from `n = 1`.
pub fn time_average(g_over_a: &Trajectory) -> Result<Trajectory> {
    let end = g_over_a
        .end()
        .ok_or_else(|| Error::Input("empty trajectory".into()))?;
    if g_over_a.start() > 1 || end < 1 {
        return Err(Error::Input(
            "time average needs values from index 1".into(),
        ));
    }
    let mut acc = 0.0;
    Trajectory::from_fn(1, end, |n| {
        acc += g_over_a.at_or_zero(n);
        acc / n as f64
    })
}

/// Increasing convex functions on `[0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConvexFunctional {
    /// `x^p`, `p >= 1`.
    Power { p: f64 },
    /// `e^x`.
    Exp,
    /// `max(0, x - c)`.
    Hinge { c: f64 },
}

impl ConvexFunctional {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ConvexFunctional::Power { p } => x.powf(p),
            ConvexFunctional::Exp => x.exp(),
            ConvexFunctional::Hinge { c } => (x - c).max(0.0),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ConvexFunctional::Power { p } => format!("x^{p}"),
            ConvexFunctional::Exp => "exp".into(),
            ConvexFunctional::Hinge { c } => format!("max(0,x-{c})"),
        }
    }

    /// Powers and hinges are O-regularly varying; the exponential is not.
    pub fn is_o_regularly_varying(&self) -> bool {
        !matches!(self, ConvexFunctional::Exp)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ConvexFunctional::Power { p } if !(p >= 1.0 && p.is_finite()) => Err(Error::Parameter(
                format!("power functional needs p >= 1, got {p}"),
            )),
            ConvexFunctional::Hinge { c } if !c.is_finite() => {
                Err(Error::Parameter("hinge offset must be finite".into()))
            }
            _ => self.check_shape(),
        }
    }

    /// Sampled monotonicity and second-difference check on `[0, 10]`.
    pub fn check_shape(&self) -> Result<()> {
        let h = 0.01;
        let v: Vec<f64> = (0..=1000).map(|i| self.eval(i as f64 * h)).collect();
        let bad_mono = v.windows(2).position(|w| w[1] < w[0] - 1e-12);
        let bad_convex = v.windows(3).position(|w| w[2] - 2.0 * w[1] + w[0] < -1e-12);
        match (bad_mono, bad_convex) {
            (None, None) => Ok(()),
            _ => Err(Error::Parameter(format!(
                "{} is not increasing and convex",
                self.name()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiBounds {
    pub phi: ConvexFunctional,
    pub window: (usize, usize),
    /// Window mean of `phi(|x|)`.
    pub lhs: f64,
    /// Window mean of `phi(|r|_1 |H|)`.
    pub rhs: f64,
    pub holds: bool,
    /// Window mean of `phi(|H|)`.
    pub dual_lhs: f64,
    /// Window mean of `phi((1 + |k|_1) |x|)`.
    pub dual_rhs: f64,
    pub dual_holds: bool,
    pub r_l1: f64,
    pub r_l2_squared: f64,
    pub k_l1: f64,
    /// Natural logs of the four means; always finite for power functionals.
    pub ln_lhs: f64,
    pub ln_rhs: f64,
    pub ln_dual_lhs: f64,
    pub ln_dual_rhs: f64,
    pub log_domain: bool,
}

/// `ln(mean(|c v|^p))` computed relative to the largest term.
fn ln_power_mean(values: &[f64], c: f64, p: f64) -> f64 {
    let logs: Vec<f64> = values.iter().map(|v| p * (c * v.abs()).ln()).collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return peak;
    }
    let s: f64 = logs.iter().map(|l| (l - peak).exp()).sum();
    peak + s.ln() - (values.len() as f64).ln()
}

/// Window means of `phi(|x|)` against `phi(|r|_1 |H|)`, and of `phi(|H|)`
/// against `phi((1 + |k|_1) |x|)`, after a quarter burn-in.
pub fn phi_average_bounds(
    kernel: &Kernel,
    x: &Trajectory,
    forcing: &Trajectory,
    phi: ConvexFunctional,
) -> Result<PhiBounds> {
    phi.validate()?;
    let (lo, hi) = x.common_range(forcing)?;
    let lo = lo.max(1);
    if hi < lo + 3 {
        return Err(Error::Input(
            "phi averages need at least four common indices".into(),
        ));
    }
    let start = lo + (hi + 1 - lo) / 4;
    let xs = x.window(start, hi)?.into_values();
    let hs = forcing.window(start, hi)?.into_values();
    let r = resolvent(kernel, hi)?;
    let r_l1 = l1(&r);
    let r_l2_squared = r.values().iter().map(|v| v * v).sum();
    let k_l1 = kernel.l1_norm();
    let count = xs.len() as f64;
    let mean = |v: &[f64], c: f64| v.iter().map(|y| phi.eval(c * y.abs())).sum::<f64>() / count;
    let plain = [
        mean(&xs, 1.0),
        mean(&hs, r_l1),
        mean(&hs, 1.0),
        mean(&xs, 1.0 + k_l1),
    ];
    let log_domain = plain.iter().any(|v| !v.is_finite());
    let logs = if log_domain {
        match phi {
            ConvexFunctional::Power { p } => [
                ln_power_mean(&xs, 1.0, p),
                ln_power_mean(&hs, r_l1, p),
                ln_power_mean(&hs, 1.0, p),
                ln_power_mean(&xs, 1.0 + k_l1, p),
            ],
            _ => {
                let input = xs.iter().chain(&hs).map(|v| v.abs()).fold(0.0, f64::max);
                return Err(Error::PhiOverflow { input });
            }
        }
    } else {
        plain.map(f64::ln)
    };
    let slack = (1.0 + PHI_SLACK).ln();
    Ok(PhiBounds {
        phi,
        window: (start, hi),
        lhs: plain[0],
        rhs: plain[1],
        holds: logs[0] <= logs[1] + slack,
        dual_lhs: plain[2],
        dual_rhs: plain[3],
        dual_holds: logs[2] <= logs[3] + slack,
        r_l1,
        r_l2_squared,
        k_l1,
        ln_lhs: logs[0],
        ln_rhs: logs[1],
        ln_dual_lhs: logs[2],
        ln_dual_rhs: logs[3],
        log_domain,
    })
}
