use serde::{Deserialize, Serialize};

use super::scaling::ScalingModel;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::solver::resolvent;
use crate::trajectory::Trajectory;

/// Relative slack allowed on finite-window inequality checks.
pub const BOUND_SLACK: f64 = 0.05;

/// Thresholds of the limsup classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimsupConfig {
    /// Leading fraction of indices excluded from the value.
    pub burn_in: f64,
    /// Last block maximum below `zero_ratio * peak` (and not rising) means zero.
    pub zero_ratio: f64,
    /// Growth across the last three blocks at or above this factor means infinite.
    pub infinite_factor: f64,
}

impl Default for LimsupConfig {
    fn default() -> Self {
        Self {
            burn_in: 0.25,
            zero_ratio: 1e-3,
            infinite_factor: 2.0,
        }
    }
}

impl LimsupConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.burn_in)
            || self.zero_ratio <= 0.0
            || self.infinite_factor <= 1.0
        {
            return Err(Error::Parameter(format!(
                "invalid limsup thresholds {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimsupClass {
    Zero,
    FinitePositive,
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub lo: usize,
    pub hi: usize,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimsupEstimate {
    /// Estimated limsup; `None` stands for `+inf`.
    pub value: Option<f64>,
    /// Largest ratio after burn-in, reported even when the class is infinite.
    pub window_max: f64,
    pub classification: LimsupClass,
    pub blocks: Vec<Block>,
    pub burn_in_index: usize,
    /// Largest block maximum over the whole range.
    pub peak: f64,
    pub config: LimsupConfig,
}

impl LimsupEstimate {
    /// Value with `+inf` for the infinite class.
    pub fn value_or_inf(&self) -> f64 {
        self.value.unwrap_or(f64::INFINITY)
    }
}

/// Dyadic blocks `[2^k, 2^(k+1))` clipped to `first..=end`; a trailing block
/// shorter than half its nominal length is merged into its predecessor.
pub fn dyadic_blocks(first: usize, end: usize) -> Vec<(usize, usize)> {
    let first = first.max(1);
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut lo = 1usize;
    while lo <= end {
        let hi = (2 * lo - 1).min(end);
        if hi >= first {
            blocks.push((lo.max(first), hi));
        }
        lo *= 2;
    }
    if blocks.len() >= 2 {
        let (lo, hi) = *blocks.last().unwrap();
        let nominal = lo.next_power_of_two();
        if (hi + 1 - lo) * 2 < nominal {
            blocks.pop();
            blocks.last_mut().unwrap().1 = hi;
        }
    }
    blocks
}

/// Limsup of `|g(n)| / a(n)`.
pub fn estimate_limsup(
    g: &Trajectory,
    scale: &ScalingModel,
    config: &LimsupConfig,
) -> Result<LimsupEstimate> {
    let ratio = scale.divide(g)?;
    estimate_limsup_ratio(&ratio, config)
}

/// Limsup of `|ratio(n)|` for a precomputed `g/a`, from index 1 onwards.
pub fn estimate_limsup_ratio(ratio: &Trajectory, config: &LimsupConfig) -> Result<LimsupEstimate> {
    config.validate()?;
    let end = ratio
        .end()
        .ok_or_else(|| Error::Input("empty trajectory".into()))?;
    let first = ratio.start().max(1);
    let blocks: Vec<Block> = dyadic_blocks(first, end)
        .into_iter()
        .map(|(lo, hi)| Block {
            lo,
            hi,
            max: (lo..=hi)
                .map(|n| ratio.at_or_zero(n).abs())
                .fold(0.0, f64::max),
        })
        .collect();
    if blocks.len() < 3 {
        return Err(Error::Input(format!(
            "limsup estimation needs three dyadic blocks; range {first}..={end} gives {}",
            blocks.len()
        )));
    }
    let burn_in_index = first + ((end + 1 - first) as f64 * config.burn_in).floor() as usize;
    let window_max = (burn_in_index..=end)
        .map(|n| ratio.at_or_zero(n).abs())
        .fold(0.0, f64::max);
    let peak = blocks.iter().map(|b| b.max).fold(0.0, f64::max);
    let m = blocks.len();
    let (last, before) = (blocks[m - 1].max, blocks[m - 3].max);
    let classification = if last >= config.infinite_factor * before && last > 0.0 {
        LimsupClass::Infinite
    } else if last < config.zero_ratio * peak && last <= before || peak == 0.0 {
        LimsupClass::Zero
    } else {
        LimsupClass::FinitePositive
    };
    Ok(LimsupEstimate {
        value: (classification != LimsupClass::Infinite).then_some(window_max),
        window_max,
        classification,
        blocks,
        burn_in_index,
        peak,
        config: *config,
    })
}

fn le_with_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + BOUND_SLACK) || rhs.is_infinite()
}

/// `|y|_1 = sum |y(n)|` over the stored values.
pub(crate) fn l1(y: &Trajectory) -> f64 {
    y.values().iter().map(|v| v.abs()).sum()
}

/// Finite-window check of the two-sided limsup bounds linking `x` and `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationReport {
    pub x: LimsupEstimate,
    pub forcing: LimsupEstimate,
    /// `sum |r(j)|` up to the horizon.
    pub r_l1: f64,
    pub k_l1: f64,
    /// `L_a|x| <= |r|_1 L_a|H|` within slack.
    pub upper_holds: bool,
    /// `L_a|H| <= (1 + |k|_1) L_a|x|` within slack.
    pub lower_holds: bool,
    pub classes_agree: bool,
}

impl FluctuationReport {
    pub fn holds(&self) -> bool {
        self.upper_holds && self.lower_holds && self.classes_agree
    }
}

/// Compares the limsup classes and magnitudes of a solution and its forcing.
pub fn fluctuation_report(
    kernel: &Kernel,
    x: &Trajectory,
    forcing: &Trajectory,
    scale: &ScalingModel,
    config: &LimsupConfig,
) -> Result<FluctuationReport> {
    let horizon = x
        .end()
        .ok_or_else(|| Error::Input("empty trajectory".into()))?;
    let x_est = estimate_limsup(x, scale, config)?;
    let h_est = estimate_limsup(forcing, scale, config)?;
    let r_l1 = resolvent(kernel, horizon)
        .map(|r| l1(&r))
        .unwrap_or(f64::INFINITY);
    let k_l1 = kernel.l1_norm();
    let xv = x_est.value.unwrap_or(f64::INFINITY);
    let hv = h_est.value.unwrap_or(f64::INFINITY);
    Ok(FluctuationReport {
        upper_holds: le_with_slack(xv, r_l1 * hv),
        lower_holds: le_with_slack(hv, (1.0 + k_l1) * xv),
        classes_agree: x_est.classification == h_est.classification,
        x: x_est,
        forcing: h_est,
        r_l1,
        k_l1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionBound {
    /// Tail-window max of `|sum_j k(n-j) H(j)| / a(n)`.
    pub lhs: f64,
    /// `|k|_1` times the tail-window limsup of `|H|/a`.
    pub bound: f64,
    pub holds: bool,
}

/// Checks that convolving with a summable kernel does not raise the limsup
/// of `|H|/a` by more than the factor `|k|_1`.
pub fn convolution_bound(
    kernel: &Kernel,
    forcing: &Trajectory,
    scale: &ScalingModel,
    config: &LimsupConfig,
) -> Result<ConvolutionBound> {
    let end = forcing
        .end()
        .ok_or_else(|| Error::Input("empty trajectory".into()))?;
    let k = kernel.coefficients();
    let conv = Trajectory::from_fn(forcing.start(), end, |n| {
        let lo = (n + 1).saturating_sub(k.len()).max(forcing.start());
        (lo..=n).map(|j| k[n - j] * forcing.at_or_zero(j)).sum()
    })?;
    let lhs = estimate_limsup(&conv, scale, config)?;
    let h = estimate_limsup(forcing, scale, config)?;
    let bound = kernel.l1_norm() * h.value_or_inf();
    Ok(ConvolutionBound {
        lhs: lhs.window_max,
        bound,
        holds: le_with_slack(lhs.window_max, bound),
    })
}
