use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics};

use crate::error::{Error, Result};
use crate::trajectory::{LogTrajectory, LogValue, Trajectory};

/// Interquartile range below which the ratio estimate counts as converged.
pub const LAMBDA_IQR_TOLERANCE: f64 = 1e-3;

/// Fraction of trailing indices used by tail-window estimators.
pub const TAIL_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub lambda_hat: f64,
    pub iqr: f64,
    pub converged: bool,
    /// Indices `n` whose ratio `g(n-1)/g(n)` entered the estimate.
    pub window: (usize, usize),
}

/// First index of the trailing `TAIL_FRACTION` of `start..=end`.
pub(crate) fn tail_start(start: usize, end: usize) -> usize {
    let len = end + 1 - start;
    let tail = ((len as f64 * TAIL_FRACTION).ceil() as usize).clamp(1, len);
    end + 1 - tail
}

fn summarise(ratios: Vec<f64>, window: (usize, usize)) -> LambdaEstimate {
    let mut data = Data::new(ratios);
    let lambda_hat = data.median();
    let iqr = data.upper_quartile() - data.lower_quartile();
    LambdaEstimate {
        lambda_hat,
        iqr,
        converged: iqr < LAMBDA_IQR_TOLERANCE,
        window,
    }
}

/// Summary of precomputed ratios `g(n-1)/g(n)` over their last quarter.
pub(crate) fn estimate_from_ratios(ratios: &Trajectory) -> Result<LambdaEstimate> {
    let end = ratios
        .end()
        .ok_or_else(|| Error::Input("no ratios to summarise".into()))?;
    let lo = tail_start(ratios.start(), end);
    Ok(summarise(ratios.window(lo, end)?.into_values(), (lo, end)))
}

/// Median of `g(n-1)/g(n)` over the last quarter of the stored range.
pub fn estimate_lambda(g: &Trajectory) -> Result<LambdaEstimate> {
    estimate_lambda_log(&g.to_log())
}

/// [`estimate_lambda`] for log-magnitude sequences.
pub fn estimate_lambda_log(g: &LogTrajectory) -> Result<LambdaEstimate> {
    let end = match g.end() {
        Some(e) if e > g.start() => e,
        _ => {
            return Err(Error::Input(
                "at least two values are needed for a ratio".into(),
            ))
        }
    };
    let lo = tail_start(g.start(), end).max(g.start() + 1);
    let mut ratios = Vec::with_capacity(end + 1 - lo);
    for n in lo..=end {
        let (prev, cur) = (
            g.get(n - 1).unwrap_or(LogValue::ZERO),
            g.get(n).unwrap_or(LogValue::ZERO),
        );
        if cur.is_zero() {
            return Err(Error::UndefinedRatio { index: n });
        }
        if prev.is_zero() {
            return Err(Error::UndefinedRatio { index: n - 1 });
        }
        ratios.push(prev.ratio(&cur));
    }
    Ok(summarise(ratios, (lo, end)))
}
