use serde::{Deserialize, Serialize};

use super::catalogue::Sequence;
use crate::error::{Error, Result};
use crate::trajectory::{LogTrajectory, LogValue, Trajectory};

/// A positive scaling sequence `a(n)`, stored as `ln a(n)` so that
/// super-geometric scales remain usable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingModel {
    start: usize,
    ln_a: Vec<f64>,
    lambda: Option<f64>,
    monotone: bool,
    tag: String,
}

impl ScalingModel {
    /// Builds a model from `ln a(start..)`; `lambda` is the known ratio
    /// limit, if any.
    pub fn from_log(
        start: usize,
        ln_a: Vec<f64>,
        lambda: Option<f64>,
        tag: impl Into<String>,
    ) -> Result<Self> {
        if ln_a.is_empty() {
            return Err(Error::Input("empty scaling sequence".into()));
        }
        if let Some(i) = ln_a.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "scaling sequence must be positive and finite; index {} is not",
                start + i
            )));
        }
        if let Some(l) = lambda {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::Parameter(format!(
                    "scaling lambda must lie in [0,1], got {l}"
                )));
            }
        }
        let monotone = ln_a.windows(2).all(|w| w[1] >= w[0]);
        Ok(Self {
            start,
            ln_a,
            lambda,
            monotone,
            tag: tag.into(),
        })
    }

    pub fn from_trajectory(
        a: &Trajectory,
        lambda: Option<f64>,
        tag: impl Into<String>,
    ) -> Result<Self> {
        if let Some((n, v)) = a.iter().find(|(_, v)| *v <= 0.0) {
            return Err(Error::Input(format!(
                "scaling must be positive; a({n}) = {v}"
            )));
        }
        Self::from_log(
            a.start(),
            a.values().iter().map(|v| v.ln()).collect(),
            lambda,
            tag,
        )
    }

    /// `a(n) = seq(n)` for `0 <= n <= horizon`.
    pub fn from_sequence(seq: &Sequence, horizon: usize) -> Result<Self> {
        let g = seq.generate_log(0, horizon)?;
        if let Some((n, _)) = g.iter().find(|(_, v)| v.sign <= 0) {
            return Err(Error::Input(format!(
                "scaling `{}` is not positive at n = {n}",
                seq.tag()
            )));
        }
        Self::from_log(
            0,
            g.values().iter().map(|v| v.ln_abs).collect(),
            seq.lambda().filter(|l| (0.0..=1.0).contains(l)),
            seq.tag(),
        )
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.start + self.ln_a.len() - 1
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn ln_a(&self, n: usize) -> Option<f64> {
        n.checked_sub(self.start)
            .and_then(|i| self.ln_a.get(i).copied())
    }

    /// `a(n)`; may be infinite for scales beyond the double range.
    pub fn a(&self, n: usize) -> Option<f64> {
        self.ln_a(n).map(f64::exp)
    }

    fn require(&self, lo: usize, hi: usize) -> Result<()> {
        if lo < self.start || hi > self.end() {
            return Err(Error::LengthMismatch {
                left: format!("{lo}..={hi}"),
                right: format!("{}..={}", self.start, self.end()),
            });
        }
        Ok(())
    }

    /// `g(n) / a(n)` over the whole range of `g`.
    pub fn divide(&self, g: &Trajectory) -> Result<Trajectory> {
        let hi = g
            .end()
            .ok_or_else(|| Error::Input("empty trajectory".into()))?;
        self.require(g.start(), hi)?;
        g.map(|n, v| {
            LogValue::from_f64(v).ratio(&LogValue::from_parts(1, self.ln_a[n - self.start]))
        })
    }

    /// `g(n) / a(n)` for a log-magnitude `g`.
    pub fn divide_log(&self, g: &LogTrajectory) -> Result<Trajectory> {
        let hi = g
            .end()
            .ok_or_else(|| Error::Input("empty trajectory".into()))?;
        self.require(g.start(), hi)?;
        Trajectory::new(
            g.start(),
            g.iter()
                .map(|(n, v)| v.ratio(&LogValue::from_parts(1, self.ln_a[n - self.start])))
                .collect(),
        )
    }

    /// Empirical ratios `a(n-1)/a(n)` over the stored range.
    pub fn ratios(&self) -> Trajectory {
        Trajectory::from_raw(
            self.start + 1,
            self.ln_a.windows(2).map(|w| (w[0] - w[1]).exp()).collect(),
        )
    }
}
