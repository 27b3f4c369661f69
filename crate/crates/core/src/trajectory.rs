use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite, contiguously indexed real sequence `value(n)` for
/// `start <= n < start + len`.
///
/// Every stored value is finite; constructors reject NaN and infinities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    start: usize,
    values: Vec<f64>,
}

impl Trajectory {
    pub fn new(start: usize, values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Overflow { index: start + i });
        }
        Ok(Self { start, values })
    }

    /// Builds `f(n)` for `start <= n <= end`.
    pub fn from_fn(start: usize, end: usize, f: impl FnMut(usize) -> f64) -> Result<Self> {
        Self::new(start, (start..=end).map(f).collect())
    }

    pub(crate) fn from_raw(start: usize, values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { start, values }
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// Last stored index, or `None` for an empty trajectory.
    pub fn end(&self) -> Option<usize> {
        (!self.values.is_empty()).then(|| self.start + self.values.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, n: usize) -> Option<f64> {
        n.checked_sub(self.start)
            .and_then(|i| self.values.get(i).copied())
    }

    /// Value at `n`, treating indices outside the stored range as zero.
    #[inline]
    pub fn at_or_zero(&self, n: usize) -> f64 {
        self.get(n).unwrap_or(0.0)
    }

    pub fn contains(&self, n: usize) -> bool {
        self.get(n).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.start + i, v))
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }

    pub fn map(&self, mut f: impl FnMut(usize, f64) -> f64) -> Result<Self> {
        Self::new(self.start, self.iter().map(|(n, v)| f(n, v)).collect())
    }

    /// Pointwise `self(n) / other(n)` over the common index range.
    pub fn ratio(&self, other: &Trajectory) -> Result<Self> {
        let (lo, hi) = self.common_range(other)?;
        let mut out = Vec::with_capacity(hi + 1 - lo);
        for n in lo..=hi {
            let d = other.at_or_zero(n);
            if d == 0.0 {
                return Err(Error::UndefinedRatio { index: n });
            }
            out.push(self.at_or_zero(n) / d);
        }
        Self::new(lo, out)
    }

    /// The index window `[lo, hi]` shared by both trajectories.
    pub fn common_range(&self, other: &Trajectory) -> Result<(usize, usize)> {
        let lo = self.start.max(other.start);
        let hi = match (self.end(), other.end()) {
            (Some(a), Some(b)) => a.min(b),
            _ => return Err(Error::Input("empty trajectory".into())),
        };
        if lo > hi {
            return Err(Error::LengthMismatch {
                left: format!("{}..={}", self.start, self.end().unwrap_or(0)),
                right: format!("{}..={}", other.start, other.end().unwrap_or(0)),
            });
        }
        Ok((lo, hi))
    }

    /// Restriction to `lo..=hi`.
    pub fn window(&self, lo: usize, hi: usize) -> Result<Self> {
        let end = self
            .end()
            .ok_or_else(|| Error::Input("empty trajectory".into()))?;
        if lo < self.start || hi > end || lo > hi {
            return Err(Error::Input(format!(
                "window {lo}..={hi} outside {}..={end}",
                self.start
            )));
        }
        Ok(Self::from_raw(
            lo,
            self.values[lo - self.start..=hi - self.start].to_vec(),
        ))
    }

    pub fn to_log(&self) -> LogTrajectory {
        LogTrajectory {
            start: self.start,
            values: self.values.iter().map(|&v| LogValue::from_f64(v)).collect(),
        }
    }
}

/// A real number stored as `sign * exp(ln_abs)`; zero has sign 0 and
/// `ln_abs = -inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub sign: i8,
    pub ln_abs: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            Self {
                sign: if v > 0.0 { 1 } else { -1 },
                ln_abs: v.abs().ln(),
            }
        }
    }

    /// `sign * exp(ln_abs)` with `ln_abs` finite (or `-inf` for zero).
    pub fn from_parts(sign: i8, ln_abs: f64) -> Self {
        if sign == 0 || ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                sign: sign.signum(),
                ln_abs,
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn is_valid(&self) -> bool {
        if self.sign == 0 {
            true
        } else {
            self.ln_abs.is_finite()
        }
    }

    /// Plain value; may overflow to infinity.
    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.ln_abs.exp()
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        if c == 0.0 || self.is_zero() {
            Self::ZERO
        } else {
            Self {
                sign: self.sign * if c > 0.0 { 1 } else { -1 },
                ln_abs: self.ln_abs + c.abs().ln(),
            }
        }
    }

    /// `self / other` as a plain number.
    pub fn ratio(&self, other: &LogValue) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        f64::from(self.sign * other.sign) * (self.ln_abs - other.ln_abs).exp()
    }

    /// Signed sum of terms, computed relative to the largest magnitude.
    pub fn sum(terms: &[LogValue]) -> LogValue {
        let peak = terms
            .iter()
            .filter(|t| !t.is_zero())
            .map(|t| t.ln_abs)
            .fold(f64::NEG_INFINITY, f64::max);
        if peak == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let acc: f64 = terms
            .iter()
            .filter(|t| !t.is_zero())
            .map(|t| f64::from(t.sign) * (t.ln_abs - peak).exp())
            .sum();
        if acc == 0.0 {
            Self::ZERO
        } else {
            Self {
                sign: if acc > 0.0 { 1 } else { -1 },
                ln_abs: peak + acc.abs().ln(),
            }
        }
    }
}

/// Log-magnitude counterpart of [`Trajectory`] for sequences that outgrow
/// the double range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogTrajectory {
    start: usize,
    values: Vec<LogValue>,
}

impl LogTrajectory {
    pub fn new(start: usize, values: Vec<LogValue>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_valid()) {
            return Err(Error::Overflow { index: start + i });
        }
        Ok(Self { start, values })
    }

    pub(crate) fn from_raw(start: usize, values: Vec<LogValue>) -> Self {
        Self { start, values }
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> Option<usize> {
        (!self.values.is_empty()).then(|| self.start + self.values.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[LogValue] {
        &self.values
    }

    pub fn get(&self, n: usize) -> Option<LogValue> {
        n.checked_sub(self.start)
            .and_then(|i| self.values.get(i).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, LogValue)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.start + i, v))
    }

    /// Converts back to plain doubles, failing at the first overflow.
    pub fn to_plain(&self) -> Result<Trajectory> {
        Trajectory::new(self.start, self.values.iter().map(|v| v.to_f64()).collect())
    }

    /// Pointwise `self(n) / other(n)` on the common range; the quotient is
    /// usually representable even when the factors are not.
    pub fn ratio(&self, other: &LogTrajectory) -> Result<Trajectory> {
        let lo = self.start.max(other.start);
        let hi = match (self.end(), other.end()) {
            (Some(a), Some(b)) => a.min(b),
            _ => return Err(Error::Input("empty trajectory".into())),
        };
        if lo > hi {
            return Err(Error::LengthMismatch {
                left: format!("{}..", self.start),
                right: format!("{}..", other.start),
            });
        }
        let mut out = Vec::with_capacity(hi + 1 - lo);
        for n in lo..=hi {
            let d = other.get(n).unwrap_or(LogValue::ZERO);
            if d.is_zero() {
                return Err(Error::UndefinedRatio { index: n });
            }
            out.push(self.get(n).unwrap_or(LogValue::ZERO).ratio(&d));
        }
        Trajectory::new(lo, out)
    }
}
