use serde::{Deserialize, Serialize};

use super::tails::TailModel;
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Number of log-spaced points used by the tail regression.
const REGRESSION_POINTS: usize = 200;
const MIN_REGRESSION_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesVerdict {
    Convergent,
    Divergent,
    Undecided,
}

/// Decides a positive series from the log-log slope of its summands over
/// the last decade `[N/10, N]`: below `-1` convergent, otherwise divergent.
/// Summands that vanish at the end of the range count as convergent.
pub fn regression_verdict(
    summand: impl Fn(usize) -> f64,
    horizon: usize,
) -> (Option<f64>, SeriesVerdict) {
    let lo = (horizon / 10).max(1);
    if horizon < 20 {
        return (None, SeriesVerdict::Undecided);
    }
    let (llo, lhi) = ((lo as f64).ln(), (horizon as f64).ln());
    let mut ns: Vec<usize> = (0..REGRESSION_POINTS)
        .map(|i| {
            (llo + (lhi - llo) * i as f64 / (REGRESSION_POINTS - 1) as f64)
                .exp()
                .round() as usize
        })
        .map(|n| n.clamp(lo, horizon))
        .collect();
    ns.dedup();
    let values: Vec<(usize, f64)> = ns.iter().map(|&n| (n, summand(n))).collect();
    if values.last().is_some_and(|v| v.1 == 0.0) {
        return (None, SeriesVerdict::Convergent);
    }
    let pts: Vec<(f64, f64)> = values
        .iter()
        .filter(|v| v.1 > 0.0)
        .map(|&(n, s)| ((n as f64).ln(), s.ln()))
        .collect();
    if pts.len() < MIN_REGRESSION_POINTS {
        return (None, SeriesVerdict::Undecided);
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    if !slope.is_finite() {
        return (None, SeriesVerdict::Undecided);
    }
    let verdict = if slope < -1.0 {
        SeriesVerdict::Convergent
    } else {
        SeriesVerdict::Divergent
    };
    (Some(slope), verdict)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub k: f64,
    /// `S_N(a, K)` at the horizon.
    pub partial_sum: f64,
    /// `(n, S_n)` at powers of ten and at the horizon.
    pub checkpoints: Vec<(usize, f64)>,
    pub decay_exponent: Option<f64>,
    pub verdict: SeriesVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub horizon: usize,
    pub rows: Vec<EnvelopeRow>,
    /// Adjacent grid values with a divergent verdict below and a convergent
    /// one above.
    pub bracket: Option<(f64, f64)>,
    /// Interpolated `K` at which the fitted exponent crosses `-1`.
    pub k_star: Option<f64>,
}

/// Partial sums of `S(a, K) = sum_n P[|H| > K a(n)]` over a grid of `K`.
///
/// `a` must be positive and nondecreasing on `0..=horizon` (or from its
/// first stored index, if later).
pub fn envelope_sums<T: TailModel + Sync>(
    tail: &T,
    a: &Trajectory,
    k_grid: &[f64],
    horizon: usize,
) -> Result<EnvelopeReport> {
    let end = a
        .end()
        .ok_or_else(|| Error::Input("empty scaling sequence".into()))?;
    if end < horizon {
        return Err(Error::Input(format!(
            "scaling ends at {end}, horizon is {horizon}"
        )));
    }
    let window = a.window(a.start(), horizon)?;
    if window.values().iter().any(|&v| v <= 0.0) || window.values().windows(2).any(|w| w[1] < w[0])
    {
        return Err(Error::Input(
            "scaling must be positive and nondecreasing".into(),
        ));
    }
    if k_grid.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
        return Err(Error::Parameter("K grid values must be positive".into()));
    }
    let mut grid = k_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let rows: Vec<EnvelopeRow> = grid
        .iter()
        .map(|&k| {
            let mut s = 0.0;
            let mut checkpoints = Vec::new();
            let mut next = 10usize;
            for (n, an) in window.iter() {
                s += tail.two_sided_tail(k * an);
                if n == next {
                    checkpoints.push((n, s));
                    next = next.saturating_mul(10);
                }
            }
            if checkpoints.last().is_none_or(|c| c.0 != horizon) {
                checkpoints.push((horizon, s));
            }
            let (decay_exponent, verdict) =
                regression_verdict(|n| tail.two_sided_tail(k * window.at_or_zero(n)), horizon);
            EnvelopeRow {
                k,
                partial_sum: s,
                checkpoints,
                decay_exponent,
                verdict,
            }
        })
        .collect();
    let pair = rows.windows(2).find(|w| {
        w[0].verdict == SeriesVerdict::Divergent && w[1].verdict == SeriesVerdict::Convergent
    });
    let bracket = pair.map(|w| (w[0].k, w[1].k));
    let k_star = pair.and_then(|w| match (w[0].decay_exponent, w[1].decay_exponent) {
        (Some(s0), Some(s1)) if s0 != s1 => {
            Some(w[0].k + (-1.0 - s0) / (s1 - s0) * (w[1].k - w[0].k))
        }
        _ => None,
    });
    Ok(EnvelopeReport {
        horizon,
        rows,
        bracket,
        k_star,
    })
}
