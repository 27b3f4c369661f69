use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use super::lambda::tail_start;
use super::limsup::dyadic_blocks;
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// A spectral peak must exceed this multiple of the median magnitude.
pub const NOISE_FLOOR_FACTOR: f64 = 3.0;

/// Candidate periods whose per-degree-of-freedom residual is within this
/// factor of the best fit count as equally good; the smallest wins.
const FIT_TOLERANCE: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodicVerdict {
    Periodic,
    NoPeriodicity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicExtraction {
    pub verdict: PeriodicVerdict,
    pub period: Option<usize>,
    /// One period of the pattern: `pattern[m]` is the value at `n = m mod p`.
    pub pattern: Vec<f64>,
    /// `pi` extended over the full input range.
    pub pi: Trajectory,
    pub residual: Trajectory,
    /// Sup of `|residual|` over the tail window.
    pub residual_tail_sup: f64,
    /// Residual sups over dyadic blocks.
    pub residual_blocks: Vec<(usize, usize, f64)>,
    /// Ratio of the dominant DFT magnitude to the median magnitude, when the
    /// period was searched for.
    pub peak_to_median: Option<f64>,
}

/// Residue-class means over `lo..=hi` and the residual sum of squares.
fn fit(g: &Trajectory, lo: usize, hi: usize, p: usize) -> (Vec<f64>, f64) {
    let mut sums = vec![0.0; p];
    let mut counts = vec![0usize; p];
    for n in lo..=hi {
        sums[n % p] += g.at_or_zero(n);
        counts[n % p] += 1;
    }
    let pattern: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let rss = (lo..=hi)
        .map(|n| (g.at_or_zero(n) - pattern[n % p]).powi(2))
        .sum();
    (pattern, rss)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Splits `g/a` into a periodic part and a residual.
///
/// With a hint the pattern is the residue-class mean over the tail window.
/// Without one the period is taken from the dominant DFT peak of the tail,
/// refined among nearby integer periods (and their multiples, to catch
/// harmonics) by least squares, capped at a eighth of the input length.
pub fn extract_almost_periodic(
    g_over_a: &Trajectory,
    period_hint: Option<usize>,
) -> Result<PeriodicExtraction> {
    let end = g_over_a
        .end()
        .ok_or_else(|| Error::Input("empty trajectory".into()))?;
    let first = g_over_a.start().max(1);
    if end < first + 15 {
        return Err(Error::Input(
            "periodic extraction needs at least 16 values".into(),
        ));
    }
    let lo = tail_start(first, end);
    let max_period = ((end + 1 - first) / 8).max(2);
    let (period, peak_to_median) = match period_hint {
        Some(0) => return Err(Error::Parameter("period hint must be positive".into())),
        Some(p) => (Some(p), None),
        None => search_period(g_over_a, lo, end, max_period),
    };
    let pattern = match period {
        Some(p) => fit(g_over_a, lo, end, p).0,
        None => fit(g_over_a, lo, end, 1).0,
    };
    let p = pattern.len();
    let pi = Trajectory::from_fn(g_over_a.start(), end, |n| pattern[n % p])?;
    let residual = g_over_a.map(|n, v| v - pattern[n % p])?;
    let residual_tail_sup = (lo..=end)
        .map(|n| residual.at_or_zero(n).abs())
        .fold(0.0, f64::max);
    let residual_blocks = dyadic_blocks(first, end)
        .into_iter()
        .map(|(a, b)| {
            (
                a,
                b,
                (a..=b)
                    .map(|n| residual.at_or_zero(n).abs())
                    .fold(0.0, f64::max),
            )
        })
        .collect();
    Ok(PeriodicExtraction {
        verdict: if period.is_some() {
            PeriodicVerdict::Periodic
        } else {
            PeriodicVerdict::NoPeriodicity
        },
        period,
        pattern,
        pi,
        residual,
        residual_tail_sup,
        residual_blocks,
        peak_to_median,
    })
}

fn search_period(
    g: &Trajectory,
    lo: usize,
    hi: usize,
    max_period: usize,
) -> (Option<usize>, Option<f64>) {
    let w = hi + 1 - lo;
    let mean = (lo..=hi).map(|n| g.at_or_zero(n)).sum::<f64>() / w as f64;
    let mut buf: Vec<Complex<f64>> = (lo..=hi)
        .map(|n| Complex::new(g.at_or_zero(n) - mean, 0.0))
        .collect();
    let spread = buf.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
    if spread <= 1e-12 * mean.abs().max(1.0) {
        return (None, None);
    }
    FftPlanner::new().plan_fft_forward(w).process(&mut buf);
    let mags: Vec<f64> = buf[1..=w / 2].iter().map(|c| c.norm()).collect();
    let (k_idx, &peak) = mags
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("tail window has at least 16 values");
    let floor = median(mags.clone());
    let ratio = if floor > 0.0 {
        peak / floor
    } else {
        f64::INFINITY
    };
    if ratio < NOISE_FLOOR_FACTOR {
        return (None, Some(ratio));
    }
    let base = w as f64 / (k_idx + 1) as f64;
    let mut candidates: Vec<usize> = (1..=8)
        .flat_map(|m| {
            let c = base * m as f64;
            [c.floor() as usize, c.ceil() as usize]
        })
        .filter(|&p| p >= 2 && p <= max_period)
        .collect();
    candidates.sort_unstable();
    candidates.dedup();
    if candidates.is_empty() {
        return (None, Some(ratio));
    }
    let scored: Vec<(usize, f64)> = candidates
        .iter()
        .map(|&p| {
            let (_, rss) = fit(g, lo, hi, p);
            (p, rss / (w - p).max(1) as f64)
        })
        .collect();
    let best = scored.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let threshold = best * FIT_TOLERANCE + 1e-24;
    let period = scored.iter().find(|s| s.1 <= threshold).map(|s| s.0);
    (period, Some(ratio))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn recovers_period_seven_with_decaying_perturbation() {
        let g = Trajectory::from_fn(1, 4000, |n| {
            (2.0 * PI * n as f64 / 7.0).sin() + 1.0 / n as f64
        })
        .unwrap();
        let e = extract_almost_periodic(&g, None).unwrap();
        assert_eq!(e.period, Some(7));
        assert!(e.residual_tail_sup < 1e-3);
        for n in 3000..3010 {
            assert!((e.pi.get(n).unwrap() - (2.0 * PI * n as f64 / 7.0).sin()).abs() < 1e-3);
        }
    }

    #[test]
    fn constant_has_no_period() {
        let g = Trajectory::from_fn(1, 500, |_| 2.5).unwrap();
        let e = extract_almost_periodic(&g, None).unwrap();
        assert_eq!(e.verdict, PeriodicVerdict::NoPeriodicity);
        assert!(e.pi.iter().all(|(_, v)| (v - 2.5).abs() < 1e-15));
        assert!(e.residual.iter().all(|(_, v)| v.abs() < 1e-15));
    }

    #[test]
    fn harmonic_rich_pattern_picks_fundamental() {
        let pattern = [3.0, -1.0, 0.5, 0.5, -2.0, 1.0, 0.0, 4.0, -3.0];
        let g = Trajectory::from_fn(1, 3000, |n| pattern[n % 9]).unwrap();
        let e = extract_almost_periodic(&g, None).unwrap();
        assert_eq!(e.period, Some(9));
        assert!(e.residual_tail_sup < 1e-12);
    }

    #[test]
    fn hint_is_respected() {
        let g = Trajectory::from_fn(1, 100, |n| (n % 4) as f64).unwrap();
        let e = extract_almost_periodic(&g, Some(4)).unwrap();
        assert_eq!(e.pattern, vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(e.peak_to_median, None);
    }
}
