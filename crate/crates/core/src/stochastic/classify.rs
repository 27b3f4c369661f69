use serde::{Deserialize, Serialize};

use super::envelope::{regression_verdict, SeriesVerdict};
use super::tails::TailModel;
use crate::error::{Error, Result};

/// Settings of the rapid-tail certificate and the power-law fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    /// Exponent `beta` of the modulus `mu(x) = log^beta x`.
    pub beta: f64,
    /// The `delta*` at which the modulus is probed and the series summed.
    pub delta_star: f64,
    pub probes: Vec<f64>,
    pub ssv_tolerance: f64,
    /// Horizon of the partial sums of `1/(n mu^delta*(n))`.
    pub series_horizon: usize,
    /// Largest relative change in fitted tail slope still read as a power law.
    pub slope_tolerance: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            beta: 2.0,
            delta_star: 1.0,
            probes: vec![1e3, 1e4, 1e5, 1e6],
            ssv_tolerance: 0.02,
            series_horizon: 1_000_000,
            slope_tolerance: 0.05,
        }
    }
}

impl ClassifierConfig {
    fn mu(&self, x: f64) -> f64 {
        x.ln().powf(self.beta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0
            && self.delta_star > 0.0
            && self.ssv_tolerance > 0.0
            && self.slope_tolerance > 0.0)
            || self.probes.len() < 2
            || self.probes.iter().any(|&x| x <= std::f64::consts::E)
        {
            return Err(Error::Parameter(format!(
                "invalid classifier settings {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RvCase {
    /// Upper tail dominates.
    I,
    /// Lower tail dominates.
    Ii,
    /// Tails balanced with a finite positive ratio.
    Iii,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TailVerdict {
    Rapid,
    RegularlyVarying {
        alpha: f64,
        case: RvCase,
        /// `lim (1 - F(x)) / F(-x)` for case iii.
        ratio_limit: Option<f64>,
    },
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsvCertificate {
    /// `(x, |G^{-1}(1/(x mu^delta*(x))) / G^{-1}(1/x) - 1|)`.
    pub deviations: Vec<(f64, f64)>,
    pub max_deviation: f64,
    pub series_exponent: Option<f64>,
    pub series_verdict: SeriesVerdict,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// Local log-log slopes of `1 - F(x)` between consecutive probes.
    pub upper_slopes: Vec<f64>,
    /// Local log-log slopes of `F(-x)`.
    pub lower_slopes: Vec<f64>,
    /// `(1 - F(x)) / F(-x)` at the probes.
    pub tail_ratios: Vec<f64>,
    pub upper_is_power: bool,
    pub lower_is_power: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailClassification {
    pub verdict: TailVerdict,
    pub ssv: SsvCertificate,
    pub power_law: PowerLawFit,
    pub config: ClassifierConfig,
}

fn local_slopes(xs: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    xs.windows(2)
        .map(|w| {
            let (a, b) = (f(w[0]), f(w[1]));
            if a > 0.0 && b > 0.0 {
                (b.ln() - a.ln()) / (w[1].ln() - w[0].ln())
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect()
}

fn is_power(slopes: &[f64], tol: f64) -> bool {
    let (first, last) = (slopes[0], slopes[slopes.len() - 1]);
    first.is_finite() && last.is_finite() && last < 0.0 && (last - first).abs() <= tol * last.abs()
}

/// Sorts a tail into rapid decay (certified by the super-slow variation of
/// `G^{-1}(1/x)` under the modulus `mu`), power-law decay, or neither.
/// Both certificates holding at once is reported as undecided.
pub fn classify_tail<T: TailModel>(
    tail: &T,
    config: &ClassifierConfig,
) -> Result<TailClassification> {
    config.validate()?;
    let deviations: Vec<(f64, f64)> = config
        .probes
        .iter()
        .map(|&x| {
            let base = tail.upper_quantile(1.0 / x);
            let shifted = tail.upper_quantile(1.0 / (x * config.mu(x).powf(config.delta_star)));
            (x, (shifted / base - 1.0).abs())
        })
        .collect();
    let max_deviation = deviations
        .iter()
        .map(|d| if d.1.is_nan() { f64::INFINITY } else { d.1 })
        .fold(0.0, f64::max);
    let (series_exponent, series_verdict) = regression_verdict(
        |n| 1.0 / (n as f64 * config.mu(n as f64).powf(config.delta_star)),
        config.series_horizon,
    );
    let ssv_passed =
        max_deviation < config.ssv_tolerance && series_verdict == SeriesVerdict::Convergent;

    let upper_slopes = local_slopes(&config.probes, |x| tail.upper_tail(x));
    let lower_slopes = local_slopes(&config.probes, |x| tail.lower_tail(x));
    let tail_ratios: Vec<f64> = config
        .probes
        .iter()
        .map(|&x| tail.upper_tail(x) / tail.lower_tail(x))
        .collect();
    let upper_is_power = is_power(&upper_slopes, config.slope_tolerance);
    let lower_is_power = is_power(&lower_slopes, config.slope_tolerance);

    let last_ratio = tail_ratios[tail_ratios.len() - 1];
    let prev_ratio = tail_ratios[tail_ratios.len() - 2];
    let rv = if upper_is_power && (last_ratio.is_infinite() || last_ratio > 1e6) {
        Some((RvCase::I, -upper_slopes[upper_slopes.len() - 1], None))
    } else if lower_is_power && last_ratio < 1e-6 {
        Some((RvCase::Ii, -lower_slopes[lower_slopes.len() - 1], None))
    } else if upper_is_power
        && last_ratio > 0.0
        && (last_ratio / prev_ratio - 1.0).abs() <= config.slope_tolerance
    {
        Some((
            RvCase::Iii,
            -upper_slopes[upper_slopes.len() - 1],
            Some(last_ratio),
        ))
    } else {
        None
    };

    let verdict = match (ssv_passed, rv) {
        (true, None) => TailVerdict::Rapid,
        (false, Some((case, alpha, ratio_limit))) => TailVerdict::RegularlyVarying {
            alpha,
            case,
            ratio_limit,
        },
        _ => TailVerdict::Undecided,
    };
    Ok(TailClassification {
        verdict,
        ssv: SsvCertificate {
            deviations,
            max_deviation,
            series_exponent,
            series_verdict,
            passed: ssv_passed,
        },
        power_law: PowerLawFit {
            upper_slopes,
            lower_slopes,
            tail_ratios,
            upper_is_power,
            lower_is_power,
        },
        config: config.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::TailFamily;

    fn quick() -> ClassifierConfig {
        ClassifierConfig {
            series_horizon: 100_000,
            ..ClassifierConfig::default()
        }
    }

    #[test]
    fn power_law_case_three() {
        let t = TailFamily::SymmetricPower {
            alpha: 2.0,
            c1: 0.2,
            c2: 0.3,
        };
        let c = classify_tail(&t, &quick()).unwrap();
        match c.verdict {
            TailVerdict::RegularlyVarying {
                alpha,
                case,
                ratio_limit,
            } => {
                assert!((alpha - 2.0).abs() < 1e-9);
                assert_eq!(case, RvCase::Iii);
                assert!((ratio_limit.unwrap() - 1.5).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
        assert!(!c.ssv.passed);
    }

    #[test]
    fn modulus_series_converges() {
        let c = classify_tail(&TailFamily::Uniform { half_width: 1.0 }, &quick()).unwrap();
        assert_eq!(c.ssv.series_verdict, SeriesVerdict::Convergent);
        assert_eq!(c.verdict, TailVerdict::Rapid);
    }

    #[test]
    fn normal_deviation_follows_log_ratio() {
        // sqrt(1 + log mu(x) / log x) - 1 to leading order.
        let c = classify_tail(&TailFamily::Normal { sigma: 1.0 }, &quick()).unwrap();
        let (x, dev) = c.ssv.deviations[3];
        let lead = (1.0 + 2.0 * x.ln().ln() / x.ln()).sqrt() - 1.0;
        assert!((dev - lead).abs() < 0.05, "{dev} vs {lead}");
        assert!(!c.power_law.upper_is_power);
    }

    #[test]
    fn weibull_quantile_is_logarithmic() {
        let t = TailFamily::Weibull {
            scale: 2.0,
            shape: 1.0,
        };
        for x in [1e3, 1e6] {
            assert!((t.upper_quantile(1.0 / x) - 2.0 * (x / 2.0).ln()).abs() < 1e-9);
        }
        let c = classify_tail(&t, &quick()).unwrap();
        assert!(!c.power_law.upper_is_power);
    }
}
