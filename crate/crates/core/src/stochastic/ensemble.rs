use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generator::{ForcingGenerator, ForcingKind};
use crate::asymptotics::{dyadic_blocks, time_average, ConvexFunctional, ScalingModel, Sequence};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::nonlinearity::Nonlinearity;
use crate::solver::{solve_linear, solve_linear_log, solve_nonlinear};
use crate::trajectory::LogTrajectory;

const BURN_IN: f64 = 0.25;

/// Per-path summary statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Statistic {
    /// Max of `|x(n)|/a(n)` after burn-in.
    LimsupRatio,
    /// `ln|x(N)| / N`.
    LogGrowthRate,
    /// Max of `ln|x(n)| / ln n` over the last dyadic block.
    LogLogExponent,
    /// `(1/N) sum_{n<=N} x(n)/a(n)`.
    CesaroLimit,
    /// Mean of `phi(|x(n)|)` after burn-in.
    PhiAverage { phi: ConvexFunctional },
}

impl Statistic {
    fn needs_scale(&self) -> bool {
        matches!(self, Statistic::LimsupRatio | Statistic::CesaroLimit)
    }
}

/// A randomly forced system together with the statistic and its
/// pre-registered acceptance band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSystem {
    pub kernel: Kernel,
    pub forcing: ForcingKind,
    pub nonlinearity: Option<Nonlinearity>,
    pub xi: f64,
    pub horizon: usize,
    pub log_domain: bool,
    pub scale: Option<Sequence>,
    pub statistic: Statistic,
    pub band: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathOutcome {
    pub path: u64,
    pub value: Option<f64>,
    pub error: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub outcomes: Vec<PathOutcome>,
    /// Successful values in increasing order.
    pub sorted_values: Vec<f64>,
    pub median: Option<f64>,
    pub pass_fraction: f64,
    pub failures: usize,
}

impl EnsembleSystem {
    pub fn validate(&self) -> Result<()> {
        self.forcing.validate()?;
        if self.horizon < 8 {
            return Err(Error::Parameter(
                "ensemble horizon must be at least 8".into(),
            ));
        }
        if self.band.0 > self.band.1 {
            return Err(Error::Parameter(format!("empty band {:?}", self.band)));
        }
        if self.statistic.needs_scale() && self.scale.is_none() {
            return Err(Error::Parameter(
                "statistic needs a scaling sequence".into(),
            ));
        }
        if let Some(f) = &self.nonlinearity {
            f.validate()?;
            if self.log_domain && !f.is_identity() {
                return Err(Error::Parameter("log-domain solves are linear only".into()));
            }
        }
        if let Statistic::PhiAverage { phi } = &self.statistic {
            phi.validate()?;
        }
        Ok(())
    }

    fn solve(&self, generator: &ForcingGenerator) -> Result<LogTrajectory> {
        if self.log_domain {
            let h = generator.generate_log(self.horizon)?;
            return solve_linear_log(&self.kernel, &h, self.xi, self.horizon);
        }
        let h = generator.generate(self.horizon)?;
        let x = match &self.nonlinearity {
            Some(f) => solve_nonlinear(&self.kernel, f, &h, self.xi, self.horizon)?,
            None => solve_linear(&self.kernel, &h, self.xi, self.horizon)?,
        };
        Ok(x.to_log())
    }

    fn statistic(&self, x: &LogTrajectory, scale: Option<&ScalingModel>) -> Result<f64> {
        let n_end = self.horizon;
        let burn = 1 + ((n_end as f64) * BURN_IN) as usize;
        let tail = || (burn..=n_end).map(|n| x.get(n).unwrap_or(crate::trajectory::LogValue::ZERO));
        let value = match &self.statistic {
            Statistic::LimsupRatio => {
                let ratio = scale
                    .expect("validated")
                    .divide_log(&log_window(x, 1, n_end)?)?;
                ratio
                    .window(burn, n_end)?
                    .values()
                    .iter()
                    .map(|v| v.abs())
                    .fold(0.0, f64::max)
            }
            Statistic::LogGrowthRate => {
                x.get(n_end).map_or(f64::NEG_INFINITY, |v| v.ln_abs) / n_end as f64
            }
            Statistic::LogLogExponent => {
                let (lo, hi) = *dyadic_blocks(2, n_end).last().expect("horizon >= 8");
                (lo.max(2)..=hi)
                    .map(|n| x.get(n).map_or(f64::NEG_INFINITY, |v| v.ln_abs) / (n as f64).ln())
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            Statistic::CesaroLimit => {
                let ratio = scale
                    .expect("validated")
                    .divide_log(&log_window(x, 1, n_end)?)?;
                time_average(&ratio)?.last().unwrap_or(f64::NAN)
            }
            Statistic::PhiAverage { phi } => {
                let count = (n_end + 1 - burn) as f64;
                tail().map(|v| phi.eval(v.to_f64().abs())).sum::<f64>() / count
            }
        };
        if !value.is_finite() {
            return Err(Error::Overflow { index: n_end });
        }
        Ok(value)
    }
}

fn log_window(x: &LogTrajectory, lo: usize, hi: usize) -> Result<LogTrajectory> {
    LogTrajectory::new(
        lo,
        (lo..=hi)
            .map(|n| x.get(n).unwrap_or(crate::trajectory::LogValue::ZERO))
            .collect(),
    )
}

/// Runs `paths` independent solves (stream `p` of `master_seed` for path
/// `p`) and scores the statistic against the band. A failing path is
/// recorded rather than aborting the ensemble.
pub fn ensemble_verify(
    system: &EnsembleSystem,
    paths: usize,
    master_seed: u64,
) -> Result<EnsembleReport> {
    system.validate()?;
    if paths == 0 {
        return Err(Error::Parameter("at least one path is required".into()));
    }
    let scale = system
        .scale
        .as_ref()
        .map(|s| ScalingModel::from_sequence(s, system.horizon))
        .transpose()?;
    let outcomes: Vec<PathOutcome> = (0..paths as u64)
        .into_par_iter()
        .map(|path| {
            let generator =
                ForcingGenerator::new(system.forcing.clone(), master_seed).with_stream(path);
            match system
                .solve(&generator)
                .and_then(|x| system.statistic(&x, scale.as_ref()))
            {
                Ok(v) => PathOutcome {
                    path,
                    value: Some(v),
                    error: None,
                    passed: v >= system.band.0 && v <= system.band.1,
                },
                Err(e) => PathOutcome {
                    path,
                    value: None,
                    error: Some(e.to_string()),
                    passed: false,
                },
            }
        })
        .collect();
    let mut sorted_values: Vec<f64> = outcomes.iter().filter_map(|o| o.value).collect();
    sorted_values.sort_by(f64::total_cmp);
    let median = (!sorted_values.is_empty()).then(|| {
        let m = sorted_values.len() / 2;
        if sorted_values.len() % 2 == 1 {
            sorted_values[m]
        } else {
            0.5 * (sorted_values[m - 1] + sorted_values[m])
        }
    });
    Ok(EnsembleReport {
        pass_fraction: outcomes.iter().filter(|o| o.passed).count() as f64 / paths as f64,
        failures: outcomes.iter().filter(|o| o.error.is_some()).count(),
        median,
        sorted_values,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::TailFamily;

    fn grw(noise: TailFamily) -> EnsembleSystem {
        EnsembleSystem {
            kernel: Kernel::new(vec![0.3, 0.2, 0.1]).unwrap(),
            forcing: ForcingKind::GeometricRandomWalk { drift: 0.1, noise },
            nonlinearity: None,
            xi: 1.0,
            horizon: 2000,
            log_domain: true,
            scale: None,
            statistic: Statistic::LogGrowthRate,
            band: (0.09, 0.11),
        }
    }

    #[test]
    fn degenerate_noise_gives_identical_paths() {
        let rep = ensemble_verify(&grw(TailFamily::Degenerate), 6, 1).unwrap();
        assert!(rep.sorted_values.windows(2).all(|w| w[0] == w[1]));
        assert!(rep.pass_fraction == 0.0 || rep.pass_fraction == 1.0);
    }

    #[test]
    fn ensemble_is_reproducible() {
        let sys = grw(TailFamily::Normal { sigma: 0.05 });
        assert_eq!(
            ensemble_verify(&sys, 4, 9).unwrap(),
            ensemble_verify(&sys, 4, 9).unwrap()
        );
    }

    #[test]
    fn overflowing_path_is_recorded() {
        let mut sys = grw(TailFamily::Normal { sigma: 0.05 });
        sys.log_domain = false;
        sys.horizon = 20_000;
        let rep = ensemble_verify(&sys, 2, 0).unwrap();
        assert_eq!(rep.failures, 2);
        assert_eq!(rep.pass_fraction, 0.0);
    }

    #[test]
    fn missing_scale_is_rejected() {
        let mut sys = grw(TailFamily::Degenerate);
        sys.statistic = Statistic::LimsupRatio;
        assert!(ensemble_verify(&sys, 2, 0).is_err());
    }
}
