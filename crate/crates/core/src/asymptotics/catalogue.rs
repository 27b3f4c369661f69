//! Deterministic growth sequences, evaluated in log-magnitude form so that
//! super-geometric members stay representable.
//!
//! Members involving iterated logarithms or negative powers are evaluated at
//! `n + shift`, with the shift chosen so that every factor is defined and
//! positive. Shifting does not change the ratio limit `g(n-1)/g(n)`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::trajectory::{LogTrajectory, LogValue, Trajectory};

const MAX_LOG_DEPTH: usize = 3;

fn iterated_log(x: f64, depth: usize) -> f64 {
    (0..depth).fold(x, |v, _| v.ln())
}

fn iterated_exp(x: f64, depth: usize) -> f64 {
    (0..depth).fold(x, |v, _| v.exp())
}

/// The growth catalogue `H1`..`H10`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "member", rename_all = "snake_case", deny_unknown_fields)]
pub enum GrowthCatalogue {
    /// `prod_i (log_i n)^beta_i`; the first non-zero `beta` must be positive.
    H1 { betas: Vec<f64> },
    /// `n^theta1 * H1(n)`, no sign restriction on `betas`.
    H2 { theta1: f64, betas: Vec<f64> },
    /// `n^theta1`, `theta1 > 0`.
    H3 { theta1: f64 },
    /// `exp(alpha n^theta2)`, `alpha > 0`, `0 < theta2 < 1`.
    H4 { alpha: f64, theta2: f64 },
    /// `H4(n) * H2(n)`.
    H5 {
        alpha: f64,
        theta2: f64,
        theta1: f64,
        betas: Vec<f64>,
    },
    /// `lambda^-n`, `0 < lambda < 1`.
    H6 { lambda: f64 },
    /// `H6(n) * H4(n) * H2(n)`.
    H7 {
        lambda: f64,
        alpha: f64,
        theta2: f64,
        theta1: f64,
        betas: Vec<f64>,
    },
    /// `exp(alpha n^theta2)` with `theta2 > 1`.
    H8 { alpha: f64, theta2: f64 },
    /// `n!`
    H9,
    /// `exp_depth(n)`, `depth >= 2`.
    H10 { depth: usize },
}

impl GrowthCatalogue {
    pub fn tag(&self) -> &'static str {
        match self {
            GrowthCatalogue::H1 { .. } => "H1",
            GrowthCatalogue::H2 { .. } => "H2",
            GrowthCatalogue::H3 { .. } => "H3",
            GrowthCatalogue::H4 { .. } => "H4",
            GrowthCatalogue::H5 { .. } => "H5",
            GrowthCatalogue::H6 { .. } => "H6",
            GrowthCatalogue::H7 { .. } => "H7",
            GrowthCatalogue::H8 { .. } => "H8",
            GrowthCatalogue::H9 => "H9",
            GrowthCatalogue::H10 { .. } => "H10",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Parameter(format!("{}: {msg}", self.tag())));
        let check_betas = |betas: &[f64], need_positive_lead: bool| -> Result<()> {
            if betas.is_empty() || betas.len() > MAX_LOG_DEPTH {
                return Err(Error::Parameter(format!(
                    "{}: between 1 and {MAX_LOG_DEPTH} iterated-log exponents required",
                    self.tag()
                )));
            }
            if need_positive_lead && betas.iter().find(|b| **b != 0.0).is_none_or(|b| *b < 0.0) {
                return Err(Error::Parameter(format!(
                    "{}: first non-zero exponent must be positive",
                    self.tag()
                )));
            }
            Ok(())
        };
        let sub = |alpha: f64, theta2: f64| alpha > 0.0 && theta2 > 0.0 && theta2 < 1.0;
        match self {
            GrowthCatalogue::H1 { betas } => check_betas(betas, true),
            GrowthCatalogue::H2 { theta1, betas } => {
                check_betas(betas, false)?;
                if *theta1 <= 0.0 {
                    return fail(format!("theta1 must be positive, got {theta1}"));
                }
                Ok(())
            }
            GrowthCatalogue::H3 { theta1 } => {
                if *theta1 <= 0.0 {
                    return fail(format!("theta1 must be positive, got {theta1}"));
                }
                Ok(())
            }
            GrowthCatalogue::H4 { alpha, theta2 } => {
                if !sub(*alpha, *theta2) {
                    return fail("need alpha > 0 and theta2 in (0,1)".into());
                }
                Ok(())
            }
            GrowthCatalogue::H5 {
                alpha,
                theta2,
                betas,
                ..
            } => {
                check_betas(betas, false)?;
                if !sub(*alpha, *theta2) {
                    return fail("need alpha > 0 and theta2 in (0,1)".into());
                }
                Ok(())
            }
            GrowthCatalogue::H6 { lambda } => {
                if !(*lambda > 0.0 && *lambda < 1.0) {
                    return fail(format!("lambda must lie in (0,1), got {lambda}"));
                }
                Ok(())
            }
            GrowthCatalogue::H7 {
                lambda,
                alpha,
                theta2,
                betas,
                ..
            } => {
                check_betas(betas, false)?;
                if !(*lambda > 0.0 && *lambda < 1.0) || !(*alpha > 0.0 && *theta2 > 0.0) {
                    return fail("need lambda in (0,1), alpha > 0, theta2 > 0".into());
                }
                Ok(())
            }
            GrowthCatalogue::H8 { alpha, theta2 } => {
                if !(*alpha > 0.0 && *theta2 > 1.0) {
                    return fail("need alpha > 0 and theta2 > 1".into());
                }
                Ok(())
            }
            GrowthCatalogue::H9 => Ok(()),
            GrowthCatalogue::H10 { depth } => {
                if *depth < 2 {
                    return fail(format!("depth must be at least 2, got {depth}"));
                }
                Ok(())
            }
        }
    }

    /// Ratio limit `lim g(n-1)/g(n)`.
    pub fn lambda(&self) -> f64 {
        match self {
            GrowthCatalogue::H1 { .. }
            | GrowthCatalogue::H2 { .. }
            | GrowthCatalogue::H3 { .. }
            | GrowthCatalogue::H4 { .. }
            | GrowthCatalogue::H5 { .. } => 1.0,
            GrowthCatalogue::H6 { lambda } | GrowthCatalogue::H7 { lambda, .. } => *lambda,
            GrowthCatalogue::H8 { .. } | GrowthCatalogue::H9 | GrowthCatalogue::H10 { .. } => 0.0,
        }
    }

    /// Index offset at which the member is evaluated.
    pub fn shift(&self) -> usize {
        let log_shift = |betas: &[f64]| iterated_exp(1.0, betas.len()).ceil() as usize;
        match self {
            GrowthCatalogue::H1 { betas }
            | GrowthCatalogue::H2 { betas, .. }
            | GrowthCatalogue::H5 { betas, .. }
            | GrowthCatalogue::H7 { betas, .. } => log_shift(betas),
            GrowthCatalogue::H3 { .. } => 1,
            _ => 0,
        }
    }

    fn ln_h1(betas: &[f64], m: f64) -> f64 {
        betas
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(i, b)| b * iterated_log(m, i + 1).ln())
            .sum()
    }

    /// `ln g(n)` (all members are positive).
    pub fn ln_value(&self, n: usize) -> f64 {
        let m = (n + self.shift()) as f64;
        match self {
            GrowthCatalogue::H1 { betas } => Self::ln_h1(betas, m),
            GrowthCatalogue::H2 { theta1, betas } => theta1 * m.ln() + Self::ln_h1(betas, m),
            GrowthCatalogue::H3 { theta1 } => theta1 * m.ln(),
            GrowthCatalogue::H4 { alpha, theta2 } | GrowthCatalogue::H8 { alpha, theta2 } => {
                alpha * m.powf(*theta2)
            }
            GrowthCatalogue::H5 {
                alpha,
                theta2,
                theta1,
                betas,
            } => alpha * m.powf(*theta2) + theta1 * m.ln() + Self::ln_h1(betas, m),
            GrowthCatalogue::H6 { lambda } => -m * lambda.ln(),
            GrowthCatalogue::H7 {
                lambda,
                alpha,
                theta2,
                theta1,
                betas,
            } => {
                -m * lambda.ln() + alpha * m.powf(*theta2) + theta1 * m.ln() + Self::ln_h1(betas, m)
            }
            GrowthCatalogue::H9 => ln_gamma(m + 1.0),
            GrowthCatalogue::H10 { depth } => iterated_exp(m, depth - 1),
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            GrowthCatalogue::H1 { .. } => "prod_i (log_i n)^beta_i            (G_1)",
            GrowthCatalogue::H2 { .. } => "n^theta1 H1(n)                     (G_1)",
            GrowthCatalogue::H3 { .. } => "n^theta1                           (G_1)",
            GrowthCatalogue::H4 { .. } => "exp(alpha n^theta2), theta2 < 1    (G_1)",
            GrowthCatalogue::H5 { .. } => "H4(n) H2(n)                        (G_1)",
            GrowthCatalogue::H6 { .. } => "lambda^-n                          (G_lambda)",
            GrowthCatalogue::H7 { .. } => "H6(n) H4(n) H2(n)                  (G_lambda)",
            GrowthCatalogue::H8 { .. } => "exp(alpha n^theta2), theta2 > 1    (G_0)",
            GrowthCatalogue::H9 => "n!                                 (G_0)",
            GrowthCatalogue::H10 { .. } => "exp_j(n), j >= 2                   (G_0)",
        }
    }

    /// One representative of every member, for listings and tests.
    pub fn examples() -> Vec<GrowthCatalogue> {
        vec![
            GrowthCatalogue::H1 {
                betas: vec![1.0, -0.5],
            },
            GrowthCatalogue::H2 {
                theta1: 0.5,
                betas: vec![-1.0],
            },
            GrowthCatalogue::H3 { theta1: 1.5 },
            GrowthCatalogue::H4 {
                alpha: 1.0,
                theta2: 0.5,
            },
            GrowthCatalogue::H5 {
                alpha: 0.5,
                theta2: 0.5,
                theta1: 1.0,
                betas: vec![1.0],
            },
            GrowthCatalogue::H6 { lambda: 0.5 },
            GrowthCatalogue::H7 {
                lambda: 0.8,
                alpha: 0.5,
                theta2: 0.5,
                theta1: 1.0,
                betas: vec![1.0],
            },
            GrowthCatalogue::H8 {
                alpha: 0.1,
                theta2: 1.5,
            },
            GrowthCatalogue::H9,
            GrowthCatalogue::H10 { depth: 2 },
        ]
    }
}

/// A deterministic sequence used either as forcing or as a scaling `a(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Sequence {
    Catalogue(GrowthCatalogue),
    /// `scale * max(n,1)^exponent`, times `(-1)^n` when `alternating`.
    Power {
        #[serde(default = "one")]
        scale: f64,
        exponent: f64,
        #[serde(default)]
        alternating: bool,
    },
    /// `exp(rate n)`.
    Exponential {
        rate: f64,
    },
    /// `sigma sqrt(2 ln max(n, 2))`.
    SqrtTwoLog {
        #[serde(default = "one")]
        sigma: f64,
    },
    /// `values[n]` for `n < values.len()`.
    Explicit {
        values: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl Sequence {
    pub fn validate(&self) -> Result<()> {
        match self {
            Sequence::Catalogue(c) => c.validate(),
            Sequence::Power {
                scale, exponent, ..
            } => {
                if !scale.is_finite() || !exponent.is_finite() {
                    return Err(Error::Parameter(
                        "power sequence needs finite parameters".into(),
                    ));
                }
                Ok(())
            }
            Sequence::Exponential { rate } => {
                if !rate.is_finite() || *rate <= 0.0 {
                    return Err(Error::Parameter(format!(
                        "exponential rate must be positive, got {rate}"
                    )));
                }
                Ok(())
            }
            Sequence::SqrtTwoLog { sigma } => {
                if *sigma <= 0.0 {
                    return Err(Error::Parameter(format!(
                        "sigma must be positive, got {sigma}"
                    )));
                }
                Ok(())
            }
            Sequence::Explicit { values } => {
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Parameter(
                        "explicit sequence has non-finite entries".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Ratio limit when it is known analytically.
    pub fn lambda(&self) -> Option<f64> {
        match self {
            Sequence::Catalogue(c) => Some(c.lambda()),
            Sequence::Power { alternating, .. } => Some(if *alternating { -1.0 } else { 1.0 }),
            Sequence::Exponential { rate } => Some((-rate).exp()),
            Sequence::SqrtTwoLog { .. } => Some(1.0),
            Sequence::Explicit { .. } => None,
        }
    }

    pub fn tag(&self) -> String {
        match self {
            Sequence::Catalogue(c) => c.tag().to_string(),
            Sequence::Power { .. } => "power".into(),
            Sequence::Exponential { .. } => "exponential".into(),
            Sequence::SqrtTwoLog { .. } => "sqrt_two_log".into(),
            Sequence::Explicit { .. } => "custom".into(),
        }
    }

    pub fn value_log(&self, n: usize) -> Result<LogValue> {
        let v = match self {
            Sequence::Catalogue(c) => LogValue::from_parts(1, c.ln_value(n)),
            Sequence::Power {
                scale,
                exponent,
                alternating,
            } => {
                let sign = if *alternating && n % 2 == 1 {
                    -1.0
                } else {
                    1.0
                };
                LogValue::from_f64(sign * scale).scale((n.max(1) as f64).powf(*exponent))
            }
            Sequence::Exponential { rate } => LogValue::from_parts(1, rate * n as f64),
            Sequence::SqrtTwoLog { sigma } => {
                LogValue::from_f64(sigma * (2.0 * (n.max(2) as f64).ln()).sqrt())
            }
            Sequence::Explicit { values } => match values.get(n) {
                Some(&v) => LogValue::from_f64(v),
                None => {
                    return Err(Error::Input(format!(
                        "explicit sequence has {} entries, index {n} requested",
                        values.len()
                    )))
                }
            },
        };
        if !v.is_valid() {
            return Err(Error::Overflow { index: n });
        }
        Ok(v)
    }

    /// Plain value, evaluated directly so that exactly representable terms
    /// such as `n` stay exact.
    pub fn value(&self, n: usize) -> Result<f64> {
        let v = match self {
            Sequence::Catalogue(c) => c.ln_value(n).exp(),
            Sequence::Power {
                scale,
                exponent,
                alternating,
            } => {
                let sign = if *alternating && n % 2 == 1 {
                    -1.0
                } else {
                    1.0
                };
                sign * scale * (n.max(1) as f64).powf(*exponent)
            }
            Sequence::Exponential { rate } => (rate * n as f64).exp(),
            Sequence::SqrtTwoLog { sigma } => sigma * (2.0 * (n.max(2) as f64).ln()).sqrt(),
            Sequence::Explicit { values } => *values.get(n).ok_or_else(|| {
                Error::Input(format!(
                    "explicit sequence has {} entries, index {n} requested",
                    values.len()
                ))
            })?,
        };
        if !v.is_finite() {
            return Err(Error::Overflow { index: n });
        }
        Ok(v)
    }

    /// `g(start..=end)` in log form.
    pub fn generate_log(&self, start: usize, end: usize) -> Result<LogTrajectory> {
        self.validate()?;
        let values = (start..=end)
            .map(|n| self.value_log(n))
            .collect::<Result<Vec<_>>>()?;
        LogTrajectory::new(start, values)
    }

    /// `g(start..=end)` as plain doubles; fails on overflow.
    pub fn generate(&self, start: usize, end: usize) -> Result<Trajectory> {
        self.validate()?;
        let values = (start..=end)
            .map(|n| self.value(n))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(start, values)
    }
}
