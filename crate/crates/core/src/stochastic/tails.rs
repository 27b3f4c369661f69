use rand::Rng;
use rand_distr::{Distribution, Normal, Open01};
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};

/// Distribution of an i.i.d. noise term, described through its tails.
pub trait TailModel {
    /// `F(x) = P[H <= x]`.
    fn cdf(&self, x: f64) -> f64;
    /// `G(x) = 1 - F(x)`, computed without cancellation where possible.
    fn upper_tail(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }
    /// `F(-x)`.
    fn lower_tail(&self, x: f64) -> f64 {
        self.cdf(-x)
    }
    /// `P[|H| > x] = G(x) + F(-x)` for `x >= 0`.
    fn two_sided_tail(&self, x: f64) -> f64 {
        self.upper_tail(x) + self.lower_tail(x)
    }
    /// `G^{-1}(p)`, the level exceeded with probability `p`.
    fn upper_quantile(&self, p: f64) -> f64;
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;
}

/// Built-in noise families. One-sided families are symmetrised by
/// reflecting half of the mass onto the negative axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailFamily {
    /// Point mass at zero.
    Degenerate,
    Normal {
        sigma: f64,
    },
    /// `F(-x) = c1 x^-alpha`, `1 - F(x) = c2 x^-alpha` for `x >= 1`, linear
    /// in between.
    SymmetricPower {
        alpha: f64,
        #[serde(default = "quarter")]
        c1: f64,
        #[serde(default = "quarter")]
        c2: f64,
    },
    /// `P[H > x] = P[H < -x] = exp(-(x/scale)^shape) / 2`.
    Weibull {
        scale: f64,
        shape: f64,
    },
    /// Uniform on `[-half_width, half_width]`.
    Uniform {
        #[serde(default = "unit")]
        half_width: f64,
    },
    /// Piecewise-linear distribution function through `(x[i], cdf[i])`,
    /// with `cdf` running from 0 to 1.
    Custom {
        x: Vec<f64>,
        cdf: Vec<f64>,
    },
}

fn quarter() -> f64 {
    0.25
}

fn unit() -> f64 {
    1.0
}

impl TailFamily {
    pub fn name(&self) -> &'static str {
        match self {
            TailFamily::Degenerate => "degenerate",
            TailFamily::Normal { .. } => "normal",
            TailFamily::SymmetricPower { .. } => "symmetric_power",
            TailFamily::Weibull { .. } => "weibull",
            TailFamily::Uniform { .. } => "uniform",
            TailFamily::Custom { .. } => "custom",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(format!("{}: {msg}", self.name())));
        match self {
            TailFamily::Degenerate => Ok(()),
            TailFamily::Normal { sigma } if !(*sigma > 0.0 && sigma.is_finite()) => {
                bad(format!("sigma must be positive, got {sigma}"))
            }
            TailFamily::SymmetricPower { alpha, c1, c2 } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return bad(format!("alpha must be positive, got {alpha}"));
                }
                if !(*c1 > 0.0 && *c2 > 0.0 && c1 + c2 <= 1.0) {
                    return bad(format!("need c1, c2 > 0 and c1 + c2 <= 1, got {c1}, {c2}"));
                }
                Ok(())
            }
            TailFamily::Weibull { scale, shape } if !(*scale > 0.0 && *shape > 0.0) => bad(
                format!("scale and shape must be positive, got {scale}, {shape}"),
            ),
            TailFamily::Uniform { half_width }
                if !(*half_width > 0.0 && half_width.is_finite()) =>
            {
                bad(format!("half width must be positive, got {half_width}"))
            }
            TailFamily::Custom { x, cdf } => {
                let ok = x.len() >= 2
                    && x.len() == cdf.len()
                    && x.windows(2).all(|w| w[1] > w[0])
                    && cdf.windows(2).all(|w| w[1] >= w[0])
                    && cdf[0] == 0.0
                    && cdf[cdf.len() - 1] == 1.0
                    && x.iter().all(|v| v.is_finite());
                if ok {
                    Ok(())
                } else {
                    bad("knots must be increasing with cdf running from 0 to 1".into())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            TailFamily::SymmetricPower { c1, c2, .. } => c1 == c2,
            TailFamily::Custom { .. } => false,
            _ => true,
        }
    }

    fn custom_inverse(x: &[f64], cdf: &[f64], u: f64) -> f64 {
        let i = cdf.partition_point(|&c| c < u).clamp(1, cdf.len() - 1);
        let (c0, c1) = (cdf[i - 1], cdf[i]);
        if c1 == c0 {
            x[i]
        } else {
            x[i - 1] + (u - c0) / (c1 - c0) * (x[i] - x[i - 1])
        }
    }

    /// `F^{-1}(u)` for `u` in `(0, 1)`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        match self {
            TailFamily::Degenerate => 0.0,
            TailFamily::Normal { sigma } => -sigma * SQRT_2 * erfc_inv(2.0 * u),
            TailFamily::SymmetricPower { alpha, c1, c2 } => {
                if u <= *c1 {
                    -(c1 / u).powf(1.0 / alpha)
                } else if u >= 1.0 - c2 {
                    (c2 / (1.0 - u)).powf(1.0 / alpha)
                } else {
                    -1.0 + 2.0 * (u - c1) / (1.0 - c1 - c2)
                }
            }
            TailFamily::Weibull { .. } | TailFamily::Uniform { .. } => {
                if u < 0.5 {
                    -self.upper_quantile(u)
                } else {
                    self.upper_quantile(1.0 - u)
                }
            }
            TailFamily::Custom { x, cdf } => Self::custom_inverse(x, cdf, u),
        }
    }
}

impl TailModel for TailFamily {
    fn cdf(&self, x: f64) -> f64 {
        if x > 0.0 {
            1.0 - self.upper_tail(x)
        } else {
            self.lower_tail(-x)
        }
    }

    fn upper_tail(&self, x: f64) -> f64 {
        match self {
            TailFamily::Degenerate => f64::from(u8::from(x < 0.0)),
            TailFamily::Normal { sigma } => 0.5 * erfc(x / (sigma * SQRT_2)),
            TailFamily::SymmetricPower { alpha, c1, c2 } => {
                if x >= 1.0 {
                    c2 * x.powf(-alpha)
                } else if x <= -1.0 {
                    1.0 - c1 * (-x).powf(-alpha)
                } else {
                    1.0 - (c1 + (1.0 - c1 - c2) * (x + 1.0) / 2.0)
                }
            }
            TailFamily::Weibull { scale, shape } => {
                if x >= 0.0 {
                    0.5 * (-(x / scale).powf(*shape)).exp()
                } else {
                    1.0 - 0.5 * (-(-x / scale).powf(*shape)).exp()
                }
            }
            TailFamily::Uniform { half_width } => {
                ((half_width - x) / (2.0 * half_width)).clamp(0.0, 1.0)
            }
            TailFamily::Custom { x: xs, cdf } => 1.0 - interpolate_cdf(xs, cdf, x),
        }
    }

    fn lower_tail(&self, x: f64) -> f64 {
        match self {
            TailFamily::Degenerate => f64::from(u8::from(x <= 0.0)),
            TailFamily::SymmetricPower { alpha, c1, c2 } => {
                if x >= 1.0 {
                    c1 * x.powf(-alpha)
                } else if x <= -1.0 {
                    1.0 - c2 * (-x).powf(-alpha)
                } else {
                    c1 + (1.0 - c1 - c2) * (1.0 - x) / 2.0
                }
            }
            TailFamily::Custom { x: xs, cdf } => interpolate_cdf(xs, cdf, -x),
            _ => self.upper_tail(x),
        }
    }

    fn upper_quantile(&self, p: f64) -> f64 {
        match self {
            TailFamily::Degenerate => 0.0,
            TailFamily::Normal { sigma } => sigma * SQRT_2 * erfc_inv(2.0 * p),
            TailFamily::SymmetricPower { .. } => self.inverse_cdf(1.0 - p),
            TailFamily::Weibull { scale, shape } => {
                if p <= 0.5 {
                    scale * (1.0 / (2.0 * p)).ln().powf(1.0 / shape)
                } else {
                    -scale * (1.0 / (2.0 * (1.0 - p))).ln().powf(1.0 / shape)
                }
            }
            TailFamily::Uniform { half_width } => half_width * (1.0 - 2.0 * p),
            TailFamily::Custom { x, cdf } => Self::custom_inverse(x, cdf, 1.0 - p),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            TailFamily::Degenerate => 0.0,
            TailFamily::Normal { sigma } => Normal::new(0.0, *sigma)
                .expect("validated sigma")
                .sample(rng),
            TailFamily::Uniform { half_width } => rng.random_range(-*half_width..=*half_width),
            _ => {
                let u: f64 = Open01.sample(rng);
                self.inverse_cdf(u)
            }
        }
    }
}

fn interpolate_cdf(xs: &[f64], cdf: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return 0.0;
    }
    if x >= xs[xs.len() - 1] {
        return 1.0;
    }
    let i = xs.partition_point(|&v| v < x);
    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    cdf[i - 1] + t * (cdf[i] - cdf[i - 1])
}
