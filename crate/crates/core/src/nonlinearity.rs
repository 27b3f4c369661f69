use serde::{Deserialize, Serialize};

/// Production function `g` used inside the Solow-style nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Production {
    /// `g(x) = sign(x) |x|^theta` with `0 < theta < 1`, so `g'(x) -> 0`.
    Power { theta: f64 },
}

impl Production {
    fn eval(&self, x: f64) -> f64 {
        match *self {
            Production::Power { theta } => x.signum() * x.abs().powf(theta),
        }
    }
}

/// Built-in catalogue of scalar nonlinearities `f` for the nonlinear equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Nonlinearity {
    Identity,
    /// `x + x / (1 + |x|)`
    Saturating,
    /// `x + sign(x) sqrt(|x|)`
    SqrtPerturbed,
    /// `(1 - delta) x + s g(x)`.
    ///
    /// `f(x)/x -> 1 - delta`, not 1: this member is flagged, and its
    /// linearisation at infinity is `x -> (1 - delta) x`.
    Solow {
        delta: f64,
        savings: f64,
        production: Production,
    },
}

impl Nonlinearity {
    pub fn name(&self) -> &'static str {
        match self {
            Nonlinearity::Identity => "identity",
            Nonlinearity::Saturating => "saturating",
            Nonlinearity::SqrtPerturbed => "sqrt_perturbed",
            Nonlinearity::Solow { .. } => "solow",
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Nonlinearity::Identity => x,
            Nonlinearity::Saturating => x + x / (1.0 + x.abs()),
            Nonlinearity::SqrtPerturbed => x + x.signum() * x.abs().sqrt(),
            Nonlinearity::Solow {
                delta,
                savings,
                production,
            } => (1.0 - delta) * x + savings * production.eval(x),
        }
    }

    /// `phi(x) = f(x) - x`.
    pub fn perturbation(&self, x: f64) -> f64 {
        self.eval(x) - x
    }

    /// The limit of `f(x)/x` as `|x| -> infinity`.
    pub fn asymptotic_slope(&self) -> f64 {
        match self {
            Nonlinearity::Solow { delta, .. } => 1.0 - delta,
            _ => 1.0,
        }
    }

    /// True when `f(x)/x -> 1`, i.e. the member is not flagged.
    pub fn has_unit_slope(&self) -> bool {
        self.asymptotic_slope() == 1.0
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Nonlinearity::Identity)
    }

    pub fn validate(&self) -> crate::Result<()> {
        if let Nonlinearity::Solow {
            delta,
            savings,
            production: Production::Power { theta },
        } = self
        {
            let ok = *delta > 0.0 && *delta < 1.0 && *savings > 0.0 && *savings < 1.0;
            if !ok || !(*theta > 0.0 && *theta < 1.0) {
                return Err(crate::Error::Parameter(format!(
                    "solow nonlinearity needs delta, s, theta in (0,1); got {delta}, {savings}, {theta}"
                )));
            }
        }
        Ok(())
    }

    pub fn catalogue() -> Vec<(&'static str, &'static str)> {
        vec![
            ("identity", "f(x) = x"),
            ("saturating", "f(x) = x + x/(1+|x|)"),
            ("sqrt_perturbed", "f(x) = x + sign(x) sqrt|x|"),
            (
                "solow",
                "f(x) = (1-delta) x + s g(x), g(x) = sign(x)|x|^theta; slope 1-delta (flagged)",
            ),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_slopes() {
        for f in [
            Nonlinearity::Identity,
            Nonlinearity::Saturating,
            Nonlinearity::SqrtPerturbed,
        ] {
            for x in [1e8, -1e8] {
                assert!((f.eval(x) / x - 1.0).abs() < 1e-3, "{}", f.name());
            }
            assert!(f.has_unit_slope());
        }
        let solow = Nonlinearity::Solow {
            delta: 0.1,
            savings: 0.2,
            production: Production::Power { theta: 0.5 },
        };
        assert!(!solow.has_unit_slope());
        assert!((solow.eval(1e12) / 1e12 - 0.9).abs() < 1e-6);
    }

    #[test]
    fn saturating_at_one() {
        assert_eq!(Nonlinearity::Saturating.eval(1.0), 1.5);
    }

    #[test]
    fn finite_on_grid() {
        let fs = [
            Nonlinearity::Saturating,
            Nonlinearity::SqrtPerturbed,
            Nonlinearity::Solow {
                delta: 0.1,
                savings: 0.2,
                production: Production::Power { theta: 0.5 },
            },
        ];
        for f in &fs {
            for i in -1000..=1000 {
                let x = f64::from(i) * 0.37;
                assert!(f.eval(x).is_finite());
            }
        }
    }
}
