use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tails::{TailFamily, TailModel};
use crate::asymptotics::Sequence;
use crate::error::{Error, Result};
use crate::trajectory::{LogTrajectory, LogValue, Trajectory};

/// Bounded stationary factor multiplying a deterministic base sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Factor {
    /// `values[n mod p]`.
    Periodic { values: Vec<f64> },
    /// i.i.d. uniform on `[low, high]`.
    Uniform { low: f64, high: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingKind {
    Iid(TailFamily),
    /// `H(n) = drift n + sum_{j<=n} Y(j)`.
    RandomWalkDrift {
        drift: f64,
        noise: TailFamily,
    },
    /// `H(n) = exp(drift n + sum_{j<=n} Y(j))`.
    GeometricRandomWalk {
        drift: f64,
        noise: TailFamily,
    },
    Deterministic(Sequence),
    /// `H(n) = base(n) * factor(n)`.
    Modulated {
        base: Sequence,
        factor: Factor,
    },
}

impl ForcingKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            ForcingKind::Iid(t) => t.validate(),
            ForcingKind::RandomWalkDrift { drift, noise }
            | ForcingKind::GeometricRandomWalk { drift, noise } => {
                if !drift.is_finite() {
                    return Err(Error::Parameter("drift must be finite".into()));
                }
                noise.validate()
            }
            ForcingKind::Deterministic(s) => s.validate(),
            ForcingKind::Modulated { base, factor } => {
                base.validate()?;
                match factor {
                    Factor::Periodic { values }
                        if values.is_empty() || values.iter().any(|v| !v.is_finite()) =>
                    {
                        Err(Error::Parameter(
                            "periodic factor needs finite values".into(),
                        ))
                    }
                    Factor::Uniform { low, high }
                        if !(low < high && low.is_finite() && high.is_finite()) =>
                    {
                        Err(Error::Parameter(format!(
                            "uniform factor needs low < high, got {low}, {high}"
                        )))
                    }
                    _ => Ok(()),
                }
            }
        }
    }

    pub fn is_random(&self) -> bool {
        match self {
            ForcingKind::Deterministic(_) => false,
            ForcingKind::Modulated { factor, .. } => matches!(factor, Factor::Uniform { .. }),
            _ => true,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ForcingKind::Iid(t) => format!("iid {}", t.name()),
            ForcingKind::RandomWalkDrift { .. } => "random walk with drift".into(),
            ForcingKind::GeometricRandomWalk { .. } => "geometric random walk".into(),
            ForcingKind::Deterministic(s) => format!("deterministic {}", s.tag()),
            ForcingKind::Modulated { base, .. } => format!("modulated {}", base.tag()),
        }
    }
}

/// A reproducible forcing source: `(kind, seed, stream)` fixes the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcingGenerator {
    pub kind: ForcingKind,
    pub seed: u64,
    /// Independent stream index, e.g. the path number in an ensemble.
    #[serde(default)]
    pub stream: u64,
}

impl ForcingGenerator {
    pub fn new(kind: ForcingKind, seed: u64) -> Self {
        Self {
            kind,
            seed,
            stream: 0,
        }
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// `H(1..=horizon)` in log form, with `H(0) = 0`.
    pub fn generate_log(&self, horizon: usize) -> Result<LogTrajectory> {
        if horizon == 0 {
            return Err(Error::Parameter("horizon must be at least 1".into()));
        }
        self.kind.validate()?;
        let mut rng = self.rng();
        let mut out = Vec::with_capacity(horizon + 1);
        out.push(LogValue::ZERO);
        match &self.kind {
            ForcingKind::Iid(t) => {
                out.extend((1..=horizon).map(|_| LogValue::from_f64(t.sample(&mut rng))))
            }
            ForcingKind::RandomWalkDrift { drift, noise } => {
                let mut walk = 0.0;
                for n in 1..=horizon {
                    walk += noise.sample(&mut rng);
                    out.push(LogValue::from_f64(drift * n as f64 + walk));
                }
            }
            ForcingKind::GeometricRandomWalk { drift, noise } => {
                let mut walk = 0.0;
                for n in 1..=horizon {
                    walk += noise.sample(&mut rng);
                    out.push(LogValue::from_parts(1, drift * n as f64 + walk));
                }
            }
            ForcingKind::Deterministic(s) => {
                for n in 1..=horizon {
                    out.push(s.value_log(n)?);
                }
            }
            ForcingKind::Modulated { base, factor } => {
                for n in 1..=horizon {
                    let m = match factor {
                        Factor::Periodic { values } => values[n % values.len()],
                        Factor::Uniform { low, high } => rng.random_range(*low..=*high),
                    };
                    out.push(base.value_log(n)?.scale(m));
                }
            }
        }
        LogTrajectory::new(0, out)
    }

    /// `H(0..=horizon)` as plain doubles; fails on overflow.
    ///
    /// Draws come from the same stream in the same order as
    /// [`generate_log`](Self::generate_log), but deterministic terms are
    /// evaluated directly rather than through their logarithm.
    pub fn generate(&self, horizon: usize) -> Result<Trajectory> {
        if horizon == 0 {
            return Err(Error::Parameter("horizon must be at least 1".into()));
        }
        self.kind.validate()?;
        let mut rng = self.rng();
        let mut out = Vec::with_capacity(horizon + 1);
        out.push(0.0);
        match &self.kind {
            ForcingKind::Iid(t) => out.extend((1..=horizon).map(|_| t.sample(&mut rng))),
            ForcingKind::RandomWalkDrift { drift, noise } => {
                let mut walk = 0.0;
                for n in 1..=horizon {
                    walk += noise.sample(&mut rng);
                    out.push(drift * n as f64 + walk);
                }
            }
            ForcingKind::GeometricRandomWalk { drift, noise } => {
                let mut walk = 0.0;
                for n in 1..=horizon {
                    walk += noise.sample(&mut rng);
                    out.push((drift * n as f64 + walk).exp());
                }
            }
            ForcingKind::Deterministic(s) => {
                for n in 1..=horizon {
                    out.push(s.value(n)?);
                }
            }
            ForcingKind::Modulated { base, factor } => {
                for n in 1..=horizon {
                    let m = match factor {
                        Factor::Periodic { values } => values[n % values.len()],
                        Factor::Uniform { low, high } => rng.random_range(*low..=*high),
                    };
                    out.push(base.value(n)? * m);
                }
            }
        }
        if let Some(index) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::Overflow { index });
        }
        Trajectory::new(0, out)
    }
}
