use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A convolution kernel `k(0..M)`, implicitly zero beyond the stored entries.
///
/// Kernels with infinite support are represented by truncation; `tail_bound`
/// records an upper bound on the discarded mass `sum_{l >= M} |k(l)|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    coefficients: Vec<f64>,
    tail_bound: f64,
}

impl Kernel {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        Self::with_tail_bound(coefficients, 0.0)
    }

    pub fn with_tail_bound(coefficients: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if let Some(i) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(Error::Parameter(format!(
                "kernel entry k({i}) = {} is not finite",
                coefficients[i]
            )));
        }
        if !(tail_bound >= 0.0 && tail_bound.is_finite()) {
            return Err(Error::Parameter(format!(
                "kernel tail bound must be finite and non-negative, got {tail_bound}"
            )));
        }
        Ok(Self {
            coefficients,
            tail_bound,
        })
    }

    pub fn zero() -> Self {
        Self {
            coefficients: Vec::new(),
            tail_bound: 0.0,
        }
    }

    /// Single-lag kernel `k = (c)`.
    pub fn single(c: f64) -> Result<Self> {
        Self::new(vec![c])
    }

    /// `k(l) = scale * ratio^l` truncated to `len` entries, with the analytic
    /// tail mass of the discarded geometric series as the tail bound.
    pub fn geometric(scale: f64, ratio: f64, len: usize) -> Result<Self> {
        if ratio.is_nan() || ratio.abs() >= 1.0 {
            return Err(Error::Parameter(format!(
                "geometric kernel ratio must satisfy |ratio| < 1, got {ratio}"
            )));
        }
        let coefficients: Vec<f64> = (0..len).map(|l| scale * ratio.powi(l as i32)).collect();
        let tail = scale.abs() * ratio.abs().powi(len as i32) / (1.0 - ratio.abs());
        Self::with_tail_bound(coefficients, tail)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `k(l)`, zero past the stored support.
    #[inline]
    pub fn at(&self, l: usize) -> f64 {
        self.coefficients.get(l).copied().unwrap_or(0.0)
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// `|k|_1` over the stored entries.
    pub fn l1_norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c.abs()).sum()
    }

    pub fn sum(&self) -> f64 {
        self.coefficients.iter().sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coefficients.iter().all(|&c| c >= 0.0)
    }

    /// `kappa(lambda) = sum_l k(l) lambda^(l+1)`.
    pub fn kappa(&self, lambda: f64) -> f64 {
        let mut power = lambda;
        let mut acc = 0.0;
        for &c in &self.coefficients {
            acc += c * power;
            power *= lambda;
        }
        acc
    }

    /// Returns the kernel `c * k`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::with_tail_bound(
            self.coefficients.iter().map(|k| k * c).collect(),
            self.tail_bound * c.abs(),
        )
    }
}

/// Kernel description used by experiment configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Zero,
    Single(f64),
    Geometric {
        scale: f64,
        ratio: f64,
        len: usize,
    },
    Explicit {
        coefficients: Vec<f64>,
        #[serde(default)]
        tail_bound: f64,
    },
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel> {
        match self {
            KernelSpec::Zero => Ok(Kernel::zero()),
            KernelSpec::Single(c) => Kernel::single(*c),
            KernelSpec::Geometric { scale, ratio, len } => Kernel::geometric(*scale, *ratio, *len),
            KernelSpec::Explicit {
                coefficients,
                tail_bound,
            } => Kernel::with_tail_bound(coefficients.clone(), *tail_bound),
        }
    }

    /// Catalogue entries listed by the CLI.
    pub fn catalogue() -> Vec<(&'static str, &'static str)> {
        vec![
            ("zero", "k = 0 (no memory)"),
            ("single", "k = (c), one lag"),
            (
                "geometric",
                "k(l) = scale * ratio^l for l < len, analytic tail bound",
            ),
            (
                "explicit",
                "user-supplied finite list with optional tail bound",
            ),
        ]
    }
}
