//! Summability of the resolvent through the characteristic equation, and
//! the growth multiplier `L(lambda) = 1 / (1 - sum_l k(l) lambda^(l+1))`.
//!
//! For a kernel with `M` stored entries the characteristic condition is
//! checked on the polynomial `p(z) = z^M - sum_{l<M} k(l) z^(M-1-l)`: the
//! resolvent is summable iff every root lies in the open unit disc.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::solver::resolvent;
use crate::trajectory::Trajectory;

/// Half-width of the band around the unit circle inside which the verdict
/// is `Marginal`.
pub const ROOT_TOLERANCE: f64 = 1e-9;

const SINGULAR_GAP: f64 = 1e-12;
const MAX_ATTEMPTS: usize = 6;
const MAX_ITERATIONS: usize = 1000;
const RESIDUAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summability {
    Summable,
    /// Some root lies within `ROOT_TOLERANCE` of the unit circle.
    Marginal,
    NotSummable,
}

impl Summability {
    pub fn is_summable(self) -> bool {
        self == Summability::Summable
    }

    fn from_modulus(max_modulus: f64) -> Self {
        if max_modulus < 1.0 - ROOT_TOLERANCE {
            Summability::Summable
        } else if max_modulus > 1.0 + ROOT_TOLERANCE {
            Summability::NotSummable
        } else {
            Summability::Marginal
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub re: f64,
    pub im: f64,
}

impl Root {
    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

impl From<Complex64> for Root {
    fn from(z: Complex64) -> Self {
        Root { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierPoint {
    pub lambda: f64,
    pub kappa: f64,
    /// `None` when `|1 - kappa| <= 1e-12`.
    pub multiplier: Option<f64>,
    /// `sum_{j<=horizon} r(j) lambda^j`, when the resolvent could be computed.
    pub rho_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub roots: Vec<Root>,
    pub max_modulus: f64,
    pub summability: Summability,
    /// Tail mass discarded by truncating the kernel; non-zero values mean the
    /// verdict is for the truncated kernel only.
    pub tail_mass: f64,
    pub multipliers: Vec<MultiplierPoint>,
}

impl SpectralReport {
    pub fn is_summable(&self) -> bool {
        self.summability.is_summable()
    }
}

/// Coefficients of `p`, highest degree first, with trailing zero
/// coefficients (roots at the origin) removed. Returns the deflated
/// coefficients and the multiplicity of the zero root.
fn characteristic_polynomial(kernel: &Kernel) -> (Vec<f64>, usize) {
    let mut coeffs = Vec::with_capacity(kernel.len() + 1);
    coeffs.push(1.0);
    coeffs.extend(kernel.coefficients().iter().map(|k| -k));
    let mut zeros = 0;
    while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
        coeffs.pop();
        zeros += 1;
    }
    (coeffs, zeros)
}

/// Returns `(p(z), p'(z), sum_i |c_i| |z|^(deg-i))`.
fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    let r = z.norm();
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
        scale = scale * r + c.abs();
    }
    (p, dp, scale)
}

fn backward_error(coeffs: &[f64], z: Complex64) -> f64 {
    let (p, _, scale) = horner(coeffs, z);
    if scale == 0.0 {
        0.0
    } else {
        p.norm() / scale
    }
}

/// Aberth-Ehrlich simultaneous iteration on a monic polynomial, followed by
/// Newton polishing of each root.
fn aberth(coeffs: &[f64], rng: &mut ChaCha8Rng, attempt: usize) -> (Vec<Complex64>, f64) {
    let degree = coeffs.len() - 1;
    // Fujiwara bound on root moduli.
    let bound = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| {
            let m = c.abs();
            if i == degree {
                (m / 2.0).powf(1.0 / i as f64)
            } else {
                m.powf(1.0 / i as f64)
            }
        })
        .fold(0.0, f64::max)
        * 2.0;
    let radius = if attempt == 0 {
        bound.max(1e-3) * 0.5
    } else {
        bound.max(1e-3) * rng.random_range(0.2..1.0)
    };
    let offset = if attempt == 0 {
        0.4
    } else {
        rng.random_range(0.0..std::f64::consts::TAU)
    };
    let mut z: Vec<Complex64> = (0..degree)
        .map(|i| {
            let theta = std::f64::consts::TAU * i as f64 / degree as f64 + offset;
            Complex64::from_polar(radius, theta)
        })
        .collect();

    let mut converged = vec![false; degree];
    for _ in 0..MAX_ITERATIONS {
        let mut all_done = true;
        for i in 0..degree {
            if converged[i] {
                continue;
            }
            let (p, dp, scale) = horner(coeffs, z[i]);
            if p.norm() <= f64::EPSILON * scale {
                converged[i] = true;
                continue;
            }
            all_done = false;
            let ratio = p / dp;
            let repulsion: Complex64 = (0..degree)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                continue;
            }
            z[i] -= step;
            if step.norm() <= f64::EPSILON * z[i].norm().max(f64::MIN_POSITIVE) {
                converged[i] = true;
            }
        }
        if all_done {
            break;
        }
    }

    for root in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp, _) = horner(coeffs, *root);
            if dp.norm() == 0.0 {
                break;
            }
            let next = *root - p / dp;
            if next.is_finite() && backward_error(coeffs, next) <= backward_error(coeffs, *root) {
                *root = next;
            } else {
                break;
            }
        }
    }
    let worst = z
        .iter()
        .map(|&root| backward_error(coeffs, root))
        .fold(0.0, f64::max);
    (z, worst)
}

/// Computes all roots of the truncated characteristic polynomial and the
/// summability verdict.
pub fn characteristic_roots(kernel: &Kernel) -> Result<SpectralReport> {
    let (coeffs, zero_roots) = characteristic_polynomial(kernel);
    let mut roots: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); zero_roots];
    if coeffs.len() > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x005e_ed0f_0001);
        let mut worst = f64::INFINITY;
        let mut found = None;
        for attempt in 0..MAX_ATTEMPTS {
            let (candidate, residual) = aberth(&coeffs, &mut rng, attempt);
            if residual < RESIDUAL_TOLERANCE && candidate.iter().all(|z| z.is_finite()) {
                found = Some(candidate);
                break;
            }
            worst = worst.min(residual);
            log::debug!("root attempt {attempt} stalled at backward error {residual:e}");
        }
        match found {
            Some(r) => roots.extend(r),
            None => {
                return Err(Error::Spectral {
                    attempts: MAX_ATTEMPTS,
                    residual: worst,
                })
            }
        }
    }
    roots.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let max_modulus = roots.first().map(|z| z.norm()).unwrap_or(0.0);
    Ok(SpectralReport {
        roots: roots.into_iter().map(Root::from).collect(),
        max_modulus,
        summability: Summability::from_modulus(max_modulus),
        tail_mass: kernel.tail_bound(),
        multipliers: Vec::new(),
    })
}

/// `L(lambda) = 1 / (1 - sum_l k(l) lambda^(l+1))` over the stored entries.
///
/// The value is meaningful as a growth limit only for summable kernels; use
/// [`spectral_report`] to obtain it together with the verdict.
pub fn multiplier_l(kernel: &Kernel, lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Parameter(format!(
            "lambda must lie in [0, 1], got {lambda}"
        )));
    }
    let gap = 1.0 - kernel.kappa(lambda);
    if gap.abs() <= SINGULAR_GAP {
        return Err(Error::SingularMultiplier { gap: gap.abs() });
    }
    Ok(1.0 / gap)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoSeries {
    /// `sum_{j<=n} r(j) lambda^j` for `n = 0..=horizon`.
    pub partial_sums: Trajectory,
    pub limit: f64,
    /// `|partial_sums(horizon) - limit|`.
    pub gap: f64,
    /// Whether `gap` is below the caller's tolerance, when one was given.
    pub within_tolerance: Option<bool>,
}

/// Partial sums of the geometrically weighted resolvent, alongside their
/// closed-form limit `multiplier_l(kernel, lambda)`.
pub fn rho_of_lambda(
    kernel: &Kernel,
    lambda: f64,
    horizon: usize,
    tolerance: Option<f64>,
) -> Result<RhoSeries> {
    let limit = multiplier_l(kernel, lambda)?;
    let r = resolvent(kernel, horizon)?;
    let mut power = 1.0;
    let mut acc = 0.0;
    let mut sums = Vec::with_capacity(horizon + 1);
    for &rj in r.values() {
        acc += rj * power;
        power *= lambda;
        sums.push(acc);
    }
    let partial_sums = Trajectory::new(0, sums)?;
    let gap = (acc - limit).abs();
    Ok(RhoSeries {
        partial_sums,
        limit,
        gap,
        within_tolerance: tolerance.map(|t| gap < t),
    })
}

/// Roots, verdict, and multiplier data over a grid of `lambda` values.
pub fn spectral_report(kernel: &Kernel, lambdas: &[f64], horizon: usize) -> Result<SpectralReport> {
    let mut report = characteristic_roots(kernel)?;
    let r = resolvent(kernel, horizon).ok();
    for &lambda in lambdas {
        let kappa = kernel.kappa(lambda);
        let multiplier = match multiplier_l(kernel, lambda) {
            Ok(v) => Some(v),
            Err(Error::SingularMultiplier { .. }) => None,
            Err(e) => return Err(e),
        };
        let rho_star = r.as_ref().and_then(|r| {
            let mut power = 1.0;
            let mut acc = 0.0;
            for &rj in r.values() {
                acc += rj * power;
                power *= lambda;
            }
            acc.is_finite().then_some(acc)
        });
        report.multipliers.push(MultiplierPoint {
            lambda,
            kappa,
            multiplier,
            rho_star,
        });
    }
    Ok(report)
}
