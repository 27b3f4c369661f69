//! Finite-horizon solvers for the forced convolution equation
//!
//! ```text
//! x(n+1) = sum_{j=0}^{n} k(n-j) f(x(j)) + H(n+1),   x(0) = xi,
//! ```
//!
//! its resolvent `r` (the unforced solution with `r(0) = 1`) and the
//! variation-of-constants representation `x(n) = r(n) xi + sum_{j=1}^n r(n-j) H(j)`.
//!
//! The forcing is read from index 1 onwards; a value stored at index 0 is
//! never used.

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::nonlinearity::Nonlinearity;
use crate::trajectory::{LogTrajectory, LogValue, Trajectory};

fn check_forcing(first: usize, last: Option<usize>, horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Ok(());
    }
    match last {
        Some(last) if first <= 1 && last >= horizon => Ok(()),
        _ => Err(Error::ForcingTooShort {
            first,
            last: last.unwrap_or(0),
            horizon,
        }),
    }
}

fn warn_unused_origin(forcing: &Trajectory) {
    if let Some(h0) = forcing.get(0).filter(|&v| v != 0.0) {
        log::warn!("forcing value H(0) = {h0} is ignored; the equation reads H from index 1");
    }
}

/// Convolution `sum_{j=0}^{n} k(n-j) v(j)` restricted to the kernel support.
#[inline]
fn convolve_at(kernel: &[f64], history: &[f64], n: usize) -> f64 {
    let lo = (n + 1).saturating_sub(kernel.len());
    let mut acc = 0.0;
    for j in lo..=n {
        acc += kernel[n - j] * history[j];
    }
    acc
}

/// Solves the linear equation on `0..=horizon` by direct recursion.
///
/// Cost is `O(horizon * min(horizon, M))`.
pub fn solve_linear(
    kernel: &Kernel,
    forcing: &Trajectory,
    xi: f64,
    horizon: usize,
) -> Result<Trajectory> {
    solve_with(kernel, forcing, xi, horizon, Ok)
}

/// Solves the nonlinear equation with `f` applied inside the convolution.
pub fn solve_nonlinear(
    kernel: &Kernel,
    f: &Nonlinearity,
    forcing: &Trajectory,
    xi: f64,
    horizon: usize,
) -> Result<Trajectory> {
    if f.is_identity() {
        return solve_linear(kernel, forcing, xi, horizon);
    }
    solve_with(kernel, forcing, xi, horizon, |v| {
        let y = f.eval(v);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Nonlinearity {
                name: f.name().to_string(),
                input: v,
            })
        }
    })
}

fn solve_with(
    kernel: &Kernel,
    forcing: &Trajectory,
    xi: f64,
    horizon: usize,
    mut transform: impl FnMut(f64) -> Result<f64>,
) -> Result<Trajectory> {
    check_forcing(forcing.start(), forcing.end(), horizon)?;
    warn_unused_origin(forcing);
    if !xi.is_finite() {
        return Err(Error::Overflow { index: 0 });
    }
    let k = kernel.coefficients();
    let mut x = Vec::with_capacity(horizon + 1);
    // f(x(j)) history; aliases x when the transform is the identity
    let mut fx = Vec::with_capacity(horizon + 1);
    x.push(xi);
    fx.push(transform(xi)?);
    for n in 0..horizon {
        let next = convolve_at(k, &fx, n) + forcing.at_or_zero(n + 1);
        if !next.is_finite() {
            return Err(Error::Overflow { index: n + 1 });
        }
        x.push(next);
        fx.push(transform(next)?);
    }
    Ok(Trajectory::from_raw(0, x))
}

/// Resolvent `r(0..=horizon)`: `r(0) = 1`, `r(n+1) = sum_{j<=n} k(n-j) r(j)`.
pub fn resolvent(kernel: &Kernel, horizon: usize) -> Result<Trajectory> {
    let k = kernel.coefficients();
    let mut r = Vec::with_capacity(horizon + 1);
    r.push(1.0);
    for n in 0..horizon {
        let next = convolve_at(k, &r, n);
        if !next.is_finite() {
            return Err(Error::Overflow { index: n + 1 });
        }
        r.push(next);
    }
    Ok(Trajectory::from_raw(0, r))
}

/// Solves through the resolvent: `x(n) = r(n) xi + sum_{j=1}^n r(n-j) H(j)`.
///
/// This route is `O(horizon^2)` and independent of [`solve_linear`]'s
/// recursion, which makes the two a cross-check of each other.
pub fn solve_by_representation(
    kernel: &Kernel,
    forcing: &Trajectory,
    xi: f64,
    horizon: usize,
) -> Result<Trajectory> {
    check_forcing(forcing.start(), forcing.end(), horizon)?;
    let r = resolvent(kernel, horizon)?;
    solve_with_resolvent(&r, forcing, xi, horizon)
}

/// Variation-of-constants evaluation with a precomputed resolvent.
pub fn solve_with_resolvent(
    resolvent: &Trajectory,
    forcing: &Trajectory,
    xi: f64,
    horizon: usize,
) -> Result<Trajectory> {
    check_forcing(forcing.start(), forcing.end(), horizon)?;
    if resolvent.start() != 0 || resolvent.len() < horizon + 1 {
        return Err(Error::Input(format!(
            "resolvent covers {} indices, {} required",
            resolvent.len(),
            horizon + 1
        )));
    }
    let r = resolvent.values();
    let h: Vec<f64> = (0..=horizon).map(|n| forcing.at_or_zero(n)).collect();
    let mut x = Vec::with_capacity(horizon + 1);
    x.push(xi);
    for n in 1..=horizon {
        let mut acc = r[n] * xi;
        for j in 1..=n {
            acc += r[n - j] * h[j];
        }
        if !acc.is_finite() {
            return Err(Error::Overflow { index: n });
        }
        x.push(acc);
    }
    Ok(Trajectory::from_raw(0, x))
}

/// Recovers `H(n+1) = x(n+1) - sum_{j<=n} k(n-j) x(j)` from a solution.
///
/// The returned trajectory starts at index 1.
pub fn recover_forcing(kernel: &Kernel, solution: &Trajectory) -> Result<Trajectory> {
    recover_forcing_nonlinear(kernel, &Nonlinearity::Identity, solution)
}

/// Nonlinear rearrangement `H(n+1) = x(n+1) - sum_{j<=n} k(n-j) f(x(j))`.
pub fn recover_forcing_nonlinear(
    kernel: &Kernel,
    f: &Nonlinearity,
    solution: &Trajectory,
) -> Result<Trajectory> {
    if solution.start() != 0 {
        return Err(Error::Input("solution must be defined from index 0".into()));
    }
    let x = solution.values();
    let fx: Vec<f64> = x.iter().map(|&v| f.eval(v)).collect();
    let k = kernel.coefficients();
    let mut h = Vec::with_capacity(x.len().saturating_sub(1));
    for n in 0..x.len().saturating_sub(1) {
        h.push(x[n + 1] - convolve_at(k, &fx, n));
    }
    Trajectory::new(1, h)
}

/// Log-magnitude solve of the linear equation for forcings that outgrow `f64`.
pub fn solve_linear_log(
    kernel: &Kernel,
    forcing: &LogTrajectory,
    xi: f64,
    horizon: usize,
) -> Result<LogTrajectory> {
    check_forcing(forcing.start(), forcing.end(), horizon)?;
    if !xi.is_finite() {
        return Err(Error::Overflow { index: 0 });
    }
    let k: Vec<LogValue> = kernel
        .coefficients()
        .iter()
        .map(|&c| LogValue::from_f64(c))
        .collect();
    let m = k.len();
    let mut x: Vec<LogValue> = Vec::with_capacity(horizon + 1);
    x.push(LogValue::from_f64(xi));
    let mut terms = Vec::with_capacity(m + 1);
    for n in 0..horizon {
        terms.clear();
        let lo = (n + 1).saturating_sub(m);
        for j in lo..=n {
            let (kv, xv) = (k[n - j], x[j]);
            if !kv.is_zero() && !xv.is_zero() {
                terms.push(LogValue::from_parts(
                    kv.sign * xv.sign,
                    kv.ln_abs + xv.ln_abs,
                ));
            }
        }
        terms.push(forcing.get(n + 1).unwrap_or(LogValue::ZERO));
        let next = LogValue::sum(&terms);
        if !next.is_valid() {
            return Err(Error::Overflow { index: n + 1 });
        }
        x.push(next);
    }
    Ok(LogTrajectory::from_raw(0, x))
}

/// Log-magnitude resolvent, for kernels whose resolvent is not summable.
pub fn resolvent_log(kernel: &Kernel, horizon: usize) -> Result<LogTrajectory> {
    let zero = LogTrajectory::new(1, vec![LogValue::ZERO; horizon.max(1)])?;
    solve_linear_log(kernel, &zero, 1.0, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forcing(horizon: usize, h: impl Fn(usize) -> f64) -> Trajectory {
        Trajectory::from_fn(1, horizon.max(1), h).unwrap()
    }

    #[test]
    fn zero_kernel_returns_forcing() {
        let x = solve_linear(&Kernel::zero(), &forcing(5, |n| n as f64), 7.0, 5).unwrap();
        assert_eq!(x.values(), &[7.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn two_lag_hand_expansion() {
        let k = Kernel::new(vec![0.5, 0.25]).unwrap();
        let x = solve_linear(&k, &forcing(3, |_| 0.0), 1.0, 3).unwrap();
        assert_eq!(x.values(), &[1.0, 0.5, 0.5, 0.375]);
        let r = resolvent(&k, 3).unwrap();
        assert_eq!(r.values(), &[1.0, 0.5, 0.5, 0.375]);
    }

    #[test]
    fn single_lag_is_geometric() {
        let c = -0.7;
        let k = Kernel::single(c).unwrap();
        let r = resolvent(&k, 20).unwrap();
        for (n, v) in r.iter() {
            assert!((v - c.powi(n as i32)).abs() < 1e-15);
        }
        let x = solve_linear(&k, &forcing(20, |_| 0.0), 1.0, 20).unwrap();
        assert_eq!(x, r);
    }

    #[test]
    fn resolvent_of_zero_kernel() {
        let r = resolvent(&Kernel::zero(), 4).unwrap();
        assert_eq!(r.values(), &[1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn representation_with_unit_forcing() {
        // x(3) = r(2) + r(1) + r(0) = 0.5 + 0.5 + 1
        let k = Kernel::new(vec![0.5, 0.25]).unwrap();
        let x = solve_by_representation(&k, &forcing(3, |_| 1.0), 0.0, 3).unwrap();
        assert_eq!(x.get(3), Some(2.0));
    }

    #[test]
    fn representation_zero_kernel_matches_recursion() {
        let h = forcing(10, |n| (n as f64).sin());
        let a = solve_linear(&Kernel::zero(), &h, 3.0, 10).unwrap();
        let b = solve_by_representation(&Kernel::zero(), &h, 3.0, 10).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn recover_forcing_round_trip_powers_of_two() {
        let k = Kernel::new(vec![0.5, 0.25]).unwrap();
        let h = forcing(60, |n| 2f64.powi(n as i32));
        let x = solve_linear(&k, &h, 1.0, 60).unwrap();
        let back = recover_forcing(&k, &x).unwrap();
        for (n, v) in back.iter() {
            let want = 2f64.powi(n as i32);
            assert!(((v - want) / want).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn recover_forcing_trivial_cases() {
        let x = Trajectory::new(0, vec![4.0, 1.0, -2.0]).unwrap();
        let h = recover_forcing(&Kernel::zero(), &x).unwrap();
        assert_eq!(h.values(), &[1.0, -2.0]);
        let zeros = Trajectory::new(0, vec![0.0; 6]).unwrap();
        let h = recover_forcing(&Kernel::single(0.3).unwrap(), &zeros).unwrap();
        assert!(h.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn nonlinear_identity_is_bitwise_linear() {
        let k = Kernel::new(vec![0.4, -0.2, 0.1]).unwrap();
        let h = forcing(50, |n| (n as f64).cos() * n as f64);
        let a = solve_linear(&k, &h, 0.3, 50).unwrap();
        let b = solve_nonlinear(&k, &Nonlinearity::Identity, &h, 0.3, 50).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nonlinear_one_step() {
        let k = Kernel::single(0.5).unwrap();
        let x =
            solve_nonlinear(&k, &Nonlinearity::Saturating, &forcing(1, |_| 0.0), 1.0, 1).unwrap();
        assert_eq!(x.get(1), Some(0.75));
    }

    #[test]
    fn nonlinear_zero_kernel_ignores_f() {
        let h = forcing(8, |n| n as f64 - 3.0);
        let x = solve_nonlinear(&Kernel::zero(), &Nonlinearity::SqrtPerturbed, &h, 2.0, 8).unwrap();
        for n in 1..=8 {
            assert_eq!(x.get(n), h.get(n));
        }
    }

    #[test]
    fn overflow_names_first_bad_index() {
        let k = Kernel::single(1e300).unwrap();
        let err = solve_linear(&k, &forcing(10, |_| 1e300), 1e300, 10).unwrap_err();
        assert_eq!(err, Error::Overflow { index: 1 });
    }

    #[test]
    fn short_forcing_is_an_input_error() {
        let err = solve_linear(&Kernel::zero(), &forcing(3, |_| 1.0), 0.0, 5).unwrap_err();
        assert!(matches!(err, Error::ForcingTooShort { horizon: 5, .. }));
    }

    #[test]
    fn origin_forcing_value_is_ignored() {
        let h = Trajectory::new(0, vec![100.0, 1.0, 1.0]).unwrap();
        let x = solve_linear(&Kernel::single(0.5).unwrap(), &h, 0.0, 2).unwrap();
        assert_eq!(x.values(), &[0.0, 1.0, 1.5]);
    }

    #[test]
    fn log_solver_matches_plain_solver() {
        let k = Kernel::new(vec![0.6, -0.3, 0.2]).unwrap();
        let h = forcing(200, |n| (n as f64 * 0.7).sin() * (1.0 + n as f64));
        let plain = solve_linear(&k, &h, -1.5, 200).unwrap();
        let logged = solve_linear_log(&k, &h.to_log(), -1.5, 200).unwrap();
        for (n, v) in plain.iter() {
            let w = logged.get(n).unwrap().to_f64();
            assert!(
                (v - w).abs() <= 1e-12 * v.abs().max(1.0),
                "n={n}: {v} vs {w}"
            );
        }
    }
}
