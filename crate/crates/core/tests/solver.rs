use approx::assert_relative_eq;
use proptest::prelude::*;
use volterra_core::{
    recover_forcing, solve_by_representation, solve_linear, solve_linear_log, solve_nonlinear,
    Kernel, Nonlinearity, Trajectory,
};

fn kernel_strategy(max_len: usize, max_l1: f64) -> impl Strategy<Value = Kernel> {
    prop::collection::vec(-1.0f64..1.0, 1..=max_len).prop_flat_map(move |raw| {
        (Just(raw), 0.0..max_l1).prop_map(|(raw, l1)| {
            let norm: f64 = raw.iter().map(|v| v.abs()).sum::<f64>().max(1e-12);
            Kernel::new(raw.iter().map(|v| v * l1 / norm).collect()).unwrap()
        })
    })
}

fn forcing_strategy(n: usize) -> impl Strategy<Value = Trajectory> {
    prop::collection::vec(-1.0f64..1.0, n + 1).prop_map(|v| Trajectory::new(0, v).unwrap())
}

fn rel_gap(a: &Trajectory, b: &Trajectory) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(u, v)| (u - v).abs() / 1f64.max(u.abs()).max(v.abs()))
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recursion_matches_variation_of_constants(
        k in kernel_strategy(12, 0.95), h in forcing_strategy(300), xi in -2.0f64..2.0
    ) {
        let a = solve_linear(&k, &h, xi, 300).unwrap();
        let b = solve_by_representation(&k, &h, xi, 300).unwrap();
        prop_assert!(rel_gap(&a, &b) < 1e-10);
    }

    #[test]
    fn solution_is_linear_in_data(
        k in kernel_strategy(8, 0.9),
        h1 in forcing_strategy(150),
        h2 in forcing_strategy(150),
        c1 in -3.0f64..3.0,
        c2 in -3.0f64..3.0,
        xi1 in -1.0f64..1.0,
        xi2 in -1.0f64..1.0,
    ) {
        let x1 = solve_linear(&k, &h1, xi1, 150).unwrap();
        let x2 = solve_linear(&k, &h2, xi2, 150).unwrap();
        let h = Trajectory::from_fn(0, 150, |n| c1 * h1.at_or_zero(n) + c2 * h2.at_or_zero(n)).unwrap();
        let x = solve_linear(&k, &h, c1 * xi1 + c2 * xi2, 150).unwrap();
        let combo = Trajectory::from_fn(0, 150, |n| c1 * x1.at_or_zero(n) + c2 * x2.at_or_zero(n)).unwrap();
        prop_assert!(rel_gap(&x, &combo) < 1e-10);
    }

    #[test]
    fn forcing_is_recovered_from_the_solution(
        k in kernel_strategy(10, 0.95), h in forcing_strategy(200), xi in -1.0f64..1.0
    ) {
        let x = solve_linear(&k, &h, xi, 200).unwrap();
        let back = recover_forcing(&k, &x).unwrap();
        prop_assert_eq!(back.start(), 1);
        for n in 1..=200 {
            let scale = 1f64.max(x.at_or_zero(n).abs());
            prop_assert!((back.at_or_zero(n) - h.at_or_zero(n)).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn nonnegative_data_give_nonnegative_solutions(
        raw in prop::collection::vec(0.0f64..0.5, 1..8),
        h in prop::collection::vec(0.0f64..1.0, 101),
        xi in 0.0f64..1.0,
    ) {
        let k = Kernel::new(raw).unwrap();
        let h = Trajectory::new(0, h).unwrap();
        let x = solve_linear(&k, &h, xi, 100).unwrap();
        prop_assert!(x.values().iter().all(|&v| v >= 0.0));
        let y = solve_nonlinear(&k, &Nonlinearity::Saturating, &h, xi, 100).unwrap();
        prop_assert!(y.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn log_domain_agrees_with_plain(k in kernel_strategy(6, 0.9), h in forcing_strategy(120), xi in -1.0f64..1.0) {
        let plain = solve_linear(&k, &h, xi, 120).unwrap();
        let logged = solve_linear_log(&k, &h.to_log(), xi, 120).unwrap().to_plain().unwrap();
        prop_assert!(rel_gap(&plain, &logged) < 1e-9);
    }
}

#[test]
fn identity_nonlinearity_is_the_linear_solver() {
    let k = Kernel::new(vec![0.4, -0.2]).unwrap();
    let h = Trajectory::from_fn(0, 50, |n| (n as f64).sin()).unwrap();
    let a = solve_linear(&k, &h, 0.3, 50).unwrap();
    let b = solve_nonlinear(&k, &Nonlinearity::Identity, &h, 0.3, 50).unwrap();
    assert_eq!(a, b);
}

#[test]
fn single_lag_closed_form() {
    // x(n+1) = c x(n) + 1 with x(0) = 0 gives (1 - c^n) / (1 - c).
    let c = 0.7;
    let k = Kernel::single(c).unwrap();
    let h = Trajectory::from_fn(0, 40, |n| if n == 0 { 0.0 } else { 1.0 }).unwrap();
    let x = solve_linear(&k, &h, 0.0, 40).unwrap();
    for n in 0..=40 {
        assert_relative_eq!(
            x.at_or_zero(n),
            (1.0 - c.powi(n as i32)) / (1.0 - c),
            max_relative = 1e-13
        );
    }
}
