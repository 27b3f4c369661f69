use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use volterra_core::asymptotics::{
    convolution_bound, fluctuation_report, time_average, verify_growth3, GrowthCatalogue,
    LimsupConfig, ScalingModel, Sequence,
};
use volterra_core::{solve_linear, solve_linear_log, Kernel, LogTrajectory, Trajectory};

fn signed_kernel(raw: &[f64], l1: f64) -> Kernel {
    let norm: f64 = raw.iter().map(|v| v.abs()).sum::<f64>().max(1e-12);
    Kernel::new(raw.iter().map(|v| v * l1 / norm).collect()).unwrap()
}

/// `H(n) = n^p u(n)` with `u` i.i.d. uniform on `[-1, 1]`.
fn bounded_forcing(seed: u64, n: usize, p: f64) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Trajectory::from_fn(0, n, |m| {
        if m == 0 {
            0.0
        } else {
            (m as f64).powf(p) * rng.random_range(-1.0..1.0)
        }
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fluctuation_bounds_and_classes(
        raw in prop::collection::vec(-1.0f64..1.0, 1..6),
        l1 in 0.0f64..0.9,
        seed in any::<u64>(),
        p in prop::sample::select(vec![-1.0, 1.0, 2.0]),
    ) {
        let k = signed_kernel(&raw, l1);
        let n = 4000;
        let h = bounded_forcing(seed, n, p);
        let x = solve_linear(&k, &h, 0.0, n).unwrap();
        let a = ScalingModel::from_sequence(&Sequence::Power { scale: 1.0, exponent: 1.0, alternating: false }, n).unwrap();
        let report = fluctuation_report(&k, &x, &h, &a, &LimsupConfig::default()).unwrap();
        prop_assert!(report.upper_holds, "{report:?}");
        prop_assert!(report.lower_holds, "{report:?}");
        prop_assert!(report.classes_agree, "{:?} vs {:?}", report.x.classification, report.forcing.classification);
        let conv = convolution_bound(&k, &h, &a, &LimsupConfig::default()).unwrap();
        prop_assert!(conv.holds, "{conv:?}");
    }

    #[test]
    fn cesaro_means_stay_within_the_range(values in prop::collection::vec(-5.0f64..5.0, 1..200)) {
        let g = Trajectory::new(1, values.clone()).unwrap();
        let mu = time_average(&g).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, v) in values.iter().enumerate() {
            lo = lo.min(*v);
            hi = hi.max(*v);
            let m = mu.at_or_zero(i + 1);
            prop_assert!(m >= lo - 1e-12 && m <= hi + 1e-12);
        }
    }
}

#[test]
fn cesaro_means_of_a_convergent_sequence_converge() {
    let g = Trajectory::from_fn(1, 100_000, |n| {
        2.0 + (-1f64).powi(n as i32) / (n as f64).sqrt()
    })
    .unwrap();
    let mu = time_average(&g).unwrap();
    assert!((mu.last().unwrap() - 2.0).abs() < 1e-4);
}

#[test]
fn growth3_residuals_decay_across_the_catalogue() {
    let k = Kernel::geometric(0.3, 0.5, 40).unwrap();
    for member in GrowthCatalogue::examples() {
        let seq = Sequence::Catalogue(member.clone());
        // Iterated exponentials outgrow even the log representation early.
        let n = if seq.value_log(4096).is_ok() {
            4096
        } else {
            512
        };
        let a = ScalingModel::from_sequence(&seq, n).unwrap();
        let values = (0..=n)
            .map(|m| {
                if m == 0 {
                    Ok(volterra_core::LogValue::ZERO)
                } else {
                    seq.value_log(m)
                        .map(|v| v.scale(1.0 + 0.25 * (-1f64).powi(m as i32)))
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .unwrap();
        let h = LogTrajectory::new(0, values).unwrap();
        let x = solve_linear_log(&k, &h, 0.0, n).unwrap();
        let report = verify_growth3(&k, &x, &h, &a, None).unwrap();
        assert!(
            report.solution.residual_non_increasing(1e-12),
            "{}: {:?}",
            member.tag(),
            report.solution.residual_blocks
        );
        assert!(
            report.forcing.residual_non_increasing(1e-12),
            "{}: {:?}",
            member.tag(),
            report.forcing.residual_blocks
        );
    }
}
