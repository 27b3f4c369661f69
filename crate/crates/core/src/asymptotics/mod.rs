//! Growth classification against a scaling sequence `a`: ratio limits,
//! limsup classes of `|g|/a`, the asymptotic representations of `x/a` and
//! `H/a`, periodic parts, time averages and convex-functional averages.

mod averages;
mod catalogue;
mod lambda;
mod limsup;
mod periodic;
mod representation;
mod scaling;

pub use averages::{phi_average_bounds, time_average, ConvexFunctional, PhiBounds, PHI_SLACK};
pub use catalogue::{GrowthCatalogue, Sequence};
pub use lambda::{
    estimate_lambda, estimate_lambda_log, LambdaEstimate, LAMBDA_IQR_TOLERANCE, TAIL_FRACTION,
};
pub use limsup::{
    convolution_bound, dyadic_blocks, estimate_limsup, estimate_limsup_ratio, fluctuation_report,
    Block, ConvolutionBound, FluctuationReport, LimsupClass, LimsupConfig, LimsupEstimate,
    BOUND_SLACK,
};
pub use periodic::{
    extract_almost_periodic, PeriodicExtraction, PeriodicVerdict, NOISE_FLOOR_FACTOR,
};
pub use representation::{
    predict_h_over_a, predict_x_over_a, verify_growth2, verify_growth3, DecompositionReport,
    Growth2Report, Growth3Report, ResidualBlock,
};
pub use scaling::ScalingModel;
