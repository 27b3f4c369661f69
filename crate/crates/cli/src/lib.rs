//! Config-driven experiment runner around `volterra-core`.
//!
//! Each run reads one JSON [`ExperimentConfig`], dispatches on its mode and
//! returns a [`Report`] whose checks decide the process exit code.

mod config;
mod error;
mod nonlinear;
mod report;
mod run;

pub use config::{EnsembleSection, EnvelopeSection, ExperimentConfig, Mode, Outputs, Tolerances};
pub use error::CliError;
pub use report::{csv, Report};
pub use run::{run_experiment, REPRESENTATION_CHECK_LIMIT};

/// Process exit codes.
pub mod exit {
    pub const PASSED: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const CHECK_FAILED: i32 = 2;
}

/// Human-readable catalogue of kernels, forcings, scalings and nonlinearities.
pub fn catalogue_listing() -> String {
    use std::fmt::Write as _;
    use volterra_core::asymptotics::GrowthCatalogue;
    use volterra_core::{KernelSpec, Nonlinearity};

    let mut out = String::new();
    let _ = writeln!(out, "kernels:");
    for (name, what) in KernelSpec::catalogue() {
        let _ = writeln!(out, "  {name:<16} {what}");
    }
    let _ = writeln!(out, "forcings:");
    for (name, what) in [
        ("iid", "i.i.d. draws from a tail family (normal, symmetric_power, weibull, uniform, custom, degenerate)"),
        ("random_walk_drift", "drift n + partial sums of noise"),
        ("geometric_random_walk", "exp(drift n + partial sums of noise)"),
        ("deterministic", "any scaling sequence below"),
        ("modulated", "base sequence times a periodic or uniform factor"),
    ] {
        let _ = writeln!(out, "  {name:<24} {what}");
    }
    let _ = writeln!(out, "scalings:");
    for (name, what) in [
        ("catalogue", "growth catalogue member, see below"),
        ("power", "n^p, optionally alternating"),
        ("exponential", "e^(rate n)"),
        ("sqrt_two_log", "sigma sqrt(2 log n)"),
        ("explicit", "user-supplied values"),
    ] {
        let _ = writeln!(out, "  {name:<16} {what}");
    }
    let _ = writeln!(out, "growth catalogue:");
    for member in GrowthCatalogue::examples() {
        let _ = writeln!(out, "  {:<4} {}", member.tag(), member.describe());
    }
    let _ = writeln!(out, "nonlinearities:");
    for (name, what) in Nonlinearity::catalogue() {
        let _ = writeln!(out, "  {name:<16} {what}");
    }
    out
}
