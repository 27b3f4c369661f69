//! Random forcing: seeded generators, Borel–Cantelli envelope sums,
//! tail classification and Monte-Carlo ensembles.

mod classify;
mod ensemble;
mod envelope;
mod generator;
mod tails;

pub use classify::{
    classify_tail, ClassifierConfig, PowerLawFit, RvCase, SsvCertificate, TailClassification,
    TailVerdict,
};
pub use ensemble::{ensemble_verify, EnsembleReport, EnsembleSystem, PathOutcome, Statistic};
pub use envelope::{envelope_sums, regression_verdict, EnvelopeReport, EnvelopeRow, SeriesVerdict};
pub use generator::{Factor, ForcingGenerator, ForcingKind};
pub use tails::{TailFamily, TailModel};
