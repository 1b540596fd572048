//! Exact computations for locally finite refinements of the lidless-box
//! covering of finite-dimensional sup-norm spaces, and their pullbacks to
//! polyhedral normed spaces.

pub mod covering;
pub mod error;
pub mod geometry;
pub mod lp;
pub mod norming;
pub mod refinement;
pub mod render;
pub mod scalar;
pub mod verifier;

pub use covering::{locate_sigma, sigma_in_window, sigma_spec, SigmaId, Sign};
pub use error::{Error, Result};
pub use geometry::{sup_norm, BoxSpec, IntervalSpec, OpenSide, Point};
pub use norming::{
    build_pairs, check_norming, embed, pullback_locate, verify_pairs, witness, EmbeddingModel,
    Functional, NormedSpaceModel, NormingSet, Pair,
};
pub use refinement::{
    locate_tau, tau_in_window, tau_spec, verify_schedule, IdentityPairs, PairCoordinates,
    RefinementSchedule, TauId, TileWindow, WorstCasePairs,
};
pub use scalar::Scalar;
pub use verifier::{Mutation, Report, SampleMode, SampleSpec};
