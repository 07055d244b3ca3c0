/// Crate version, embedded in experiment reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod error;
pub mod ldp;
pub mod levy;
pub mod mechanisms;
pub mod numerics;
pub mod riccati;
pub mod scalar;
pub mod simulate;
pub mod special;
pub mod stats;

pub use error::{Error, NumericsError, Result};
pub use ldp::{RateFunction, RatePoint, Regime};
pub use levy::{Integrand, JumpSampler, LevyMeasure, Role};
pub use mechanisms::{Mechanisms, ModelParams};
pub use riccati::{find_u_c, MinimumCase, RiccatiOptions, RiccatiProfile, RiccatiSolution, RiccatiStatus};
pub use scalar::Real;
pub use simulate::{qv_diagnostics, simulate_batch, PathBatch, PathConfig, PathRecord, Scheme};

pub type LevyMeasureF64 = LevyMeasure<f64>;
pub type LevyMeasureF32 = LevyMeasure<f32>;
pub type MechanismsF64 = Mechanisms<f64>;
pub type MechanismsF32 = Mechanisms<f32>;
pub type RiccatiProfileF64 = RiccatiProfile<f64>;
pub type RiccatiProfileF32 = RiccatiProfile<f32>;
pub type RateFunctionF64 = RateFunction<f64>;
pub type RateFunctionF32 = RateFunction<f32>;
