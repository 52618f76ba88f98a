//! Simulation, tail estimation and verification of α-stable limits for
//! partial sums of heavy-tailed stationary sequences.

pub mod constants;
pub mod error;
pub mod models;
pub mod seeding;
pub mod stable;
pub mod tail;
pub mod verify;

pub use error::{Error, Result};
pub use models::{GarchSeries, ModelKind, ModelSpec, NoiseSpec, PositiveLaw};
pub use stable::{levy_tail, sample_stable, stable_cf, StableLimitParams, StandardStableParams};
