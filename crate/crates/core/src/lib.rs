//! Unit-norm frames on the real sphere by projective Riesz energy
//! minimization: kernels and the projective-space embedding, energies with
//! analytic gradients, deterministic multistart descent, frame-quality
//! metrics against the classical coherence bounds, closed-form reference
//! configurations, and packing-file ingest.

pub mod energy;
pub mod error;
pub mod frame;
pub mod ingest;
pub mod kernels;
pub mod linalg;
pub mod metrics;
pub mod optimizer;
pub mod reference;

pub use error::{Error, Result};
pub use frame::{FrameConfig, UnitVector};
pub use kernels::{KernelFamily, KernelSpec};
