//! Numerical laboratory for noise in sampling models.
//!
//! * [`matcore`]: permanents, determinants, Haar and Gaussian ensembles.
//! * [`bosonsampler`]: exact boson and fermion sampling distributions.
//! * [`noisybs`]: Gaussian-mixing noisy boson sampling and its statistics.
//! * [`boolfourier`]: Walsh–Fourier analysis, the noise operator and
//!   repetition decoding.
//! * [`nisqsim`]: small depolarizing-noise circuit simulators (density matrix
//!   and trajectories) with correlation and error statistics.
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (the default) and sequentially otherwise; see [`par`]. Results do not
//! depend on the execution mode or thread count.

pub mod boolfourier;
pub mod bosonsampler;
pub mod distribution;
pub mod error;
pub mod matcore;
pub mod nisqsim;
pub mod noisybs;
pub mod par;
pub mod stats;

pub use distribution::{BitString, ModeSubset, OccupationVector, OutcomeDistribution};
pub use error::{Error, Result};
pub use matcore::{ComplexMatrix, RandomSource};
