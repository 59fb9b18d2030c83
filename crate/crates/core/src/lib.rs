//! Expectile neural networks: a one-hidden-layer sigmoid network trained under
//! the asymmetric squared loss inside an L1-constrained sieve, the learning
//! theory bounds that govern the sieve, and a Monte Carlo lab that checks the
//! large-sample behaviour of the estimator.

pub mod bounds;
pub mod error;
pub mod ks;
pub mod lab;
pub mod net;
pub mod par;
pub mod seed;
pub mod train;

pub use error::{EnnError, Result};
pub use net::{Dataset, EnnParams, SieveSpec, Tau};
pub use par::Execution;
pub use train::{FittedModel, TrainConfig};
