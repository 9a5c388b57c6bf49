//! Simulation of the asymmetric simple exclusion process and the stochastic
//! six-vertex model on shared time graphs, with tools to measure how the
//! latter approaches the former as the vertex weights shrink.

pub mod error;
pub mod lattice;
pub mod rng;
pub mod timegraph;
pub mod asep;
pub mod sixvertex;
pub mod convergence;

pub use error::{Error, Result};
pub use lattice::{make_step_initial, sample_bernoulli_initial, BitPair, Color, InitialData, InitialDataSpec, ParticleConfig, Window};
pub use rng::RngStream;
pub use timegraph::{ContinuousTimeGraph, DiscreteTimeGraph};
