//! Scale-dependent dynamics of ordered text.
//!
//! A document becomes a sequence of sentence embeddings; consecutive
//! vectors give angular increments whose running sum is the semantic phase.
//! The overlapping Allan deviation of that phase across averaging scales
//! yields a short-time power-law exponent and, where the scaling breaks
//! down, a context horizon. Sentence-order shuffles provide the null model.
//!
//! ```
//! use semadev_core::{allan, scaling, signal, synth};
//!
//! let inc = synth::simulate(&synth::SignalKind::White { sigma: 1.0 }, 5_000, 7).unwrap();
//! let phase = signal::build_phase(&inc);
//! let grid = allan::make_tau_grid(phase.len(), 20).unwrap();
//! let curve = allan::adev_curve(phase.values(), &grid, "white").unwrap();
//! let fit = scaling::fit_exponent(&curve, phase.len(), 0.1).unwrap();
//! assert!((fit.alpha + 0.5).abs() < 0.1);
//! ```

pub mod allan;
pub mod corpus;
pub mod embedding;
pub mod rng;
pub mod scaling;
pub mod signal;
pub mod synth;
