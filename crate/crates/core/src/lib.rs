//! Differentially private stochastic online learning.
//!
//! The crate provides three private learners and two baselines behind one
//! [`Policy`](algorithms::Policy) interface:
//!
//! - Anytime-Lazy-UCB: lazy, forgetful UCB over doubling arrays, each array
//!   released once through the Laplace mechanism.
//! - Hybrid-UCB: UCB over all observations, with a settled prefix of noisy
//!   array sums and a live binary-mechanism tree.
//! - Follow-the-Noisy-Leader: full-information epochs of doubling length,
//!   each closed by Report Noisy Max over fresh observations.
//! - UCB1 and DP-SE (private successive elimination) as baselines.
//!
//! The [`harness`] runs seeded Monte Carlo regret experiments and [`io`]
//! writes the traces, summaries and SVG charts.

pub mod algorithms;
pub mod cli;
pub mod env;
pub mod error;
pub mod harness;
pub mod io;
pub mod mechanisms;
pub mod noise;

pub use error::{Error, Result};
