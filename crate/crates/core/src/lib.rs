//! Detection theory and behavioural simulation for two-phase OOK wake-up
//! receivers.
//!
//! - [`model`]: Q-function, noise model, priors and signatures.
//! - [`detectors`]: closed-form P_D / P_FA for the energy detector, the
//!   two-phase correlator and the OOK and BPSK matched filters.
//! - [`monte_carlo`]: seeded simulation oracle for every closed form.
//! - [`analysis`]: ROC/AUC, threshold sweeps, energy optimisation, FoM.
//! - [`rx_sim`]: front-end calculators and a packet-level receiver model.
//! - [`validation`]: the analytic-versus-oracle agreement matrix.

// Negated comparisons reject NaN inputs along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod detectors;
pub mod error;
pub mod model;
pub mod monte_carlo;
pub mod rx_sim;
pub mod validation;

pub use error::{Error, Result};
