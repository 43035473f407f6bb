//! Simulation of a transmon coupled to a mechanical beam through a
//! flux-tunable radiation-pressure interaction.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod circuit;
pub mod constants;
pub mod formats;
pub mod model;
pub mod protocols;
pub mod quantum;
pub mod solvers;
