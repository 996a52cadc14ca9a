//! Exact post-quench dynamics of the periodic transverse-field XY chain and the
//! coherence measures of its nearest-neighbour two-spin state.
//!
//! Pipeline: [`lattice`] parameters → [`correlators`] momentum sums → [`density`]
//! X-state → [`measures`]; [`sweep`] evaluates grids in parallel and [`analysis`]
//! extracts revival times, scaling slopes and critical fields.

pub mod analysis;
pub mod config;
pub mod correlators;
pub mod density;
pub mod lattice;
pub mod linalg;
pub mod measures;
pub mod oracle;
pub mod summation;
pub mod sweep;
pub mod table;
pub mod verify;
