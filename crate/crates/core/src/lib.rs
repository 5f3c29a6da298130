//! Exact engine for dispersionless generalized Drinfeld-Sokolov hierarchies
//! and the Frobenius manifolds they carry.

// Matrix and tensor code indexes several arrays by the same loop variable.
#![allow(clippy::needless_range_loop)]

pub mod exact;
pub mod lie;
pub mod grading;
pub mod registry;
pub mod dressing;
pub mod gauge;
pub mod reference;
pub mod frobenius;
pub mod rgroup;
