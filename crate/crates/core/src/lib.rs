//! Invariant Monge-Ampère equations on symmetric spaces: matrix models,
//! restricted roots, radial reduction of the operators, finite-difference
//! checks on the complexification and a reduced Newton solver.

pub mod catalog;
pub mod liealg;
pub mod expr;
pub mod jet;
pub mod radialops;
pub mod complexcheck;
pub mod solver;
pub mod cli;
