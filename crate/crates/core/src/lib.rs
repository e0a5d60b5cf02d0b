//! Subset-sum linear programming search for single-qubit-error-detecting
//! codes with transversal diagonal gates.

pub mod bitspace;
pub mod exactnum;
pub mod screens;
pub mod zfeas;
pub mod codes;
pub mod audit;
pub mod families;
pub mod sweep;
pub mod catalog;
