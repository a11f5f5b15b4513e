//! Independent finite-difference verification of the geometric identities.

pub mod fd;
pub mod geometry;
pub mod apen;
pub mod report;
