//! Exact construction and verification of triangular folding curves
//! (terdragons and their relatives) and of the plane coverings they form.

pub mod analysis;
pub mod cli;
pub mod covering;
pub mod foldseq;
pub mod frontier;
pub mod render;
pub mod tcurve;
pub mod trilattice;
pub mod verify;
