//! Tractography-to-tractography mapping.
//!
//! Each tractography is encoded as a complete weighted graph whose edge
//! weights are Mean Average Minimum (MAM) distances between streamlines. A
//! mapping assigns every source streamline to one target streamline
//! (many-to-one is allowed) and is scored by the Frobenius discrepancy
//! `‖A − Q B Qᵀ‖` between the two adjacency matrices. The crate provides the
//! distance, the loss with an O(N) single-row delta, a stochastic-greedy
//! simulated annealing solver, exhaustive oracles for small instances, voxel
//! overlap metrics and a synthetic bundle generator.
//!
//! The crate is `no_std` and only needs `alloc`; file formats and the command
//! line live in the `tractmap` crate.

#![no_std]

extern crate alloc;

pub mod error;
pub mod eval;
pub mod geometry;
pub mod graph;
pub mod optim;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{Point3, Streamline, Tractography, VoxelSet};
pub use graph::{CrossDistance, DistanceMatrix, Mapping};
