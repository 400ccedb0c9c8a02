//! Frontier-based object-goal navigation at desk scale.
//!
//! The crate bundles a deterministic 2D gridworld simulator with the
//! navigation engine itself: frontier extraction from a partial belief map,
//! semantic re-weighting of frontier information gain, a global target
//! management state machine, a grid point-goal planner, and a benchmark
//! harness computing SR/SPL.
//!
//! Everything here is `no_std` + `alloc`; IO, file formats, and the remote
//! VLM client live in the companion `frontis` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod camera;
pub mod config;
pub mod error;
pub mod eval;
pub mod frontier;
pub mod geom;
pub mod grid;
pub mod grounding;
pub mod manager;
pub mod num;
pub mod planner;
pub mod raster;
pub mod scoring;
pub mod sim;
pub mod world;

pub use camera::CameraModel;
pub use config::NavConfig;
pub use error::Error;
pub use geom::{Pose, Vec3};
pub use grid::{Belief, BeliefGrid, Cell, GridDims, Occupancy};
pub use manager::{Decision, Frontier, FrontierKind, Manager};
pub use world::WorldSpec;
