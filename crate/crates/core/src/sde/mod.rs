//! Galerkin approximations of the stochastic Navier–Stokes system, time
//! integrators and stopping-time bookkeeping.

mod config;
mod system;
mod trajectory;

pub use config::{InitialCondition, InitialKind, Monitor, Scheme, SimConfig, Viscous};
pub use system::{DriftParts, GalerkinSystem};
pub use trajectory::{
    blowup_functional, build_initial, run_with_path, simulate, RunOptions, SimSetup, Snapshot,
    StoppingTimeEvent, taylor_green_crossing, Trajectory, TrajectoryRecord, TrajectoryRunner,
};

#[cfg(test)]
mod tests;
