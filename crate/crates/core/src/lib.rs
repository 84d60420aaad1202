//! Steady-state coherence of a qubit coupled to a bosonic bath
//! through both a transverse and a longitudinal channel.
//!
//! The crate builds time-local second-order generators (with or without the
//! secular approximation), solves for their fixed points in closed form and
//! numerically, checks complete positivity through the Kossakowski matrix,
//! integrates the Bloch equations and runs parameter sweeps.

pub mod bath;
pub mod dynamics;
pub mod error;
pub mod ode;
pub mod positivity;
pub mod quadrature;
pub mod redfield;
pub mod report;
pub mod selftest;
pub mod steady;
pub mod superop;
pub mod sweep;

pub use bath::{BathSpec, CoefficientTime, PvStrategy, Rate, RedfieldCoefficients};
pub use dynamics::{CoefficientModel, DynamicsOptions, Propagator, SphereGrid, Trajectory, ViolationReport};
pub use error::{Error, Result};
pub use ode::OdeOptions;
pub use positivity::{KossakowskiData, ScalingReport};
pub use redfield::{BlochGenerator, GeneratorKind, Mode, SystemSpec};
pub use report::{Format, Table};
pub use selftest::{Check, SelftestOptions, SelftestReport};
pub use steady::{Flags, Method, Order, SteadyKernel, SteadyState};
pub use sweep::{Grid, SweepConfig, SweepRecord};
