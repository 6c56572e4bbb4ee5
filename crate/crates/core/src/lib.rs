//! Simulation and verification toolkit for flow-based patrol control of
//! minimally actuated robots in gyre-like planar flows.
//!
//! The crate models 2-D gyre-like velocity fields (analytic or fitted from
//! sparse measurements), runs a bang-bang radial controller that keeps a
//! robot inside an annular patrol band, and checks the period-bounding
//! guarantee numerically: a trajectory confined between two non-dissipative
//! boundary orbits completes each cycle in a time bounded by the periods of
//! those orbits.
//!
//! Modules:
//! - [`flow`]: analytic gyre models, the [`flow::FlowField`] trait, and
//!   orbit analysis (angular-velocity profiles, monotone bands, periods).
//! - [`geometry`]: implicit boundary fitting, the shape navigation function,
//!   the derived potential flow, and the circle-map coordinate transform.
//! - [`control`]: bang-bang radial controllers, the waypoint baseline, and
//!   the forced-pendulum thruster model.
//! - [`dynamics`]: RK4 trajectory integration, cycle detection, and control
//!   effort accounting.
//! - [`fitting`]: velocity-sample ingestion and least-squares gain fitting
//!   for the potential flow.

pub mod control;
pub mod dynamics;
pub mod fitting;
pub mod flow;
pub mod geometry;
pub mod vec2;

pub use control::{AnnulusRegion, BangBangConfig, ControlCommand, Controller};
pub use dynamics::{detect_cycles, integrate, CycleRecord, Trajectory};
pub use flow::{FlowField, GyreCenter, OrbitalDynamics, RadialBand, RadialFrame};
pub use geometry::ImplicitBoundary;
pub use vec2::Vec2;
