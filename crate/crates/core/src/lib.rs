//! Local motion planning for collision-resilient robots in unknown 2D worlds.
//!
//! The planner senses its surroundings through a sliding window, decomposes
//! the visible region into free space, frontiers, and obstacle boundaries,
//! and samples candidate states on the frontiers. A weighted cost balances
//! path length, collision risk, and the predicted benefit of bouncing off
//! obstacles, so the robot can deliberately trade collision avoidance
//! against collision exploitation.
//!
//! Crate layout:
//! - [`geometry`]: vectors, polygons, ray casting, visibility polygons.
//! - [`localmap`]: sliding-map decomposition and predicted boundaries.
//! - [`sampling`]: candidate generation on frontiers and two-step pruning.
//! - [`costs`]: position, risk, and velocity costs plus state selection.
//! - [`trajectory`]: timed cubic spline references.
//! - [`controller`]: maneuver switching and PID tracking.
//! - [`simulator`]: deterministic closed-loop world and episode runner.

pub mod controller;
pub mod costs;
pub mod geometry;
pub mod localmap;
pub mod sampling;
pub mod simulator;
pub mod trajectory;

pub use geometry::{Polygon, Segment, Vec2};
pub use simulator::{RobotState, World};
