//! Generative design engine for two-dimensional polygonal objects.
//!
//! The engine follows a sample / estimate / optimize loop over candidate
//! designs encoded as structures of open or closed polygons:
//!
//! * [`geometry`] — points, polygons, measures, predicates, chamfer distance.
//! * [`domain`] — problem geometry, the validity check and repair.
//! * [`sampler`] — random structure generation inside a domain.
//! * [`evolution`] — geometric mutation and crossover operators.
//! * [`estimators`] — objective evaluation, including threshold-gated
//!   composition of a cheap and an accurate estimator.
//! * [`optimizers`] — Pareto machinery, SPEA2 and a single-objective GA.
//! * [`toolkit`] — the pluggable sampler/estimator/optimizer bundle.
//! * [`design`] — the batch design loop with its three modes.
//! * [`suites`] — built-in desk-scale problem setups.

pub mod design;
pub mod domain;
pub mod estimators;
pub mod evolution;
pub mod geometry;
pub mod optimizers;
pub mod sampler;
pub mod suites;
pub mod toolkit;

pub use geometry::{Point, Polygon, PolygonKind, Structure};
