//! Exact kinematics, motives, coaction and numerical evaluation for one-loop
//! n-gon Feynman integrals.

pub mod coaction;
pub mod graphs;
pub mod integrator;
pub mod kinematics;
pub mod linalg;
pub mod motive;
pub mod rational;
pub mod selftest;

pub use graphs::{CutQuotientGraph, EdgeSet, GraphError};
pub use kinematics::{GramIndex, KinematicPoint, KinematicsError};
pub use rational::Rational;
