//! Finite-field harmonic analysis for gamma functional equations on matrix spaces.

pub mod exec;
pub mod fields;
pub mod gamma;
pub mod harmonic;
pub mod matspace;
pub mod params;
pub mod pairs;
pub mod reps;
pub mod scalars;
