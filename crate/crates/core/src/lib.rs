//! Computational laboratory for discrete subgroups of PSL(3,C).

pub mod census;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod gallery;
pub mod group;
pub mod index;
pub mod linalg;
pub mod plot;
pub mod proj;
pub mod pseudo;
pub mod report;
pub mod spec_io;

pub use error::{KlabError, Result};
