//! Query-efficient algorithms for finding Tarski fixed points on small
//! integer grids, built around the safe partial-information game.

pub mod bench;
pub mod candidates;
pub mod enumerate;
pub mod error;
pub mod functions;
pub mod game;
pub mod io;
pub mod lattice;
pub mod paths;
pub mod pi;
pub mod solver;
pub mod tracker;
pub mod verify;

pub use error::{Error, Result};
