//! File formats, grid verification and the command-line front end for
//! [`fiscids_core`].

pub mod cli;
pub mod document;
pub mod pipeline;
pub mod verify;

pub use fiscids_core;
