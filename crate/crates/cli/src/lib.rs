//! JSON front end for the `normgroup` library.

pub mod commands;
pub mod docs;
pub mod render;

pub use commands::{reparse, run, Command, Failure, Options, Outcome};
