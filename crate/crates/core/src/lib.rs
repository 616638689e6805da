//! Compositional temporal visual-reasoning tasks.
//!
//! Tasks are small operator graphs over a stream of frames. This crate parses
//! and validates them, evaluates them with a forward interpreter, generates
//! balanced episodes by a backward pass, renders frames, scores model
//! responses and reads and writes datasets.

pub mod attr;
pub mod batch;
pub mod catalog;
pub mod count;
pub mod error;
pub mod eval;
pub mod generate;
pub mod graph;
pub mod instance;
pub mod instruction;
pub mod interp;
pub mod io;
pub mod render;
pub mod response;
pub mod rng;
pub mod scene;
pub mod taskfile;
