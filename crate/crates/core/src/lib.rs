//! Line-level source code hotspot mining.
//!
//! The pipeline replays a repository's patch history line by line, flags
//! files and lines that change far more often than their peers, labels each
//! hotspot line with a heuristic pattern, and attributes the edits to human
//! or automated committers.

pub mod bots;
pub mod churn;
pub mod classify;
pub mod diff;
pub mod pipeline;
pub mod select;
pub mod text;
pub mod track;
