//! File formats, DOT export and the command-line driver.

pub mod cli;
pub mod dot;
pub mod format;

pub use dot::item_graph_dot;
pub use format::{InstanceFile, SequenceFile};
