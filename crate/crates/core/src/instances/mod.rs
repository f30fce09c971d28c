//! Instance files, random instances and LP export.

mod format;
mod generate;
mod lp;

pub use format::{from_json_str, read_instance, to_json_string, write_instance, InstanceError};
pub use generate::{generate, CapacityRule, GenSpec, SampleStream, STREAM};
pub use lp::{export_lp, write_lp, LpSummary};
