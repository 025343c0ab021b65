//! Library half of the `qtm` binary, split out so the commands can be
//! exercised directly from tests.

pub mod alpha;
pub mod commands;
pub mod output;

pub use alpha::AlphaSpec;
