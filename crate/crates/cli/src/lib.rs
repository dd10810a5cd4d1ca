//! Scene files, trace tables and the `desing` subcommands.

pub mod commands;
pub mod scene;
pub mod trace;

use desing_core::Error;

pub use scene::{parse_scene, Scene};

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => 2,
        Error::Budget(_) => 4,
        _ => 3,
    }
}
