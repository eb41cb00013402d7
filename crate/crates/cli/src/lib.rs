//! Command-line pipeline and HTTP service over `privapi_core`.

pub mod commands;
pub mod error;
pub mod home;
pub mod pipeline;
pub mod selections;
pub mod server;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult, ErrorKind};
