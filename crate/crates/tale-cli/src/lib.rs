//! Library side of the command-line front end: specification parsing, output
//! schemas, subcommand implementations, and the verification suite.

pub mod commands;
pub mod output;
pub mod spec;
pub mod verify;
