//! The `.shs` workspace format and the command-line front end.

pub mod cli;
pub mod lexer;
pub mod parser;
pub mod render;
pub mod workspace;

pub use cli::{run_command, Report, VerdictReport};
pub use workspace::{parse_workspace, ErrorKind, FormDecl, Workspace, WorkspaceError};
