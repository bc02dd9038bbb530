//! Command-line front end: argument parsing, config files, and JSON/CSV/SVG output.

pub mod app;
pub mod config;
pub mod error;
pub mod rows;
pub mod svg;

pub use app::run;
pub use error::CliError;
