//! Command-line front end: reads a TOML run configuration and a CSV dataset,
//! runs one pipeline and writes CSV and SVG artifacts.

pub mod config;
pub mod data;
pub mod error;
pub mod output;
pub mod run;
pub mod svg;

pub use config::RunConfig;
pub use data::{load_dataset, Table};
pub use error::{CliError, Result};
pub use run::{run, Command, Overrides};
pub use svg::emit_svg_histogram;
