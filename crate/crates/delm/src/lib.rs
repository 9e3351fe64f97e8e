//! File formats and command line for `delm-core`.
//!
//! Reads manifest XML, sender trace JSON and `app.spec` app descriptions from
//! disk, and renders reports and tables as JSON, CSV or TSV.

pub mod cli;
pub mod loader;
pub mod manifest_xml;
pub mod output;

pub use loader::{fixtures_dir, load_app, LoadError};
pub use manifest_xml::{parse_manifest, serialize_manifest};
