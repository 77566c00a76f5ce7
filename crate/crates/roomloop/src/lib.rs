//! File formats, floorplan JSON, SVG output and the command line for
//! [`roomloop_core`].

pub mod bundle;
pub mod cli;
pub mod error;
pub mod formats;
pub mod plan;
pub mod svg;

pub use error::FormatError;
pub use plan::PlanFile;
