//! Configuration files, the end-to-end pipeline, reports and plot data for
//! [`hannay_core`].

pub mod config;
pub mod error;
pub mod pipeline;
pub mod plot;
pub mod report;
pub mod sweep;

pub use config::RunConfig;
pub use error::KitError;
pub use pipeline::{run_pipeline, Outcome, Stage};
pub use report::RunReport;
