//! Incremental randomized networks with supervised node configuration:
//! an unconditional-acceptance baseline, supervisory-inequality construction
//! with three output-weight schemes, and an orthogonalizing variant with
//! adaptive acceptance parameters.

pub mod dataset;
pub mod error;
pub mod harness;
pub mod irvfln;
pub mod linalg;
pub mod metrics;
pub mod network;
pub mod oscn;
pub mod report;
pub mod scn;

pub use error::{Error, Result};
pub use network::NetworkModel;
pub use report::TrialReport;
