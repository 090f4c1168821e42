//! Walks on a star graph of `N` half-lines (a spider) and their Brownian scaling limits.
//!
//! - [`randkit`]: seeded, splittable random streams and the basic samplers.
//! - [`spider`]: the spider graph, walk simulation and excursion relabeling.
//! - [`localtime`]: visit counts, leg occupation and streaming samplers.
//! - [`analytic`]: closed-form limit laws used as oracles.
//! - [`coupling`]: Skorokhod embedding of a walk in a lattice Brownian path.
//! - [`stats`]: KS and chi-square tests, moments, ECDFs.
//! - [`experiment`]: the experiment catalog, runner and reports.

pub mod analytic;
pub mod coupling;
pub mod error;
pub mod experiment;
pub mod localtime;
pub mod randkit;
pub mod spider;
pub mod stats;

pub use error::{Error, Result};
pub use randkit::{SeedSpec, SimRng};
pub use spider::{SpiderConfig, SpiderPath, SpiderPoint};
