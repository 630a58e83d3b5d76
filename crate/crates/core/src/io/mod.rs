//! File formats: CSV ingestion with zero and closure policies, the registry
//! of known real datasets, `key: value` run reports, `key = value` simulation
//! configs and CSV writers for curves and tables.

mod config;
mod dataset;
mod registry;
mod report;
mod write;

pub use config::{parse_study_config, Study};
pub use dataset::{load_csv, Closure, Dataset, LoadOptions, ZeroPolicy, STRICT_CLOSURE_TOLERANCE};
pub use registry::{lookup, registry, RegistryEntry, DATA_DIR_ENV};
pub use report::{sha256_hex, RunReport};
pub use write::{
    format_real, write_comparison, write_compositions, write_mean_curve, write_order_study,
    write_profile,
};
