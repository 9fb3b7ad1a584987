//! Experiment recipes: threshold estimation, locality and monotonicity
//! tables, the renormalisation demo, spec files and the result cache.

pub mod cache;
pub mod locality;
pub mod pc;
pub mod renorm;
pub mod spec;

pub use cache::{cached_estimate, Cache, CACHE_ENV};
pub use locality::{run_locality, run_monotonicity, LocalityRow, LocalityTable, MonotonicityRow, MonotonicityTable, Order, RowStatus};
pub use pc::{estimate_pc, forced_estimate, PcEstimate, PcSettings, PC_COLUMNS};
pub use renorm::{demo_layout, renorm_demo, RenormReport, RenormSettings};
pub use spec::{ExperimentKind, ExperimentSpec, Member, SPEC_HEADER};
