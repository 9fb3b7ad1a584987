//! The finite-size criterion, the search for a witness, and the
//! renormalization coupling on quotients.

pub mod fc;
pub mod renorm;
pub mod search;

pub use fc::{auto_n, fc_check, fc_check_with_cap, fc_stream, FCParams, FcInstance, FcReport, ZoneEstimate, FC_HEADER};
pub use renorm::{
    conditional_success_stats, explore, omega_total_domination_check, p_zero, Domination, ExplorationState, Explorer, PZero,
    SprinkleParams, StepRecord, StratumRow, TieBreak, SITE_PC_Z2,
};
pub use search::{
    ell_eq_estimate, fc_search, split_segment, Dominance, EllEqEstimate, RegionSampler, SearchReport, SearchSettings, SearchStage,
    SplitResult, StageRecord,
};
