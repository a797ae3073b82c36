//! Monte-Carlo scenarios, the pseudo-real session pipeline and reporting.

pub mod output;
pub mod report;
pub mod scenario;
pub mod session;

pub use report::{aggregate_report, mean_sd, ConditionSummary, PairwiseTest, ReductionRow, SessionReport};
pub use scenario::{
    dataset_seed, evaluate_conventional, evaluate_erase, generate_dataset, median, run_false_positive,
    run_scenario1, run_scenario2, run_sensitivity, ColumnRecord, Configuration, Contaminant, FailedDataset,
    GridSummary, Method, ScenarioConfig, ScenarioKind, ScenarioOutput, SimulatedDataset,
};
pub use session::{
    pseudo_real_session, run_session_pipeline, BandTables, ChannelRow, Condition, PseudoRealOptions, SessionOutcome,
    SessionRecordSet,
};
