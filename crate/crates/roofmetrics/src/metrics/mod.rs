//! Cloud-to-cloud distances with a quadratic-height local surface model,
//! and precision/recall/F-score reporting with threshold sweeps and flight
//! rankings.

mod c2c;
mod scores;

pub use c2c::{
    c2c_distances, compare_clouds, local_model_distance, C2CDistances, C2CResult,
    LocalModelOptions, ModelKind, ModelUsed,
};
pub use scores::{fscore, metric_curve, precision, rank_table, recall, FScoreTable, MetricCurve};
