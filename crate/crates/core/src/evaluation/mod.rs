//! Scoring clusterings and the empirical group statistics.

mod backtest;
mod bound;
mod connections;
mod misclustering;

pub use backtest::{contrarian_backtest, contrarian_strategy, groups_from_labels, BacktestConfig, BacktestResult, DailyBook, GroupSeries, LegMode, SpreadStat};
pub use bound::{min_block_proportion, theorem1_bound, BoundParams, BoundValue};
pub use connections::{group_centrality, group_connections, mean_t_test, period_connections, GroupConnection, SignificanceTest};
pub use misclustering::{
    confusion, max_agreement_exhaustive, max_agreement_hungarian, misclustering_rate, period_misclustering, MisclusteringReport, EXHAUSTIVE_LIMIT,
};
