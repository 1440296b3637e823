use std::ops::Range;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::connections::{mean_t_test, SignificanceTest};
use crate::error::{Error, Result};
use crate::netbuild::ReturnPanel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LegMode {
    /// Bottom and top `q` fraction of the group.
    #[default]
    Quantile,
    /// The single worst and single best asset.
    SingleAsset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    pub quantile: f64,
    pub mode: LegMode,
    pub test: SignificanceTest,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self { quantile: 0.2, mode: LegMode::Quantile, test: SignificanceTest::Paired }
    }
}

/// One day's positions: asset indices with weights, each leg summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DailyBook {
    pub long: Vec<(usize, f64)>,
    pub short: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSeries {
    pub group: String,
    pub dates: Vec<NaiveDate>,
    /// Return per unit of gross exposure; zero on days with fewer than two
    /// eligible assets.
    pub daily: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub books: Vec<DailyBook>,
    /// Group too small for `q`; legs were widened to one asset each.
    pub widened: bool,
    pub idle_days: usize,
}

impl GroupSeries {
    pub fn mean(&self) -> f64 {
        if self.daily.is_empty() {
            0.0
        } else {
            self.daily.iter().sum::<f64>() / self.daily.len() as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadStat {
    pub first: String,
    pub second: String,
    pub mean_diff: f64,
    pub tstat: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestResult {
    pub groups: Vec<GroupSeries>,
    pub spreads: Vec<SpreadStat>,
}

/// Leg size for `n` eligible assets.
fn leg_size(n: usize, cfg: &BacktestConfig) -> usize {
    match cfg.mode {
        LegMode::SingleAsset => 1,
        LegMode::Quantile => ((cfg.quantile * n as f64).floor() as usize).max(1).min(n / 2),
    }
}

/// Long the previous day's losers, short its winners, hold for one day.
///
/// Day `d` in `days` trades on returns at `d - 1`, so `days.start ≥ 1`.
pub fn contrarian_strategy(panel: &ReturnPanel, name: &str, members: &[usize], days: &Range<usize>, cfg: &BacktestConfig) -> Result<GroupSeries> {
    if !(cfg.quantile > 0.0 && cfg.quantile <= 0.5) {
        return Err(Error::Config(format!("quantile must lie in (0, 0.5], got {}", cfg.quantile)));
    }
    if members.is_empty() {
        return Err(Error::InvalidInput(format!("group {name} is empty")));
    }
    if let Some(&a) = members.iter().find(|&&a| a >= panel.n_assets()) {
        return Err(Error::Range { index: a, reason: format!("asset outside panel of {}", panel.n_assets()) });
    }
    if days.start == 0 || days.end > panel.days() || days.is_empty() {
        return Err(Error::InvalidInput(format!("backtest days {days:?} need a prior day inside a panel of {}", panel.days())));
    }
    let r = panel.returns();
    let widened = cfg.mode == LegMode::Quantile && (members.len() as f64) < 2.0 / cfg.quantile;
    let mut out = GroupSeries {
        group: name.to_string(),
        dates: Vec::with_capacity(days.len()),
        daily: Vec::with_capacity(days.len()),
        cumulative: Vec::with_capacity(days.len()),
        books: Vec::with_capacity(days.len()),
        widened,
        idle_days: 0,
    };
    let mut growth = 1.0;
    for d in days.clone() {
        // Eligible: observed yesterday and today.
        let mut eligible: Vec<usize> = members.iter().copied().filter(|&a| r[(d - 1, a)].is_finite() && r[(d, a)].is_finite()).collect();
        // Ties broken by asset id, so the book does not depend on column order.
        eligible.sort_by(|&a, &b| r[(d - 1, a)].total_cmp(&r[(d - 1, b)]).then_with(|| panel.assets()[a].cmp(&panel.assets()[b])));
        let (ret, book) = if eligible.len() < 2 {
            out.idle_days += 1;
            (0.0, DailyBook { long: vec![], short: vec![] })
        } else {
            let m = leg_size(eligible.len(), cfg);
            let w = 1.0 / m as f64;
            let long: Vec<(usize, f64)> = eligible[..m].iter().map(|&a| (a, w)).collect();
            let short: Vec<(usize, f64)> = eligible[eligible.len() - m..].iter().map(|&a| (a, w)).collect();
            let leg = |l: &[(usize, f64)]| l.iter().map(|&(a, w)| w * r[(d, a)]).sum::<f64>();
            (0.5 * (leg(&long) - leg(&short)), DailyBook { long, short })
        };
        growth *= 1.0 + ret;
        out.dates.push(panel.dates()[d]);
        out.daily.push(ret);
        out.cumulative.push(growth - 1.0);
        out.books.push(book);
    }
    if widened {
        log::warn!("group {name} has {} assets, fewer than 2/q; legs hold at least one asset", members.len());
    }
    Ok(out)
}

/// Runs the strategy for every group in parallel and tests every pair of
/// daily series for a mean difference.
pub fn contrarian_backtest(panel: &ReturnPanel, groups: &[(String, Vec<usize>)], days: &Range<usize>, cfg: &BacktestConfig) -> Result<BacktestResult> {
    let series = groups
        .par_iter()
        .map(|(name, members)| contrarian_strategy(panel, name, members, days, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut spreads = Vec::new();
    for i in 0..series.len() {
        for j in i + 1..series.len() {
            let diffs: Vec<f64> = series[i].daily.iter().zip(&series[j].daily).map(|(a, b)| a - b).collect();
            let (mean_diff, tstat, p_value) = mean_t_test(&diffs, cfg.test);
            spreads.push(SpreadStat { first: series[i].group.clone(), second: series[j].group.clone(), mean_diff, tstat, p_value });
        }
    }
    Ok(BacktestResult { groups: series, spreads })
}

/// Group members from static labels, named `1..=K`, plus `ALL`.
pub fn groups_from_labels(labels: &[usize], k: usize, include_all: bool) -> Vec<(String, Vec<usize>)> {
    let mut out: Vec<(String, Vec<usize>)> = (0..k)
        .map(|g| ((g + 1).to_string(), labels.iter().enumerate().filter(|&(_, &l)| l == g).map(|(i, _)| i).collect()))
        .filter(|(_, m): &(String, Vec<usize>)| !m.is_empty())
        .collect();
    if include_all {
        out.push(("ALL".to_string(), (0..labels.len()).collect()));
    }
    out
}
