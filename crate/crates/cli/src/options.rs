//! Per-command settings. A TOML file fills them, command-line flags win, and
//! the merged value is what the manifest records.

use std::path::{Path, PathBuf};

use casc_core::evaluation::{BoundParams, LegMode, SignificanceTest};
use casc_core::experiment::{Algorithm, SweepAxis, SweepConfig};
use casc_core::netbuild::WindowMode;
use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Reads the TOML file (if any), applies `overrides` on top and decodes the
/// result. Unknown keys are usage errors naming the key.
pub fn merged<T: DeserializeOwned>(path: Option<&Path>, overrides: Vec<(String, toml::Value)>) -> CliResult<T> {
    let mut table = match path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            text.parse::<toml::Table>().map_err(|e| CliError::Usage(format!("config {}: {}", path.display(), e.message())))?
        }
        None => toml::Table::new(),
    };
    for (k, v) in overrides {
        table.insert(k, v);
    }
    toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Usage(format!("config: {}", e.message())))
}

/// `key=value` with the value read as TOML, or as a bare string otherwise.
pub fn parse_assignment(s: &str) -> Result<(String, toml::Value), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let v = v.trim();
    let value = format!("v = {v}").parse::<toml::Table>().ok().and_then(|mut t| t.remove("v")).unwrap_or_else(|| toml::Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    Nodes,
    Churn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    Paired,
    NeweyWest,
}

pub fn significance(kind: TestKind, lag: usize) -> SignificanceTest {
    match kind {
        TestKind::Paired => SignificanceTest::Paired,
        TestKind::NeweyWest => SignificanceTest::NeweyWest { lag },
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateOptions {
    pub axis: Axis,
    /// Swept values; the standard grid of the axis when absent.
    pub values: Option<Vec<usize>>,
    /// Network size of a churn sweep.
    pub nodes: usize,
    pub periods: usize,
    pub k: usize,
    pub reps: usize,
    pub seed: u64,
    pub kernel_order: usize,
    pub eps: f64,
    pub restarts: usize,
    pub algorithms: Vec<Algorithm>,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self {
            axis: Axis::Nodes,
            values: None,
            nodes: 100,
            periods: 10,
            k: 3,
            reps: 100,
            seed: 0,
            kernel_order: 4,
            eps: 0.01,
            restarts: 20,
            algorithms: Algorithm::ALL.to_vec(),
        }
    }
}

impl SimulateOptions {
    pub fn sweep(&self) -> SweepConfig {
        let axis = match (self.axis, &self.values) {
            (Axis::Nodes, Some(v)) => SweepAxis::Nodes { values: v.clone() },
            (Axis::Nodes, None) => SweepConfig::node_sweep(1, 0).axis,
            (Axis::Churn, v) => {
                let n = self.nodes;
                let values = v.clone().unwrap_or_else(|| vec![0, n / 50, n / 25, n / 20, n / 10, n / 5, n / 4, n / 2, n]);
                SweepAxis::Churn { nodes: n, values }
            }
        };
        SweepConfig {
            axis,
            periods: self.periods,
            k: self.k,
            reps: self.reps,
            seed: self.seed,
            kernel_order: self.kernel_order,
            eps: self.eps,
            restarts: self.restarts,
            algorithms: self.algorithms.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterOptions {
    pub returns: Option<PathBuf>,
    pub attributes: Option<PathBuf>,
    /// A positive integer or `auto`.
    pub k: String,
    pub k_max: usize,
    pub folds: usize,
    pub eps: f64,
    pub kernel_order: usize,
    pub restarts: usize,
    pub seed: u64,
    pub window: usize,
    pub step: usize,
    pub window_mode: WindowMode,
    pub diagnostics: bool,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self {
            returns: None,
            attributes: None,
            k: "auto".into(),
            k_max: 6,
            folds: 5,
            eps: 0.01,
            kernel_order: 4,
            restarts: 20,
            seed: 0,
            window: 60,
            step: 1,
            window_mode: WindowMode::Rolling,
            diagnostics: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeOptions {
    pub network: Option<PathBuf>,
    pub memberships: Option<PathBuf>,
    pub attributes: Option<PathBuf>,
    pub test: TestKind,
    pub nw_lag: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self { network: None, memberships: None, attributes: None, test: TestKind::Paired, nw_lag: 5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestOptions {
    pub returns: Option<PathBuf>,
    pub memberships: Option<PathBuf>,
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
    pub quantile: f64,
    pub mode: LegMode,
    pub test: TestKind,
    pub nw_lag: usize,
    /// 1-based membership period used as the static grouping; the last when absent.
    pub period: Option<usize>,
}

impl Default for BacktestOptions {
    fn default() -> Self {
        Self {
            returns: None,
            memberships: None,
            from: None,
            to: None,
            quantile: 0.2,
            mode: LegMode::Quantile,
            test: TestKind::Paired,
            nw_lag: 5,
            period: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundOptions {
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub r: f64,
    pub s: f64,
    pub p_max: f64,
    pub delta_min: f64,
    pub lambda_k_max: f64,
    pub m_z: f64,
    pub w_max: f64,
    pub c_w: f64,
    pub eps: f64,
    #[serde(rename = "L")]
    pub smooth_l: f64,
    pub beta: f64,
    pub kernel_order: u32,
    pub confidence: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            n: 100.0,
            t: 10.0,
            k: 3.0,
            r: 2.0,
            s: 10.0,
            p_max: 40.0,
            delta_min: 50.0,
            lambda_k_max: 0.3,
            m_z: 0.2,
            w_max: 2.0,
            c_w: 1.0,
            eps: 0.01,
            smooth_l: 1.0,
            beta: 1.0,
            kernel_order: 4,
            confidence: 0.05,
        }
    }
}

impl BoundOptions {
    pub fn params(&self) -> BoundParams {
        BoundParams {
            n: self.n,
            t: self.t,
            k: self.k,
            r: self.r,
            s: self.s,
            p_max: self.p_max,
            delta_min: self.delta_min,
            lambda_k_max: self.lambda_k_max,
            m_z: self.m_z,
            w_max: self.w_max,
            c_w: self.c_w,
            eps: self.eps,
            smooth_l: self.smooth_l,
            beta: self.beta,
            kernel_order: self.kernel_order,
            confidence: self.confidence,
        }
    }
}

pub fn required(p: &Option<PathBuf>, what: &str) -> CliResult<PathBuf> {
    p.clone().ok_or_else(|| CliError::Usage(format!("missing {what} (flag or config key `{what}`)")))
}
