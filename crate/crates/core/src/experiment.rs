//! Monte Carlo comparison of CASC-DC against its baselines on simulated
//! dynamic blockmodels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{casc_dc, dsc_cw_baseline, dsc_dc_baseline, dsc_pz_baseline, ClusterConfig, ClusteringRun};
use crate::error::{Error, Result};
use crate::evaluation::misclustering_rate;
use crate::rng::derive_seed;
use crate::sbm::{sample_dynamic_dcbm, BlockProbabilitySeries, SimConfig, SimulatedInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    CascDc,
    DscDc,
    DscPz,
    DscCw,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::CascDc, Algorithm::DscDc, Algorithm::DscPz, Algorithm::DscCw];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::CascDc => "CASC-DC",
            Algorithm::DscDc => "DSC-DC",
            Algorithm::DscPz => "DSC-PZ",
            Algorithm::DscCw => "DSC-Cw",
        }
    }

    pub fn run(self, inst: &SimulatedInstance, cfg: &ClusterConfig) -> Result<ClusteringRun> {
        match self {
            Algorithm::CascDc => casc_dc(&inst.network, Some(&inst.covariates), cfg),
            Algorithm::DscDc => dsc_dc_baseline(&inst.network, cfg),
            Algorithm::DscPz => dsc_pz_baseline(&inst.network, cfg),
            Algorithm::DscCw => dsc_cw_baseline(&inst.covariates, inst.network.periods(), cfg),
        }
    }
}

/// The swept quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "kebab-case")]
pub enum SweepAxis {
    /// Network size; churn bound `⌊√N⌋`.
    Nodes { values: Vec<usize> },
    /// Churn bound at a fixed network size.
    Churn { nodes: usize, values: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub periods: usize,
    pub k: usize,
    pub reps: usize,
    pub seed: u64,
    pub kernel_order: usize,
    pub eps: f64,
    pub restarts: usize,
    pub algorithms: Vec<Algorithm>,
}

impl SweepConfig {
    /// N = 10, 15, …, 100 with T = 10, K = 3.
    pub fn node_sweep(reps: usize, seed: u64) -> Self {
        Self::with_axis(SweepAxis::Nodes { values: (10..=100).step_by(5).collect() }, reps, seed)
    }

    /// s ∈ {0, N/50, N/25, N/20, N/10, N/5, N/4, N/2, N} at N = 100.
    pub fn churn_sweep(reps: usize, seed: u64) -> Self {
        Self::with_axis(SweepAxis::Churn { nodes: 100, values: vec![0, 2, 4, 5, 10, 20, 25, 50, 100] }, reps, seed)
    }

    fn with_axis(axis: SweepAxis, reps: usize, seed: u64) -> Self {
        Self { axis, periods: 10, k: 3, reps, seed, kernel_order: 4, eps: 0.01, restarts: 20, algorithms: Algorithm::ALL.to_vec() }
    }

    /// `(swept value, N, s)` for every sweep point.
    pub fn points(&self) -> Vec<(usize, usize, usize)> {
        match &self.axis {
            SweepAxis::Nodes { values } => values.iter().map(|&n| (n, n, (n as f64).sqrt().floor() as usize)).collect(),
            SweepAxis::Churn { nodes, values } => values.iter().map(|&s| (s, *nodes, s)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub value: usize,
    pub algorithm: Algorithm,
    pub mean: f64,
    /// Standard error over replications.
    pub se: f64,
    pub reps: usize,
}

/// Time-averaged misclustering of every algorithm on one simulated instance.
pub fn replicate(n: usize, s: usize, cfg: &SweepConfig, seed: u64) -> Result<Vec<f64>> {
    let sim = SimConfig::new(n, cfg.periods, cfg.k, s, seed);
    let blocks = BlockProbabilitySeries::linear_ramp(cfg.periods);
    let inst = sample_dynamic_dcbm(&sim, &blocks)?;
    let cluster = ClusterConfig { kernel_order: cfg.kernel_order, eps: cfg.eps, restarts: cfg.restarts, ..ClusterConfig::new(cfg.k, derive_seed(seed, "cluster", 0)) };
    cfg.algorithms
        .iter()
        .map(|alg| {
            let run = alg.run(&inst, &cluster)?;
            Ok(misclustering_rate(&run.memberships, &inst.memberships)?.mean)
        })
        .collect()
}

/// Every algorithm sees the same simulated instances (common random numbers).
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepCell>> {
    if cfg.reps == 0 || cfg.algorithms.is_empty() {
        return Err(Error::Config("a sweep needs at least one replication and one algorithm".into()));
    }
    let points = cfg.points();
    let jobs: Vec<(usize, usize)> = (0..points.len()).flat_map(|p| (0..cfg.reps).map(move |r| (p, r))).collect();
    let errors = jobs
        .par_iter()
        .map(|&(p, r)| {
            let (value, n, s) = points[p];
            replicate(n, s, cfg, derive_seed(cfg.seed, "sweep", (value as u64) << 32 | r as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::with_capacity(points.len() * cfg.algorithms.len());
    for (p, &(value, _, _)) in points.iter().enumerate() {
        let rows = &errors[p * cfg.reps..(p + 1) * cfg.reps];
        for (a, &algorithm) in cfg.algorithms.iter().enumerate() {
            let xs: Vec<f64> = rows.iter().map(|row| row[a]).collect();
            let m = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / m;
            let se = if xs.len() > 1 { (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt() } else { 0.0 };
            cells.push(SweepCell { value, algorithm, mean, se, reps: cfg.reps });
        }
    }
    Ok(cells)
}

/// Mean of one algorithm at one sweep value.
pub fn cell_mean(cells: &[SweepCell], value: usize, algorithm: Algorithm) -> Option<f64> {
    cells.iter().find(|c| c.value == value && c.algorithm == algorithm).map(|c| c.mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_follow_axis() {
        let n = SweepConfig::node_sweep(1, 0);
        assert_eq!(n.points().len(), 19);
        assert_eq!(n.points()[0], (10, 10, 3));
        assert_eq!(SweepConfig::churn_sweep(1, 0).points()[8], (100, 100, 100));
    }

    #[test]
    fn tiny_sweep_is_deterministic() {
        let cfg = SweepConfig { axis: SweepAxis::Nodes { values: vec![12] }, reps: 2, restarts: 3, ..SweepConfig::node_sweep(2, 7) };
        let a = run_sweep(&cfg).unwrap();
        assert_eq!(a, run_sweep(&cfg).unwrap());
        assert_eq!(a.len(), 4);
        assert!(a.iter().all(|c| (0.0..=1.0).contains(&c.mean)));
    }
}
