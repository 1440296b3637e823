use std::fs;
use std::path::{Path, PathBuf};

use casc_core::clustering::{casc_dc, select_k, ClusterConfig};
use casc_core::evaluation::{contrarian_backtest, group_centrality, group_connections, groups_from_labels, theorem1_bound, BacktestConfig};
use casc_core::experiment::run_sweep;
use casc_core::io;
use casc_core::netbuild::{contract_adjacency, covariate_dummies, return_network, ContractAttributes, ReturnNetworkConfig, ReturnPanel};
use casc_core::similarity::build_series;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::options::{required, significance, AnalyzeOptions, BacktestOptions, BoundOptions, ClusterOptions, SimulateOptions};

/// What a command read, wrote (relative to the output directory) and reports.
pub struct Outcome {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Core(e.into()))
}

pub fn simulate(o: &SimulateOptions, out: &Path) -> CliResult<Outcome> {
    ensure_dir(out)?;
    let cfg = o.sweep();
    let cells = run_sweep(&cfg)?;
    io::write_sweep(&out.join("sweep.csv"), &cells)?;
    for c in &cells {
        println!("{:>5} {:<8} mean {:.4} se {:.4}", c.value, c.algorithm.name(), c.mean, c.se);
    }
    Ok(Outcome { inputs: vec![], outputs: vec!["sweep.csv".into()], summary: json!({ "cells": cells.len(), "points": cfg.points().len() }) })
}

fn parse_k(s: &str) -> CliResult<Option<usize>> {
    match s.trim() {
        "auto" => Ok(None),
        v => v.parse::<usize>().ok().filter(|&k| k > 0).map(Some).ok_or_else(|| CliError::Usage(format!("k must be a positive integer or `auto`, got {v:?}"))),
    }
}

pub fn cluster(o: &ClusterOptions, out: &Path) -> CliResult<Outcome> {
    let k_choice = parse_k(&o.k)?;
    let returns = required(&o.returns, "returns")?;
    let panel = ReturnPanel::from_csv_path(&returns)?;
    let mut inputs = vec![returns];
    let net_cfg = ReturnNetworkConfig { window: o.window, step: o.step, mode: o.window_mode, ..Default::default() };
    let rn = return_network(&panel, &net_cfg)?;
    for f in &rn.failures {
        log::warn!("fit failure: {f:?}");
    }
    let covariates = match &o.attributes {
        Some(p) if p.exists() => {
            inputs.push(p.clone());
            let attrs = ContractAttributes::from_json_path(p)?.aligned_to(panel.assets())?;
            Some(covariate_dummies(&attrs))
        }
        Some(p) => {
            log::warn!("attributes file {} not found; clustering without covariates", p.display());
            None
        }
        None => {
            log::warn!("no attributes file; clustering without covariates");
            None
        }
    };
    let net = &rn.network;
    let (k, selection) = match k_choice {
        Some(k) => (k, None),
        None => {
            // α depends on K, so K is chosen on the covariate-free Laplacians.
            let sims = build_series(net, None, 1)?;
            let k_max = o.k_max.min(net.nodes().saturating_sub(1)).max(1);
            let range: Vec<usize> = (1..=k_max).collect();
            let sel = select_k(sims.similarities(), &range, o.folds, casc_core::rng::derive_seed(o.seed, "select-k", 0))?;
            log::info!("selected K = {}", sel.k);
            (sel.k, Some(sel))
        }
    };
    let cfg = ClusterConfig { eps: o.eps, kernel_order: o.kernel_order, restarts: o.restarts, ..ClusterConfig::new(k, o.seed) };
    let run = casc_dc(net, covariates.as_ref(), &cfg)?;
    ensure_dir(out)?;
    io::write_memberships(&out.join("memberships.csv"), &run.memberships, net.node_ids())?;
    let mut outputs: Vec<PathBuf> = vec!["memberships.csv".into()];
    for p in io::write_network(&out.join("network"), net)? {
        outputs.push(p.strip_prefix(out).unwrap_or(&p).to_path_buf());
    }
    if o.diagnostics {
        io::write_diagnostics(&out.join("diagnostics.csv"), &run)?;
        outputs.push("diagnostics.csv".into());
    }
    let sizes: Vec<Vec<usize>> = (0..run.memberships.periods()).map(|t| run.memberships.group_sizes(t)).collect();
    println!("K = {k}, {} periods, {} assets; final group sizes {:?}", net.periods(), net.nodes(), sizes.last().cloned().unwrap_or_default());
    let summary = json!({
        "k": k,
        "eps": o.eps,
        "kernel_order": o.kernel_order,
        "r_hat": run.r_hats(),
        "alpha": run.alphas(),
        "group_sizes": sizes,
        "k_scores": selection.map(|s| s.scores),
        "period_end_dates": rn.period_end_dates,
        "fit_failures": rn.failures.len(),
        "covariates": covariates.is_some(),
        "any_failure": run.any_failure(),
    });
    Ok(Outcome { inputs, outputs, summary })
}

pub fn analyze(o: &AnalyzeOptions, out: &Path) -> CliResult<Outcome> {
    let dir = required(&o.network, "network")?;
    let mpath = required(&o.memberships, "memberships")?;
    let net = io::read_network(&dir)?;
    let z = io::read_memberships_path(&mpath, net.node_ids(), None)?;
    let mut inputs = vec![dir, mpath];
    let rows = group_connections(&net, &z, significance(o.test, o.nw_lag))?;
    ensure_dir(out)?;
    io::write_connections(&out.join("connections.csv"), &rows)?;
    let mut outputs: Vec<PathBuf> = vec!["connections.csv".into()];
    println!("group within cross diff tstat");
    for r in &rows {
        println!("{} {:.4} {:.4} {:.4} {:.3}", r.group + 1, r.within, r.cross, r.diff, r.tstat);
    }
    let mut centrality = None;
    if let Some(p) = &o.attributes {
        let attrs = ContractAttributes::from_json_path(p)?.aligned_to(net.node_ids())?;
        inputs.push(p.clone());
        // Static grouping: the last period's labels.
        let labels = z.labels(z.periods() - 1);
        let scores = group_centrality(&contract_adjacency(&attrs), labels, z.k())?;
        io::write_group_centrality(&out.join("group_centrality.csv"), &scores)?;
        outputs.push("group_centrality.csv".into());
        centrality = Some(scores);
    }
    Ok(Outcome { inputs, outputs, summary: json!({ "connections": rows, "group_centrality": centrality }) })
}

pub fn backtest(o: &BacktestOptions, out: &Path) -> CliResult<Outcome> {
    let rpath = required(&o.returns, "returns")?;
    let mpath = required(&o.memberships, "memberships")?;
    let (Some(from), Some(to)) = (o.from, o.to) else {
        return Err(CliError::Usage("backtest needs both `from` and `to` dates".into()));
    };
    let panel = ReturnPanel::from_csv_path(&rpath)?;
    let z = io::read_memberships_path(&mpath, panel.assets(), None)?;
    let t = match o.period {
        Some(p) if p >= 1 && p <= z.periods() => p - 1,
        Some(p) => return Err(CliError::Usage(format!("period {p} outside 1..={}", z.periods()))),
        None => z.periods() - 1,
    };
    let mut days = panel.day_range(from, to)?;
    if days.start == 0 {
        log::warn!("first backtest day has no prior return; starting one day later");
        days.start = 1;
        if days.is_empty() {
            return Err(CliError::Usage(format!("date range {from}..{to} leaves no tradable day")));
        }
    }
    let groups = groups_from_labels(z.labels(t), z.k(), true);
    let cfg = BacktestConfig { quantile: o.quantile, mode: o.mode, test: significance(o.test, o.nw_lag) };
    let result = contrarian_backtest(&panel, &groups, &days, &cfg)?;
    ensure_dir(out)?;
    io::write_backtest_series(&out.join("backtest_series.csv"), &result)?;
    io::write_backtest_spreads(&out.join("backtest_spreads.csv"), &result)?;
    let means: Vec<_> = result.groups.iter().map(|g| json!({ "group": g.group, "mean": g.mean(), "final": g.cumulative.last(), "widened": g.widened })).collect();
    for g in &result.groups {
        println!("group {:>3}: mean daily {:+.5}, cumulative {:+.5}{}", g.group, g.mean(), g.cumulative.last().copied().unwrap_or(0.0), if g.widened { " (widened)" } else { "" });
    }
    Ok(Outcome {
        inputs: vec![rpath, mpath],
        outputs: vec!["backtest_series.csv".into(), "backtest_spreads.csv".into()],
        summary: json!({ "groups": means, "spreads": result.spreads }),
    })
}

pub fn bound(o: &BoundOptions, out: &Path) -> CliResult<Outcome> {
    let v = theorem1_bound(&o.params())?;
    ensure_dir(out)?;
    let body = json!({ "params": o, "value": v.value, "vacuous": v.vacuous, "degree_condition": v.degree_condition, "b": v.b, "c": v.c });
    let mut text = serde_json::to_string_pretty(&body).map_err(casc_core::Error::from)?;
    text.push('\n');
    fs::write(out.join("bound.json"), text).map_err(casc_core::Error::from)?;
    println!("bound {:.6e}{}", v.value, if v.vacuous { " (vacuous)" } else { "" });
    Ok(Outcome { inputs: vec![], outputs: vec!["bound.json".into()], summary: body })
}
