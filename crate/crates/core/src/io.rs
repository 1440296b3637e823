//! File formats. Periods and group labels are 1-based on disk and 0-based in
//! memory.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::clustering::ClusteringRun;
use crate::error::{Error, Result};
use crate::evaluation::{BacktestResult, GroupConnection, MisclusteringReport};
use crate::experiment::SweepCell;
use crate::sbm::{DynamicNetwork, MembershipSeries};

pub const NETWORK_HEADER: &str = "header.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkHeader {
    #[serde(rename = "N")]
    pub nodes: usize,
    #[serde(rename = "T")]
    pub periods: usize,
    pub node_ids: Vec<String>,
}

pub fn edge_file_name(t: usize) -> String {
    format!("edges_t{:03}.csv", t + 1)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(BufWriter::new(File::create(path)?)))
}

/// Writes `header.json` and one `t,i,j` edge list per period (`i < j`, node ids).
pub fn write_network(dir: &Path, net: &DynamicNetwork) -> Result<Vec<std::path::PathBuf>> {
    fs::create_dir_all(dir)?;
    let header = NetworkHeader { nodes: net.nodes(), periods: net.periods(), node_ids: net.node_ids().to_vec() };
    let hp = dir.join(NETWORK_HEADER);
    let mut f = BufWriter::new(File::create(&hp)?);
    serde_json::to_writer_pretty(&mut f, &header)?;
    f.write_all(b"\n")?;
    f.flush()?;
    let mut written = vec![hp];
    for t in 0..net.periods() {
        let path = dir.join(edge_file_name(t));
        let mut w = csv_writer(&path)?;
        w.write_record(["t", "i", "j"])?;
        let a = net.slice(t);
        let ids = net.node_ids();
        for i in 0..net.nodes() {
            for j in i + 1..net.nodes() {
                if a[(i, j)] != 0.0 {
                    w.write_record([(t + 1).to_string().as_str(), &ids[i], &ids[j]])?;
                }
            }
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_network(dir: &Path) -> Result<DynamicNetwork> {
    let hp = dir.join(NETWORK_HEADER);
    let header: NetworkHeader = serde_json::from_reader(File::open(&hp).map_err(|e| Error::ingest(&hp, e.to_string()))?)
        .map_err(|e| Error::ingest(&hp, e.to_string()))?;
    if header.node_ids.len() != header.nodes {
        return Err(Error::ingest(&hp, format!("N = {} but {} node ids", header.nodes, header.node_ids.len())));
    }
    let index = id_index(&header.node_ids, &hp)?;
    let mut slices = Vec::with_capacity(header.periods);
    for t in 0..header.periods {
        let path = dir.join(edge_file_name(t));
        let mut a = DMatrix::zeros(header.nodes, header.nodes);
        let mut rdr = csv::Reader::from_path(&path).map_err(|e| Error::ingest(&path, e.to_string()))?;
        for (row, rec) in rdr.records().enumerate() {
            let line = row + 2;
            let rec = rec.map_err(|e| Error::ingest(&path, format!("line {line}: {e}")))?;
            if rec.len() != 3 {
                return Err(Error::ingest(&path, format!("line {line}: expected 3 fields, found {}", rec.len())));
            }
            let tt: usize = rec[0].trim().parse().map_err(|_| Error::ingest(&path, format!("line {line}, column t: bad period {:?}", &rec[0])))?;
            if tt != t + 1 {
                return Err(Error::ingest(&path, format!("line {line}, column t: period {tt} in the file for period {}", t + 1)));
            }
            let lookup = |col: &str, s: &str| {
                index.get(s.trim()).copied().ok_or_else(|| Error::ingest(&path, format!("line {line}, column {col}: unknown node {s:?}")))
            };
            let (i, j) = (lookup("i", &rec[1])?, lookup("j", &rec[2])?);
            if i == j {
                return Err(Error::ingest(&path, format!("line {line}: self-loop on {:?}", &rec[1])));
            }
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        slices.push(a);
    }
    DynamicNetwork::new(header.node_ids, slices)
}

fn id_index(ids: &[String], source: &Path) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if index.insert(id.clone(), i).is_some() {
            return Err(Error::ingest(source, format!("duplicate node id {id:?}")));
        }
    }
    Ok(index)
}

/// `t,node_id,label`.
pub fn write_memberships(path: &Path, z: &MembershipSeries, node_ids: &[String]) -> Result<()> {
    if node_ids.len() != z.nodes() {
        return Err(Error::dims("membership node ids", z.nodes(), node_ids.len()));
    }
    let mut w = csv_writer(path)?;
    w.write_record(["t", "node_id", "label"])?;
    for t in 0..z.periods() {
        for (id, &l) in node_ids.iter().zip(z.labels(t)) {
            w.write_record([(t + 1).to_string(), id.clone(), (l + 1).to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads `t,node_id,label` (or `t,node,label`) for the given node order.
/// Every node must appear exactly once per period; `K` is the largest label
/// unless `k` is given.
pub fn read_memberships<R: Read>(reader: R, source: &Path, node_ids: &[String], k: Option<usize>) -> Result<MembershipSeries> {
    let index = id_index(node_ids, source)?;
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::ingest(source, e.to_string()))?.clone();
    let col = |names: &[&str]| headers.iter().position(|h| names.contains(&h.trim()));
    let (tc, nc, lc) = match (col(&["t"]), col(&["node_id", "node"]), col(&["label"])) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Error::ingest(source, "header must contain t, node_id and label".to_string())),
    };
    let mut rows: Vec<Vec<Option<usize>>> = Vec::new();
    let mut max_label = 0;
    let mut unknown: Vec<String> = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let line = row + 2;
        let rec = rec.map_err(|e| Error::ingest(source, format!("line {line}: {e}")))?;
        let field = |c: usize| rec.get(c).unwrap_or("").trim().to_string();
        let t: usize = field(tc).parse().ok().filter(|&t| t >= 1).ok_or_else(|| Error::ingest(source, format!("line {line}, column t: bad period {:?}", field(tc))))?;
        let label: usize = field(lc)
            .parse()
            .ok()
            .filter(|&l| l >= 1)
            .ok_or_else(|| Error::ingest(source, format!("line {line}, column label: labels start at 1, found {:?}", field(lc))))?;
        let Some(&node) = index.get(&field(nc)) else {
            if !unknown.contains(&field(nc)) {
                unknown.push(field(nc));
            }
            continue;
        };
        if rows.len() < t {
            rows.resize(t, vec![None; node_ids.len()]);
        }
        if rows[t - 1][node].replace(label - 1).is_some() {
            return Err(Error::ingest(source, format!("line {line}: node {:?} labelled twice in period {t}", field(nc))));
        }
        max_label = max_label.max(label);
    }
    if !unknown.is_empty() {
        return Err(Error::ingest(source, format!("unknown node ids: {}", unknown.join(", "))));
    }
    if rows.is_empty() {
        return Err(Error::ingest(source, "no membership rows".to_string()));
    }
    let mut labels = Vec::with_capacity(rows.len());
    for (t, row) in rows.into_iter().enumerate() {
        let missing: Vec<&str> = row.iter().zip(node_ids).filter(|(l, _)| l.is_none()).map(|(_, id)| id.as_str()).collect();
        if !missing.is_empty() {
            return Err(Error::ingest(source, format!("period {}: no label for {}", t + 1, missing.join(", "))));
        }
        labels.push(row.into_iter().map(|l| l.unwrap_or_default()).collect());
    }
    let k = k.unwrap_or(max_label);
    if max_label > k {
        return Err(Error::ingest(source, format!("label {max_label} exceeds K = {k}")));
    }
    MembershipSeries::new(k, labels)
}

pub fn read_memberships_path(path: &Path, node_ids: &[String], k: Option<usize>) -> Result<MembershipSeries> {
    let f = File::open(path).map_err(|e| Error::ingest(path, e.to_string()))?;
    read_memberships(f, path, node_ids, k)
}

/// `t,alpha,r_hat`.
pub fn write_diagnostics(path: &Path, run: &ClusteringRun) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "alpha", "r_hat"])?;
    for d in &run.periods {
        w.write_record([(d.t + 1).to_string(), d.alpha.to_string(), d.r_hat.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `t,rate`.
pub fn write_misclustering(path: &Path, report: &MisclusteringReport) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "rate"])?;
    for (t, r) in report.per_period.iter().enumerate() {
        w.write_record([(t + 1).to_string(), r.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `group,within,cross,diff,tstat`.
pub fn write_connections(path: &Path, rows: &[GroupConnection]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["group", "within", "cross", "diff", "tstat"])?;
    for c in rows {
        w.write_record([(c.group + 1).to_string(), c.within.to_string(), c.cross.to_string(), c.diff.to_string(), c.tstat.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `group,centrality`.
pub fn write_group_centrality(path: &Path, scores: &[f64]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["group", "centrality"])?;
    for (g, s) in scores.iter().enumerate() {
        w.write_record([(g + 1).to_string(), s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `date,group,ret,cumret`.
pub fn write_backtest_series(path: &Path, result: &BacktestResult) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["date", "group", "ret", "cumret"])?;
    for g in &result.groups {
        for ((d, r), c) in g.dates.iter().zip(&g.daily).zip(&g.cumulative) {
            w.write_record([d.to_string(), g.group.clone(), r.to_string(), c.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `first,second,mean_diff,tstat,p_value`.
pub fn write_backtest_spreads(path: &Path, result: &BacktestResult) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["first", "second", "mean_diff", "tstat", "p_value"])?;
    for s in &result.spreads {
        w.write_record([s.first.clone(), s.second.clone(), s.mean_diff.to_string(), s.tstat.to_string(), s.p_value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `value,algorithm,mean,se,reps`.
pub fn write_sweep(path: &Path, cells: &[SweepCell]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["value", "algorithm", "mean", "se", "reps"])?;
    for c in cells {
        w.write_record([c.value.to_string(), c.algorithm.name().to_string(), c.mean.to_string(), c.se.to_string(), c.reps.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
