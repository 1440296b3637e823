use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::netbuild::degree_centrality_normalized;
use crate::sbm::{group_sizes, DynamicNetwork, MembershipSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SignificanceTest {
    /// Classical t-test on the per-period (or per-day) differences.
    #[default]
    Paired,
    /// Newey-West HAC standard error with Bartlett weights.
    NeweyWest { lag: usize },
}

/// Mean, t-statistic and two-sided p-value of a sample of differences.
/// `NaN` statistics when fewer than two observations or zero variance.
pub fn mean_t_test(diffs: &[f64], test: SignificanceTest) -> (f64, f64, f64) {
    let n = diffs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = diffs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN, f64::NAN);
    }
    let var_mean = match test {
        SignificanceTest::Paired => diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64,
        SignificanceTest::NeweyWest { lag } => {
            let autocov = |l: usize| diffs[l..].iter().zip(diffs).map(|(a, b)| (a - mean) * (b - mean)).sum::<f64>() / n as f64;
            let mut v = autocov(0);
            for l in 1..=lag.min(n - 1) {
                v += 2.0 * (1.0 - l as f64 / (lag + 1) as f64) * autocov(l);
            }
            v / n as f64
        }
    };
    if !(var_mean > 0.0) {
        return (mean, f64::NAN, f64::NAN);
    }
    let t = mean / var_mean.sqrt();
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive degrees of freedom");
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    (mean, t, p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupConnection {
    /// Zero-based group index.
    pub group: usize,
    pub within: f64,
    /// `NaN` when the group contains every node.
    pub cross: f64,
    pub diff: f64,
    pub tstat: f64,
    pub p_value: f64,
    pub periods_used: usize,
}

/// Within and cross connection of every group in one adjacency slice.
///
/// Degree endpoints are counted on `A + Aᵀ`: `within_i` sums it over pairs
/// inside group `i` and divides by `4·N_i`; `cross_i` sums it over pairs with
/// exactly one end in group `i` and divides by `4·(N − N_i)`.
/// Entries are `None` for empty groups (both) or full groups (cross).
pub fn period_connections(a: &DMatrix<f64>, labels: &[usize], k: usize) -> Vec<(Option<f64>, Option<f64>)> {
    let n = labels.len();
    let sizes = group_sizes(labels, k);
    let mut inside = vec![0.0; k];
    let mut between = vec![0.0; k];
    for i in 0..n {
        for j in 0..n {
            let w = a[(i, j)] + a[(j, i)];
            if w == 0.0 {
                continue;
            }
            let (gi, gj) = (labels[i], labels[j]);
            if gi == gj {
                inside[gi] += w;
            } else {
                between[gi] += w;
                between[gj] += w;
            }
        }
    }
    // Ordered loop: every cross pair was seen as (i,j) and (j,i).
    (0..k)
        .map(|g| {
            if sizes[g] == 0 {
                return (None, None);
            }
            let within = inside[g] / (4.0 * sizes[g] as f64);
            let others = n - sizes[g];
            let cross = (others > 0).then(|| between[g] / 2.0 / (4.0 * others as f64));
            (Some(within), cross)
        })
        .collect()
}

/// Period-averaged within/cross connections with a test on the per-period
/// differences. Periods where a group is empty are skipped for that group.
pub fn group_connections(net: &DynamicNetwork, z: &MembershipSeries, test: SignificanceTest) -> Result<Vec<GroupConnection>> {
    if z.periods() != net.periods() || z.nodes() != net.nodes() {
        return Err(Error::dims(
            "group connections",
            format!("T={}, N={}", net.periods(), net.nodes()),
            format!("T={}, N={}", z.periods(), z.nodes()),
        ));
    }
    let k = z.k();
    let per: Vec<_> = (0..net.periods()).map(|t| period_connections(net.slice(t), z.labels(t), k)).collect();
    let mut out = Vec::with_capacity(k);
    for g in 0..k {
        let within: Vec<f64> = per.iter().filter_map(|p| p[g].0).collect();
        let pairs: Vec<(f64, f64)> = per.iter().filter_map(|p| Some((p[g].0?, p[g].1?))).collect();
        let mean = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
        let cross: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let diffs: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
        let (_, tstat, p_value) = mean_t_test(&diffs, test);
        let cross_mean = mean(&cross);
        let within_mean = mean(&within);
        if cross.is_empty() && !within.is_empty() {
            log::warn!("group {g} spans every node; cross connection undefined");
        }
        out.push(GroupConnection {
            group: g,
            within: within_mean,
            cross: cross_mean,
            diff: mean(&diffs),
            tstat,
            p_value,
            periods_used: within.len(),
        });
    }
    Ok(out)
}

/// Mean normalized degree centrality of each group's members.
pub fn group_centrality(adjacency: &DMatrix<f64>, labels: &[usize], k: usize) -> Result<Vec<f64>> {
    if adjacency.nrows() != labels.len() {
        return Err(Error::dims("group centrality", adjacency.nrows(), labels.len()));
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= k) {
        return Err(Error::InvalidInput(format!("label {l} outside 0..{k}")));
    }
    let scores = degree_centrality_normalized(adjacency)?.scores;
    let sizes = group_sizes(labels, k);
    if let Some(g) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::InvalidInput(format!("group {g} is empty")));
    }
    let mut sums = vec![0.0; k];
    for (&s, &l) in scores.iter().zip(labels) {
        sums[l] += s;
    }
    Ok(sums.iter().zip(&sizes).map(|(s, &n)| s / n as f64).collect())
}
