//! Dynamic degree-corrected blockmodel with node covariates: domain types and
//! a seeded simulator.

use nalgebra::DMatrix;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Pareto, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::substream;

const SYM_TOL: f64 = 1e-12;

/// Block connection probabilities `B_t`, one symmetric `K×K` slice per period.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockProbabilitySeries {
    slices: Vec<DMatrix<f64>>,
}

impl BlockProbabilitySeries {
    pub fn new(slices: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::Config("block probability series needs at least one period".into()))?;
        let k = first.nrows();
        for (t, b) in slices.iter().enumerate() {
            if b.nrows() != k || b.ncols() != k {
                return Err(Error::dims("block probability slice", format!("{k}x{k}"), format!("{}x{} at t={t}", b.nrows(), b.ncols())));
            }
            if !linalg::is_symmetric(b, SYM_TOL) {
                return Err(Error::InvalidInput(format!("block probability slice {t} is not symmetric")));
            }
            if let Some(v) = b.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::InvalidInput(format!("block probability {v} at t={t} outside [0,1]")));
            }
        }
        Ok(Self { slices })
    }

    /// Evaluates a smooth generator `f(ς; k, k')` at `ς_t = t/T`, `t = 1..=T`.
    /// Only `k ≤ k'` is queried; the lower triangle is mirrored.
    pub fn from_fn(periods: usize, k: usize, f: impl Fn(f64, usize, usize) -> f64) -> Result<Self> {
        let slices = (1..=periods)
            .map(|t| {
                let s = t as f64 / periods as f64;
                let mut b = DMatrix::zeros(k, k);
                for a in 0..k {
                    for c in a..k {
                        let v = f(s, a, c);
                        b[(a, c)] = v;
                        b[(c, a)] = v;
                    }
                }
                b
            })
            .collect();
        Self::new(slices)
    }

    pub fn constant(periods: usize, b: DMatrix<f64>) -> Result<Self> {
        Self::new(vec![b; periods])
    }

    /// The linearly ramping three-block design used by the Monte Carlo
    /// experiments: `B_t = (t/T)·B₀`.
    pub fn linear_ramp(periods: usize) -> Self {
        let base = DMatrix::from_row_slice(3, 3, &[0.9, 0.6, 0.3, 0.6, 0.3, 0.4, 0.3, 0.4, 0.8]);
        Self::from_fn(periods, 3, |s, a, c| s * base[(a, c)]).expect("ramp design is valid")
    }

    pub fn periods(&self) -> usize {
        self.slices.len()
    }

    pub fn k(&self) -> usize {
        self.slices[0].nrows()
    }

    pub fn slice(&self, t: usize) -> &DMatrix<f64> {
        &self.slices[t]
    }

    pub fn is_positive_definite(&self, t: usize) -> bool {
        linalg::symmetric_eigenvalues(&self.slices[t])
            .map(|v| v.last().is_some_and(|&m| m > 0.0))
            .unwrap_or(false)
    }

    pub fn check_assortative(&self) -> Result<()> {
        match (0..self.periods()).find(|&t| !self.is_positive_definite(t)) {
            Some(t) => Err(Error::InvalidInput(format!("block probability slice {t} is not positive definite"))),
            None => Ok(()),
        }
    }
}

/// Group labels per period, `labels[t][i] ∈ 0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipSeries {
    k: usize,
    labels: Vec<Vec<usize>>,
}

impl MembershipSeries {
    pub fn new(k: usize, labels: Vec<Vec<usize>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("membership series needs k >= 1".into()));
        }
        let n = labels.first().map_or(0, Vec::len);
        for (t, row) in labels.iter().enumerate() {
            if row.len() != n {
                return Err(Error::dims("membership period", n, format!("{} at t={t}", row.len())));
            }
            if let Some(&l) = row.iter().find(|&&l| l >= k) {
                return Err(Error::InvalidInput(format!("label {l} at t={t} outside 0..{k}")));
            }
        }
        Ok(Self { k, labels })
    }

    /// One labelling replicated over `periods`.
    pub fn replicated(k: usize, labels: Vec<usize>, periods: usize) -> Result<Self> {
        Self::new(k, vec![labels; periods])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn periods(&self) -> usize {
        self.labels.len()
    }

    pub fn nodes(&self) -> usize {
        self.labels.first().map_or(0, Vec::len)
    }

    pub fn labels(&self, t: usize) -> &[usize] {
        &self.labels[t]
    }

    pub fn all_labels(&self) -> &[Vec<usize>] {
        &self.labels
    }

    /// One-hot clustering matrix `Z_t`.
    pub fn one_hot(&self, t: usize) -> DMatrix<f64> {
        let mut z = DMatrix::zeros(self.nodes(), self.k);
        for (i, &l) in self.labels[t].iter().enumerate() {
            z[(i, l)] = 1.0;
        }
        z
    }

    pub fn group_sizes(&self, t: usize) -> Vec<usize> {
        group_sizes(&self.labels[t], self.k)
    }

    pub fn has_empty_group(&self, t: usize) -> bool {
        self.group_sizes(t).contains(&0)
    }

    /// Number of nodes whose label differs between `t-1` and `t`.
    pub fn changes(&self, t: usize) -> usize {
        if t == 0 {
            return 0;
        }
        self.labels[t].iter().zip(&self.labels[t - 1]).filter(|(a, b)| a != b).count()
    }

    pub fn max_churn(&self) -> usize {
        (1..self.periods()).map(|t| self.changes(t)).max().unwrap_or(0)
    }
}

pub(crate) fn group_sizes(labels: &[usize], k: usize) -> Vec<usize> {
    let mut sizes = vec![0; k];
    for &l in labels {
        sizes[l] += 1;
    }
    sizes
}

/// Degree weights `ψ`, normalized to sum to one inside every group of `block_map`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeParams {
    psi: Vec<f64>,
    block_map: Vec<usize>,
    k: usize,
}

impl DegreeParams {
    pub fn from_weights(weights: &[f64], block_map: Vec<usize>, k: usize) -> Result<Self> {
        if weights.len() != block_map.len() {
            return Err(Error::dims("degree weights", block_map.len(), weights.len()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidInput(format!("degree weight {w} must be positive")));
        }
        let mut sums = vec![0.0; k];
        for (&w, &g) in weights.iter().zip(&block_map) {
            if g >= k {
                return Err(Error::InvalidInput(format!("block {g} outside 0..{k}")));
            }
            sums[g] += w;
        }
        if let Some(g) = sums.iter().position(|&s| s == 0.0) {
            return Err(Error::Config(format!("group {g} is empty; cannot normalize degree weights")));
        }
        let psi = weights.iter().zip(&block_map).map(|(&w, &g)| w / sums[g]).collect();
        Ok(Self { psi, block_map, k })
    }

    pub fn uniform(block_map: Vec<usize>, k: usize) -> Result<Self> {
        let w = vec![1.0; block_map.len()];
        Self::from_weights(&w, block_map, k)
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn block_map(&self) -> &[usize] {
        &self.block_map
    }

    pub fn group_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.k];
        for (&p, &g) in self.psi.iter().zip(&self.block_map) {
            sums[g] += p;
        }
        sums
    }

    /// Per-node edge weights actually used for sampling under `scale`.
    pub fn edge_weights(&self, scale: DegreeScale) -> Vec<f64> {
        match scale {
            DegreeScale::Identifiable => self.psi.clone(),
            DegreeScale::GroupSize => {
                let sizes = group_sizes(&self.block_map, self.k);
                self.psi.iter().zip(&self.block_map).map(|(&p, &g)| p * sizes[g] as f64).collect()
            }
        }
    }
}

/// Symmetric, hollow, binary adjacency matrices over a fixed vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicNetwork {
    node_ids: Vec<String>,
    adjacency: Vec<DMatrix<f64>>,
}

impl DynamicNetwork {
    pub fn new(node_ids: Vec<String>, adjacency: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = node_ids.len();
        for (t, a) in adjacency.iter().enumerate() {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::dims("adjacency slice", format!("{n}x{n}"), format!("{}x{} at t={t}", a.nrows(), a.ncols())));
            }
            for i in 0..n {
                if a[(i, i)] != 0.0 {
                    return Err(Error::InvalidInput(format!("self-loop at node {i}, t={t}")));
                }
                for j in (i + 1)..n {
                    let v = a[(i, j)];
                    if v != 0.0 && v != 1.0 {
                        return Err(Error::InvalidInput(format!("non-binary entry {v} at ({i},{j}), t={t}")));
                    }
                    if v != a[(j, i)] {
                        return Err(Error::InvalidInput(format!("asymmetric entry at ({i},{j}), t={t}")));
                    }
                }
            }
        }
        Ok(Self { node_ids, adjacency })
    }

    /// Network with node ids `"0".."N-1"`.
    pub fn from_adjacency(adjacency: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = adjacency.first().map_or(0, |a| a.nrows());
        Self::new((0..n).map(|i| i.to_string()).collect(), adjacency)
    }

    pub fn empty(node_ids: Vec<String>, periods: usize) -> Self {
        let n = node_ids.len();
        Self { node_ids, adjacency: vec![DMatrix::zeros(n, n); periods] }
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn nodes(&self) -> usize {
        self.node_ids.len()
    }

    pub fn periods(&self) -> usize {
        self.adjacency.len()
    }

    pub fn slice(&self, t: usize) -> &DMatrix<f64> {
        &self.adjacency[t]
    }

    pub fn slices(&self) -> &[DMatrix<f64>] {
        &self.adjacency
    }

    pub fn edge_count(&self, t: usize) -> usize {
        (self.adjacency[t].sum() / 2.0).round() as usize
    }

    /// Relabels nodes so that new node `p` is old node `perm[p]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.nodes();
        if perm.len() != n {
            return Err(Error::dims("permutation", n, perm.len()));
        }
        let ids = perm.iter().map(|&p| self.node_ids[p].clone()).collect();
        let adj = self
            .adjacency
            .iter()
            .map(|a| DMatrix::from_fn(n, n, |i, j| a[(perm[i], perm[j])]))
            .collect();
        Ok(Self { node_ids: ids, adjacency: adj })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnKind {
    Continuous,
    Dummy,
}

/// Node covariates `X`, fixed over time, bounded by `J` in absolute value.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateMatrix {
    values: DMatrix<f64>,
    kinds: Vec<ColumnKind>,
    names: Vec<String>,
    bound: f64,
}

impl CovariateMatrix {
    pub fn new(values: DMatrix<f64>, kinds: Vec<ColumnKind>) -> Result<Self> {
        let names = (0..values.ncols()).map(|j| format!("x{}", j + 1)).collect();
        Self::with_names(values, kinds, names)
    }

    pub fn with_names(values: DMatrix<f64>, kinds: Vec<ColumnKind>, names: Vec<String>) -> Result<Self> {
        if kinds.len() != values.ncols() || names.len() != values.ncols() {
            return Err(Error::dims("covariate columns", values.ncols(), format!("{} kinds / {} names", kinds.len(), names.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("covariates must be finite".into()));
        }
        for (j, kind) in kinds.iter().enumerate() {
            if *kind == ColumnKind::Dummy && values.column(j).iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::InvalidInput(format!("dummy column {j} has values outside {{0,1}}")));
            }
        }
        let bound = linalg::max_abs(&values);
        Ok(Self { values, kinds, names, bound })
    }

    pub fn continuous(values: DMatrix<f64>) -> Result<Self> {
        let kinds = vec![ColumnKind::Continuous; values.ncols()];
        Self::new(values, kinds)
    }

    pub fn zeros(n: usize, r: usize) -> Self {
        Self::continuous(DMatrix::zeros(n, r)).expect("zero covariates are valid")
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn kinds(&self) -> &[ColumnKind] {
        &self.kinds
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn nodes(&self) -> usize {
        self.values.nrows()
    }

    pub fn columns(&self) -> usize {
        self.values.ncols()
    }

    /// `J = max |X(i,j)|`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn rank(&self) -> usize {
        if self.values.ncols() == 0 || self.values.nrows() == 0 {
            return 0;
        }
        self.values.rank(1e-9 * self.bound.max(1.0))
    }

    pub fn permuted_rows(&self, perm: &[usize]) -> Self {
        let v = DMatrix::from_fn(perm.len(), self.values.ncols(), |i, j| self.values[(perm[i], j)]);
        Self { values: v, kinds: self.kinds.clone(), names: self.names.clone(), bound: self.bound }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeMode {
    /// `ψ_i = 1/|G_k|`.
    Uniform,
    /// Pareto(2) weights renormalized per group.
    PowerLaw,
}

/// How `ψ` enters the edge probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeScale {
    /// `P(i,j) = ψ_i ψ_j B(z_i, z_j)` with the unit-sum normalization.
    Identifiable,
    /// `ψ_i` rescaled by the size of its initial group, so uniform weights
    /// give `P(i,j) = B(z_i, z_j)`.
    GroupSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChurnMode {
    /// `s' ~ Uniform{0,…,s}` nodes move each step.
    UpTo,
    /// Exactly `s` nodes move each step (fewer only when moves are impossible).
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CovariateMode {
    /// I.i.d. `Uniform(low, high)`; `columns = None` means `⌊ln N⌋` (at least one).
    Uniform { columns: Option<usize>, low: f64, high: f64 },
    /// One-hot initial group indicator; each node's category is replaced by a
    /// uniformly random one with probability `flip`.
    GroupDummy { flip: f64 },
    None,
}

impl Default for CovariateMode {
    fn default() -> Self {
        CovariateMode::Uniform { columns: None, low: 0.0, high: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub nodes: usize,
    pub periods: usize,
    pub k: usize,
    pub churn: usize,
    pub churn_mode: ChurnMode,
    pub degree_mode: DegreeMode,
    pub degree_scale: DegreeScale,
    pub covariates: CovariateMode,
    pub assortative: bool,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(nodes: usize, periods: usize, k: usize, churn: usize, seed: u64) -> Self {
        Self {
            nodes,
            periods,
            k,
            churn,
            churn_mode: ChurnMode::UpTo,
            degree_mode: DegreeMode::Uniform,
            degree_scale: DegreeScale::GroupSize,
            covariates: CovariateMode::default(),
            assortative: false,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.k > self.nodes {
            return Err(Error::Config(format!("k = {} exceeds the number of nodes {}", self.k, self.nodes)));
        }
        if self.periods == 0 {
            return Err(Error::Config("periods must be at least 1".into()));
        }
        if self.churn > self.nodes {
            return Err(Error::Config(format!("churn bound {} exceeds the number of nodes {}", self.churn, self.nodes)));
        }
        match self.covariates {
            CovariateMode::Uniform { low, high, .. } if !(low.is_finite() && high.is_finite() && low < high) => {
                Err(Error::Config(format!("covariate range [{low}, {high}) is empty")))
            }
            CovariateMode::GroupDummy { flip } if !(0.0..=1.0).contains(&flip) => {
                Err(Error::Config(format!("flip probability {flip} outside [0,1]")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulatedInstance {
    pub network: DynamicNetwork,
    pub memberships: MembershipSeries,
    pub degrees: DegreeParams,
    pub covariates: CovariateMatrix,
    /// Pair-periods whose edge probability exceeded one and was clipped.
    pub clipped: usize,
}

/// Samples a dynamic degree-corrected blockmodel with membership churn.
pub fn sample_dynamic_dcbm(cfg: &SimConfig, blocks: &BlockProbabilitySeries) -> Result<SimulatedInstance> {
    cfg.validate()?;
    if blocks.periods() != cfg.periods || blocks.k() != cfg.k {
        return Err(Error::dims(
            "block probability series",
            format!("T={}, K={}", cfg.periods, cfg.k),
            format!("T={}, K={}", blocks.periods(), blocks.k()),
        ));
    }
    if cfg.assortative {
        blocks.check_assortative()?;
    }
    let (n, k) = (cfg.nodes, cfg.k);

    let mut rng = substream(cfg.seed, "membership", 0);
    let mut initial: Vec<usize> = (0..n).map(|i| i % k).collect();
    initial.shuffle(&mut rng);
    let mut labels = vec![initial.clone()];
    for _ in 1..cfg.periods {
        let mut next = labels.last().expect("non-empty").clone();
        let moves = match cfg.churn_mode {
            ChurnMode::UpTo => rng.random_range(0..=cfg.churn),
            ChurnMode::Exact => cfg.churn,
        };
        apply_churn(&mut next, k, moves, &mut rng);
        labels.push(next);
    }
    let memberships = MembershipSeries::new(k, labels)?;

    let mut rng = substream(cfg.seed, "degree", 0);
    let degrees = match cfg.degree_mode {
        DegreeMode::Uniform => DegreeParams::uniform(initial.clone(), k)?,
        DegreeMode::PowerLaw => {
            let pareto = Pareto::new(1.0, 2.0).expect("valid Pareto parameters");
            let w: Vec<f64> = (0..n).map(|_| pareto.sample(&mut rng)).collect();
            DegreeParams::from_weights(&w, initial.clone(), k)?
        }
    };
    let theta = degrees.edge_weights(cfg.degree_scale);

    let covariates = sample_covariates(cfg, &initial)?;

    let mut clipped = 0;
    let mut adjacency = Vec::with_capacity(cfg.periods);
    for t in 0..cfg.periods {
        let mut rng = substream(cfg.seed, "edges", t as u64);
        let z = memberships.labels(t);
        let b = blocks.slice(t);
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let mut p = theta[i] * theta[j] * b[(z[i], z[j])];
                if p > 1.0 {
                    p = 1.0;
                    clipped += 1;
                }
                if rng.random::<f64>() < p {
                    a[(i, j)] = 1.0;
                    a[(j, i)] = 1.0;
                }
            }
        }
        adjacency.push(a);
    }
    if clipped > 0 {
        log::warn!("{clipped} edge probabilities exceeded 1 and were clipped");
    }
    let network = DynamicNetwork::from_adjacency(adjacency)?;
    Ok(SimulatedInstance { network, memberships, degrees, covariates, clipped })
}

/// Moves up to `moves` distinct nodes to a different group without emptying
/// any group. Nodes whose move would empty their group are skipped and the
/// draw continues with the next candidate.
fn apply_churn<R: Rng>(labels: &mut [usize], k: usize, moves: usize, rng: &mut R) {
    if k < 2 || moves == 0 {
        return;
    }
    let mut sizes = group_sizes(labels, k);
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.shuffle(rng);
    let mut done = 0;
    for i in order {
        if done == moves {
            break;
        }
        let from = labels[i];
        if sizes[from] <= 1 {
            continue;
        }
        let others: Vec<usize> = (0..k).filter(|&g| g != from).collect();
        let to = *others.choose(rng).expect("k >= 2");
        labels[i] = to;
        sizes[from] -= 1;
        sizes[to] += 1;
        done += 1;
    }
}

fn sample_covariates(cfg: &SimConfig, initial: &[usize]) -> Result<CovariateMatrix> {
    let n = cfg.nodes;
    let mut rng = substream(cfg.seed, "covariates", 0);
    match cfg.covariates {
        CovariateMode::Uniform { columns, low, high } => {
            let r = columns.unwrap_or_else(|| ((n as f64).ln().floor() as usize).max(1));
            let dist = Uniform::new(low, high).map_err(|e| Error::Config(e.to_string()))?;
            // Row-major draw order.
            let data: Vec<f64> = (0..n * r).map(|_| dist.sample(&mut rng)).collect();
            CovariateMatrix::continuous(DMatrix::from_row_slice(n, r, &data))
        }
        CovariateMode::GroupDummy { flip } => {
            let k = cfg.k;
            let mut x = DMatrix::zeros(n, k);
            for (i, &g) in initial.iter().enumerate() {
                let cat = if rng.random::<f64>() < flip { rng.random_range(0..k) } else { g };
                x[(i, cat)] = 1.0;
            }
            CovariateMatrix::new(x, vec![ColumnKind::Dummy; k])
        }
        CovariateMode::None => Ok(CovariateMatrix::zeros(n, 0)),
    }
}

/// Population adjacency `ΨZBZᵀΨ` for one period.
pub fn population_adjacency(labels: &[usize], blocks: &DMatrix<f64>, degree_weights: &[f64]) -> Result<DMatrix<f64>> {
    let n = labels.len();
    if degree_weights.len() != n {
        return Err(Error::dims("degree weights", n, degree_weights.len()));
    }
    let k = blocks.nrows();
    if let Some(&l) = labels.iter().find(|&&l| l >= k) {
        return Err(Error::dims("block labels", format!("< {k}"), l));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| degree_weights[i] * degree_weights[j] * blocks[(labels[i], labels[j])]))
}

/// Population similarity `𝓛_τ + α·X(Xᵀ𝓛_τX)Xᵀ`.
pub fn population_similarity(
    labels: &[usize],
    blocks: &DMatrix<f64>,
    degree_weights: &[f64],
    covariates: &CovariateMatrix,
    alpha: f64,
    tau: f64,
) -> Result<DMatrix<f64>> {
    let n = labels.len();
    if covariates.nodes() != n {
        return Err(Error::dims("covariate rows", n, covariates.nodes()));
    }
    let a = population_adjacency(labels, blocks, degree_weights)?;
    let mut inv_sqrt = Vec::with_capacity(n);
    for i in 0..n {
        let d = a.row(i).sum() + tau;
        if d <= 0.0 {
            return Err(Error::DegenerateNode { node: i });
        }
        inv_sqrt.push(1.0 / d.sqrt());
    }
    let lap = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
    if alpha == 0.0 || covariates.columns() == 0 {
        return Ok(lap);
    }
    let x = covariates.values();
    let w = x.transpose() * &lap * x;
    let cw = x * w * x.transpose();
    Ok(lap + cw * alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn balanced(n: usize, k: usize) -> Vec<usize> {
        (0..n).map(|i| i % k).collect()
    }

    #[test]
    fn zero_blocks_give_empty_graphs() {
        let cfg = SimConfig::new(12, 4, 3, 2, 5);
        let b = BlockProbabilitySeries::constant(4, DMatrix::zeros(3, 3)).unwrap();
        let inst = sample_dynamic_dcbm(&cfg, &b).unwrap();
        assert!(inst.network.slices().iter().all(|a| a.sum() == 0.0));
    }

    #[test]
    fn rejects_k_above_n() {
        let cfg = SimConfig::new(2, 3, 3, 0, 1);
        let b = BlockProbabilitySeries::linear_ramp(3);
        assert!(matches!(sample_dynamic_dcbm(&cfg, &b), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let cfg = SimConfig::new(10, 5, 3, 0, 1);
        let b = BlockProbabilitySeries::linear_ramp(4);
        assert!(matches!(sample_dynamic_dcbm(&cfg, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn ramp_design_matches_published_matrix() {
        let b = BlockProbabilitySeries::linear_ramp(10);
        assert_eq!(b.periods(), 10);
        assert_abs_diff_eq!(b.slice(9)[(0, 0)], 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(b.slice(4)[(1, 2)], 0.5 * 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(b.slice(0)[(2, 0)], 0.1 * 0.3, epsilon = 1e-15);
        // The design is not positive definite, so the assortative check refuses it.
        assert!(b.check_assortative().is_err());
    }

    #[test]
    fn degree_params_normalize_per_group() {
        let d = DegreeParams::from_weights(&[1.0, 3.0, 2.0, 2.0], vec![0, 0, 1, 1], 2).unwrap();
        assert_eq!(d.psi(), &[0.25, 0.75, 0.5, 0.5]);
        assert_eq!(d.edge_weights(DegreeScale::GroupSize), vec![0.5, 1.5, 1.0, 1.0]);
        assert!(DegreeParams::from_weights(&[1.0, 1.0], vec![0, 0], 2).is_err());
        assert!(DegreeParams::from_weights(&[1.0, -1.0], vec![0, 1], 2).is_err());
    }

    #[test]
    fn power_law_degrees_are_normalized() {
        let mut cfg = SimConfig::new(30, 2, 3, 0, 11);
        cfg.degree_mode = DegreeMode::PowerLaw;
        let inst = sample_dynamic_dcbm(&cfg, &BlockProbabilitySeries::linear_ramp(2)).unwrap();
        for s in inst.degrees.group_sums() {
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
        assert!(inst.degrees.psi().iter().all(|&p| p > 0.0));
    }

    #[test]
    fn churn_never_empties_groups() {
        let mut labels = vec![0, 1, 2, 2, 2];
        let mut rng = substream(3, "t", 0);
        for _ in 0..200 {
            apply_churn(&mut labels, 3, 5, &mut rng);
            assert!(!group_sizes(&labels, 3).contains(&0));
        }
        // One node per group: no move is possible.
        let mut single = vec![0, 1, 2];
        apply_churn(&mut single, 3, 3, &mut rng);
        assert_eq!(single, vec![0, 1, 2]);
    }

    #[test]
    fn dummy_covariates_follow_groups_without_flips() {
        let mut cfg = SimConfig::new(9, 1, 3, 0, 2);
        cfg.covariates = CovariateMode::GroupDummy { flip: 0.0 };
        let inst = sample_dynamic_dcbm(&cfg, &BlockProbabilitySeries::linear_ramp(1)).unwrap();
        let z = inst.memberships.one_hot(0);
        assert_eq!(inst.covariates.values(), &z);
        assert_eq!(inst.covariates.bound(), 1.0);
    }

    #[test]
    fn default_covariates_use_log_n_columns() {
        let cfg = SimConfig::new(100, 1, 3, 0, 2);
        let inst = sample_dynamic_dcbm(&cfg, &BlockProbabilitySeries::linear_ramp(1)).unwrap();
        assert_eq!(inst.covariates.columns(), 4);
        assert!(inst.covariates.bound() < 10.0);
        assert!(inst.covariates.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn single_block_population_eigenvalue() {
        // 𝒜 = (p/N²)·11ᵀ, degrees p/N, so λ₁ = (p/N)/(p/N + τ).
        let (n, p, tau) = (8, 0.6, 0.05);
        let labels = vec![0; n];
        let psi = DegreeParams::uniform(labels.clone(), 1).unwrap();
        let b = DMatrix::from_element(1, 1, p);
        let s = population_similarity(&labels, &b, psi.psi(), &CovariateMatrix::zeros(n, 1), 0.0, tau).unwrap();
        let ev = linalg::symmetric_eigenvalues(&s).unwrap();
        let expect = (p / n as f64) / (p / n as f64 + tau);
        assert_abs_diff_eq!(ev[0], expect, epsilon = 1e-12);
        assert!(ev[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn two_separated_blocks_have_rank_two() {
        let labels = balanced(10, 2);
        let b = DMatrix::from_row_slice(2, 2, &[0.7, 0.0, 0.0, 0.4]);
        let w = vec![1.0; 10];
        let s = population_similarity(&labels, &b, &w, &CovariateMatrix::zeros(10, 1), 0.0, 1.0).unwrap();
        let ev = linalg::symmetric_eigenvalues(&s).unwrap();
        assert_eq!(ev.iter().filter(|v| v.abs() > 1e-10).count(), 2);
    }

    #[test]
    fn zero_population_degree_is_reported() {
        let labels = vec![0, 0, 1];
        let b = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.0]);
        let err = population_similarity(&labels, &b, &[1.0, 1.0, 1.0], &CovariateMatrix::zeros(3, 1), 0.0, 0.0);
        assert!(matches!(err, Err(Error::DegenerateNode { node: 2 })));
    }

    #[test]
    fn network_validation() {
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(DynamicNetwork::from_adjacency(vec![bad]).is_err());
        let looped = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(DynamicNetwork::from_adjacency(vec![looped]).is_err());
    }

    #[test]
    fn membership_one_hot_and_churn() {
        let m = MembershipSeries::new(2, vec![vec![0, 1, 1], vec![1, 1, 0]]).unwrap();
        assert_eq!(m.changes(1), 2);
        assert_eq!(m.one_hot(1).row(2).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0]);
        assert!(MembershipSeries::new(2, vec![vec![0, 2]]).is_err());
    }
}
