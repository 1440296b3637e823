use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sbm::{ColumnKind, CovariateMatrix};

fn is_unknown(label: &str) -> bool {
    let l = label.trim();
    l.is_empty() || l.eq_ignore_ascii_case("unknown")
}

#[derive(Debug, Deserialize, Serialize)]
struct AttributeRecord {
    id: String,
    #[serde(default)]
    algorithm: Option<String>,
    #[serde(default)]
    proof_types: Vec<String>,
}

/// Categorical contract information per asset. `None` / an empty proof set
/// stand for "unknown", which never matches anything.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractAttributes {
    ids: Vec<String>,
    algorithms: Vec<Option<String>>,
    proof_types: Vec<BTreeSet<String>>,
}

impl ContractAttributes {
    pub fn new(ids: Vec<String>, algorithms: Vec<Option<String>>, proof_types: Vec<Vec<String>>) -> Result<Self> {
        if algorithms.len() != ids.len() || proof_types.len() != ids.len() {
            return Err(Error::dims("contract attributes", ids.len(), format!("{} algorithms / {} proof sets", algorithms.len(), proof_types.len())));
        }
        let algorithms = algorithms
            .into_iter()
            .map(|a| a.filter(|s| !is_unknown(s)).map(|s| s.trim().to_string()))
            .collect();
        let proof_types = proof_types
            .into_iter()
            .map(|p| p.into_iter().filter(|s| !is_unknown(s)).map(|s| s.trim().to_string()).collect())
            .collect();
        Ok(Self { ids, algorithms, proof_types })
    }

    /// JSON array of `{id, algorithm, proof_types: [...]}`.
    pub fn from_json_reader<R: Read>(reader: R, source: &Path) -> Result<Self> {
        let records: Vec<AttributeRecord> = serde_json::from_reader(reader).map_err(|e| Error::ingest(source, e))?;
        let mut seen = BTreeSet::new();
        for r in &records {
            if !seen.insert(r.id.clone()) {
                return Err(Error::ingest(source, format!("duplicate id {}", r.id)));
            }
        }
        let ids = records.iter().map(|r| r.id.clone()).collect();
        let algs = records.iter().map(|r| r.algorithm.clone()).collect();
        let proofs = records.into_iter().map(|r| r.proof_types).collect();
        Self::new(ids, algs, proofs)
    }

    pub fn from_json_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::ingest(path, e))?;
        Self::from_json_reader(file, path)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn algorithm(&self, i: usize) -> Option<&str> {
        self.algorithms[i].as_deref()
    }

    pub fn proof_types(&self, i: usize) -> &BTreeSet<String> {
        &self.proof_types[i]
    }

    /// Reorders the records to follow `ids`. Every id missing from either
    /// side is reported.
    pub fn aligned_to(&self, ids: &[String]) -> Result<Self> {
        let missing: Vec<&str> = ids.iter().filter(|id| !self.ids.contains(id)).map(String::as_str).collect();
        let extra: Vec<&str> = self.ids.iter().filter(|id| !ids.contains(id)).map(String::as_str).collect();
        if !missing.is_empty() || !extra.is_empty() {
            return Err(Error::InvalidInput(format!(
                "attribute ids do not match assets; missing attributes for [{}], unknown ids [{}]",
                missing.join(", "),
                extra.join(", ")
            )));
        }
        let pos: Vec<usize> = ids.iter().map(|id| self.ids.iter().position(|x| x == id).expect("checked")).collect();
        Ok(Self {
            ids: ids.to_vec(),
            algorithms: pos.iter().map(|&p| self.algorithms[p].clone()).collect(),
            proof_types: pos.iter().map(|&p| self.proof_types[p].clone()).collect(),
        })
    }
}

fn adjacency_by(n: usize, linked: impl Fn(usize, usize) -> bool) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if linked(i, j) {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
    }
    a
}

/// Edge iff the two assets share a known hashing algorithm.
pub fn algorithm_adjacency(attrs: &ContractAttributes) -> DMatrix<f64> {
    adjacency_by(attrs.len(), |i, j| matches!((attrs.algorithm(i), attrs.algorithm(j)), (Some(a), Some(b)) if a == b))
}

/// Edge iff the two assets share at least one known proof type.
pub fn proof_adjacency(attrs: &ContractAttributes) -> DMatrix<f64> {
    adjacency_by(attrs.len(), |i, j| !attrs.proof_types(i).is_disjoint(attrs.proof_types(j)))
}

/// Edge iff the assets share an algorithm or a proof type.
pub fn contract_adjacency(attrs: &ContractAttributes) -> DMatrix<f64> {
    let alg = algorithm_adjacency(attrs);
    let proof = proof_adjacency(attrs);
    alg.zip_map(&proof, |a, b| a.max(b))
}

/// One-hot algorithm columns followed by one-hot proof-type columns, each
/// block in lexicographic order. Unknown values give all-zero blocks.
pub fn covariate_dummies(attrs: &ContractAttributes) -> CovariateMatrix {
    let algs: BTreeSet<&str> = (0..attrs.len()).filter_map(|i| attrs.algorithm(i)).collect();
    let proofs: BTreeSet<&str> = (0..attrs.len()).flat_map(|i| attrs.proof_types(i).iter().map(String::as_str)).collect();
    let mut names: Vec<String> = algs.iter().map(|a| format!("algorithm:{a}")).collect();
    names.extend(proofs.iter().map(|p| format!("proof:{p}")));
    let alg_idx: Vec<&str> = algs.into_iter().collect();
    let proof_idx: Vec<&str> = proofs.into_iter().collect();
    let mut x = DMatrix::zeros(attrs.len(), names.len());
    for i in 0..attrs.len() {
        if let Some(a) = attrs.algorithm(i) {
            let c = alg_idx.binary_search(&a).expect("collected");
            x[(i, c)] = 1.0;
        }
        for p in attrs.proof_types(i) {
            let c = proof_idx.binary_search(&p.as_str()).expect("collected");
            x[(i, alg_idx.len() + c)] = 1.0;
        }
    }
    let kinds = vec![ColumnKind::Dummy; names.len()];
    CovariateMatrix::with_names(x, kinds, names).expect("dummy matrix is valid")
}
