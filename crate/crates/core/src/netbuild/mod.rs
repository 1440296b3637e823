//! Return-based networks from adaptive-Lasso selections, attribute-sharing
//! networks from contract information, and centrality scores.

mod attributes;
mod centrality;
mod lasso;
mod network;
mod panel;

pub use attributes::{algorithm_adjacency, contract_adjacency, covariate_dummies, proof_adjacency, ContractAttributes};
pub use centrality::{connected_components, degree_centrality_normalized, eigenvector_centrality, DegreeCentrality, EigenCentrality};
pub use lasso::{adaptive_lasso_fit, LambdaSelection, LassoConfig, LassoFit, MIN_WINDOW, SELECTION_TOL};
pub use network::{period_windows, return_network, FitFailure, ReturnNetwork, ReturnNetworkConfig, Symmetrize, WindowMode};
pub use panel::{ReturnPanel, StandardizedWindow};
