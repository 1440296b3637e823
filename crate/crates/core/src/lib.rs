//! Dynamic covariate-assisted spectral clustering (CASC-DC) for
//! degree-corrected stochastic blockmodels with node covariates.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`sbm`] | blockmodel domain types and the seeded simulator |
//! | [`similarity`] | regularized Laplacians, covariate term, kernel smoothing, Lepski bandwidth |
//! | [`clustering`] | spectral embedding, spherical k-means, CASC-DC and baselines, K selection |
//! | [`netbuild`] | adaptive-Lasso return networks, contract networks, centrality |
//! | [`evaluation`] | misclustering, group connections, the misclustering bound, contrarian backtest |
//! | [`experiment`] | Monte Carlo sweeps over network size and churn |
//! | [`io`] | CSV/JSON formats |

pub mod clustering;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod netbuild;
pub mod rng;
pub mod sbm;
pub mod similarity;

pub use error::{Error, Result};
