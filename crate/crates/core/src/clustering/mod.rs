//! Spectral embedding, spherical k-means, the dynamic covariate-assisted
//! pipeline, its baselines and cross-validated choice of K.

mod baselines;
mod casc;
mod embed;
mod kmeans;
mod select_k;

pub use baselines::{dsc_cw_baseline, dsc_dc_baseline, dsc_pz_baseline};
pub use casc::{casc_dc, cluster_similarity_series, ClusterConfig, ClusteringRun, PeriodDiagnostics};
pub use embed::{spectral_embed, SpectralEmbedding, ZERO_ROW_TOL};
pub use kmeans::{kmeans_rows, spherical_kmeans, KMeansOptions, KMeansResult};
pub use select_k::{select_k, KSelection};
