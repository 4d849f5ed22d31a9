//! Reconstruction metrics, concept counts, annotator agreement and model clustering.

pub mod agreement;
pub mod cluster;
pub mod counts;
pub mod rank;
pub mod reconstruction;

pub use agreement::{krippendorff_alpha, AgreementReport, Distance, Label};
pub use cluster::{cluster_models, cluster_rows, Clustering, Merge};
pub use counts::{concept_counts, ConceptCountReport, ConceptCountRow, DEFAULT_MASTERY_THRESHOLD};
pub use rank::{average_ranks, spearman};
pub use reconstruction::{auc, auc_pairwise, reconstruction_metrics, ReconstructionReport, DEFAULT_BINARIZE_THRESHOLD};
