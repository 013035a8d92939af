//! Author name disambiguation from co-author and citation-graph evidence.
//!
//! Papers sharing an author name are grouped into blocks
//! ([`corpus::build_blocks`]), scored pairwise with four parameter-free
//! terms ([`similarity::compute_terms`]) and clustered in two agglomerative
//! steps ([`clustering`]). The [`metrics`] and [`optimizer`] modules tune the
//! seven weights and thresholds against gold profiles and first-initial
//! precision, [`synth`] generates corpora with known ground truth, and
//! [`hmodel`] holds the product-of-exponentials h-index distribution.

pub mod clustering;
pub mod corpus;
pub mod hmodel;
pub mod metrics;
pub mod optimizer;
pub mod similarity;
pub mod synth;
