//! lastpc: discovery of constant linear combinations (conservation-law
//! style relations) from data via the smallest principal components.
//!
//! The pipeline fits a covariance- or correlation-kind PCA and inspects
//! the eigenvectors with the smallest eigenvalues: a near-zero eigenvalue
//! means the corresponding loading combination is nearly constant over
//! the cases, which is the signature of an exact relation among the
//! variables. The crate covers tabular data (optionally log-transformed,
//! where power laws become linear relations), gridded space-time stacks
//! flattened to one wide matrix, seeded synthetic generators, and a
//! structured-report CLI in `src/main.rs`.

pub mod bridge;
pub mod datagen;
pub mod discovery;
pub mod error;
pub mod gridded;
pub mod numeric;
pub mod pca;
pub mod pipeline;
pub mod report;
pub mod table;

pub use error::{Error, Result};
pub use table::DataTable;
