//! Layout hotspot detection with synthetic database enhancement.
//!
//! The pipeline runs from integer rectilinear geometry ([`geom`], [`layout`])
//! through rule checking ([`drc`]), synthetic variant generation
//! ([`patgen`]), a surrogate lithography oracle ([`litho`]), fragment-based
//! features ([`ftp`]), PCA ([`pca`]) and class-weighted RBF SVMs ([`svm`],
//! [`cluster`]), to evaluation ([`metrics`]) and the end-to-end experiments
//! ([`experiment`], [`harness`]) on procedurally generated layouts
//! ([`corpus`]).

pub mod cluster;
pub mod corpus;
pub mod drc;
pub mod error;
pub mod experiment;
pub mod ftp;
pub mod geom;
pub mod harness;
pub mod io;
pub mod layout;
pub mod litho;
pub mod matrix;
pub mod metrics;
pub mod patgen;
pub mod pca;
pub mod rng;
pub mod svm;

pub use error::{Error, GeometryError, Result};
