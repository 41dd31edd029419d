//! Preprocessing, ensemble feature selection and evaluation metrics for small
//! mixed-type clinical tables. Everything here works without `std`.

#![no_std]

extern crate alloc;

pub mod data;
pub mod error;
pub mod folds;
pub mod metrics;
pub mod models;
pub mod preprocess;
pub mod rent;
pub mod sampling;
pub mod special;
pub mod stats;
pub mod synth;
pub mod ubayfs;

pub use data::{Block, Cell, Dataset, EncodedColumn, EncodedMatrix, Encoding, FeatureKind, FeatureMeta, Target};
pub use error::{Error, Result};
