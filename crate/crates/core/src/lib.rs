//! Exact worst-case compressibility of finite support sets.
//!
//! A sink that knows the support set of `N` informants' data queries them to
//! learn either the whole data vector or its bitwise OR. This crate computes
//! the minimum worst-case number of informant bits (`#_b`) and of informants
//! queried (`#_n`), classifies support sets as bit- or informant-compressible,
//! and checks threshold cardinalities, counts and region tables against their
//! closed forms by exhaustive enumeration.

pub mod analysis;
pub mod enumerate;
pub mod error;
pub mod measures;
pub mod oracle;
pub mod space;
pub mod support;
pub mod symmetry;
pub mod verify;

pub use error::{Error, Result};
pub use oracle::{CostReport, Metric, TargetFunction};
pub use space::{CellSet, Point, SampleSpace};
pub use support::{CellView, ConsistentSet, Format, SupportSet};
