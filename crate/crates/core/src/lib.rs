//! Query-time OLAP over XML warehouse trees whose dimension hierarchies may
//! be non-strict (a member rolls up to several parents) or incomplete (a
//! roll-up path skips levels).
//!
//! Grouping builds one key per fact and grouping level: the set of members
//! the fact reaches at that level, fused into a single value (`Team[1-2]`),
//! plus an `Other` group for facts whose paths miss the level. Every fact
//! lands in exactly one group, so sums and counts are neither double counted
//! nor lost.
//!
//! ```
//! use xolap::qbs::{qbs, result_rows};
//! use xolap::sample::{projects_schema, projects_warehouse, q1};
//!
//! let schema = projects_schema();
//! let out = qbs(&projects_warehouse(), &q1(), &schema)?;
//! let rows = result_rows(&out, &q1(), &schema)?;
//! assert_eq!(rows[0], "project.Team=1-2 | customer.Customer=α | sum(cost)=1000");
//! assert_eq!(rows[3], "project.Team=Other | customer.Customer=γ | sum(cost)=100");
//! # Ok::<(), xolap::Error>(())
//! ```
//!
//! The [`pedersen`] module normalizes a warehouse ahead of time instead and
//! serves as the reference the engine is tested against; [`bench`] generates
//! synthetic warehouses and times both approaches.

pub mod bench;
pub mod error;
pub mod model;
pub mod pattern;
pub mod pedersen;
pub mod qbs;
pub mod sample;

pub use error::{Error, Result};
pub use model::{
    parse_warehouse, serialize_warehouse, validate_summarizability, DiagnosticsReport, MDDataTree,
    WarehouseSchema,
};
pub use pattern::{parse_query, TreePatternQuery};
pub use qbs::{qbs, rollup};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data-model.md")]
    mod data_model {}
    #[doc = include_str!("../../../book/src/queries.md")]
    mod queries {}
    #[doc = include_str!("../../../book/src/grouping.md")]
    mod grouping {}
    #[doc = include_str!("../../../book/src/normalization.md")]
    mod normalization {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
}
