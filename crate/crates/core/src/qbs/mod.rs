//! Grouping with fused keys and `Other` groups, and chained roll-up.

pub mod aggregate;
pub mod engine;
pub mod key;
pub mod rows;
pub mod witness;

pub use aggregate::AggState;
pub use engine::{qbs, qbs_with, rollup, rollup_with, PhaseTimings, QbsOptions};
pub use key::{build_group_key, GroupKey, GroupList, LevelRef};
pub use rows::result_rows;
pub use witness::{product, WitnessTree, WitnessTreeList};
