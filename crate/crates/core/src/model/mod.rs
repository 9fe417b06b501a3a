pub mod diagnostics;
pub mod number;
pub mod schema;
pub mod tree;
pub mod xml;

pub use diagnostics::{validate_summarizability, DiagnosticsReport, Finding, FindingKind};
pub use schema::{Domain, HierarchySchema, LevelPos, LevelSchema, WarehouseSchema, OTHER};
pub use tree::{MDDataTree, Node, NodeId, NodeKind};
pub use xml::{parse_warehouse, parse_warehouse_from, serialize_warehouse};
