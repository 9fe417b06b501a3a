//! Synthetic sales warehouses, the n-dimension query workload and a timing
//! harness comparing grouping on raw data with normalize-then-group.

pub mod config;
pub mod generate;
pub mod harness;
pub mod workload;

pub use config::{xweb_dimensions, ComplexityKind, DimensionSpec, GeneratorConfig};
pub use generate::{generate, InjectionKind, InjectionLedger, InjectionRecord};
pub use harness::{run_benchmark, BenchFile, BenchOptions, BenchReport, Measurement, Mode, Phase};
pub use workload::{shaped_workload, xweb_workload, WorkloadQuery};
