//! Timing of grouping on raw warehouses against normalization followed by
//! a plain group-by. Every timed run is checked against the reference
//! result first; a disagreement aborts the report.

use std::collections::BTreeMap;
use std::fmt::{self, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Deserialize;

use crate::bench::config::{ComplexityKind, GeneratorConfig};
use crate::bench::generate::generate;
use crate::bench::workload::{xweb_query, WorkloadQuery};
use crate::error::{Error, Result};
use crate::model::schema::WarehouseSchema;
use crate::model::tree::MDDataTree;
use crate::pedersen::{normalize, plain_group_by, NormalizationPlan};
use crate::qbs::{qbs_with, result_rows, QbsOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Qbs,
    PedersenWithOverhead,
    PedersenWithoutOverhead,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Qbs, Mode::PedersenWithOverhead, Mode::PedersenWithoutOverhead];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Qbs => "qbs",
            Mode::PedersenWithOverhead => "pedersen_with_overhead",
            Mode::PedersenWithoutOverhead => "pedersen_without_overhead",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown mode {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Summarizability,
    Matching,
    Total,
    Normalize,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Summarizability => "summarizability",
            Phase::Matching => "matching",
            Phase::Total => "total",
            Phase::Normalize => "normalize",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub config_id: String,
    pub facts: usize,
    pub kind: ComplexityKind,
    pub pct: u32,
    pub query: String,
    pub mode: Mode,
    pub rep: usize,
    pub phase: Phase,
    pub millis: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub measurements: Vec<Measurement>,
}

pub const CSV_HEADER: &str = "config_id,facts,kind,pct,query,mode,rep,phase,millis";

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for m in &self.measurements {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{:.3}",
                m.config_id,
                m.facts,
                m.kind,
                m.pct,
                m.query,
                m.mode.as_str(),
                m.rep,
                m.phase.as_str(),
                m.millis
            );
        }
        out
    }

    /// Median over repetitions per (config, query, mode, phase).
    pub fn medians(&self) -> BTreeMap<(String, String, Mode, Phase), f64> {
        let mut samples: BTreeMap<(String, String, Mode, Phase), Vec<f64>> = BTreeMap::new();
        for m in &self.measurements {
            samples
                .entry((m.config_id.clone(), m.query.clone(), m.mode, m.phase))
                .or_default()
                .push(m.millis);
        }
        samples.into_iter().map(|(k, v)| (k, median(v))).collect()
    }

    pub fn median(&self, config_id: &str, query: &str, mode: Mode, phase: Phase) -> Option<f64> {
        let v: Vec<f64> = self
            .measurements
            .iter()
            .filter(|m| m.config_id == config_id && m.query == query && m.mode == mode && m.phase == phase)
            .map(|m| m.millis)
            .collect();
        (!v.is_empty()).then(|| median(v))
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv())
    }
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchOptions {
    pub repetitions: usize,
    pub qbs: QbsOptions,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions { repetitions: 3, qbs: QbsOptions::default() }
    }
}

pub fn run_benchmark(
    configs: &[GeneratorConfig],
    workload: &[WorkloadQuery],
    modes: &[Mode],
    options: BenchOptions,
) -> Result<BenchReport> {
    if options.repetitions < 3 {
        return Err(Error::InvalidConfig(format!("{} repetitions, at least 3 needed", options.repetitions)));
    }
    let plan = NormalizationPlan::default();
    let mut report = BenchReport::default();
    for config in configs {
        let (tree, _) = generate(config)?;
        let schema = config.schema()?;
        let (normalized, _) = normalize(&tree, &schema, plan);
        for wq in workload {
            let reference = result_rows(&qbs_with(&tree, &wq.query, &schema, options.qbs)?.0, &wq.query, &schema)?;
            let check = |out: &MDDataTree, mode: Mode| -> Result<()> {
                let rows = result_rows(out, &wq.query, &schema)?;
                if rows != reference {
                    let first = rows.iter().zip(&reference).find(|(a, b)| a != b);
                    return Err(Error::ResultMismatch(format!(
                        "{} {} {}: {} vs {} groups, first difference {:?}",
                        config.id(),
                        wq.name,
                        mode.as_str(),
                        rows.len(),
                        reference.len(),
                        first
                    )));
                }
                Ok(())
            };
            check(&plain_group_by(&normalized, &wq.query, &schema)?, Mode::PedersenWithoutOverhead)?;

            for &mode in modes {
                for rep in 0..options.repetitions {
                    let phases = time_mode(mode, &tree, &normalized, wq, &schema, options, &check)?;
                    for (phase, d) in phases {
                        report.measurements.push(Measurement {
                            config_id: config.id(),
                            facts: config.facts,
                            kind: config.kind,
                            pct: config.pct,
                            query: wq.name.clone(),
                            mode,
                            rep,
                            phase,
                            millis: millis(d),
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

fn time_mode(
    mode: Mode,
    tree: &MDDataTree,
    normalized: &MDDataTree,
    wq: &WorkloadQuery,
    schema: &WarehouseSchema,
    options: BenchOptions,
    check: &dyn Fn(&MDDataTree, Mode) -> Result<()>,
) -> Result<Vec<(Phase, Duration)>> {
    Ok(match mode {
        Mode::Qbs => {
            let (out, t) = qbs_with(tree, &wq.query, schema, options.qbs)?;
            check(&out, mode)?;
            vec![(Phase::Summarizability, t.summarizability), (Phase::Matching, t.matching), (Phase::Total, t.total())]
        }
        Mode::PedersenWithOverhead => {
            let start = Instant::now();
            let (fresh, _) = normalize(tree, schema, NormalizationPlan::default());
            let normalized_at = Instant::now();
            let out = plain_group_by(&fresh, &wq.query, schema)?;
            let done = Instant::now();
            check(&out, mode)?;
            vec![(Phase::Normalize, normalized_at - start), (Phase::Total, done - start)]
        }
        Mode::PedersenWithoutOverhead => {
            let start = Instant::now();
            let out = plain_group_by(normalized, &wq.query, schema)?;
            let elapsed = start.elapsed();
            check(&out, mode)?;
            vec![(Phase::Total, elapsed)]
        }
    })
}

/// A benchmark description read from a `key = value` file:
///
/// ```toml
/// facts = [1000, 2000]
/// kinds = ["complex"]
/// pcts = [20]
/// seed = 42
/// queries = ["1D", "2D"]
/// modes = ["qbs", "pedersen_with_overhead", "pedersen_without_overhead"]
/// repetitions = 3
/// linear_scan = false
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchFile {
    pub facts: Vec<usize>,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<ComplexityKind>,
    #[serde(default = "default_pcts")]
    pub pcts: Vec<u32>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_queries")]
    pub queries: Vec<String>,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub linear_scan: bool,
}

fn default_kinds() -> Vec<ComplexityKind> {
    vec![ComplexityKind::Complex]
}

fn default_pcts() -> Vec<u32> {
    vec![20]
}

fn default_queries() -> Vec<String> {
    ["1D", "2D", "3D", "4D"].map(String::from).to_vec()
}

fn default_modes() -> Vec<Mode> {
    Mode::ALL.to_vec()
}

fn default_repetitions() -> usize {
    3
}

impl BenchFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn configs(&self) -> Vec<GeneratorConfig> {
        let mut out = Vec::new();
        for &facts in &self.facts {
            for &kind in &self.kinds {
                for &pct in &self.pcts {
                    out.push(GeneratorConfig::xweb(facts, kind, pct, self.seed));
                }
            }
        }
        out
    }

    pub fn workload(&self) -> Result<Vec<WorkloadQuery>> {
        self.queries
            .iter()
            .map(|q| xweb_query(q).ok_or_else(|| Error::InvalidConfig(format!("unknown query {q:?}"))))
            .collect()
    }

    pub fn options(&self) -> BenchOptions {
        BenchOptions { repetitions: self.repetitions, qbs: QbsOptions { linear_scan: self.linear_scan } }
    }

    pub fn run(&self) -> Result<BenchReport> {
        run_benchmark(&self.configs(), &self.workload()?, &self.modes, self.options())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes_the_gate() {
        let file = BenchFile::parse("facts = [200]\npcts = [20]\nqueries = [\"2D\"]\nseed = 4\n").unwrap();
        let report = file.run().unwrap();
        let csv = report.to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        // qbs: 3 phases, with overhead: 2, without: 1; three repetitions each.
        assert_eq!(report.measurements.len(), (3 + 2 + 1) * 3);
        let id = &file.configs()[0].id();
        assert!(report.median(id, "2D", Mode::Qbs, Phase::Total).is_some());
    }

    #[test]
    fn too_few_repetitions() {
        let file = BenchFile::parse("facts = [10]\nrepetitions = 2\n").unwrap();
        assert!(matches!(file.run(), Err(Error::InvalidConfig(_))));
        assert!(BenchFile::parse("facts = [10]\ncolour = 1\n").is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
