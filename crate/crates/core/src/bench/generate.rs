//! Synthetic warehouses with a controlled share of defective dimension links.
//!
//! All randomness comes from a ChaCha8 stream seeded with the config seed and
//! consumed in a fixed order: first the injection sites (one per stratum),
//! then per fact the finest member of each dimension, the two measures and
//! the injection draws for that fact.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;

use crate::bench::config::{ComplexityKind, DimensionSpec, GeneratorConfig, QUANTITY, TOTAL_AMOUNT};
use crate::error::Result;
use crate::model::diagnostics::FACT_LINK;
use crate::model::tree::{MDDataTree, Node, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InjectionKind {
    Incomplete,
    NonStrict,
}

impl InjectionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InjectionKind::Incomplete => "incomplete",
            InjectionKind::NonStrict => "nonstrict",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InjectionRecord {
    /// Zero-based fact index.
    pub fact: usize,
    pub dimension: String,
    /// Removed level for incomplete links; for non-strict ones, the level of
    /// the member that gained a second parent (`(fact)` for the fact link).
    pub level: String,
    pub kind: InjectionKind,
    pub detail: String,
}

impl fmt::Display for InjectionRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {} {}", self.fact, self.dimension, self.level, self.kind.as_str(), self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InjectionLedger {
    pub records: Vec<InjectionRecord>,
}

impl InjectionLedger {
    pub fn count(&self, kind: InjectionKind) -> usize {
        self.records.iter().filter(|r| r.kind == kind).count()
    }
}

impl fmt::Display for InjectionLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Picks `floor(total * pct / 100)` distinct sites, one uniformly inside
/// each of that many equal strata of `0..total`.
pub fn stratified_sites(total: usize, pct: u32, rng: &mut impl Rng) -> Vec<usize> {
    let count = total * pct as usize / 100;
    (0..count)
        .map(|i| {
            let lo = i * total / count;
            let hi = (i + 1) * total / count;
            rng.gen_range(lo..hi)
        })
        .collect()
}

pub fn generate(config: &GeneratorConfig) -> Result<(MDDataTree, InjectionLedger)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dims = config.dimensions.len();

    // Injection plan per (fact, dimension) link.
    let mut plan: Vec<Option<InjectionKind>> = vec![None; config.facts * dims];
    if config.kind != ComplexityKind::None {
        for site in stratified_sites(config.facts * dims, config.pct, &mut rng) {
            plan[site] = Some(match config.kind {
                ComplexityKind::Incomplete => InjectionKind::Incomplete,
                ComplexityKind::NonStrict => InjectionKind::NonStrict,
                _ if rng.gen_bool(0.5) => InjectionKind::Incomplete,
                _ => InjectionKind::NonStrict,
            });
        }
    }

    let mut tree = MDDataTree::new_warehouse();
    let mut ledger = InjectionLedger::default();
    let root = tree.root();
    for fact_index in 0..config.facts {
        let fact = tree.add_child(root, Node::fact());
        let finest: Vec<u32> = config.dimensions.iter().map(|d| rng.gen_range(1..=d.levels[0].1)).collect();
        let quantity: u32 = rng.gen_range(1..=50);
        let cents: i64 = rng.gen_range(100..=100_000);
        for (d, spec) in config.dimensions.iter().enumerate() {
            let chain = chain_from(spec, 0, finest[d]);
            let injection = plan[fact_index * dims + d];
            let record = match injection {
                None => {
                    add_chain(&mut tree, fact, spec, 0, &chain, None);
                    None
                }
                Some(InjectionKind::Incomplete) => {
                    let skip = rng.gen_range(0..spec.levels.len() - 1);
                    add_chain(&mut tree, fact, spec, 0, &chain, Some(skip));
                    Some((spec.levels[skip].0.clone(), format!("removed {}={}", spec.levels[skip].0, chain[skip])))
                }
                Some(InjectionKind::NonStrict) => {
                    let link = rng.gen_range(0..spec.levels.len());
                    let card = spec.levels[link].1;
                    let r = rng.gen_range(1..card);
                    let extra = if r >= chain[link] { r + 1 } else { r };
                    let dim = add_chain(&mut tree, fact, spec, 0, &chain, None);
                    let mut at = dim;
                    for _ in 0..link {
                        at = tree.children(at)[0];
                    }
                    let second = chain_from(spec, link, extra);
                    let mut cur = at;
                    for (k, v) in second.iter().enumerate() {
                        cur = tree.add_child(cur, Node::level(spec.levels[link + k].0.clone(), v.to_string()));
                    }
                    let level = if link == 0 { FACT_LINK.to_string() } else { spec.levels[link - 1].0.clone() };
                    Some((level, format!("added {}={}", spec.levels[link].0, extra)))
                }
            };
            if let (Some(kind), Some((level, detail))) = (injection, record) {
                ledger.records.push(InjectionRecord {
                    fact: fact_index,
                    dimension: spec.name.clone(),
                    level,
                    kind,
                    detail,
                });
            }
        }
        tree.add_child(fact, Node::measure(QUANTITY, quantity.to_string()));
        tree.add_child(fact, Node::measure(TOTAL_AMOUNT, Decimal::new(cents, 2).to_string()));
    }
    Ok((tree, ledger))
}

/// Members from level `from` upwards, starting with `v`.
fn chain_from(spec: &DimensionSpec, from: usize, v: u32) -> Vec<u32> {
    let mut out = vec![v];
    for k in from..spec.levels.len() - 1 {
        let last = *out.last().expect("non-empty");
        out.push(spec.parent(k, last));
    }
    out
}

/// Adds a `dim` link holding `chain` (levels `from..`), leaving out level
/// `skip` if given. Returns the `dim` node.
fn add_chain(
    tree: &mut MDDataTree,
    fact: NodeId,
    spec: &DimensionSpec,
    from: usize,
    chain: &[u32],
    skip: Option<usize>,
) -> NodeId {
    let dim = tree.add_child(fact, Node::dimension(spec.name.clone()));
    let mut at = dim;
    for (k, v) in chain.iter().enumerate() {
        let level = from + k;
        if Some(level) == skip {
            continue;
        }
        at = tree.add_child(at, Node::level(spec.levels[level].0.clone(), v.to_string()));
    }
    dim
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::diagnostics::{validate_summarizability, FindingKind};
    use crate::model::xml::serialize_warehouse;

    #[test]
    fn strata_give_exact_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sites = stratified_sites(4000, 5, &mut rng);
        assert_eq!(sites.len(), 200);
        assert!(sites.windows(2).all(|w| w[0] < w[1]));
        assert!(stratified_sites(4000, 0, &mut rng).is_empty());
        assert_eq!(stratified_sites(7, 100, &mut rng), (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn clean_config_is_clean() {
        let (t, ledger) = generate(&GeneratorConfig::xweb(200, ComplexityKind::Complex, 0, 9)).unwrap();
        assert!(ledger.records.is_empty());
        let schema = GeneratorConfig::xweb(1, ComplexityKind::None, 0, 0).schema().unwrap();
        assert!(validate_summarizability(&t, &schema).is_empty());
        assert_eq!(t.fact_count(), 200);
    }

    #[test]
    fn ledger_matches_diagnostics() {
        for kind in [ComplexityKind::Incomplete, ComplexityKind::NonStrict, ComplexityKind::Complex] {
            let config = GeneratorConfig::xweb(300, kind, 20, 11);
            let (t, ledger) = generate(&config).unwrap();
            assert_eq!(ledger.records.len(), 300 * 4 * 20 / 100);
            let report = validate_summarizability(&t, &config.schema().unwrap());
            assert_eq!(report.count(FindingKind::Incomplete), ledger.count(InjectionKind::Incomplete));
            for r in &ledger.records {
                let kind = match r.kind {
                    InjectionKind::Incomplete => FindingKind::Incomplete,
                    InjectionKind::NonStrict => FindingKind::NonStrict,
                };
                assert!(report.flags(kind, r.fact, &r.dimension, &r.level), "{r}");
            }
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let config = GeneratorConfig::xweb(100, ComplexityKind::Complex, 20, 5);
        let (a, la) = generate(&config).unwrap();
        let (b, lb) = generate(&config).unwrap();
        assert_eq!(serialize_warehouse(&a), serialize_warehouse(&b));
        assert_eq!(la, lb);
    }
}
