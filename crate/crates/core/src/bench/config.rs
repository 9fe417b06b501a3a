use std::fmt;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::schema::{Domain, HierarchySchema, LevelSchema, WarehouseSchema};

pub const QUANTITY: &str = "f_quantity";
pub const TOTAL_AMOUNT: &str = "f_totalamount";

/// Which hierarchy defects the generator injects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexityKind {
    None,
    Incomplete,
    NonStrict,
    /// Each selected node is made incomplete or non-strict by a fair coin.
    Complex,
}

impl ComplexityKind {
    pub const ALL: [ComplexityKind; 4] =
        [ComplexityKind::None, ComplexityKind::Incomplete, ComplexityKind::NonStrict, ComplexityKind::Complex];

    pub fn as_str(self) -> &'static str {
        match self {
            ComplexityKind::None => "none",
            ComplexityKind::Incomplete => "incomplete",
            ComplexityKind::NonStrict => "nonstrict",
            ComplexityKind::Complex => "complex",
        }
    }
}

impl FromStr for ComplexityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ComplexityKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown complexity kind {s:?}")))
    }
}

impl fmt::Display for ComplexityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A generated dimension: levels finest first, each with members `1..=card`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionSpec {
    pub name: String,
    pub levels: Vec<(String, u32)>,
}

impl DimensionSpec {
    pub fn new(name: &str, levels: &[(&str, u32)]) -> Self {
        DimensionSpec {
            name: name.to_string(),
            levels: levels.iter().map(|(l, c)| (l.to_string(), *c)).collect(),
        }
    }

    /// Member of level `k + 1` above member `v` of level `k`.
    pub fn parent(&self, k: usize, v: u32) -> u32 {
        let (here, up) = (self.levels[k].1 as u64, self.levels[k + 1].1 as u64);
        ((v as u64 - 1) * up / here + 1) as u32
    }
}

/// Part, customer, supplier and date dimensions of a sales warehouse.
pub fn xweb_dimensions() -> Vec<DimensionSpec> {
    vec![
        DimensionSpec::new("part", &[("type3", 150), ("type2", 25), ("type1", 5)]),
        DimensionSpec::new("customer", &[("nation", 25), ("region", 5)]),
        DimensionSpec::new("supplier", &[("nation", 25), ("region", 5)]),
        DimensionSpec::new("date", &[("day", 2520), ("month", 84), ("year", 7)]),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub facts: usize,
    pub dimensions: Vec<DimensionSpec>,
    pub kind: ComplexityKind,
    /// Percent of all dimension links (facts × dimensions) made complex.
    pub pct: u32,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn xweb(facts: usize, kind: ComplexityKind, pct: u32, seed: u64) -> Self {
        GeneratorConfig { facts, dimensions: xweb_dimensions(), kind, pct, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.facts == 0 {
            return bad("fact count must be positive".into());
        }
        if self.pct > 100 {
            return bad(format!("complexity percentage {} exceeds 100", self.pct));
        }
        if self.dimensions.is_empty() {
            return bad("at least one dimension is required".into());
        }
        for d in &self.dimensions {
            if d.levels.is_empty() {
                return bad(format!("dimension {:?} has no levels", d.name));
            }
            if d.levels.iter().any(|(_, c)| *c == 0) {
                return bad(format!("dimension {:?} has an empty level", d.name));
            }
            let injects = self.pct > 0 && self.kind != ComplexityKind::None;
            if injects && matches!(self.kind, ComplexityKind::Incomplete | ComplexityKind::Complex) && d.levels.len() < 2 {
                return bad(format!("dimension {:?} has no level that can be removed", d.name));
            }
            if injects
                && matches!(self.kind, ComplexityKind::NonStrict | ComplexityKind::Complex)
                && d.levels.iter().any(|(_, c)| *c < 2)
            {
                return bad(format!("dimension {:?} has a level with a single member", d.name));
            }
        }
        self.schema().map(|_| ())
    }

    pub fn schema(&self) -> Result<WarehouseSchema> {
        let dims = self
            .dimensions
            .iter()
            .map(|d| {
                let levels = d
                    .levels
                    .iter()
                    .map(|(name, card)| LevelSchema {
                        name: name.clone(),
                        member_attributes: Vec::new(),
                        domain: Domain::Range { lo: 1, hi: *card as i64 },
                    })
                    .collect();
                HierarchySchema::new(d.name.clone(), levels)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        WarehouseSchema::new(dims, vec![QUANTITY.to_string(), TOTAL_AMOUNT.to_string()])
            .map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Short identifier used in reports.
    pub fn id(&self) -> String {
        format!("{}-{}-{}-s{}", self.facts, self.kind, self.pct, self.seed)
    }
}
