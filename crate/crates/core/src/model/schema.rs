//! Hierarchy metadata: per-dimension level order, parent map and domains.
//!
//! Schemas are read from a TOML document:
//!
//! ```toml
//! measures = ["cost"]
//!
//! [[dimension]]
//! name = "project"
//!
//! [[dimension.level]]
//! name = "Project"
//! values = ["A", "B", "C", "D"]
//!
//! [[dimension.level]]
//! name = "Team"
//! range = [1, 4]
//! attributes = ["manager"]
//! ```
//!
//! Levels are listed finest first; each level's parent is the next one.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Placeholder member for facts whose roll-up misses a level.
pub const OTHER: &str = "Other";
/// Suffix naming the level that holds fused members after normalization.
pub const FUSED_SUFFIX: &str = "_fused";
/// Separator between members in a fused value (`1-2`).
pub const FUSED_SEPARATOR: char = '-';

/// Real members carried by a level value: the parts of a fused value, or the
/// value itself, never the `Other` placeholder.
pub fn member_values(value: &str) -> impl Iterator<Item = &str> {
    value.split(FUSED_SEPARATOR).filter(|v| *v != OTHER)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Domain {
    Values(Vec<String>),
    Range { lo: i64, hi: i64 },
}

impl Domain {
    pub fn contains(&self, value: &str) -> bool {
        match self {
            Domain::Values(vs) => vs.iter().any(|v| v == value),
            Domain::Range { lo, hi } => value
                .parse::<i64>()
                .map(|x| *lo <= x && x <= *hi)
                .unwrap_or(false),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Domain::Values(vs) => vs.len(),
            Domain::Range { lo, hi } => (hi - lo + 1).max(0) as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Domain::Range { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSchema {
    pub name: String,
    pub member_attributes: Vec<String>,
    pub domain: Domain,
}

impl LevelSchema {
    /// Accepts domain members, the `Other` placeholder, and fused values whose
    /// parts are all acceptable.
    pub fn admits(&self, value: &str) -> bool {
        if value == OTHER || self.domain.contains(value) {
            return true;
        }
        value.contains(FUSED_SEPARATOR)
            && value
                .split(FUSED_SEPARATOR)
                .all(|part| part == OTHER || self.domain.contains(part))
    }
}

/// Resolved position of a level label inside its hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LevelPos {
    /// 0 is the finest level.
    pub index: usize,
    /// The label named the synthesized `<level>_fused` level.
    pub fused: bool,
}

#[derive(Debug, Clone)]
pub struct HierarchySchema {
    pub name: String,
    /// Finest first.
    pub levels: Vec<LevelSchema>,
    pub parent_of: BTreeMap<String, String>,
    index: HashMap<String, usize>,
}

impl PartialEq for HierarchySchema {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.levels == other.levels && self.parent_of == other.parent_of
    }
}

impl HierarchySchema {
    pub fn new(name: impl Into<String>, levels: Vec<LevelSchema>) -> Result<Self> {
        let name = name.into();
        if levels.is_empty() {
            return Err(Error::Schema(format!("dimension {name:?} has no levels")));
        }
        let mut index = HashMap::new();
        let mut parent_of = BTreeMap::new();
        for (i, level) in levels.iter().enumerate() {
            if level.name.is_empty() || level.name.ends_with(FUSED_SUFFIX) {
                return Err(Error::Schema(format!(
                    "level name {:?} in {name:?} is empty or reserved",
                    level.name
                )));
            }
            if index.insert(level.name.clone(), i).is_some() {
                return Err(Error::Schema(format!(
                    "duplicate level {:?} in {name:?}",
                    level.name
                )));
            }
            if level.domain.is_empty() {
                return Err(Error::Schema(format!("level {:?} has an empty domain", level.name)));
            }
            let separator_clash = match &level.domain {
                Domain::Values(vs) => vs.iter().any(|v| v.is_empty() || v.contains(FUSED_SEPARATOR)),
                Domain::Range { lo, .. } => *lo < 0,
            };
            if separator_clash {
                return Err(Error::Schema(format!(
                    "members of {:?} must be non-empty and free of {FUSED_SEPARATOR:?}",
                    level.name
                )));
            }
            if level.domain.contains(OTHER) {
                return Err(Error::Schema(format!(
                    "level {:?} uses the reserved member {OTHER:?}",
                    level.name
                )));
            }
            let mut seen = HashSet::new();
            for a in &level.member_attributes {
                if !seen.insert(a) || a == "name" || a == "v" {
                    return Err(Error::Schema(format!(
                        "bad member attribute {a:?} on level {:?}",
                        level.name
                    )));
                }
            }
            if let Some(parent) = levels.get(i + 1) {
                parent_of.insert(level.name.clone(), parent.name.clone());
            }
        }
        Ok(HierarchySchema { name, levels, parent_of, index })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Resolves a level label, accepting the `<level>_fused` form.
    pub fn position(&self, label: &str) -> Option<LevelPos> {
        if let Some(&index) = self.index.get(label) {
            return Some(LevelPos { index, fused: false });
        }
        let base = label.strip_suffix(FUSED_SUFFIX)?;
        self.index.get(base).map(|&index| LevelPos { index, fused: true })
    }

    pub fn level(&self, index: usize) -> &LevelSchema {
        &self.levels[index]
    }

    pub fn finest(&self) -> &LevelSchema {
        &self.levels[0]
    }

    pub fn coarsest(&self) -> &LevelSchema {
        self.levels.last().expect("non-empty by construction")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarehouseSchema {
    pub dimensions: Vec<HierarchySchema>,
    pub measures: Vec<String>,
}

impl WarehouseSchema {
    pub fn new(dimensions: Vec<HierarchySchema>, measures: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for d in &dimensions {
            if d.name.is_empty() || !seen.insert(d.name.as_str()) {
                return Err(Error::Schema(format!("duplicate or empty dimension {:?}", d.name)));
            }
        }
        let mut seen = HashSet::new();
        for m in &measures {
            if m.is_empty() || m == "*" || !seen.insert(m.as_str()) {
                return Err(Error::Schema(format!("duplicate or reserved measure {m:?}")));
            }
        }
        Ok(WarehouseSchema { dimensions, measures })
    }

    pub fn dimension(&self, name: &str) -> Option<&HierarchySchema> {
        self.dimensions.iter().find(|d| d.name == name)
    }

    pub fn dimension_index(&self, name: &str) -> Option<usize> {
        self.dimensions.iter().position(|d| d.name == name)
    }

    pub fn has_measure(&self, name: &str) -> bool {
        self.measures.iter().any(|m| m == name)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: SchemaFile = toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        let mut dims = Vec::with_capacity(file.dimension.len());
        for d in file.dimension {
            let mut levels = Vec::with_capacity(d.level.len());
            for (i, l) in d.level.iter().enumerate() {
                let domain = match (&l.values, l.range) {
                    (Some(vs), None) => Domain::Values(vs.clone()),
                    (None, Some([lo, hi])) if lo <= hi => Domain::Range { lo, hi },
                    _ => {
                        return Err(Error::Schema(format!(
                            "level {:?} needs exactly one of `values` or a non-empty `range`",
                            l.name
                        )))
                    }
                };
                if let Some(parent) = &l.parent {
                    let next = d.level.get(i + 1).map(|n| n.name.as_str());
                    if next != Some(parent.as_str()) {
                        return Err(Error::Schema(format!(
                            "parent of {:?} must be the next coarser level, got {parent:?}",
                            l.name
                        )));
                    }
                }
                levels.push(LevelSchema {
                    name: l.name.clone(),
                    member_attributes: l.attributes.clone(),
                    domain,
                });
            }
            dims.push(HierarchySchema::new(d.name, levels)?);
        }
        WarehouseSchema::new(dims, file.measures)
    }

    pub fn to_toml(&self) -> String {
        let file = SchemaFile {
            measures: self.measures.clone(),
            dimension: self
                .dimensions
                .iter()
                .map(|d| DimensionEntry {
                    name: d.name.clone(),
                    level: d
                        .levels
                        .iter()
                        .map(|l| {
                            let (values, range) = match &l.domain {
                                Domain::Values(vs) => (Some(vs.clone()), None),
                                Domain::Range { lo, hi } => (None, Some([*lo, *hi])),
                            };
                            LevelEntry {
                                name: l.name.clone(),
                                parent: d.parent_of.get(&l.name).cloned(),
                                values,
                                range,
                                attributes: l.member_attributes.clone(),
                            }
                        })
                        .collect(),
                })
                .collect(),
        };
        toml::to_string(&file).expect("schema serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaFile {
    #[serde(default)]
    measures: Vec<String>,
    #[serde(default)]
    dimension: Vec<DimensionEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DimensionEntry {
    name: String,
    level: Vec<LevelEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelEntry {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    range: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    attributes: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const PM: &str = r#"
measures = ["cost"]

[[dimension]]
name = "project"

[[dimension.level]]
name = "Project"
values = ["A", "B"]

[[dimension.level]]
name = "Team"
parent = "Branch"
range = [1, 4]

[[dimension.level]]
name = "Branch"
values = ["I", "II"]
"#;

    #[test]
    fn parses_levels_and_parent_map() {
        let s = WarehouseSchema::parse(PM).unwrap();
        let d = s.dimension("project").unwrap();
        assert_eq!(d.depth(), 3);
        assert_eq!(d.parent_of["Project"], "Team");
        assert_eq!(d.parent_of["Team"], "Branch");
        assert!(!d.parent_of.contains_key("Branch"));
        assert_eq!(d.position("Team_fused"), Some(LevelPos { index: 1, fused: true }));
        assert!(d.level(1).admits("3"));
        assert!(!d.level(1).admits("5"));
        assert!(d.level(1).admits("1-2-Other"));
        assert!(!d.level(1).admits("1-9"));
    }

    #[test]
    fn toml_round_trip() {
        let s = WarehouseSchema::parse(PM).unwrap();
        let again = WarehouseSchema::parse(&s.to_toml()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn rejects_wrong_parent_and_reserved_member() {
        let bad = PM.replace("parent = \"Branch\"", "parent = \"Project\"");
        assert!(matches!(WarehouseSchema::parse(&bad), Err(Error::Schema(_))));
        let bad = PM.replace("[\"I\", \"II\"]", "[\"I\", \"Other\"]");
        assert!(matches!(WarehouseSchema::parse(&bad), Err(Error::Schema(_))));
        let bad = PM.replace("range = [1, 4]", "");
        assert!(matches!(WarehouseSchema::parse(&bad), Err(Error::Schema(_))));
    }
}
