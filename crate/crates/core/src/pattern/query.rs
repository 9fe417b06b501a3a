use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::schema::WarehouseSchema;
use crate::pattern::formula::Formula;

/// Counts facts rather than values of a named measure.
pub const ALL_FACTS: &str = "*";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggFn {
    Sum,
    Count,
    Min,
    Max,
    /// Carried as a (sum, count) pair and finalized only when presented.
    Avg,
}

impl AggFn {
    pub fn as_str(self) -> &'static str {
        match self {
            AggFn::Sum => "sum",
            AggFn::Count => "count",
            AggFn::Min => "min",
            AggFn::Max => "max",
            AggFn::Avg => "avg",
        }
    }
}

impl FromStr for AggFn {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "sum" => Ok(AggFn::Sum),
            "count" => Ok(AggFn::Count),
            "min" => Ok(AggFn::Min),
            "max" => Ok(AggFn::Max),
            "avg" => Ok(AggFn::Avg),
            _ => Err(()),
        }
    }
}

impl fmt::Display for AggFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupingElement {
    pub dimension: String,
    pub level: String,
}

impl GroupingElement {
    pub fn new(dimension: impl Into<String>, level: impl Into<String>) -> Self {
        GroupingElement { dimension: dimension.into(), level: level.into() }
    }
}

impl fmt::Display for GroupingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.dimension, self.level)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Aggregation {
    pub func: AggFn,
    /// Measure name, or [`ALL_FACTS`] for `count(*)`.
    pub measure: String,
}

impl Aggregation {
    pub fn new(func: AggFn, measure: impl Into<String>) -> Self {
        Aggregation { func, measure: measure.into() }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.func, self.measure)
    }
}

/// A grouping tree pattern: which facts to keep, what to group them by and
/// what to compute per group.
///
/// Multiplicities of the pattern are enforced by [`TreePatternQuery::validate`]:
/// one or more grouping elements, each matched exactly once per witness tree;
/// one or more aggregations; at most one predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct TreePatternQuery {
    pub grouping: Vec<GroupingElement>,
    pub aggregations: Vec<Aggregation>,
    pub predicate: Option<Formula>,
    /// Copy the first contributing fact's non-grouped dimensions into each
    /// witness tree.
    pub pass_through: bool,
}

impl TreePatternQuery {
    pub fn new(grouping: Vec<GroupingElement>, aggregations: Vec<Aggregation>) -> Self {
        TreePatternQuery { grouping, aggregations, predicate: None, pass_through: false }
    }

    pub fn with_predicate(mut self, predicate: Formula) -> Self {
        self.predicate = Some(predicate);
        self
    }

    pub fn validate(&self, schema: &WarehouseSchema) -> Result<()> {
        if self.grouping.is_empty() {
            return Err(Error::QuerySyntax { line: 0, message: "at least one grouping element is required".into() });
        }
        if self.aggregations.is_empty() {
            return Err(Error::QuerySyntax { line: 0, message: "at least one aggregation is required".into() });
        }
        let mut seen = HashSet::new();
        for ge in &self.grouping {
            let dim = schema
                .dimension(&ge.dimension)
                .ok_or_else(|| Error::UnknownDimension(ge.dimension.clone()))?;
            let pos = dim.position(&ge.level).ok_or_else(|| Error::UnknownLevel {
                dimension: ge.dimension.clone(),
                level: ge.level.clone(),
            })?;
            if !seen.insert((ge.dimension.as_str(), pos.index)) {
                return Err(Error::QuerySyntax {
                    line: 0,
                    message: format!("grouping element {ge} is repeated"),
                });
            }
        }
        let mut seen = HashSet::new();
        for agg in &self.aggregations {
            if agg.measure == ALL_FACTS {
                if agg.func != AggFn::Count {
                    return Err(Error::QuerySyntax {
                        line: 0,
                        message: format!("{agg} needs a measure"),
                    });
                }
            } else if !schema.has_measure(&agg.measure) {
                return Err(Error::UnknownMeasure(agg.measure.clone()));
            }
            if !seen.insert(agg) {
                return Err(Error::QuerySyntax { line: 0, message: format!("{agg} is repeated") });
            }
        }
        if let Some(p) = &self.predicate {
            p.bind(schema)?;
        }
        Ok(())
    }
}
