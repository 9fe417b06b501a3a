//! Running aggregation state. Every function is kept in a re-aggregable form
//! so witness trees can feed a further grouping stage.

use rust_decimal::Decimal;

use crate::error::{Error, Result};
use crate::model::number::{format_number, parse_number};
use crate::model::tree::{MDDataTree, Node, NodeId, NodeKind};
use crate::pattern::query::{AggFn, Aggregation, ALL_FACTS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AggState {
    Sum(Decimal),
    Count(Decimal),
    Min(Option<Decimal>),
    Max(Option<Decimal>),
    Avg { sum: Decimal, count: Decimal },
}

impl AggState {
    pub fn new(func: AggFn) -> Self {
        match func {
            AggFn::Sum => AggState::Sum(Decimal::ZERO),
            AggFn::Count => AggState::Count(Decimal::ZERO),
            AggFn::Min => AggState::Min(None),
            AggFn::Max => AggState::Max(None),
            AggFn::Avg => AggState::Avg { sum: Decimal::ZERO, count: Decimal::ZERO },
        }
    }

    pub fn func(&self) -> AggFn {
        match self {
            AggState::Sum(_) => AggFn::Sum,
            AggState::Count(_) => AggFn::Count,
            AggState::Min(_) => AggFn::Min,
            AggState::Max(_) => AggFn::Max,
            AggState::Avg { .. } => AggFn::Avg,
        }
    }

    /// Folds one raw value.
    pub fn add(&mut self, x: Decimal) {
        match self {
            AggState::Sum(s) => *s += x,
            AggState::Count(c) => *c += Decimal::ONE,
            AggState::Min(m) => *m = Some(m.map_or(x, |m| m.min(x))),
            AggState::Max(m) => *m = Some(m.map_or(x, |m| m.max(x))),
            AggState::Avg { sum, count } => {
                *sum += x;
                *count += Decimal::ONE;
            }
        }
    }

    /// Folds a partial aggregate of the same function.
    fn merge_partial(&mut self, node: &Node) -> Result<()> {
        let bad = || Error::NonReaggregable(describe(node));
        match self {
            AggState::Avg { sum, count } => {
                let s = node.attr("sum").and_then(parse_number).ok_or_else(bad)?;
                let c = node.attr("count").and_then(parse_number).ok_or_else(bad)?;
                *sum += s;
                *count += c;
            }
            AggState::Sum(s) | AggState::Count(s) => *s += parse_number(&node.value).ok_or_else(bad)?,
            AggState::Min(_) | AggState::Max(_) => {
                if !node.value.is_empty() {
                    let x = parse_number(&node.value).ok_or_else(bad)?;
                    self.add(x);
                }
            }
        }
        Ok(())
    }

    /// Folds everything `fact` contributes to `agg`: a partial aggregate
    /// node when the fact is itself a group from an earlier stage, otherwise
    /// its raw measure values. Facts lacking the measure contribute nothing.
    pub fn fold_fact(&mut self, agg: &Aggregation, tree: &MDDataTree, fact: NodeId) -> Result<()> {
        let mut partial = false;
        for &c in tree.children(fact) {
            let n = tree.node(c);
            if n.kind != NodeKind::Aggregate {
                continue;
            }
            partial = true;
            if n.label == agg.measure && n.attr("fn") == Some(agg.func.as_str()) {
                return self.merge_partial(n);
            }
        }
        if partial {
            return Err(Error::NonReaggregable(format!(
                "{agg}: the input group carries no {agg} partial"
            )));
        }
        if agg.measure == ALL_FACTS {
            self.add(Decimal::ONE);
            return Ok(());
        }
        for n in tree.measures_of(fact, &agg.measure) {
            if let Some(x) = parse_number(&n.value) {
                self.add(x);
            }
        }
        Ok(())
    }

    /// The presented value, or `None` when no input reached a min, max or avg.
    pub fn value(&self) -> Option<Decimal> {
        match *self {
            AggState::Sum(s) | AggState::Count(s) => Some(s),
            AggState::Min(m) | AggState::Max(m) => m,
            AggState::Avg { sum, count } => (!count.is_zero()).then(|| sum / count),
        }
    }

    /// Aggregate node for a witness tree. Averages also carry their exact
    /// sum and count.
    pub fn to_node(&self, measure: &str) -> Node {
        let v = self.value().map(format_number).unwrap_or_default();
        let node = Node::aggregate(measure, v).with_attr("fn", self.func().as_str());
        match self {
            AggState::Avg { sum, count } => node
                .with_attr("sum", sum.normalize().to_string())
                .with_attr("count", count.normalize().to_string()),
            _ => node,
        }
    }
}

fn describe(node: &Node) -> String {
    format!("{}({}) = {:?}", node.attr("fn").unwrap_or("?"), node.label, node.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Decimal {
        parse_number(s).unwrap()
    }

    #[test]
    fn folds() {
        let mut s = AggState::new(AggFn::Sum);
        let mut mn = AggState::new(AggFn::Min);
        let mut avg = AggState::new(AggFn::Avg);
        for x in ["3", "1.5", "2"] {
            s.add(d(x));
            mn.add(d(x));
            avg.add(d(x));
        }
        assert_eq!(s.to_node("m").value, "6.5");
        assert_eq!(mn.to_node("m").value, "1.5");
        let n = avg.to_node("m");
        assert_eq!(n.value, "2.16666666667");
        assert_eq!(n.attr("sum"), Some("6.5"));
        assert_eq!(n.attr("count"), Some("3"));
        assert_eq!(AggState::new(AggFn::Max).to_node("m").value, "");
    }

    #[test]
    fn avg_without_state_is_rejected() {
        let mut avg = AggState::new(AggFn::Avg);
        let finalized = Node::aggregate("m", "2").with_attr("fn", "avg");
        assert!(matches!(avg.merge_partial(&finalized), Err(Error::NonReaggregable(_))));
    }
}
