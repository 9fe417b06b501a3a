use crate::bench::config::{DimensionSpec, TOTAL_AMOUNT};
use crate::pattern::query::{AggFn, Aggregation, GroupingElement, TreePatternQuery, ALL_FACTS};

/// A named benchmark query.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadQuery {
    pub name: String,
    pub query: TreePatternQuery,
}

/// Grouping elements of the n-dimension sales queries, in nesting order.
pub const XWEB_GROUPING: [(&str, &str); 4] =
    [("date", "day"), ("part", "type3"), ("customer", "nation"), ("supplier", "nation")];

/// `1D` to `4D`: total amount grouped by the first n of [`XWEB_GROUPING`].
pub fn xweb_workload() -> Vec<WorkloadQuery> {
    (1..=XWEB_GROUPING.len())
        .map(|n| WorkloadQuery {
            name: format!("{n}D"),
            query: TreePatternQuery::new(
                XWEB_GROUPING[..n].iter().map(|(d, l)| GroupingElement::new(*d, *l)).collect(),
                vec![Aggregation::new(AggFn::Sum, TOTAL_AMOUNT)],
            ),
        })
        .collect()
}

pub fn xweb_query(name: &str) -> Option<WorkloadQuery> {
    xweb_workload().into_iter().find(|q| q.name == name)
}

/// The same nesting over arbitrary dimensions, at every level depth: `nD@k`
/// groups the first n dimensions at their level k (or their coarsest level
/// when shallower), computing a sum and a fact count.
pub fn shaped_workload(dimensions: &[DimensionSpec]) -> Vec<WorkloadQuery> {
    let depth = dimensions.iter().map(|d| d.levels.len()).max().unwrap_or(0);
    let mut out = Vec::new();
    for k in 0..depth {
        for n in 1..=dimensions.len() {
            let grouping = dimensions[..n]
                .iter()
                .map(|d| GroupingElement::new(d.name.clone(), d.levels[k.min(d.levels.len() - 1)].0.clone()))
                .collect();
            out.push(WorkloadQuery {
                name: format!("{n}D@{k}"),
                query: TreePatternQuery::new(
                    grouping,
                    vec![Aggregation::new(AggFn::Sum, TOTAL_AMOUNT), Aggregation::new(AggFn::Count, ALL_FACTS)],
                ),
            });
        }
    }
    out
}
