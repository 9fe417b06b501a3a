//! Flattening of grouped results into comparable text rows.

use crate::error::Result;
use crate::model::schema::WarehouseSchema;
use crate::model::tree::{MDDataTree, NodeId, NodeKind};
use crate::pattern::query::TreePatternQuery;
use crate::qbs::key::LevelRef;

/// One row per result group, `dim.Level=value | ... | fn(measure)=value`,
/// sorted so that two results compare as multisets.
pub fn result_rows(tree: &MDDataTree, query: &TreePatternQuery, schema: &WarehouseSchema) -> Result<Vec<String>> {
    let levels = query
        .grouping
        .iter()
        .map(|ge| LevelRef::resolve(ge, schema))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(tree.fact_count());
    for fact in tree.facts() {
        let mut cells = Vec::with_capacity(levels.len() + query.aggregations.len());
        for (ge, &level) in query.grouping.iter().zip(&levels) {
            let hierarchy = &schema.dimensions[level.dimension];
            let value = tree
                .dimension_of(fact, &hierarchy.name)
                .and_then(|d| find_level(tree, d, schema, level))
                .unwrap_or("?");
            cells.push(format!("{}.{}={value}", ge.dimension, hierarchy.level(level.level).name));
        }
        for agg in &query.aggregations {
            let value = tree
                .children(fact)
                .iter()
                .map(|&c| tree.node(c))
                .find(|n| {
                    n.kind == NodeKind::Aggregate && n.label == agg.measure && n.attr("fn") == Some(agg.func.as_str())
                })
                .map_or("", |n| n.value.as_str());
            cells.push(format!("{agg}={value}"));
        }
        rows.push(cells.join(" | "));
    }
    rows.sort();
    Ok(rows)
}

fn find_level<'t>(tree: &'t MDDataTree, from: NodeId, schema: &WarehouseSchema, level: LevelRef) -> Option<&'t str> {
    let hierarchy = &schema.dimensions[level.dimension];
    for &c in tree.children(from) {
        let n = tree.node(c);
        if n.kind != NodeKind::Level {
            continue;
        }
        match hierarchy.position(&n.label) {
            Some(p) if p.index == level.level => return Some(&n.value),
            Some(p) if p.index < level.level => {
                if let Some(v) = find_level(tree, c, schema, level) {
                    return Some(v);
                }
            }
            _ => {}
        }
    }
    None
}
