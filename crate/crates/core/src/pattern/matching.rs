use crate::error::Result;
use crate::model::schema::WarehouseSchema;
use crate::model::tree::{MDDataTree, NodeId};
use crate::pattern::formula::Formula;

/// Selection without grouping: returns a warehouse holding every fact that
/// satisfies `predicate`, with its whole subtree, in document order.
pub fn match_pattern(tree: &MDDataTree, predicate: &Formula, schema: &WarehouseSchema) -> Result<MDDataTree> {
    let bound = predicate.bind(schema)?;
    let mut out = MDDataTree::new_warehouse();
    let root = out.root();
    for fact in tree.facts() {
        if bound.eval(tree, fact) {
            out.graft(root, tree, fact);
        }
    }
    Ok(out)
}

/// Facts of `tree` that satisfy `predicate` (all facts when `None`).
pub(crate) fn selected_facts(
    tree: &MDDataTree,
    predicate: Option<&Formula>,
    schema: &WarehouseSchema,
) -> Result<Vec<NodeId>> {
    Ok(match predicate {
        None => tree.facts().collect(),
        Some(p) => {
            let bound = p.bind(schema)?;
            tree.facts().filter(|&f| bound.eval(tree, f)).collect()
        }
    })
}
