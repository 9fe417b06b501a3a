use std::collections::HashMap;

use crate::model::schema::WarehouseSchema;
use crate::model::tree::{MDDataTree, Node, NodeId, NodeKind};
use crate::pattern::query::TreePatternQuery;
use crate::qbs::aggregate::AggState;
use crate::qbs::key::{build_group_key_with_sites, GroupList};

/// One output group: its key, the non-aggregated content taken from the
/// first contributing fact, and running aggregates.
#[derive(Debug, Clone)]
pub struct WitnessTree {
    pub groups: GroupList,
    /// A `fact` subtree without its aggregate nodes.
    pub tree: MDDataTree,
    pub aggregates: Vec<AggState>,
}

impl WitnessTree {
    /// Builds the group's tree from `fact`, the first fact that falls in it.
    pub fn create(
        groups: GroupList,
        source: &MDDataTree,
        fact: NodeId,
        query: &TreePatternQuery,
        schema: &WarehouseSchema,
    ) -> Self {
        let mut tree = MDDataTree::with_root(Node::fact());
        let root = tree.root();

        // Grouping elements of one dimension share a `dim` node and nest
        // finest to coarsest; hierarchy context hangs under the last one.
        let mut dims: Vec<usize> = Vec::new();
        for key in groups.keys() {
            if !dims.contains(&key.level.dimension) {
                dims.push(key.level.dimension);
            }
        }
        for &d in &dims {
            let hierarchy = &schema.dimensions[d];
            let mut keys: Vec<_> = groups.keys().iter().filter(|k| k.level.dimension == d).collect();
            keys.sort_by_key(|k| k.level.level);
            let mut at = tree.add_child(root, Node::dimension(hierarchy.name.clone()));
            for key in &keys {
                at = tree.add_child(at, Node::level(hierarchy.level(key.level.level).name.clone(), key.encoding()));
            }
            let last = keys.last().expect("dimension has a key").level;
            let (_, sites) = build_group_key_with_sites(source, fact, last, schema);
            let mut kept: Vec<NodeId> = Vec::new();
            for c in sites.context {
                if !kept.iter().any(|&k| source.subtree_eq(k, source, c)) {
                    kept.push(c);
                    tree.graft(at, source, c);
                }
            }
        }
        if query.pass_through {
            for &c in source.children(fact) {
                let n = source.node(c);
                let grouped = schema.dimension_index(&n.label).is_some_and(|i| dims.contains(&i));
                if n.kind == NodeKind::Dimension && !grouped {
                    tree.graft(root, source, c);
                }
            }
        }
        let aggregates = query.aggregations.iter().map(|a| AggState::new(a.func)).collect();
        WitnessTree { groups, tree, aggregates }
    }
}

/// Witness trees in creation order, with a hash index on their group lists.
/// The linear mode looks groups up by scanning, as a literal `exists` would.
#[derive(Debug, Clone)]
pub struct WitnessTreeList {
    trees: Vec<WitnessTree>,
    index: HashMap<GroupList, usize>,
    linear: bool,
}

impl WitnessTreeList {
    pub fn new(linear_scan: bool) -> Self {
        WitnessTreeList { trees: Vec::new(), index: HashMap::new(), linear: linear_scan }
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn find(&self, groups: &GroupList) -> Option<usize> {
        if self.linear {
            self.trees.iter().position(|t| t.groups == *groups)
        } else {
            self.index.get(groups).copied()
        }
    }

    pub fn push(&mut self, tree: WitnessTree) -> usize {
        let i = self.trees.len();
        if !self.linear {
            let previous = self.index.insert(tree.groups.clone(), i);
            debug_assert!(previous.is_none(), "group list inserted twice");
        }
        self.trees.push(tree);
        i
    }

    pub fn get(&self, i: usize) -> &WitnessTree {
        &self.trees[i]
    }

    pub fn get_mut(&mut self, i: usize) -> &mut WitnessTree {
        &mut self.trees[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &WitnessTree> {
        self.trees.iter()
    }
}

/// Gathers every witness tree under one `w` root, in creation order, with
/// its aggregates written out.
pub fn product(wts: &WitnessTreeList, query: &TreePatternQuery) -> MDDataTree {
    let mut out = MDDataTree::new_warehouse();
    let root = out.root();
    for wt in wts.iter() {
        let fact = out.graft(root, &wt.tree, wt.tree.root());
        for (agg, state) in query.aggregations.iter().zip(&wt.aggregates) {
            if state.value().is_some() {
                out.add_child(fact, state.to_node(&agg.measure));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qbs::key::{GroupKey, LevelRef};

    fn single(n: usize) -> WitnessTree {
        let key = GroupKey::new(LevelRef { dimension: 0, level: 0 }, [n.to_string()], false);
        WitnessTree {
            groups: GroupList(vec![key]),
            tree: MDDataTree::with_root(Node::fact()),
            aggregates: Vec::new(),
        }
    }

    #[test]
    fn empty_product_is_root_only() {
        let q = crate::sample::q1();
        assert_eq!(product(&WitnessTreeList::new(false), &q).len(), 1);
    }

    #[test]
    fn product_keeps_every_tree_in_order() {
        let q = crate::sample::q1();
        for linear in [false, true] {
            let mut list = WitnessTreeList::new(linear);
            for n in 0..25 {
                assert_eq!(list.push(single(n)), n);
            }
            assert_eq!(list.find(&single(7).groups), Some(7));
            assert_eq!(list.find(&single(99).groups), None);
            let out = product(&list, &q);
            assert_eq!(out.fact_count(), 25);
        }
    }
}
