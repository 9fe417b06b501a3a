//! Arena-backed multidimensional data tree.
//!
//! A warehouse is a rooted, ordered tree: the root `w` holds facts, each fact
//! holds dimension links and measures, and a dimension link holds hierarchy
//! level nodes nested along the roll-up direction (a level node's children are
//! its parents in the hierarchy). Non-strict membership shows up as several
//! level children under one node; incompleteness shows up as a child that sits
//! at a coarser level than the next one in the schema.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Warehouse,
    Fact,
    Dimension,
    Level,
    Measure,
    /// Aggregation result inside a witness tree.
    Aggregate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    /// Dimension name, level name or measure name. Empty for `w` and `fact`.
    pub label: String,
    /// Level member identifier, measure value or presented aggregate.
    pub value: String,
    /// Extra attributes, kept sorted by key. Member attributes on levels,
    /// `fn`/`sum`/`count` on aggregates.
    pub attrs: Vec<(String, String)>,
    children: Vec<NodeId>,
}

impl Node {
    fn bare(kind: NodeKind, label: impl Into<String>, value: impl Into<String>) -> Self {
        Node {
            kind,
            label: label.into(),
            value: value.into(),
            attrs: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn warehouse() -> Self {
        Self::bare(NodeKind::Warehouse, "", "")
    }

    pub fn fact() -> Self {
        Self::bare(NodeKind::Fact, "", "")
    }

    pub fn dimension(name: impl Into<String>) -> Self {
        Self::bare(NodeKind::Dimension, name, "")
    }

    pub fn level(name: impl Into<String>, value: impl Into<String>) -> Self {
        Self::bare(NodeKind::Level, name, value)
    }

    pub fn measure(name: impl Into<String>, value: impl Into<String>) -> Self {
        Self::bare(NodeKind::Measure, name, value)
    }

    pub fn aggregate(measure: impl Into<String>, value: impl Into<String>) -> Self {
        Self::bare(NodeKind::Aggregate, measure, value)
    }

    pub fn with_attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.set_attr(key, value);
        self
    }

    pub fn set_attr(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let key = key.into();
        let value = value.into();
        match self.attrs.binary_search_by(|(k, _)| k.as_str().cmp(&key)) {
            Ok(i) => self.attrs[i].1 = value,
            Err(i) => self.attrs.insert(i, (key, value)),
        }
    }

    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attrs
            .binary_search_by(|(k, _)| k.as_str().cmp(key))
            .ok()
            .map(|i| self.attrs[i].1.as_str())
    }

    /// `(label, value)` pair identifying a hierarchy member.
    pub fn identity(&self) -> (&str, &str) {
        (&self.label, &self.value)
    }

    fn same_payload(&self, other: &Node) -> bool {
        self.kind == other.kind
            && self.label == other.label
            && self.value == other.value
            && self.attrs == other.attrs
    }
}

/// Labeled, ordered, rooted tree. Immutable once built by the parser or a
/// transform; cheap to share between readers.
#[derive(Debug, Clone)]
pub struct MDDataTree {
    nodes: Vec<Node>,
}

impl MDDataTree {
    pub fn with_root(mut root: Node) -> Self {
        root.children.clear();
        MDDataTree { nodes: vec![root] }
    }

    /// An empty warehouse: a lone `w` root.
    pub fn new_warehouse() -> Self {
        Self::with_root(Node::warehouse())
    }

    pub fn root(&self) -> NodeId {
        NodeId::ROOT
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id.index()]
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.index()].children
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 1
    }

    pub fn add_child(&mut self, parent: NodeId, mut node: Node) -> NodeId {
        node.children.clear();
        let id = NodeId(u32::try_from(self.nodes.len()).expect("tree exceeds u32 nodes"));
        self.nodes.push(node);
        self.nodes[parent.index()].children.push(id);
        id
    }

    /// Deep-copies `src_node` (from `src`) under `parent`.
    pub fn graft(&mut self, parent: NodeId, src: &MDDataTree, src_node: NodeId) -> NodeId {
        let mut payload = src.node(src_node).clone();
        payload.children = Vec::new();
        let id = self.add_child(parent, payload);
        for &c in src.children(src_node) {
            self.graft(id, src, c);
        }
        id
    }

    /// Copies every child of `src_node` under `parent`.
    pub fn graft_children(&mut self, parent: NodeId, src: &MDDataTree, src_node: NodeId) {
        for &c in src.children(src_node) {
            self.graft(parent, src, c);
        }
    }

    /// Extracts the subtree rooted at `id` as a standalone tree.
    pub fn subtree(&self, id: NodeId) -> MDDataTree {
        let mut out = MDDataTree::with_root(self.node(id).clone());
        let root = out.root();
        out.graft_children(root, self, id);
        out
    }

    pub fn facts(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.children(self.root())
            .iter()
            .copied()
            .filter(|&c| self.node(c).kind == NodeKind::Fact)
    }

    pub fn fact_count(&self) -> usize {
        self.facts().count()
    }

    /// The dimension-link child of `fact` named `dimension`, if any.
    pub fn dimension_of(&self, fact: NodeId, dimension: &str) -> Option<NodeId> {
        self.children(fact).iter().copied().find(|&c| {
            let n = self.node(c);
            n.kind == NodeKind::Dimension && n.label == dimension
        })
    }

    pub fn measures_of<'a>(
        &'a self,
        fact: NodeId,
        measure: &'a str,
    ) -> impl Iterator<Item = &'a Node> + 'a {
        self.children(fact)
            .iter()
            .map(move |&c| self.node(c))
            .filter(move |n| n.kind == NodeKind::Measure && n.label == measure)
    }

    /// Structural equality of two subtrees, possibly in different trees.
    pub fn subtree_eq(&self, a: NodeId, other: &MDDataTree, b: NodeId) -> bool {
        let (na, nb) = (self.node(a), other.node(b));
        if !na.same_payload(nb) || na.children.len() != nb.children.len() {
            return false;
        }
        na.children
            .iter()
            .zip(&nb.children)
            .all(|(&x, &y)| self.subtree_eq(x, other, y))
    }

    /// Pre-order walk of the subtree under `id`, including `id`.
    pub fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.children(n).iter().rev());
        }
        out
    }
}

impl PartialEq for MDDataTree {
    fn eq(&self, other: &Self) -> bool {
        self.subtree_eq(self.root(), other, other.root())
    }
}

impl Eq for MDDataTree {}

impl fmt::Display for MDDataTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::model::xml::serialize_to_string(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> MDDataTree {
        let mut t = MDDataTree::new_warehouse();
        let f = t.add_child(t.root(), Node::fact());
        let d = t.add_child(f, Node::dimension("customer"));
        t.add_child(d, Node::level("Customer", "a"));
        t.add_child(f, Node::measure("cost", "10"));
        t
    }

    #[test]
    fn structural_equality_ignores_arena_layout() {
        let a = small();
        // Same logical tree built in a different insertion order.
        let mut b = MDDataTree::new_warehouse();
        let f = b.add_child(b.root(), Node::fact());
        let d = b.add_child(f, Node::dimension("customer"));
        b.add_child(f, Node::measure("cost", "10"));
        b.add_child(d, Node::level("Customer", "a"));
        assert_eq!(a, b);

        b.node_mut(NodeId(4)).value = "b".into();
        assert_ne!(a, b);
    }

    #[test]
    fn subtree_and_graft_copy_deeply() {
        let t = small();
        let fact = t.facts().next().unwrap();
        let sub = t.subtree(fact);
        assert_eq!(sub.len(), 4);
        let mut w = MDDataTree::new_warehouse();
        w.graft(w.root(), &sub, sub.root());
        assert_eq!(w, t);
    }

    #[test]
    fn attrs_stay_sorted() {
        let n = Node::level("Team", "1").with_attr("z", "1").with_attr("a", "2");
        assert_eq!(n.attrs[0].0, "a");
        assert_eq!(n.attr("z"), Some("1"));
        assert_eq!(n.attr("q"), None);
    }
}
