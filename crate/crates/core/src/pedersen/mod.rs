//! Ahead-of-time normalization and a plain group-by over the result.
//!
//! [`make_covering`] fills every skipped or missing level with an `Other`
//! placeholder, [`make_onto`] does so only below a dimension's first member,
//! and [`make_strict`] replaces several members at one level by a single
//! `<level>_fused` member whose value lists them all. After [`normalize`]
//! each fact reaches exactly one node per level and dimension, which is what
//! [`plain_group_by`] expects.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::schema::{HierarchySchema, WarehouseSchema, FUSED_SEPARATOR, FUSED_SUFFIX, OTHER};
use crate::model::tree::{MDDataTree, Node, NodeId, NodeKind};
use crate::pattern::matching::selected_facts;
use crate::pattern::query::TreePatternQuery;
use crate::qbs::aggregate::AggState;

/// Naming used for inserted nodes. Only the `Other` / `_fused` convention is
/// supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizationPlan {
    placeholder: &'static str,
    fused_suffix: &'static str,
}

impl Default for NormalizationPlan {
    fn default() -> Self {
        NormalizationPlan { placeholder: OTHER, fused_suffix: FUSED_SUFFIX }
    }
}

impl NormalizationPlan {
    pub fn placeholder(&self) -> &str {
        self.placeholder
    }

    pub fn fused_label(&self, level: &str) -> String {
        format!("{level}{}", self.fused_suffix)
    }

    /// Placeholders must not collide with real members.
    pub fn check(&self, schema: &WarehouseSchema) -> Result<()> {
        for d in &schema.dimensions {
            for l in &d.levels {
                if l.domain.contains(self.placeholder) {
                    return Err(Error::Schema(format!("level {:?} has a member named {:?}", l.name, self.placeholder)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionKind {
    Placeholder,
    Fusion,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub kind: ActionKind,
    /// Zero-based fact index.
    pub fact: usize,
    pub dimension: String,
    pub level: String,
    pub value: String,
    /// Source node the inserted node sits next to.
    pub path: String,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ActionKind::Placeholder => write!(f, "PLACEHOLDER {} {} {}", self.dimension, self.level, self.path),
            ActionKind::Fusion => {
                write!(f, "FUSE {} {} {} {}", self.dimension, self.level, self.value, self.path)
            }
        }
    }
}

/// Every node a normalization step inserted, one action per node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NormalizationLedger {
    pub actions: Vec<Action>,
}

impl NormalizationLedger {
    pub fn count(&self, kind: ActionKind) -> usize {
        self.actions.iter().filter(|a| a.kind == kind).count()
    }

    pub fn extend(&mut self, other: NormalizationLedger) {
        self.actions.extend(other.actions);
    }
}

impl fmt::Display for NormalizationLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.actions {
            writeln!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Tracks the current fact and source path while copying a warehouse.
struct Copier<'a> {
    src: &'a MDDataTree,
    out: MDDataTree,
    plan: NormalizationPlan,
    ledger: NormalizationLedger,
    fact: usize,
    trail: Vec<String>,
}

impl<'a> Copier<'a> {
    fn new(src: &'a MDDataTree, plan: NormalizationPlan) -> Self {
        Copier { src, out: MDDataTree::new_warehouse(), plan, ledger: NormalizationLedger::default(), fact: 0, trail: Vec::new() }
    }

    fn path(&self) -> String {
        let mut p = format!("/w/fact[{}]", self.fact + 1);
        for s in &self.trail {
            p.push('/');
            p.push_str(s);
        }
        p
    }

    fn record(&mut self, kind: ActionKind, h: &HierarchySchema, level: String, value: String) {
        let path = self.path();
        self.ledger.actions.push(Action { kind, fact: self.fact, dimension: h.name.clone(), level, value, path });
    }

    fn placeholder(&mut self, parent: NodeId, h: &HierarchySchema, level: usize) -> NodeId {
        let name = h.level(level).name.clone();
        self.record(ActionKind::Placeholder, h, name.clone(), self.plan.placeholder.to_string());
        self.out.add_child(parent, Node::level(name, self.plan.placeholder))
    }

    fn payload(&self, id: NodeId) -> Node {
        self.src.node(id).clone()
    }

    /// Copies each fact, handing its dimension links to `dim`. With
    /// `fill_missing`, absent dimensions get a full placeholder chain.
    fn facts(
        mut self,
        schema: &WarehouseSchema,
        mut dim: impl FnMut(&mut Self, NodeId, NodeId, &HierarchySchema),
        fill_missing: bool,
    ) -> (MDDataTree, NormalizationLedger) {
        let src = self.src;
        let root = self.out.root();
        for (i, fact) in src.facts().enumerate() {
            self.fact = i;
            let out_fact = self.out.add_child(root, Node::fact());
            for &c in src.children(fact) {
                let n = src.node(c);
                let hierarchy = (n.kind == NodeKind::Dimension).then(|| schema.dimension(&n.label)).flatten();
                match hierarchy {
                    Some(h) => {
                        let out_dim = self.out.add_child(out_fact, self.payload(c));
                        self.trail.push(format!("dim[{}]", h.name));
                        dim(&mut self, c, out_dim, h);
                        self.trail.pop();
                    }
                    None => {
                        self.out.graft(out_fact, src, c);
                    }
                }
            }
            if fill_missing {
                for h in &schema.dimensions {
                    if src.dimension_of(fact, &h.name).is_none() {
                        let mut at = self.out.add_child(out_fact, Node::dimension(h.name.clone()));
                        self.trail.push(format!("dim[{}]", h.name));
                        for l in 0..h.depth() {
                            at = self.placeholder(at, h, l);
                        }
                        self.trail.pop();
                    }
                }
            }
        }
        (self.out, self.ledger)
    }

    fn cover(&mut self, src_node: NodeId, out_node: NodeId, pos: Option<usize>, h: &HierarchySchema) {
        let src = self.src;
        let next = pos.map_or(0, |p| p + 1);
        let mut any = false;
        for &c in src.children(src_node) {
            let n = src.node(c);
            let Some(q) = (n.kind == NodeKind::Level).then(|| h.position(&n.label)).flatten() else {
                self.out.graft(out_node, src, c);
                continue;
            };
            any = true;
            self.trail.push(format!("{}[{}]", n.label, n.value));
            let mut at = out_node;
            for l in next..q.index {
                at = self.placeholder(at, h, l);
            }
            let copy = self.out.add_child(at, self.payload(c));
            self.cover(c, copy, Some(q.index), h);
            self.trail.pop();
        }
        if !any {
            let mut at = out_node;
            for l in next..h.depth() {
                at = self.placeholder(at, h, l);
            }
        }
    }

    fn onto(&mut self, dim: NodeId, out_dim: NodeId, h: &HierarchySchema) {
        let src = self.src;
        let mut any = false;
        for &c in src.children(dim) {
            let n = src.node(c);
            let Some(q) = (n.kind == NodeKind::Level).then(|| h.position(&n.label)).flatten() else {
                self.out.graft(out_dim, src, c);
                continue;
            };
            any = true;
            self.trail.push(format!("{}[{}]", n.label, n.value));
            let mut at = out_dim;
            for l in 0..q.index {
                at = self.placeholder(at, h, l);
            }
            self.out.graft(at, src, c);
            self.trail.pop();
        }
        if !any {
            let mut at = out_dim;
            for l in 0..h.depth() {
                at = self.placeholder(at, h, l);
            }
        }
    }

    /// Copies the union of `nodes` (siblings gathered from one or more
    /// parents) under `out_parent`, one node per level position.
    fn strictify(&mut self, nodes: Vec<NodeId>, out_parent: NodeId, h: &HierarchySchema) {
        let src = self.src;
        let mut positions: Vec<(usize, Vec<NodeId>)> = Vec::new();
        for id in nodes {
            let n = src.node(id);
            let Some(q) = (n.kind == NodeKind::Level).then(|| h.position(&n.label)).flatten() else {
                self.out.graft(out_parent, src, id);
                continue;
            };
            match positions.iter_mut().find(|(p, _)| *p == q.index) {
                Some((_, group)) => group.push(id),
                None => positions.push((q.index, vec![id])),
            }
        }
        for (index, group) in positions {
            let mut identities: Vec<(&str, &str)> = Vec::new();
            for &id in &group {
                let identity = src.node(id).identity();
                if !identities.contains(&identity) {
                    identities.push(identity);
                }
            }
            let parents: Vec<NodeId> = group.iter().flat_map(|&id| src.children(id).iter().copied()).collect();
            let first = src.node(group[0]);
            if identities.len() == 1 {
                let copy = self.out.add_child(out_parent, first.clone());
                self.trail.push(format!("{}[{}]", first.label, first.value));
                self.strictify(parents, copy, h);
                self.trail.pop();
                continue;
            }
            let label = self.plan.fused_label(&h.level(index).name);
            let value = fuse(identities.iter().map(|(_, v)| *v), self.plan.placeholder);
            self.trail.push(format!("{label}[{value}]"));
            self.record(ActionKind::Fusion, h, label.clone(), value.clone());
            let fused = self.out.add_child(out_parent, Node::level(label, value));
            self.strictify(parents, fused, h);
            self.trail.pop();
        }
    }
}

/// Sorted, de-duplicated members joined by `-`, placeholder last.
fn fuse<'v>(values: impl Iterator<Item = &'v str>, placeholder: &str) -> String {
    let mut members: Vec<&str> = Vec::new();
    let mut other = false;
    for v in values {
        for part in v.split(FUSED_SEPARATOR) {
            if part == placeholder {
                other = true;
            } else {
                members.push(part);
            }
        }
    }
    members.sort_unstable();
    members.dedup();
    if other {
        members.push(placeholder);
    }
    members.join(&FUSED_SEPARATOR.to_string())
}

pub fn make_covering(
    tree: &MDDataTree,
    schema: &WarehouseSchema,
    plan: NormalizationPlan,
) -> (MDDataTree, NormalizationLedger) {
    Copier::new(tree, plan).facts(schema, |c, dim, out_dim, h| c.cover(dim, out_dim, None, h), true)
}

pub fn make_onto(
    tree: &MDDataTree,
    schema: &WarehouseSchema,
    plan: NormalizationPlan,
) -> (MDDataTree, NormalizationLedger) {
    Copier::new(tree, plan).facts(schema, |c, dim, out_dim, h| c.onto(dim, out_dim, h), false)
}

pub fn make_strict(
    tree: &MDDataTree,
    schema: &WarehouseSchema,
    plan: NormalizationPlan,
) -> (MDDataTree, NormalizationLedger) {
    Copier::new(tree, plan).facts(
        schema,
        |c, dim, out_dim, h| {
            let children = c.src.children(dim).to_vec();
            c.strictify(children, out_dim, h)
        },
        false,
    )
}

/// `make_covering` followed by `make_strict`.
pub fn normalize(
    tree: &MDDataTree,
    schema: &WarehouseSchema,
    plan: NormalizationPlan,
) -> (MDDataTree, NormalizationLedger) {
    let (covered, mut ledger) = make_covering(tree, schema, plan);
    let (strict, fused) = make_strict(&covered, schema, plan);
    ledger.extend(fused);
    (strict, ledger)
}

/// Single-valued group-by. Each fact must reach exactly one node at every
/// grouping level; the node's value (a member, a fused value or `Other`) is
/// the group.
pub fn plain_group_by(tree: &MDDataTree, query: &TreePatternQuery, schema: &WarehouseSchema) -> Result<MDDataTree> {
    query.validate(schema)?;
    let mut levels = Vec::with_capacity(query.grouping.len());
    for ge in &query.grouping {
        let d = schema.dimension_index(&ge.dimension).ok_or_else(|| Error::UnknownDimension(ge.dimension.clone()))?;
        let h = &schema.dimensions[d];
        let l = h
            .position(&ge.level)
            .ok_or_else(|| Error::UnknownLevel { dimension: ge.dimension.clone(), level: ge.level.clone() })?;
        levels.push((d, l.index));
    }

    let mut index: HashMap<Vec<String>, usize> = HashMap::new();
    let mut groups: Vec<(Vec<String>, Vec<AggState>)> = Vec::new();
    for (i, fact) in selected_facts(tree, query.predicate.as_ref(), schema)?.into_iter().enumerate() {
        let mut key = Vec::with_capacity(levels.len());
        for &(d, l) in &levels {
            key.push(single_value(tree, fact, &schema.dimensions[d], l, i)?);
        }
        let g = match index.get(&key) {
            Some(&g) => g,
            None => {
                index.insert(key.clone(), groups.len());
                groups.push((key, query.aggregations.iter().map(|a| AggState::new(a.func)).collect()));
                groups.len() - 1
            }
        };
        for (agg, state) in query.aggregations.iter().zip(&mut groups[g].1) {
            state.fold_fact(agg, tree, fact)?;
        }
    }

    let mut out = MDDataTree::new_warehouse();
    let root = out.root();
    let mut dims: Vec<usize> = Vec::new();
    for &(d, _) in &levels {
        if !dims.contains(&d) {
            dims.push(d);
        }
    }
    for (key, states) in &groups {
        let fact = out.add_child(root, Node::fact());
        for &d in &dims {
            let h = &schema.dimensions[d];
            let mut chain: Vec<(usize, &String)> =
                levels.iter().zip(key).filter(|((dd, _), _)| *dd == d).map(|((_, l), v)| (*l, v)).collect();
            chain.sort_by_key(|(l, _)| *l);
            let mut at = out.add_child(fact, Node::dimension(h.name.clone()));
            for (l, v) in chain {
                at = out.add_child(at, Node::level(h.level(l).name.clone(), v.clone()));
            }
        }
        for (agg, state) in query.aggregations.iter().zip(states) {
            if state.value().is_some() {
                out.add_child(fact, state.to_node(&agg.measure));
            }
        }
    }
    Ok(out)
}

fn single_value(tree: &MDDataTree, fact: NodeId, h: &HierarchySchema, target: usize, i: usize) -> Result<String> {
    let mut path = format!("/w/fact[{}]/dim[{}]", i + 1, h.name);
    let mut at = tree
        .dimension_of(fact, &h.name)
        .ok_or_else(|| Error::NotNormalized(format!("{path} is missing")))?;
    loop {
        let levels: Vec<NodeId> =
            tree.children(at).iter().copied().filter(|&c| tree.node(c).kind == NodeKind::Level).collect();
        let [only] = levels[..] else {
            return Err(Error::NotNormalized(format!("{path} has {} parents", levels.len())));
        };
        let n = tree.node(only);
        path.push_str(&format!("/{}[{}]", n.label, n.value));
        let q = h.position(&n.label).ok_or_else(|| Error::NotNormalized(format!("{path} has an unknown level")))?;
        if q.index == target {
            return Ok(n.value.clone());
        }
        if q.index > target {
            return Err(Error::NotNormalized(format!("{path} skips {}", h.level(target).name)));
        }
        at = only;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::diagnostics::validate_summarizability;
    use crate::qbs::{qbs, result_rows};
    use crate::sample::{projects_schema, projects_warehouse, q1};

    #[test]
    fn covering_fills_team_for_d() {
        let s = projects_schema();
        let (t, ledger) = make_covering(&projects_warehouse(), &s, NormalizationPlan::default());
        assert_eq!(ledger.to_string(), "PLACEHOLDER project Team /w/fact[4]/dim[project]/Project[D]/Branch[I]\n");
        let report = validate_summarizability(&t, &s);
        assert_eq!(report.count(crate::model::FindingKind::Incomplete), 0);
        let (again, ledger) = make_covering(&t, &s, NormalizationPlan::default());
        assert!(ledger.actions.is_empty());
        assert_eq!(again, t);
    }

    #[test]
    fn strict_fuses_teams() {
        let s = projects_schema();
        let (t, ledger) = normalize(&projects_warehouse(), &s, NormalizationPlan::default());
        let fused: Vec<String> = ledger
            .actions
            .iter()
            .filter(|a| a.kind == ActionKind::Fusion)
            .map(|a| format!("{}[{}]", a.level, a.value))
            .collect();
        assert_eq!(fused, ["Team_fused[1-2]", "Branch_fused[I-II]", "Team_fused[2-3]", "Branch_fused[I-II]"]);
        assert!(validate_summarizability(&t, &s).is_empty());
        let (again, ledger) = normalize(&t, &s, NormalizationPlan::default());
        assert!(ledger.actions.is_empty());
        assert_eq!(again, t);
    }

    #[test]
    fn plain_group_by_matches_qbs_on_projects() {
        let s = projects_schema();
        let (t, _) = normalize(&projects_warehouse(), &s, NormalizationPlan::default());
        let out = plain_group_by(&t, &q1(), &s).unwrap();
        let expected = result_rows(&qbs(&projects_warehouse(), &q1(), &s).unwrap(), &q1(), &s).unwrap();
        assert_eq!(result_rows(&out, &q1(), &s).unwrap(), expected);
        assert!(matches!(plain_group_by(&projects_warehouse(), &q1(), &s), Err(Error::NotNormalized(_))));
        assert_eq!(plain_group_by(&MDDataTree::new_warehouse(), &q1(), &s).unwrap().len(), 1);
    }

    #[test]
    fn onto_pads_below_first_member() {
        let s = projects_schema();
        let (t, ledger) = make_onto(&projects_warehouse(), &s, NormalizationPlan::default());
        assert!(ledger.actions.is_empty(), "every project sits at the finest level");
        assert_eq!(t, projects_warehouse());

        let mut w = MDDataTree::new_warehouse();
        let f = w.add_child(w.root(), Node::fact());
        let d = w.add_child(f, Node::dimension("project"));
        w.add_child(d, Node::level("Branch", "I"));
        let (_, ledger) = make_onto(&w, &s, NormalizationPlan::default());
        assert_eq!(
            ledger.to_string(),
            "PLACEHOLDER project Project /w/fact[1]/dim[project]/Branch[I]\n\
             PLACEHOLDER project Team /w/fact[1]/dim[project]/Branch[I]\n"
        );
    }
}
