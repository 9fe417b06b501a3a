//! Group keys: the fused member set a fact reaches at a grouping level.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::schema::{HierarchySchema, WarehouseSchema, FUSED_SEPARATOR, OTHER};
use crate::model::tree::{MDDataTree, NodeId, NodeKind};
use crate::pattern::query::GroupingElement;

/// A grouping element resolved to schema indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelRef {
    pub dimension: usize,
    pub level: usize,
}

impl LevelRef {
    pub fn resolve(ge: &GroupingElement, schema: &WarehouseSchema) -> Result<LevelRef> {
        let dimension = schema
            .dimension_index(&ge.dimension)
            .ok_or_else(|| Error::UnknownDimension(ge.dimension.clone()))?;
        let level = schema.dimensions[dimension]
            .position(&ge.level)
            .ok_or_else(|| Error::UnknownLevel { dimension: ge.dimension.clone(), level: ge.level.clone() })?
            .index;
        Ok(LevelRef { dimension, level })
    }
}

/// Fused member set at one level, plus whether some roll-up path misses the
/// level. A key with no members is the pure `Other` group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupKey {
    pub level: LevelRef,
    members: Vec<String>,
    other: bool,
}

impl GroupKey {
    pub fn new(level: LevelRef, members: impl IntoIterator<Item = String>, other: bool) -> Self {
        let mut members: Vec<String> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        let other = other || members.is_empty();
        GroupKey { level, members, other }
    }

    pub fn other(level: LevelRef) -> Self {
        GroupKey { level, members: Vec::new(), other: true }
    }

    pub fn members(&self) -> &[String] {
        &self.members
    }

    pub fn has_other(&self) -> bool {
        self.other
    }

    pub fn is_pure_other(&self) -> bool {
        self.members.is_empty()
    }

    /// Members sorted by byte order and joined with `-`; `Other` last.
    pub fn encoding(&self) -> String {
        let mut out = String::new();
        for m in &self.members {
            if !out.is_empty() {
                out.push(FUSED_SEPARATOR);
            }
            out.push_str(m);
        }
        if self.other {
            if !out.is_empty() {
                out.push(FUSED_SEPARATOR);
            }
            out.push_str(OTHER);
        }
        out
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encoding())
    }
}

/// One key per grouping element, in query order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupList(pub Vec<GroupKey>);

impl GroupList {
    pub fn keys(&self) -> &[GroupKey] {
        &self.0
    }
}

/// Nodes of a fact that give its group hierarchy context, in document order:
/// the parents of every member found at the grouping level, and the first
/// node above the level on every path that skips it.
#[derive(Debug, Default)]
pub(crate) struct Sites {
    pub context: Vec<NodeId>,
}

pub fn build_group_key(
    tree: &MDDataTree,
    fact: NodeId,
    level: LevelRef,
    schema: &WarehouseSchema,
) -> GroupKey {
    let mut walk = KeyWalk::new(tree, &schema.dimensions[level.dimension], level.level, None);
    walk.fact(fact);
    walk.finish(level)
}

pub(crate) fn build_group_key_with_sites(
    tree: &MDDataTree,
    fact: NodeId,
    level: LevelRef,
    schema: &WarehouseSchema,
) -> (GroupKey, Sites) {
    let mut sites = Sites::default();
    let mut walk = KeyWalk::new(tree, &schema.dimensions[level.dimension], level.level, Some(&mut sites));
    walk.fact(fact);
    let key = walk.finish(level);
    (key, sites)
}

struct KeyWalk<'a> {
    tree: &'a MDDataTree,
    hierarchy: &'a HierarchySchema,
    target: usize,
    members: Vec<String>,
    other: bool,
    sites: Option<&'a mut Sites>,
}

impl<'a> KeyWalk<'a> {
    fn new(
        tree: &'a MDDataTree,
        hierarchy: &'a HierarchySchema,
        target: usize,
        sites: Option<&'a mut Sites>,
    ) -> Self {
        KeyWalk { tree, hierarchy, target, members: Vec::new(), other: false, sites }
    }

    fn fact(&mut self, fact: NodeId) {
        match self.tree.dimension_of(fact, &self.hierarchy.name) {
            Some(dim) => {
                if !self.below(dim) {
                    self.other = true;
                }
            }
            None => self.other = true,
        }
    }

    /// Visits the level children of a node that sits below the target level.
    /// Returns false when the node has none (the path ends early).
    fn below(&mut self, id: NodeId) -> bool {
        let tree = self.tree;
        let mut any = false;
        for &c in tree.children(id) {
            let n = tree.node(c);
            if n.kind != NodeKind::Level {
                continue;
            }
            let Some(pos) = self.hierarchy.position(&n.label) else {
                continue;
            };
            any = true;
            if pos.index == self.target {
                for part in n.value.split(FUSED_SEPARATOR) {
                    if part == OTHER {
                        self.other = true;
                    } else {
                        self.members.push(part.to_string());
                    }
                }
                if let Some(s) = self.sites.as_deref_mut() {
                    s.context.extend(
                        tree.children(c).iter().copied().filter(|&p| tree.node(p).kind == NodeKind::Level),
                    );
                }
            } else if pos.index > self.target {
                self.other = true;
                if let Some(s) = self.sites.as_deref_mut() {
                    s.context.push(c);
                }
            } else if !self.below(c) {
                self.other = true;
            }
        }
        any
    }

    fn finish(self, level: LevelRef) -> GroupKey {
        GroupKey::new(level, self.members, self.other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{projects_schema, projects_warehouse};

    fn team_keys() -> Vec<String> {
        let s = projects_schema();
        let t = projects_warehouse();
        let team = LevelRef::resolve(&GroupingElement::new("project", "Team"), &s).unwrap();
        t.facts().map(|f| build_group_key(&t, f, team, &s).encoding()).collect()
    }

    #[test]
    fn projects_team_keys() {
        assert_eq!(team_keys(), ["1-2", "2-3", "4", "Other"]);
    }

    #[test]
    fn projects_branch_keys() {
        let s = projects_schema();
        let t = projects_warehouse();
        let branch = LevelRef::resolve(&GroupingElement::new("project", "Branch"), &s).unwrap();
        let keys: Vec<String> = t.facts().map(|f| build_group_key(&t, f, branch, &s).encoding()).collect();
        assert_eq!(keys, ["I-II", "I-II", "II", "I"]);
    }

    #[test]
    fn other_is_level_qualified() {
        let a = GroupKey::other(LevelRef { dimension: 0, level: 1 });
        let b = GroupKey::other(LevelRef { dimension: 0, level: 2 });
        assert_eq!(a.encoding(), b.encoding());
        assert_ne!(a, b);
    }

    #[test]
    fn mixed_keys_sort_other_last() {
        let k = GroupKey::new(
            LevelRef { dimension: 0, level: 0 },
            ["b".to_string(), "a".to_string(), "b".to_string()],
            true,
        );
        assert_eq!(k.encoding(), "a-b-Other");
        assert_eq!(k.members(), ["a", "b"]);
        assert!(k.has_other() && !k.is_pure_other());
    }

    #[test]
    fn fused_values_split_back_into_members() {
        let s = projects_schema();
        let mut t = MDDataTree::new_warehouse();
        let f = t.add_child(t.root(), crate::model::Node::fact());
        let d = t.add_child(f, crate::model::Node::dimension("project"));
        t.add_child(d, crate::model::Node::level("Team_fused", "2-1-Other"));
        let team = LevelRef::resolve(&GroupingElement::new("project", "Team"), &s).unwrap();
        assert_eq!(build_group_key(&t, f, team, &s).encoding(), "1-2-Other");
    }
}
