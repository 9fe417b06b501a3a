//! Detection of summarizability hazards: members with several parents
//! (non-strict) and roll-up paths that skip schema levels (incomplete).

use std::collections::BTreeMap;
use std::fmt;

use crate::model::schema::{HierarchySchema, WarehouseSchema};
use crate::model::tree::{MDDataTree, NodeId, NodeKind};

/// Level column used for non-strict fact-to-dimension links.
pub const FACT_LINK: &str = "(fact)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FindingKind {
    NonStrict,
    Incomplete,
}

impl FindingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FindingKind::NonStrict => "NONSTRICT",
            FindingKind::Incomplete => "INCOMPLETE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub kind: FindingKind,
    /// Zero-based index of the fact among the warehouse's facts.
    pub fact: usize,
    pub dimension: String,
    /// For non-strict findings, the level of the member that has several
    /// parents; for incomplete findings, the level that was skipped.
    pub level: String,
    pub path: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.kind.as_str(), self.dimension, self.level, self.path)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiagnosticsReport {
    pub findings: Vec<Finding>,
}

impl DiagnosticsReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn count(&self, kind: FindingKind) -> usize {
        self.findings.iter().filter(|f| f.kind == kind).count()
    }

    /// Finding counts per (kind, dimension, level).
    pub fn counts(&self) -> BTreeMap<(FindingKind, String, String), usize> {
        let mut out = BTreeMap::new();
        for f in &self.findings {
            *out.entry((f.kind, f.dimension.clone(), f.level.clone())).or_insert(0) += 1;
        }
        out
    }

    pub fn flags(&self, kind: FindingKind, fact: usize, dimension: &str, level: &str) -> bool {
        self.findings
            .iter()
            .any(|f| f.kind == kind && f.fact == fact && f.dimension == dimension && f.level == level)
    }
}

impl fmt::Display for DiagnosticsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for finding in &self.findings {
            writeln!(f, "{finding}")?;
        }
        Ok(())
    }
}

pub fn validate_summarizability(tree: &MDDataTree, schema: &WarehouseSchema) -> DiagnosticsReport {
    let mut report = DiagnosticsReport::default();
    for (index, fact) in tree.facts().enumerate() {
        for hierarchy in &schema.dimensions {
            let mut scan = Scan { tree, hierarchy, fact: index, report: &mut report, trail: Vec::new() };
            match tree.dimension_of(fact, &hierarchy.name) {
                Some(dim) => scan.visit(dim, None),
                None => {
                    let path = format!("/w/fact[{}]/dim[{}]", index + 1, hierarchy.name);
                    for level in &hierarchy.levels {
                        scan.report.findings.push(Finding {
                            kind: FindingKind::Incomplete,
                            fact: index,
                            dimension: hierarchy.name.clone(),
                            level: level.name.clone(),
                            path: path.clone(),
                        });
                    }
                }
            }
        }
    }
    report
}

struct Scan<'a> {
    tree: &'a MDDataTree,
    hierarchy: &'a HierarchySchema,
    fact: usize,
    report: &'a mut DiagnosticsReport,
    trail: Vec<NodeId>,
}

impl Scan<'_> {
    fn path(&self) -> String {
        let mut p = format!("/w/fact[{}]", self.fact + 1);
        for &id in &self.trail {
            let n = self.tree.node(id);
            match n.kind {
                NodeKind::Dimension => p.push_str(&format!("/dim[{}]", n.label)),
                _ => p.push_str(&format!("/{}[{}]", n.label, n.value)),
            }
        }
        p
    }

    fn push(&mut self, kind: FindingKind, level: &str) {
        let finding = Finding {
            kind,
            fact: self.fact,
            dimension: self.hierarchy.name.clone(),
            level: level.to_string(),
            path: self.path(),
        };
        self.report.findings.push(finding);
    }

    /// `pos` is the level index of `id`, or `None` for the dimension link.
    fn visit(&mut self, id: NodeId, pos: Option<usize>) {
        self.trail.push(id);
        let tree = self.tree;
        let parents: Vec<NodeId> = tree
            .children(id)
            .iter()
            .copied()
            .filter(|&c| tree.node(c).kind == NodeKind::Level)
            .collect();

        let mut identities: Vec<(&str, &str)> = parents.iter().map(|&c| tree.node(c).identity()).collect();
        identities.sort_unstable();
        identities.dedup();
        if identities.len() > 1 {
            let level = match pos {
                Some(_) => tree.node(id).label.clone(),
                None => FACT_LINK.to_string(),
            };
            self.push(FindingKind::NonStrict, &level);
        }

        // Levels skipped between this node and each of its parents.
        let next = pos.map_or(0, |p| p + 1);
        let mut skipped: Vec<usize> = Vec::new();
        let mut resolved = Vec::with_capacity(parents.len());
        if parents.is_empty() {
            skipped.extend(next..self.hierarchy.depth());
        }
        for &c in &parents {
            let Some(child_pos) = self.hierarchy.position(&tree.node(c).label) else {
                continue;
            };
            skipped.extend(next..child_pos.index);
            resolved.push((c, child_pos.index));
        }
        skipped.sort_unstable();
        skipped.dedup();
        for level in skipped {
            let name = self.hierarchy.level(level).name.clone();
            self.push(FindingKind::Incomplete, &name);
        }
        for (c, child_pos) in resolved {
            self.visit(c, Some(child_pos));
        }
        self.trail.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tree::Node;
    use crate::sample::{projects_schema, projects_warehouse};

    #[test]
    fn projects_findings() {
        let report = validate_summarizability(&projects_warehouse(), &projects_schema());
        let lines: Vec<String> = report.findings.iter().map(|f| f.to_string()).collect();
        assert_eq!(
            lines,
            [
                "NONSTRICT project Project /w/fact[1]/dim[project]/Project[A]",
                "NONSTRICT project Project /w/fact[2]/dim[project]/Project[B]",
                "INCOMPLETE project Team /w/fact[4]/dim[project]/Project[D]",
            ]
        );
        assert!(report.flags(FindingKind::Incomplete, 3, "project", "Team"));
        assert_eq!(report.count(FindingKind::NonStrict), 2);
        assert_eq!(
            report.counts()[&(FindingKind::NonStrict, "project".into(), "Project".into())],
            2
        );
    }

    #[test]
    fn strict_complete_tree_is_clean() {
        let mut t = MDDataTree::new_warehouse();
        let f = t.add_child(t.root(), Node::fact());
        let d = t.add_child(f, Node::dimension("project"));
        let p = t.add_child(d, Node::level("Project", "C"));
        let tm = t.add_child(p, Node::level("Team", "4"));
        t.add_child(tm, Node::level("Branch", "II"));
        let d = t.add_child(f, Node::dimension("customer"));
        t.add_child(d, Node::level("Customer", "β"));
        assert!(validate_summarizability(&t, &projects_schema()).is_empty());
        assert_eq!(validate_summarizability(&MDDataTree::new_warehouse(), &projects_schema()).to_string(), "");
    }

    #[test]
    fn fact_links_and_truncated_paths() {
        let mut t = MDDataTree::new_warehouse();
        let f = t.add_child(t.root(), Node::fact());
        let d = t.add_child(f, Node::dimension("project"));
        // Two projects on one fact, one of which stops at Team.
        let a = t.add_child(d, Node::level("Project", "A"));
        t.add_child(a, Node::level("Team", "1"));
        let b = t.add_child(d, Node::level("Project", "B"));
        let tm = t.add_child(b, Node::level("Team", "2"));
        t.add_child(tm, Node::level("Branch", "II"));
        // Customer dimension missing entirely.
        let report = validate_summarizability(&t, &projects_schema());
        let text = report.to_string();
        assert_eq!(
            text,
            "NONSTRICT project (fact) /w/fact[1]/dim[project]\n\
             INCOMPLETE project Branch /w/fact[1]/dim[project]/Project[A]/Team[1]\n\
             INCOMPLETE customer Customer /w/fact[1]/dim[customer]\n"
        );
    }

    #[test]
    fn repeated_identical_parents_are_not_non_strict() {
        let mut t = MDDataTree::new_warehouse();
        let f = t.add_child(t.root(), Node::fact());
        let d = t.add_child(f, Node::dimension("customer"));
        t.add_child(d, Node::level("Customer", "α"));
        t.add_child(d, Node::level("Customer", "α"));
        assert!(validate_summarizability(&t, &projects_schema())
            .findings
            .iter()
            .all(|f| f.dimension != "customer"));
    }
}
