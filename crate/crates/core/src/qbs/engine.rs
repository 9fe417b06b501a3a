use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::model::schema::WarehouseSchema;
use crate::model::tree::{MDDataTree, NodeId};
use crate::pattern::matching::selected_facts;
use crate::pattern::query::TreePatternQuery;
use crate::qbs::key::{build_group_key, GroupList, LevelRef};
use crate::qbs::witness::{product, WitnessTree, WitnessTreeList};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QbsOptions {
    /// Find existing groups by scanning the witness list instead of hashing.
    pub linear_scan: bool,
}

/// Wall time spent in each step of one evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseTimings {
    /// Selection and group-key construction.
    pub summarizability: Duration,
    /// Group lookup, witness-tree creation and aggregate updates.
    pub matching: Duration,
    /// Writing out the result tree.
    pub assembly: Duration,
}

impl PhaseTimings {
    pub fn total(&self) -> Duration {
        self.summarizability + self.matching + self.assembly
    }
}

/// Groups the facts of `tree` per `query`, fusing multi-parent members and
/// sending facts that miss a grouping level to its `Other` group.
pub fn qbs(tree: &MDDataTree, query: &TreePatternQuery, schema: &WarehouseSchema) -> Result<MDDataTree> {
    qbs_with(tree, query, schema, QbsOptions::default()).map(|(out, _)| out)
}

pub fn qbs_with(
    tree: &MDDataTree,
    query: &TreePatternQuery,
    schema: &WarehouseSchema,
    options: QbsOptions,
) -> Result<(MDDataTree, PhaseTimings)> {
    query.validate(schema)?;
    let levels = query
        .grouping
        .iter()
        .map(|ge| LevelRef::resolve(ge, schema))
        .collect::<Result<Vec<_>>>()?;

    let start = Instant::now();
    let facts = selected_facts(tree, query.predicate.as_ref(), schema)?;
    let keyed: Vec<(NodeId, GroupList)> = facts
        .into_iter()
        .map(|f| (f, GroupList(levels.iter().map(|&l| build_group_key(tree, f, l, schema)).collect())))
        .collect();
    let keyed_at = Instant::now();

    let mut wts = WitnessTreeList::new(options.linear_scan);
    for (fact, groups) in keyed {
        let i = match wts.find(&groups) {
            Some(i) => i,
            None => wts.push(WitnessTree::create(groups, tree, fact, query, schema)),
        };
        let wt = wts.get_mut(i);
        for (agg, state) in query.aggregations.iter().zip(&mut wt.aggregates) {
            state.fold_fact(agg, tree, fact)?;
        }
    }
    let matched_at = Instant::now();

    let out = product(&wts, query);
    let done = Instant::now();
    let timings = PhaseTimings {
        summarizability: keyed_at - start,
        matching: matched_at - keyed_at,
        assembly: done - matched_at,
    };
    Ok((out, timings))
}

/// Chains grouping stages, each consuming the previous stage's groups.
pub fn rollup(tree: &MDDataTree, stages: &[TreePatternQuery], schema: &WarehouseSchema) -> Result<MDDataTree> {
    rollup_with(tree, stages, schema, QbsOptions::default())
}

pub fn rollup_with(
    tree: &MDDataTree,
    stages: &[TreePatternQuery],
    schema: &WarehouseSchema,
    options: QbsOptions,
) -> Result<MDDataTree> {
    let Some((first, rest)) = stages.split_first() else {
        return Err(Error::InvalidRollup("no stages".into()));
    };
    for stage in stages {
        stage.validate(schema)?;
    }
    for pair in stages.windows(2) {
        check_stage(&pair[0], &pair[1], schema)?;
    }
    let mut current = qbs_with(tree, first, schema, options)?.0;
    for stage in rest {
        current = qbs_with(&current, stage, schema, options)?.0;
    }
    Ok(current)
}

fn check_stage(prev: &TreePatternQuery, next: &TreePatternQuery, schema: &WarehouseSchema) -> Result<()> {
    let prev_levels = prev
        .grouping
        .iter()
        .map(|ge| LevelRef::resolve(ge, schema))
        .collect::<Result<Vec<_>>>()?;
    for ge in &next.grouping {
        let l = LevelRef::resolve(ge, schema)?;
        if !prev_levels.iter().any(|p| p.dimension == l.dimension && p.level <= l.level) {
            return Err(Error::InvalidRollup(format!(
                "{ge} is not at or above a grouping level of the previous stage"
            )));
        }
    }
    for agg in &next.aggregations {
        if !prev.aggregations.contains(agg) {
            return Err(Error::NonReaggregable(format!("{agg} is not computed by the previous stage")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::parse_query;
    use crate::qbs::rows::result_rows;
    use crate::sample::{projects_schema, projects_warehouse, q1, q2};

    #[test]
    fn q1_groups() {
        let s = projects_schema();
        let out = qbs(&projects_warehouse(), &q1(), &s).unwrap();
        assert_eq!(
            result_rows(&out, &q1(), &s).unwrap(),
            [
                "project.Team=1-2 | customer.Customer=α | sum(cost)=1000",
                "project.Team=2-3 | customer.Customer=α | sum(cost)=1500",
                "project.Team=4 | customer.Customer=β | sum(cost)=500",
                "project.Team=Other | customer.Customer=γ | sum(cost)=100",
            ]
        );
    }

    #[test]
    fn q1_keeps_branch_context() {
        let out = qbs(&projects_warehouse(), &q1(), &projects_schema()).unwrap();
        let text = out.to_string();
        assert!(
            text.contains(
                "<lvl name=\"Team\" v=\"Other\">\n        <lvl name=\"Branch\" v=\"I\"/>\n      </lvl>"
            ),
            "{text}"
        );
        assert!(text.contains("<agg fn=\"sum\" measure=\"cost\" v=\"1500\"/>"));
    }

    #[test]
    fn q1_then_q2() {
        let s = projects_schema();
        let out = rollup(&projects_warehouse(), &[q1(), q2()], &s).unwrap();
        assert_eq!(
            result_rows(&out, &q2(), &s).unwrap(),
            [
                "project.Branch=I | customer.Customer=γ | sum(cost)=100",
                "project.Branch=I-II | customer.Customer=α | sum(cost)=2500",
                "project.Branch=II | customer.Customer=β | sum(cost)=500",
            ]
        );
        assert_eq!(rollup(&projects_warehouse(), &[q1()], &s).unwrap(), qbs(&projects_warehouse(), &q1(), &s).unwrap());
    }

    #[test]
    fn rollup_checks_stages() {
        let s = projects_schema();
        let t = projects_warehouse();
        assert!(matches!(rollup(&t, &[q2(), q1()], &s), Err(Error::InvalidRollup(_))));
        assert!(matches!(rollup(&t, &[], &s), Err(Error::InvalidRollup(_))));
        let counted = parse_query("group project.Branch\ngroup customer.Customer\nagg count(*)", &s).unwrap();
        assert!(matches!(rollup(&t, &[q1(), counted], &s), Err(Error::NonReaggregable(_))));
    }

    #[test]
    fn counting_examples() {
        let s = projects_schema();
        let t = projects_warehouse();
        let ab = parse_query(
            "group project.Team\nagg count(*)\nwhere project.Project = A or project.Project = B",
            &s,
        )
        .unwrap();
        let out = qbs(&t, &ab, &s).unwrap();
        assert_eq!(result_rows(&out, &ab, &s).unwrap(), ["project.Team=1-2 | count(*)=1", "project.Team=2-3 | count(*)=1"]);
        let cd = parse_query(
            "group project.Team\nagg count(*)\nwhere project.Project = C or project.Project = D",
            &s,
        )
        .unwrap();
        let out = qbs(&t, &cd, &s).unwrap();
        assert_eq!(result_rows(&out, &cd, &s).unwrap(), ["project.Team=4 | count(*)=1", "project.Team=Other | count(*)=1"]);
    }

    #[test]
    fn empty_warehouse() {
        let out = qbs(&MDDataTree::new_warehouse(), &q1(), &projects_schema()).unwrap();
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn linear_scan_agrees() {
        let s = projects_schema();
        let t = projects_warehouse();
        let (a, _) = qbs_with(&t, &q1(), &s, QbsOptions { linear_scan: true }).unwrap();
        assert_eq!(a, qbs(&t, &q1(), &s).unwrap());
    }

    #[test]
    fn same_dimension_grouping_nests() {
        let s = projects_schema();
        let t = projects_warehouse();
        let q = parse_query("group project.Branch\ngroup project.Team\nagg sum(cost)", &s).unwrap();
        let out = qbs(&t, &q, &s).unwrap();
        assert_eq!(
            result_rows(&out, &q, &s).unwrap(),
            [
                "project.Branch=I | project.Team=Other | sum(cost)=100",
                "project.Branch=I-II | project.Team=1-2 | sum(cost)=1000",
                "project.Branch=I-II | project.Team=2-3 | sum(cost)=1500",
                "project.Branch=II | project.Team=4 | sum(cost)=500",
            ]
        );
        let q2 = parse_query("group project.Branch\nagg sum(cost)", &s).unwrap();
        let out = rollup(&t, &[q, q2.clone()], &s).unwrap();
        assert_eq!(
            result_rows(&out, &q2, &s).unwrap(),
            ["project.Branch=I | sum(cost)=100", "project.Branch=I-II | sum(cost)=2500", "project.Branch=II | sum(cost)=500"]
        );
    }
}
