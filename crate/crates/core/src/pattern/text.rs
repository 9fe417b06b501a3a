//! Line-oriented query files.
//!
//! ```text
//! # total cost per team and customer
//! group project.Team
//! group customer.Customer
//! agg sum(cost)
//! where cost > 100 and not customer.Customer = γ
//! ```
//!
//! `group` and `agg` repeat; several `where` lines are conjoined. A bare
//! `passthrough` line keeps non-grouped dimensions in the witness trees.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::model::schema::WarehouseSchema;
use crate::pattern::formula::{parse_formula, Formula};
use crate::pattern::query::{AggFn, Aggregation, GroupingElement, TreePatternQuery};

/// Parses query text without schema checks.
pub fn parse_query_text(text: &str) -> Result<TreePatternQuery> {
    let mut grouping = Vec::new();
    let mut aggregations = Vec::new();
    let mut predicate: Option<Formula> = None;
    let mut pass_through = false;
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::QuerySyntax { line: line_no, message };
        let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match keyword {
            "group" => {
                let (dim, level) = rest
                    .split_once('.')
                    .filter(|(d, l)| !d.is_empty() && !l.is_empty() && !l.contains(char::is_whitespace))
                    .ok_or_else(|| err(format!("expected `group <dimension>.<level>`, got {rest:?}")))?;
                grouping.push(GroupingElement::new(dim, level));
            }
            "agg" => {
                let (func, measure) = rest
                    .strip_suffix(')')
                    .and_then(|s| s.split_once('('))
                    .ok_or_else(|| err(format!("expected `agg <fn>(<measure>)`, got {rest:?}")))?;
                let func: AggFn = func
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("unknown aggregation function {func:?}")))?;
                let measure = measure.trim();
                if measure.is_empty() {
                    return Err(err("empty measure".into()));
                }
                aggregations.push(Aggregation::new(func, measure));
            }
            "where" => {
                let f = parse_formula(rest).map_err(err)?;
                predicate = Some(match predicate.take() {
                    Some(prev) => prev.and(f),
                    None => f,
                });
            }
            "passthrough" if rest.is_empty() => pass_through = true,
            other => return Err(err(format!("unknown directive {other:?}"))),
        }
    }
    let end = last_line + 1;
    if grouping.is_empty() {
        return Err(Error::QuerySyntax { line: end, message: "at least one `group` line is required".into() });
    }
    if aggregations.is_empty() {
        return Err(Error::QuerySyntax { line: end, message: "at least one `agg` line is required".into() });
    }
    Ok(TreePatternQuery { grouping, aggregations, predicate, pass_through })
}

/// Parses query text and validates it against `schema`.
pub fn parse_query(text: &str, schema: &WarehouseSchema) -> Result<TreePatternQuery> {
    let q = parse_query_text(text)?;
    q.validate(schema)?;
    Ok(q)
}

pub fn print_query(q: &TreePatternQuery) -> String {
    let mut out = String::new();
    for ge in &q.grouping {
        let _ = writeln!(out, "group {ge}");
    }
    for agg in &q.aggregations {
        let _ = writeln!(out, "agg {agg}");
    }
    if let Some(p) = &q.predicate {
        let _ = writeln!(out, "where {p}");
    }
    if q.pass_through {
        out.push_str("passthrough\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::projects_schema;

    #[test]
    fn q1_text() {
        let q = parse_query(crate::sample::Q1, &projects_schema()).unwrap();
        assert_eq!(
            q.grouping,
            vec![GroupingElement::new("project", "Team"), GroupingElement::new("customer", "Customer")]
        );
        assert_eq!(q.aggregations, vec![Aggregation::new(AggFn::Sum, "cost")]);
        assert!(q.predicate.is_none());
    }

    #[test]
    fn zero_grouping_elements_is_a_syntax_error() {
        let err = parse_query("agg sum(cost)\n", &projects_schema()).unwrap_err();
        assert!(matches!(err, Error::QuerySyntax { .. }));
        let err = parse_query("group project.Team\n", &projects_schema()).unwrap_err();
        assert!(matches!(err, Error::QuerySyntax { .. }));
    }

    #[test]
    fn schema_errors() {
        let s = projects_schema();
        assert_eq!(
            parse_query("group nope.Team\nagg sum(cost)", &s).unwrap_err(),
            Error::UnknownDimension("nope".into())
        );
        assert_eq!(
            parse_query("group project.Region\nagg sum(cost)", &s).unwrap_err(),
            Error::UnknownLevel { dimension: "project".into(), level: "Region".into() }
        );
        assert_eq!(
            parse_query("group project.Team\nagg sum(price)", &s).unwrap_err(),
            Error::UnknownMeasure("price".into())
        );
        assert_eq!(
            parse_query("group project.Team\nagg sum(cost)\nwhere price > 1", &s).unwrap_err(),
            Error::UnknownPath("price".into())
        );
        assert!(matches!(
            parse_query("group project.Team\nagg sum(cost)\nwhere cost > lots", &s).unwrap_err(),
            Error::TypeMismatch { .. }
        ));
        assert!(matches!(
            parse_query("group project.Team\ngroup project.Team\nagg sum(cost)", &s).unwrap_err(),
            Error::QuerySyntax { .. }
        ));
        assert!(matches!(
            parse_query("group project.Team\nagg sum(*)", &s).unwrap_err(),
            Error::QuerySyntax { .. }
        ));
    }

    #[test]
    fn syntax_errors_report_lines() {
        let err = parse_query_text("group project.Team\n\nagg sum cost\n").unwrap_err();
        assert!(matches!(err, Error::QuerySyntax { line: 3, .. }), "{err:?}");
        let err = parse_query_text("group project.Team\nagg sum(cost)\nwhere cost >\n").unwrap_err();
        assert!(matches!(err, Error::QuerySyntax { line: 3, .. }));
        let err = parse_query_text("select *\n").unwrap_err();
        assert!(matches!(err, Error::QuerySyntax { line: 1, .. }));
    }

    #[test]
    fn where_lines_are_conjoined() {
        let q = parse_query(
            "group project.Team\nagg count(*)\nwhere project.Project = A or project.Project = B\nwhere cost > 0\n",
            &projects_schema(),
        )
        .unwrap();
        assert_eq!(
            print_query(&q),
            "group project.Team\nagg count(*)\nwhere (project.Project = A or project.Project = B) and cost > 0\n"
        );
        assert_eq!(parse_query(&print_query(&q), &projects_schema()).unwrap(), q);
    }
}
