//! The project-management warehouse used throughout the docs and tests.
//!
//! Four projects with one `cost` measure each, a `project` dimension rolling
//! up Project → Team → Branch and a single-level `customer` dimension:
//!
//! | fact | teams     | branches      | customer | cost |
//! |------|-----------|---------------|----------|------|
//! | A    | 1, 2      | I (1), II (2) | α        | 1000 |
//! | B    | 2, 3      | II (2), I (3) | α        | 1500 |
//! | C    | 4         | II            | β        | 500  |
//! | D    | none      | I             | γ        | 100  |
//!
//! A and B are non-strict (two teams each) and D skips the Team level.

use crate::model::schema::WarehouseSchema;
use crate::model::tree::{MDDataTree, Node};
use crate::pattern::query::TreePatternQuery;

pub const PROJECT_SCHEMA: &str = r#"measures = ["cost"]

[[dimension]]
name = "project"

[[dimension.level]]
name = "Project"
values = ["A", "B", "C", "D"]

[[dimension.level]]
name = "Team"
values = ["1", "2", "3", "4"]

[[dimension.level]]
name = "Branch"
values = ["I", "II"]

[[dimension]]
name = "customer"

[[dimension.level]]
name = "Customer"
values = ["α", "β", "γ"]
"#;

/// Q1: total cost of projects per team and per customer.
pub const Q1: &str = "group project.Team\ngroup customer.Customer\nagg sum(cost)\n";

/// Q2: total cost of projects per branch and per customer.
pub const Q2: &str = "group project.Branch\ngroup customer.Customer\nagg sum(cost)\n";

pub fn projects_schema() -> WarehouseSchema {
    WarehouseSchema::parse(PROJECT_SCHEMA).expect("sample schema is valid")
}

pub fn projects_warehouse() -> MDDataTree {
    type Chain<'a> = &'a [(&'a str, &'a str)];
    let facts: [(&str, &[Chain]); 4] = [
        ("A", &[&[("Team", "1"), ("Branch", "I")], &[("Team", "2"), ("Branch", "II")]]),
        ("B", &[&[("Team", "2"), ("Branch", "II")], &[("Team", "3"), ("Branch", "I")]]),
        ("C", &[&[("Team", "4"), ("Branch", "II")]]),
        ("D", &[&[("Branch", "I")]]),
    ];
    let customers = ["α", "α", "β", "γ"];
    let costs = ["1000", "1500", "500", "100"];

    let mut t = MDDataTree::new_warehouse();
    for (i, (project, chains)) in facts.iter().enumerate() {
        let fact = t.add_child(t.root(), Node::fact());
        let dim = t.add_child(fact, Node::dimension("project"));
        let p = t.add_child(dim, Node::level("Project", *project));
        for chain in chains.iter() {
            let mut at = p;
            for (level, value) in chain.iter() {
                at = t.add_child(at, Node::level(*level, *value));
            }
        }
        let dim = t.add_child(fact, Node::dimension("customer"));
        t.add_child(dim, Node::level("Customer", customers[i]));
        t.add_child(fact, Node::measure("cost", costs[i]));
    }
    t
}

pub fn q1() -> TreePatternQuery {
    crate::pattern::parse_query(Q1, &projects_schema()).expect("Q1 parses")
}

pub fn q2() -> TreePatternQuery {
    crate::pattern::parse_query(Q2, &projects_schema()).expect("Q2 parses")
}
