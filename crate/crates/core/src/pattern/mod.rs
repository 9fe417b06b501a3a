pub mod formula;
pub mod matching;
pub mod query;
pub mod text;

pub use formula::{parse_formula, BoundFormula, Cmp, Formula, Predicate};
pub use matching::match_pattern;
pub use query::{AggFn, Aggregation, GroupingElement, TreePatternQuery, ALL_FACTS};
pub use text::{parse_query, parse_query_text, print_query};
