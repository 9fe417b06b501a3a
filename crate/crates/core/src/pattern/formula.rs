//! Boolean selection formulas over level and measure values.

use std::cmp::Ordering;
use std::fmt;

use rust_decimal::Decimal;

use crate::error::{Error, Result};
use crate::model::number::parse_number;
use crate::model::schema::{member_values, HierarchySchema, WarehouseSchema};
use crate::model::tree::{MDDataTree, NodeId, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    pub fn as_str(self) -> &'static str {
        match self {
            Cmp::Eq => "=",
            Cmp::Ne => "!=",
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }

    pub fn parse(s: &str) -> Option<Cmp> {
        Some(match s {
            "=" | "==" => Cmp::Eq,
            "!=" | "≠" | "<>" => Cmp::Ne,
            "<" => Cmp::Lt,
            "<=" | "≤" => Cmp::Le,
            ">" => Cmp::Gt,
            ">=" | "≥" => Cmp::Ge,
            _ => return None,
        })
    }

    fn holds(self, ord: Ordering) -> bool {
        match self {
            Cmp::Eq => ord == Ordering::Equal,
            Cmp::Ne => ord != Ordering::Equal,
            Cmp::Lt => ord == Ordering::Less,
            Cmp::Le => ord != Ordering::Greater,
            Cmp::Gt => ord == Ordering::Greater,
            Cmp::Ge => ord != Ordering::Less,
        }
    }
}

/// `path cmp literal`. A path is `dimension.Level` or a measure name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub path: String,
    pub cmp: Cmp,
    pub literal: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Atom(Predicate),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(path: impl Into<String>, cmp: Cmp, literal: impl Into<String>) -> Formula {
        Formula::Atom(Predicate { path: path.into(), cmp, literal: literal.into() })
    }

    pub fn and(self, other: Formula) -> Formula {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Formula {
        Formula::Or(Box::new(self), Box::new(other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    pub fn bind<'s>(&self, schema: &'s WarehouseSchema) -> Result<BoundFormula<'s>> {
        Ok(match self {
            Formula::Atom(p) => BoundFormula::Atom(bind_atom(p, schema)?),
            Formula::Not(f) => BoundFormula::Not(Box::new(f.bind(schema)?)),
            Formula::And(a, b) => BoundFormula::And(Box::new(a.bind(schema)?), Box::new(b.bind(schema)?)),
            Formula::Or(a, b) => BoundFormula::Or(Box::new(a.bind(schema)?), Box::new(b.bind(schema)?)),
        })
    }
}

fn bind_atom<'s>(p: &Predicate, schema: &'s WarehouseSchema) -> Result<BoundAtom<'s>> {
    let number = parse_number(&p.literal);
    if let Some((dim, level)) = p.path.split_once('.') {
        let hierarchy = schema.dimension(dim).ok_or_else(|| Error::UnknownPath(p.path.clone()))?;
        let pos = hierarchy.position(level).ok_or_else(|| Error::UnknownPath(p.path.clone()))?;
        if hierarchy.level(pos.index).domain.is_numeric() && p.literal.parse::<i64>().is_err() {
            return Err(Error::TypeMismatch { path: p.path.clone(), literal: p.literal.clone() });
        }
        Ok(BoundAtom {
            target: Target::Level { hierarchy, index: pos.index },
            cmp: p.cmp,
            literal: p.literal.clone(),
            number,
        })
    } else {
        if !schema.has_measure(&p.path) {
            return Err(Error::UnknownPath(p.path.clone()));
        }
        if number.is_none() {
            return Err(Error::TypeMismatch { path: p.path.clone(), literal: p.literal.clone() });
        }
        Ok(BoundAtom { target: Target::Measure(p.path.clone()), cmp: p.cmp, literal: p.literal.clone(), number })
    }
}

#[derive(Debug)]
enum Target<'s> {
    Level { hierarchy: &'s HierarchySchema, index: usize },
    Measure(String),
}

#[derive(Debug)]
pub struct BoundAtom<'s> {
    target: Target<'s>,
    cmp: Cmp,
    literal: String,
    number: Option<Decimal>,
}

/// A formula whose paths have been resolved against a schema.
#[derive(Debug)]
pub enum BoundFormula<'s> {
    Atom(BoundAtom<'s>),
    Not(Box<BoundFormula<'s>>),
    And(Box<BoundFormula<'s>>, Box<BoundFormula<'s>>),
    Or(Box<BoundFormula<'s>>, Box<BoundFormula<'s>>),
}

impl BoundFormula<'_> {
    /// Level atoms hold if any member at the level satisfies them; measure
    /// atoms if any value of the measure (or of an aggregate over it) does.
    pub fn eval(&self, tree: &MDDataTree, fact: NodeId) -> bool {
        match self {
            BoundFormula::Atom(a) => a.eval(tree, fact),
            BoundFormula::Not(f) => !f.eval(tree, fact),
            BoundFormula::And(x, y) => x.eval(tree, fact) && y.eval(tree, fact),
            BoundFormula::Or(x, y) => x.eval(tree, fact) || y.eval(tree, fact),
        }
    }
}

impl BoundAtom<'_> {
    fn test(&self, value: &str) -> bool {
        let ord = match (self.number, parse_number(value)) {
            (Some(lit), Some(v)) => v.cmp(&lit),
            _ => value.as_bytes().cmp(self.literal.as_bytes()),
        };
        self.cmp.holds(ord)
    }

    fn eval(&self, tree: &MDDataTree, fact: NodeId) -> bool {
        match &self.target {
            Target::Measure(name) => tree.children(fact).iter().any(|&c| {
                let n = tree.node(c);
                matches!(n.kind, NodeKind::Measure | NodeKind::Aggregate)
                    && n.label == *name
                    && !n.value.is_empty()
                    && self.test(&n.value)
            }),
            Target::Level { hierarchy, index } => {
                let Some(dim) = tree.dimension_of(fact, &hierarchy.name) else {
                    return false;
                };
                let mut stack: Vec<NodeId> = tree.children(dim).to_vec();
                while let Some(id) = stack.pop() {
                    let n = tree.node(id);
                    match hierarchy.position(&n.label) {
                        Some(p) if p.index == *index => {
                            if member_values(&n.value).any(|v| self.test(v)) {
                                return true;
                            }
                        }
                        Some(p) if p.index < *index => stack.extend(tree.children(id)),
                        _ => {}
                    }
                }
                false
            }
        }
    }
}

fn needs_quotes(s: &str) -> bool {
    s.is_empty()
        || matches!(s, "and" | "or" | "not")
        || s.chars().any(|c| c.is_whitespace() || "()\"\\=!<>≠≤≥".contains(c))
}

pub(crate) fn write_literal(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    if !needs_quotes(s) {
        return f.write_str(s);
    }
    f.write_char('"')?;
    for c in s.chars() {
        if c == '"' || c == '\\' {
            f.write_char('\\')?;
        }
        f.write_char(c)?;
    }
    f.write_char('"')
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn paren(f: &mut fmt::Formatter<'_>, x: &Formula, wrap: bool) -> fmt::Result {
            if wrap {
                write!(f, "({x})")
            } else {
                write!(f, "{x}")
            }
        }
        match self {
            Formula::Atom(p) => {
                write!(f, "{} {} ", p.path, p.cmp.as_str())?;
                write_literal(f, &p.literal)
            }
            Formula::Not(x) => {
                f.write_str("not ")?;
                paren(f, x, !matches!(**x, Formula::Atom(_) | Formula::Not(_)))
            }
            Formula::And(a, b) => {
                paren(f, a, matches!(**a, Formula::Or(..)))?;
                f.write_str(" and ")?;
                paren(f, b, matches!(**b, Formula::Or(..) | Formula::And(..)))
            }
            Formula::Or(a, b) => {
                paren(f, a, false)?;
                f.write_str(" or ")?;
                paren(f, b, matches!(**b, Formula::Or(..)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open,
    Close,
    Cmp(Cmp),
    Word(String),
    Quoted(String),
}

fn tokenize(text: &str) -> std::result::Result<Vec<Token>, String> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '(' {
            chars.next();
            out.push(Token::Open);
        } else if c == ')' {
            chars.next();
            out.push(Token::Close);
        } else if c == '"' {
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    Some('\\') => s.push(chars.next().ok_or("dangling escape")?),
                    Some('"') => break,
                    Some(c) => s.push(c),
                    None => return Err("unterminated string literal".into()),
                }
            }
            out.push(Token::Quoted(s));
        } else if "=!<>≠≤≥".contains(c) {
            let mut op = String::new();
            while let Some(&c) = chars.peek() {
                if "=!<>≠≤≥".contains(c) {
                    op.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(Token::Cmp(Cmp::parse(&op).ok_or_else(|| format!("unknown operator {op:?}"))?));
        } else {
            let mut w = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() || "()\"=!<>≠≤≥".contains(c) {
                    break;
                }
                w.push(c);
                chars.next();
            }
            out.push(Token::Word(w));
        }
    }
    Ok(out)
}

/// Parses `not`/`and`/`or` combinations of `path cmp literal` atoms; `not`
/// binds tighter than `and`, which binds tighter than `or`.
pub fn parse_formula(text: &str) -> std::result::Result<Formula, String> {
    let tokens = tokenize(text)?;
    let mut p = FormulaParser { tokens, at: 0 };
    let f = p.or()?;
    if p.at != p.tokens.len() {
        return Err(format!("unexpected trailing input near token {}", p.at + 1));
    }
    Ok(f)
}

struct FormulaParser {
    tokens: Vec<Token>,
    at: usize,
}

impl FormulaParser {
    fn peek_word(&self, w: &str) -> bool {
        matches!(self.tokens.get(self.at), Some(Token::Word(x)) if x == w)
    }

    fn or(&mut self) -> std::result::Result<Formula, String> {
        let mut left = self.and()?;
        while self.peek_word("or") {
            self.at += 1;
            left = left.or(self.and()?);
        }
        Ok(left)
    }

    fn and(&mut self) -> std::result::Result<Formula, String> {
        let mut left = self.unary()?;
        while self.peek_word("and") {
            self.at += 1;
            left = left.and(self.unary()?);
        }
        Ok(left)
    }

    fn unary(&mut self) -> std::result::Result<Formula, String> {
        if self.peek_word("not") {
            self.at += 1;
            return Ok(self.unary()?.not());
        }
        if self.tokens.get(self.at) == Some(&Token::Open) {
            self.at += 1;
            let f = self.or()?;
            if self.tokens.get(self.at) != Some(&Token::Close) {
                return Err("missing `)`".into());
            }
            self.at += 1;
            return Ok(f);
        }
        let path = match self.tokens.get(self.at) {
            Some(Token::Word(w)) if !matches!(w.as_str(), "and" | "or" | "not") => w.clone(),
            other => return Err(format!("expected a path, found {other:?}")),
        };
        let cmp = match self.tokens.get(self.at + 1) {
            Some(Token::Cmp(c)) => *c,
            other => return Err(format!("expected a comparison after {path}, found {other:?}")),
        };
        let literal = match self.tokens.get(self.at + 2) {
            Some(Token::Word(w)) if !matches!(w.as_str(), "and" | "or" | "not") => w.clone(),
            Some(Token::Quoted(q)) => q.clone(),
            other => return Err(format!("expected a literal after {path} {}, found {other:?}", cmp.as_str())),
        };
        self.at += 3;
        Ok(Formula::atom(path, cmp, literal))
    }
}
