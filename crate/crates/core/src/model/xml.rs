//! Canonical warehouse XML.
//!
//! ```xml
//! <w>
//!   <fact>
//!     <dim name="project">
//!       <lvl name="Project" v="A">
//!         <lvl name="Team" v="1"/>
//!       </lvl>
//!     </dim>
//!     <msr name="cost" v="1000"/>
//!   </fact>
//! </w>
//! ```
//!
//! Output is UTF-8, two-space indented, one element per line, newline
//! terminated. Attribute order is fixed per element kind; member attributes
//! on `lvl` follow `name` and `v` in key order.

use std::io::BufRead;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use crate::error::{Error, Result};
use crate::model::number::parse_number;
use crate::model::schema::{HierarchySchema, LevelPos, WarehouseSchema};
use crate::model::tree::{MDDataTree, Node, NodeId, NodeKind};
use crate::pattern::query::AggFn;

pub fn parse_warehouse(xml: &[u8], schema: &WarehouseSchema) -> Result<MDDataTree> {
    parse_warehouse_from(xml, schema)
}

/// Streaming parse: the document is consumed event by event and only the tree
/// under construction is held in memory.
pub fn parse_warehouse_from<R: BufRead>(input: R, schema: &WarehouseSchema) -> Result<MDDataTree> {
    let mut reader = Reader::from_reader(input);
    reader.config_mut().trim_text(true);
    let mut builder = Builder::new(schema);
    let mut buf = Vec::new();
    loop {
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| Error::XmlSyntax(format!("{e} at byte {}", reader.error_position())))?;
        match event {
            Event::Start(e) => builder.open(&e, false)?,
            Event::Empty(e) => builder.open(&e, true)?,
            Event::End(_) => builder.close(),
            Event::Text(t) => {
                let text = t.unescape().map_err(|e| Error::XmlSyntax(e.to_string()))?;
                if !text.trim().is_empty() {
                    return Err(builder.shape("unexpected text content"));
                }
            }
            Event::CData(_) => return Err(builder.shape("unexpected CDATA")),
            Event::Eof => break,
            Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => {}
        }
        buf.clear();
    }
    builder.finish()
}

struct Frame {
    id: NodeId,
    segment: String,
    facts_seen: usize,
    /// Dimension index and level position, for dimension and level frames.
    dim: Option<usize>,
    pos: Option<LevelPos>,
}

struct Builder<'s> {
    schema: &'s WarehouseSchema,
    tree: Option<MDDataTree>,
    stack: Vec<Frame>,
    closed_root: bool,
}

impl<'s> Builder<'s> {
    fn new(schema: &'s WarehouseSchema) -> Self {
        Builder { schema, tree: None, stack: Vec::new(), closed_root: false }
    }

    fn path(&self) -> String {
        if self.stack.is_empty() {
            return "/".to_string();
        }
        self.stack.iter().map(|f| format!("/{}", f.segment)).collect()
    }

    fn shape(&self, message: impl Into<String>) -> Error {
        Error::ShapeViolation { path: self.path(), message: message.into() }
    }

    fn attrs(&self, e: &BytesStart<'_>) -> Result<Vec<(String, String)>> {
        let mut out: Vec<(String, String)> = Vec::new();
        for a in e.attributes() {
            let a = a.map_err(|err| Error::XmlSyntax(err.to_string()))?;
            let key = std::str::from_utf8(a.key.as_ref())
                .map_err(|err| Error::XmlSyntax(err.to_string()))?
                .to_string();
            let value = a
                .unescape_value()
                .map_err(|err| Error::XmlSyntax(err.to_string()))?
                .into_owned();
            out.push((key, value));
        }
        Ok(out)
    }

    fn open(&mut self, e: &BytesStart<'_>, empty: bool) -> Result<()> {
        let name = std::str::from_utf8(e.name().as_ref())
            .map_err(|err| Error::XmlSyntax(err.to_string()))?
            .to_string();
        let mut attrs = self.attrs(e)?;
        let take = |attrs: &mut Vec<(String, String)>, key: &str| -> Option<String> {
            let i = attrs.iter().position(|(k, _)| k == key)?;
            Some(attrs.remove(i).1)
        };

        let parent_kind = self
            .stack
            .last()
            .map(|f| self.tree.as_ref().expect("tree exists").node(f.id).kind);

        let (node, segment, dim, pos) = match (parent_kind, name.as_str()) {
            (None, "w") => {
                if self.closed_root {
                    return Err(Error::XmlSyntax("content after the root element".into()));
                }
                if !attrs.is_empty() {
                    return Err(self.shape("`w` takes no attributes"));
                }
                self.tree = Some(MDDataTree::new_warehouse());
                self.stack.push(Frame {
                    id: NodeId::ROOT,
                    segment: "w".into(),
                    facts_seen: 0,
                    dim: None,
                    pos: None,
                });
                if empty {
                    self.close();
                }
                return Ok(());
            }
            (None, other) => return Err(self.shape(format!("root must be `w`, found `{other}`"))),
            (Some(NodeKind::Warehouse), "fact") => {
                if !attrs.is_empty() {
                    return Err(self.shape("`fact` takes no attributes"));
                }
                let frame = self.stack.last_mut().expect("root frame");
                frame.facts_seen += 1;
                let segment = format!("fact[{}]", frame.facts_seen);
                (Node::fact(), segment, None, None)
            }
            (Some(NodeKind::Fact), "dim") => {
                let dim_name = take(&mut attrs, "name")
                    .ok_or_else(|| self.shape("`dim` requires a name"))?;
                if !attrs.is_empty() {
                    return Err(self.shape("unexpected attribute on `dim`"));
                }
                let index = self
                    .schema
                    .dimension_index(&dim_name)
                    .ok_or_else(|| self.shape(format!("unknown dimension {dim_name:?}")))?;
                let parent = self.stack.last().expect("fact frame").id;
                if self.tree.as_ref().expect("tree").dimension_of(parent, &dim_name).is_some() {
                    return Err(self.shape(format!("dimension {dim_name:?} linked twice")));
                }
                let segment = format!("dim[{dim_name}]");
                (Node::dimension(dim_name), segment, Some(index), None)
            }
            (Some(NodeKind::Fact), "msr") => {
                let label = take(&mut attrs, "name")
                    .ok_or_else(|| self.shape("`msr` requires a name"))?;
                let value =
                    take(&mut attrs, "v").ok_or_else(|| self.shape("`msr` requires a value"))?;
                if !attrs.is_empty() {
                    return Err(self.shape("unexpected attribute on `msr`"));
                }
                if !self.schema.has_measure(&label) {
                    return Err(self.shape(format!("unknown measure {label:?}")));
                }
                if parse_number(&value).is_none() {
                    return Err(Error::DomainViolation { level: label, value });
                }
                let segment = format!("msr[{label}]");
                (Node::measure(label, value), segment, None, None)
            }
            (Some(NodeKind::Fact), "agg") => {
                let func = take(&mut attrs, "fn").ok_or_else(|| self.shape("`agg` requires fn"))?;
                let measure = take(&mut attrs, "measure")
                    .ok_or_else(|| self.shape("`agg` requires a measure"))?;
                let value = take(&mut attrs, "v").unwrap_or_default();
                let func: AggFn = func
                    .parse()
                    .map_err(|_| self.shape(format!("unknown aggregation function {func:?}")))?;
                if measure != "*" && !self.schema.has_measure(&measure) {
                    return Err(self.shape(format!("unknown measure {measure:?}")));
                }
                let mut node = Node::aggregate(measure.clone(), value.clone())
                    .with_attr("fn", func.as_str());
                if !value.is_empty() && parse_number(&value).is_none() {
                    return Err(Error::DomainViolation { level: measure, value });
                }
                for (k, v) in attrs {
                    if func != AggFn::Avg || !(k == "sum" || k == "count") || parse_number(&v).is_none() {
                        return Err(self.shape(format!("unexpected attribute {k:?} on `agg`")));
                    }
                    node.set_attr(k, v);
                }
                let segment = format!("agg[{}({measure})]", func.as_str());
                (node, segment, None, None)
            }
            (Some(NodeKind::Dimension), "lvl") | (Some(NodeKind::Level), "lvl") => {
                let frame = self.stack.last().expect("parent frame");
                let dim_index = frame.dim.expect("dimension context");
                let hierarchy = &self.schema.dimensions[dim_index];
                let label = take(&mut attrs, "name")
                    .ok_or_else(|| self.shape("`lvl` requires a name"))?;
                let value =
                    take(&mut attrs, "v").ok_or_else(|| self.shape("`lvl` requires a value"))?;
                let pos = hierarchy.position(&label).ok_or_else(|| {
                    self.shape(format!("unknown level {label:?} in dimension {:?}", hierarchy.name))
                })?;
                if let Some(parent_pos) = frame.pos {
                    if pos.index <= parent_pos.index {
                        return Err(self.shape(format!(
                            "level {label:?} does not roll up from {:?}",
                            hierarchy.level(parent_pos.index).name
                        )));
                    }
                }
                check_level_value(hierarchy, pos, &label, &value)?;
                let level = hierarchy.level(pos.index);
                let mut node = Node::level(label.clone(), value.clone());
                for (k, v) in attrs {
                    if pos.fused || !level.member_attributes.contains(&k) {
                        return Err(self.shape(format!("undeclared member attribute {k:?}")));
                    }
                    node.set_attr(k, v);
                }
                let segment = format!("{label}[{value}]");
                (node, segment, Some(dim_index), Some(pos))
            }
            (Some(_), other) => {
                return Err(self.shape(format!("element `{other}` is not allowed here")))
            }
        };

        let tree = self.tree.as_mut().expect("tree");
        let parent = self.stack.last().expect("parent").id;
        let id = tree.add_child(parent, node);
        self.stack.push(Frame { id, segment, facts_seen: 0, dim, pos });
        if empty {
            self.close();
        }
        Ok(())
    }

    fn close(&mut self) {
        self.stack.pop();
        if self.stack.is_empty() {
            self.closed_root = true;
        }
    }

    fn finish(self) -> Result<MDDataTree> {
        if !self.stack.is_empty() {
            return Err(Error::XmlSyntax("unexpected end of document".into()));
        }
        self.tree.ok_or_else(|| Error::XmlSyntax("document has no root element".into()))
    }
}

fn check_level_value(h: &HierarchySchema, pos: LevelPos, label: &str, value: &str) -> Result<()> {
    if h.level(pos.index).admits(value) {
        Ok(())
    } else {
        Err(Error::DomainViolation { level: label.to_string(), value: value.to_string() })
    }
}

pub fn serialize_warehouse(tree: &MDDataTree) -> Vec<u8> {
    serialize_to_string(tree).into_bytes()
}

pub fn serialize_to_string(tree: &MDDataTree) -> String {
    let mut out = String::with_capacity(tree.len() * 48);
    write_node(tree, tree.root(), 0, &mut out);
    out
}

fn write_node(tree: &MDDataTree, id: NodeId, depth: usize, out: &mut String) {
    let node = tree.node(id);
    for _ in 0..depth {
        out.push_str("  ");
    }
    let tag = match node.kind {
        NodeKind::Warehouse => "w",
        NodeKind::Fact => "fact",
        NodeKind::Dimension => "dim",
        NodeKind::Level => "lvl",
        NodeKind::Measure => "msr",
        NodeKind::Aggregate => "agg",
    };
    out.push('<');
    out.push_str(tag);
    match node.kind {
        NodeKind::Warehouse | NodeKind::Fact => {}
        NodeKind::Dimension => push_attr(out, "name", &node.label),
        NodeKind::Level | NodeKind::Measure => {
            push_attr(out, "name", &node.label);
            push_attr(out, "v", &node.value);
            for (k, v) in &node.attrs {
                push_attr(out, k, v);
            }
        }
        NodeKind::Aggregate => {
            push_attr(out, "fn", node.attr("fn").unwrap_or(""));
            push_attr(out, "measure", &node.label);
            push_attr(out, "v", &node.value);
            for (k, v) in node.attrs.iter().filter(|(k, _)| k != "fn") {
                push_attr(out, k, v);
            }
        }
    }
    let children = tree.children(id);
    if children.is_empty() {
        out.push_str("/>\n");
        return;
    }
    out.push_str(">\n");
    for &c in children {
        write_node(tree, c, depth + 1, out);
    }
    for _ in 0..depth {
        out.push_str("  ");
    }
    out.push_str("</");
    out.push_str(tag);
    out.push_str(">\n");
}

fn push_attr(out: &mut String, key: &str, value: &str) {
    out.push(' ');
    out.push_str(key);
    out.push_str("=\"");
    for ch in value.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out.push('"');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{projects_schema, projects_warehouse};

    fn element_count(xml: &str) -> usize {
        xml.matches('<').count() - xml.matches("</").count()
    }

    #[test]
    fn empty_warehouse() {
        let s = projects_schema();
        let t = parse_warehouse(b"<w/>", &s).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.fact_count(), 0);
        assert_eq!(serialize_to_string(&t), "<w/>\n");
    }

    #[test]
    fn projects_round_trip_and_shape() {
        let s = projects_schema();
        let t = projects_warehouse();
        let xml = serialize_to_string(&t);
        let back = parse_warehouse(xml.as_bytes(), &s).unwrap();
        assert_eq!(back, t);
        assert_eq!(serialize_to_string(&back), xml);
        assert_eq!(back.len(), element_count(&xml));
        assert_eq!(back.fact_count(), 4);

        // Project D links straight to a branch.
        let d = back.facts().nth(3).unwrap();
        let dim = back.dimension_of(d, "project").unwrap();
        let project = back.children(dim)[0];
        assert_eq!(back.node(project).value, "D");
        let above = back.children(project);
        assert_eq!(above.len(), 1);
        assert_eq!(back.node(above[0]).label, "Branch");
    }

    #[test]
    fn escapes_attribute_values() {
        let mut s = projects_schema();
        s.dimensions[1].levels[0].domain =
            crate::model::schema::Domain::Values(vec!["a\"<&>b".into()]);
        let mut t = MDDataTree::new_warehouse();
        let f = t.add_child(t.root(), Node::fact());
        let d = t.add_child(f, Node::dimension("customer"));
        t.add_child(d, Node::level("Customer", "a\"<&>b"));
        let xml = serialize_to_string(&t);
        assert!(xml.contains("v=\"a&quot;&lt;&amp;&gt;b\""));
        assert_eq!(parse_warehouse(xml.as_bytes(), &s).unwrap(), t);
    }

    #[test]
    fn syntax_errors() {
        let s = projects_schema();
        for bad in ["<w><fact></w>", "<w>", "", "<w/><w/>", "<w><fact a='1></fact></w>"] {
            assert!(
                matches!(parse_warehouse(bad.as_bytes(), &s), Err(Error::XmlSyntax(_))),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn shape_violations_carry_paths() {
        let s = projects_schema();
        let err = parse_warehouse(br#"<w><msr name="cost" v="1"/></w>"#, &s).unwrap_err();
        assert_eq!(
            err,
            Error::ShapeViolation {
                path: "/w".into(),
                message: "element `msr` is not allowed here".into()
            }
        );
        let err = parse_warehouse(
            br#"<w><fact/><fact><dim name="project"><lvl name="Team" v="1"><lvl name="Project" v="A"/></lvl></dim></fact></w>"#,
            &s,
        )
        .unwrap_err();
        match err {
            Error::ShapeViolation { path, .. } => {
                assert_eq!(path, "/w/fact[2]/dim[project]/Team[1]")
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_warehouse(b"<root/>", &s),
            Err(Error::ShapeViolation { .. })
        ));
        assert!(matches!(
            parse_warehouse(b"<w>text</w>", &s),
            Err(Error::ShapeViolation { .. })
        ));
    }

    #[test]
    fn domain_violations() {
        let s = projects_schema();
        let err = parse_warehouse(
            br#"<w><fact><dim name="project"><lvl name="Team" v="9"/></dim></fact></w>"#,
            &s,
        )
        .unwrap_err();
        assert_eq!(err, Error::DomainViolation { level: "Team".into(), value: "9".into() });
        let err =
            parse_warehouse(br#"<w><fact><msr name="cost" v="lots"/></fact></w>"#, &s).unwrap_err();
        assert!(matches!(err, Error::DomainViolation { .. }));
    }

    #[test]
    fn accepts_placeholders_fused_levels_and_aggregates() {
        let s = projects_schema();
        let xml = br#"<w><fact>
            <dim name="project"><lvl name="Team_fused" v="1-2"><lvl name="Branch" v="Other"/></lvl></dim>
            <agg fn="avg" measure="cost" v="5" sum="10" count="2"/>
            <agg fn="count" measure="*" v="2"/>
        </fact></w>"#;
        let t = parse_warehouse(xml, &s).unwrap();
        let back = parse_warehouse(&serialize_warehouse(&t), &s).unwrap();
        assert_eq!(t, back);
    }
}
