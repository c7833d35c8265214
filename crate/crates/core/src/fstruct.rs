//! Labeled, re-entrant f-structures: parsing, path sets and R-relation
//! extraction.
//!
//! An f-structure is a rooted attribute-value graph. Every node carries a
//! mandatory label; re-entrancy is written as a bare label reference. Set
//! nodes hold conjuncts; membership is exposed through the reserved
//! attribute `CONJ`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

/// Reserved attribute naming set membership.
pub const CONJ: &str = "CONJ";

/// An attribute name, normalized to upper case.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AttrName(String);

impl AttrName {
    pub fn new(name: &str) -> AttrName {
        AttrName(name.to_uppercase())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_conj(&self) -> bool {
        self.0 == CONJ
    }
}

impl fmt::Display for AttrName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A node label (the paper's f, g, h, f1, ...).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(String);

impl Label {
    pub fn new(id: impl Into<String>) -> Label {
        Label(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The value at an attribute: an inline atom, an inline semantic form, or
/// an edge to another labeled node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    /// `"atom"` — an atomic value.
    Atomic(String),
    /// `'semantic-form'` — an opaque predicate or specifier name, used
    /// only as a lexicon key.
    SemForm(String),
    /// Edge to another node, by label.
    Node(Label),
}

/// One f-structure node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    /// Ordinary attribute-value node. Attribute order is input order.
    Complex { attrs: Vec<(AttrName, Value)> },
    /// Set node of conjuncts. `conj` is the lexical anchor for the
    /// conjunction (from `CONJTYPE 'and'` in the input), if any.
    Set { conj: Option<String>, members: Vec<Label> },
}

impl Node {
    pub fn get(&self, attr: &str) -> Option<&Value> {
        match self {
            Node::Complex { attrs } => {
                let want = AttrName::new(attr);
                attrs.iter().find(|(a, _)| *a == want).map(|(_, v)| v)
            }
            Node::Set { .. } => None,
        }
    }

    /// The node's PRED semantic form, if any.
    pub fn pred(&self) -> Option<&str> {
        match self.get("PRED") {
            Some(Value::SemForm(p)) => Some(p),
            _ => None,
        }
    }

    /// The node's SPEC semantic form, if any.
    pub fn spec(&self) -> Option<&str> {
        match self.get("SPEC") {
            Some(Value::SemForm(p)) => Some(p),
            _ => None,
        }
    }
}

/// A rooted, acyclic, fully labeled f-structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FStructure {
    pub root: Label,
    /// Node records, keyed by label. Iteration uses `order`.
    pub nodes: HashMap<Label, Node>,
    /// Labels in document (definition) order.
    pub order: Vec<Label>,
}

/// One step of a path from the root. CONJ steps carry the member index so
/// that paths through distinct conjuncts stay distinct.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathStep {
    pub attr: AttrName,
    pub member_index: Option<usize>,
}

impl fmt::Display for PathStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.member_index {
            Some(i) => write!(f, "{}:{}", self.attr, i + 1),
            None => write!(f, "{}", self.attr),
        }
    }
}

/// All root paths reaching one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSet {
    pub owner: Label,
    pub paths: Vec<Vec<PathStep>>,
}

/// The fact R(F, P, G): path set G extends path set F by the single
/// attribute P.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RRelation {
    pub parent: Label,
    pub attr: AttrName,
    pub child: Label,
}

impl fmt::Display for RRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R({},{},{})", self.parent, self.attr, self.child)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FsError {
    #[error("f-structure syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("duplicate definition of label `{0}`")]
    DuplicateLabel(String),
    #[error("reference to undefined label `{0}`")]
    UndefinedLabel(String),
    #[error("cycle detected through label `{0}`")]
    Cycle(String),
    #[error("duplicate attribute `{attr}` on node `{label}`")]
    DuplicateAttr { label: String, attr: String },
    #[error("duplicate member `{member}` in set node `{label}`")]
    DuplicateMember { label: String, member: String },
}

impl FStructure {
    /// Every (parent, attr-or-CONJ, child, member-index) edge, in document
    /// order.
    pub fn edges(&self) -> Vec<(Label, AttrName, Label, Option<usize>)> {
        let mut out = Vec::new();
        for label in &self.order {
            match &self.nodes[label] {
                Node::Complex { attrs } => {
                    for (a, v) in attrs {
                        if let Value::Node(child) = v {
                            out.push((label.clone(), a.clone(), child.clone(), None));
                        }
                    }
                }
                Node::Set { members, .. } => {
                    for (i, m) in members.iter().enumerate() {
                        out.push((label.clone(), AttrName::new(CONJ), m.clone(), Some(i)));
                    }
                }
            }
        }
        out
    }
}

/// For each label, the complete set of root paths reaching it. The root
/// maps to the singleton empty path.
pub fn path_sets(fs: &FStructure) -> BTreeMap<Label, PathSet> {
    let mut acc: BTreeMap<Label, Vec<Vec<PathStep>>> = BTreeMap::new();
    let mut stack: Vec<(Label, Vec<PathStep>)> = vec![(fs.root.clone(), Vec::new())];
    while let Some((label, path)) = stack.pop() {
        acc.entry(label.clone()).or_default().push(path.clone());
        match &fs.nodes[&label] {
            Node::Complex { attrs } => {
                for (a, v) in attrs {
                    if let Value::Node(child) = v {
                        let mut p = path.clone();
                        p.push(PathStep { attr: a.clone(), member_index: None });
                        stack.push((child.clone(), p));
                    }
                }
            }
            Node::Set { members, .. } => {
                for (i, m) in members.iter().enumerate() {
                    let mut p = path.clone();
                    p.push(PathStep { attr: AttrName::new(CONJ), member_index: Some(i) });
                    stack.push((m.clone(), p));
                }
            }
        }
    }
    acc.into_iter()
        .map(|(label, mut paths)| {
            paths.sort();
            paths.dedup();
            (label.clone(), PathSet { owner: label, paths })
        })
        .collect()
}

/// One R-relation per attribute edge and per set-membership edge.
pub fn extract_r_relations(fs: &FStructure) -> Vec<RRelation> {
    fs.edges()
        .into_iter()
        .map(|(parent, attr, child, _)| RRelation { parent, attr, child })
        .collect()
}

// ---------------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------------

struct FsParser<'a> {
    src: &'a str,
    pos: usize,
    nodes: HashMap<Label, Node>,
    order: Vec<Label>,
    refs: Vec<Label>,
}

impl<'a> FsParser<'a> {
    fn new(src: &'a str) -> Self {
        FsParser { src, pos: 0, nodes: HashMap::new(), order: Vec::new(), refs: Vec::new() }
    }

    fn line_col(&self) -> (usize, usize) {
        let mut line = 1;
        let mut col = 1;
        for c in self.src[..self.pos].chars() {
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    }

    fn err(&self, msg: &str) -> FsError {
        let (line, col) = self.line_col();
        FsError::Syntax { line, col, msg: msg.to_string() }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        loop {
            while let Some(c) = self.peek() {
                if c.is_whitespace() {
                    self.bump();
                } else {
                    break;
                }
            }
            // line comments with `//`
            if self.src[self.pos..].starts_with("//") {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), FsError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<String, FsError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_alphanumeric() || c == '_' => {
                self.bump();
            }
            _ => return Err(self.err("expected identifier")),
        }
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' {
                self.bump();
            } else {
                break;
            }
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn quoted(&mut self, delim: char) -> Result<String, FsError> {
        self.expect(delim)?;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == delim {
                let s = self.src[start..self.pos].to_string();
                self.bump();
                return Ok(s);
            }
            self.bump();
        }
        Err(self.err("unterminated quoted form"))
    }

    /// `label : [...]` or `label : {...}`; returns the label.
    fn node_def(&mut self) -> Result<Label, FsError> {
        let name = self.ident()?;
        let label = Label::new(name.clone());
        self.expect(':')?;
        if self.nodes.contains_key(&label) {
            return Err(FsError::DuplicateLabel(name));
        }
        // record document order before descending into the body so parents
        // precede the nodes nested inside them
        self.order.push(label.clone());
        self.skip_ws();
        let node = match self.peek() {
            Some('[') => self.complex_body(&label)?,
            Some('{') => self.set_body(&label)?,
            _ => return Err(self.err("expected `[` or `{` after label")),
        };
        // a nested definition of the same label may have completed while
        // this body was being parsed
        if self.nodes.contains_key(&label) {
            return Err(FsError::DuplicateLabel(name));
        }
        self.nodes.insert(label.clone(), node);
        Ok(label)
    }

    fn complex_body(&mut self, label: &Label) -> Result<Node, FsError> {
        self.expect('[')?;
        let mut attrs: Vec<(AttrName, Value)> = Vec::new();
        loop {
            if self.eat(']') {
                break;
            }
            let attr = AttrName::new(&self.ident()?);
            if attrs.iter().any(|(a, _)| *a == attr) {
                return Err(FsError::DuplicateAttr {
                    label: label.as_str().to_string(),
                    attr: attr.as_str().to_string(),
                });
            }
            if attr.is_conj() {
                return Err(self.err("attribute CONJ is reserved for set membership"));
            }
            self.skip_ws();
            let value = match self.peek() {
                Some('\'') => Value::SemForm(self.quoted('\'')?),
                Some('"') => Value::Atomic(self.quoted('"')?),
                Some(c) if c.is_alphanumeric() || c == '_' => {
                    // nested definition or bare reference
                    let save = self.pos;
                    let name = self.ident()?;
                    self.skip_ws();
                    if self.peek() == Some(':') {
                        self.pos = save;
                        Value::Node(self.node_def()?)
                    } else {
                        let l = Label::new(name);
                        self.refs.push(l.clone());
                        Value::Node(l)
                    }
                }
                _ => return Err(self.err("expected attribute value")),
            };
            attrs.push((attr, value));
        }
        Ok(Node::Complex { attrs })
    }

    fn set_body(&mut self, label: &Label) -> Result<Node, FsError> {
        self.expect('{')?;
        self.skip_ws();
        // optional `CONJTYPE 'and'` before the members
        let mut conj = None;
        let save = self.pos;
        if let Ok(word) = self.ident() {
            if word.eq_ignore_ascii_case("CONJTYPE") {
                conj = Some(self.quoted('\'')?);
            } else {
                self.pos = save;
            }
        } else {
            self.pos = save;
        }
        let mut members: Vec<Label> = Vec::new();
        loop {
            if self.eat('}') {
                break;
            }
            if !members.is_empty() && !self.eat(',') {
                return Err(self.err("expected `,` or `}` in set node"));
            }
            self.skip_ws();
            let save = self.pos;
            let name = self.ident()?;
            self.skip_ws();
            let member = if self.peek() == Some(':') {
                self.pos = save;
                self.node_def()?
            } else {
                let l = Label::new(name);
                self.refs.push(l.clone());
                l
            };
            if members.contains(&member) {
                return Err(FsError::DuplicateMember {
                    label: label.as_str().to_string(),
                    member: member.as_str().to_string(),
                });
            }
            members.push(member);
        }
        Ok(Node::Set { conj, members })
    }
}

/// Parse an f-structure document.
pub fn parse_fstructure(text: &str) -> Result<FStructure, FsError> {
    let mut p = FsParser::new(text);
    p.skip_ws();
    let root = p.node_def()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("trailing input after root f-structure"));
    }
    for r in &p.refs {
        if !p.nodes.contains_key(r) {
            return Err(FsError::UndefinedLabel(r.as_str().to_string()));
        }
    }
    let fs = FStructure { root, nodes: p.nodes, order: p.order };
    check_acyclic(&fs)?;
    Ok(fs)
}

fn check_acyclic(fs: &FStructure) -> Result<(), FsError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    fn visit(
        fs: &FStructure,
        label: &Label,
        marks: &mut HashMap<Label, Mark>,
    ) -> Result<(), FsError> {
        match marks.get(label) {
            Some(Mark::Open) => return Err(FsError::Cycle(label.as_str().to_string())),
            Some(Mark::Done) => return Ok(()),
            None => {}
        }
        marks.insert(label.clone(), Mark::Open);
        let children: Vec<Label> = match &fs.nodes[label] {
            Node::Complex { attrs } => attrs
                .iter()
                .filter_map(|(_, v)| match v {
                    Value::Node(l) => Some(l.clone()),
                    _ => None,
                })
                .collect(),
            Node::Set { members, .. } => members.clone(),
        };
        for c in children {
            visit(fs, &c, marks)?;
        }
        marks.insert(label.clone(), Mark::Done);
        Ok(())
    }
    let mut marks = HashMap::new();
    visit(fs, &fs.root, &mut marks)
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

/// Serialize to the input text format. The first reference to each node is
/// an inline definition; later references are bare labels.
pub fn serialize(fs: &FStructure) -> String {
    let mut out = String::new();
    let mut defined: HashSet<Label> = HashSet::new();
    write_node(fs, &fs.root, &mut defined, &mut out);
    out
}

fn write_node(fs: &FStructure, label: &Label, defined: &mut HashSet<Label>, out: &mut String) {
    if defined.contains(label) {
        out.push_str(label.as_str());
        return;
    }
    defined.insert(label.clone());
    out.push_str(label.as_str());
    out.push(':');
    match &fs.nodes[label] {
        Node::Complex { attrs } => {
            out.push_str("[ ");
            for (a, v) in attrs {
                out.push_str(a.as_str());
                out.push(' ');
                match v {
                    Value::SemForm(s) => {
                        out.push('\'');
                        out.push_str(s);
                        out.push('\'');
                    }
                    Value::Atomic(s) => {
                        out.push('"');
                        out.push_str(s);
                        out.push('"');
                    }
                    Value::Node(child) => write_node(fs, child, defined, out),
                }
                out.push(' ');
            }
            out.push(']');
        }
        Node::Set { conj, members } => {
            out.push_str("{ ");
            if let Some(c) = conj {
                out.push_str("CONJTYPE '");
                out.push_str(c);
                out.push_str("' ");
            }
            for (i, m) in members.iter().enumerate() {
                if i > 0 {
                    out.push_str(" , ");
                }
                write_node(fs, m, defined, out);
            }
            out.push_str(" }");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const STRUCT5: &str =
        "f:[ PRED 'support' SUBJ g:[PRED 'Bill'] OBJ h:[PRED 'nafta'] ]";

    const STRUCT16: &str = "f : { CONJTYPE 'and'
        f1:[ PRED 'support' SUBJ g:[PRED 'Bill'] OBJ h:[PRED 'nafta'] ] ,
        f2:[ PRED 'oppose' SUBJ i:[PRED 'Hillary'] OBJ h ] }";

    const STRUCT20: &str = "f : { CONJTYPE 'and'
        f1:[ PRED 'want' SUBJ g:[PRED 'Hillary'] OBJ h:[PRED 'candidate' SPEC 'two'] ],
        f2:[ PRED 'find' SUBJ g OBJ h ],
        f3:[ PRED 'support' SUBJ g OBJ h ] }";

    #[test]
    fn parse_basic_structure() {
        let fs = parse_fstructure(STRUCT5).unwrap();
        assert_eq!(fs.root, Label::new("f"));
        let edges = fs.edges();
        assert_eq!(edges.len(), 2);
        assert_eq!(edges[0].1, AttrName::new("SUBJ"));
        assert_eq!(edges[0].2, Label::new("g"));
        assert_eq!(edges[1].1, AttrName::new("OBJ"));
        assert_eq!(edges[1].2, Label::new("h"));
        assert_eq!(fs.nodes[&Label::new("f")].pred(), Some("support"));
    }

    #[test]
    fn parse_single_node() {
        let fs = parse_fstructure("f:[PRED 'Bill']").unwrap();
        assert_eq!(fs.nodes.len(), 1);
        assert!(fs.edges().is_empty());
        assert!(extract_r_relations(&fs).is_empty());
    }

    #[test]
    fn parse_shared_object() {
        let fs = parse_fstructure(STRUCT16).unwrap();
        let into_h: Vec<_> = fs
            .edges()
            .into_iter()
            .filter(|(_, _, c, _)| *c == Label::new("h"))
            .collect();
        assert_eq!(into_h.len(), 2);
        assert_eq!(into_h[0].0, Label::new("f1"));
        assert_eq!(into_h[1].0, Label::new("f2"));
    }

    #[test]
    fn path_sets_basic() {
        let fs = parse_fstructure(STRUCT5).unwrap();
        let ps = path_sets(&fs);
        assert_eq!(ps[&Label::new("f")].paths, vec![Vec::<PathStep>::new()]);
        let g = &ps[&Label::new("g")].paths;
        assert_eq!(g.len(), 1);
        assert_eq!(g[0][0].to_string(), "SUBJ");
        let h = &ps[&Label::new("h")].paths;
        assert_eq!(h.len(), 1);
        assert_eq!(h[0][0].to_string(), "OBJ");
    }

    #[test]
    fn path_sets_shared() {
        let fs = parse_fstructure(STRUCT16).unwrap();
        let ps = path_sets(&fs);
        let h: Vec<String> = ps[&Label::new("h")]
            .paths
            .iter()
            .map(|p| p.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        assert_eq!(h, vec!["CONJ:1,OBJ", "CONJ:2,OBJ"]);
    }

    #[test]
    fn path_sets_three_way() {
        let fs = parse_fstructure(STRUCT20).unwrap();
        let ps = path_sets(&fs);
        assert_eq!(ps[&Label::new("g")].paths.len(), 3);
        assert_eq!(ps[&Label::new("h")].paths.len(), 3);
    }

    #[test]
    fn r_relations_basic() {
        let fs = parse_fstructure(STRUCT5).unwrap();
        let rs = extract_r_relations(&fs);
        assert_eq!(
            rs,
            vec![
                RRelation {
                    parent: Label::new("f"),
                    attr: AttrName::new("SUBJ"),
                    child: Label::new("g")
                },
                RRelation {
                    parent: Label::new("f"),
                    attr: AttrName::new("OBJ"),
                    child: Label::new("h")
                },
            ]
        );
    }

    #[test]
    fn r_relations_shared() {
        let fs = parse_fstructure(STRUCT16).unwrap();
        let rs: Vec<String> = extract_r_relations(&fs).iter().map(|r| r.to_string()).collect();
        assert_eq!(
            rs,
            vec![
                "R(f,CONJ,f1)",
                "R(f,CONJ,f2)",
                "R(f1,SUBJ,g)",
                "R(f1,OBJ,h)",
                "R(f2,SUBJ,i)",
                "R(f2,OBJ,h)",
            ]
        );
    }

    #[test]
    fn edge_count_matches_relations() {
        for src in [STRUCT5, STRUCT16, STRUCT20] {
            let fs = parse_fstructure(src).unwrap();
            assert_eq!(fs.edges().len(), extract_r_relations(&fs).len());
        }
    }

    #[test]
    fn path_concatenation_subset() {
        // for every edge (F,P,G): paths(F) ++ [P] is a subset of paths(G)
        for src in [STRUCT5, STRUCT16, STRUCT20] {
            let fs = parse_fstructure(src).unwrap();
            let ps = path_sets(&fs);
            for (parent, attr, child, idx) in fs.edges() {
                for p in &ps[&parent].paths {
                    let mut q = p.clone();
                    q.push(PathStep { attr: attr.clone(), member_index: idx });
                    assert!(
                        ps[&child].paths.contains(&q),
                        "missing path {q:?} on {child}"
                    );
                }
            }
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_fstructure("f:[ SUBJ g:[PRED 'a'] OBJ g:[PRED 'b'] ]"),
            Err(FsError::DuplicateLabel(_))
        ));
        assert!(matches!(
            parse_fstructure("f:[ SUBJ g ]"),
            Err(FsError::UndefinedLabel(_))
        ));
        assert!(matches!(
            parse_fstructure("f:[ SUBJ g:[ OBJ f ] ]"),
            Err(FsError::UndefinedLabel(_)) | Err(FsError::Cycle(_))
        ));
        assert!(matches!(parse_fstructure("f:[ PRED "), Err(FsError::Syntax { .. })));
    }

    #[test]
    fn cycle_detected() {
        // re-entrant back edge to an already-defined ancestor
        let src = "f:[ SUBJ g:[ COMP h:[ TOP g ] ] ]";
        let err = parse_fstructure(src).unwrap_err();
        assert!(matches!(err, FsError::Cycle(_)), "{err:?}");
    }

    #[test]
    fn roundtrip_isomorphic() {
        for src in [STRUCT5, STRUCT16, STRUCT20] {
            let fs = parse_fstructure(src).unwrap();
            let fs2 = parse_fstructure(&serialize(&fs)).unwrap();
            assert_eq!(fs, fs2);
        }
    }
}
