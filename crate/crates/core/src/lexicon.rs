//! Lexical entries: meaning-constructor templates over the metavariable
//! `^`, and their instantiation against a labeled f-structure into the
//! premise multiset of a derivation.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::fstruct::{extract_r_relations, FStructure, Label, Node, RRelation};
use crate::glue::{
    self, free_glue_vars, parse_glue_template, resolve_up, GlueError, GlueFormula,
};
use crate::meaning::Term;

/// Placeholder in determiner templates for the host node's PRED.
pub const RESTR: &str = "%RESTR%";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    Plain,
    /// Determiner entries are keyed on SPEC values and may use `%RESTR%`.
    Det,
}

/// One template of an entry. `banged` templates become unlimited-use
/// premises.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub formula: GlueFormula,
    pub banged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexEntry {
    pub key: String,
    pub kind: EntryKind,
    pub templates: Vec<Template>,
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashMap<String, LexEntry>,
}

impl Lexicon {
    pub fn get(&self, key: &str) -> Option<&LexEntry> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One instantiated premise, tagged with where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Premise {
    /// Lexicon key that produced the premise.
    pub key: String,
    /// Label of the node the entry was instantiated at.
    pub label: Label,
    /// The closed formula, without an outer bang even when unlimited.
    pub formula: GlueFormula,
}

impl fmt::Display for Premise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.formula)
    }
}

/// The resource ledger of a derivation: single-use premises, unlimited
/// premises, and the R-relation facts.
#[derive(Debug, Clone, Default)]
pub struct PremiseSet {
    pub linear: Vec<Premise>,
    pub banged: Vec<Premise>,
    pub facts: Vec<RRelation>,
}

#[derive(Debug, Error)]
pub enum LexError {
    #[error("lexicon syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("duplicate lexicon key `{0}`")]
    DuplicateKey(String),
    #[error("in entry `{key}`: {source}")]
    Template {
        key: String,
        #[source]
        source: GlueError,
    },
    #[error("node `{label}` has no lexicon entry for `{pred}`")]
    MissingKey { label: String, pred: String },
    #[error("node `{0}` has a SPEC but no PRED to build the restriction from")]
    SpecWithoutPred(String),
}

// ---------------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------------

/// Parse a lexicon file: a sequence of
/// `entry <key> { glue: <template>; [glue!: <template>;]* }` blocks.
/// Determiner entries are written `entry <key>[det] { ... }`.
pub fn parse_lexicon(text: &str) -> Result<Lexicon, LexError> {
    let mut p = LexParser { src: text, pos: 0 };
    let mut entries: HashMap<String, LexEntry> = HashMap::new();
    loop {
        p.skip_trivia();
        if p.at_end() {
            break;
        }
        let entry = p.entry()?;
        if entries.contains_key(&entry.key) {
            return Err(LexError::DuplicateKey(entry.key));
        }
        entries.insert(entry.key.clone(), entry);
    }
    Ok(Lexicon { entries })
}

struct LexParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> LexParser<'a> {
    fn err(&self, msg: &str) -> LexError {
        LexError::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) {
        if let Some(c) = self.peek() {
            self.pos += c.len_utf8();
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => self.bump(),
                Some('/') if self.src[self.pos..].starts_with("//") => {
                    while let Some(c) = self.peek() {
                        self.bump();
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_trivia();
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), LexError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn word(&mut self) -> Result<String, LexError> {
        self.skip_trivia();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' || c == '\'' || c == '%' {
                self.bump();
            } else {
                break;
            }
        }
        if self.pos == start {
            Err(self.err("expected a word"))
        } else {
            Ok(self.src[start..self.pos].to_string())
        }
    }

    fn entry(&mut self) -> Result<LexEntry, LexError> {
        let kw = self.word()?;
        if kw != "entry" {
            return Err(self.err("expected `entry`"));
        }
        let key = self.word()?;
        let kind = if self.eat('[') {
            let k = self.word()?;
            if k != "det" {
                return Err(self.err("expected `det`"));
            }
            self.expect(']')?;
            EntryKind::Det
        } else {
            EntryKind::Plain
        };
        self.expect('{')?;
        let mut templates = Vec::new();
        loop {
            if self.eat('}') {
                break;
            }
            let field = self.word()?;
            if field != "glue" {
                return Err(self.err("expected `glue:` or `glue!:`"));
            }
            let banged = self.eat('!');
            self.expect(':')?;
            self.skip_trivia();
            let start = self.pos;
            while let Some(c) = self.peek() {
                if c == ';' {
                    break;
                }
                self.bump();
            }
            let body = &self.src[start..self.pos];
            self.expect(';')?;
            let formula = parse_glue_template(body)
                .map_err(|e| shift_glue_error(e, start))
                .map_err(|source| LexError::Template { key: key.clone(), source })?;
            // a written outer bang and the `glue!` marker are synonymous
            let (written_bang, inner) = formula.unbang();
            templates.push(Template {
                formula: inner.clone(),
                banged: banged || written_bang,
            });
        }
        if templates.is_empty() {
            return Err(self.err("entry has no glue templates"));
        }
        Ok(LexEntry { key, kind, templates })
    }
}

fn shift_glue_error(e: GlueError, offset: usize) -> GlueError {
    match e {
        GlueError::Syntax { pos, msg } => GlueError::Syntax { pos: pos + offset, msg },
        other => other,
    }
}

// ---------------------------------------------------------------------------
// instantiation
// ---------------------------------------------------------------------------

/// Instantiate the lexicon at every pred-bearing node of the f-structure.
/// One instantiation per node, however many paths reach it; sharing shows
/// up in the facts, not in the premises.
pub fn instantiate_entries(fs: &FStructure, lex: &Lexicon) -> Result<PremiseSet, LexError> {
    let mut out = PremiseSet { facts: extract_r_relations(fs), ..Default::default() };
    for label in &fs.order {
        let node = &fs.nodes[label];
        let (key, restr): (&str, Option<&str>) = match node {
            Node::Complex { .. } => match (node.spec(), node.pred()) {
                (Some(spec), Some(pred)) => (spec, Some(pred)),
                (Some(_), None) => {
                    return Err(LexError::SpecWithoutPred(label.to_string()))
                }
                (None, Some(pred)) => (pred, None),
                (None, None) => continue,
            },
            Node::Set { conj: Some(c), .. } => (c.as_str(), None),
            Node::Set { conj: None, .. } => continue,
        };
        let entry = lex.get(key).ok_or_else(|| LexError::MissingKey {
            label: label.to_string(),
            pred: key.to_string(),
        })?;
        for template in &entry.templates {
            let mut formula = resolve_up(&template.formula, label);
            if let Some(pred) = restr {
                formula = map_terms(&formula, &|t: &Term| {
                    t.replace_const(RESTR, &Term::cst(pred))
                });
            }
            debug_assert!(
                free_glue_vars(&formula).is_empty(),
                "instantiated premise must be closed: {formula}"
            );
            debug_assert!(glue::well_sorted(&formula));
            let premise = Premise {
                key: key.to_string(),
                label: label.clone(),
                formula,
            };
            if template.banged {
                out.banged.push(premise);
            } else {
                out.linear.push(premise);
            }
        }
    }
    Ok(out)
}

fn map_terms(f: &GlueFormula, g: &impl Fn(&Term) -> Term) -> GlueFormula {
    match f {
        GlueFormula::Means { handle, term } => {
            GlueFormula::Means { handle: handle.clone(), term: g(term) }
        }
        GlueFormula::RAtom { .. } => f.clone(),
        GlueFormula::Tensor(a, b) => GlueFormula::tensor(map_terms(a, g), map_terms(b, g)),
        GlueFormula::Lolli(a, b) => GlueFormula::lolli(map_terms(a, g), map_terms(b, g)),
        GlueFormula::Bang(b) => GlueFormula::Bang(Box::new(map_terms(b, g))),
        GlueFormula::Forall(vs, b) => {
            GlueFormula::Forall(vs.clone(), Box::new(map_terms(b, g)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fstruct::parse_fstructure;
    use crate::glue::parse_glue;

    const BASIC_LEX: &str = "
        // transitive verbs and proper names
        entry support {
          glue: forall X,Y. (^ SUBJ)~X * (^ OBJ)~Y -o ^~supported(X,Y);
        }
        entry Bill { glue: ^~Bill; }
        entry nafta { glue: ^~NAFTA; }
    ";

    const AND_LEX: &str = "
        entry and {
          glue: forall X,Y. (^ CONJ)~X * (^ CONJ)~Y -o ^~and(X,Y);
          glue!: forall X,Y. (^ CONJ)~X * ^~Y -o ^~and(X,Y);
        }
    ";

    #[test]
    fn parse_supported_entry() {
        let lex = parse_lexicon(BASIC_LEX).unwrap();
        let e = lex.get("support").unwrap();
        assert_eq!(e.kind, EntryKind::Plain);
        assert_eq!(e.templates.len(), 1);
        assert!(!e.templates[0].banged);
        assert!(e.templates[0].formula.as_implication().is_some());
    }

    #[test]
    fn parse_and_entry() {
        let lex = parse_lexicon(AND_LEX).unwrap();
        let e = lex.get("and").unwrap();
        assert_eq!(e.templates.len(), 2);
        assert!(!e.templates[0].banged);
        assert!(e.templates[1].banged);
    }

    #[test]
    fn parse_empty_lexicon() {
        let lex = parse_lexicon("  // nothing here\n").unwrap();
        assert!(lex.is_empty());
    }

    #[test]
    fn parse_det_entry() {
        let lex = parse_lexicon(
            "entry two[det] {
               glue: forall H,S. (forall x. ^~x -o H~S(x)) -o H~two(z, %RESTR%(z), S(z));
             }",
        )
        .unwrap();
        let e = lex.get("two").unwrap();
        assert_eq!(e.kind, EntryKind::Det);
    }

    #[test]
    fn duplicate_key_rejected() {
        let err = parse_lexicon("entry a { glue: ^~A; } entry a { glue: ^~A; }");
        assert!(matches!(err, Err(LexError::DuplicateKey(_))));
    }

    #[test]
    fn template_error_names_entry() {
        let err = parse_lexicon("entry bad { glue: forall Weird. ^~Weird; }");
        match err {
            Err(LexError::Template { key, .. }) => assert_eq!(key, "bad"),
            other => panic!("expected template error, got {other:?}"),
        }
    }

    #[test]
    fn instantiate_basic_structure() {
        let fs = parse_fstructure(
            "f:[ PRED 'support' SUBJ g:[PRED 'Bill'] OBJ h:[PRED 'nafta'] ]",
        )
        .unwrap();
        let lex = parse_lexicon(BASIC_LEX).unwrap();
        let ps = instantiate_entries(&fs, &lex).unwrap();
        assert_eq!(ps.linear.len(), 3);
        assert!(ps.banged.is_empty());
        let rendered: Vec<String> =
            ps.facts.iter().map(|r| r.to_string()).collect();
        assert_eq!(rendered, ["R(f,SUBJ,g)", "R(f,OBJ,h)"]);
        let verb = &ps.linear[0];
        assert_eq!(verb.key, "support");
        assert_eq!(
            verb.formula,
            parse_glue("forall X,Y. (f SUBJ)~X * (f OBJ)~Y -o f~supported(X,Y)").unwrap()
        );
        assert_eq!(
            ps.linear[1].formula,
            parse_glue("g ~ Bill").unwrap()
        );
    }

    #[test]
    fn instantiate_shared_structure() {
        // coordinate right-node raising: one premise per node, even for
        // the shared object
        let fs = parse_fstructure(
            "f : { CONJTYPE 'and'
               f1:[ PRED 'support' SUBJ g:[PRED 'Bill'] OBJ h:[PRED 'nafta'] ] ,
               f2:[ PRED 'oppose' SUBJ i:[PRED 'Hillary'] OBJ h ] }",
        )
        .unwrap();
        let lex = parse_lexicon(&format!(
            "{BASIC_LEX}
             entry oppose {{
               glue: forall X,Y. (^ SUBJ)~X * (^ OBJ)~Y -o ^~opposed(X,Y);
             }}
             entry Hillary {{ glue: ^~Hillary; }}
             {AND_LEX}"
        ))
        .unwrap();
        let ps = instantiate_entries(&fs, &lex).unwrap();
        // Bill, Hillary, supported, opposed, and, plus exactly one premise
        // for the doubly-reached nafta node
        assert_eq!(ps.linear.len(), 6);
        assert_eq!(ps.banged.len(), 1);
        assert_eq!(ps.facts.len(), 6);
        let nafta: Vec<_> = ps.linear.iter().filter(|p| p.key == "nafta").collect();
        assert_eq!(nafta.len(), 1);
        let and = ps.linear.iter().find(|p| p.key == "and").unwrap();
        assert_eq!(and.label, Label::new("f"));
        assert_eq!(
            ps.banged[0].formula,
            parse_glue("forall X,Y. (f CONJ)~X * f~Y -o f~and(X,Y)").unwrap()
        );
    }

    #[test]
    fn instantiate_quantified_np() {
        let fs = parse_fstructure(
            "f:[ PRED 'support' SUBJ g:[PRED 'Bill'] OBJ h:[PRED 'trade-bill' SPEC 'two'] ]",
        )
        .unwrap();
        let lex = parse_lexicon(
            "entry support {
               glue: forall X,Y. (^ SUBJ)~X * (^ OBJ)~Y -o ^~supported(X,Y);
             }
             entry Bill { glue: ^~Bill; }
             entry two[det] {
               glue: forall H,S. (forall x. ^~x -o H~S(x)) -o H~two(z, %RESTR%(z), S(z));
             }",
        )
        .unwrap();
        let ps = instantiate_entries(&fs, &lex).unwrap();
        assert_eq!(ps.linear.len(), 3);
        let qnp = ps.linear.iter().find(|p| p.key == "two").unwrap();
        assert_eq!(qnp.label, Label::new("h"));
        assert_eq!(
            qnp.formula,
            parse_glue("forall H,S. (forall x. h~x -o H~S(x)) -o H~two(z, trade-bill(z), S(z))")
                .unwrap()
        );
    }

    #[test]
    fn missing_key_names_label_and_pred() {
        let fs = parse_fstructure("f:[ PRED 'frob' ]").unwrap();
        let lex = parse_lexicon("").unwrap();
        match instantiate_entries(&fs, &lex) {
            Err(LexError::MissingKey { label, pred }) => {
                assert_eq!(label, "f");
                assert_eq!(pred, "frob");
            }
            other => panic!("expected missing key, got {other:?}"),
        }
    }
}
