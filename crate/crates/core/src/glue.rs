//! The glue language: tensor-fragment linear-logic formulas over meaning
//! atoms (`handle ~ term`) and R-relation atoms, with sorted universal
//! quantification and the bang modality.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::fstruct::{AttrName, Label};
use crate::meaning::{self, Term, TermParser};

/// The reserved head-metavariable token of lexicon templates.
pub const UP: &str = "^";

/// A semantic handle: the projection of a node (`f`), of a role position
/// (`(f SUBJ)`), or a quantified handle variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Handle {
    Node(Label),
    Slot(Label, AttrName),
    Var(String),
}

impl Handle {
    pub fn up() -> Handle {
        Handle::Node(Label::new(UP))
    }
}

impl fmt::Display for Handle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Handle::Node(l) => write!(f, "{l}"),
            Handle::Slot(l, a) => write!(f, "({l} {a})"),
            Handle::Var(v) => write!(f, "{v}"),
        }
    }
}

/// Sort of a quantified glue variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sort {
    Meaning,
    Function,
    Handle,
    Label,
    Attr,
}

impl Sort {
    pub fn name(self) -> &'static str {
        match self {
            Sort::Meaning => "meaning",
            Sort::Function => "function",
            Sort::Handle => "handle",
            Sort::Label => "label",
            Sort::Attr => "attr",
        }
    }

    pub fn is_term(self) -> bool {
        matches!(self, Sort::Meaning | Sort::Function)
    }
}

/// Sort inferred from a variable's leading character, when possible.
pub fn infer_sort(name: &str) -> Option<Sort> {
    match name.chars().next()? {
        'X' | 'Y' | 'Z' | 'x' | 'y' | 'z' | 'w' | 'p' => Some(Sort::Meaning),
        'S' | 'Q' | 'T' => Some(Sort::Function),
        'H' | 's' => Some(Sort::Handle),
        'F' | 'G' => Some(Sort::Label),
        'P' => Some(Sort::Attr),
        _ => None,
    }
}

/// Label position of an R-atom: concrete or quantified.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LabelRef {
    Label(Label),
    Var(String),
}

impl fmt::Display for LabelRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelRef::Label(l) => write!(f, "{l}"),
            LabelRef::Var(v) => write!(f, "{v}"),
        }
    }
}

/// Attribute position of an R-atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AttrRef {
    Attr(AttrName),
    Var(String),
}

impl fmt::Display for AttrRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrRef::Attr(a) => write!(f, "{a}"),
            AttrRef::Var(v) => write!(f, "{v}"),
        }
    }
}

/// A glue-language formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GlueFormula {
    /// `handle ~ term`
    Means { handle: Handle, term: Term },
    /// `R(F, P, G)`
    RAtom { parent: LabelRef, attr: AttrRef, child: LabelRef },
    Tensor(Box<GlueFormula>, Box<GlueFormula>),
    Lolli(Box<GlueFormula>, Box<GlueFormula>),
    Bang(Box<GlueFormula>),
    Forall(Vec<(String, Sort)>, Box<GlueFormula>),
}

impl GlueFormula {
    pub fn means(handle: Handle, term: Term) -> GlueFormula {
        GlueFormula::Means { handle, term }
    }

    pub fn tensor(a: GlueFormula, b: GlueFormula) -> GlueFormula {
        GlueFormula::Tensor(Box::new(a), Box::new(b))
    }

    pub fn lolli(a: GlueFormula, b: GlueFormula) -> GlueFormula {
        GlueFormula::Lolli(Box::new(a), Box::new(b))
    }

    pub fn forall(vars: Vec<(String, Sort)>, body: GlueFormula) -> GlueFormula {
        if vars.is_empty() {
            body
        } else {
            GlueFormula::Forall(vars, Box::new(body))
        }
    }

    /// Strip a leading bang, reporting whether one was present.
    pub fn unbang(&self) -> (bool, &GlueFormula) {
        match self {
            GlueFormula::Bang(inner) => (true, inner),
            other => (false, other),
        }
    }

    /// The antecedent conjuncts and consequent of an implication after
    /// stripping outer quantifiers: `(vars, conjuncts, consequent)`.
    /// Returns None for formulas that are not implications.
    pub fn as_implication(&self) -> Option<(&[(String, Sort)], Vec<&GlueFormula>, &GlueFormula)> {
        let (vars, body) = match self {
            GlueFormula::Forall(vs, b) => (vs.as_slice(), &**b),
            other => (&[][..], other),
        };
        if let GlueFormula::Lolli(a, c) = body {
            let mut conjuncts = Vec::new();
            collect_tensor(a, &mut conjuncts);
            Some((vars, conjuncts, c))
        } else {
            None
        }
    }

    /// Maximum depth of implications nested inside antecedent positions.
    pub fn antecedent_nesting(&self) -> usize {
        fn nest(f: &GlueFormula) -> usize {
            match f {
                GlueFormula::Means { .. } | GlueFormula::RAtom { .. } => 0,
                GlueFormula::Tensor(a, b) => nest(a).max(nest(b)),
                GlueFormula::Bang(b) => nest(b),
                GlueFormula::Forall(_, b) => nest(b),
                GlueFormula::Lolli(a, c) => nest(c).max(1 + nest(a)),
            }
        }
        match self.unbang().1.as_implication() {
            Some((_, conjuncts, consequent)) => {
                let a = conjuncts.iter().map(|c| nest(c)).max().unwrap_or(0);
                a.max(nest(consequent))
            }
            None => 0,
        }
    }
}

fn collect_tensor<'a>(f: &'a GlueFormula, out: &mut Vec<&'a GlueFormula>) {
    match f {
        GlueFormula::Tensor(a, b) => {
            collect_tensor(a, out);
            collect_tensor(b, out);
        }
        other => out.push(other),
    }
}

// ---------------------------------------------------------------------------
// printing
// ---------------------------------------------------------------------------

impl fmt::Display for GlueFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self, f, 0)
    }
}

// precedence levels: 0 = formula (forall/bang/lolli), 1 = tensor operand
fn write_formula(g: &GlueFormula, f: &mut fmt::Formatter<'_>, level: u8) -> fmt::Result {
    let needs_parens = level > 0
        && matches!(
            g,
            GlueFormula::Lolli(..) | GlueFormula::Forall(..) | GlueFormula::Bang(..)
        );
    if needs_parens {
        write!(f, "(")?;
    }
    match g {
        GlueFormula::Means { handle, term } => write!(f, "{handle} ~ {term}")?,
        GlueFormula::RAtom { parent, attr, child } => {
            write!(f, "R({parent},{attr},{child})")?
        }
        GlueFormula::Tensor(a, b) => {
            write_formula(a, f, 1)?;
            write!(f, " * ")?;
            write_formula(b, f, 1)?;
        }
        GlueFormula::Lolli(a, c) => {
            // antecedent binds tighter; parenthesize nested implications
            match &**a {
                GlueFormula::Lolli(..) | GlueFormula::Forall(..) | GlueFormula::Bang(..) => {
                    write!(f, "(")?;
                    write_formula(a, f, 0)?;
                    write!(f, ")")?;
                }
                _ => write_formula(a, f, 0)?,
            }
            write!(f, " -o ")?;
            write_formula(c, f, 0)?;
        }
        GlueFormula::Bang(b) => {
            write!(f, "! ")?;
            write_formula(b, f, 0)?;
        }
        GlueFormula::Forall(vars, b) => {
            write!(f, "forall ")?;
            for (i, (name, sort)) in vars.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                if infer_sort(name) == Some(*sort) {
                    write!(f, "{name}")?;
                } else {
                    write!(f, "{name}:{}", sort.name())?;
                }
            }
            write!(f, ". ")?;
            write_formula(b, f, 0)?;
        }
    }
    if needs_parens {
        write!(f, ")")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// errors
// ---------------------------------------------------------------------------

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GlueError {
    #[error("glue syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("cannot infer a sort for variable `{0}`; annotate it as `{0}:<sort>`")]
    UnknownSort(String),
    #[error("sort clash: variable `{var}` is {declared} but used as {used}")]
    SortClash { var: String, declared: &'static str, used: &'static str },
    #[error("the metavariable `^` is only allowed in lexicon templates")]
    UpOutsideTemplate,
    #[error("bang is only allowed at the top level of a premise")]
    BangPosition,
    #[error("implications nested deeper than 2 in antecedent position")]
    NestingTooDeep,
    #[error("instantiation target `{0}` is not bound by an outermost forall")]
    NotOutermost(String),
}

// ---------------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------------

/// Parse a closed glue formula.
pub fn parse_glue(text: &str) -> Result<GlueFormula, GlueError> {
    parse_inner(text, false)
}

/// Parse a lexicon template, where the bare metavariable `^` may stand
/// for the head label.
pub fn parse_glue_template(text: &str) -> Result<GlueFormula, GlueError> {
    parse_inner(text, true)
}

fn parse_inner(text: &str, template: bool) -> Result<GlueFormula, GlueError> {
    let mut p = GlueParser { t: TermParser::new(text), template, env: Vec::new() };
    let f = p.formula(true)?;
    p.t.skip_ws();
    if !p.t.at_end() {
        return Err(p.syntax("trailing input after formula"));
    }
    if f.antecedent_nesting() > 2 {
        return Err(GlueError::NestingTooDeep);
    }
    check_bang_positions(&f)?;
    Ok(f)
}

fn check_bang_positions(f: &GlueFormula) -> Result<(), GlueError> {
    fn no_bang(f: &GlueFormula) -> Result<(), GlueError> {
        match f {
            GlueFormula::Bang(_) => Err(GlueError::BangPosition),
            GlueFormula::Means { .. } | GlueFormula::RAtom { .. } => Ok(()),
            GlueFormula::Tensor(a, b) | GlueFormula::Lolli(a, b) => {
                no_bang(a)?;
                no_bang(b)
            }
            GlueFormula::Forall(_, b) => no_bang(b),
        }
    }
    match f {
        GlueFormula::Bang(inner) => match &**inner {
            GlueFormula::Forall(_, b) => no_bang(b),
            other => no_bang(other),
        },
        GlueFormula::Forall(_, b) => match &**b {
            GlueFormula::Bang(inner) => no_bang(inner),
            other => no_bang(other),
        },
        other => no_bang(other),
    }
}

struct GlueParser<'a> {
    t: TermParser<'a>,
    template: bool,
    env: Vec<(String, Sort)>,
}

impl<'a> GlueParser<'a> {
    fn syntax(&self, msg: &str) -> GlueError {
        GlueError::Syntax { pos: self.t.pos, msg: msg.to_string() }
    }

    fn lookup(&self, name: &str) -> Option<Sort> {
        self.env.iter().rev().find(|(n, _)| n == name).map(|(_, s)| *s)
    }

    fn keyword(&mut self, word: &str) -> bool {
        self.t.skip_ws();
        let rest = &self.t.src[self.t.pos..];
        if rest.starts_with(word) {
            let after = rest[word.len()..].chars().next();
            let boundary = match after {
                None => true,
                Some(c) => !(c.is_alphanumeric() || c == '_'),
            };
            if boundary {
                self.t.pos += word.len();
                return true;
            }
        }
        false
    }

    fn symbol(&mut self, sym: &str) -> bool {
        self.t.skip_ws();
        if self.t.src[self.t.pos..].starts_with(sym) {
            self.t.pos += sym.len();
            true
        } else {
            false
        }
    }

    fn formula(&mut self, top: bool) -> Result<GlueFormula, GlueError> {
        self.t.skip_ws();
        if self.symbol("!") {
            let inner = self.formula(top)?;
            return Ok(GlueFormula::Bang(Box::new(inner)));
        }
        if self.keyword("forall") {
            let mut vars: Vec<(String, Sort)> = Vec::new();
            loop {
                let name = self.t.ident().map_err(|e| GlueError::Syntax {
                    pos: e.pos,
                    msg: e.msg,
                })?;
                let sort = if self.symbol(":") {
                    let s = self.t.ident().map_err(|e| GlueError::Syntax {
                        pos: e.pos,
                        msg: e.msg,
                    })?;
                    match s.as_str() {
                        "meaning" => Sort::Meaning,
                        "function" => Sort::Function,
                        "handle" => Sort::Handle,
                        "label" => Sort::Label,
                        "attr" => Sort::Attr,
                        other => {
                            return Err(self.syntax(&format!("unknown sort `{other}`")))
                        }
                    }
                } else {
                    infer_sort(&name).ok_or(GlueError::UnknownSort(name.clone()))?
                };
                vars.push((name, sort));
                if !self.symbol(",") {
                    break;
                }
            }
            if !self.symbol(".") {
                return Err(self.syntax("expected `.` after forall binders"));
            }
            let depth = self.env.len();
            self.env.extend(vars.iter().cloned());
            let body = self.formula(false)?;
            self.env.truncate(depth);
            return Ok(GlueFormula::Forall(vars, Box::new(body)));
        }
        let left = self.tensor()?;
        if self.symbol("-o") {
            let right = self.formula(false)?;
            return Ok(GlueFormula::lolli(left, right));
        }
        Ok(left)
    }

    fn tensor(&mut self) -> Result<GlueFormula, GlueError> {
        let mut acc = self.factor()?;
        while {
            // `*` but not `-o` lookahead needed; `*` is unambiguous
            self.symbol("*")
        } {
            let rhs = self.factor()?;
            acc = GlueFormula::tensor(acc, rhs);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<GlueFormula, GlueError> {
        self.t.skip_ws();
        // `(` may open a grouped formula or a composite handle `(f ATTR)`
        if self.t.peek() == Some('(') {
            let save = self.t.pos;
            if let Some(handle) = self.try_composite_handle()? {
                return self.means_atom(handle);
            }
            self.t.pos = save;
            if !self.symbol("(") {
                return Err(self.syntax("expected `(`"));
            }
            let inner = self.formula(false)?;
            if !self.symbol(")") {
                return Err(self.syntax("expected `)`"));
            }
            return Ok(inner);
        }
        let save = self.t.pos;
        if self.keyword("R") {
            if self.t.peek() == Some('(') {
                return self.r_atom();
            }
            self.t.pos = save;
        }
        // simple handle: label, handle variable, or `^`
        let handle = self.simple_handle()?;
        self.means_atom(handle)
    }

    fn means_atom(&mut self, handle: Handle) -> Result<GlueFormula, GlueError> {
        if !self.symbol("~") {
            return Err(self.syntax("expected `~` after handle"));
        }
        let term = self
            .t
            .term()
            .map_err(|e| GlueError::Syntax { pos: e.pos, msg: e.msg })?;
        let term_vars: HashSet<String> = self
            .env
            .iter()
            .filter(|(_, s)| s.is_term())
            .map(|(n, _)| n.clone())
            .collect();
        let term = meaning::vars_from_consts(&term, &term_vars);
        Ok(GlueFormula::Means { handle, term })
    }

    fn try_composite_handle(&mut self) -> Result<Option<Handle>, GlueError> {
        let save = self.t.pos;
        if !self.symbol("(") {
            return Ok(None);
        }
        self.t.skip_ws();
        let first = if self.t.peek() == Some('^') {
            self.t.bump();
            if !self.template {
                return Err(GlueError::UpOutsideTemplate);
            }
            UP.to_string()
        } else {
            match self.t.ident() {
                Ok(name) => name,
                Err(_) => {
                    self.t.pos = save;
                    return Ok(None);
                }
            }
        };
        self.t.skip_ws();
        let attr = match self.t.ident() {
            Ok(a) => a,
            Err(_) => {
                self.t.pos = save;
                return Ok(None);
            }
        };
        if !self.symbol(")") {
            self.t.pos = save;
            return Ok(None);
        }
        if first != UP {
            if let Some(sort) = self.lookup(&first) {
                if sort != Sort::Label {
                    return Err(GlueError::SortClash {
                        var: first,
                        declared: sort.name(),
                        used: "label",
                    });
                }
            } else if infer_sort(&first).is_some() && infer_sort(&first) != Some(Sort::Label) {
                return Err(GlueError::UnboundVariable(first));
            }
        }
        Ok(Some(Handle::Slot(Label::new(first), AttrName::new(&attr))))
    }

    fn simple_handle(&mut self) -> Result<Handle, GlueError> {
        self.t.skip_ws();
        if self.t.peek() == Some('^') {
            self.t.bump();
            if !self.template {
                return Err(GlueError::UpOutsideTemplate);
            }
            return Ok(Handle::up());
        }
        let name = self
            .t
            .ident()
            .map_err(|e| GlueError::Syntax { pos: e.pos, msg: e.msg })?;
        if let Some(sort) = self.lookup(&name) {
            if sort != Sort::Handle {
                return Err(GlueError::SortClash {
                    var: name,
                    declared: sort.name(),
                    used: "handle",
                });
            }
            return Ok(Handle::Var(name));
        }
        // unbound: a name that looks like a quantifiable variable is an
        // error; anything else is a concrete label
        match infer_sort(&name) {
            Some(_) => Err(GlueError::UnboundVariable(name)),
            None => Ok(Handle::Node(Label::new(name))),
        }
    }

    fn r_atom(&mut self) -> Result<GlueFormula, GlueError> {
        if !self.symbol("(") {
            return Err(self.syntax("expected `(` after R"));
        }
        let parent = self.label_ref()?;
        if !self.symbol(",") {
            return Err(self.syntax("expected `,`"));
        }
        let attr = self.attr_ref()?;
        if !self.symbol(",") {
            return Err(self.syntax("expected `,`"));
        }
        let child = self.label_ref()?;
        if !self.symbol(")") {
            return Err(self.syntax("expected `)`"));
        }
        Ok(GlueFormula::RAtom { parent, attr, child })
    }

    fn label_ref(&mut self) -> Result<LabelRef, GlueError> {
        let name = self
            .t
            .ident()
            .map_err(|e| GlueError::Syntax { pos: e.pos, msg: e.msg })?;
        if let Some(sort) = self.lookup(&name) {
            if sort != Sort::Label {
                return Err(GlueError::SortClash {
                    var: name,
                    declared: sort.name(),
                    used: "label",
                });
            }
            return Ok(LabelRef::Var(name));
        }
        Ok(LabelRef::Label(Label::new(name)))
    }

    fn attr_ref(&mut self) -> Result<AttrRef, GlueError> {
        let name = self
            .t
            .ident()
            .map_err(|e| GlueError::Syntax { pos: e.pos, msg: e.msg })?;
        if let Some(sort) = self.lookup(&name) {
            if sort != Sort::Attr {
                return Err(GlueError::SortClash {
                    var: name,
                    declared: sort.name(),
                    used: "attr",
                });
            }
            return Ok(AttrRef::Var(name));
        }
        Ok(AttrRef::Attr(AttrName::new(&name)))
    }
}

// ---------------------------------------------------------------------------
// instantiation
// ---------------------------------------------------------------------------

/// A sorted value for universal instantiation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    Term(Term),
    Handle(Handle),
    Label(Label),
    Attr(AttrName),
}

impl Binding {
    fn matches(&self, sort: Sort) -> bool {
        match (self, sort) {
            (Binding::Term(_), Sort::Meaning | Sort::Function) => true,
            (Binding::Handle(_), Sort::Handle) => true,
            (Binding::Label(_), Sort::Label | Sort::Handle) => true,
            (Binding::Attr(_), Sort::Attr) => true,
            _ => false,
        }
    }
}

pub type Bindings = HashMap<String, Binding>;

/// Instantiate outermost universally quantified variables. Variables not
/// mentioned in `bindings` stay quantified; bindings for variables that
/// are not bound by an outermost forall are an error.
pub fn instantiate(f: &GlueFormula, bindings: &Bindings) -> Result<GlueFormula, GlueError> {
    // validate targets against the outermost forall chain (possibly under a bang)
    let mut outer: Vec<(String, Sort)> = Vec::new();
    {
        let mut cur = f;
        loop {
            match cur {
                GlueFormula::Bang(b) => cur = b,
                GlueFormula::Forall(vs, b) => {
                    outer.extend(vs.iter().cloned());
                    cur = b;
                }
                _ => break,
            }
        }
    }
    for (name, value) in bindings {
        match outer.iter().find(|(n, _)| n == name) {
            None => return Err(GlueError::NotOutermost(name.clone())),
            Some((_, sort)) => {
                if !value.matches(*sort) {
                    return Err(GlueError::SortClash {
                        var: name.clone(),
                        declared: sort.name(),
                        used: match value {
                            Binding::Term(_) => "meaning",
                            Binding::Handle(_) => "handle",
                            Binding::Label(_) => "label",
                            Binding::Attr(_) => "attr",
                        },
                    });
                }
            }
        }
    }
    Ok(subst_formula(f, bindings, true))
}

fn subst_formula(f: &GlueFormula, b: &Bindings, outermost: bool) -> GlueFormula {
    match f {
        GlueFormula::Means { handle, term } => {
            let handle = match handle {
                Handle::Var(v) => match b.get(v) {
                    Some(Binding::Handle(h)) => h.clone(),
                    Some(Binding::Label(l)) => Handle::Node(l.clone()),
                    _ => handle.clone(),
                },
                other => other.clone(),
            };
            let mut ts = meaning::Substitution::new();
            for (name, val) in b {
                if let Binding::Term(t) = val {
                    ts.insert(name.clone(), t.clone());
                }
            }
            GlueFormula::Means { handle, term: meaning::substitute(term, &ts) }
        }
        GlueFormula::RAtom { parent, attr, child } => {
            let fix_label = |l: &LabelRef| match l {
                LabelRef::Var(v) => match b.get(v) {
                    Some(Binding::Label(lab)) => LabelRef::Label(lab.clone()),
                    _ => l.clone(),
                },
                other => other.clone(),
            };
            let attr = match attr {
                AttrRef::Var(v) => match b.get(v) {
                    Some(Binding::Attr(a)) => AttrRef::Attr(a.clone()),
                    _ => attr.clone(),
                },
                other => other.clone(),
            };
            GlueFormula::RAtom { parent: fix_label(parent), attr, child: fix_label(child) }
        }
        GlueFormula::Tensor(x, y) => GlueFormula::tensor(
            subst_formula(x, b, false),
            subst_formula(y, b, false),
        ),
        GlueFormula::Lolli(x, y) => GlueFormula::lolli(
            subst_formula(x, b, false),
            subst_formula(y, b, false),
        ),
        GlueFormula::Bang(inner) => {
            GlueFormula::Bang(Box::new(subst_formula(inner, b, outermost)))
        }
        GlueFormula::Forall(vars, body) => {
            if outermost {
                let kept: Vec<_> = vars
                    .iter()
                    .filter(|(n, _)| !b.contains_key(n))
                    .cloned()
                    .collect();
                GlueFormula::forall(kept, subst_formula(body, b, true))
            } else {
                let mut inner = b.clone();
                for (n, _) in vars {
                    inner.remove(n);
                }
                GlueFormula::Forall(vars.clone(), Box::new(subst_formula(body, &inner, false)))
            }
        }
    }
}

/// Substitute bindings for free variable occurrences, respecting inner
/// quantifiers. Unlike [`instantiate`] this does not require the targets
/// to be outermost-bound.
pub(crate) fn apply_free(f: &GlueFormula, b: &Bindings) -> GlueFormula {
    subst_formula(f, b, false)
}

/// Normalize every meaning term in the formula. `None` when a term
/// exceeds the reduction step bound.
pub fn normalize_formula(f: &GlueFormula) -> Option<GlueFormula> {
    match f {
        GlueFormula::Means { handle, term } => Some(GlueFormula::Means {
            handle: handle.clone(),
            term: meaning::normalize(term).ok()?,
        }),
        GlueFormula::RAtom { .. } => Some(f.clone()),
        GlueFormula::Tensor(a, b) => Some(GlueFormula::tensor(
            normalize_formula(a)?,
            normalize_formula(b)?,
        )),
        GlueFormula::Lolli(a, b) => Some(GlueFormula::lolli(
            normalize_formula(a)?,
            normalize_formula(b)?,
        )),
        GlueFormula::Bang(b) => Some(GlueFormula::Bang(Box::new(normalize_formula(b)?))),
        GlueFormula::Forall(vs, b) => Some(GlueFormula::Forall(
            vs.clone(),
            Box::new(normalize_formula(b)?),
        )),
    }
}

/// Formula equality up to renaming of quantified variables and
/// beta-eta-equality of the meaning terms.
pub fn alpha_equal_formula(a: &GlueFormula, b: &GlueFormula) -> bool {
    fn go(a: &GlueFormula, b: &GlueFormula, pairs: &mut Vec<(String, String)>) -> bool {
        match (a, b) {
            (
                GlueFormula::Means { handle: h1, term: t1 },
                GlueFormula::Means { handle: h2, term: t2 },
            ) => {
                let handles_ok = match (h1, h2) {
                    (Handle::Var(x), Handle::Var(y)) => {
                        pairs.iter().rev().find(|(l, r)| l == x || r == y).map_or(
                            x == y,
                            |(l, r)| l == x && r == y,
                        )
                    }
                    _ => h1 == h2,
                };
                let n1 = meaning::normalize(t1);
                let n2 = meaning::normalize(t2);
                handles_ok
                    && match (n1, n2) {
                        (Ok(n1), Ok(n2)) => meaning::alpha_eq(&n1, &n2, pairs),
                        _ => false,
                    }
            }
            (
                GlueFormula::RAtom { parent: p1, attr: a1, child: c1 },
                GlueFormula::RAtom { parent: p2, attr: a2, child: c2 },
            ) => p1 == p2 && a1 == a2 && c1 == c2,
            (GlueFormula::Tensor(x1, y1), GlueFormula::Tensor(x2, y2))
            | (GlueFormula::Lolli(x1, y1), GlueFormula::Lolli(x2, y2)) => {
                go(x1, x2, pairs) && go(y1, y2, pairs)
            }
            (GlueFormula::Bang(x), GlueFormula::Bang(y)) => go(x, y, pairs),
            (GlueFormula::Forall(v1, b1), GlueFormula::Forall(v2, b2)) => {
                if v1.len() != v2.len()
                    || v1.iter().zip(v2).any(|((_, s1), (_, s2))| s1 != s2)
                {
                    return false;
                }
                let n = pairs.len();
                pairs.extend(
                    v1.iter()
                        .zip(v2)
                        .map(|((x, _), (y, _))| (x.clone(), y.clone())),
                );
                let r = go(b1, b2, pairs);
                pairs.truncate(n);
                r
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

/// Replace the template metavariable `^` by a concrete label in every
/// handle position.
pub fn resolve_up(f: &GlueFormula, label: &Label) -> GlueFormula {
    let fix_handle = |h: &Handle| match h {
        Handle::Node(l) if l.as_str() == UP => Handle::Node(label.clone()),
        Handle::Slot(l, a) if l.as_str() == UP => Handle::Slot(label.clone(), a.clone()),
        other => other.clone(),
    };
    match f {
        GlueFormula::Means { handle, term } => {
            GlueFormula::Means { handle: fix_handle(handle), term: term.clone() }
        }
        GlueFormula::RAtom { parent, attr, child } => {
            let fix = |l: &LabelRef| match l {
                LabelRef::Label(x) if x.as_str() == UP => LabelRef::Label(label.clone()),
                other => other.clone(),
            };
            GlueFormula::RAtom { parent: fix(parent), attr: attr.clone(), child: fix(child) }
        }
        GlueFormula::Tensor(a, b) => {
            GlueFormula::tensor(resolve_up(a, label), resolve_up(b, label))
        }
        GlueFormula::Lolli(a, b) => {
            GlueFormula::lolli(resolve_up(a, label), resolve_up(b, label))
        }
        GlueFormula::Bang(b) => GlueFormula::Bang(Box::new(resolve_up(b, label))),
        GlueFormula::Forall(vs, b) => {
            GlueFormula::Forall(vs.clone(), Box::new(resolve_up(b, label)))
        }
    }
}

/// Free glue-variable names of a formula (handle, label, attr and term
/// variables alike).
pub fn free_glue_vars(f: &GlueFormula) -> HashSet<String> {
    fn go(f: &GlueFormula, bound: &mut Vec<String>, out: &mut HashSet<String>) {
        match f {
            GlueFormula::Means { handle, term } => {
                if let Handle::Var(v) = handle {
                    if !bound.iter().any(|b| b == v) {
                        out.insert(v.clone());
                    }
                }
                for v in term.free_vars() {
                    if !bound.iter().any(|b| *b == v) {
                        out.insert(v);
                    }
                }
            }
            GlueFormula::RAtom { parent, attr, child } => {
                for v in [parent, child] {
                    if let LabelRef::Var(name) = v {
                        if !bound.iter().any(|b| b == name) {
                            out.insert(name.clone());
                        }
                    }
                }
                if let AttrRef::Var(name) = attr {
                    if !bound.iter().any(|b| b == name) {
                        out.insert(name.clone());
                    }
                }
            }
            GlueFormula::Tensor(a, b) | GlueFormula::Lolli(a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            GlueFormula::Bang(b) => go(b, bound, out),
            GlueFormula::Forall(vars, b) => {
                let n = bound.len();
                bound.extend(vars.iter().map(|(v, _)| v.clone()));
                go(b, bound, out);
                bound.truncate(n);
            }
        }
    }
    let mut out = HashSet::new();
    go(f, &mut Vec::new(), &mut out);
    out
}

/// Structural sort-discipline check: no meaning term in a label or attr
/// position and vice versa. Parsing and instantiation maintain this by
/// construction; the check is re-run after instantiations in tests.
pub fn well_sorted(f: &GlueFormula) -> bool {
    fn go(f: &GlueFormula, env: &mut Vec<(String, Sort)>) -> bool {
        match f {
            GlueFormula::Means { handle, .. } => match handle {
                Handle::Var(v) => env
                    .iter()
                    .rev()
                    .find(|(n, _)| n == v)
                    .map(|(_, s)| *s == Sort::Handle)
                    .unwrap_or(false),
                _ => true,
            },
            GlueFormula::RAtom { parent, attr, child } => {
                let label_ok = |l: &LabelRef| match l {
                    LabelRef::Var(v) => env
                        .iter()
                        .rev()
                        .find(|(n, _)| n == v)
                        .map(|(_, s)| *s == Sort::Label)
                        .unwrap_or(false),
                    LabelRef::Label(_) => true,
                };
                let attr_ok = match attr {
                    AttrRef::Var(v) => env
                        .iter()
                        .rev()
                        .find(|(n, _)| n == v)
                        .map(|(_, s)| *s == Sort::Attr)
                        .unwrap_or(false),
                    AttrRef::Attr(_) => true,
                };
                label_ok(parent) && label_ok(child) && attr_ok
            }
            GlueFormula::Tensor(a, b) | GlueFormula::Lolli(a, b) => {
                go(a, env) && go(b, env)
            }
            GlueFormula::Bang(b) => go(b, env),
            GlueFormula::Forall(vars, b) => {
                let n = env.len();
                env.extend(vars.iter().cloned());
                let ok = go(b, env);
                env.truncate(n);
                ok
            }
        }
    }
    go(f, &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meaning::parse_term;

    #[test]
    fn parse_supported_constructor() {
        let f = parse_glue("forall X,Y. (f SUBJ)~X * (f OBJ)~Y -o f~supported(X,Y)").unwrap();
        let (vars, conjuncts, consequent) = f.as_implication().unwrap();
        assert_eq!(vars.len(), 2);
        assert_eq!(conjuncts.len(), 2);
        assert!(matches!(
            conjuncts[0],
            GlueFormula::Means { handle: Handle::Slot(..), .. }
        ));
        assert!(matches!(
            consequent,
            GlueFormula::Means { handle: Handle::Node(..), .. }
        ));
    }

    #[test]
    fn parse_simple_atom() {
        let f = parse_glue("g ~ Bill").unwrap();
        assert_eq!(
            f,
            GlueFormula::means(Handle::Node(Label::new("g")), Term::cst("Bill"))
        );
    }

    #[test]
    fn parse_banged_and2() {
        let f = parse_glue("! forall X,Y. (f CONJ)~X * f~Y -o f~and(X,Y)").unwrap();
        let (banged, inner) = f.unbang();
        assert!(banged);
        assert!(inner.as_implication().is_some());
    }

    #[test]
    fn parse_quantified_np() {
        let f = parse_glue(
            "forall H,S. (forall x. h~x -o H~S(x)) -o H~two(z, trade-bill(z), S(z))",
        )
        .unwrap();
        let (_, conjuncts, consequent) = f.as_implication().unwrap();
        assert_eq!(conjuncts.len(), 1);
        assert!(conjuncts[0].as_implication().is_some());
        if let GlueFormula::Means { term, .. } = consequent {
            assert!(matches!(term, Term::Quant { .. }));
        } else {
            panic!("expected means atom");
        }
        assert_eq!(f.antecedent_nesting(), 1);
    }

    #[test]
    fn parse_wanted_constructor() {
        let f = parse_glue(
            "forall X,Y. (f1 SUBJ)~X * (forall s,p. (forall X. (f1 OBJ)~X -o s~p(X)) -o s~Y(^p)) -o f1~wanted(X, ^Y)",
        )
        .unwrap();
        assert_eq!(f.antecedent_nesting(), 2);
        assert!(well_sorted(&f));
    }

    #[test]
    fn nesting_limit() {
        let too_deep = "forall X. (((h~X -o h~X) -o h~X) -o h~X) -o h~X";
        assert_eq!(parse_glue(too_deep), Err(GlueError::NestingTooDeep));
    }

    #[test]
    fn print_parse_roundtrip() {
        for src in [
            "g ~ Bill",
            "forall X,Y. (f SUBJ)~X * (f OBJ)~Y -o f~supported(X,Y)",
            "! forall X,Y. (f CONJ)~X * f~Y -o f~and(X,Y)",
            "forall H,S. (forall x. h~x -o H~S(x)) -o H~two(z, trade-bill(z), S(z))",
            "forall X,Y. (f1 SUBJ)~X * (forall s,p. (forall X. (f1 OBJ)~X -o s~p(X)) -o s~Y(^p)) -o f1~wanted(X, ^Y)",
            "R(f,SUBJ,g)",
            "forall x. R(f,CONJ,g) -o g~x -o h~x * h~win(x)",
        ] {
            let f = parse_glue(src).unwrap();
            let printed = f.to_string();
            let back = parse_glue(&printed)
                .unwrap_or_else(|e| panic!("reparse of `{printed}` failed: {e}"));
            assert_eq!(f, back, "roundtrip failed for `{src}`");
        }
    }

    #[test]
    fn template_up() {
        let f = parse_glue_template("forall X,Y. (^ SUBJ)~X * (^ OBJ)~Y -o ^~supported(X,Y)")
            .unwrap();
        let g = resolve_up(&f, &Label::new("f1"));
        let expect =
            parse_glue("forall X,Y. (f1 SUBJ)~X * (f1 OBJ)~Y -o f1~supported(X,Y)").unwrap();
        assert_eq!(g, expect);
        assert!(matches!(
            parse_glue("(^ SUBJ)~X"),
            Err(GlueError::UpOutsideTemplate)
        ));
    }

    #[test]
    fn unbound_variable_rejected() {
        assert!(matches!(
            parse_glue("H ~ Bill"),
            Err(GlueError::UnboundVariable(_))
        ));
    }

    #[test]
    fn sort_clash() {
        assert!(matches!(
            parse_glue("forall X. X ~ Bill"),
            Err(GlueError::SortClash { .. })
        ));
    }

    #[test]
    fn instantiate_partial() {
        let f = parse_glue("forall X,Y. (f SUBJ)~X * (f OBJ)~Y -o f~supported(X,Y)").unwrap();
        let mut b = Bindings::new();
        b.insert("X".into(), Binding::Term(Term::cst("Bill")));
        let g = instantiate(&f, &b).unwrap();
        let expect =
            parse_glue("forall Y. (f SUBJ)~Bill * (f OBJ)~Y -o f~supported(Bill,Y)").unwrap();
        assert_eq!(g, expect);
        assert!(well_sorted(&g));
    }

    #[test]
    fn instantiate_full() {
        let f = parse_glue("forall X,Y. (f SUBJ)~X * (f OBJ)~Y -o f~supported(X,Y)").unwrap();
        let mut b = Bindings::new();
        b.insert("X".into(), Binding::Term(Term::cst("Bill")));
        b.insert("Y".into(), Binding::Term(Term::cst("NAFTA")));
        let g = instantiate(&f, &b).unwrap();
        let expect =
            parse_glue("(f SUBJ)~Bill * (f OBJ)~NAFTA -o f~supported(Bill,NAFTA)").unwrap();
        assert_eq!(g, expect);
    }

    #[test]
    fn instantiate_qnp_consequent() {
        // H := f, S := \x. and(supported(Bill,x), opposed(Hillary,x))
        let f = parse_glue(
            "forall H,S. (forall x. h~x -o H~S(x)) -o H~two(z, trade-bill(z), S(z))",
        )
        .unwrap();
        let mut b = Bindings::new();
        b.insert("H".into(), Binding::Handle(Handle::Node(Label::new("f"))));
        b.insert(
            "S".into(),
            Binding::Term(
                parse_term("\\x. and(supported(Bill, x), opposed(Hillary, x))").unwrap(),
            ),
        );
        let g = instantiate(&f, &b).unwrap();
        let (_, _, consequent) = g.as_implication().unwrap();
        if let GlueFormula::Means { handle, term } = consequent {
            assert_eq!(*handle, Handle::Node(Label::new("f")));
            let norm = crate::meaning::normalize(term).unwrap();
            let expect = parse_term(
                "two(z, trade-bill(z), and(supported(Bill, z), opposed(Hillary, z)))",
            )
            .unwrap();
            assert!(crate::meaning::alpha_equal(&norm, &expect));
        } else {
            panic!("expected means atom");
        }
    }

    #[test]
    fn instantiate_sort_errors() {
        let f = parse_glue("forall X,Y. (f SUBJ)~X * (f OBJ)~Y -o f~supported(X,Y)").unwrap();
        let mut b = Bindings::new();
        b.insert("X".into(), Binding::Label(Label::new("g")));
        assert!(matches!(
            instantiate(&f, &b),
            Err(GlueError::SortClash { .. })
        ));
        let mut b2 = Bindings::new();
        b2.insert("Q".into(), Binding::Term(Term::cst("x")));
        assert!(matches!(
            instantiate(&f, &b2),
            Err(GlueError::NotOutermost(_))
        ));
    }

    #[test]
    fn instantiate_preserves_closedness() {
        let f = parse_glue(
            "forall H,S. (forall x. h~x -o H~S(x)) -o H~two(z, trade-bill(z), S(z))",
        )
        .unwrap();
        assert!(free_glue_vars(&f).is_empty());
        let mut b = Bindings::new();
        b.insert("H".into(), Binding::Handle(Handle::Node(Label::new("f"))));
        b.insert("S".into(), Binding::Term(parse_term("\\x. win(x)").unwrap()));
        let g = instantiate(&f, &b).unwrap();
        assert!(free_glue_vars(&g).is_empty());
    }
}
