//! The meaning language: untyped higher-order terms with constants,
//! abstraction, application, intension/extension operators and
//! generalized-quantifier terms.
//!
//! Terms are immutable; all operations are pure.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

/// Prefix reserved for constants invented during hypothetical reasoning.
/// A finished reading must never contain one.
pub const RESERVED_PREFIX: &str = "#";

/// A term of the meaning language.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(String),
    /// n-ary application, kept flattened: `App(App(f,a),b)` is normalized
    /// to `App(f, [a, b])` on construction.
    App(Box<Term>, Vec<Term>),
    Lam(String, Box<Term>),
    /// Montague's `^`.
    Intension(Box<Term>),
    /// Montague's `ˇ`.
    Extension(Box<Term>),
    /// Generalized quantifier `det(var, restriction, scope)`; `var` binds
    /// in both the restriction and the scope.
    Quant {
        det: String,
        var: String,
        restr: Box<Term>,
        scope: Box<Term>,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("reduction step bound exceeded ({0} steps)")]
    StepBound(u64),
}

/// A simultaneous substitution of terms for free variables.
pub type Substitution = HashMap<String, Term>;

pub const DEFAULT_STEP_BOUND: u64 = 10_000;

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn cst(name: impl Into<String>) -> Term {
        Term::Const(name.into())
    }

    pub fn lam(binder: impl Into<String>, body: Term) -> Term {
        Term::Lam(binder.into(), Box::new(body))
    }

    /// Application that keeps the spine flattened.
    pub fn apply(head: Term, mut args: Vec<Term>) -> Term {
        if args.is_empty() {
            return head;
        }
        match head {
            Term::App(h, mut first) => {
                first.append(&mut args);
                Term::App(h, first)
            }
            other => Term::App(Box::new(other), args),
        }
    }

    pub fn quant(
        det: impl Into<String>,
        var: impl Into<String>,
        restr: Term,
        scope: Term,
    ) -> Term {
        Term::Quant {
            det: det.into(),
            var: var.into(),
            restr: Box::new(restr),
            scope: Box::new(scope),
        }
    }

    pub fn free_vars(&self) -> HashSet<String> {
        let mut out = HashSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut HashSet<String>) {
        match self {
            Term::Var(v) => {
                if !bound.iter().any(|b| b == v) {
                    out.insert(v.clone());
                }
            }
            Term::Const(_) => {}
            Term::App(h, args) => {
                h.collect_free(bound, out);
                for a in args {
                    a.collect_free(bound, out);
                }
            }
            Term::Lam(x, b) => {
                bound.push(x.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            Term::Intension(b) | Term::Extension(b) => b.collect_free(bound, out),
            Term::Quant { var, restr, scope, .. } => {
                bound.push(var.clone());
                restr.collect_free(bound, out);
                scope.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// True if the term mentions a constant from the reserved namespace
    /// used for hypothetical-reasoning eigenvariables.
    pub fn contains_reserved(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(c) => c.starts_with(RESERVED_PREFIX),
            Term::App(h, args) => h.contains_reserved() || args.iter().any(|a| a.contains_reserved()),
            Term::Lam(_, b) | Term::Intension(b) | Term::Extension(b) => b.contains_reserved(),
            Term::Quant { restr, scope, .. } => {
                restr.contains_reserved() || scope.contains_reserved()
            }
        }
    }

    /// True if the constant `name` occurs anywhere in the term.
    pub fn mentions_const(&self, name: &str) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(c) => c == name,
            Term::App(h, args) => h.mentions_const(name) || args.iter().any(|a| a.mentions_const(name)),
            Term::Lam(_, b) | Term::Intension(b) | Term::Extension(b) => b.mentions_const(name),
            Term::Quant { restr, scope, .. } => {
                restr.mentions_const(name) || scope.mentions_const(name)
            }
        }
    }

    /// Replace every occurrence of the constant `name` by `replacement`.
    /// Constants cannot be captured, so no renaming is needed for the
    /// occurrence sites; binders in `replacement` are left untouched.
    pub fn replace_const(&self, name: &str, replacement: &Term) -> Term {
        match self {
            Term::Const(c) if c == name => replacement.clone(),
            Term::Var(_) | Term::Const(_) => self.clone(),
            Term::App(h, args) => Term::apply(
                h.replace_const(name, replacement),
                args.iter().map(|a| a.replace_const(name, replacement)).collect(),
            ),
            Term::Lam(x, b) => Term::lam(x.clone(), b.replace_const(name, replacement)),
            Term::Intension(b) => Term::Intension(Box::new(b.replace_const(name, replacement))),
            Term::Extension(b) => Term::Extension(Box::new(b.replace_const(name, replacement))),
            Term::Quant { det, var, restr, scope } => Term::Quant {
                det: det.clone(),
                var: var.clone(),
                restr: Box::new(restr.replace_const(name, replacement)),
                scope: Box::new(scope.replace_const(name, replacement)),
            },
        }
    }

    /// Count of `Quant` nodes in the term.
    pub fn quant_count(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 0,
            Term::App(h, args) => {
                h.quant_count() + args.iter().map(Term::quant_count).sum::<usize>()
            }
            Term::Lam(_, b) | Term::Intension(b) | Term::Extension(b) => b.quant_count(),
            Term::Quant { restr, scope, .. } => 1 + restr.quant_count() + scope.quant_count(),
        }
    }
}

fn fresh_name(base: &str, avoid: &HashSet<String>) -> String {
    // strip a numeric suffix so x1 freshens to x2, not x11
    let stem: &str = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    if !avoid.contains(base) {
        return base.to_string();
    }
    let mut i = 1u32;
    loop {
        let cand = format!("{stem}{i}");
        if !avoid.contains(&cand) {
            return cand;
        }
        i += 1;
    }
}

/// Capture-avoiding simultaneous substitution.
pub fn substitute(t: &Term, s: &Substitution) -> Term {
    if s.is_empty() {
        return t.clone();
    }
    match t {
        Term::Var(v) => s.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Const(_) => t.clone(),
        Term::App(h, args) => Term::apply(
            substitute(h, s),
            args.iter().map(|a| substitute(a, s)).collect(),
        ),
        Term::Lam(x, b) => {
            let (x2, b2) = subst_under_binder(x, b, s, |body, s| substitute(body, s));
            Term::lam(x2, b2)
        }
        Term::Intension(b) => Term::Intension(Box::new(substitute(b, s))),
        Term::Extension(b) => Term::Extension(Box::new(substitute(b, s))),
        Term::Quant { det, var, restr, scope } => {
            let mut inner = s.clone();
            inner.remove(var);
            let needs_rename = binder_clashes(var, &[restr, scope], &inner);
            if needs_rename {
                let mut avoid = avoid_set(&[restr, scope], &inner);
                avoid.insert(var.clone());
                let v2 = fresh_name(var, &avoid);
                let mut ren = Substitution::new();
                ren.insert(var.clone(), Term::var(v2.clone()));
                let r2 = substitute(&substitute(restr, &ren), &inner);
                let sc2 = substitute(&substitute(scope, &ren), &inner);
                Term::quant(det.clone(), v2, r2, sc2)
            } else {
                Term::Quant {
                    det: det.clone(),
                    var: var.clone(),
                    restr: Box::new(substitute(restr, &inner)),
                    scope: Box::new(substitute(scope, &inner)),
                }
            }
        }
    }
}

fn avoid_set(bodies: &[&Term], s: &Substitution) -> HashSet<String> {
    let mut avoid = HashSet::new();
    for body in bodies {
        for fv in body.free_vars() {
            if let Some(rep) = s.get(&fv) {
                avoid.extend(rep.free_vars());
            } else {
                avoid.insert(fv);
            }
        }
    }
    avoid
}

fn binder_clashes(binder: &str, bodies: &[&Term], s: &Substitution) -> bool {
    for body in bodies {
        for fv in body.free_vars() {
            if fv == binder {
                continue;
            }
            if let Some(rep) = s.get(&fv) {
                if rep.free_vars().contains(binder) {
                    return true;
                }
            }
        }
    }
    false
}

fn subst_under_binder(
    binder: &str,
    body: &Term,
    s: &Substitution,
    go: impl Fn(&Term, &Substitution) -> Term,
) -> (String, Term) {
    let mut inner = s.clone();
    inner.remove(binder);
    if binder_clashes(binder, &[body], &inner) {
        let mut avoid = avoid_set(&[body], &inner);
        avoid.insert(binder.to_string());
        let b2 = fresh_name(binder, &avoid);
        let mut ren = Substitution::new();
        ren.insert(binder.to_string(), Term::var(b2.clone()));
        (b2, go(&substitute(body, &ren), &inner))
    } else {
        (binder.to_string(), go(body, &inner))
    }
}

/// Beta-eta normalization with `ˇ^` cancellation, under the default step
/// bound.
pub fn normalize(t: &Term) -> Result<Term, NormalizeError> {
    normalize_bounded(t, DEFAULT_STEP_BOUND)
}

pub fn normalize_bounded(t: &Term, bound: u64) -> Result<Term, NormalizeError> {
    let mut steps = 0u64;
    norm(t, bound, &mut steps)
}

fn tick(bound: u64, steps: &mut u64) -> Result<(), NormalizeError> {
    *steps += 1;
    if *steps > bound {
        Err(NormalizeError::StepBound(bound))
    } else {
        Ok(())
    }
}

fn norm(t: &Term, bound: u64, steps: &mut u64) -> Result<Term, NormalizeError> {
    match t {
        Term::Var(_) | Term::Const(_) => Ok(t.clone()),
        Term::Lam(x, b) => {
            let b = norm(b, bound, steps)?;
            // eta: \x. f(..., x)  =>  f(...)   when x not free in the rest
            if let Term::App(h, args) = &b {
                if let Some(Term::Var(last)) = args.last() {
                    if last == x {
                        let rest_free = {
                            let mut fv = h.free_vars();
                            for a in &args[..args.len() - 1] {
                                fv.extend(a.free_vars());
                            }
                            fv
                        };
                        if !rest_free.contains(x) {
                            tick(bound, steps)?;
                            let reduced =
                                Term::apply((**h).clone(), args[..args.len() - 1].to_vec());
                            return Ok(reduced);
                        }
                    }
                }
            }
            Ok(Term::lam(x.clone(), b))
        }
        Term::App(h, args) => {
            let mut head = norm(h, bound, steps)?;
            let mut rest: Vec<Term> = Vec::with_capacity(args.len());
            for a in args {
                rest.push(norm(a, bound, steps)?);
            }
            // beta, one argument at a time
            loop {
                match head {
                    Term::Lam(x, body) if !rest.is_empty() => {
                        tick(bound, steps)?;
                        let arg = rest.remove(0);
                        let mut s = Substitution::new();
                        s.insert(x, arg);
                        head = norm(&substitute(&body, &s), bound, steps)?;
                    }
                    _ => break,
                }
            }
            Ok(Term::apply(head, rest))
        }
        Term::Intension(b) => Ok(Term::Intension(Box::new(norm(b, bound, steps)?))),
        Term::Extension(b) => {
            let b = norm(b, bound, steps)?;
            if let Term::Intension(inner) = b {
                tick(bound, steps)?;
                Ok(*inner)
            } else {
                Ok(Term::Extension(Box::new(b)))
            }
        }
        Term::Quant { det, var, restr, scope } => Ok(Term::Quant {
            det: det.clone(),
            var: var.clone(),
            restr: Box::new(norm(restr, bound, steps)?),
            scope: Box::new(norm(scope, bound, steps)?),
        }),
    }
}

/// Equality up to consistent renaming of bound variables.
pub fn alpha_equal(a: &Term, b: &Term) -> bool {
    alpha_eq(a, b, &mut Vec::new())
}

pub(crate) fn alpha_eq(a: &Term, b: &Term, pairs: &mut Vec<(String, String)>) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => {
            for (l, r) in pairs.iter().rev() {
                if l == x || r == y {
                    return l == x && r == y;
                }
            }
            x == y
        }
        (Term::Const(x), Term::Const(y)) => x == y,
        (Term::App(h1, a1), Term::App(h2, a2)) => {
            a1.len() == a2.len()
                && alpha_eq(h1, h2, pairs)
                && a1.iter().zip(a2).all(|(x, y)| alpha_eq(x, y, pairs))
        }
        (Term::Lam(x, b1), Term::Lam(y, b2)) => {
            pairs.push((x.clone(), y.clone()));
            let r = alpha_eq(b1, b2, pairs);
            pairs.pop();
            r
        }
        (Term::Intension(b1), Term::Intension(b2))
        | (Term::Extension(b1), Term::Extension(b2)) => alpha_eq(b1, b2, pairs),
        (
            Term::Quant { det: d1, var: v1, restr: r1, scope: s1 },
            Term::Quant { det: d2, var: v2, restr: r2, scope: s2 },
        ) => {
            if d1 != d2 {
                return false;
            }
            pairs.push((v1.clone(), v2.clone()));
            let r = alpha_eq(r1, r2, pairs) && alpha_eq(s1, s2, pairs);
            pairs.pop();
            r
        }
        _ => false,
    }
}

/// True if the term contains a beta redex or an `ˇ^` pair.
pub fn has_redex(t: &Term) -> bool {
    match t {
        Term::Var(_) | Term::Const(_) => false,
        Term::App(h, args) => {
            matches!(**h, Term::Lam(..)) || has_redex(h) || args.iter().any(has_redex)
        }
        Term::Lam(_, b) | Term::Intension(b) => has_redex(b),
        Term::Extension(b) => matches!(**b, Term::Intension(_)) || has_redex(b),
        Term::Quant { restr, scope, .. } => has_redex(restr) || has_redex(scope),
    }
}

// ---------------------------------------------------------------------------
// printing
// ---------------------------------------------------------------------------

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::App(h, args) => {
                match &**h {
                    Term::Var(_) | Term::Const(_) => write!(f, "{h}")?,
                    other => write!(f, "[{other}]")?,
                }
                write!(f, "(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Term::Lam(x, b) => write!(f, "\\{x}. {b}"),
            Term::Intension(b) => match &**b {
                Term::Var(_) | Term::Const(_) | Term::Intension(_) | Term::Extension(_) => {
                    write!(f, "^{b}")
                }
                Term::App(h, _) if matches!(**h, Term::Var(_) | Term::Const(_)) => {
                    write!(f, "^{b}")
                }
                Term::Quant { .. } => write!(f, "^{b}"),
                other => write!(f, "^[{other}]"),
            },
            Term::Extension(b) => match &**b {
                Term::Var(_) | Term::Const(_) | Term::Intension(_) | Term::Extension(_) => {
                    write!(f, "\u{2c7}{b}")
                }
                other => write!(f, "\u{2c7}[{other}]"),
            },
            Term::Quant { det, var, restr, scope } => {
                write!(f, "{det}({var}, {restr}, {scope})")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Error, PartialEq, Eq)]
#[error("term syntax error at byte {pos}: {msg}")]
pub struct TermParseError {
    pub pos: usize,
    pub msg: String,
}

pub fn parse_term(text: &str) -> Result<Term, TermParseError> {
    let mut p = TermParser::new(text);
    let t = p.term()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.err("trailing input after term"));
    }
    Ok(t)
}

pub(crate) struct TermParser<'a> {
    pub(crate) src: &'a str,
    pub(crate) pos: usize,
}

impl<'a> TermParser<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        TermParser { src, pos: 0 }
    }

    pub(crate) fn err(&self, msg: &str) -> TermParseError {
        TermParseError { pos: self.pos, msg: msg.to_string() }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    pub(crate) fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    pub(crate) fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    pub(crate) fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    pub(crate) fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, c: char) -> Result<(), TermParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn is_ident_start(c: char) -> bool {
        c.is_alphabetic() || c == '_' || c == '%'
    }

    fn is_ident_continue(c: char) -> bool {
        c.is_alphanumeric() || c == '_' || c == '-' || c == '\'' || c == '%'
    }

    pub(crate) fn ident(&mut self) -> Result<String, TermParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if Self::is_ident_start(c) => {
                self.bump();
            }
            _ => return Err(self.err("expected identifier")),
        }
        while let Some(c) = self.peek() {
            if Self::is_ident_continue(c) {
                self.bump();
            } else {
                break;
            }
        }
        Ok(self.src[start..self.pos].to_string())
    }

    pub(crate) fn term(&mut self) -> Result<Term, TermParseError> {
        self.skip_ws();
        if self.eat('\\') {
            let mut binders = vec![self.ident()?];
            loop {
                self.skip_ws();
                match self.peek() {
                    Some(c) if Self::is_ident_start(c) => binders.push(self.ident()?),
                    _ => break,
                }
            }
            self.expect('.')?;
            let mut body = self.term()?;
            for b in binders.into_iter().rev() {
                body = Term::lam(b.clone(), bind_const(body, &b));
            }
            return Ok(body);
        }
        self.prefix()
    }

    fn prefix(&mut self) -> Result<Term, TermParseError> {
        self.skip_ws();
        // `v^` is an ASCII alias for the caron extension operator
        if self.src[self.pos..].starts_with("v^") {
            self.pos += 2;
            let inner = self.prefix()?;
            return Ok(Term::Extension(Box::new(inner)));
        }
        match self.peek() {
            Some('^') => {
                self.bump();
                let inner = self.prefix()?;
                Ok(Term::Intension(Box::new(inner)))
            }
            Some('\u{2c7}') => {
                self.bump();
                let inner = self.prefix()?;
                Ok(Term::Extension(Box::new(inner)))
            }
            Some('\\') => self.term(),
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> Result<Term, TermParseError> {
        let mut head = self.atom()?;
        loop {
            self.skip_ws();
            if self.peek() == Some('(') {
                self.bump();
                let mut args = vec![self.term()?];
                while self.eat(',') {
                    args.push(self.term()?);
                }
                self.expect(')')?;
                head = classify_application(head, args);
            } else {
                break;
            }
        }
        Ok(head)
    }

    fn atom(&mut self) -> Result<Term, TermParseError> {
        self.skip_ws();
        match self.peek() {
            Some('[') => {
                self.bump();
                let t = self.term()?;
                self.expect(']')?;
                Ok(t)
            }
            Some(c) if Self::is_ident_start(c) => {
                let name = self.ident()?;
                Ok(Term::cst(name))
            }
            _ => Err(self.err("expected a term")),
        }
    }
}

/// Decide whether `head(args)` is a generalized quantifier. A three-place
/// application whose head is a plain name and whose first argument is a
/// bare lower-case identifier occurring free in the restriction or scope
/// reads as `det(var, restriction, scope)`.
fn classify_application(head: Term, args: Vec<Term>) -> Term {
    if args.len() == 3 {
        if let (Term::Const(det) | Term::Var(det), Term::Const(v) | Term::Var(v)) =
            (&head, &args[0])
        {
            let lower = v.chars().next().map(|c| c.is_lowercase()).unwrap_or(false);
            if lower {
                let occurs = args[1].mentions_const(v)
                    || args[2].mentions_const(v)
                    || args[1].free_vars().contains(v)
                    || args[2].free_vars().contains(v);
                if occurs {
                    let det = det.clone();
                    let v = v.clone();
                    let mut it = args.into_iter();
                    it.next();
                    let restr = bind_const(it.next().unwrap(), &v);
                    let scope = bind_const(it.next().unwrap(), &v);
                    return Term::quant(det, v, restr, scope);
                }
            }
        }
    }
    Term::apply(head, args)
}

/// The parser reads unknown identifiers as constants; once a quantifier
/// binder is recognized, its occurrences become variables.
fn bind_const(t: Term, name: &str) -> Term {
    t.replace_const(name, &Term::var(name))
}

/// Turn free occurrences of the given names from constants into variables.
/// Used by the glue parser, where universally bound names are known.
pub(crate) fn vars_from_consts(t: &Term, names: &HashSet<String>) -> Term {
    match t {
        Term::Const(c) if names.contains(c) => Term::var(c.clone()),
        Term::Var(_) | Term::Const(_) => t.clone(),
        Term::App(h, args) => Term::apply(
            vars_from_consts(h, names),
            args.iter().map(|a| vars_from_consts(a, names)).collect(),
        ),
        Term::Lam(x, b) => {
            let mut inner = names.clone();
            inner.remove(x);
            Term::lam(x.clone(), vars_from_consts(b, &inner))
        }
        Term::Intension(b) => Term::Intension(Box::new(vars_from_consts(b, names))),
        Term::Extension(b) => Term::Extension(Box::new(vars_from_consts(b, names))),
        Term::Quant { det, var, restr, scope } => {
            let mut inner = names.clone();
            inner.remove(var);
            Term::Quant {
                det: det.clone(),
                var: var.clone(),
                restr: Box::new(vars_from_consts(restr, &inner)),
                scope: Box::new(vars_from_consts(scope, &inner)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn nf(s: &str) -> Term {
        normalize(&p(s)).unwrap()
    }

    #[test]
    fn beta_identity() {
        let t = Term::apply(Term::lam("x", Term::var("x")), vec![Term::cst("Bill")]);
        assert_eq!(normalize(&t).unwrap(), Term::cst("Bill"));
    }

    #[test]
    fn extension_intension_cancel() {
        let t = Term::Extension(Box::new(Term::Intension(Box::new(Term::cst("NAFTA")))));
        assert_eq!(normalize(&t).unwrap(), Term::cst("NAFTA"));
    }

    #[test]
    fn quantifier_beta() {
        // (\S. two(z, candidate(z), S(z))) (\y. found(Hillary, y))
        let t = Term::apply(
            Term::lam(
                "S",
                Term::quant(
                    "two",
                    "z",
                    Term::apply(Term::cst("candidate"), vec![Term::var("z")]),
                    Term::apply(Term::var("S"), vec![Term::var("z")]),
                ),
            ),
            vec![Term::lam(
                "y",
                Term::apply(Term::cst("found"), vec![Term::cst("Hillary"), Term::var("y")]),
            )],
        );
        let expected = p("two(z, candidate(z), found(Hillary, z))");
        assert!(alpha_equal(&normalize(&t).unwrap(), &expected));
    }

    #[test]
    fn alpha_basic() {
        assert!(alpha_equal(&p("\\x. x"), &p("\\y. y")));
        assert!(alpha_equal(&p("two(z, c(z), s(z))"), &p("two(w, c(w), s(w))")));
        assert!(!alpha_equal(&p("supported(Bill, NAFTA)"), &p("opposed(Bill, NAFTA)")));
    }

    #[test]
    fn substitute_two_vars() {
        let t = Term::apply(Term::cst("supported"), vec![Term::var("X"), Term::var("Y")]);
        let mut s = Substitution::new();
        s.insert("X".into(), Term::cst("Bill"));
        s.insert("Y".into(), Term::cst("NAFTA"));
        assert_eq!(substitute(&t, &s), p("supported(Bill, NAFTA)"));
    }

    #[test]
    fn substitute_empty() {
        let t = Term::var("X");
        assert_eq!(substitute(&t, &Substitution::new()), t);
    }

    #[test]
    fn substitute_capture() {
        // (\x. Y(x)) [Y := \x. x]  --normalize-->  \x. x
        let t = Term::lam("x", Term::apply(Term::var("Y"), vec![Term::var("x")]));
        let mut s = Substitution::new();
        s.insert("Y".into(), Term::lam("x", Term::var("x")));
        let r = normalize(&substitute(&t, &s)).unwrap();
        assert!(alpha_equal(&r, &Term::lam("x", Term::var("x"))));
    }

    #[test]
    fn eta_reduces() {
        let t = p("\\x. f(x)");
        assert_eq!(normalize(&t).unwrap(), Term::cst("f"));
        // not eta when the variable occurs elsewhere
        let t2 = p("\\x. f(x, x)");
        assert!(matches!(normalize(&t2).unwrap(), Term::Lam(..)));
    }

    #[test]
    fn quantifier_parse_and_print() {
        let t = p("two(z, trade-bill(z), and(supported(Bill, z), opposed(Hillary, z)))");
        assert!(matches!(t, Term::Quant { .. }));
        assert_eq!(
            t.to_string(),
            "two(z, trade-bill(z), and(supported(Bill, z), opposed(Hillary, z)))"
        );
        let back = p(&t.to_string());
        assert!(alpha_equal(&t, &back));
    }

    #[test]
    fn extension_alias_and_brackets() {
        let a = p("[v^Q](x)");
        let b = p("[\u{2c7}Q](x)");
        assert!(alpha_equal(&a, &b));
        let printed = a.to_string();
        assert!(alpha_equal(&p(&printed), &a));
    }

    #[test]
    fn intensional_target_roundtrip() {
        let s = "and(wanted(Hillary, ^\\Q. two(x, candidate(x), [v^Q](x))), two(z, candidate(z), and(found(Hillary, z), supported(Hillary, z))))";
        let t = p(s);
        let back = p(&t.to_string());
        assert!(alpha_equal(&t, &back));
        assert_eq!(t.quant_count(), 2);
    }

    #[test]
    fn step_bound_reported() {
        // omega
        let d = Term::lam("x", Term::apply(Term::var("x"), vec![Term::var("x")]));
        let omega = Term::apply(d.clone(), vec![d]);
        assert!(matches!(
            normalize_bounded(&omega, 50),
            Err(NormalizeError::StepBound(50))
        ));
    }

    #[test]
    fn normal_forms_are_clean() {
        let t = nf("[\\S. two(z, candidate(z), S(z))](\\y. found(Hillary, y))");
        assert!(!has_redex(&t));
        let again = normalize(&t).unwrap();
        assert!(alpha_equal(&t, &again));
    }
}
