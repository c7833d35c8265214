//! Backward-chaining proof search with explicit resource threading.
//!
//! A goal is a handle; proving it enumerates every way the premises can
//! yield a meaning for that handle, returning the surviving resource
//! context alongside each result so the caller can demand exact
//! consumption. All choice points (resource, fact, antecedent order,
//! bang copies) are explored exhaustively under the search limits.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::rc::Rc;

use crate::fstruct::{Label, RRelation};
use crate::glue::{self, Binding, Bindings, GlueFormula, Handle, Sort};
use crate::lexicon::{Premise, PremiseSet};
use crate::meaning::{alpha_equal, normalize, substitute, Substitution, Term, RESERVED_PREFIX};
use crate::prover::trace::{ProofNode, Rule};
use crate::prover::{ProveError, SearchLimits};

/// One slot of a duplication plan: a premise copy with its proof leaf.
pub(crate) struct PlanPremise {
    pub formula: GlueFormula,
    pub base: usize,
    pub copy: usize,
    pub node: Rc<ProofNode>,
    pub name: String,
}

pub(crate) struct Plan {
    pub linear: Vec<PlanPremise>,
}

/// Expand the premise list with `extra[k]` duplications of each
/// quantified-NP premise `qnp_bases[k]`. Copies share a chain of
/// duplication nodes so the trace shows the rule applications.
pub(crate) fn build_plan(p: &PremiseSet, qnp_bases: &[usize], extra: &[usize]) -> Plan {
    let mut linear = Vec::new();
    for (i, prem) in p.linear.iter().enumerate() {
        let k = qnp_bases
            .iter()
            .position(|&b| b == i)
            .map(|pos| extra[pos])
            .unwrap_or(0);
        let name = format!("{}@{}", prem.key, prem.label);
        let mut chain: Vec<Rc<ProofNode>> =
            vec![ProofNode::leaf(Rule::Premise { id: i }, prem.formula.clone())];
        for j in 1..=k {
            chain.push(ProofNode::derived(
                Rule::QnpDup { id: i },
                vec![chain[j - 1].clone()],
                prem.formula.clone(),
            ));
        }
        for copy in 0..=k {
            // consumers attach to the duplication chain so that each
            // node's output is drawn at most twice (once by the next
            // duplication, once or twice by actual consumers)
            let node = chain[(copy + 1).min(k)].clone();
            linear.push(PlanPremise {
                formula: prem.formula.clone(),
                base: i,
                copy,
                node,
                name: name.clone(),
            });
        }
    }
    Plan { linear }
}

/// A consumption of a node meaning, shareable across role positions:
/// Axiom I's inner bang permits one output per distinct fact.
#[derive(Clone)]
pub(crate) struct LedgerEntry {
    pub child: Label,
    pub term: Term,
    pub scope: usize,
    pub facts_used: Vec<usize>,
    pub node: Rc<ProofNode>,
}

#[derive(Clone)]
pub(crate) struct Hyp {
    pub formula: GlueFormula,
    pub scope: usize,
    pub consumed: bool,
    pub node: Rc<ProofNode>,
}

/// The mutable half of a derivation branch. Cloned at every choice
/// point; proof nodes inside are shared.
#[derive(Clone)]
pub(crate) struct Ctx {
    pub used: Vec<bool>,
    pub bang_uses: Vec<usize>,
    pub ledger: Vec<LedgerEntry>,
    pub hyps: Vec<Hyp>,
    pub scope: usize,
}

impl Ctx {
    pub fn new(n_linear: usize, n_banged: usize) -> Ctx {
        Ctx {
            used: vec![false; n_linear],
            bang_uses: vec![0; n_banged],
            ledger: Vec::new(),
            hyps: Vec::new(),
            scope: 0,
        }
    }

}

#[derive(Clone)]
pub(crate) struct Outcome {
    pub ctx: Ctx,
    pub term: Term,
    pub node: Rc<ProofNode>,
}

struct Seq {
    ctx: Ctx,
    bindings: Bindings,
    args: Vec<Rc<ProofNode>>,
    sigs: Vec<(usize, Vec<u64>)>,
}

pub(crate) struct Engine<'a> {
    linear: &'a [PlanPremise],
    banged: &'a [Premise],
    facts: &'a [RRelation],
    limits: &'a SearchLimits,
    bang_cap: usize,
    steps: &'a mut u64,
    eigen: u64,
    /// Banged-premise applications on the current search path, used to
    /// cut regress that consumes nothing.
    active: Vec<(usize, Handle, u64)>,
    /// Completed goal expansions, keyed by exact context and goal.
    memo: HashMap<(CtxKey, Handle), Vec<Outcome>>,
}

/// The parts of a context that determine what `prove` can return.
#[derive(PartialEq, Eq, Hash)]
struct CtxKey {
    used: Vec<bool>,
    bang_uses: Vec<usize>,
    scope: usize,
    ledger: Vec<(Label, Term, usize, Vec<usize>)>,
    hyps: Vec<(GlueFormula, usize, bool)>,
}

fn ctx_key(ctx: &Ctx) -> CtxKey {
    CtxKey {
        used: ctx.used.clone(),
        bang_uses: ctx.bang_uses.clone(),
        scope: ctx.scope,
        ledger: ctx
            .ledger
            .iter()
            .map(|e| (e.child.clone(), e.term.clone(), e.scope, e.facts_used.clone()))
            .collect(),
        hyps: ctx
            .hyps
            .iter()
            .map(|h| (h.formula.clone(), h.scope, h.consumed))
            .collect(),
    }
}

/// Keep at most two outcomes per (resource state, meaning) pair.
/// Outcomes agreeing on both are interchangeable in any continuation, so
/// dropping extras loses no readings; two are kept so that genuinely
/// different derivations of the same result remain observable.
fn dedup_outcomes(outcomes: Vec<Outcome>) -> Vec<Outcome> {
    let mut fps: Vec<u64> = Vec::new();
    let mut out: Vec<Outcome> = Vec::new();
    for o in outcomes {
        let mut h = DefaultHasher::new();
        fingerprint(&o.ctx).hash(&mut h);
        o.ctx.bang_uses.hash(&mut h);
        let fp = h.finish();
        let dups = fps
            .iter()
            .zip(&out)
            .filter(|(f, k)| **f == fp && alpha_equal(&k.term, &o.term))
            .count();
        if dups < 2 {
            fps.push(fp);
            out.push(o);
        }
    }
    out
}

/// Hash of everything in a context except the bang-use counters: if an
/// unlimited premise is re-applied to the same goal with this state
/// unchanged, the repetition cannot make progress.
fn fingerprint(ctx: &Ctx) -> u64 {
    let mut h = DefaultHasher::new();
    ctx.used.hash(&mut h);
    ctx.scope.hash(&mut h);
    for e in &ctx.ledger {
        e.child.hash(&mut h);
        e.term.hash(&mut h);
        e.facts_used.hash(&mut h);
    }
    for hyp in &ctx.hyps {
        hyp.formula.hash(&mut h);
        hyp.scope.hash(&mut h);
        hyp.consumed.hash(&mut h);
    }
    h.finish()
}

impl<'a> Engine<'a> {
    pub fn new(
        plan: &'a Plan,
        p: &'a PremiseSet,
        limits: &'a SearchLimits,
        bang_cap: usize,
        steps: &'a mut u64,
    ) -> Engine<'a> {
        Engine {
            linear: &plan.linear,
            banged: &p.banged,
            facts: &p.facts,
            limits,
            bang_cap,
            steps,
            eigen: 0,
            active: Vec::new(),
            memo: HashMap::new(),
        }
    }

    fn tick(&mut self) -> Result<(), ProveError> {
        *self.steps += 1;
        if *self.steps > self.limits.max_steps {
            Err(ProveError::StepLimit(self.limits.max_steps))
        } else {
            Ok(())
        }
    }

    /// Every derivation of a meaning for `goal` from the context.
    pub fn prove(&mut self, ctx: &Ctx, goal: &Handle) -> Result<Vec<Outcome>, ProveError> {
        let key = (ctx_key(ctx), goal.clone());
        if let Some(cached) = self.memo.get(&key) {
            return Ok(cached.clone());
        }
        self.tick()?;
        let mut out = Vec::new();

        // hypotheses in scope
        for hi in 0..ctx.hyps.len() {
            if ctx.hyps[hi].consumed {
                continue;
            }
            let hf = ctx.hyps[hi].formula.clone();
            let node = ctx.hyps[hi].node.clone();
            match &hf {
                GlueFormula::Means { handle, term } if handle == goal => {
                    let mut c2 = ctx.clone();
                    c2.hyps[hi].consumed = true;
                    out.push(Outcome { ctx: c2, term: term.clone(), node });
                }
                _ if hf.as_implication().is_some() => {
                    let mut c2 = ctx.clone();
                    c2.hyps[hi].consumed = true;
                    out.extend(self.use_implication(&c2, node, &hf, goal)?);
                }
                _ => {}
            }
        }

        // linear premises
        for i in 0..self.linear.len() {
            if ctx.used[i] {
                continue;
            }
            if self.linear[i].copy > 0 {
                // copies of a duplicated premise are interchangeable;
                // consume them lowest-index first
                let base = self.linear[i].base;
                if (0..i).any(|j| self.linear[j].base == base && !ctx.used[j]) {
                    continue;
                }
            }
            let f = self.linear[i].formula.clone();
            let node = self.linear[i].node.clone();
            match &f {
                GlueFormula::Means { handle, term } if handle == goal => {
                    let mut c2 = ctx.clone();
                    c2.used[i] = true;
                    out.push(Outcome { ctx: c2, term: term.clone(), node });
                }
                _ if f.as_implication().is_some() => {
                    let mut c2 = ctx.clone();
                    c2.used[i] = true;
                    out.extend(self.use_implication(&c2, node, &f, goal)?);
                }
                _ => {}
            }
        }

        // banged premises
        for b in 0..self.banged.len() {
            if ctx.bang_uses[b] >= self.bang_cap {
                continue;
            }
            let f = self.banged[b].formula.clone();
            let node = ProofNode::leaf(Rule::BangCopy { id: b }, f.clone());
            match &f {
                GlueFormula::Means { handle, term } if handle == goal => {
                    let mut c2 = ctx.clone();
                    c2.bang_uses[b] += 1;
                    out.push(Outcome { ctx: c2, term: term.clone(), node });
                }
                _ if f.as_implication().is_some() => {
                    let fp = fingerprint(ctx);
                    if self
                        .active
                        .iter()
                        .any(|(bb, g, h)| *bb == b && g == goal && *h == fp)
                    {
                        continue;
                    }
                    let mut c2 = ctx.clone();
                    c2.bang_uses[b] += 1;
                    self.active.push((b, goal.clone(), fp));
                    let res = self.use_implication(&c2, node, &f, goal);
                    self.active.pop();
                    out.extend(res?);
                }
                _ => {}
            }
        }

        // Axiom I: a role position (F P) means whatever its filler means
        if let Handle::Slot(parent, attr) = goal {
            for fi in 0..self.facts.len() {
                let fact = self.facts[fi].clone();
                if fact.parent != *parent || fact.attr != *attr {
                    continue;
                }
                // reuse an earlier consumption of the filler's meaning;
                // the axiom's inner bang grants one output per distinct fact
                for ei in 0..ctx.ledger.len() {
                    let e = &ctx.ledger[ei];
                    if e.child != fact.child || e.facts_used.contains(&fi) {
                        continue;
                    }
                    let term = e.term.clone();
                    let node = ProofNode::derived(
                        Rule::AxiomI { fact: fi },
                        vec![e.node.clone()],
                        GlueFormula::means(goal.clone(), term.clone()),
                    );
                    let mut c2 = ctx.clone();
                    c2.ledger[ei].facts_used.push(fi);
                    out.push(Outcome { ctx: c2, term, node });
                }
                // or consume a fresh derivation of the filler
                for o in self.prove(ctx, &Handle::Node(fact.child.clone()))? {
                    let mut c2 = o.ctx;
                    c2.ledger.push(LedgerEntry {
                        child: fact.child.clone(),
                        term: o.term.clone(),
                        scope: c2.scope,
                        facts_used: vec![fi],
                        node: o.node.clone(),
                    });
                    let node = ProofNode::derived(
                        Rule::AxiomI { fact: fi },
                        vec![o.node],
                        GlueFormula::means(goal.clone(), o.term.clone()),
                    );
                    out.push(Outcome { ctx: c2, term: o.term, node });
                }
            }
        }

        let out = dedup_outcomes(out);
        self.memo.insert(key, out.clone());
        Ok(out)
    }

    /// Fire an implication resource at a goal: match the consequent
    /// handle, prove the antecedent conjuncts in every order, and release
    /// the instantiated consequent.
    fn use_implication(
        &mut self,
        ctx: &Ctx,
        source: Rc<ProofNode>,
        formula: &GlueFormula,
        goal: &Handle,
    ) -> Result<Vec<Outcome>, ProveError> {
        let Some((vars, conjuncts, consequent)) = formula.as_implication() else {
            return Ok(Vec::new());
        };
        let GlueFormula::Means { handle: chandle, term: cterm } = consequent else {
            return Ok(Vec::new());
        };
        let vars: Vec<(String, Sort)> = vars.to_vec();
        let conjuncts: Vec<GlueFormula> = conjuncts.into_iter().cloned().collect();
        let cterm = cterm.clone();
        let mut bindings = Bindings::new();
        match chandle {
            Handle::Var(v) => {
                bindings.insert(v.clone(), Binding::Handle(goal.clone()));
            }
            h if h == goal => {}
            _ => return Ok(Vec::new()),
        }

        let sym: Vec<(usize, usize)> = symmetric_pairs(&conjuncts);
        let mut out = Vec::new();
        for perm in permutations(conjuncts.len()) {
            // interchangeable conjuncts are proven in input order only
            let in_order = sym.iter().all(|(i, j)| {
                let pi = perm.iter().position(|&x| x == *i).unwrap();
                let pj = perm.iter().position(|&x| x == *j).unwrap();
                pi < pj
            });
            if !in_order {
                continue;
            }
            let seqs =
                self.prove_conjuncts(ctx, &conjuncts, &perm, 0, bindings.clone(), Vec::new(), Vec::new())?;
            'seq: for seq in seqs {
                // canonical assignment for interchangeable conjuncts:
                // nondecreasing consumption signatures
                for (i, j) in &sym {
                    let si = seq.sigs.iter().find(|(c, _)| c == i).map(|(_, s)| s);
                    let sj = seq.sigs.iter().find(|(c, _)| c == j).map(|(_, s)| s);
                    if let (Some(si), Some(sj)) = (si, sj) {
                        if si > sj {
                            continue 'seq;
                        }
                    }
                }
                if vars.iter().any(|(n, _)| !seq.bindings.contains_key(n)) {
                    continue;
                }
                let mut subst = Substitution::new();
                for (name, value) in &seq.bindings {
                    if let Binding::Term(t) = value {
                        subst.insert(name.clone(), t.clone());
                    }
                }
                let Ok(term) = normalize(&substitute(&cterm, &subst)) else { continue };
                let Ok(inst) = glue::instantiate(formula, &seq.bindings) else { continue };
                let mut sorted: Vec<(String, Binding)> =
                    seq.bindings.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
                sorted.sort_by(|a, b| a.0.cmp(&b.0));
                let inst_node = ProofNode::derived(
                    Rule::Instantiate { bindings: sorted },
                    vec![source.clone()],
                    inst,
                );
                let mut inputs = vec![inst_node];
                inputs.extend(seq.args);
                let node = ProofNode::derived(
                    Rule::ModusPonens,
                    inputs,
                    GlueFormula::means(goal.clone(), term.clone()),
                );
                out.push(Outcome { ctx: seq.ctx, term, node });
            }
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn prove_conjuncts(
        &mut self,
        ctx: &Ctx,
        conjuncts: &[GlueFormula],
        perm: &[usize],
        pos: usize,
        bindings: Bindings,
        args: Vec<Rc<ProofNode>>,
        sigs: Vec<(usize, Vec<u64>)>,
    ) -> Result<Vec<Seq>, ProveError> {
        if pos == perm.len() {
            return Ok(vec![Seq { ctx: ctx.clone(), bindings, args, sigs }]);
        }
        let ci = perm[pos];
        let c = glue::apply_free(&conjuncts[ci], &bindings);
        let mut out = Vec::new();
        match &c {
            GlueFormula::Means { handle, term: pattern } => {
                if matches!(handle, Handle::Var(_)) {
                    return Ok(out);
                }
                for o in self.prove(ctx, handle)? {
                    let mut b2 = bindings.clone();
                    let matched = match pattern {
                        Term::Var(v) => {
                            b2.insert(v.clone(), Binding::Term(o.term.clone()));
                            true
                        }
                        p if p.free_vars().is_empty() => {
                            match (normalize(p), normalize(&o.term)) {
                                (Ok(a), Ok(b)) => alpha_equal(&a, &b),
                                _ => false,
                            }
                        }
                        _ => false,
                    };
                    if !matched {
                        continue;
                    }
                    let s = self.signature(ctx, &o.ctx);
                    let mut args2 = args.clone();
                    args2.push(o.node);
                    let mut sigs2 = sigs.clone();
                    sigs2.push((ci, s));
                    out.extend(self.prove_conjuncts(&o.ctx, conjuncts, perm, pos + 1, b2, args2, sigs2)?);
                }
            }
            _ if c.as_implication().is_some() => {
                for (c2, b2, node, s) in self.hypothetical(ctx, &c)? {
                    let mut merged = bindings.clone();
                    for (k, v) in b2 {
                        merged.insert(k, v);
                    }
                    let mut args2 = args.clone();
                    args2.push(node);
                    let mut sigs2 = sigs.clone();
                    sigs2.push((ci, s));
                    out.extend(self.prove_conjuncts(&c2, conjuncts, perm, pos + 1, merged, args2, sigs2)?);
                }
            }
            _ => {}
        }
        Ok(out)
    }

    /// Satisfy a nested-implication antecedent by hypothetical reasoning:
    /// assume its antecedent with fresh eigenvariables, derive its
    /// conclusion, and discharge, extracting bindings for the enclosing
    /// premise's variables.
    fn hypothetical(
        &mut self,
        ctx: &Ctx,
        c: &GlueFormula,
    ) -> Result<Vec<(Ctx, Bindings, Rc<ProofNode>, Vec<u64>)>, ProveError> {
        if ctx.scope >= self.limits.max_hypothesis_depth {
            return Ok(Vec::new());
        }
        self.tick()?;
        let (vs, ant, cons) = match c {
            GlueFormula::Forall(vs, b) => match &**b {
                GlueFormula::Lolli(a, k) => (vs.clone(), (**a).clone(), (**k).clone()),
                _ => return Ok(Vec::new()),
            },
            GlueFormula::Lolli(a, k) => (Vec::new(), (**a).clone(), (**k).clone()),
            _ => return Ok(Vec::new()),
        };

        let mut einst = Bindings::new();
        let mut eigens: Vec<String> = Vec::new();
        for (name, sort) in &vs {
            self.eigen += 1;
            match sort {
                Sort::Meaning | Sort::Function => {
                    let e = format!("{}e{}", RESERVED_PREFIX, self.eigen);
                    eigens.push(e.clone());
                    einst.insert(name.clone(), Binding::Term(Term::cst(e)));
                }
                Sort::Handle => {
                    let l = Label::new(format!("{}s{}", RESERVED_PREFIX, self.eigen));
                    einst.insert(name.clone(), Binding::Handle(Handle::Node(l)));
                }
                Sort::Label => {
                    let l = Label::new(format!("{}l{}", RESERVED_PREFIX, self.eigen));
                    einst.insert(name.clone(), Binding::Label(l));
                }
                Sort::Attr => return Ok(Vec::new()),
            }
        }
        let ant = glue::apply_free(&ant, &einst);
        let GlueFormula::Means { handle: ghandle, term: gpattern } =
            glue::apply_free(&cons, &einst)
        else {
            return Ok(Vec::new());
        };
        if matches!(ghandle, Handle::Var(_)) {
            return Ok(Vec::new());
        }

        let hyp_node = ProofNode::leaf(Rule::Hypothesis, ant.clone());
        let mut inner = ctx.clone();
        inner.scope += 1;
        let scope = inner.scope;
        inner.hyps.push(Hyp { formula: ant, scope, consumed: false, node: hyp_node.clone() });

        let mut out = Vec::new();
        for o in self.prove(&inner, &ghandle)? {
            let mut c3 = o.ctx;
            if c3.hyps.iter().any(|h| h.scope == scope && !h.consumed) {
                continue;
            }
            // every meaning eigenvariable must figure in the conclusion,
            // and the conclusion must not be a bare eigenvariable (which
            // would abstract to a vacuous identity)
            if eigens.iter().any(|e| !o.term.mentions_const(e)) {
                continue;
            }
            if let Term::Const(name) = &o.term {
                if eigens.contains(name) {
                    continue;
                }
            }
            let Some(extracted) = extract_bindings(&gpattern, &o.term, &eigens) else {
                continue;
            };
            if extracted
                .iter()
                .any(|(_, t)| eigens.iter().any(|e| t.mentions_const(e)))
            {
                continue;
            }
            c3.hyps.retain(|h| h.scope < scope);
            c3.scope = scope - 1;
            // meanings consumed under the hypothesis cannot feed role
            // positions outside it
            c3.ledger.retain(|e| e.scope < scope);

            let mut b2 = Bindings::new();
            for (v, t) in &extracted {
                b2.insert(v.clone(), Binding::Term(t.clone()));
            }
            let Some(output) = glue::normalize_formula(&glue::apply_free(c, &b2)) else {
                continue;
            };
            let node =
                ProofNode::derived(Rule::Discharge, vec![hyp_node.clone(), o.node], output);
            let s = self.signature(ctx, &c3);
            out.push((c3, b2, node, s));
        }
        Ok(out)
    }

    /// What a subderivation consumed, as a sorted code list (linear ids,
    /// then bang copies, then fact uses, then hypothesis consumptions).
    fn signature(&self, before: &Ctx, after: &Ctx) -> Vec<u64> {
        let mut s = Vec::new();
        for i in 0..before.used.len() {
            if !before.used[i] && after.used[i] {
                s.push(i as u64);
            }
        }
        for b in 0..before.bang_uses.len() {
            for _ in before.bang_uses[b]..after.bang_uses[b] {
                s.push(10_000 + b as u64);
            }
        }
        let fact_uses = |c: &Ctx, fi: usize| -> usize {
            c.ledger
                .iter()
                .map(|e| e.facts_used.iter().filter(|&&x| x == fi).count())
                .sum()
        };
        for fi in 0..self.facts.len() {
            for _ in fact_uses(before, fi)..fact_uses(after, fi) {
                s.push(20_000 + fi as u64);
            }
        }
        for h in 0..before.hyps.len() {
            if !before.hyps[h].consumed && after.hyps.get(h).map_or(false, |x| x.consumed) {
                s.push(30_000 + h as u64);
            }
        }
        s.sort_unstable();
        s
    }
}

/// Match a conclusion pattern against a derived meaning, yielding
/// bindings for the enclosing premise's variables. Patterns are either a
/// bare variable, a concrete term, or a variable applied to a single
/// eigenvariable (possibly under the intension operator).
fn extract_bindings(
    pattern: &Term,
    m: &Term,
    eigens: &[String],
) -> Option<Vec<(String, Term)>> {
    match pattern {
        Term::Var(v) => {
            if eigens.iter().any(|e| m.mentions_const(e)) {
                return None;
            }
            Some(vec![(v.clone(), m.clone())])
        }
        p if p.free_vars().is_empty() => {
            let (a, b) = (normalize(p).ok()?, normalize(m).ok()?);
            if alpha_equal(&a, &b) {
                Some(Vec::new())
            } else {
                None
            }
        }
        Term::App(head, arguments) if arguments.len() == 1 => {
            let Term::Var(v) = &**head else { return None };
            // a conclusion that merely applies one of this scope's
            // eigenvariables would abstract to a contentless wrapper
            // (e.g. λQ.ˇQ(t)); bar it like the bare-eigenvariable case
            if let Term::App(mh, _) = m {
                if matches!(&**mh, Term::Const(c) if eigens.contains(c)) {
                    return None;
                }
            }
            let arg = &arguments[0];
            let (eigen, binder_base, intensional) = match arg {
                Term::Const(c) if eigens.contains(c) => (c.clone(), "x", false),
                Term::Intension(b) => match &**b {
                    Term::Const(c) if eigens.contains(c) => (c.clone(), "Q", true),
                    _ => return None,
                },
                _ => return None,
            };
            let binder = fresh_binder(binder_base, m);
            let occurrence = if intensional {
                Term::Extension(Box::new(Term::var(binder.clone())))
            } else {
                Term::var(binder.clone())
            };
            let value = Term::lam(binder, m.replace_const(&eigen, &occurrence));
            // abstraction must reproduce the conclusion exactly
            let applied = Term::apply(value.clone(), vec![arg.clone()]);
            let (a, b) = (normalize(&applied).ok()?, normalize(m).ok()?);
            if !alpha_equal(&a, &b) {
                return None;
            }
            Some(vec![(v.clone(), value)])
        }
        _ => None,
    }
}

/// A binder name based on `base` that neither occurs nor binds anywhere
/// in `t`.
fn fresh_binder(base: &str, t: &Term) -> String {
    let mut names = t.free_vars();
    collect_binders(t, &mut names);
    if !names.contains(base) {
        return base.to_string();
    }
    let mut i = 1u32;
    loop {
        let cand = format!("{base}{i}");
        if !names.contains(&cand) {
            return cand;
        }
        i += 1;
    }
}

fn collect_binders(t: &Term, out: &mut std::collections::HashSet<String>) {
    match t {
        Term::Var(_) | Term::Const(_) => {}
        Term::App(h, args) => {
            collect_binders(h, out);
            for a in args {
                collect_binders(a, out);
            }
        }
        Term::Lam(x, b) => {
            out.insert(x.clone());
            collect_binders(b, out);
        }
        Term::Intension(b) | Term::Extension(b) => collect_binders(b, out),
        Term::Quant { var, restr, scope, .. } => {
            out.insert(var.clone());
            collect_binders(restr, out);
            collect_binders(scope, out);
        }
    }
}

/// Conjunct pairs that are interchangeable: same handle, each consuming
/// a bare-variable meaning.
fn symmetric_pairs(conjuncts: &[GlueFormula]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..conjuncts.len() {
        for j in i + 1..conjuncts.len() {
            if let (
                GlueFormula::Means { handle: h1, term: Term::Var(_) },
                GlueFormula::Means { handle: h2, term: Term::Var(_) },
            ) = (&conjuncts[i], &conjuncts[j])
            {
                if h1 == h2 && !matches!(h1, Handle::Var(_)) {
                    out.push((i, j));
                }
            }
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            cur.push(x);
            go(cur, rest, out);
            cur.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out
}

/// True for formulas of the quantified-NP shape: `∀H,S. (∀x. ℓ~x -o
/// H~S(x)) -o H~…`, the shape the duplication rule applies to.
pub fn is_qnp_shape(f: &GlueFormula) -> bool {
    let Some((vars, conjuncts, consequent)) = f.as_implication() else {
        return false;
    };
    if vars.len() != 2 || conjuncts.len() != 1 {
        return false;
    }
    let handle_var = vars.iter().find(|(_, s)| *s == Sort::Handle);
    let has_fn = vars.iter().any(|(_, s)| *s == Sort::Function);
    let (Some((hname, _)), true) = (handle_var, has_fn) else {
        return false;
    };
    if conjuncts[0].as_implication().is_none() {
        return false;
    }
    matches!(consequent, GlueFormula::Means { handle: Handle::Var(v), .. } if v == hname)
}

/// All ways to split `total` duplications among `n` quantified premises.
pub(crate) fn compositions(total: usize, n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, n - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}
