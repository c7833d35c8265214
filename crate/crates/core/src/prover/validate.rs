//! Independent re-checking of linearized derivations. The validator
//! shares no state with the search: it replays a trace step by step,
//! accounting for every resource credit, and accepts only derivations
//! that consume each linear premise exactly once and end at the claimed
//! meaning for the root node.

use std::collections::HashMap;

use crate::fstruct::Label;
use crate::glue::{
    self, alpha_equal_formula, normalize_formula, Binding, Bindings, GlueFormula, Handle,
    LabelRef, Sort,
};
use crate::lexicon::PremiseSet;
use crate::meaning::{alpha_equal, normalize, Term, RESERVED_PREFIX};
use crate::prover::engine::is_qnp_shape;
use crate::prover::trace::{Rule, Trace};
use crate::prover::Reading;

/// Check a reading's trace (and every recorded alternative) against the
/// premise set it claims to derive from.
pub fn validate_trace(reading: &Reading, premises: &PremiseSet, root: &Label) -> bool {
    if !check(&reading.trace, &reading.meaning, premises, root) {
        return false;
    }
    reading
        .alt_traces
        .iter()
        .all(|t| check(t, &reading.meaning, premises, root))
}

fn check(trace: &Trace, meaning: &Term, p: &PremiseSet, root: &Label) -> bool {
    if trace.is_empty() {
        return false;
    }
    let mut credits: Vec<u32> = vec![0; trace.len()];
    let mut premise_seen: Vec<bool> = vec![false; p.linear.len()];
    // per Axiom I source step: the distinct facts drawn from its one
    // consumption
    let mut axiom_facts: HashMap<usize, Vec<usize>> = HashMap::new();

    for (i, step) in trace.iter().enumerate() {
        if step.inputs.iter().any(|&j| j >= i) {
            return false;
        }
        let consume = |credits: &mut Vec<u32>, j: usize| -> bool {
            if credits[j] == 0 {
                return false;
            }
            credits[j] -= 1;
            true
        };
        match &step.rule {
            Rule::Premise { id } => {
                if !step.inputs.is_empty()
                    || *id >= p.linear.len()
                    || premise_seen[*id]
                    || !alpha_equal_formula(&step.output, &p.linear[*id].formula)
                {
                    return false;
                }
                premise_seen[*id] = true;
                credits[i] = 1;
            }
            Rule::BangCopy { id } => {
                if !step.inputs.is_empty()
                    || *id >= p.banged.len()
                    || !alpha_equal_formula(&step.output, &p.banged[*id].formula)
                {
                    return false;
                }
                credits[i] = 1;
            }
            Rule::QnpDup { id } => {
                let [j] = step.inputs[..] else { return false };
                let input = &trace[j];
                let from_chain = matches!(
                    (&input.rule, &step.rule),
                    (Rule::Premise { id: a }, Rule::QnpDup { id: b }) if a == b
                ) || matches!(
                    (&input.rule, &step.rule),
                    (Rule::QnpDup { id: a }, Rule::QnpDup { id: b }) if a == b
                );
                if !from_chain
                    || *id >= p.linear.len()
                    || !alpha_equal_formula(&step.output, &input.output)
                    || !is_qnp_shape(&step.output)
                    || !consume(&mut credits, j)
                {
                    return false;
                }
                credits[i] = 2;
            }
            Rule::Hypothesis => {
                if !step.inputs.is_empty() {
                    return false;
                }
                credits[i] = 1;
            }
            Rule::Instantiate { bindings } => {
                let [j] = step.inputs[..] else { return false };
                let mut b: Bindings = Bindings::new();
                for (name, value) in bindings {
                    b.insert(name.clone(), value.clone());
                }
                let Ok(inst) = glue::instantiate(&trace[j].output, &b) else {
                    return false;
                };
                if !alpha_equal_formula(&inst, &step.output) || !consume(&mut credits, j) {
                    return false;
                }
                credits[i] = 1;
            }
            Rule::ModusPonens => {
                let Some((&j0, rest)) = step.inputs.split_first() else { return false };
                let GlueFormula::Lolli(ant, cons) = &trace[j0].output else {
                    return false;
                };
                let GlueFormula::Means { handle: chandle, term: cterm } = &**cons else {
                    return false;
                };
                let mut conjuncts: Vec<&GlueFormula> = Vec::new();
                collect_tensor(ant, &mut conjuncts);
                if conjuncts.len() != rest.len() {
                    return false;
                }
                // the supplied arguments must cover the antecedent
                // conjuncts one-to-one
                let args: Vec<&GlueFormula> = rest.iter().map(|&j| &trace[j].output).collect();
                if !bijective_match(&conjuncts, &args) {
                    return false;
                }
                let GlueFormula::Means { handle, term } = &step.output else {
                    return false;
                };
                let (Ok(a), Ok(b)) = (normalize(term), normalize(cterm)) else {
                    return false;
                };
                if handle != chandle || !alpha_equal(&a, &b) {
                    return false;
                }
                for &j in step.inputs.iter() {
                    if !consume(&mut credits, j) {
                        return false;
                    }
                }
                credits[i] = 1;
            }
            Rule::AxiomI { fact } => {
                let [j] = step.inputs[..] else { return false };
                let Some(f) = p.facts.get(*fact) else { return false };
                let (GlueFormula::Means { handle: ih, term: it }, GlueFormula::Means { handle: oh, term: ot }) =
                    (&trace[j].output, &step.output)
                else {
                    return false;
                };
                let child_ok = matches!(ih, Handle::Node(l) if *l == f.child);
                let slot_ok =
                    matches!(oh, Handle::Slot(l, a) if *l == f.parent && *a == f.attr);
                let (Ok(a), Ok(b)) = (normalize(it), normalize(ot)) else {
                    return false;
                };
                if !child_ok || !slot_ok || !alpha_equal(&a, &b) {
                    return false;
                }
                match axiom_facts.get_mut(&j) {
                    // one consumption of the filler feeds one role
                    // position per distinct fact
                    Some(facts) => {
                        if facts.contains(fact) {
                            return false;
                        }
                        facts.push(*fact);
                    }
                    None => {
                        if !consume(&mut credits, j) {
                            return false;
                        }
                        axiom_facts.insert(j, vec![*fact]);
                    }
                }
                credits[i] = 1;
            }
            Rule::Discharge => {
                let [jh, jc] = step.inputs[..] else { return false };
                if !matches!(trace[jh].rule, Rule::Hypothesis) || credits[jh] != 0 {
                    return false;
                }
                if !consume(&mut credits, jc) {
                    return false;
                }
                if !recheck_discharge(&step.output, &trace[jh].output, &trace[jc].output) {
                    return false;
                }
                credits[i] = 1;
            }
        }
    }

    // exactly the root conclusion left standing
    let last = trace.len() - 1;
    if credits[last] != 1 || credits[..last].iter().any(|&c| c != 0) {
        return false;
    }
    if !premise_seen.iter().all(|&s| s) {
        return false;
    }
    let GlueFormula::Means { handle, term } = &trace[last].output else {
        return false;
    };
    if !matches!(handle, Handle::Node(l) if l == root) {
        return false;
    }
    match normalize(term) {
        Ok(t) => alpha_equal(&t, meaning) && !t.contains_reserved(),
        Err(_) => false,
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

/// Can the argument formulas be paired one-to-one with the conjuncts?
fn bijective_match(conjuncts: &[&GlueFormula], args: &[&GlueFormula]) -> bool {
    fn go(conjuncts: &[&GlueFormula], args: &[&GlueFormula], taken: &mut Vec<bool>) -> bool {
        let Some((&c, rest)) = conjuncts.split_first() else { return true };
        for (k, &a) in args.iter().enumerate() {
            if taken[k] || !alpha_equal_formula(c, a) {
                continue;
            }
            taken[k] = true;
            if go(rest, args, taken) {
                return true;
            }
            taken[k] = false;
        }
        false
    }
    go(conjuncts, args, &mut vec![false; args.len()])
}

/// Re-derive a discharge step: the discharged formula's antecedent,
/// with its quantified variables as wildcards, must match the assumed
/// hypothesis, and pushing the resulting bindings through the consequent
/// must reproduce the subderivation's conclusion.
fn recheck_discharge(
    output: &GlueFormula,
    hypothesis: &GlueFormula,
    conclusion: &GlueFormula,
) -> bool {
    let (vars, ant, cons) = match output {
        GlueFormula::Forall(vs, b) => match &**b {
            GlueFormula::Lolli(a, c) => (vs.clone(), &**a, &**c),
            _ => return false,
        },
        GlueFormula::Lolli(a, c) => (Vec::new(), &**a, &**c),
        _ => return false,
    };
    let mut m = Matcher::new(&vars);
    if !m.formula(ant, hypothesis) {
        return false;
    }
    let Some(expected) = normalize_formula(&glue::apply_free(cons, &m.bindings)) else {
        return false;
    };
    let Some(concl) = normalize_formula(conclusion) else { return false };
    alpha_equal_formula(&expected, &concl)
}

/// First-order matching of a formula template against a concrete
/// formula. The template's designated wildcards bind whole subterms or
/// handles; other variables must be alpha-paired binders.
struct Matcher {
    wildcards: Vec<String>,
    bindings: Bindings,
    tpairs: Vec<(String, String)>,
    hpairs: Vec<(String, String)>,
}

impl Matcher {
    fn new(vars: &[(String, Sort)]) -> Matcher {
        Matcher {
            wildcards: vars.iter().map(|(n, _)| n.clone()).collect(),
            bindings: Bindings::new(),
            tpairs: Vec::new(),
            hpairs: Vec::new(),
        }
    }

    fn formula(&mut self, pat: &GlueFormula, tgt: &GlueFormula) -> bool {
        match (pat, tgt) {
            (GlueFormula::Means { handle: h1, term: t1 }, GlueFormula::Means { handle: h2, term: t2 }) => {
                self.handle(h1, h2) && self.term(t1, t2)
            }
            (
                GlueFormula::RAtom { parent: p1, attr: a1, child: c1 },
                GlueFormula::RAtom { parent: p2, attr: a2, child: c2 },
            ) => self.label_ref(p1, p2) && a1 == a2 && self.label_ref(c1, c2),
            (GlueFormula::Tensor(a1, b1), GlueFormula::Tensor(a2, b2))
            | (GlueFormula::Lolli(a1, b1), GlueFormula::Lolli(a2, b2)) => {
                self.formula(a1, a2) && self.formula(b1, b2)
            }
            (GlueFormula::Bang(a), GlueFormula::Bang(b)) => self.formula(a, b),
            (GlueFormula::Forall(v1, b1), GlueFormula::Forall(v2, b2)) => {
                if v1.len() != v2.len()
                    || v1.iter().zip(v2).any(|((_, s1), (_, s2))| s1 != s2)
                {
                    return false;
                }
                let mut shadowed = Vec::new();
                for ((n1, s1), (n2, _)) in v1.iter().zip(v2) {
                    if let Some(pos) = self.wildcards.iter().position(|w| w == n1) {
                        shadowed.push(self.wildcards.remove(pos));
                    }
                    if s1.is_term() {
                        self.tpairs.push((n1.clone(), n2.clone()));
                    } else {
                        self.hpairs.push((n1.clone(), n2.clone()));
                    }
                }
                let ok = self.formula(b1, b2);
                for (_, s1) in v1 {
                    if s1.is_term() {
                        self.tpairs.pop();
                    } else {
                        self.hpairs.pop();
                    }
                }
                self.wildcards.extend(shadowed);
                ok
            }
            _ => false,
        }
    }

    fn handle(&mut self, pat: &Handle, tgt: &Handle) -> bool {
        if let Handle::Var(v) = pat {
            if let Some((_, rhs)) = self.hpairs.iter().rev().find(|(l, _)| l == v) {
                return matches!(tgt, Handle::Var(v2) if v2 == rhs);
            }
            if self.wildcards.iter().any(|w| w == v) {
                return self.bind(v, Binding::Handle(tgt.clone()));
            }
        }
        pat == tgt
    }

    fn label_ref(&mut self, pat: &LabelRef, tgt: &LabelRef) -> bool {
        if let LabelRef::Var(v) = pat {
            if self.wildcards.iter().any(|w| w == v) {
                if let LabelRef::Label(l) = tgt {
                    return self.bind(v, Binding::Label(l.clone()));
                }
                return false;
            }
        }
        pat == tgt
    }

    fn term(&mut self, pat: &Term, tgt: &Term) -> bool {
        match (pat, tgt) {
            (Term::Var(v), _) => {
                if let Some((_, rhs)) = self.tpairs.iter().rev().find(|(l, _)| l == v) {
                    return matches!(tgt, Term::Var(v2) if v2 == rhs);
                }
                if self.wildcards.iter().any(|w| w == v) {
                    // a wildcard must not capture variables bound in the
                    // target's enclosing scope
                    let free = tgt.free_vars();
                    if self.tpairs.iter().any(|(_, r)| free.contains(r)) {
                        return false;
                    }
                    return self.bind(v, Binding::Term(tgt.clone()));
                }
                matches!(tgt, Term::Var(v2) if v2 == v)
            }
            (Term::Const(a), Term::Const(b)) => a == b,
            (Term::App(h1, a1), Term::App(h2, a2)) => {
                a1.len() == a2.len()
                    && self.term(h1, h2)
                    && a1.iter().zip(a2).all(|(x, y)| self.term(x, y))
            }
            (Term::Lam(x, b1), Term::Lam(y, b2)) => {
                self.tpairs.push((x.clone(), y.clone()));
                let ok = self.term(b1, b2);
                self.tpairs.pop();
                ok
            }
            (Term::Intension(a), Term::Intension(b))
            | (Term::Extension(a), Term::Extension(b)) => self.term(a, b),
            (
                Term::Quant { det: d1, var: v1, restr: r1, scope: s1 },
                Term::Quant { det: d2, var: v2, restr: r2, scope: s2 },
            ) => {
                if d1 != d2 {
                    return false;
                }
                self.tpairs.push((v1.clone(), v2.clone()));
                let ok = self.term(r1, r2) && self.term(s1, s2);
                self.tpairs.pop();
                ok
            }
            _ => false,
        }
    }

    fn bind(&mut self, name: &str, value: Binding) -> bool {
        match self.bindings.get(name) {
            Some(existing) => *existing == value,
            None => {
                self.bindings.insert(name.to_string(), value);
                true
            }
        }
    }
}

/// Does any part of the formula mention a reserved (search-internal)
/// constant or label?
pub fn formula_has_reserved(f: &GlueFormula) -> bool {
    let label_reserved = |l: &Label| l.as_str().starts_with(RESERVED_PREFIX);
    let handle_reserved = |h: &Handle| match h {
        Handle::Node(l) | Handle::Slot(l, _) => label_reserved(l),
        Handle::Var(_) => false,
    };
    match f {
        GlueFormula::Means { handle, term } => {
            handle_reserved(handle) || term.contains_reserved()
        }
        GlueFormula::RAtom { parent, attr: _, child } => {
            let lr = |r: &LabelRef| matches!(r, LabelRef::Label(l) if label_reserved(l));
            lr(parent) || lr(child)
        }
        GlueFormula::Tensor(a, b) | GlueFormula::Lolli(a, b) => {
            formula_has_reserved(a) || formula_has_reserved(b)
        }
        GlueFormula::Bang(b) | GlueFormula::Forall(_, b) => formula_has_reserved(b),
    }
}
