//! Exhaustive derivation of sentence meanings from an instantiated
//! premise set.
//!
//! Search proceeds in rounds of increasing quantified-NP duplication:
//! round `d` distributes `d` extra copies over the quantified premises
//! and collects every complete derivation of the root node's meaning.
//! Readings are therefore ranked by how much duplication they need, the
//! cheaper ones first. Alternative derivations of an already-found
//! meaning are kept as extra traces rather than new readings.

pub(crate) mod engine;
pub mod trace;
pub mod validate;

use thiserror::Error;

use crate::fstruct::Label;
use crate::glue::Handle;
use crate::lexicon::PremiseSet;
use crate::meaning::{alpha_equal, Term};

pub use engine::is_qnp_shape;
pub use trace::{linearize, render_trace, DerivationStep, Rule, Trace};
pub use validate::validate_trace;

/// Caps on the proof search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchLimits {
    /// Extra copies of quantified-NP premises to try, in total.
    pub max_qnp_dups: usize,
    /// Uses allowed per unlimited premise; `None` caps at the number of
    /// facts (enough to pair every role position once).
    pub max_bang_uses: Option<usize>,
    /// Nesting depth of hypothetical subderivations.
    pub max_hypothesis_depth: usize,
    /// Overall work budget, in search steps.
    pub max_steps: u64,
}

impl Default for SearchLimits {
    fn default() -> SearchLimits {
        SearchLimits {
            max_qnp_dups: 2,
            max_bang_uses: None,
            max_hypothesis_depth: 2,
            max_steps: 100_000,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProveError {
    #[error("proof search exceeded {0} steps")]
    StepLimit(u64),
    #[error("no complete derivation; closest attempt left unconsumed: {}", .unconsumed.join(", "))]
    NoReading { unconsumed: Vec<String> },
}

/// One derived sentence meaning.
#[derive(Debug, Clone)]
pub struct Reading {
    pub meaning: Term,
    /// The first derivation found.
    pub trace: Trace,
    /// Further, structurally different derivations of the same meaning.
    pub alt_traces: Vec<Trace>,
    /// Quantified-NP duplications the derivation needed.
    pub qnp_dups: usize,
    /// Draws taken from each unlimited premise, keyed `key@label`.
    pub bang_uses: Vec<(String, usize)>,
}

/// Derive every meaning of `root` from the premise set, cheapest
/// duplication round first.
pub fn derive_readings(
    premises: &PremiseSet,
    root: &Label,
    limits: &SearchLimits,
) -> Result<Vec<Reading>, ProveError> {
    let bang_cap = limits
        .max_bang_uses
        .unwrap_or_else(|| premises.facts.len().max(1));
    let qnp_bases: Vec<usize> = premises
        .linear
        .iter()
        .enumerate()
        .filter(|(_, pr)| is_qnp_shape(&pr.formula))
        .map(|(i, _)| i)
        .collect();

    let goal = Handle::Node(root.clone());
    let mut steps: u64 = 0;
    let mut readings: Vec<Reading> = Vec::new();
    let mut best_partial: Option<Vec<String>> = None;

    for d in 0..=limits.max_qnp_dups {
        for dist in engine::compositions(d, qnp_bases.len()) {
            let plan = engine::build_plan(premises, &qnp_bases, &dist);
            let ctx = engine::Ctx::new(plan.linear.len(), premises.banged.len());
            let mut eng = engine::Engine::new(&plan, premises, limits, bang_cap, &mut steps);
            for o in eng.prove(&ctx, &goal)? {
                let unconsumed: Vec<String> = plan
                    .linear
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !o.ctx.used[*i])
                    .map(|(_, pp)| pp.name.clone())
                    .collect();
                if !unconsumed.is_empty() {
                    let better = best_partial
                        .as_ref()
                        .map_or(true, |b| unconsumed.len() < b.len());
                    if better {
                        best_partial = Some(unconsumed);
                    }
                    continue;
                }
                if o.term.contains_reserved() {
                    debug_assert!(false, "eigenvariable escaped into a reading");
                    continue;
                }
                let trace = linearize(&o.node);
                if let Some(r) = readings.iter_mut().find(|r| alpha_equal(&r.meaning, &o.term)) {
                    if r.qnp_dups == d && r.trace != trace && !r.alt_traces.contains(&trace) {
                        r.alt_traces.push(trace);
                    }
                    continue;
                }
                let bang_uses = premises
                    .banged
                    .iter()
                    .zip(&o.ctx.bang_uses)
                    .map(|(bp, &n)| (format!("{}@{}", bp.key, bp.label), n))
                    .collect();
                readings.push(Reading {
                    meaning: o.term,
                    trace,
                    alt_traces: Vec::new(),
                    qnp_dups: d,
                    bang_uses,
                });
            }
        }
    }

    if readings.is_empty() {
        Err(ProveError::NoReading {
            unconsumed: best_partial.unwrap_or_else(|| {
                premises
                    .linear
                    .iter()
                    .map(|pr| format!("{}@{}", pr.key, pr.label))
                    .collect()
            }),
        })
    } else {
        Ok(readings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fstruct::parse_fstructure;
    use crate::lexicon::{instantiate_entries, parse_lexicon};
    use crate::meaning::parse_term;

    const VERB_LEX: &str = "
        entry support { glue: forall X,Y. (^ SUBJ)~X * (^ OBJ)~Y -o ^~supported(X,Y); }
        entry oppose  { glue: forall X,Y. (^ SUBJ)~X * (^ OBJ)~Y -o ^~opposed(X,Y); }
        entry Bill    { glue: ^~Bill; }
        entry Hillary { glue: ^~Hillary; }
        entry nafta   { glue: ^~NAFTA; }
        entry and {
          glue: forall X,Y. (^ CONJ)~X * (^ CONJ)~Y -o ^~and(X,Y);
          glue!: forall X,Y. (^ CONJ)~X * ^~Y -o ^~and(X,Y);
        }
        entry two[det] {
          glue: forall H,S. (forall x. ^~x -o H~S(x)) -o H~two(z, %RESTR%(z), S(z));
        }
        entry trade-bill { glue: ^~trade-bill-of(it); }
    ";

    fn readings_for(fs_text: &str, limits: &SearchLimits) -> Vec<Reading> {
        let fs = parse_fstructure(fs_text).unwrap();
        let lex = parse_lexicon(VERB_LEX).unwrap();
        let premises = instantiate_entries(&fs, &lex).unwrap();
        derive_readings(&premises, &fs.root, limits).unwrap()
    }

    const SIMPLE: &str = "f:[ PRED 'support' SUBJ g:[ PRED 'Bill' ] OBJ h:[ PRED 'nafta' ] ]";

    const SHARED: &str = "
        f:{ CONJTYPE 'and'
            f1:[ PRED 'support' SUBJ g:[ PRED 'Bill' ] OBJ h:[ PRED 'nafta' ] ],
            f2:[ PRED 'oppose'  SUBJ i:[ PRED 'Hillary' ] OBJ h ] }";

    const SHARED_QUANT: &str = "
        f:{ CONJTYPE 'and'
            f1:[ PRED 'support' SUBJ g:[ PRED 'Bill' ] OBJ h:[ PRED 'trade-bill' SPEC 'two' ] ],
            f2:[ PRED 'oppose'  SUBJ i:[ PRED 'Hillary' ] OBJ h ] }";

    #[test]
    fn simple_clause_one_reading_two_derivations() {
        let rs = readings_for(SIMPLE, &SearchLimits::default());
        assert_eq!(rs.len(), 1);
        let expected = parse_term("supported(Bill, NAFTA)").unwrap();
        assert!(alpha_equal(&rs[0].meaning, &expected));
        assert_eq!(rs[0].qnp_dups, 0);
        // the verb's two antecedents can be proven in either order
        assert_eq!(rs[0].alt_traces.len(), 1);
    }

    #[test]
    fn shared_object_is_consumed_once_and_read_twice() {
        let rs = readings_for(SHARED, &SearchLimits::default());
        assert_eq!(rs.len(), 1);
        let expected = parse_term("and(supported(Bill, NAFTA), opposed(Hillary, NAFTA))").unwrap();
        assert!(alpha_equal(&rs[0].meaning, &expected));
        // exactly one premise-consumption step for the shared object
        let nafta_steps = rs[0]
            .trace
            .iter()
            .filter(|s| matches!(s.rule, Rule::Premise { .. }))
            .count();
        assert_eq!(nafta_steps, 6);
    }

    #[test]
    fn shared_traces_validate() {
        let fs = parse_fstructure(SHARED).unwrap();
        let lex = parse_lexicon(VERB_LEX).unwrap();
        let premises = instantiate_entries(&fs, &lex).unwrap();
        let rs = derive_readings(&premises, &fs.root, &SearchLimits::default()).unwrap();
        for r in &rs {
            assert!(validate_trace(r, &premises, &fs.root));
        }
    }

    #[test]
    fn tampered_trace_rejected() {
        let fs = parse_fstructure(SHARED).unwrap();
        let lex = parse_lexicon(VERB_LEX).unwrap();
        let premises = instantiate_entries(&fs, &lex).unwrap();
        let mut rs = derive_readings(&premises, &fs.root, &SearchLimits::default()).unwrap();
        let r = &mut rs[0];
        // claim a different meaning than the trace derives
        r.meaning = parse_term("and(opposed(Bill, NAFTA), supported(Hillary, NAFTA))").unwrap();
        assert!(!validate_trace(r, &premises, &fs.root));
    }

    #[test]
    fn dropped_step_rejected() {
        let fs = parse_fstructure(SHARED).unwrap();
        let lex = parse_lexicon(VERB_LEX).unwrap();
        let premises = instantiate_entries(&fs, &lex).unwrap();
        let mut rs = derive_readings(&premises, &fs.root, &SearchLimits::default()).unwrap();
        let r = &mut rs[0];
        r.trace.remove(0);
        assert!(!validate_trace(r, &premises, &fs.root));
    }

    #[test]
    fn quantified_object_narrowest_scope_first() {
        let rs = readings_for(SHARED_QUANT, &SearchLimits::default());
        assert!(!rs.is_empty());
        let narrow = parse_term(
            "two(z, trade-bill(z), and(supported(Bill, z), opposed(Hillary, z)))",
        )
        .unwrap();
        assert!(alpha_equal(&rs[0].meaning, &narrow), "got {}", rs[0].meaning);
        assert_eq!(rs[0].qnp_dups, 0);
        // the duplication-free reading is unique
        assert!(rs.iter().skip(1).all(|r| r.qnp_dups > 0));
        // with one duplication the quantifier distributes over the conjuncts
        let distributed = parse_term(
            "and(two(z, trade-bill(z), supported(Bill, z)), two(z, trade-bill(z), opposed(Hillary, z)))",
        )
        .unwrap();
        let found = rs
            .iter()
            .find(|r| alpha_equal(&r.meaning, &distributed))
            .expect("distributed reading");
        assert_eq!(found.qnp_dups, 1);
    }

    #[test]
    fn quantified_traces_validate() {
        let fs = parse_fstructure(SHARED_QUANT).unwrap();
        let lex = parse_lexicon(VERB_LEX).unwrap();
        let premises = instantiate_entries(&fs, &lex).unwrap();
        let rs = derive_readings(&premises, &fs.root, &SearchLimits::default()).unwrap();
        for r in &rs {
            assert!(validate_trace(r, &premises, &fs.root), "invalid: {}", r.meaning);
        }
    }

    #[test]
    fn duplication_limit_respected() {
        let limits = SearchLimits { max_qnp_dups: 0, ..SearchLimits::default() };
        let rs = readings_for(SHARED_QUANT, &limits);
        assert!(rs.iter().all(|r| r.qnp_dups == 0));
        assert_eq!(rs.len(), 1);
    }

    #[test]
    fn step_limit_reported() {
        let fs = parse_fstructure(SHARED_QUANT).unwrap();
        let lex = parse_lexicon(VERB_LEX).unwrap();
        let premises = instantiate_entries(&fs, &lex).unwrap();
        let limits = SearchLimits { max_steps: 10, ..SearchLimits::default() };
        let err = derive_readings(&premises, &fs.root, &limits).unwrap_err();
        assert_eq!(err, ProveError::StepLimit(10));
    }

    #[test]
    fn unusable_premises_reported() {
        let fs = parse_fstructure("f:[ PRED 'support' SUBJ g:[ PRED 'Bill' ] ]").unwrap();
        let lex = parse_lexicon(VERB_LEX).unwrap();
        let premises = instantiate_entries(&fs, &lex).unwrap();
        let err = derive_readings(&premises, &fs.root, &SearchLimits::default()).unwrap_err();
        assert!(matches!(err, ProveError::NoReading { .. }));
    }

    #[test]
    fn qnp_shape_recognized() {
        let f = crate::glue::parse_glue(
            "forall H,S. (forall x. h~x -o H~S(x)) -o H~two(z, bill(z), S(z))",
        )
        .unwrap();
        assert!(is_qnp_shape(&f));
        let g = crate::glue::parse_glue("forall X. g~X -o f~won(X)").unwrap();
        assert!(!is_qnp_shape(&g));
    }
}
