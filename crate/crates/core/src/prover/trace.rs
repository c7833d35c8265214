//! Proof terms: a derivation is a DAG of rule applications (shared nodes
//! arise when Axiom I reuses one consumption for several role positions),
//! linearized into a numbered step list for display and re-checking.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use crate::glue::{Binding, GlueFormula};

/// A rule application. Premise/fact identifiers index into the
/// originating `PremiseSet`.
#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    /// Consume linear premise `id`.
    Premise { id: usize },
    /// Draw one copy of banged premise `id`.
    BangCopy { id: usize },
    /// Duplicate the quantified-NP premise `id` (one application grants
    /// two uses of its output).
    QnpDup { id: usize },
    /// Assume a formula for hypothetical reasoning.
    Hypothesis,
    /// Universal instantiation with the recorded bindings.
    Instantiate { bindings: Vec<(String, Binding)> },
    /// Fire an implication on fully matched antecedents.
    ModusPonens,
    /// Propagate a node meaning to a role position via fact `fact`.
    AxiomI { fact: usize },
    /// Close a hypothetical subderivation, abstracting its eigenvariables.
    Discharge,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Premise { .. } => "premise",
            Rule::BangCopy { .. } => "bang-copy",
            Rule::QnpDup { .. } => "qnp-dup",
            Rule::Hypothesis => "hypothesis",
            Rule::Instantiate { .. } => "instantiate",
            Rule::ModusPonens => "modus-ponens",
            Rule::AxiomI { .. } => "axiom-i",
            Rule::Discharge => "discharge",
        }
    }
}

/// A node of the in-memory proof DAG. Nodes are shared via `Rc` when one
/// derivation feeds several consumers (Axiom I outputs).
#[derive(Debug)]
pub struct ProofNode {
    pub rule: Rule,
    pub inputs: Vec<Rc<ProofNode>>,
    pub output: GlueFormula,
}

impl ProofNode {
    pub fn leaf(rule: Rule, output: GlueFormula) -> Rc<ProofNode> {
        Rc::new(ProofNode { rule, inputs: Vec::new(), output })
    }

    pub fn derived(rule: Rule, inputs: Vec<Rc<ProofNode>>, output: GlueFormula) -> Rc<ProofNode> {
        Rc::new(ProofNode { rule, inputs, output })
    }
}

/// One line of a linearized trace; `inputs` are indices of earlier steps.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivationStep {
    pub rule: Rule,
    pub inputs: Vec<usize>,
    pub output: GlueFormula,
}

pub type Trace = Vec<DerivationStep>;

/// Flatten a proof DAG into steps, children first, emitting each shared
/// node exactly once.
pub fn linearize(root: &Rc<ProofNode>) -> Trace {
    let mut seen: HashMap<*const ProofNode, usize> = HashMap::new();
    let mut steps: Trace = Vec::new();
    fn visit(
        node: &Rc<ProofNode>,
        seen: &mut HashMap<*const ProofNode, usize>,
        steps: &mut Trace,
    ) -> usize {
        let key = Rc::as_ptr(node);
        if let Some(&idx) = seen.get(&key) {
            return idx;
        }
        let inputs: Vec<usize> = node.inputs.iter().map(|i| visit(i, seen, steps)).collect();
        let idx = steps.len();
        steps.push(DerivationStep {
            rule: node.rule.clone(),
            inputs,
            output: node.output.clone(),
        });
        seen.insert(key, idx);
        idx
    }
    visit(root, &mut seen, &mut steps);
    steps
}

impl fmt::Display for DerivationStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rule.name())?;
        match &self.rule {
            Rule::Premise { id } | Rule::BangCopy { id } | Rule::QnpDup { id } => {
                write!(f, "#{id}")?
            }
            Rule::AxiomI { fact } => write!(f, "#{fact}")?,
            Rule::Instantiate { bindings } => {
                write!(f, "{{")?;
                for (i, (name, value)) in bindings.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{name}:=")?;
                    match value {
                        Binding::Term(t) => write!(f, "{t}")?,
                        Binding::Handle(h) => write!(f, "{h}")?,
                        Binding::Label(l) => write!(f, "{l}")?,
                        Binding::Attr(a) => write!(f, "{a}")?,
                    }
                }
                write!(f, "}}")?;
            }
            _ => {}
        }
        write!(f, " [")?;
        for (i, idx) in self.inputs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{idx}")?;
        }
        write!(f, "] => {}", self.output)
    }
}

/// Render a full trace, one numbered step per line.
pub fn render_trace(trace: &Trace) -> String {
    let mut out = String::new();
    for (i, step) in trace.iter().enumerate() {
        out.push_str(&format!("step {i}: {step}\n"));
    }
    out
}
