//! Derivation engine for LFG glue semantics with resource sharing.
//!
//! Given a labeled, possibly structure-shared f-structure and a lexicon of
//! linear-logic meaning constructors, the engine deduces all sentence
//! meanings, threading every lexical contribution through the derivation
//! exactly once. Shared nodes (right-node raising, coordinate or not) are
//! handled by making the paths into a node available as facts, with an
//! interpretation axiom propagating a node's meaning to each path position.
//! Readings are ranked by how little quantified-NP duplication they need.

pub mod fstruct;
pub mod glue;
pub mod lexicon;
pub mod meaning;
pub mod prover;
