//! Law catalog, normalization strategy and canonical normal forms.
//!
//! The engine rewrites innermost-first and treats the left operand of a
//! product lazily, so a circuit applied to a state is reduced one layer at a
//! time from the state outward and operators are never expanded unless a
//! product forces it.

mod engine;
mod nf;
mod passes;
mod rules;
pub mod tables;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::term::{log2_exact, Term};

pub use engine::Engine;
pub use nf::{gate_nf, unified_base, BasisFactor, NormalForm};
pub use passes::{
    assoc_right, base_reduce, cancel_zero, contract_inner, dagger_push, distribute, gate_reduce, mult_kron,
};

/// Identifier of the law a rewrite step applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Law {
    L1,
    L2,
    L3,
    L4,
    L5,
    L6,
    L7,
    L8,
    L9,
    L10,
    L11,
    L12,
    L13,
    L14,
    L15,
    L16,
    /// Derived table of basis-operator products.
    BDb,
    /// Derived table of single-qubit gates on standard states.
    GDb,
    /// Unfolding of a library definition (also `I^ = I`, `0^ = 0`).
    Def,
}

impl Law {
    pub const TABLE: [Law; 16] = [
        Law::L1,
        Law::L2,
        Law::L3,
        Law::L4,
        Law::L5,
        Law::L6,
        Law::L7,
        Law::L8,
        Law::L9,
        Law::L10,
        Law::L11,
        Law::L12,
        Law::L13,
        Law::L14,
        Law::L15,
        Law::L16,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Law::L1 => "L1",
            Law::L2 => "L2",
            Law::L3 => "L3",
            Law::L4 => "L4",
            Law::L5 => "L5",
            Law::L6 => "L6",
            Law::L7 => "L7",
            Law::L8 => "L8",
            Law::L9 => "L9",
            Law::L10 => "L10",
            Law::L11 => "L11",
            Law::L12 => "L12",
            Law::L13 => "L13",
            Law::L14 => "L14",
            Law::L15 => "L15",
            Law::L16 => "L16",
            Law::BDb => "B_db",
            Law::GDb => "G_db",
            Law::Def => "DEF",
        }
    }

    pub fn parse(s: &str) -> Option<Law> {
        Law::TABLE.into_iter().chain([Law::BDb, Law::GDb, Law::Def]).find(|l| l.id() == s)
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl Serialize for Law {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    /// Maximum number of rewrite steps.
    pub fuel: u64,
    /// Use the derived `B_db`/`G_db` tables instead of unfolding definitions.
    pub tables: bool,
    /// Record every step.
    pub trace: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { fuel: 1_000_000, tables: true, trace: false }
    }
}

/// One rewrite: the subterm at `path` changed from `before` to `after`.
#[derive(Clone, Debug)]
pub struct Step {
    pub law: Law,
    pub path: Vec<u8>,
    pub before: Term,
    pub after: Term,
}

fn path_string(p: &[u8]) -> String {
    if p.is_empty() {
        return "root".into();
    }
    p.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
}

/// Ordered record of a normalization.
#[derive(Clone, Debug)]
pub struct RewriteTrace {
    pub input: Term,
    pub steps: Vec<Step>,
    pub output: Term,
}

impl RewriteTrace {
    /// Re-applies every step to the input, checking each `before`.
    pub fn replay(&self) -> Result<Term> {
        let mut cur = self.input.clone();
        for (i, s) in self.steps.iter().enumerate() {
            let here = cur
                .at_path(&s.path)
                .ok_or_else(|| Error::Input(format!("step {i}: no subterm at {}", path_string(&s.path))))?;
            if here != s.before {
                return Err(Error::Input(format!("step {i} ({}): subterm differs at {}", s.law, path_string(&s.path))));
            }
            cur = cur.replace_at(&s.path, &s.after).expect("path checked");
        }
        Ok(cur)
    }

    /// One line per step: `law @ path : before => after`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&format!(
                "{} @ {} : {} => {}\n",
                s.law,
                path_string(&s.path),
                crate::syntax::render(&s.before),
                crate::syntax::render(&s.after)
            ));
        }
        out
    }
}

impl Serialize for RewriteTrace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Row {
            law: Law,
            path: Vec<u8>,
            before: String,
            after: String,
        }
        let rows: Vec<Row> = self
            .steps
            .iter()
            .map(|st| Row {
                law: st.law,
                path: st.path.clone(),
                before: crate::syntax::render(&st.before),
                after: crate::syntax::render(&st.after),
            })
            .collect();
        rows.serialize(s)
    }
}

/// Result of running the engine on a term.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub term: Term,
    pub steps: u64,
    pub trace: Option<RewriteTrace>,
}

/// Rewrites `t` to reduced shape.
pub fn normalize_with(t: &Term, cfg: &EngineConfig) -> Result<Reduced> {
    let mut eng = Engine::new(cfg.clone());
    let out = eng.normalize(t)?;
    let trace = eng.take_steps().map(|steps| RewriteTrace { input: t.clone(), steps, output: out.clone() });
    Ok(Reduced { term: out, steps: eng.steps_used(), trace })
}

/// Full pipeline with explicit configuration; also returns the reduced term.
pub fn operate_reduce_with(t: &Term, cfg: &EngineConfig) -> Result<(NormalForm, Reduced)> {
    let r = normalize_with(t, cfg)?;
    Ok((unified_base(&r.term)?, r))
}

/// Normal form of a circuit-applied-to-state term (or any qubit term).
pub fn operate_reduce(t: &Term) -> Result<NormalForm> {
    operate_reduce_with(t, &EngineConfig::default()).map(|(nf, _)| nf)
}

/// Normal form of an operator over the `B_j` basis.
pub fn normalize_operator(t: &Term) -> Result<NormalForm> {
    let d = t.dims();
    if log2_exact(d.rows).is_none() || log2_exact(d.cols).is_none() {
        return Err(Error::NotQubitDims(d));
    }
    operate_reduce(t)
}
