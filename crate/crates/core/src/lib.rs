//! Symbolic Dirac-notation rewriting with a dense numerical oracle.
//!
//! Terms are built from `|0>`, `|1>`, zero and identity matrices, scaling,
//! products, sums, tensor products and adjoints. The rewrite engine brings
//! closed terms to a canonical sum of basis outer products; the oracle
//! evaluates terms as dense matrices to cross-check symbolic verdicts.

pub mod bench;
pub mod corpus;
pub mod error;
pub mod gen;
pub mod oracle;
pub mod par;
pub mod quantum;
pub mod rewrite;
pub mod scalar;
pub mod syntax;
pub mod term;

pub use error::{Error, Pos, Result};
pub use rewrite::{normalize_operator, operate_reduce, Law, NormalForm};
pub use scalar::Scalar;
pub use syntax::{parse, render, render_nf};
pub use term::{Dims, Term};
