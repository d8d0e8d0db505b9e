//! Symbolic versus dense timing on the shipped case studies.
//!
//! The dense row materializes every operator as a full matrix, multiplies
//! naively and compares entries, once per sampled environment. Ensemble
//! assertions are left out of both rows.

use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::corpus::{self, AssertKind, Assertion, CheckConfig, Side};
use crate::error::{Error, Result};
use crate::oracle::{sample_envs, DenseMatrix, OracleConfig};
use crate::scalar::Env;
use crate::term::{Kind, Term};

/// Case names accepted by [`run_case`].
pub const CASES: [&str; 5] = ["deutsch", "teleport", "simon", "grover", "entangle12"];

/// Largest dimension the dense row will materialize.
pub const DENSE_LIMIT: u64 = 1024;

/// Source text of a shipped case.
pub fn case_source(name: &str) -> Result<&'static str> {
    Ok(match name {
        "deutsch" => include_str!("../../../corpus/deutsch.qd"),
        "teleport" => include_str!("../../../corpus/teleport.qd"),
        "simon" => include_str!("../../../corpus/simon.qd"),
        "grover" => include_str!("../../../corpus/grover.qd"),
        "entangle12" => include_str!("../../../corpus/entangle12.qd"),
        other => return Err(Error::UnknownCase(other.to_string())),
    })
}

/// One table row.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub case: String,
    pub assertions: usize,
    pub repeat: usize,
    pub symbolic_ms: f64,
    pub symbolic_ok: bool,
    pub dense_ms: Option<f64>,
    pub dense_ok: Option<bool>,
    /// Set when the dense row was not run.
    pub dense_note: Option<String>,
}

/// Full-matrix evaluation with no structural shortcuts.
pub fn naive_dense(t: &Term, env: &Env) -> Result<DenseMatrix> {
    Ok(match t.kind() {
        Kind::Ket0 => DenseMatrix::basis(2, 0),
        Kind::Ket1 => DenseMatrix::basis(2, 1),
        Kind::Zero => DenseMatrix::zeros(t.dims().rows as usize, t.dims().cols as usize),
        Kind::Identity(n) => DenseMatrix::identity(*n as usize),
        Kind::Scale(c, x) => naive_dense(x, env)?.scale(c.eval(env)?),
        Kind::MatMul(a, b) => naive_dense(a, env)?.mul(&naive_dense(b, env)?),
        Kind::Add(a, b) => naive_dense(a, env)?.add(&naive_dense(b, env)?),
        Kind::Kron(a, b) => naive_dense(a, env)?.kron(&naive_dense(b, env)?),
        Kind::Dagger(a) => naive_dense(a, env)?.adjoint(),
        Kind::Gate(g) => naive_dense(&g.body, env)?,
    })
}

fn dense_holds(kind: AssertKind, a: &Term, b: &Term, cfg: &OracleConfig) -> Result<bool> {
    let mut names = a.atom_names();
    names.extend(b.atom_names());
    for env in sample_envs(&names, cfg) {
        let (x, y) = (naive_dense(a, &env)?, naive_dense(b, &env)?);
        let ok = if kind == AssertKind::OBS {
            let (idx, _) = x.data.iter().enumerate().fold((0, 0.0), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
            let c = if x.data[idx].norm() > cfg.tol { y.data[idx] / x.data[idx] } else { C64::new(1.0, 0.0) };
            (c.norm() - 1.0).abs() <= cfg.tol && x.scale(c).approx_eq(&y, cfg.tol)
        } else {
            x.approx_eq(&y, cfg.tol)
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn timed<F: FnMut() -> Result<bool>>(repeat: usize, mut f: F) -> Result<(f64, bool)> {
    let mut times = Vec::with_capacity(repeat);
    // One untimed warm-up run fills lazily derived tables and caches.
    let mut ok = f()?;
    for _ in 0..repeat.max(1) {
        let t = Instant::now();
        ok &= f()?;
        times.push(t.elapsed().as_secs_f64() * 1e3);
    }
    Ok((median(times), ok))
}

/// A parsed case ready to be timed.
pub struct Case {
    pub name: String,
    assertions: Vec<Assertion>,
    oracle: OracleConfig,
    /// Largest operator dimension among the term assertions.
    pub max_dim: u64,
}

impl Case {
    /// Parses a shipped case, dropping ensemble assertions.
    pub fn load(name: &str, oracle: &OracleConfig) -> Result<Case> {
        let file = corpus::parse_file(case_source(name)?)?;
        let assertions: Vec<Assertion> = file.assertions.into_iter().filter(|a| a.kind != AssertKind::MIXEQ).collect();
        let mut max_dim = 0;
        for a in &assertions {
            if let (Side::Term(l), _) = corpus::parse_sides(a)? {
                max_dim = max_dim.max(l.dims().rows).max(l.dims().cols);
            }
        }
        Ok(Case { name: name.to_string(), assertions, oracle: oracle.clone(), max_dim })
    }

    pub fn len(&self) -> usize {
        self.assertions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assertions.is_empty()
    }

    /// Decides every assertion by rewriting alone.
    pub fn symbolic(&self) -> Result<bool> {
        let cfg = CheckConfig { oracle: self.oracle.clone(), use_oracle: false, ..CheckConfig::default() };
        let mut ok = true;
        for a in &self.assertions {
            let (l, r) = corpus::parse_sides(a)?;
            ok &= corpus::symbolic_holds(a, &l, &r, &cfg)?;
        }
        Ok(ok)
    }

    /// Decides every assertion on naive dense matrices.
    pub fn dense(&self) -> Result<bool> {
        let mut ok = true;
        for a in &self.assertions {
            let cfg = OracleConfig { hyps: a.ctx.hyps.clone(), ..self.oracle.clone() };
            match corpus::parse_sides(a)? {
                (Side::Term(l), Side::Term(r)) => ok &= dense_holds(a.kind, &l, &r, &cfg)?,
                _ => return Err(Error::Input(format!("{}: not a term assertion", a.name))),
            }
        }
        Ok(ok)
    }

    /// False when the dense row would exceed [`DENSE_LIMIT`].
    pub fn dense_feasible(&self) -> bool {
        self.max_dim <= DENSE_LIMIT
    }
}

/// Median wall time of the symbolic and dense rows over `repeat` runs.
pub fn run_case(name: &str, repeat: usize, oracle: &OracleConfig) -> Result<BenchRow> {
    let case = Case::load(name, oracle)?;
    let (symbolic_ms, symbolic_ok) = timed(repeat, || case.symbolic())?;
    let mut row = BenchRow {
        case: name.to_string(),
        assertions: case.len(),
        repeat,
        symbolic_ms,
        symbolic_ok,
        dense_ms: None,
        dense_ok: None,
        dense_note: None,
    };
    if !case.dense_feasible() {
        row.dense_note = Some(format!("skipped (dim {})", case.max_dim));
        return Ok(row);
    }
    let (dense_ms, dense_ok) = timed(repeat, || case.dense())?;
    row.dense_ms = Some(dense_ms);
    row.dense_ok = Some(dense_ok);
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_case() {
        assert!(matches!(run_case("qft", 1, &OracleConfig::default()), Err(Error::UnknownCase(_))));
    }

    #[test]
    fn naive_matches_oracle() {
        let t = crate::syntax::parse("(H # I2) * CX * (X # Y) * |0,1>").unwrap();
        let a = naive_dense(&t, &Env::new()).unwrap();
        let b = crate::oracle::eval_dense(&t, &Env::new()).unwrap();
        assert!(a.approx_eq(&b, 1e-12));
    }

    #[test]
    fn deutsch_rows_agree() {
        let row = run_case("deutsch", 1, &OracleConfig::default()).unwrap();
        assert!(row.symbolic_ok);
        assert_eq!(row.dense_ok, Some(true));
    }
}
