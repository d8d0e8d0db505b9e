//! Dense complex-matrix evaluator and the two equivalence predicates.
//!
//! The oracle shares nothing with the rewrite engine except the [`Term`]
//! type: gate bodies are evaluated numerically from their Dirac definitions.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par;
use crate::scalar::{Env, NormHyp};
use crate::term::{Dims, Kind, Term};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Rows-times-inner sizes above which multiplication is split across threads.
const PAR_WORK: usize = 1 << 15;

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> DenseMatrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        DenseMatrix { rows: r, cols: c, data: rows.iter().flatten().copied().collect() }
    }

    pub fn basis(n: usize, j: usize) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n, 1);
        m.data[j] = ONE;
        m
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    pub fn dims(&self) -> Dims {
        Dims::new(self.rows as u64, self.cols as u64)
    }

    pub fn mul(&self, o: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, o.rows, "inner dimension");
        let (n, k, m) = (self.rows, self.cols, o.cols);
        let mut out = DenseMatrix::zeros(n, m);
        let row = |i: usize, dst: &mut [C64]| {
            for p in 0..k {
                let a = self.data[i * k + p];
                if a == ZERO {
                    continue;
                }
                let src = &o.data[p * m..(p + 1) * m];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        };
        if n * k * m >= PAR_WORK && n > 1 {
            par::for_each_chunk(&mut out.data, m, |i, dst| row(i, dst));
        } else {
            for (i, dst) in out.data.chunks_mut(m.max(1)).enumerate() {
                row(i, dst);
            }
        }
        out
    }

    pub fn add(&self, o: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect();
        DenseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, o: &DenseMatrix) -> DenseMatrix {
        self.add(&o.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> DenseMatrix {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn kron(&self, o: &DenseMatrix) -> DenseMatrix {
        let (r, c) = (self.rows * o.rows, self.cols * o.cols);
        let mut out = DenseMatrix::zeros(r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == ZERO {
                    continue;
                }
                for p in 0..o.rows {
                    for q in 0..o.cols {
                        out.data[(i * o.rows + p) * c + j * o.cols + q] = a * o.get(p, q);
                    }
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Index and magnitude of the largest entry difference.
    pub fn max_diff(&self, o: &DenseMatrix) -> (usize, f64) {
        self.data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| (a - b).norm())
            .enumerate()
            .fold((0, 0.0), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc })
    }

    pub fn approx_eq(&self, o: &DenseMatrix, tol: f64) -> bool {
        self.rows == o.rows && self.cols == o.cols && self.max_diff(o).1 <= tol
    }

    /// Submatrix of the given rows (all columns).
    fn take_rows(&self, rows: impl Iterator<Item = usize>) -> DenseMatrix {
        let mut data = Vec::new();
        let mut n = 0;
        for r in rows {
            data.extend_from_slice(&self.data[r * self.cols..(r + 1) * self.cols]);
            n += 1;
        }
        DenseMatrix { rows: n, cols: self.cols, data }
    }
}

impl fmt::Display for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.data.iter().map(|z| fmt_c64(*z)).collect();
        let w = cells.iter().map(|s| s.len()).max().unwrap_or(1);
        for r in 0..self.rows {
            let line: Vec<String> =
                (0..self.cols).map(|c| format!("{:>w$}", cells[r * self.cols + c], w = w)).collect();
            writeln!(f, "[ {} ]", line.join("  "))?;
        }
        Ok(())
    }
}

pub fn fmt_c64(z: C64) -> String {
    let clean = |x: f64| if x.abs() < 5e-13 { 0.0 } else { x };
    let (re, im) = (clean(z.re), clean(z.im));
    if im == 0.0 {
        format!("{re:.6}")
    } else if re == 0.0 {
        format!("{im:.6}i")
    } else {
        format!("{re:.6}{im:+.6}i")
    }
}

#[derive(Serialize)]
struct DenseDoc {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for DenseMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DenseDoc {
            rows: self.rows,
            cols: self.cols,
            re: self.data.iter().map(|z| z.re).collect(),
            im: self.data.iter().map(|z| z.im).collect(),
        }
        .serialize(s)
    }
}

/// Sum of the diagonal.
pub fn trace_dense(m: &DenseMatrix) -> Result<C64> {
    if m.rows != m.cols {
        return Err(Error::NotSquare(m.dims()));
    }
    Ok((0..m.rows).map(|i| m.get(i, i)).sum())
}

// ---------------------------------------------------------------------------
// Evaluation

struct Evaluator<'e> {
    env: &'e Env,
    gates: HashMap<usize, DenseMatrix>,
}

fn usize_dims(t: &Term) -> (usize, usize) {
    let d = t.dims();
    (d.rows as usize, d.cols as usize)
}

impl Evaluator<'_> {
    fn eval(&mut self, t: &Term) -> Result<DenseMatrix> {
        let (r, c) = usize_dims(t);
        Ok(match t.kind() {
            Kind::Ket0 => DenseMatrix::basis(2, 0),
            Kind::Ket1 => DenseMatrix::basis(2, 1),
            Kind::Zero => DenseMatrix::zeros(r, c),
            Kind::Identity(n) => DenseMatrix::identity(*n as usize),
            Kind::Scale(s, a) => {
                let z = s.eval(self.env)?;
                self.eval(a)?.scale(z)
            }
            Kind::Add(a, b) => self.eval(a)?.add(&self.eval(b)?),
            Kind::Kron(a, b) => self.eval(a)?.kron(&self.eval(b)?),
            Kind::Dagger(a) => self.eval(a)?.adjoint(),
            Kind::Gate(_) => self.gate(t)?.clone(),
            Kind::MatMul(a, b) => {
                let v = self.eval(b)?;
                self.apply(a, v)?
            }
        })
    }

    fn gate(&mut self, t: &Term) -> Result<&DenseMatrix> {
        let Kind::Gate(g) = t.kind() else { unreachable!() };
        let key = std::sync::Arc::as_ptr(g) as usize;
        if !self.gates.contains_key(&key) {
            let m = self.eval(&g.body)?;
            self.gates.insert(key, m);
        }
        Ok(&self.gates[&key])
    }

    /// Computes `t * v` without materializing tensor-structured operators.
    fn apply(&mut self, t: &Term, v: DenseMatrix) -> Result<DenseMatrix> {
        Ok(match t.kind() {
            Kind::Identity(_) => v,
            Kind::Zero => DenseMatrix::zeros(t.dims().rows as usize, v.cols),
            Kind::Scale(s, a) => {
                let z = s.eval(self.env)?;
                self.apply(a, v)?.scale(z)
            }
            Kind::Add(a, b) => {
                let x = self.apply(a, v.clone())?;
                x.add(&self.apply(b, v)?)
            }
            Kind::MatMul(a, b) => {
                let w = self.apply(b, v)?;
                self.apply(a, w)?
            }
            Kind::Kron(a, b) => self.apply_kron(a, b, v)?,
            Kind::Gate(g) => {
                if t.dims().rows * t.dims().cols <= 64 * 64 {
                    self.gate(t)?.mul(&v)
                } else {
                    let body = g.body.clone();
                    self.apply(&body, v)?
                }
            }
            _ => self.eval(t)?.mul(&v),
        })
    }

    fn apply_kron(&mut self, a: &Term, b: &Term, v: DenseMatrix) -> Result<DenseMatrix> {
        let (ra, ca) = usize_dims(a);
        let (rb, cb) = usize_dims(b);
        let k = v.cols;
        let w = if matches!(b.kind(), Kind::Identity(_)) {
            v
        } else {
            let mut w = DenseMatrix::zeros(ca * rb, k);
            for i in 0..ca {
                let block = v.take_rows(i * cb..(i + 1) * cb);
                let out = self.apply(b, block)?;
                w.data[i * rb * k..(i + 1) * rb * k].copy_from_slice(&out.data);
            }
            w
        };
        if matches!(a.kind(), Kind::Identity(_)) {
            return Ok(w);
        }
        let mut out = DenseMatrix::zeros(ra * rb, k);
        for j in 0..rb {
            let u = w.take_rows((0..ca).map(|i| i * rb + j));
            let y = self.apply(a, u)?;
            for i in 0..ra {
                let dst = (i * rb + j) * k;
                out.data[dst..dst + k].copy_from_slice(&y.data[i * k..(i + 1) * k]);
            }
        }
        Ok(out)
    }
}

/// Numeric value of `t` under `env`.
pub fn eval_dense(t: &Term, env: &Env) -> Result<DenseMatrix> {
    Evaluator { env, gates: HashMap::new() }.eval(t)
}

/// `t * v` evaluated structurally.
pub fn apply_dense(t: &Term, v: DenseMatrix, env: &Env) -> Result<DenseMatrix> {
    Evaluator { env, gates: HashMap::new() }.apply(t, v)
}

// ---------------------------------------------------------------------------
// Sampling and equivalence

#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    pub hyps: Vec<NormHyp>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { samples: 3, tol: 1e-9, seed: 42, hyps: Vec::new() }
    }
}

/// Random bindings for `names`; closed terms get a single empty env.
pub fn sample_envs(names: &[String], cfg: &OracleConfig) -> Vec<Env> {
    if names.is_empty() {
        return vec![Env::new()];
    }
    let mut sorted = names.to_vec();
    sorted.sort();
    sorted.dedup();
    (0..cfg.samples.max(1))
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9).wrapping_add(s as u64));
            let mut env: Env = sorted
                .iter()
                .map(|n| (n.clone(), C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                .collect();
            for h in &cfg.hyps {
                let x = *env.entry(h.x.clone()).or_insert(C64::new(0.6, 0.0));
                let y = *env.entry(h.y.clone()).or_insert(C64::new(0.0, 0.8));
                let n = (x.norm_sqr() + y.norm_sqr()).sqrt();
                env.insert(h.x.clone(), x / n);
                env.insert(h.y.clone(), y / n);
            }
            env
        })
        .collect()
}

/// Location and values of a disagreeing entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub row: usize,
    pub col: usize,
    pub lhs: String,
    pub rhs: String,
    pub sample: usize,
}

fn witness(a: &DenseMatrix, b: &DenseMatrix, idx: usize, sample: usize) -> Witness {
    Witness {
        row: idx / a.cols.max(1),
        col: idx % a.cols.max(1),
        lhs: fmt_c64(a.data[idx]),
        rhs: fmt_c64(b.data[idx]),
        sample,
    }
}

fn envs_for(a: &Term, b: &Term, cfg: &OracleConfig) -> Vec<Env> {
    let mut names = a.atom_names();
    names.extend(b.atom_names());
    sample_envs(&names, cfg)
}

fn same_dims(a: &Term, b: &Term) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimMismatch { op: "equivalence", expected: a.dims(), got: b.dims(), pos: None });
    }
    Ok(())
}

/// Matrix equivalence by direct entrywise comparison over sampled envs.
pub fn mat_equiv(a: &Term, b: &Term, cfg: &OracleConfig) -> Result<std::result::Result<(), Witness>> {
    same_dims(a, b)?;
    for (s, env) in envs_for(a, b, cfg).iter().enumerate() {
        let (x, y) = (eval_dense(a, env)?, eval_dense(b, env)?);
        let (idx, d) = x.max_diff(&y);
        if d > cfg.tol {
            return Ok(Err(witness(&x, &y, idx, s)));
        }
    }
    Ok(Ok(()))
}

/// Matrix equivalence by applying both sides to every basis vector.
pub fn mat_equiv_basis(a: &Term, b: &Term, cfg: &OracleConfig) -> Result<bool> {
    same_dims(a, b)?;
    let n = a.dims().cols as usize;
    for env in envs_for(a, b, cfg) {
        for j in 0..n {
            let x = apply_dense(a, DenseMatrix::basis(n, j), &env)?;
            let y = apply_dense(b, DenseMatrix::basis(n, j), &env)?;
            if !x.approx_eq(&y, cfg.tol) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObsVerdict {
    Equivalent(C64),
    NotEquivalent(Witness),
}

/// Equivalence up to a global unit-modulus factor `c` with `c*a = b`.
pub fn obs_equiv(a: &Term, b: &Term, cfg: &OracleConfig) -> Result<ObsVerdict> {
    same_dims(a, b)?;
    let mut phase: Option<C64> = None;
    for (s, env) in envs_for(a, b, cfg).iter().enumerate() {
        let (x, y) = (eval_dense(a, env)?, eval_dense(b, env)?);
        let (idx, mag) = x.data.iter().enumerate().fold((0, 0.0), |acc, (i, z)| {
            if z.norm() > acc.1 {
                (i, z.norm())
            } else {
                acc
            }
        });
        let c = if mag <= cfg.tol {
            if y.max_abs() > cfg.tol {
                let (i, _) = x.max_diff(&y);
                return Ok(ObsVerdict::NotEquivalent(witness(&x, &y, i, s)));
            }
            C64::new(1.0, 0.0)
        } else {
            y.data[idx] / x.data[idx]
        };
        if (c.norm() - 1.0).abs() > cfg.tol {
            return Ok(ObsVerdict::NotEquivalent(witness(&x, &y, idx, s)));
        }
        let scaled = x.scale(c);
        let (i, d) = scaled.max_diff(&y);
        if d > cfg.tol {
            return Ok(ObsVerdict::NotEquivalent(witness(&scaled, &y, i, s)));
        }
        match phase {
            Some(p) if (p - c).norm() > cfg.tol => {
                return Ok(ObsVerdict::NotEquivalent(witness(&x, &y, idx, s)));
            }
            None => phase = Some(c),
            _ => {}
        }
    }
    Ok(ObsVerdict::Equivalent(phase.unwrap_or(C64::new(1.0, 0.0))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::named;

    fn ev(t: &Term) -> DenseMatrix {
        eval_dense(t, &Env::new()).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hadamard_matrix() {
        let h = ev(&named("H").unwrap());
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let want = DenseMatrix::from_rows(&[vec![c(r, 0.), c(r, 0.)], vec![c(r, 0.), c(-r, 0.)]]);
        assert!(h.approx_eq(&want, 1e-12));
    }

    #[test]
    fn kets_and_traces() {
        assert_eq!(ev(&Term::ket0()), DenseMatrix::basis(2, 0));
        assert_eq!(trace_dense(&ev(&named("B0").unwrap())).unwrap(), c(1., 0.));
        assert_eq!(trace_dense(&ev(&Term::id(4))).unwrap(), c(4., 0.));
        assert!(matches!(trace_dense(&ev(&Term::ket0())), Err(Error::NotSquare(_))));
    }

    #[test]
    fn structured_apply_matches_materialized() {
        let op = named("TOF").unwrap().kron(&Term::id(2)).kron(&named("H").unwrap());
        let m = ev(&op);
        let v = ev(&Term::kets(&[true, true, false, true, false]));
        let direct = m.mul(&v);
        let lazy = apply_dense(&op, v, &Env::new()).unwrap();
        assert!(direct.approx_eq(&lazy, 1e-12));
    }

    #[test]
    fn equivalences() {
        let cfg = OracleConfig::default();
        let x = named("X").unwrap();
        let z = named("Z").unwrap();
        assert!(mat_equiv(&x.matmul(&x).unwrap(), &Term::id(2), &cfg).unwrap().is_ok());
        assert!(mat_equiv(&x, &z, &cfg).unwrap().is_err());
        assert!(!mat_equiv_basis(&x, &z, &cfg).unwrap());
        let i2 = Term::id(2);
        match obs_equiv(&i2, &i2.scale(crate::scalar::Scalar::int(-1)), &cfg).unwrap() {
            ObsVerdict::Equivalent(p) => assert!((p - c(-1., 0.)).norm() < 1e-12),
            v => panic!("{v:?}"),
        }
    }
}
