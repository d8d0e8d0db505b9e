//! Canonical normal forms over the computational basis.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{NormHyp, Scalar};
use crate::term::{log2_exact, named, Dims, Kind, Term};

/// A tensor slot of a summand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BasisFactor {
    Ket(bool),
    Bra(bool),
    KetBra(bool, bool),
}

/// Canonical sum of scalar-weighted basis products.
///
/// Entry `(r, c)` holds the coefficient of `|r><c|`, where `r` and `c` are
/// bit strings with slot 0 in the most significant position. Absent keys are
/// zero; no stored scalar is zero. Vectors have `col_qubits == 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub row_qubits: u32,
    pub col_qubits: u32,
    pub entries: BTreeMap<(u64, u64), Scalar>,
}

fn qubits(n: u64) -> Result<u32> {
    log2_exact(n).ok_or(Error::NotQubitDims(Dims::new(n, n)))
}

impl NormalForm {
    pub fn zero(row_qubits: u32, col_qubits: u32) -> NormalForm {
        NormalForm { row_qubits, col_qubits, entries: BTreeMap::new() }
    }

    pub fn of_dims(d: Dims) -> Result<NormalForm> {
        match (log2_exact(d.rows), log2_exact(d.cols)) {
            (Some(r), Some(c)) => Ok(NormalForm::zero(r, c)),
            _ => Err(Error::NotQubitDims(d)),
        }
    }

    pub fn single(row_qubits: u32, col_qubits: u32, r: u64, c: u64, s: Scalar) -> NormalForm {
        let mut nf = NormalForm::zero(row_qubits, col_qubits);
        nf.insert(r, c, s);
        nf
    }

    pub fn dims(&self) -> Dims {
        Dims::new(1u64 << self.row_qubits, 1u64 << self.col_qubits)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, r: u64, c: u64) -> Scalar {
        self.entries.get(&(r, c)).cloned().unwrap_or_default()
    }

    pub fn insert(&mut self, r: u64, c: u64, s: Scalar) {
        if s.is_zero() {
            return;
        }
        match self.entries.get_mut(&(r, c)) {
            Some(v) => {
                *v = v.add(&s);
                if v.is_zero() {
                    self.entries.remove(&(r, c));
                }
            }
            None => {
                self.entries.insert((r, c), s);
            }
        }
    }

    pub fn add_assign(&mut self, o: &NormalForm) {
        debug_assert_eq!((self.row_qubits, self.col_qubits), (o.row_qubits, o.col_qubits));
        for (&(r, c), s) in &o.entries {
            self.insert(r, c, s.clone());
        }
    }

    pub fn scale(&self, k: &Scalar) -> NormalForm {
        if k.is_one() {
            return self.clone();
        }
        let mut out = NormalForm::zero(self.row_qubits, self.col_qubits);
        for (&(r, c), s) in &self.entries {
            out.insert(r, c, s.mul(k));
        }
        out
    }

    pub fn kron(&self, o: &NormalForm) -> NormalForm {
        let mut out = NormalForm::zero(self.row_qubits + o.row_qubits, self.col_qubits + o.col_qubits);
        for (&(r1, c1), s1) in &self.entries {
            for (&(r2, c2), s2) in &o.entries {
                out.insert((r1 << o.row_qubits) | r2, (c1 << o.col_qubits) | c2, s1.mul(s2));
            }
        }
        out
    }

    /// Matrix product computed over sparse entries.
    pub fn matmul(&self, o: &NormalForm) -> NormalForm {
        debug_assert_eq!(self.col_qubits, o.row_qubits);
        let mut by_row: HashMap<u64, Vec<(u64, &Scalar)>> = HashMap::new();
        for (&(r, c), s) in &o.entries {
            by_row.entry(r).or_default().push((c, s));
        }
        let mut out = NormalForm::zero(self.row_qubits, o.col_qubits);
        for (&(r, k), s1) in &self.entries {
            if let Some(row) = by_row.get(&k) {
                for (c, s2) in row {
                    out.insert(r, *c, s1.mul(s2));
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> NormalForm {
        let mut out = NormalForm::zero(self.col_qubits, self.row_qubits);
        for (&(r, c), s) in &self.entries {
            out.insert(c, r, s.conj());
        }
        out
    }

    /// Sum of diagonal coefficients.
    pub fn trace(&self) -> Result<Scalar> {
        if self.row_qubits != self.col_qubits {
            return Err(Error::NotAnOperator);
        }
        Ok(self.entries.iter().filter(|((r, c), _)| r == c).fold(Scalar::zero(), |a, (_, s)| a.add(s)))
    }

    /// The coefficient of a 1x1 form.
    pub fn as_scalar(&self) -> Option<Scalar> {
        (self.row_qubits == 0 && self.col_qubits == 0).then(|| self.get(0, 0))
    }

    pub fn map_scalars(&self, f: impl Fn(&Scalar) -> Scalar) -> NormalForm {
        let mut out = NormalForm::zero(self.row_qubits, self.col_qubits);
        for (&(r, c), s) in &self.entries {
            out.insert(r, c, f(s));
        }
        out
    }

    pub fn reduce_hyps(&self, hyps: &[NormHyp]) -> NormalForm {
        if hyps.is_empty() {
            return self.clone();
        }
        self.map_scalars(|s| s.reduce_hyps(hyps))
    }

    /// Summands as slot lists, in canonical order.
    pub fn summands(&self) -> Vec<(Scalar, Vec<BasisFactor>)> {
        let bit = |x: u64, n: u32, i: u32| (x >> (n - 1 - i)) & 1 == 1;
        self.entries
            .iter()
            .map(|(&(r, c), s)| {
                let (rq, cq) = (self.row_qubits, self.col_qubits);
                let slots = if rq == cq {
                    (0..rq).map(|i| BasisFactor::KetBra(bit(r, rq, i), bit(c, cq, i))).collect()
                } else {
                    let mut v: Vec<BasisFactor> = (0..rq).map(|i| BasisFactor::Ket(bit(r, rq, i))).collect();
                    v.extend((0..cq).map(|i| BasisFactor::Bra(bit(c, cq, i))));
                    v
                };
                (s.clone(), slots)
            })
            .collect()
    }

    /// A term in reduced shape denoting this form.
    pub fn to_term(&self) -> Term {
        let d = self.dims();
        let (rq, cq) = (self.row_qubits, self.col_qubits);
        let bits = |x: u64, n: u32| -> Vec<bool> { (0..n).map(|i| (x >> (n - 1 - i)) & 1 == 1).collect() };
        let summands: Vec<Term> = self
            .entries
            .iter()
            .map(|(&(r, c), s)| {
                let base = if rq == cq && rq > 0 {
                    let names = ["B0", "B1", "B2", "B3"];
                    let (rb, cb) = (bits(r, rq), bits(c, cq));
                    let mut it = rb.iter().zip(&cb).map(|(a, b)| {
                        named(names[usize::from(*a) * 2 + usize::from(*b)]).expect("library")
                    });
                    let first = it.next().expect("slot");
                    it.fold(first, |acc, t| acc.kron(&t))
                } else {
                    let kets = (rq > 0).then(|| Term::kets(&bits(r, rq)));
                    let bras = (cq > 0).then(|| Term::kets(&bits(c, cq)).dagger());
                    match (kets, bras) {
                        (Some(k), Some(b)) => Term::mm(&k, &b),
                        (Some(k), None) => k,
                        (None, Some(b)) => b,
                        (None, None) => Term::id(1),
                    }
                };
                if s.is_one() {
                    base
                } else {
                    base.scale(s.clone())
                }
            })
            .collect();
        match summands.split_last() {
            None => Term::zero_of(d),
            Some((last, rest)) => rest.iter().rev().fold(last.clone(), |acc, t| Term::plus(t, &acc)),
        }
    }
}

impl Serialize for NormalForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Summand {
            coeff: String,
            slots: Vec<BasisFactor>,
        }
        #[derive(Serialize)]
        struct Doc {
            row_qubits: u32,
            col_qubits: u32,
            summands: Vec<Summand>,
        }
        Doc {
            row_qubits: self.row_qubits,
            col_qubits: self.col_qubits,
            summands: self
                .summands()
                .into_iter()
                .map(|(c, slots)| Summand { coeff: c.to_string(), slots })
                .collect(),
        }
        .serialize(s)
    }
}

fn gate_cache() -> &'static Mutex<HashMap<String, NormalForm>> {
    static CACHE: OnceLock<Mutex<HashMap<String, NormalForm>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Normal form of a library gate, computed once from its body.
pub fn gate_nf(t: &Term) -> Result<NormalForm> {
    let Kind::Gate(g) = t.kind() else { unreachable!("gate_nf on non-gate") };
    let key = g.label();
    if let Some(nf) = gate_cache().lock().expect("cache").get(&key) {
        return Ok(nf.clone());
    }
    let mut eng = super::engine::Engine::new(super::EngineConfig::default());
    let reduced = eng.normalize(&g.body)?;
    let nf = unified_base(&reduced)?;
    gate_cache().lock().expect("cache").insert(key, nf.clone());
    Ok(nf)
}

/// Collects a term in reduced shape into its normal form.
pub fn unified_base(t: &Term) -> Result<NormalForm> {
    let mut acc = NormalForm::of_dims(t.dims())?;
    let mut cur = t.clone();
    loop {
        match cur.kind() {
            Kind::Add(a, b) => {
                acc.add_assign(&summand_nf(a)?);
                let next = b.clone();
                cur = next;
            }
            _ => {
                acc.add_assign(&summand_nf(&cur)?);
                return Ok(acc);
            }
        }
    }
}

fn summand_nf(t: &Term) -> Result<NormalForm> {
    Ok(match t.kind() {
        Kind::Add(..) => unified_base(t)?,
        Kind::Zero => NormalForm::of_dims(t.dims())?,
        Kind::Ket0 => NormalForm::single(1, 0, 0, 0, Scalar::one()),
        Kind::Ket1 => NormalForm::single(1, 0, 1, 0, Scalar::one()),
        Kind::Identity(n) => {
            let q = qubits(*n)?;
            let mut nf = NormalForm::zero(q, q);
            for i in 0..*n {
                nf.insert(i, i, Scalar::one());
            }
            nf
        }
        Kind::Scale(c, a) => summand_nf(a)?.scale(c),
        Kind::Kron(a, b) => summand_nf(a)?.kron(&summand_nf(b)?),
        Kind::Gate(_) => gate_nf(t)?,
        Kind::Dagger(x) if matches!(x.kind(), Kind::Ket0 | Kind::Ket1) => {
            NormalForm::single(0, 1, 0, u64::from(matches!(x.kind(), Kind::Ket1)), Scalar::one())
        }
        Kind::MatMul(a, b) if a.dims().cols == 1 => summand_nf(a)?.kron(&summand_nf(b)?),
        _ => return Err(Error::NotInReducedShape(crate::syntax::render(t))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collects_like_terms() {
        let h = Scalar::inv_sqrt2();
        let t = Term::plus(&Term::ket0().scale(h.clone()), &Term::ket0().scale(h.clone()));
        let nf = unified_base(&t).unwrap();
        assert_eq!(nf, NormalForm::single(1, 0, 0, 0, Scalar::sqrt2()));
        let c = Term::plus(&Term::ket0().scale(h.clone()), &Term::ket0().scale(h.neg()));
        assert!(unified_base(&c).unwrap().is_zero());
    }

    #[test]
    fn plus_expands() {
        let nf = unified_base(&named("ket_plus").unwrap()).unwrap();
        assert_eq!(nf.len(), 2);
        assert_eq!(nf.get(0, 0), Scalar::inv_sqrt2());
        assert_eq!(nf.get(1, 0), Scalar::inv_sqrt2());
    }

    #[test]
    fn render_round_trip() {
        let nf = gate_nf(&named("CX").unwrap()).unwrap();
        assert_eq!(unified_base(&nf.to_term()).unwrap(), nf);
        assert_eq!(nf.trace().unwrap(), Scalar::int(2));
    }

    #[test]
    fn irreducible_product_is_rejected() {
        let x = named("X").unwrap();
        let t = Term::mm(&x, &x);
        assert!(matches!(unified_base(&t), Err(Error::NotInReducedShape(_))));
    }
}
