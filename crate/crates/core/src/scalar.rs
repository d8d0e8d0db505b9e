//! Exact complex scalars over Q(i)[sqrt2] with free commuting atoms.
//!
//! A [`Scalar`] is a finite sum of monomials over [`Atom`]s, each weighted by
//! a [`Coefficient`] `a + b*sqrt2` with `a, b` Gaussian rationals. Zero-testing
//! is structural: the canonical term list is empty.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use num_rational::Rational64;
use num_traits::{One, Zero};
use smallvec::SmallVec;

use crate::error::Error;

type Q = Rational64;

/// A symbolic scalar atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// A free complex variable.
    Var(Arc<str>),
    /// The formal conjugate of `Var` with the same name.
    Conj(Arc<str>),
    /// `e^{i u}` for a real angle symbol `u`.
    Phase(Arc<str>),
}

impl Atom {
    pub fn var(name: &str) -> Atom {
        Atom::Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        match self {
            Atom::Var(n) | Atom::Conj(n) | Atom::Phase(n) => n,
        }
    }

    fn conj(&self) -> Atom {
        match self {
            Atom::Var(n) => Atom::Conj(n.clone()),
            Atom::Conj(n) => Atom::Var(n.clone()),
            Atom::Phase(n) => Atom::Phase(n.clone()),
        }
    }
}

/// Gaussian rational `re + im*i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Gq {
    re: Q,
    im: Q,
}

impl Gq {
    const ZERO: Gq = Gq { re: Q::new_raw(0, 1), im: Q::new_raw(0, 1) };

    fn new(re: Q, im: Q) -> Gq {
        Gq { re, im }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add(self, o: Gq) -> Gq {
        Gq::new(self.re + o.re, self.im + o.im)
    }
    fn sub(self, o: Gq) -> Gq {
        Gq::new(self.re - o.re, self.im - o.im)
    }
    fn mul(self, o: Gq) -> Gq {
        Gq::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
    fn scale(self, k: Q) -> Gq {
        Gq::new(self.re * k, self.im * k)
    }
    fn neg(self) -> Gq {
        Gq::new(-self.re, -self.im)
    }
    fn conj(self) -> Gq {
        Gq::new(self.re, -self.im)
    }
    fn inv(self) -> Option<Gq> {
        let n = self.re * self.re + self.im * self.im;
        if n.is_zero() {
            None
        } else {
            Some(Gq::new(self.re / n, -self.im / n))
        }
    }
    fn to_c64(self) -> C64 {
        C64::new(q_to_f64(self.re), q_to_f64(self.im))
    }
}

fn q_to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Coefficient `a + b*sqrt2` with `a, b` in Q(i).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Coefficient {
    a: Gq,
    b: Gq,
}

#[allow(clippy::should_implement_trait)]
impl Coefficient {
    pub const ZERO: Coefficient = Coefficient { a: Gq::ZERO, b: Gq::ZERO };

    /// Builds `(ar + ai*i) + (br + bi*i)*sqrt2`.
    pub fn new(ar: Q, ai: Q, br: Q, bi: Q) -> Coefficient {
        Coefficient { a: Gq::new(ar, ai), b: Gq::new(br, bi) }
    }

    pub fn rational(q: Q) -> Coefficient {
        Coefficient::new(q, Q::zero(), Q::zero(), Q::zero())
    }

    pub fn one() -> Coefficient {
        Coefficient::rational(Q::one())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        *self == Coefficient::one()
    }

    /// Rational parts `(re a, im a, re b, im b)`.
    pub fn parts(&self) -> (Q, Q, Q, Q) {
        (self.a.re, self.a.im, self.b.re, self.b.im)
    }

    pub fn add(self, o: Coefficient) -> Coefficient {
        Coefficient { a: self.a.add(o.a), b: self.b.add(o.b) }
    }

    pub fn mul(self, o: Coefficient) -> Coefficient {
        let two = Q::from_integer(2);
        Coefficient {
            a: self.a.mul(o.a).add(self.b.mul(o.b).scale(two)),
            b: self.a.mul(o.b).add(self.b.mul(o.a)),
        }
    }

    pub fn neg(self) -> Coefficient {
        Coefficient { a: self.a.neg(), b: self.b.neg() }
    }

    pub fn conj(self) -> Coefficient {
        Coefficient { a: self.a.conj(), b: self.b.conj() }
    }

    /// Multiplicative inverse via `(a - b sqrt2) / (a^2 - 2 b^2)`.
    pub fn inv(self) -> Option<Coefficient> {
        let two = Q::from_integer(2);
        let norm = self.a.mul(self.a).sub(self.b.mul(self.b).scale(two));
        let ni = norm.inv()?;
        Some(Coefficient { a: self.a.mul(ni), b: self.b.neg().mul(ni) })
    }

    pub fn to_c64(self) -> C64 {
        self.a.to_c64() + self.b.to_c64() * std::f64::consts::SQRT_2
    }
}

/// A monomial: sorted atoms with exponents. Variable exponents are positive,
/// phase exponents are nonzero multiples of the angle.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(SmallVec<[(Atom, i32); 2]>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(SmallVec::new())
    }

    pub fn atom(a: Atom) -> Monomial {
        let mut v = SmallVec::new();
        v.push((a, 1));
        Monomial(v)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, i32)] {
        &self.0
    }

    fn mul(&self, o: &Monomial) -> Monomial {
        if self.0.is_empty() {
            return o.clone();
        }
        if o.0.is_empty() {
            return self.clone();
        }
        let mut out: SmallVec<[(Atom, i32); 2]> = SmallVec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < o.0.len() {
            match self.0[i].0.cmp(&o.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(o.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let e = self.0[i].1 + o.0[j].1;
                    if e != 0 {
                        out.push((self.0[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(self.0[i..].iter().cloned());
        out.extend(o.0[j..].iter().cloned());
        Monomial(out)
    }

    fn conj(&self) -> Monomial {
        let mut v: SmallVec<[(Atom, i32); 2]> = self
            .0
            .iter()
            .map(|(a, e)| match a {
                Atom::Phase(_) => (a.clone(), -e),
                _ => (a.conj(), *e),
            })
            .collect();
        v.sort_by(|x, y| x.0.cmp(&y.0));
        Monomial(v)
    }

    fn exponent(&self, a: &Atom) -> i32 {
        self.0.iter().find(|(b, _)| b == a).map(|(_, e)| *e).unwrap_or(0)
    }

    /// Divides out `a^k`; caller guarantees the exponent is available.
    fn div_atom(&self, a: &Atom, k: i32) -> Monomial {
        let v = self
            .0
            .iter()
            .filter_map(|(b, e)| {
                if b == a {
                    (e - k != 0).then(|| (b.clone(), e - k))
                } else {
                    Some((b.clone(), *e))
                }
            })
            .collect();
        Monomial(v)
    }
}

/// Numeric bindings for atoms, keyed by atom name.
///
/// `Var(x)` reads `x`, `Conj(x)` reads the conjugate of `x`, and `Phase(u)`
/// evaluates `exp(i * Re(u))`.
pub type Env = HashMap<String, C64>;

/// Normalization hypothesis `|x|^2 + |y|^2 = 1`, applied as the rewrite
/// `y * conj(y) -> 1 - x * conj(x)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormHyp {
    pub x: String,
    pub y: String,
}

/// Exact scalar. Canonical: sorted by monomial, no zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Scalar(SmallVec<[(Monomial, Coefficient); 1]>);

impl Scalar {
    pub fn zero() -> Scalar {
        Scalar(SmallVec::new())
    }

    pub fn one() -> Scalar {
        Scalar::from_coeff(Coefficient::one())
    }

    pub fn from_coeff(c: Coefficient) -> Scalar {
        let mut v = SmallVec::new();
        if !c.is_zero() {
            v.push((Monomial::one(), c));
        }
        Scalar(v)
    }

    pub fn int(n: i64) -> Scalar {
        Scalar::from_coeff(Coefficient::rational(Q::from_integer(n)))
    }

    pub fn rational(n: i64, d: i64) -> Scalar {
        Scalar::from_coeff(Coefficient::rational(Q::new(n, d)))
    }

    pub fn i() -> Scalar {
        Scalar::from_coeff(Coefficient::new(Q::zero(), Q::one(), Q::zero(), Q::zero()))
    }

    pub fn sqrt2() -> Scalar {
        Scalar::from_coeff(Coefficient::new(Q::zero(), Q::zero(), Q::one(), Q::zero()))
    }

    /// `1/sqrt2`, stored as `1/2 * sqrt2`.
    pub fn inv_sqrt2() -> Scalar {
        Scalar::from_coeff(Coefficient::new(Q::zero(), Q::zero(), Q::new(1, 2), Q::zero()))
    }

    pub fn atom(a: Atom) -> Scalar {
        let mut v = SmallVec::new();
        v.push((Monomial::atom(a), Coefficient::one()));
        Scalar(v)
    }

    pub fn var(name: &str) -> Scalar {
        Scalar::atom(Atom::Var(Arc::from(name)))
    }

    pub fn phase(angle: &str) -> Scalar {
        Scalar::atom(Atom::Phase(Arc::from(angle)))
    }

    /// Builds a canonical scalar from arbitrary (possibly repeated) terms.
    pub fn from_terms(mut terms: Vec<(Monomial, Coefficient)>) -> Scalar {
        terms.sort_by(|x, y| x.0.cmp(&y.0));
        let mut out: SmallVec<[(Monomial, Coefficient); 1]> = SmallVec::new();
        for (m, c) in terms {
            match out.last_mut() {
                Some(last) if last.0 == m => last.1 = last.1.add(c),
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Scalar(out)
    }

    pub fn terms(&self) -> &[(Monomial, Coefficient)] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.0.len() == 1 && self.0[0].0.is_one() && self.0[0].1.is_one()
    }

    /// The value as a coefficient when no atoms occur.
    pub fn as_constant(&self) -> Option<Coefficient> {
        match self.0.as_slice() {
            [] => Some(Coefficient::ZERO),
            [(m, c)] if m.is_one() => Some(*c),
            _ => None,
        }
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let mut out: SmallVec<[(Monomial, Coefficient); 1]> = SmallVec::new();
        let (a, b) = (&self.0, &o.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = a[i].1.add(b[j].1);
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        out.extend(b[j..].iter().cloned());
        Scalar(out)
    }

    pub fn neg(&self) -> Scalar {
        Scalar(self.0.iter().map(|(m, c)| (m.clone(), c.neg())).collect())
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Scalar) -> Scalar {
        if self.is_zero() || o.is_zero() {
            return Scalar::zero();
        }
        if let (Some(a), Some(b)) = (self.as_constant(), o.as_constant()) {
            return Scalar::from_coeff(a.mul(b));
        }
        let mut terms = Vec::with_capacity(self.0.len() * o.0.len());
        for (m1, c1) in &self.0 {
            for (m2, c2) in &o.0 {
                terms.push((m1.mul(m2), c1.mul(*c2)));
            }
        }
        Scalar::from_terms(terms)
    }

    pub fn conj(&self) -> Scalar {
        Scalar::from_terms(self.0.iter().map(|(m, c)| (m.conj(), c.conj())).collect())
    }

    /// Inverse of a nonzero constant; `None` when atoms occur or the value is 0.
    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        self.as_constant()?.inv().map(Scalar::from_coeff)
    }

    /// Evaluates under `env`; every atom name must be bound.
    pub fn eval(&self, env: &Env) -> Result<C64, Error> {
        let mut acc = C64::new(0.0, 0.0);
        for (m, c) in &self.0 {
            let mut v = c.to_c64();
            for (a, e) in m.factors() {
                let z = *env.get(a.name()).ok_or_else(|| Error::UnboundAtom(a.name().to_string()))?;
                let base = match a {
                    Atom::Var(_) => z,
                    Atom::Conj(_) => z.conj(),
                    Atom::Phase(_) => C64::from_polar(1.0, z.re),
                };
                v *= base.powi(*e);
            }
            acc += v;
        }
        Ok(acc)
    }

    /// Names of all atoms occurring in the scalar.
    pub fn atom_names(&self, out: &mut Vec<String>) {
        for (m, _) in &self.0 {
            for (a, _) in m.factors() {
                if !out.iter().any(|n| n == a.name()) {
                    out.push(a.name().to_string());
                }
            }
        }
    }

    /// Reduces modulo the hypotheses: every `y*conj(y)` factor is rewritten to
    /// `1 - x*conj(x)` until none remains.
    pub fn reduce_hyps(&self, hyps: &[NormHyp]) -> Scalar {
        if hyps.is_empty() || self.as_constant().is_some() {
            return self.clone();
        }
        let mut cur = self.clone();
        for h in hyps {
            let y = Atom::Var(Arc::from(h.y.as_str()));
            let yc = Atom::Conj(Arc::from(h.y.as_str()));
            let x = Scalar::var(&h.x);
            let repl = Scalar::one().sub(&x.mul(&x.conj()));
            loop {
                let mut changed = false;
                let mut acc = Scalar::zero();
                for (m, c) in cur.0.iter() {
                    let k = m.exponent(&y).min(m.exponent(&yc));
                    let term = if k > 0 {
                        changed = true;
                        let rest = m.div_atom(&y, k).div_atom(&yc, k);
                        let mut t = Scalar::from_terms(vec![(rest, *c)]);
                        for _ in 0..k {
                            t = t.mul(&repl);
                        }
                        t
                    } else {
                        Scalar::from_terms(vec![(m.clone(), *c)])
                    };
                    acc = acc.add(&term);
                }
                cur = acc;
                if !changed {
                    break;
                }
            }
        }
        cur
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Scalar {
        Scalar::int(n)
    }
}

fn fmt_q(q: Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn fmt_monomial(m: &Monomial) -> String {
    let parts: Vec<String> = m
        .factors()
        .iter()
        .map(|(a, e)| match a {
            Atom::Var(n) => pow(n.to_string(), *e),
            Atom::Conj(n) => pow(format!("conj({n})"), *e),
            Atom::Phase(n) => match e {
                1 => format!("cexp({n})"),
                -1 => format!("cexp(-{n})"),
                k => format!("cexp({k}*{n})"),
            },
        })
        .collect();
    parts.join("*")
}

fn pow(base: String, e: i32) -> String {
    if e == 1 {
        base
    } else {
        format!("{base}^{e}")
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut addends = Vec::new();
        for (m, c) in &self.0 {
            let mono = fmt_monomial(m);
            let (ar, ai, br, bi) = c.parts();
            for (q, unit) in [(ar, ""), (ai, "i"), (br, "sqrt2"), (bi, "sqrt2*i")] {
                if q.is_zero() {
                    continue;
                }
                let mut suffix: Vec<&str> = Vec::new();
                if !unit.is_empty() {
                    suffix.push(unit);
                }
                if !mono.is_empty() {
                    suffix.push(&mono);
                }
                let tail = suffix.join("*");
                let s = if tail.is_empty() {
                    fmt_q(q)
                } else if q.is_one() {
                    tail
                } else if (-q).is_one() {
                    format!("-{tail}")
                } else {
                    format!("{}*{tail}", fmt_q(q))
                };
                addends.push(s);
            }
        }
        write!(f, "{}", addends.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, C64)]) -> Env {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn like_terms_collect() {
        let s = Scalar::inv_sqrt2().add(&Scalar::inv_sqrt2());
        assert_eq!(s, Scalar::sqrt2());
        assert_eq!(Scalar::var("a").add(&Scalar::zero()), Scalar::var("a"));
    }

    #[test]
    fn sqrt2_squares_to_two() {
        assert_eq!(Scalar::inv_sqrt2().mul(&Scalar::inv_sqrt2()), Scalar::rational(1, 2));
        let mut p = Scalar::one();
        for _ in 0..6 {
            p = p.mul(&Scalar::inv_sqrt2());
        }
        assert_eq!(p, Scalar::rational(1, 8));
        let f = p.eval(&Env::new()).unwrap();
        assert!((f.re - std::f64::consts::FRAC_1_SQRT_2.powi(6)).abs() < 1e-12);
    }

    #[test]
    fn sum_of_conjugate_radicals() {
        let h = Scalar::rational(1, 2);
        let r = h.mul(&Scalar::sqrt2());
        let x = h.add(&r);
        let y = h.sub(&r);
        let lhs = x.add(&y);
        assert_eq!(lhs, Scalar::one());
        let fx = x.eval(&Env::new()).unwrap() + y.eval(&Env::new()).unwrap();
        assert!((fx - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn conj_and_zero() {
        assert_eq!(Scalar::i().conj(), Scalar::i().neg());
        let a = Scalar::var("alpha");
        assert_eq!(a.conj(), Scalar::atom(Atom::Conj(Arc::from("alpha"))));
        assert!(Scalar::inv_sqrt2().sub(&Scalar::inv_sqrt2()).is_zero());
        assert!(!a.is_zero());
    }

    #[test]
    fn phases_cancel_formally() {
        let u = Scalar::phase("u");
        assert_eq!(u.mul(&u.conj()), Scalar::one());
        assert_eq!(u.to_string(), "cexp(u)");
        assert_eq!(u.conj().to_string(), "cexp(-u)");
    }

    #[test]
    fn rendering() {
        let s = Scalar::rational(1, 2).add(&Scalar::sqrt2().mul(&Scalar::i()).mul(&Scalar::rational(-1, 2)));
        assert_eq!(s.to_string(), "1/2 + -1/2*sqrt2*i");
        assert_eq!(Scalar::var("alpha").conj().to_string(), "conj(alpha)");
    }

    #[test]
    fn eval_binds_atoms() {
        let e = env(&[("alpha", C64::new(0.6, 0.8))]);
        assert_eq!(Scalar::var("alpha").eval(&e).unwrap(), C64::new(0.6, 0.8));
        assert!(matches!(Scalar::var("beta").eval(&e), Err(Error::UnboundAtom(_))));
        let v = Scalar::inv_sqrt2().eval(&Env::new()).unwrap();
        assert_eq!(v.re, std::f64::consts::FRAC_1_SQRT_2);
    }

    #[test]
    fn normalized_pair_evaluates_to_one() {
        let (a, b) = (Scalar::var("alpha"), Scalar::var("beta"));
        let n = a.mul(&a.conj()).add(&b.mul(&b.conj()));
        let e = env(&[("alpha", C64::new(0.6, 0.0)), ("beta", C64::new(0.0, 0.8))]);
        assert!((n.eval(&e).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-9);
        let hyp = NormHyp { x: "alpha".into(), y: "beta".into() };
        assert_eq!(n.reduce_hyps(&[hyp]), Scalar::one());
    }

    #[test]
    fn inverse_of_radical() {
        let c = Scalar::one().add(&Scalar::sqrt2());
        let inv = c.inv().unwrap();
        assert_eq!(c.mul(&inv), Scalar::one());
        assert!(Scalar::zero().inv().is_none());
        assert!(Scalar::var("a").inv().is_none());
    }
}
