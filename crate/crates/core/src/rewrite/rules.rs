//! Root-level rule instances shared by the engine and the standalone passes.

use crate::scalar::Scalar;
use crate::term::{Dims, Kind, Term};

use super::Law;

pub(crate) type Fired = Option<(Law, Term)>;

fn zero(d: Dims) -> Term {
    Term::zero_of(d)
}

/// Scale simplification; expects a normalized child.
pub(crate) fn scale(t: &Term) -> Fired {
    let Kind::Scale(c, a) = t.kind() else { return None };
    if c.is_zero() {
        return Some((Law::L3, zero(t.dims())));
    }
    match a.kind() {
        Kind::Zero => Some((Law::L3, a.clone())),
        _ if c.is_one() => Some((Law::L3, a.clone())),
        Kind::Scale(d, b) => Some((Law::L2, b.scale(c.mul(d)))),
        Kind::Add(x, y) => Some((Law::L4, Term::plus(&x.scale(c.clone()), &y.scale(c.clone())))),
        _ => None,
    }
}

/// Zero elimination and right association of sums.
pub(crate) fn add(t: &Term) -> Fired {
    let Kind::Add(a, b) = t.kind() else { return None };
    match (a.kind(), b.kind()) {
        (Kind::Zero, _) => Some((Law::L9, b.clone())),
        (_, Kind::Zero) => Some((Law::L9, a.clone())),
        (Kind::Add(x, y), _) => Some((Law::L2, Term::plus(x, &Term::plus(y, b)))),
        _ => None,
    }
}

/// Tensor simplification: zeros, unit factors, scalars, sums, association.
pub(crate) fn kron(t: &Term) -> Fired {
    let Kind::Kron(a, b) = t.kind() else { return None };
    if matches!(a.kind(), Kind::Zero) || matches!(b.kind(), Kind::Zero) {
        return Some((Law::L10, zero(t.dims())));
    }
    if matches!(a.kind(), Kind::Identity(1)) {
        return Some((Law::L8, b.clone()));
    }
    if matches!(b.kind(), Kind::Identity(1)) {
        return Some((Law::L8, a.clone()));
    }
    if let Kind::Scale(c, x) = a.kind() {
        return Some((Law::L6, x.kron(b).scale(c.clone())));
    }
    if let Kind::Scale(c, y) = b.kind() {
        return Some((Law::L6, a.kron(y).scale(c.clone())));
    }
    if let Kind::Add(x, y) = a.kind() {
        return Some((Law::L12, Term::plus(&x.kron(b), &y.kron(b))));
    }
    if let Kind::Add(x, y) = b.kind() {
        return Some((Law::L12, Term::plus(&a.kron(x), &a.kron(y))));
    }
    if let Kind::Kron(x, y) = a.kind() {
        return Some((Law::L2, x.kron(&y.kron(b))));
    }
    None
}

/// One step of pushing an adjoint toward the leaves.
pub(crate) fn dagger(t: &Term) -> Fired {
    let Kind::Dagger(x) = t.kind() else { return None };
    Some(match x.kind() {
        Kind::Scale(c, a) => (Law::L14, a.dagger().scale(c.conj())),
        Kind::MatMul(a, b) => (Law::L14, Term::mm(&b.dagger(), &a.dagger())),
        Kind::Add(a, b) => (Law::L15, Term::plus(&a.dagger(), &b.dagger())),
        Kind::Kron(a, b) => (Law::L15, a.dagger().kron(&b.dagger())),
        Kind::Dagger(a) => (Law::L16, a.clone()),
        Kind::Zero => (Law::Def, zero(t.dims())),
        Kind::Identity(_) => (Law::Def, x.clone()),
        Kind::Gate(g) => (Law::Def, g.body.dagger()),
        Kind::Ket0 | Kind::Ket1 => return None,
    })
}

/// Product rules keyed on the right operand.
pub(crate) fn mm_right(l: &Term, r: &Term) -> Fired {
    let d = Dims::new(l.dims().rows, r.dims().cols);
    match r.kind() {
        Kind::Zero => Some((Law::L7, zero(d))),
        Kind::Identity(_) => Some((Law::L8, l.clone())),
        Kind::Scale(c, x) => Some((Law::L5, Term::mm(l, x).scale(c.clone()))),
        Kind::Add(x, y) => Some((Law::L11, Term::plus(&Term::mm(l, x), &Term::mm(l, y)))),
        _ => None,
    }
}

/// Product rules keyed on the left operand (association included).
pub(crate) fn mm_left(l: &Term, r: &Term) -> Fired {
    let d = Dims::new(l.dims().rows, r.dims().cols);
    match l.kind() {
        Kind::Zero => Some((Law::L7, zero(d))),
        Kind::Identity(_) => Some((Law::L8, r.clone())),
        Kind::Scale(c, x) => Some((Law::L5, Term::mm(x, r).scale(c.clone()))),
        Kind::Add(x, y) => Some((Law::L11, Term::plus(&Term::mm(x, r), &Term::mm(y, r)))),
        Kind::MatMul(a, b) => Some((Law::L2, Term::mm(a, &Term::mm(b, r)))),
        _ => None,
    }
}

/// Inner product of basis vectors.
pub(crate) fn contract(l: &Term, r: &Term) -> Fired {
    let Kind::Dagger(k) = l.kind() else { return None };
    let a = match k.kind() {
        Kind::Ket0 => false,
        Kind::Ket1 => true,
        _ => return None,
    };
    let b = match r.kind() {
        Kind::Ket0 => false,
        Kind::Ket1 => true,
        _ => return None,
    };
    let delta = if a == b { Scalar::one() } else { Scalar::zero() };
    Some((Law::L1, Term::id(1).scale(delta)))
}

// ---------------------------------------------------------------------------
// Tensor alignment

/// Flattened tensor factors of a term.
pub(crate) fn factors(t: &Term) -> Vec<Term> {
    fn go(t: &Term, out: &mut Vec<Term>) {
        match t.kind() {
            Kind::Kron(a, b) => {
                go(a, out);
                go(b, out);
            }
            _ => out.push(t.clone()),
        }
    }
    let mut out = Vec::new();
    go(t, &mut out);
    out
}

/// Right-nested tensor of nonempty `fs`.
pub(crate) fn chain(fs: &[Term]) -> Term {
    let (last, rest) = fs.split_last().expect("nonempty factor list");
    rest.iter().rev().fold(last.clone(), |acc, f| f.kron(&acc))
}

/// How one side of a product is cut into two tensor factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Cut {
    /// After factor `i` of the flattened list.
    At(usize),
    /// `I(1) # t`.
    Front,
    /// `t # I(1)`.
    Back,
}

fn cuts(fs: &[Term], measure: impl Fn(&Term) -> u64) -> Vec<(u64, Cut)> {
    let mut out = Vec::new();
    let mut acc = 1u64;
    for (i, f) in fs.iter().enumerate().take(fs.len().saturating_sub(1)) {
        acc *= measure(f);
        out.push((acc, Cut::At(i)));
    }
    out
}

/// Smallest common cut of the left operand's columns and the right operand's
/// rows, at least one side being a genuine factor boundary.
pub(crate) fn common_cut(lf: &[Term], rf: &[Term], total: u64) -> Option<(Cut, Cut)> {
    let lc = cuts(lf, |f| f.dims().cols);
    let rc = cuts(rf, |f| f.dims().rows);
    let virt = |k: u64| -> Option<Cut> {
        if k == 1 {
            Some(Cut::Front)
        } else if k == total {
            Some(Cut::Back)
        } else {
            None
        }
    };
    let mut best: Option<(u64, u8, Cut, Cut)> = None;
    let mut consider = |k: u64, rank: u8, a: Cut, b: Cut| {
        if best.is_none_or(|(bk, br, _, _)| (k, rank) < (bk, br)) {
            best = Some((k, rank, a, b));
        }
    };
    for &(k, a) in &lc {
        if let Some(&(_, b)) = rc.iter().find(|(kk, _)| *kk == k) {
            consider(k, 0, a, b);
        } else if let Some(b) = virt(k) {
            consider(k, 1, a, b);
        }
    }
    for &(k, b) in &rc {
        if !lc.iter().any(|(kk, _)| *kk == k) {
            if let Some(a) = virt(k) {
                consider(k, 1, a, b);
            }
        }
    }
    best.map(|(_, _, a, b)| (a, b))
}

/// Splits a side according to `cut`; `orig` is the unflattened term.
pub(crate) fn split(orig: &Term, fs: &[Term], cut: Cut) -> (Term, Term) {
    match cut {
        Cut::Front => (Term::id(1), orig.clone()),
        Cut::Back => (orig.clone(), Term::id(1)),
        Cut::At(i) => {
            if let Kind::Kron(a, b) = orig.kind() {
                if factors(a).len() == i + 1 {
                    return (a.clone(), b.clone());
                }
            }
            // Reuse the tail of a right-nested spine.
            let mut tail = Some(orig.clone());
            for _ in 0..=i {
                tail = match tail.as_ref().map(|t| t.kind()) {
                    Some(Kind::Kron(a, b)) if !matches!(a.kind(), Kind::Kron(..)) => Some(b.clone()),
                    _ => None,
                };
            }
            let right = tail.unwrap_or_else(|| chain(&fs[i + 1..]));
            (chain(&fs[..=i]), right)
        }
    }
}

/// A straddling factor to refine: side (0 left, 1 right), factor index, and
/// the cut (relative to the factor's own extent) it must be split at.
pub(crate) struct Straddle {
    pub side: u8,
    pub index: usize,
    pub at: u64,
}

fn straddlers(fs: &[Term], measure: impl Fn(&Term) -> u64, other: &[(u64, Cut)], side: u8) -> Vec<Straddle> {
    let mut out = Vec::new();
    let mut lo = 1u64;
    for (i, f) in fs.iter().enumerate() {
        let hi = lo * measure(f);
        if let Some(&(k, _)) = other.iter().find(|(k, _)| *k > lo && *k < hi && k % lo == 0) {
            out.push(Straddle { side, index: i, at: k / lo });
        }
        lo = hi;
    }
    out
}

/// Factors on either side that cross a boundary of the other side.
pub(crate) fn find_straddlers(lf: &[Term], rf: &[Term]) -> Vec<Straddle> {
    let lc = cuts(lf, |f| f.dims().cols);
    let rc = cuts(rf, |f| f.dims().rows);
    let mut v = straddlers(lf, |f| f.dims().cols, &rc, 0);
    v.extend(straddlers(rf, |f| f.dims().rows, &lc, 1));
    v
}

/// Path from a right-nested tensor spine of `n` factors to factor `i`.
pub(crate) fn factor_path(n: usize, i: usize) -> Vec<u8> {
    let mut p = vec![1u8; i];
    if i + 1 < n {
        p.push(0);
    }
    p
}
