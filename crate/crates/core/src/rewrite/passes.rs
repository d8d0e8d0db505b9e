//! Standalone strategy passes, each a bottom-up fixpoint over a rule subset.
//! Gate definitions are treated as opaque leaves.

use crate::term::{Kind, Term};

use super::rules::{self, Cut};
use super::{tables, EngineConfig, Law};

fn bottom_up(t: &Term, rule: &dyn Fn(&Term) -> Option<Term>) -> Term {
    let old: Vec<&Term> = t.children();
    let new: Vec<Term> = old.iter().map(|c| bottom_up(c, rule)).collect();
    let mut cur = if old.iter().zip(&new).all(|(a, b)| a.ptr_eq(b)) { t.clone() } else { t.with_children(&new) };
    while let Some(next) = rule(&cur) {
        cur = bottom_up(&next, rule);
    }
    cur
}

fn only(f: rules::Fired, laws: &[Law]) -> Option<Term> {
    f.filter(|(l, _)| laws.contains(l)).map(|(_, t)| t)
}

fn operands(t: &Term) -> Option<(&Term, &Term)> {
    match t.kind() {
        Kind::MatMul(l, r) => Some((l, r)),
        _ => None,
    }
}

/// Replaces every `<b| * |b'>` with `delta(b, b') .* I(1)`.
pub fn contract_inner(t: &Term) -> Term {
    bottom_up(t, &|t| operands(t).and_then(|(l, r)| rules::contract(l, r)).map(|(_, t)| t))
}

fn is_state_or_basis(t: &Term) -> bool {
    tables::State::of(t).is_some()
        || matches!(t.kind(), Kind::Gate(g) if matches!(g.name.as_str(), "B0" | "B1" | "B2" | "B3"))
}

/// Reduces `B_j * state` and `B_j * B_k` by expanding `B_j` and contracting.
pub fn base_reduce(t: &Term) -> Term {
    bottom_up(t, &|t| {
        let (l, r) = operands(t)?;
        match l.kind() {
            Kind::Gate(g) if matches!(g.name.as_str(), "B0" | "B1" | "B2" | "B3") && is_state_or_basis(r) => {
                let cfg = EngineConfig { tables: false, ..EngineConfig::default() };
                super::Engine::new(cfg).normalize(t).ok()
            }
            _ => None,
        }
    })
}

/// Single-qubit gates on standard states by table lookup; `I * s = s`.
pub fn gate_reduce(t: &Term) -> Term {
    bottom_up(t, &|t| {
        let (l, r) = operands(t)?;
        tables::State::of(r)?;
        match l.kind() {
            Kind::Identity(_) => Some(r.clone()),
            Kind::Gate(g) => tables::g_db(&g.name, tables::State::of(r)?),
            _ => None,
        }
    })
}

/// Right-associates products and tensors.
pub fn assoc_right(t: &Term) -> Term {
    bottom_up(t, &|t| match t.kind() {
        Kind::MatMul(ab, c) => match ab.kind() {
            Kind::MatMul(a, b) => Some(Term::mm(a, &Term::mm(b, c))),
            _ => None,
        },
        Kind::Kron(ab, c) => match ab.kind() {
            Kind::Kron(a, b) => Some(a.kron(&b.kron(c))),
            _ => None,
        },
        _ => None,
    })
}

/// `(A # B) * (C # D) -> (A * C) # (B * D)` at the smallest common factor
/// boundary; products without one are left untouched.
pub fn mult_kron(t: &Term) -> Term {
    bottom_up(t, &|t| {
        let (l, r) = operands(t)?;
        if !matches!(l.kind(), Kind::Kron(..)) || !matches!(r.kind(), Kind::Kron(..)) {
            return None;
        }
        let lf = rules::factors(l);
        let rf = rules::factors(r);
        let (lc, rc) = rules::common_cut(&lf, &rf, l.dims().cols)?;
        if !matches!((lc, rc), (Cut::At(_), Cut::At(_))) {
            return None;
        }
        let (a, b) = rules::split(l, &lf, lc);
        let (c, d) = rules::split(r, &rf, rc);
        Some(Term::mm(&a, &c).kron(&Term::mm(&b, &d)))
    })
}

/// Distributes products and tensors over sums and pulls scalars outward.
pub fn distribute(t: &Term) -> Term {
    bottom_up(t, &|t| match t.kind() {
        Kind::MatMul(l, r) => only(rules::mm_right(l, r), &[Law::L5, Law::L11])
            .or_else(|| only(rules::mm_left(l, r), &[Law::L5, Law::L11])),
        Kind::Kron(..) => only(rules::kron(t), &[Law::L6, Law::L12]),
        Kind::Scale(..) => only(rules::scale(t), &[Law::L4]),
        _ => None,
    })
}

/// Zero absorption and elimination, unit scalars and identity absorption.
pub fn cancel_zero(t: &Term) -> Term {
    bottom_up(t, &|t| match t.kind() {
        Kind::MatMul(l, r) => only(rules::mm_right(l, r), &[Law::L7, Law::L8])
            .or_else(|| only(rules::mm_left(l, r), &[Law::L7, Law::L8])),
        Kind::Kron(..) => only(rules::kron(t), &[Law::L10]),
        Kind::Add(..) => only(rules::add(t), &[Law::L9]),
        Kind::Scale(..) => only(rules::scale(t), &[Law::L3]),
        _ => None,
    })
}

/// Pushes adjoints to the leaves; gates stay opaque.
pub fn dagger_push(t: &Term) -> Term {
    bottom_up(t, &|t| match t.kind() {
        Kind::Dagger(x) if matches!(x.kind(), Kind::Gate(_)) => None,
        _ => rules::dagger(t).map(|(_, t)| t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;
    use crate::term::named;

    fn g(n: &str) -> Term {
        named(n).unwrap()
    }

    #[test]
    fn contraction() {
        let t = Term::bra(false).matmul(&Term::ket0()).unwrap();
        assert_eq!(contract_inner(&t), Term::id(1).scale(Scalar::one()));
        let t = Term::bra(true).matmul(&Term::ket0()).unwrap();
        assert_eq!(contract_inner(&t), Term::id(1).scale(Scalar::zero()));
    }

    #[test]
    fn base_products() {
        let t = g("B0").matmul(&Term::ket0()).unwrap();
        assert_eq!(base_reduce(&t), Term::ket0());
        let t = g("B1").matmul(&Term::ket0()).unwrap();
        assert_eq!(base_reduce(&t), Term::zero(2, 1).unwrap());
        let t = g("B3").matmul(&Term::ket1()).unwrap();
        assert_eq!(base_reduce(&t), Term::ket1());
    }

    #[test]
    fn gate_lookup() {
        assert_eq!(gate_reduce(&g("X").matmul(&Term::ket0()).unwrap()), Term::ket1());
        assert_eq!(gate_reduce(&g("H").matmul(&g("ket_plus")).unwrap()), Term::ket0());
        assert_eq!(gate_reduce(&Term::id(2).matmul(&Term::ket1()).unwrap()), Term::ket1());
    }

    #[test]
    fn association_and_tensor_products() {
        let (a, b, c) = (g("X"), g("Y"), g("Z"));
        let t = a.matmul(&b).unwrap().matmul(&c).unwrap();
        assert_eq!(assoc_right(&t), Term::mm(&a, &Term::mm(&b, &c)));
        let i2 = Term::id(2);
        let k = Term::ket0();
        let t = g("H").kron(&i2.kron(&i2)).matmul(&k.kron(&k.kron(&k))).unwrap();
        let want = Term::mm(&g("H"), &k).kron(&Term::mm(&i2, &k).kron(&Term::mm(&i2, &k)));
        assert_eq!(mult_kron(&t), want);
        let t = g("H").kron(&i2).matmul(&g("CX")).unwrap();
        assert_eq!(mult_kron(&t), t);
    }

    #[test]
    fn distribution_zero_and_dagger() {
        let t = g("B1").add(&g("B2")).unwrap().matmul(&Term::ket0()).unwrap();
        let want = Term::plus(&Term::mm(&g("B1"), &Term::ket0()), &Term::mm(&g("B2"), &Term::ket0()));
        assert_eq!(distribute(&t), want);
        let z = Term::zero(2, 2).unwrap();
        assert_eq!(cancel_zero(&z.matmul(&g("H")).unwrap()), z);
        assert_eq!(cancel_zero(&g("X").scale(Scalar::zero())), z);
        let x = g("X");
        assert_eq!(dagger_push(&x.dagger().dagger()), x);
        let t = g("X").matmul(&g("Y")).unwrap().dagger();
        assert_eq!(dagger_push(&t), Term::mm(&g("Y").dagger(), &g("X").dagger()));
    }
}
