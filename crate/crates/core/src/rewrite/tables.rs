//! Derived rewrite tables: `B_db` (basis operators) and `G_db` (gates applied
//! to products of the four standard states). Single-qubit `G_db` entries are
//! listed; multi-qubit entries are derived on first use and memoized.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::scalar::Scalar;
use crate::term::{named, Kind, Term};

use super::Law;

/// One of the four states the tables range over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum State {
    Zero,
    One,
    Plus,
    Minus,
}

pub const STATES: [State; 4] = [State::Zero, State::One, State::Plus, State::Minus];

impl State {
    pub fn of(t: &Term) -> Option<State> {
        match t.kind() {
            Kind::Ket0 => Some(State::Zero),
            Kind::Ket1 => Some(State::One),
            Kind::Gate(g) if g.name == "ket_plus" => Some(State::Plus),
            Kind::Gate(g) if g.name == "ket_minus" => Some(State::Minus),
            _ => None,
        }
    }

    pub fn term(self) -> Term {
        match self {
            State::Zero => Term::ket0(),
            State::One => Term::ket1(),
            State::Plus => named("ket_plus").expect("library"),
            State::Minus => named("ket_minus").expect("library"),
        }
    }
}

fn scaled(c: Scalar, s: State) -> Term {
    s.term().scale(c)
}

fn neg(s: State) -> Term {
    scaled(Scalar::int(-1), s)
}

/// `G_db`: gate in {X, Y, Z, H} times a standard state.
pub fn g_db(gate: &str, s: State) -> Option<Term> {
    use State::*;
    let i = Scalar::i;
    Some(match (gate, s) {
        ("X", Zero) => One.term(),
        ("X", One) => Zero.term(),
        ("X", Plus) => Plus.term(),
        ("X", Minus) => neg(Minus),
        ("Y", Zero) => scaled(i(), One),
        ("Y", One) => scaled(i().neg(), Zero),
        ("Y", Plus) => scaled(i().neg(), Minus),
        ("Y", Minus) => scaled(i(), Plus),
        ("Z", Zero) => Zero.term(),
        ("Z", One) => neg(One),
        ("Z", Plus) => Minus.term(),
        ("Z", Minus) => Plus.term(),
        ("H", Zero) => Plus.term(),
        ("H", One) => Minus.term(),
        ("H", Plus) => Zero.term(),
        ("H", Minus) => One.term(),
        _ => return None,
    })
}

fn b_index(name: &str) -> Option<u8> {
    match name {
        "B0" => Some(0),
        "B1" => Some(1),
        "B2" => Some(2),
        "B3" => Some(3),
        _ => None,
    }
}

/// `B_db`: `B_j` times a standard state or another `B_k`.
pub fn b_db(j: u8, r: &Term) -> Option<Term> {
    let (row, col) = (j >> 1, j & 1);
    let ket = |b: u8| if b == 0 { State::Zero } else { State::One };
    if let Some(s) = State::of(r) {
        let h = Scalar::inv_sqrt2();
        return Some(match s {
            State::Zero | State::One => {
                let b = u8::from(s == State::One);
                if b == col {
                    ket(row).term()
                } else {
                    Term::zero_of(r.dims())
                }
            }
            State::Plus => scaled(h, ket(row)),
            State::Minus => {
                let c = if col == 0 { h } else { h.neg() };
                scaled(c, ket(row))
            }
        });
    }
    if let Kind::Gate(g) = r.kind() {
        let k = b_index(&g.name)?;
        let (row2, col2) = (k >> 1, k & 1);
        return Some(if col == row2 {
            named(["B0", "B1", "B2", "B3"][(row * 2 + col2) as usize]).expect("library")
        } else {
            Term::zero_of(r.dims())
        });
    }
    None
}

/// Looks up `l * r` in the derived tables.
pub fn lookup(l: &Term, r: &Term) -> Option<(Law, Term)> {
    let Kind::Gate(g) = l.kind() else { return None };
    if let Some(j) = b_index(&g.name) {
        return b_db(j, r).map(|t| (Law::BDb, t));
    }
    let s = State::of(r)?;
    g_db(&g.name, s).map(|t| (Law::GDb, t))
}

/// Largest gate, in qubits, covered by the product-state table.
pub const PRODUCT_TABLE_QUBITS: usize = 4;

/// Standard states of a tensor chain of single-qubit states.
pub fn product_states(t: &Term) -> Option<Vec<State>> {
    fn go(t: &Term, out: &mut Vec<State>) -> Option<()> {
        match t.kind() {
            Kind::Kron(a, b) => {
                go(a, out)?;
                go(b, out)
            }
            _ => {
                out.push(State::of(t)?);
                Some(())
            }
        }
    }
    let mut out = Vec::new();
    go(t, &mut out)?;
    Some(out)
}

type ProductKey = (String, Vec<State>);

fn product_table() -> &'static Mutex<HashMap<ProductKey, Term>> {
    static TABLE: OnceLock<Mutex<HashMap<ProductKey, Term>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `G_db` for a library gate of two or more qubits applied to a product of
/// standard states. `derive` computes a missing entry from the definition.
pub fn product_lookup(l: &Term, r: &Term, derive: impl FnOnce() -> Option<Term>) -> Option<Term> {
    let Kind::Gate(g) = l.kind() else { return None };
    if !l.dims().is_square() || b_index(&g.name).is_some() {
        return None;
    }
    let states = product_states(r)?;
    if states.len() < 2 || states.len() > PRODUCT_TABLE_QUBITS || 1u64 << states.len() != l.dims().cols {
        return None;
    }
    let key = (g.label(), states);
    if let Some(t) = product_table().lock().expect("table lock").get(&key) {
        return Some(t.clone());
    }
    let t = collect(&derive()?);
    product_table().lock().expect("table lock").entry(key).or_insert(t).clone().into()
}

/// Merges summands that differ only in their scalar; drops zero summands.
fn collect(t: &Term) -> Term {
    fn go(t: &Term, out: &mut Vec<(Scalar, Term)>) {
        match t.kind() {
            Kind::Add(a, b) => {
                go(a, out);
                go(b, out);
            }
            Kind::Zero => {}
            Kind::Scale(c, x) => push(out, c.clone(), x),
            _ => push(out, Scalar::one(), t),
        }
    }
    fn push(out: &mut Vec<(Scalar, Term)>, c: Scalar, x: &Term) {
        match out.iter_mut().find(|(_, y)| y == x) {
            Some((d, _)) => *d = d.add(&c),
            None => out.push((c, x.clone())),
        }
    }
    let mut parts = Vec::new();
    go(t, &mut parts);
    let terms: Vec<Term> = parts
        .into_iter()
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, x)| if c.is_one() { x } else { x.scale(c) })
        .collect();
    match terms.split_last() {
        None => Term::zero_of(t.dims()),
        Some((last, rest)) => rest.iter().rev().fold(last.clone(), |acc, x| Term::plus(x, &acc)),
    }
}
