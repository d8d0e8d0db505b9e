//! Seeded random terms for property tests, law instances and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rewrite::Law;
use crate::scalar::Scalar;
use crate::term::{named, Term};

/// Atom names used by generated scalars.
pub const ATOMS: [&str; 3] = ["a", "b", "c"];

const GATES_1: [&str; 8] = ["X", "Y", "Z", "H", "B0", "B1", "B2", "B3"];
const GATES_2: [&str; 6] = ["CX", "XC", "SWAP", "CZ", "not_CX", "H_2"];
const GATES_3: [&str; 4] = ["TOF", "CXX", "CIX", "ORA1"];
const UNITARY_1: [&str; 4] = ["X", "Y", "Z", "H"];
const UNITARY_2: [&str; 4] = ["CX", "XC", "SWAP", "CZ"];

fn lib(name: &str) -> Term {
    named(name).expect("library entry")
}

/// Random term generator.
pub struct Gen {
    rng: ChaCha8Rng,
    /// Whether scalars may contain atoms.
    pub atoms: bool,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), atoms: false }
    }

    pub fn with_atoms(seed: u64) -> Gen {
        Gen { atoms: true, ..Gen::new(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Small exact scalar, possibly with atoms.
    pub fn scalar(&mut self) -> Scalar {
        let base = match self.below(7) {
            0 => Scalar::int(self.rng.gen_range(-3..=3)),
            1 => Scalar::rational(self.rng.gen_range(-3..=3), self.rng.gen_range(1..=4)),
            2 => Scalar::i(),
            3 => Scalar::inv_sqrt2(),
            4 => Scalar::sqrt2().mul(&Scalar::int(self.rng.gen_range(-2..=2))),
            5 => Scalar::i().neg(),
            _ => Scalar::one(),
        };
        if self.atoms && self.coin(0.4) {
            let a = Scalar::var(ATOMS[self.below(ATOMS.len())]);
            let a = if self.coin(0.3) { a.conj() } else { a };
            base.mul(&a)
        } else {
            base
        }
    }

    /// Nonzero scalar from a fixed list of unit-modulus values.
    pub fn phase(&mut self) -> Scalar {
        let h = Scalar::inv_sqrt2();
        match self.below(6) {
            0 => Scalar::one(),
            1 => Scalar::int(-1),
            2 => Scalar::i(),
            3 => Scalar::i().neg(),
            4 => h.add(&h.mul(&Scalar::i())),
            _ => h.sub(&h.mul(&Scalar::i())),
        }
    }

    fn bits(&mut self, n: u32) -> Vec<bool> {
        (0..n).map(|_| self.coin(0.5)).collect()
    }

    /// Computational basis ket on `n >= 1` qubits.
    pub fn basis_ket(&mut self, n: u32) -> Term {
        Term::kets(&self.bits(n))
    }

    /// A leaf of shape `2^rq x 2^cq`.
    fn leaf(&mut self, rq: u32, cq: u32) -> Term {
        match (rq, cq) {
            (0, 0) => Term::id(1).scale(self.scalar()),
            (1, 1) if self.coin(0.8) => {
                if self.coin(0.2) {
                    Term::id(2)
                } else {
                    lib(GATES_1[self.below(GATES_1.len())])
                }
            }
            (2, 2) if self.coin(0.6) => lib(GATES_2[self.below(GATES_2.len())]),
            (3, 3) if self.coin(0.5) => lib(GATES_3[self.below(GATES_3.len())]),
            (1, 0) if self.coin(0.3) => lib(["ket_plus", "ket_minus"][self.below(2)]),
            (2, 0) if self.coin(0.3) => lib(["bell00", "bell01", "bell10", "bell11"][self.below(4)]),
            _ if rq == cq && self.coin(0.15) => Term::id(1 << rq),
            _ if self.coin(0.05) => Term::zero(1 << rq, 1 << cq).expect("positive dims"),
            _ => {
                let k = (rq > 0).then(|| self.basis_ket(rq));
                let b = (cq > 0).then(|| self.basis_ket(cq).dagger());
                match (k, b) {
                    (Some(k), Some(b)) => Term::mm(&k, &b),
                    (Some(k), None) => k,
                    (None, Some(b)) => b,
                    (None, None) => unreachable!(),
                }
            }
        }
    }

    /// Random term of shape `2^rq x 2^cq`, at most `depth` constructors deep.
    pub fn term(&mut self, rq: u32, cq: u32, depth: u32) -> Term {
        if depth == 0 || self.coin(0.2) {
            return self.leaf(rq, cq);
        }
        let d = depth - 1;
        match self.below(6) {
            0 => self.term(rq, cq, d).scale(self.scalar()),
            1 => Term::plus(&self.term(rq, cq, d), &self.term(rq, cq, d)),
            2 => {
                let k = self.rng.gen_range(0..=rq.max(cq).clamp(1, 3));
                Term::mm(&self.term(rq, k, d), &self.term(k, cq, d))
            }
            3 if rq + cq >= 2 => {
                let r1 = self.rng.gen_range(0..=rq);
                let c1 = self.rng.gen_range(0..=cq);
                if (r1, c1) == (0, 0) || (r1, c1) == (rq, cq) {
                    return self.term(rq, cq, d);
                }
                self.term(r1, c1, d).kron(&self.term(rq - r1, cq - c1, d))
            }
            4 => self.term(cq, rq, d).dagger(),
            _ => self.leaf(rq, cq),
        }
    }

    /// Random term of at most one qubit per side.
    pub fn small(&mut self, depth: u32) -> Term {
        let (r, c) = (self.below(2) as u32, self.below(2) as u32);
        self.term(r, c, depth)
    }

    /// Random operator on `q` qubits.
    pub fn operator(&mut self, q: u32, depth: u32) -> Term {
        self.term(q, q, depth)
    }

    /// Random vector on `q` qubits.
    pub fn vector(&mut self, q: u32, depth: u32) -> Term {
        self.term(q, 0, depth)
    }

    /// One layer of library unitaries covering `q` qubits.
    pub fn layer(&mut self, q: u32) -> Term {
        let mut parts = Vec::new();
        let mut left = q;
        while left > 0 {
            let g = if left >= 2 && self.coin(0.35) {
                left -= 2;
                lib(UNITARY_2[self.below(UNITARY_2.len())])
            } else {
                left -= 1;
                if self.coin(0.25) {
                    Term::id(2)
                } else {
                    lib(UNITARY_1[self.below(UNITARY_1.len())])
                }
            };
            parts.push(g);
        }
        let last = parts.pop().expect("q >= 1");
        parts.iter().rev().fold(last, |acc, g| g.kron(&acc))
    }

    /// Product of `layers` random layers on `q` qubits.
    pub fn unitary(&mut self, q: u32, layers: usize) -> Term {
        let mut u = self.layer(q);
        for _ in 1..layers {
            u = Term::mm(&self.layer(q), &u);
        }
        u
    }

    /// Random circuit applied to a basis state; a unit vector.
    pub fn state(&mut self, q: u32, layers: usize) -> Term {
        Term::mm(&self.unitary(q, layers), &self.basis_ket(q))
    }

    /// Qubit counts `(rq, cq)` for a random shape with dims at most 8.
    pub fn shape(&mut self) -> (u32, u32) {
        (self.rng.gen_range(0..=3), self.rng.gen_range(0..=3))
    }

    pub fn shuffle<T>(&mut self, v: &mut [T]) {
        v.shuffle(&mut self.rng);
    }
}

/// Both sides of one random instance of `law`. `depth` bounds the metavariables.
pub fn law_instance(law: Law, g: &mut Gen, depth: u32) -> (Term, Term) {
    let (rq, cq) = g.shape();
    // Shapes for laws that tensor on one more qubit.
    let (sr, sc) = (rq.min(2), cq.min(2));
    match law {
        Law::L1 => {
            let (a, b) = (g.coin(0.5), g.coin(0.5));
            let c = if a == b { Scalar::one() } else { Scalar::zero() };
            (Term::mm(&Term::bra(a), &Term::ket(b)), Term::id(1).scale(c))
        }
        Law::L2 => {
            let a = g.term(rq, cq, depth);
            match g.below(4) {
                0 => {
                    let (c, d) = (g.scalar(), g.scalar());
                    (a.scale(d.clone()).scale(c.clone()), a.scale(c.mul(&d)))
                }
                1 => {
                    let k = g.below(3) as u32;
                    let b = g.term(cq, k, depth);
                    let k2 = g.below(3) as u32;
                    let c = g.term(k, k2, depth);
                    (Term::mm(&Term::mm(&a, &b), &c), Term::mm(&a, &Term::mm(&b, &c)))
                }
                2 => {
                    let (b, c) = (g.term(rq, cq, depth), g.term(rq, cq, depth));
                    (Term::plus(&Term::plus(&a, &b), &c), Term::plus(&a, &Term::plus(&b, &c)))
                }
                _ => {
                    let a = g.term(sr, sc, depth);
                    let (b, c) = (g.term(1, 0, depth), g.term(0, 1, depth));
                    (a.kron(&b).kron(&c), a.kron(&b.kron(&c)))
                }
            }
        }
        Law::L3 => {
            let a = g.term(rq, cq, depth);
            let z = Term::zero(a.dims().rows, a.dims().cols).expect("positive dims");
            match g.below(3) {
                0 => (a.scale(Scalar::zero()), z),
                1 => (z.scale(g.scalar()), z),
                _ => (a.scale(Scalar::one()), a),
            }
        }
        Law::L4 => {
            let (a, b, c) = (g.term(rq, cq, depth), g.term(rq, cq, depth), g.scalar());
            (Term::plus(&a, &b).scale(c.clone()), Term::plus(&a.scale(c.clone()), &b.scale(c)))
        }
        Law::L5 => {
            let k = g.below(4) as u32;
            let (a, b, c) = (g.term(rq, k, depth), g.term(k, cq, depth), g.scalar());
            let lhs = Term::mm(&a, &b).scale(c.clone());
            if g.coin(0.5) {
                (lhs, Term::mm(&a.scale(c), &b))
            } else {
                (lhs, Term::mm(&a, &b.scale(c)))
            }
        }
        Law::L6 => {
            let (a, b, c) = (g.term(sr, sc, depth), g.small(depth), g.scalar());
            let lhs = a.kron(&b).scale(c.clone());
            if g.coin(0.5) {
                (lhs, a.scale(c).kron(&b))
            } else {
                (lhs, a.kron(&b.scale(c)))
            }
        }
        Law::L7 => {
            let k = g.below(4) as u32;
            if g.coin(0.5) {
                let a = g.term(k, cq, depth);
                let z = Term::zero(1 << rq, 1 << k).expect("positive dims");
                (Term::mm(&z, &a), Term::zero(1 << rq, 1 << cq).expect("positive dims"))
            } else {
                let a = g.term(rq, k, depth);
                let z = Term::zero(1 << k, 1 << cq).expect("positive dims");
                (Term::mm(&a, &z), Term::zero(1 << rq, 1 << cq).expect("positive dims"))
            }
        }
        Law::L8 => {
            let a = g.term(rq, cq, depth);
            match g.below(3) {
                0 => (Term::mm(&Term::id(1 << rq), &a), a),
                1 => (Term::mm(&a, &Term::id(1 << cq)), a),
                _ => {
                    let e = g.below(4);
                    let a = g.below(e + 1);
                    let (m, n) = (1u64 << a, 1u64 << (e - a));
                    (Term::id(m).kron(&Term::id(n)), Term::id(m * n))
                }
            }
        }
        Law::L9 => {
            let a = g.term(rq, cq, depth);
            let z = Term::zero(a.dims().rows, a.dims().cols).expect("positive dims");
            if g.coin(0.5) {
                (Term::plus(&z, &a), a)
            } else {
                (Term::plus(&a, &z), a)
            }
        }
        Law::L10 => {
            let a = g.small(depth);
            let (zr, zc) = (1u64 << g.below(2), 1u64 << g.below(2));
            let z = Term::zero(zr, zc).expect("positive dims");
            let (ar, ac) = (a.dims().rows, a.dims().cols);
            let out = Term::zero(zr * ar, zc * ac).expect("positive dims");
            if g.coin(0.5) {
                (z.kron(&a), out)
            } else {
                (a.kron(&z), out)
            }
        }
        Law::L11 => {
            let k = g.below(4) as u32;
            if g.coin(0.5) {
                let (a, b, c) = (g.term(rq, k, depth), g.term(rq, k, depth), g.term(k, cq, depth));
                (Term::mm(&Term::plus(&a, &b), &c), Term::plus(&Term::mm(&a, &c), &Term::mm(&b, &c)))
            } else {
                let (c, a, b) = (g.term(rq, k, depth), g.term(k, cq, depth), g.term(k, cq, depth));
                (Term::mm(&c, &Term::plus(&a, &b)), Term::plus(&Term::mm(&c, &a), &Term::mm(&c, &b)))
            }
        }
        Law::L12 => {
            let (a, b) = (g.term(sr, sc, depth), g.term(sr, sc, depth));
            let c = g.small(depth);
            if g.coin(0.5) {
                (Term::plus(&a, &b).kron(&c), Term::plus(&a.kron(&c), &b.kron(&c)))
            } else {
                (c.kron(&Term::plus(&a, &b)), Term::plus(&c.kron(&a), &c.kron(&b)))
            }
        }
        Law::L13 => {
            let (ar, ak, ac) = (g.below(2) as u32, g.below(2) as u32, g.below(2) as u32);
            let (br, bk, bc) = (g.below(2) as u32, g.below(2) as u32, g.below(2) as u32);
            let (a, c) = (g.term(ar, ak, depth), g.term(ak, ac, depth));
            let (b, d) = (g.term(br, bk, depth), g.term(bk, bc, depth));
            (Term::mm(&a.kron(&b), &c.kron(&d)), Term::mm(&a, &c).kron(&Term::mm(&b, &d)))
        }
        Law::L14 => {
            if g.coin(0.5) {
                let (a, c) = (g.term(rq, cq, depth), g.scalar());
                (a.scale(c.clone()).dagger(), a.dagger().scale(c.conj()))
            } else {
                let k = g.below(4) as u32;
                let (a, b) = (g.term(rq, k, depth), g.term(k, cq, depth));
                (Term::mm(&a, &b).dagger(), Term::mm(&b.dagger(), &a.dagger()))
            }
        }
        Law::L15 => {
            if g.coin(0.5) {
                let (a, b) = (g.term(rq, cq, depth), g.term(rq, cq, depth));
                (Term::plus(&a, &b).dagger(), Term::plus(&a.dagger(), &b.dagger()))
            } else {
                let (a, b) = (g.term(sr, sc, depth), g.small(depth));
                (a.kron(&b).dagger(), a.dagger().kron(&b.dagger()))
            }
        }
        Law::L16 => {
            let a = g.term(rq, cq, depth);
            (a.dagger().dagger(), a)
        }
        Law::BDb | Law::GDb | Law::Def => {
            let a = g.term(rq, cq, depth);
            (a.clone(), a)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_determinism() {
        let mut g = Gen::with_atoms(7);
        let mut h = Gen::with_atoms(7);
        for _ in 0..100 {
            let (rq, cq) = g.shape();
            let _ = h.shape();
            let t = g.term(rq, cq, 4);
            let u = h.term(rq, cq, 4);
            assert_eq!(t, u);
            assert_eq!((t.dims().rows, t.dims().cols), (1 << rq, 1 << cq));
            assert!(t.dims_consistent());
        }
        for law in Law::TABLE {
            for _ in 0..50 {
                let (l, _) = law_instance(law, &mut g, 3);
                assert!(l.dims().rows <= 8 && l.dims().cols <= 8, "{law}");
            }
        }
    }

    #[test]
    fn law_instances_have_matching_dims() {
        let mut g = Gen::with_atoms(1);
        for law in Law::TABLE {
            for _ in 0..20 {
                let (l, r) = law_instance(law, &mut g, 2);
                assert_eq!(l.dims(), r.dims(), "{law}");
                assert!(l.dims_consistent() && r.dims_consistent());
            }
        }
    }
}
