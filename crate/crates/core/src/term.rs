//! Dimension-annotated Dirac terms and the named gate library.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, OnceLock};

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Dims {
    pub rows: u64,
    pub cols: u64,
}

impl Dims {
    pub const fn new(rows: u64, cols: u64) -> Dims {
        Dims { rows, cols }
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
    pub fn transpose(&self) -> Dims {
        Dims::new(self.cols, self.rows)
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// `log2(n)` when `n` is a power of two.
pub fn log2_exact(n: u64) -> Option<u32> {
    n.is_power_of_two().then(|| n.trailing_zeros())
}

/// A named library definition. The body is closed; parameters are already
/// substituted and kept only for display.
#[derive(Debug)]
pub struct GateDef {
    pub name: String,
    pub args: Vec<String>,
    pub body: Term,
}

impl GateDef {
    pub fn label(&self) -> String {
        if self.args.is_empty() {
            self.name.clone()
        } else {
            format!("{}({})", self.name, self.args.join(","))
        }
    }
}

impl PartialEq for GateDef {
    fn eq(&self, o: &GateDef) -> bool {
        self.name == o.name && self.args == o.args
    }
}
impl Eq for GateDef {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Kind {
    Ket0,
    Ket1,
    Zero,
    Identity(u64),
    Scale(Scalar, Term),
    MatMul(Term, Term),
    Add(Term, Term),
    Kron(Term, Term),
    Dagger(Term),
    Gate(Arc<GateDef>),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    dims: Dims,
    normal: AtomicBool,
}

/// Immutable, shareable term with cached dimensions.
#[derive(Clone, Debug)]
pub struct Term(Arc<Node>);

impl PartialEq for Term {
    fn eq(&self, o: &Term) -> bool {
        Arc::ptr_eq(&self.0, &o.0) || (self.0.dims == o.0.dims && self.0.kind == o.0.kind)
    }
}
impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.0.dims.hash(h);
        std::mem::discriminant(&self.0.kind).hash(h);
        match &self.0.kind {
            Kind::Ket0 | Kind::Ket1 | Kind::Zero => {}
            Kind::Identity(n) => n.hash(h),
            Kind::Scale(c, t) => {
                c.hash(h);
                t.hash(h)
            }
            Kind::MatMul(a, b) | Kind::Add(a, b) | Kind::Kron(a, b) => {
                a.hash(h);
                b.hash(h)
            }
            Kind::Dagger(t) => t.hash(h),
            Kind::Gate(g) => {
                g.name.hash(h);
                g.args.hash(h)
            }
        }
    }
}

fn mismatch(op: &'static str, expected: Dims, got: Dims) -> Error {
    Error::DimMismatch { op, expected, got, pos: None }
}

impl Term {
    /// Builds a node whose dims the caller has already validated.
    pub(crate) fn mk(kind: Kind, dims: Dims) -> Term {
        Term(Arc::new(Node { kind, dims, normal: AtomicBool::new(false) }))
    }

    /// Set once the rewrite engine has proved no rule applies anywhere below.
    pub(crate) fn is_normal(&self) -> bool {
        self.0.normal.load(Ordering::Relaxed)
    }

    pub(crate) fn mark_normal(&self) {
        self.0.normal.store(true, Ordering::Relaxed)
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn dims(&self) -> Dims {
        self.0.dims
    }

    pub fn ptr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn ptr_eq(&self, o: &Term) -> bool {
        Arc::ptr_eq(&self.0, &o.0)
    }

    pub fn ket0() -> Term {
        Term::mk(Kind::Ket0, Dims::new(2, 1))
    }

    pub fn ket1() -> Term {
        Term::mk(Kind::Ket1, Dims::new(2, 1))
    }

    pub fn ket(b: bool) -> Term {
        if b {
            Term::ket1()
        } else {
            Term::ket0()
        }
    }

    pub fn bra(b: bool) -> Term {
        Term::ket(b).dagger()
    }

    /// Left-nested tensor of basis kets, `|b0,b1,...>`.
    pub fn kets(bits: &[bool]) -> Term {
        let mut it = bits.iter();
        let mut t = Term::ket(*it.next().expect("at least one qubit"));
        for b in it {
            t = t.kron(&Term::ket(*b));
        }
        t
    }

    pub fn zero(rows: u64, cols: u64) -> Result<Term> {
        if rows == 0 || cols == 0 {
            return Err(Error::Input(format!("zero matrix needs positive dims, got {rows}x{cols}")));
        }
        Ok(Term::mk(Kind::Zero, Dims::new(rows, cols)))
    }

    pub(crate) fn zero_of(d: Dims) -> Term {
        Term::mk(Kind::Zero, d)
    }

    pub fn identity(n: u64) -> Result<Term> {
        if n == 0 {
            return Err(Error::Input("identity needs a positive size".into()));
        }
        Ok(Term::mk(Kind::Identity(n), Dims::new(n, n)))
    }

    pub(crate) fn id(n: u64) -> Term {
        Term::mk(Kind::Identity(n), Dims::new(n, n))
    }

    pub fn scale(&self, c: Scalar) -> Term {
        Term::mk(Kind::Scale(c, self.clone()), self.dims())
    }

    pub fn matmul(&self, b: &Term) -> Result<Term> {
        let (da, db) = (self.dims(), b.dims());
        if da.cols != db.rows {
            return Err(mismatch("*", Dims::new(da.cols, db.cols), db));
        }
        Ok(Term::mk(Kind::MatMul(self.clone(), b.clone()), Dims::new(da.rows, db.cols)))
    }

    pub fn add(&self, b: &Term) -> Result<Term> {
        if self.dims() != b.dims() {
            return Err(mismatch("+", self.dims(), b.dims()));
        }
        Ok(Term::mk(Kind::Add(self.clone(), b.clone()), self.dims()))
    }

    pub fn kron(&self, b: &Term) -> Term {
        let (da, db) = (self.dims(), b.dims());
        Term::mk(Kind::Kron(self.clone(), b.clone()), Dims::new(da.rows * db.rows, da.cols * db.cols))
    }

    pub fn dagger(&self) -> Term {
        Term::mk(Kind::Dagger(self.clone()), self.dims().transpose())
    }

    pub fn gate(def: Arc<GateDef>) -> Term {
        let d = def.body.dims();
        Term::mk(Kind::Gate(def), d)
    }

    /// Unchecked constructors for internal rewriting where dims are known.
    pub(crate) fn mm(a: &Term, b: &Term) -> Term {
        debug_assert_eq!(a.dims().cols, b.dims().rows);
        Term::mk(Kind::MatMul(a.clone(), b.clone()), Dims::new(a.dims().rows, b.dims().cols))
    }

    pub(crate) fn plus(a: &Term, b: &Term) -> Term {
        debug_assert_eq!(a.dims(), b.dims());
        Term::mk(Kind::Add(a.clone(), b.clone()), a.dims())
    }

    pub fn children(&self) -> Vec<&Term> {
        match self.kind() {
            Kind::Scale(_, t) | Kind::Dagger(t) => vec![t],
            Kind::MatMul(a, b) | Kind::Add(a, b) | Kind::Kron(a, b) => vec![a, b],
            _ => vec![],
        }
    }

    /// Rebuilds this node with new children (same arity, same dims).
    pub fn with_children(&self, ch: &[Term]) -> Term {
        let kind = match self.kind() {
            Kind::Scale(c, _) => Kind::Scale(c.clone(), ch[0].clone()),
            Kind::Dagger(_) => Kind::Dagger(ch[0].clone()),
            Kind::MatMul(..) => Kind::MatMul(ch[0].clone(), ch[1].clone()),
            Kind::Add(..) => Kind::Add(ch[0].clone(), ch[1].clone()),
            Kind::Kron(..) => Kind::Kron(ch[0].clone(), ch[1].clone()),
            _ => return self.clone(),
        };
        let dims = match &kind {
            Kind::MatMul(a, b) => Dims::new(a.dims().rows, b.dims().cols),
            Kind::Kron(a, b) => Dims::new(a.dims().rows * b.dims().rows, a.dims().cols * b.dims().cols),
            Kind::Dagger(t) => t.dims().transpose(),
            _ => ch[0].dims(),
        };
        Term::mk(kind, dims)
    }

    pub fn at_path(&self, path: &[u8]) -> Option<Term> {
        let mut cur = self.clone();
        for &i in path {
            let next = cur.children().get(i as usize).map(|t| (*t).clone())?;
            cur = next;
        }
        Some(cur)
    }

    pub fn replace_at(&self, path: &[u8], new: &Term) -> Option<Term> {
        match path.split_first() {
            None => Some(new.clone()),
            Some((&i, rest)) => {
                let mut ch: Vec<Term> = self.children().into_iter().cloned().collect();
                let slot = ch.get_mut(i as usize)?;
                *slot = slot.replace_at(rest, new)?;
                Some(self.with_children(&ch))
            }
        }
    }

    /// Recomputes dims from children and checks the cache, recursively.
    pub fn dims_consistent(&self) -> bool {
        let ok = match self.kind() {
            Kind::Ket0 | Kind::Ket1 => self.dims() == Dims::new(2, 1),
            Kind::Zero => self.dims().rows >= 1 && self.dims().cols >= 1,
            Kind::Identity(n) => self.dims() == Dims::new(*n, *n),
            Kind::Scale(_, t) => t.dims() == self.dims(),
            Kind::MatMul(a, b) => {
                a.dims().cols == b.dims().rows && self.dims() == Dims::new(a.dims().rows, b.dims().cols)
            }
            Kind::Add(a, b) => a.dims() == b.dims() && a.dims() == self.dims(),
            Kind::Kron(a, b) => {
                self.dims() == Dims::new(a.dims().rows * b.dims().rows, a.dims().cols * b.dims().cols)
            }
            Kind::Dagger(t) => t.dims().transpose() == self.dims(),
            Kind::Gate(g) => g.body.dims() == self.dims(),
        };
        ok && self.children().iter().all(|c| c.dims_consistent())
    }

    /// Names of scalar atoms occurring anywhere in the term, gate bodies included.
    pub fn atom_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut stack = vec![self.clone()];
        while let Some(t) = stack.pop() {
            match t.kind() {
                Kind::Scale(c, s) => {
                    c.atom_names(&mut out);
                    stack.push(s.clone());
                }
                Kind::Gate(g) => stack.push(g.body.clone()),
                _ => stack.extend(t.children().into_iter().cloned()),
            }
        }
        out
    }

    /// Number of nodes, not descending into gate bodies.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn is_vector(&self) -> bool {
        self.dims().cols == 1
    }
}

// ---------------------------------------------------------------------------
// Gate library

fn kk(a: &Term, b: &Term) -> Term {
    a.kron(b)
}

fn mm(a: &Term, b: &Term) -> Term {
    a.matmul(b).expect("library dims")
}

fn pp(a: &Term, b: &Term) -> Term {
    a.add(b).expect("library dims")
}

fn sum(ts: &[Term]) -> Term {
    let mut it = ts.iter();
    let mut acc = it.next().expect("nonempty").clone();
    for t in it {
        acc = pp(&acc, t);
    }
    acc
}

fn def(name: &str, args: Vec<String>, body: Term) -> Term {
    Term::gate(Arc::new(GateDef { name: name.to_string(), args, body }))
}

struct Library {
    gates: HashMap<&'static str, Term>,
}

fn library() -> &'static Library {
    static LIB: OnceLock<Library> = OnceLock::new();
    LIB.get_or_init(build_library)
}

fn build_library() -> Library {
    let mut g: HashMap<&'static str, Term> = HashMap::new();
    let k0 = Term::ket0();
    let k1 = Term::ket1();
    let i2 = Term::id(2);
    let h = Scalar::inv_sqrt2();
    let mh = h.neg();

    let b0 = def("B0", vec![], mm(&k0, &k0.dagger()));
    let b1 = def("B1", vec![], mm(&k0, &k1.dagger()));
    let b2 = def("B2", vec![], mm(&k1, &k0.dagger()));
    let b3 = def("B3", vec![], mm(&k1, &k1.dagger()));
    let x = def("X", vec![], pp(&b1, &b2));
    let y = def("Y", vec![], pp(&b1.scale(Scalar::i().neg()), &b2.scale(Scalar::i())));
    let z = def("Z", vec![], pp(&b0, &b3.scale(Scalar::int(-1))));
    let hh = def("H", vec![], sum(&[b0.scale(h.clone()), b1.scale(h.clone()), b2.scale(h.clone()), b3.scale(mh.clone())]));
    let plus = def("ket_plus", vec![], pp(&k0.scale(h.clone()), &k1.scale(h.clone())));
    let minus = def("ket_minus", vec![], pp(&k0.scale(h.clone()), &k1.scale(mh.clone())));

    let cx = def("CX", vec![], pp(&kk(&b0, &i2), &kk(&b3, &x)));
    let xc = def("XC", vec![], pp(&kk(&x, &b3), &kk(&i2, &b0)));
    let swap = def(
        "SWAP",
        vec![],
        sum(&[kk(&b0, &b0), kk(&b1, &b2), kk(&b2, &b1), kk(&b3, &b3)]),
    );
    let not_cx = def("not_CX", vec![], pp(&kk(&b0, &x), &kk(&b3, &i2)));
    let cz = def("CZ", vec![], pp(&kk(&b0, &i2), &kk(&b3, &z)));
    let h2 = def("H_2", vec![], kk(&i2, &hh));
    let cxx = def("CXX", vec![], pp(&kk(&kk(&b0, &i2), &i2), &kk(&kk(&b3, &x), &x)));
    let cix = def("CIX", vec![], pp(&kk(&kk(&b0, &i2), &i2), &kk(&kk(&b3, &i2), &x)));
    let tof = def("TOF", vec![], pp(&kk(&kk(&b0, &i2), &i2), &kk(&b3, &cx)));

    let ora0 = def("ORA0", vec![], pp(&kk(&b0, &pp(&kk(&b0, &x), &kk(&b3, &i2))), &kk(&kk(&b3, &i2), &i2)));
    let ora1 = def("ORA1", vec![], pp(&kk(&b0, &cx), &kk(&kk(&b3, &i2), &i2)));
    let ora2 = def("ORA2", vec![], pp(&kk(&kk(&b0, &i2), &i2), &kk(&b3, &pp(&kk(&b0, &x), &kk(&b3, &i2)))));
    let ora3 = def("ORA3", vec![], pp(&kk(&kk(&b0, &i2), &i2), &kk(&b3, &cx)));
    let all_b = sum(&[b0.clone(), b1.clone(), b2.clone(), b3.clone()]);
    let mi = def("MI", vec![], kk(&all_b, &all_b));
    let cps = def(
        "CPS",
        vec![],
        kk(&pp(&mi.scale(Scalar::rational(1, 2)), &kk(&i2, &i2).scale(Scalar::int(-1))), &i2),
    );

    let k00 = kk(&k0, &k0);
    let k01 = kk(&k0, &k1);
    let k10 = kk(&k1, &k0);
    let k11 = kk(&k1, &k1);
    let bl00 = def("bell00", vec![], pp(&k00.scale(h.clone()), &k11.scale(h.clone())));
    let bl01 = def("bell01", vec![], pp(&k01.scale(h.clone()), &k10.scale(h.clone())));
    let bl10 = def("bell10", vec![], pp(&k00.scale(h.clone()), &k11.scale(mh.clone())));
    let bl11 = def("bell11", vec![], pp(&k01.scale(h.clone()), &k10.scale(mh.clone())));

    for (n, t) in [
        ("B0", b0),
        ("B1", b1),
        ("B2", b2),
        ("B3", b3),
        ("X", x),
        ("Y", y),
        ("Z", z),
        ("H", hh),
        ("ket_plus", plus),
        ("ket_minus", minus),
        ("CX", cx),
        ("XC", xc),
        ("SWAP", swap),
        ("not_CX", not_cx),
        ("CZ", cz),
        ("H_2", h2),
        ("CXX", cxx),
        ("CIX", cix),
        ("TOF", tof),
        ("ORA0", ora0),
        ("ORA1", ora1),
        ("ORA2", ora2),
        ("ORA3", ora3),
        ("MI", mi),
        ("CPS", cps),
        ("bell00", bl00),
        ("bell01", bl01),
        ("bell10", bl10),
        ("bell11", bl11),
    ] {
        g.insert(n, t);
    }
    g.insert("I2", i2);
    Library { gates: g }
}

/// Names of parameterless library entries.
pub const GATE_NAMES: &[&str] = &[
    "B0", "B1", "B2", "B3", "I2", "X", "Y", "Z", "H", "CX", "XC", "SWAP", "CZ", "H_2", "TOF", "not_CX",
    "CXX", "CIX", "ket_plus", "ket_minus", "bell00", "bell01", "bell10", "bell11", "CPS", "MI", "ORA0",
    "ORA1", "ORA2", "ORA3",
];

/// Parameterized library entries, with their arity.
pub const PARAM_GATES: &[(&str, usize)] =
    &[("CE", 1), ("Mea0", 2), ("Mea1", 2), ("Mea", 2), ("Uf", 1), ("kron_n", 2)];

fn alias(name: &str) -> &str {
    match name {
        "bl00" => "bell00",
        "bl01" => "bell01",
        "bl10" => "bell10",
        "bl11" => "bell11",
        _ => name,
    }
}

/// Parameterless library entry by name.
pub fn named(name: &str) -> Option<Term> {
    library().gates.get(alias(name)).cloned()
}

pub fn is_gate_name(name: &str) -> bool {
    named(name).is_some() || PARAM_GATES.iter().any(|(n, _)| *n == name)
}

/// Library gate argument.
#[derive(Clone, Debug)]
pub enum Param {
    Nat(u64),
    Angle(String),
    Term(Term),
}

/// Library lookup with arguments; parameterless entries take none.
pub fn gate(name: &str, params: &[Param]) -> Result<Term> {
    let arity = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::ArityMismatch { name: name.to_string(), expected: n, got: params.len() })
        }
    };
    let nat = |i: usize| -> Result<u64> {
        match &params[i] {
            Param::Nat(n) => Ok(*n),
            _ => Err(Error::Input(format!("{name}: argument {} must be a natural", i + 1))),
        }
    };
    if let Some(t) = named(name) {
        arity(0)?;
        return Ok(t);
    }
    match name {
        "CE" => {
            arity(1)?;
            match &params[0] {
                Param::Angle(u) => Ok(ce(u)),
                _ => Err(Error::Input("CE: argument must be an angle name".into())),
            }
        }
        "Mea0" | "Mea1" | "Mea" => {
            arity(2)?;
            let (n, k) = (nat(0)?, nat(1)?);
            mea(name, n as u32, k as u32)
        }
        "Uf" => {
            arity(1)?;
            Ok(uf(nat(0)? as u32))
        }
        "kron_n" => {
            arity(2)?;
            let n = nat(0)?;
            match &params[1] {
                Param::Term(t) => Ok(kron_n(n as u32, t)),
                _ => Err(Error::Input("kron_n: second argument must be a term".into())),
            }
        }
        _ => Err(Error::UnknownGate(name.to_string())),
    }
}

fn lib(name: &str) -> Term {
    named(name).expect("library entry")
}

/// Controlled global phase `CE(u) = B0 # I2 + B3 # (cexp(u) B0 + cexp(u) B3)`.
pub fn ce(u: &str) -> Term {
    let p = Scalar::phase(u);
    let body = pp(
        &kk(&lib("B0"), &Term::id(2)),
        &kk(&lib("B3"), &pp(&lib("B0").scale(p.clone()), &lib("B3").scale(p))),
    );
    def("CE", vec![u.to_string()], body)
}

/// Projective measurement operators on qubit `k` of `n+1` qubits.
pub fn mea(which: &str, n: u32, k: u32) -> Result<Term> {
    if k > n || n >= 62 {
        return Err(Error::InvalidQubitIndex { n, k });
    }
    let wrap = |proj: &str| kk(&kk(&Term::id(1u64 << k), &lib(proj)), &Term::id(1u64 << (n - k)));
    let body = match which {
        "Mea0" => wrap("B0"),
        "Mea1" => wrap("B3"),
        "Mea" => pp(&mea("Mea0", n, k)?, &mea("Mea1", n, k)?),
        other => return Err(Error::UnknownGate(other.to_string())),
    };
    Ok(def(which, vec![n.to_string(), k.to_string()], body))
}

/// The Deutsch-Jozsa balanced-oracle family.
pub fn uf(n: u32) -> Term {
    if n == 0 {
        return Term::id(2);
    }
    let cx = lib("CX");
    let outer = if n == 1 { cx } else { kk(&cx, &Term::id(1u64 << (n - 1))) };
    mm(&mm(&outer, &kk(&Term::id(2), &uf(n - 1))), &outer)
}

/// `n`-fold tensor power; `kron_n(0, A) = I(1)`.
pub fn kron_n(n: u32, base: &Term) -> Term {
    if n == 0 {
        Term::id(1)
    } else {
        kk(base, &kron_n(n - 1, base))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_follow_constructors() {
        let kk0 = Term::ket0().kron(&Term::ket0());
        assert_eq!(kk0.dims(), Dims::new(4, 1));
        assert_eq!(lib("H").matmul(&Term::ket0()).unwrap().dims(), Dims::new(2, 1));
        let err = Term::ket0().matmul(&Term::ket0()).unwrap_err();
        assert!(matches!(err, Error::DimMismatch { got, .. } if got == Dims::new(2, 1)));
        assert_eq!(Term::ket0().dagger().dims(), Dims::new(1, 2));
    }

    #[test]
    fn family_shapes() {
        assert_eq!(uf(0), Term::id(2));
        let cx = lib("CX");
        let expect = mm(&mm(&cx, &kk(&Term::id(2), &Term::id(2))), &cx);
        assert_eq!(uf(1), expect);
        assert_eq!(uf(2).dims(), Dims::new(8, 8));
        assert_eq!(kron_n(0, &lib("H")), Term::id(1));
        assert_eq!(kron_n(3, &lib("H")).dims(), Dims::new(8, 8));
        assert_eq!(kron_n(2, &Term::ket0()), kk(&Term::ket0(), &kk(&Term::ket0(), &Term::id(1))));
    }

    #[test]
    fn measurement_operator_body() {
        let t = gate("Mea0", &[Param::Nat(2), Param::Nat(0)]).unwrap();
        let Kind::Gate(g) = t.kind() else { panic!() };
        assert_eq!(g.body, kk(&kk(&Term::id(1), &lib("B0")), &Term::id(4)));
        assert_eq!(t.dims(), Dims::new(8, 8));
    }

    #[test]
    fn lookup_errors() {
        assert!(matches!(gate("FOO", &[]), Err(Error::UnknownGate(_))));
        assert!(matches!(gate("X", &[Param::Nat(1)]), Err(Error::ArityMismatch { .. })));
        assert!(matches!(gate("CE", &[]), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn every_library_gate_is_consistent() {
        for n in GATE_NAMES {
            let t = named(n).unwrap();
            assert!(t.dims_consistent(), "{n}");
            assert!(log2_exact(t.dims().rows).is_some());
        }
    }

    #[test]
    fn path_navigation() {
        let t = lib("X").matmul(&Term::ket0()).unwrap();
        assert_eq!(t.at_path(&[1]).unwrap(), Term::ket0());
        let r = t.replace_at(&[1], &Term::ket1()).unwrap();
        assert_eq!(r.at_path(&[1]).unwrap(), Term::ket1());
        assert!(r.dims_consistent());
    }
}
