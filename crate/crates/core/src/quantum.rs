//! Density matrices, super-operators, ensembles and projective measurement.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{eval_dense, mat_equiv, sample_envs, OracleConfig};
use crate::rewrite::{normalize_operator, operate_reduce, NormalForm};
use crate::scalar::{NormHyp, Scalar};
use crate::term::{mea, Dims, Kind, Term};

/// `psi * psi^`.
pub fn density(psi: &Term) -> Result<Term> {
    if !psi.is_vector() {
        return Err(Error::NotAVector(psi.dims()));
    }
    Ok(Term::mm(psi, &psi.dagger()))
}

/// `m * rho * m^`.
pub fn super_op(m: &Term, rho: &Term) -> Result<Term> {
    if !rho.dims().is_square() {
        return Err(Error::NotSquare(rho.dims()));
    }
    let inner = m.matmul(rho)?;
    Ok(Term::mm(&inner, &m.dagger()))
}

/// Recognizes `c .* density(psi)` possibly wrapped in super-operators and
/// returns `(c, psi')` with the super-operators moved onto the state.
pub fn as_pure(t: &Term) -> Option<(Scalar, Term)> {
    match t.kind() {
        Kind::Scale(c, x) => as_pure(x).map(|(d, psi)| (c.mul(&d), psi)),
        Kind::MatMul(a, b) => {
            if let Kind::Dagger(b2) = b.kind() {
                if a.is_vector() && a == b2 {
                    return Some((Scalar::one(), a.clone()));
                }
                if let Kind::MatMul(m, rho) = a.kind() {
                    if m == b2 {
                        return as_pure(rho).map(|(c, psi)| (c, Term::mm(m, &psi)));
                    }
                }
            }
            if let Kind::MatMul(rho, md) = b.kind() {
                if matches!(md.kind(), Kind::Dagger(m2) if m2 == a) {
                    return as_pure(rho).map(|(c, psi)| (c, Term::mm(a, &psi)));
                }
            }
            None
        }
        _ => None,
    }
}

/// `super(m, density(psi))` computed through the state: the normal form of
/// `v * v^` for `v = m * psi` reduced first.
pub fn super_reduce(m: &Term, psi: &Term) -> Result<NormalForm> {
    let v = operate_reduce(&m.matmul(psi)?)?.to_term();
    normalize_operator(&Term::mm(&v, &v.dagger()))
}

/// Normal form of a density-shaped term; falls back to plain normalization.
pub fn density_nf(t: &Term) -> Result<NormalForm> {
    match as_pure(t) {
        Some((c, psi)) => {
            let v = operate_reduce(&psi)?.to_term();
            Ok(normalize_operator(&Term::mm(&v, &v.dagger()))?.scale(&c))
        }
        None => normalize_operator(t),
    }
}

/// Sum of diagonal coefficients of an operator normal form.
pub fn sym_trace(nf: &NormalForm) -> Result<Scalar> {
    nf.trace()
}

/// `p(m) = <psi| m^ m |psi>` as a scalar.
pub fn probability(psi: &Term, m_op: &Term) -> Result<Scalar> {
    if !psi.is_vector() {
        return Err(Error::NotAVector(psi.dims()));
    }
    let v = operate_reduce(&m_op.matmul(psi)?)?.to_term();
    let nf = operate_reduce(&Term::mm(&v.dagger(), &v))?;
    Ok(nf.as_scalar().expect("inner product is 1x1"))
}

/// One ensemble member. The operator is `op / pending` when the trace used
/// for renormalization had no exact inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub prob: Scalar,
    pub op: NormalForm,
    pub pending: Option<Scalar>,
}

/// Ordered ensemble of weighted density operators.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MixedState {
    pub branches: Vec<Branch>,
}

impl MixedState {
    /// Builds an ensemble from `(prob, op)` pairs; zero-probability pairs are dropped.
    pub fn new(pairs: Vec<(Scalar, Term)>) -> Result<MixedState> {
        let mut branches = Vec::new();
        let mut dims: Option<Dims> = None;
        for (p, t) in pairs {
            if !t.dims().is_square() {
                return Err(Error::NotSquare(t.dims()));
            }
            if let Some(d) = dims {
                if d != t.dims() {
                    return Err(Error::DimMismatch { op: "mix", expected: d, got: t.dims(), pos: None });
                }
            }
            dims = Some(t.dims());
            if p.is_zero() {
                continue;
            }
            branches.push(Branch { prob: p, op: density_nf(&t)?, pending: None });
        }
        Ok(MixedState { branches })
    }

    pub fn dims(&self) -> Option<Dims> {
        self.branches.first().map(|b| b.op.dims())
    }

    /// Rewrites every scalar modulo the normalization hypotheses.
    pub fn reduce_hyps(&self, hyps: &[NormHyp]) -> MixedState {
        MixedState {
            branches: self
                .branches
                .iter()
                .map(|b| Branch {
                    prob: b.prob.reduce_hyps(hyps),
                    op: b.op.reduce_hyps(hyps),
                    pending: b.pending.as_ref().map(|p| p.reduce_hyps(hyps)),
                })
                .collect(),
        }
    }

    /// `sum_i p_i tr(rho_i)`.
    pub fn mass(&self, hyps: &[NormHyp]) -> Result<Scalar> {
        let mut acc = Scalar::zero();
        for b in &self.branches {
            let mut t = b.op.trace()?;
            if let Some(p) = &b.pending {
                if t.reduce_hyps(hyps) == p.reduce_hyps(hyps) {
                    t = Scalar::one();
                } else {
                    return Err(Error::Input("mass of an unevaluated branch".into()));
                }
            }
            acc = acc.add(&b.prob.mul(&t));
        }
        Ok(acc.reduce_hyps(hyps))
    }
}

impl fmt::Display for MixedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .branches
            .iter()
            .map(|b| {
                let op = crate::syntax::render(&b.op.to_term());
                match &b.pending {
                    None => format!("{} : {}", b.prob, op),
                    Some(t) => format!("{} : ({}) / ({})", b.prob, op, t),
                }
            })
            .collect();
        f.write_str(&parts.join(" ; "))
    }
}

impl Serialize for MixedState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Row<'a> {
            prob: String,
            op: &'a NormalForm,
            pending: Option<String>,
        }
        let rows: Vec<Row> = self
            .branches
            .iter()
            .map(|b| Row { prob: b.prob.to_string(), op: &b.op, pending: b.pending.as_ref().map(|p| p.to_string()) })
            .collect();
        rows.serialize(s)
    }
}

/// Maps every branch through `rho -> u * rho * u^`.
pub fn unit_mix(u: &Term, m: &MixedState) -> Result<MixedState> {
    let mut out = Vec::with_capacity(m.branches.len());
    for b in &m.branches {
        let rho = b.op.to_term();
        let op = normalize_operator(&super_op(u, &rho)?)?;
        out.push(Branch { prob: b.prob.clone(), op, pending: b.pending.clone() });
    }
    Ok(MixedState { branches: out })
}

/// Projective measurement of qubit `k` (of `n+1`) on every branch.
pub fn mea_mix(n: u32, k: u32, m: &MixedState, hyps: &[NormHyp]) -> Result<MixedState> {
    let m0 = mea("Mea0", n, k)?;
    let m1 = mea("Mea1", n, k)?;
    let want = m0.dims();
    let mut out = Vec::new();
    for b in &m.branches {
        if b.op.dims() != want {
            return Err(Error::DimMismatch { op: "meamix", expected: want, got: b.op.dims(), pos: None });
        }
        let rho = b.op.to_term();
        for proj in [&m0, &m1] {
            let t = normalize_operator(&proj.matmul(&rho)?)?.trace()?.reduce_hyps(hyps);
            if t.is_zero() {
                continue;
            }
            let post = normalize_operator(&Term::mm(&Term::mm(proj, &rho), proj))?.reduce_hyps(hyps);
            let prob = b.prob.mul(&t).reduce_hyps(hyps);
            let (op, pending) = match t.inv() {
                Some(inv) => (post.scale(&inv).reduce_hyps(hyps), b.pending.clone()),
                None => (post, Some(b.pending.clone().unwrap_or_else(Scalar::one).mul(&t))),
            };
            out.push(Branch { prob, op, pending });
        }
    }
    Ok(MixedState { branches: out })
}

/// Measurement of a single density operator.
pub fn mea_den(n: u32, k: u32, rho: &Term, hyps: &[NormHyp]) -> Result<MixedState> {
    mea_mix(n, k, &MixedState::new(vec![(Scalar::one(), rho.clone())])?, hyps)
}

fn branches_match(a: &Branch, b: &Branch, hyps: &[NormHyp], cfg: &OracleConfig) -> Result<bool> {
    if a.prob.reduce_hyps(hyps) != b.prob.reduce_hyps(hyps) || a.pending != b.pending {
        return Ok(false);
    }
    if a.op.dims() != b.op.dims() {
        return Ok(false);
    }
    let cfg = OracleConfig { hyps: hyps.to_vec(), ..cfg.clone() };
    Ok(mat_equiv(&a.op.to_term(), &b.op.to_term(), &cfg)?.is_ok())
}

/// Ordered (or, with `multiset`, order-insensitive) ensemble equality:
/// probabilities compared exactly, operators by the matrix oracle.
pub fn mix_equal(a: &MixedState, b: &MixedState, hyps: &[NormHyp], cfg: &OracleConfig, multiset: bool) -> Result<bool> {
    if a.branches.len() != b.branches.len() {
        return Ok(false);
    }
    if !multiset {
        for (x, y) in a.branches.iter().zip(&b.branches) {
            if !branches_match(x, y, hyps, cfg)? {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    let mut used = vec![false; b.branches.len()];
    for x in &a.branches {
        let mut found = false;
        for (j, y) in b.branches.iter().enumerate() {
            if !used[j] && branches_match(x, y, hyps, cfg)? {
                used[j] = true;
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact ensemble equality on normal forms.
pub fn mix_equal_exact(a: &MixedState, b: &MixedState, hyps: &[NormHyp]) -> bool {
    a.reduce_hyps(hyps) == b.reduce_hyps(hyps)
}

/// Numeric mass of an ensemble under sampled environments (oracle side).
pub fn mass_dense(m: &MixedState, cfg: &OracleConfig) -> Result<Vec<f64>> {
    let mut names = Vec::new();
    for b in &m.branches {
        b.prob.atom_names(&mut names);
        names.extend(b.op.to_term().atom_names());
    }
    let mut out = Vec::new();
    for env in sample_envs(&names, cfg) {
        let mut acc = 0.0;
        for b in &m.branches {
            let p = b.prob.eval(&env)?;
            let rho = eval_dense(&b.op.to_term(), &env)?;
            let mut tr = crate::oracle::trace_dense(&rho)?;
            if let Some(t) = &b.pending {
                tr /= t.eval(&env)?;
            }
            acc += (p * tr).re;
        }
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::unified_base;
    use crate::term::named;

    fn g(n: &str) -> Term {
        named(n).unwrap()
    }

    #[test]
    fn density_of_basis_and_plus() {
        let d = density(&Term::ket0()).unwrap();
        assert_eq!(normalize_operator(&d).unwrap(), normalize_operator(&g("B0")).unwrap());
        let p = normalize_operator(&density(&g("ket_plus")).unwrap()).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.entries.values().all(|s| *s == Scalar::rational(1, 2)));
        assert!(matches!(density(&g("X")), Err(Error::NotAVector(_))));
    }

    #[test]
    fn super_reduce_bell() {
        let m = g("CX").matmul(&g("H").kron(&Term::id(2))).unwrap();
        let psi = Term::kets(&[false, false]);
        let lhs = super_reduce(&m, &psi).unwrap();
        let rhs = normalize_operator(&density(&g("bell00")).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        let full = normalize_operator(&super_op(&m, &density(&psi).unwrap()).unwrap()).unwrap();
        assert_eq!(full, lhs);
    }

    #[test]
    fn measurement_of_plus() {
        let m = mea_den(0, 0, &density(&g("ket_plus")).unwrap(), &[]).unwrap();
        assert_eq!(m.branches.len(), 2);
        assert_eq!(m.branches[0].prob, Scalar::rational(1, 2));
        assert_eq!(m.branches[0].op, unified_base(&g("B0")).unwrap());
        assert_eq!(m.branches[1].op, unified_base(&g("B3")).unwrap());
        let z = mea_den(0, 0, &density(&Term::ket0()).unwrap(), &[]).unwrap();
        assert_eq!(z.branches.len(), 1);
        assert_eq!(z.mass(&[]).unwrap(), Scalar::one());
    }

    #[test]
    fn unit_mix_and_probability() {
        let m = MixedState::new(vec![(Scalar::one(), g("B0"))]).unwrap();
        let x = unit_mix(&g("X"), &m).unwrap();
        assert_eq!(x.branches[0].op, unified_base(&g("B3")).unwrap());
        assert_eq!(probability(&Term::ket0(), &g("B0")).unwrap(), Scalar::one());
        assert!(probability(&Term::ket0(), &g("B3")).unwrap().is_zero());
        let cfg = OracleConfig::default();
        assert!(!mix_equal(&m, &x, &[], &cfg, false).unwrap());
        assert!(mix_equal(&x, &x, &[], &cfg, false).unwrap());
    }
}
