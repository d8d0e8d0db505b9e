//! Innermost normalization with a lazy left operand in products.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::term::{Kind, Term};

use super::rules::{self, Cut, Fired};
use super::{tables, EngineConfig, Law, Step};

/// A product already normalized in this run. `input` keeps the key address live.
struct Memo {
    input: Term,
    output: Term,
    used: u64,
    /// Steps with paths relative to the product.
    steps: Vec<Step>,
}

pub struct Engine {
    cfg: EngineConfig,
    used: u64,
    steps: Option<Vec<Step>>,
    path: Vec<u8>,
    memo: HashMap<usize, Memo>,
    product_table: bool,
}

impl Engine {
    pub fn new(cfg: EngineConfig) -> Engine {
        let steps = cfg.trace.then(Vec::new);
        let product_table = cfg.tables;
        Engine { cfg, used: 0, steps, path: Vec::new(), memo: HashMap::new(), product_table }
    }

    pub fn steps_used(&self) -> u64 {
        self.used
    }

    pub fn take_steps(&mut self) -> Option<Vec<Step>> {
        self.steps.take()
    }

    /// Rewrites `t` until no rule applies.
    pub fn normalize(&mut self, t: &Term) -> Result<Term> {
        self.path.clear();
        self.norm(t)
    }

    fn record(&mut self, law: Law, rel: &[u8], before: &Term, after: &Term) -> Result<()> {
        self.used += 1;
        if self.used > self.cfg.fuel {
            return Err(Error::FuelExhausted(self.cfg.fuel));
        }
        if let Some(steps) = &mut self.steps {
            let mut path = self.path.clone();
            path.extend_from_slice(rel);
            steps.push(Step { law, path, before: before.clone(), after: after.clone() });
        }
        Ok(())
    }

    fn at(&mut self, i: u8, t: &Term) -> Result<Term> {
        self.path.push(i);
        let r = self.norm(t);
        self.path.pop();
        r
    }

    /// Applies a fired rule at the current position and continues from its result.
    fn then(&mut self, before: &Term, fired: (Law, Term)) -> Result<Term> {
        let (law, after) = fired;
        self.record(law, &[], before, &after)?;
        self.norm(&after)
    }

    fn norm(&mut self, t: &Term) -> Result<Term> {
        if t.is_normal() {
            return Ok(t.clone());
        }
        if !matches!(t.kind(), Kind::MatMul(..)) {
            return self.norm_node(t);
        }
        if let Some(m) = self.memo.get(&t.ptr()) {
            debug_assert!(m.input.ptr_eq(t));
            self.used += m.used;
            if self.used > self.cfg.fuel {
                return Err(Error::FuelExhausted(self.cfg.fuel));
            }
            if let Some(steps) = &mut self.steps {
                for s in &m.steps {
                    let mut path = self.path.clone();
                    path.extend_from_slice(&s.path);
                    steps.push(Step { path, ..s.clone() });
                }
            }
            return Ok(m.output.clone());
        }
        let (used0, len0) = (self.used, self.steps.as_ref().map_or(0, Vec::len));
        let out = self.norm_node(t)?;
        let depth = self.path.len();
        let steps = match &self.steps {
            Some(all) => all[len0..]
                .iter()
                .map(|s| Step { path: s.path[depth..].to_vec(), ..s.clone() })
                .collect(),
            None => Vec::new(),
        };
        let m = Memo { input: t.clone(), output: out.clone(), used: self.used - used0, steps };
        self.memo.insert(t.ptr(), m);
        Ok(out)
    }

    fn norm_node(&mut self, t: &Term) -> Result<Term> {
        let out = match t.kind() {
            Kind::Ket0 | Kind::Ket1 | Kind::Zero | Kind::Identity(_) | Kind::Gate(_) => t.clone(),
            Kind::Scale(_, a) => {
                let a2 = self.at(0, a)?;
                let t2 = if a2.ptr_eq(a) { t.clone() } else { t.with_children(&[a2]) };
                self.root(&t2, rules::scale)?
            }
            Kind::Add(a, b) => {
                let a2 = self.at(0, a)?;
                let b2 = self.at(1, b)?;
                let t2 = if a2.ptr_eq(a) && b2.ptr_eq(b) { t.clone() } else { Term::plus(&a2, &b2) };
                self.root(&t2, rules::add)?
            }
            Kind::Kron(a, b) => {
                let a2 = self.at(0, a)?;
                let b2 = self.at(1, b)?;
                let t2 = if a2.ptr_eq(a) && b2.ptr_eq(b) { t.clone() } else { a2.kron(&b2) };
                self.root(&t2, rules::kron)?
            }
            Kind::Dagger(x) => match rules::dagger(t) {
                Some(f) => self.then(t, f)?,
                None => {
                    let x2 = self.at(0, x)?;
                    if x2.ptr_eq(x) {
                        t.clone()
                    } else {
                        x2.dagger()
                    }
                }
            },
            Kind::MatMul(l, r) => {
                let r2 = self.at(1, r)?;
                let t2 = if r2.ptr_eq(r) { t.clone() } else { Term::mm(l, &r2) };
                self.product(&t2)?
            }
        };
        out.mark_normal();
        Ok(out)
    }

    fn root(&mut self, t: &Term, rule: fn(&Term) -> Fired) -> Result<Term> {
        match rule(t) {
            Some(f) => self.then(t, f),
            None => Ok(t.clone()),
        }
    }

    /// `t = l * r` with `r` normalized.
    fn product(&mut self, t: &Term) -> Result<Term> {
        let Kind::MatMul(l, r) = t.kind() else { unreachable!() };
        if let Some(out) = self.product_lazy(t, l, r)? {
            return Ok(out);
        }
        let l2 = self.at(0, l)?;
        let t2 = if l2.ptr_eq(l) { t.clone() } else { Term::mm(&l2, r) };
        if !l2.ptr_eq(l) {
            if let Some(out) = self.product_lazy(&t2, &l2, r)? {
                return Ok(out);
            }
        }
        self.product_full(&t2, &l2, r)
    }

    /// Rules that need no knowledge of the left operand's normal form.
    fn product_lazy(&mut self, t: &Term, l: &Term, r: &Term) -> Result<Option<Term>> {
        if let Some(f) = rules::mm_right(l, r).or_else(|| rules::mm_left(l, r)) {
            return self.then(t, f).map(Some);
        }
        if self.cfg.tables {
            if let Some(f) = tables::lookup(l, r) {
                return self.then(t, f).map(Some);
            }
        }
        if matches!(l.kind(), Kind::Kron(..)) && matches!(r.kind(), Kind::Kron(..)) {
            if let Some(out) = self.align(t, l, r)? {
                return Ok(Some(out));
            }
        }
        if let Kind::MatMul(k, b) = r.kind() {
            // l * (k * b) -> (l * k) * b, reducing the column factor first.
            let regrouped = Term::mm(&Term::mm(l, k), b);
            self.record(Law::L2, &[], t, &regrouped)?;
            let v = self.at(0, &Term::mm(l, k))?;
            let t2 = Term::mm(&v, b);
            return self.product_after_left(&t2).map(Some);
        }
        if self.product_table {
            let derive = || {
                let mut e = Engine::new(EngineConfig { trace: false, ..self.cfg.clone() });
                e.product_table = false;
                e.normalize(t).ok()
            };
            if let Some(after) = tables::product_lookup(l, r, derive) {
                return self.then(t, (Law::GDb, after)).map(Some);
            }
        }
        if let Kind::Gate(g) = l.kind() {
            let after = Term::mm(&g.body, r);
            return self.then(t, (Law::Def, after)).map(Some);
        }
        if let Kind::Gate(g) = r.kind() {
            let body = g.body.clone();
            self.record(Law::Def, &[1], r, &body)?;
            let t2 = Term::mm(l, &body);
            return self.norm(&t2).map(Some);
        }
        Ok(None)
    }

    /// Continues a product whose left operand is already normalized.
    fn product_after_left(&mut self, t: &Term) -> Result<Term> {
        let Kind::MatMul(l, r) = t.kind() else { unreachable!() };
        if !l.is_normal() {
            return self.norm(t);
        }
        let out = match self.product_lazy(t, l, r)? {
            Some(out) => out,
            None => self.product_full(t, l, r)?,
        };
        out.mark_normal();
        Ok(out)
    }

    /// Rules applied once both operands are normalized.
    fn product_full(&mut self, t: &Term, l: &Term, r: &Term) -> Result<Term> {
        if let Some(f) = rules::contract(l, r) {
            return self.then(t, f);
        }
        if matches!(l.kind(), Kind::Kron(..)) || matches!(r.kind(), Kind::Kron(..)) {
            if let Some(out) = self.align(t, l, r)? {
                return Ok(out);
            }
            if let Some(out) = self.refine(t, l, r)? {
                return Ok(out);
            }
        }
        Ok(t.clone())
    }

    /// `(A # B) * (C # D) -> (A * C) # (B * D)` after regrouping both sides
    /// at their smallest common cut.
    fn align(&mut self, t: &Term, l: &Term, r: &Term) -> Result<Option<Term>> {
        let lf = rules::factors(l);
        let rf = rules::factors(r);
        let Some((lc, rc)) = rules::common_cut(&lf, &rf, l.dims().cols) else { return Ok(None) };
        let (a, b) = rules::split(l, &lf, lc);
        let (c, d) = rules::split(r, &rf, rc);
        let l2 = a.kron(&b);
        let r2 = c.kron(&d);
        let cur = self.regroup(t, l, &l2, lc, 0)?;
        let cur = self.regroup(&cur, r, &r2, rc, 1)?;
        let after = Term::mm(&a, &c).kron(&Term::mm(&b, &d));
        self.then(&cur, (Law::L13, after)).map(Some)
    }

    /// Records the regrouping of one operand; returns the updated product.
    fn regroup(&mut self, t: &Term, old: &Term, new: &Term, cut: Cut, side: u8) -> Result<Term> {
        if let (Kind::Kron(a, b), Kind::Kron(c, d)) = (old.kind(), new.kind()) {
            if a.ptr_eq(c) && b.ptr_eq(d) {
                return Ok(t.clone());
            }
        }
        let law = if matches!(cut, Cut::At(_)) { Law::L2 } else { Law::L8 };
        self.record(law, &[side], old, new)?;
        Ok(t.replace_at(&[side], new).expect("product operand"))
    }

    /// Unfolds or splits a tensor factor that crosses a cut of the other side.
    fn refine(&mut self, t: &Term, l: &Term, r: &Term) -> Result<Option<Term>> {
        let lf = rules::factors(l);
        let rf = rules::factors(r);
        let cands = rules::find_straddlers(&lf, &rf);
        let pick = cands
            .iter()
            .find(|s| {
                let f = if s.side == 0 { &lf[s.index] } else { &rf[s.index] };
                matches!(f.kind(), Kind::Identity(_))
            })
            .or_else(|| {
                cands.iter().find(|s| {
                    let f = if s.side == 0 { &lf[s.index] } else { &rf[s.index] };
                    matches!(f.kind(), Kind::Gate(_))
                })
            });
        let Some(s) = pick else { return Ok(None) };
        let (side_term, fs) = if s.side == 0 { (l, &lf) } else { (r, &rf) };
        let f = &fs[s.index];
        let (law, new) = match f.kind() {
            Kind::Identity(n) => (Law::L8, Term::id(s.at).kron(&Term::id(n / s.at))),
            Kind::Gate(g) => (Law::Def, g.body.clone()),
            _ => unreachable!(),
        };
        let mut rel = vec![s.side];
        rel.extend(rules::factor_path(fs.len(), s.index));
        let found = side_term.at_path(&rel[1..]);
        debug_assert!(found.as_ref().is_some_and(|x| x.ptr_eq(f)), "normalized tensor spine");
        self.record(law, &rel, f, &new)?;
        let t2 = t.replace_at(&rel, &new).expect("factor path");
        self.norm(&t2).map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{mat_equiv, OracleConfig};
    use crate::rewrite::{normalize_with, unified_base};
    use crate::term::named;

    fn g(n: &str) -> Term {
        named(n).unwrap()
    }

    fn check(t: &Term) -> Term {
        let cfg = EngineConfig { trace: true, ..EngineConfig::default() };
        let red = normalize_with(t, &cfg).unwrap();
        assert!(mat_equiv(t, &red.term, &OracleConfig::default()).unwrap().is_ok());
        let tr = red.trace.unwrap();
        assert_eq!(tr.replay().unwrap(), red.term);
        red.term
    }

    #[test]
    fn ghz() {
        let i2 = Term::id(2);
        let layer1 = g("H").kron(&i2).kron(&i2);
        let layer2 = g("CX").kron(&i2);
        let layer3 = i2.kron(&g("CX"));
        let s = Term::kets(&[false, false, false]);
        let t = layer3.matmul(&layer2.matmul(&layer1.matmul(&s).unwrap()).unwrap()).unwrap();
        let out = check(&t);
        let nf = unified_base(&out).unwrap();
        assert_eq!(nf.len(), 2);
    }

    #[test]
    fn operator_products() {
        let x = g("X");
        check(&x.matmul(&x).unwrap());
        check(&g("H").matmul(&x).unwrap().matmul(&g("H")).unwrap());
        check(&g("CX").matmul(&g("XC")).unwrap().matmul(&g("CX")).unwrap());
        check(&g("TOF").dagger().matmul(&g("TOF")).unwrap());
    }

    #[test]
    fn mixed_tensor_shapes() {
        let t = Term::ket0().kron(&g("X")).matmul(&Term::ket1()).unwrap();
        check(&t);
        let t = Term::bra(true).matmul(&Term::ket0().kron(&Term::bra(true))).unwrap();
        check(&t);
        let t = g("CX").kron(&Term::id(2)).matmul(&Term::ket0().kron(&g("bell00"))).unwrap();
        check(&t);
    }

    #[test]
    fn fuel_is_enforced() {
        let t = g("H").matmul(&Term::ket0()).unwrap();
        let cfg = EngineConfig { fuel: 0, ..EngineConfig::default() };
        assert_eq!(normalize_with(&t, &cfg).unwrap_err(), Error::FuelExhausted(0));
    }
}
