//! ASCII surface syntax: parser and printers.
//!
//! Precedence, loosest first: `+ -`, `* /`, `#`, `.*`, postfix `^`.
//! Binary operators associate to the left; `.*` associates to the right.

use std::collections::HashMap;
use std::sync::OnceLock;

use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Pos, Result};
use crate::quantum::{self, MixedState};
use crate::rewrite::{gate_nf, NormalForm};
use crate::scalar::{NormHyp, Scalar};
use crate::term::{self, Kind, Param, Term};

// ---------------------------------------------------------------------------
// Lexer

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(i64),
    Rat(i64, i64),
    Ident(String),
    Ket(Vec<char>),
    Bra(Vec<char>),
    Sym(&'static str),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    pos: Pos,
}

const SYMS: [&str; 14] = ["==", ".*", "+", "-", "*", "/", "#", "^", "(", ")", ",", ";", "[", "]"];

fn lex(src: &str, line0: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, line0, 0usize);
    let syntax = |line, col, msg: String| Error::Syntax { pos: Pos { line, col }, msg };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 0;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        let tok = if c == '|' || c == '<' {
            let close = if c == '|' { '>' } else { '|' };
            let mut j = i + 1;
            let mut syms = Vec::new();
            while j < chars.len() && chars[j] != close {
                match chars[j] {
                    '0' | '1' | '+' | '-' => syms.push(chars[j]),
                    ',' | ' ' => {}
                    other => return Err(syntax(line, col + j - i, format!("unexpected `{other}` in basis vector"))),
                }
                j += 1;
            }
            if j >= chars.len() || syms.is_empty() {
                return Err(syntax(line, col, "unterminated basis vector".into()));
            }
            i = j + 1;
            if c == '|' {
                Tok::Ket(syms)
            } else {
                Tok::Bra(syms)
            }
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let num: String = chars[i..j].iter().collect();
            let n: i64 = num.parse().map_err(|_| syntax(line, col, "integer too large".into()))?;
            if j + 1 < chars.len() && chars[j] == '/' && chars[j + 1].is_ascii_digit() {
                let mut k = j + 1;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                let den: String = chars[j + 1..k].iter().collect();
                let d: i64 = den.parse().map_err(|_| syntax(line, col, "integer too large".into()))?;
                if d == 0 {
                    return Err(syntax(line, col, "zero denominator".into()));
                }
                i = k;
                Tok::Rat(n, d)
            } else {
                i = j;
                Tok::Num(n)
            }
        } else if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            i = j;
            Tok::Ident(s)
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            match SYMS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    i += s.len();
                    Tok::Sym(s)
                }
                None => return Err(syntax(line, col, format!("unexpected character `{c}`"))),
            }
        };
        col += i - start;
        out.push(Token { tok, pos });
    }
    out.push(Token { tok: Tok::End, pos: Pos { line, col } });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Values and context

/// Result of evaluating an expression.
#[derive(Clone, Debug)]
pub enum Value {
    Scalar(Scalar),
    Term(Term),
    Mix(MixedState),
}

impl Value {
    fn kind_name(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Term(_) => "term",
            Value::Mix(_) => "mixed state",
        }
    }

    /// Coerces scalars to `c .* I(1)`.
    pub fn into_term(self) -> Option<Term> {
        match self {
            Value::Term(t) => Some(t),
            Value::Scalar(s) => Some(Term::id(1).scale(s)),
            Value::Mix(_) => None,
        }
    }
}

/// Bindings and hypotheses visible to the parser.
#[derive(Clone, Debug, Default)]
pub struct Ctx {
    pub lets: HashMap<String, Value>,
    pub hyps: Vec<NormHyp>,
}

/// Parses a term expression with no bindings.
pub fn parse(src: &str) -> Result<Term> {
    let pos = Pos { line: 1, col: 0 };
    match parse_value(src, &Ctx::default(), 1)? {
        Value::Term(t) => Ok(t),
        v => Err(Error::Syntax { pos, msg: format!("expected a term, found a {}", v.kind_name()) }),
    }
}

/// Parses any expression on source line `line`.
pub fn parse_value(src: &str, ctx: &Ctx, line: usize) -> Result<Value> {
    let toks = lex(src, line)?;
    let mut p = Parser { toks, i: 0, ctx };
    let v = p.expr()?;
    p.expect_end()?;
    Ok(v)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser<'c> {
    toks: Vec<Token>,
    i: usize,
    ctx: &'c Ctx,
}

fn with_pos(e: Error, pos: Pos) -> Error {
    match e {
        Error::DimMismatch { op, expected, got, pos: None } => Error::DimMismatch { op, expected, got, pos: Some(pos) },
        other => other,
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, pos: Pos, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos, msg: msg.into() })
    }

    fn eat(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(x) if *x == s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            let pos = self.pos();
            self.err(pos, format!("expected `{s}`"))
        }
    }

    fn expect_end(&mut self) -> Result<()> {
        if matches!(self.peek(), Tok::End) {
            Ok(())
        } else {
            let pos = self.pos();
            self.err(pos, "unexpected trailing input")
        }
    }

    fn expr(&mut self) -> Result<Value> {
        let mut lhs = self.prod()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => "+",
                Tok::Sym("-") => "-",
                _ => return Ok(lhs),
            };
            self.bump();
            let pos = self.pos();
            let rhs = self.prod()?;
            lhs = self.binary(op, lhs, rhs, pos)?;
        }
    }

    fn prod(&mut self) -> Result<Value> {
        let mut lhs = self.kron()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => "*",
                Tok::Sym("/") => "/",
                _ => return Ok(lhs),
            };
            self.bump();
            let pos = self.pos();
            let rhs = self.kron()?;
            lhs = self.binary(op, lhs, rhs, pos)?;
        }
    }

    fn kron(&mut self) -> Result<Value> {
        let mut lhs = self.dot()?;
        while self.eat("#") {
            let pos = self.pos();
            let rhs = self.dot()?;
            lhs = self.binary("#", lhs, rhs, pos)?;
        }
        Ok(lhs)
    }

    fn dot(&mut self) -> Result<Value> {
        let lhs = self.unary()?;
        if self.eat(".*") {
            let pos = self.pos();
            let rhs = self.dot()?;
            return self.binary(".*", lhs, rhs, pos);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Value> {
        if self.eat("-") {
            let pos = self.pos();
            return match self.unary()? {
                Value::Scalar(s) => Ok(Value::Scalar(s.neg())),
                Value::Term(t) => Ok(Value::Term(t.scale(Scalar::int(-1)))),
                Value::Mix(_) => self.err(pos, "cannot negate a mixed state"),
            };
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Value> {
        let mut v = self.primary()?;
        while self.eat("^") {
            let pos = self.pos();
            v = match (v, self.peek().clone()) {
                (Value::Scalar(s), Tok::Num(e)) => {
                    self.bump();
                    let mut acc = Scalar::one();
                    for _ in 0..e {
                        acc = acc.mul(&s);
                    }
                    Value::Scalar(acc)
                }
                (Value::Scalar(s), _) => Value::Scalar(s.conj()),
                (Value::Term(t), _) => Value::Term(t.dagger()),
                (Value::Mix(_), _) => return self.err(pos, "cannot take the adjoint of a mixed state"),
            };
        }
        Ok(v)
    }

    fn binary(&self, op: &str, a: Value, b: Value, pos: Pos) -> Result<Value> {
        use Value::{Scalar as S, Term as T};
        let r = match (op, a, b) {
            ("+", S(x), S(y)) => S(x.add(&y)),
            ("+", T(x), T(y)) => T(x.add(&y).map_err(|e| with_pos(e, pos))?),
            ("-", S(x), S(y)) => S(x.sub(&y)),
            ("-", T(x), T(y)) => T(x.add(&y.scale(Scalar::int(-1))).map_err(|e| with_pos(e, pos))?),
            ("*", S(x), S(y)) | (".*", S(x), S(y)) => S(x.mul(&y)),
            ("*", T(x), T(y)) => T(x.matmul(&y).map_err(|e| with_pos(e, pos))?),
            ("*", S(x), T(y)) | (".*", S(x), T(y)) => T(y.scale(x)),
            ("/", S(x), S(y)) => match y.inv() {
                Some(inv) => S(x.mul(&inv)),
                None => return self.err(pos, "division by a scalar without exact inverse"),
            },
            ("/", T(x), S(y)) => match y.inv() {
                Some(inv) => T(x.scale(inv)),
                None => return self.err(pos, "division by a scalar without exact inverse"),
            },
            ("#", T(x), T(y)) => T(x.kron(&y)),
            (op, a, b) => {
                return self.err(pos, format!("operator `{op}` not defined for {} and {}", a.kind_name(), b.kind_name()))
            }
        };
        Ok(r)
    }

    fn primary(&mut self) -> Result<Value> {
        let t = self.bump();
        match t.tok {
            Tok::Num(n) => Ok(Value::Scalar(Scalar::int(n))),
            Tok::Rat(n, d) => Ok(Value::Scalar(Scalar::rational(n, d))),
            Tok::Ket(s) => Ok(Value::Term(basis(&s))),
            Tok::Bra(s) => Ok(Value::Term(basis(&s).dagger())),
            Tok::Sym("(") => {
                let v = self.expr()?;
                self.expect(")")?;
                Ok(v)
            }
            Tok::Sym("[") => self.mix_literal(t.pos),
            Tok::Ident(name) => {
                if matches!(self.peek(), Tok::Sym("(")) {
                    self.bump();
                    return self.call(&name, t.pos);
                }
                if let Some(v) = self.ctx.lets.get(&name) {
                    return Ok(v.clone());
                }
                Ok(match name.as_str() {
                    "i" => Value::Scalar(Scalar::i()),
                    "sqrt2" => Value::Scalar(Scalar::sqrt2()),
                    _ => match term::named(&name) {
                        Some(g) => Value::Term(g),
                        None if term::is_gate_name(&name) => {
                            return self.err(t.pos, format!("`{name}` needs arguments"));
                        }
                        None => Value::Scalar(Scalar::var(&name)),
                    },
                })
            }
            Tok::End => self.err(t.pos, "unexpected end of input"),
            other => self.err(t.pos, format!("unexpected {other:?}")),
        }
    }

    fn mix_literal(&mut self, pos: Pos) -> Result<Value> {
        let mut pairs = Vec::new();
        if !self.eat("]") {
            loop {
                self.expect("(")?;
                let ppos = self.pos();
                let p = self.scalar_arg(ppos)?;
                self.expect(",")?;
                let tpos = self.pos();
                let op = self.term_arg(tpos)?;
                self.expect(")")?;
                pairs.push((p, op));
                if self.eat("]") {
                    break;
                }
                self.expect(";")?;
            }
        }
        MixedState::new(pairs).map(Value::Mix).map_err(|e| with_pos(e, pos))
    }

    fn scalar_arg(&mut self, pos: Pos) -> Result<Scalar> {
        match self.expr()? {
            Value::Scalar(s) => Ok(s),
            v => self.err(pos, format!("expected a scalar, found a {}", v.kind_name())),
        }
    }

    fn term_arg(&mut self, pos: Pos) -> Result<Term> {
        match self.expr()? {
            Value::Term(t) => Ok(t),
            v => self.err(pos, format!("expected a term, found a {}", v.kind_name())),
        }
    }

    fn mix_arg(&mut self, pos: Pos) -> Result<MixedState> {
        match self.expr()? {
            Value::Mix(m) => Ok(m),
            v => self.err(pos, format!("expected a mixed state, found a {}", v.kind_name())),
        }
    }

    fn nat_arg(&mut self) -> Result<u64> {
        let pos = self.pos();
        let s = self.scalar_arg(pos)?;
        let c = s.as_constant().filter(|c| {
            let (ar, ai, br, bi) = c.parts();
            ar.is_integer() && ai.is_zero() && br.is_zero() && bi.is_zero() && *ar.numer() >= 0
        });
        match c {
            Some(c) => Ok(c.parts().0.numer().to_u64().unwrap_or(0)),
            None => self.err(pos, "expected a natural number"),
        }
    }

    fn ident_arg(&mut self) -> Result<String> {
        let t = self.bump();
        match t.tok {
            Tok::Ident(s) => Ok(s),
            _ => self.err(t.pos, "expected an identifier"),
        }
    }

    fn comma(&mut self) -> Result<()> {
        self.expect(",")
    }

    fn call(&mut self, name: &str, pos: Pos) -> Result<Value> {
        let v = match name {
            "I" => {
                let n = self.nat_arg()?;
                Value::Term(Term::identity(n).map_err(|e| relocate(e, pos))?)
            }
            "Zero" => {
                let r = self.nat_arg()?;
                self.comma()?;
                let c = self.nat_arg()?;
                Value::Term(Term::zero(r, c).map_err(|e| relocate(e, pos))?)
            }
            "CE" => Value::Term(term::ce(&self.ident_arg()?)),
            "Mea0" | "Mea1" | "Mea" => {
                let n = self.nat_arg()?;
                self.comma()?;
                let k = self.nat_arg()?;
                Value::Term(term::gate(name, &[Param::Nat(n), Param::Nat(k)]).map_err(|e| relocate(e, pos))?)
            }
            "Uf" => Value::Term(term::gate("Uf", &[Param::Nat(self.nat_arg()?)])?),
            "kron_n" => {
                let n = self.nat_arg()?;
                self.comma()?;
                let tp = self.pos();
                let t = self.term_arg(tp)?;
                Value::Term(term::kron_n(n as u32, &t))
            }
            "density" => {
                let tp = self.pos();
                let t = self.term_arg(tp)?;
                Value::Term(quantum::density(&t).map_err(|e| relocate(e, tp))?)
            }
            "super" => {
                let mp = self.pos();
                let m = self.term_arg(mp)?;
                self.comma()?;
                let rp = self.pos();
                let rho = self.term_arg(rp)?;
                Value::Term(quantum::super_op(&m, &rho).map_err(|e| relocate(e, rp))?)
            }
            "prob" => {
                let sp = self.pos();
                let psi = self.term_arg(sp)?;
                self.comma()?;
                let mp = self.pos();
                let m = self.term_arg(mp)?;
                let p = quantum::probability(&psi, &m).map_err(|e| relocate(e, mp))?;
                Value::Scalar(p.reduce_hyps(&self.ctx.hyps))
            }
            "conj" => {
                let sp = self.pos();
                Value::Scalar(self.scalar_arg(sp)?.conj())
            }
            "cexp" => {
                let neg = self.eat("-");
                let mut k = 1i32;
                if let Tok::Num(n) = self.peek().clone() {
                    self.bump();
                    self.expect("*")?;
                    k = n as i32;
                }
                let u = self.ident_arg()?;
                let base = Scalar::phase(&u);
                let base = if neg { base.conj() } else { base };
                let mut acc = Scalar::one();
                for _ in 0..k {
                    acc = acc.mul(&base);
                }
                Value::Scalar(acc)
            }
            "meamix" | "meaden" => {
                let n = self.nat_arg()?;
                self.comma()?;
                let k = self.nat_arg()?;
                self.comma()?;
                let ap = self.pos();
                let m = if name == "meamix" {
                    self.mix_arg(ap)?
                } else {
                    let rho = self.term_arg(ap)?;
                    MixedState::new(vec![(Scalar::one(), rho)]).map_err(|e| relocate(e, ap))?
                };
                Value::Mix(quantum::mea_mix(n as u32, k as u32, &m, &self.ctx.hyps).map_err(|e| relocate(e, ap))?)
            }
            "unitmix" => {
                let up = self.pos();
                let u = self.term_arg(up)?;
                self.comma()?;
                let ap = self.pos();
                let m = self.mix_arg(ap)?;
                Value::Mix(quantum::unit_mix(&u, &m).map_err(|e| relocate(e, ap))?)
            }
            other => {
                if term::named(other).is_some() {
                    return self.err(pos, format!("`{other}` takes no arguments"));
                }
                return Err(Error::UnknownGate(other.to_string()));
            }
        };
        self.expect(")")?;
        Ok(v)
    }
}

fn relocate(e: Error, pos: Pos) -> Error {
    match e {
        Error::Input(msg) => Error::Syntax { pos, msg },
        other => with_pos(other, pos),
    }
}

fn basis(syms: &[char]) -> Term {
    let one = |c: char| match c {
        '0' => Term::ket0(),
        '1' => Term::ket1(),
        '+' => term::named("ket_plus").expect("library"),
        _ => term::named("ket_minus").expect("library"),
    };
    let mut it = syms.iter();
    let mut t = one(*it.next().expect("nonempty"));
    for c in it {
        t = t.kron(&one(*c));
    }
    t
}

// ---------------------------------------------------------------------------
// Term printer

const P_ADD: u8 = 1;
const P_MUL: u8 = 2;
const P_KRON: u8 = 3;
const P_DOT: u8 = 4;
const P_POST: u8 = 5;

fn ket_symbol(t: &Term) -> Option<char> {
    match t.kind() {
        Kind::Ket0 => Some('0'),
        Kind::Ket1 => Some('1'),
        Kind::Gate(g) if g.name == "ket_plus" => Some('+'),
        Kind::Gate(g) if g.name == "ket_minus" => Some('-'),
        _ => None,
    }
}

/// Symbols of a tensor of computational-basis kets.
fn ket_chain(t: &Term) -> Option<Vec<char>> {
    match t.kind() {
        Kind::Ket0 => Some(vec!['0']),
        Kind::Ket1 => Some(vec!['1']),
        Kind::Kron(a, b) => {
            let mut v = ket_chain(a)?;
            v.extend(ket_chain(b)?);
            Some(v)
        }
        _ => None,
    }
}

fn join(s: &[char]) -> String {
    s.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

/// Renders a scalar so that it parses as the left operand of `.*`.
pub fn render_scalar(s: &Scalar) -> String {
    let text = s.to_string();
    if text.contains([' ', '*', '^']) {
        format!("({text})")
    } else {
        text
    }
}

/// Canonical text of a term.
pub fn render(t: &Term) -> String {
    go(t, 0)
}

fn paren(s: String, need: bool) -> String {
    if need {
        format!("({s})")
    } else {
        s
    }
}

fn go(t: &Term, ctx: u8) -> String {
    if let Some(c) = ket_symbol(t) {
        return format!("|{c}>");
    }
    if let Some(bits) = ket_chain(t) {
        return format!("|{}>", join(&bits));
    }
    match t.kind() {
        Kind::Ket0 | Kind::Ket1 => unreachable!(),
        Kind::Zero => format!("Zero({},{})", t.dims().rows, t.dims().cols),
        Kind::Identity(n) => format!("I({n})"),
        Kind::Gate(g) => g.label(),
        Kind::Dagger(x) => {
            if let Some(c) = ket_symbol(x) {
                return format!("<{c}|");
            }
            if let Some(bits) = ket_chain(x) {
                return format!("<{}|", join(&bits));
            }
            format!("{}^", go(x, P_POST + 1))
        }
        Kind::Scale(c, x) => paren(format!("{} .* {}", render_scalar(c), go(x, P_DOT)), ctx > P_DOT),
        Kind::Add(a, b) => paren(format!("{} + {}", go(a, P_ADD), go(b, P_ADD)), ctx > P_ADD),
        Kind::MatMul(a, b) => paren(format!("{} * {}", go(a, P_MUL), go(b, P_MUL)), ctx > P_MUL),
        Kind::Kron(a, b) => paren(format!("{} # {}", go(a, P_KRON), go(b, P_KRON)), ctx > P_KRON),
    }
}

// ---------------------------------------------------------------------------
// Normal-form printer with re-sugaring

struct Known {
    name: String,
    nf: NormalForm,
}

fn known_gates() -> &'static Vec<Known> {
    static K: OnceLock<Vec<Known>> = OnceLock::new();
    K.get_or_init(|| {
        let names = [
            "X", "Y", "Z", "H", "B0", "B1", "B2", "B3", "CX", "XC", "SWAP", "CZ", "not_CX", "TOF", "CXX", "CIX",
            "CPS", "ORA0", "ORA1", "ORA2", "bell00", "bell01", "bell10", "bell11",
        ];
        names
            .iter()
            .map(|n| Known { name: (*n).to_string(), nf: gate_nf(&term::named(n).expect("library")).expect("gate nf") })
            .collect()
    })
}

fn identity_nf(q: u32) -> NormalForm {
    let mut nf = NormalForm::zero(q, q);
    for i in 0..(1u64 << q) {
        nf.insert(i, i, Scalar::one());
    }
    nf
}

/// `c` with `nf = c * base`, for constant `c`.
fn ratio(nf: &NormalForm, base: &NormalForm) -> Option<Scalar> {
    if nf.row_qubits != base.row_qubits || nf.col_qubits != base.col_qubits || nf.len() != base.len() {
        return None;
    }
    let (k, b) = base.entries.iter().next()?;
    let c = nf.entries.get(k)?.mul(&b.inv()?);
    (base.scale(&c) == *nf).then_some(c)
}

/// Splits off the first qubit: `nf = f # rest` with `f` on one qubit.
fn split_first(nf: &NormalForm) -> Option<(NormalForm, NormalForm)> {
    let (rq, cq) = (nf.row_qubits, nf.col_qubits);
    let (fr, fc) = match (rq, cq) {
        (r, 0) if r >= 2 => (1, 0),
        (r, c) if r == c && r >= 2 => (1, 1),
        _ => return None,
    };
    let (sr, sc) = (rq - fr, cq - fc);
    let mut blocks: Vec<((u64, u64), NormalForm)> = Vec::new();
    for (&(r, c), s) in &nf.entries {
        let key = (r >> sr, c >> sc);
        let idx = match blocks.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                blocks.push((key, NormalForm::zero(sr, sc)));
                blocks.len() - 1
            }
        };
        blocks[idx].1.insert(r & ((1u64 << sr) - 1), c & ((1u64 << sc) - 1), s.clone());
    }
    let base = blocks.first()?.1.clone();
    let mut f = NormalForm::zero(fr, fc);
    for (key, b) in &blocks {
        f.insert(key.0, key.1, ratio(b, &base)?);
    }
    Some((f, base))
}

enum Piece {
    Kets(Vec<char>),
    Ident(u64),
    Text(String),
}

fn ket_nf(sym: char) -> NormalForm {
    match sym {
        '0' => NormalForm::single(1, 0, 0, 0, Scalar::one()),
        '1' => NormalForm::single(1, 0, 1, 0, Scalar::one()),
        '+' => gate_nf(&term::named("ket_plus").expect("library")).expect("nf"),
        _ => gate_nf(&term::named("ket_minus").expect("library")).expect("nf"),
    }
}

fn one_qubit_piece(f: &NormalForm) -> Option<(Scalar, Piece)> {
    if f.col_qubits == 0 {
        for sym in ['0', '1', '+', '-'] {
            if let Some(c) = ratio(f, &ket_nf(sym)) {
                return Some((c, Piece::Kets(vec![sym])));
            }
        }
        return None;
    }
    if let Some(c) = ratio(f, &identity_nf(1)) {
        return Some((c, Piece::Ident(2)));
    }
    known_gates()
        .iter()
        .filter(|k| k.nf.row_qubits == 1 && k.nf.col_qubits == 1)
        .find_map(|k| ratio(f, &k.nf).map(|c| (c, Piece::Text(k.name.clone()))))
}

fn with_scale(c: &Scalar, body: String, compound: bool) -> String {
    if c.is_one() {
        body
    } else if compound {
        format!("{} .* ({body})", render_scalar(c))
    } else {
        format!("{} .* {body}", render_scalar(c))
    }
}

/// Sugared rendering of a normal form: library names, tensor factors and
/// `|+>`/`|->` are recovered where the form allows.
pub fn render_nf(nf: &NormalForm) -> String {
    if let Some(s) = nf.as_scalar() {
        return s.to_string();
    }
    if nf.is_zero() {
        let d = nf.dims();
        return format!("Zero({},{})", d.rows, d.cols);
    }
    if nf.row_qubits == nf.col_qubits {
        if let Some(c) = ratio(nf, &identity_nf(nf.row_qubits)) {
            return with_scale(&c, format!("I({})", 1u64 << nf.row_qubits), false);
        }
    }
    if nf.row_qubits > 1 || nf.col_qubits > 1 {
        for k in known_gates() {
            if let Some(c) = ratio(nf, &k.nf) {
                return with_scale(&c, k.name.clone(), false);
            }
        }
    }
    factored(nf).unwrap_or_else(|| render(&nf.to_term()))
}

fn factored(nf: &NormalForm) -> Option<String> {
    let mut scale = Scalar::one();
    let mut pieces: Vec<Piece> = Vec::new();
    let mut rest = nf.clone();
    while rest.row_qubits + rest.col_qubits > 0 {
        let (f, r) = if rest.row_qubits <= 1 && rest.col_qubits <= 1 {
            (rest.clone(), NormalForm::single(0, 0, 0, 0, Scalar::one()))
        } else {
            split_first(&rest)?
        };
        let (c, p) = one_qubit_piece(&f)?;
        scale = scale.mul(&c);
        pieces.push(p);
        rest = r;
    }
    scale = scale.mul(&rest.get(0, 0));
    let mut merged: Vec<Piece> = Vec::new();
    for p in pieces {
        match (merged.last_mut(), p) {
            (Some(Piece::Kets(a)), Piece::Kets(b))
                if a.iter().chain(&b).all(|c| *c == '0' || *c == '1') =>
            {
                a.extend(b)
            }
            (Some(Piece::Ident(a)), Piece::Ident(b)) => *a *= b,
            (_, p) => merged.push(p),
        }
    }
    let parts: Vec<String> = merged
        .into_iter()
        .map(|p| match p {
            Piece::Kets(s) => format!("|{}>", join(&s)),
            Piece::Ident(n) => format!("I({n})"),
            Piece::Text(t) => t,
        })
        .collect();
    Some(with_scale(&scale, parts.join(" # "), parts.len() > 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::{normalize_operator, operate_reduce};

    #[test]
    fn parses_products_and_tensors() {
        let t = parse("X * |0>").unwrap();
        assert!(matches!(t.kind(), Kind::MatMul(..)));
        assert_eq!(parse("(H # I(2)) * CX").unwrap().dims(), crate::term::Dims::new(4, 4));
        assert_eq!(parse("|0,1,1>").unwrap(), Term::kets(&[false, true, true]));
        assert_eq!(parse("<0|").unwrap(), Term::bra(false));
    }

    #[test]
    fn dim_mismatch_column() {
        match parse("|0> * |0>") {
            Err(Error::DimMismatch { pos: Some(p), .. }) => assert_eq!((p.line, p.col), (1, 6)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence() {
        let t = parse("1/2 .* X # Y").unwrap();
        assert!(matches!(t.kind(), Kind::Kron(a, _) if matches!(a.kind(), Kind::Scale(..))));
        let t = parse("X + Y * Z").unwrap();
        assert!(matches!(t.kind(), Kind::Add(..)));
        let t = parse("X # Y^").unwrap();
        assert!(matches!(t.kind(), Kind::Kron(_, b) if matches!(b.kind(), Kind::Dagger(_))));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse("FOO(3)"), Err(Error::UnknownGate(_))));
        assert!(matches!(parse("X * "), Err(Error::Syntax { .. })));
        assert!(matches!(parse("|2>"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn scalars_round_trip() {
        let s = Scalar::rational(1, 2).add(&Scalar::sqrt2().mul(&Scalar::i()).mul(&Scalar::rational(-1, 2)));
        let ctx = Ctx::default();
        match parse_value(&s.to_string(), &ctx, 1).unwrap() {
            Value::Scalar(p) => assert_eq!(p, s),
            v => panic!("{v:?}"),
        }
        let a = Scalar::var("alpha").conj().mul(&Scalar::phase("u").conj());
        match parse_value(&a.to_string(), &ctx, 1).unwrap() {
            Value::Scalar(p) => assert_eq!(p, a),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn sugared_output() {
        let nf = operate_reduce(&parse("(H#H)*(|0>#|1>)").unwrap()).unwrap();
        assert_eq!(render_nf(&nf), "|+> # |->");
        assert_eq!(render_nf(&normalize_operator(&parse("H*X*H").unwrap()).unwrap()), "Z");
        assert_eq!(render_nf(&normalize_operator(&parse("I(2)").unwrap()).unwrap()), "I(2)");
        let ghz = parse("(I2 # CX) * (CX # I2) * (H # I2 # I2) * |0,0,0>").unwrap();
        let out = render_nf(&operate_reduce(&ghz).unwrap());
        assert_eq!(out, "(1/2*sqrt2) .* |0,0,0> + (1/2*sqrt2) .* |1,1,1>");
    }

    #[test]
    fn render_round_trips() {
        for src in ["X * |0>", "1/2 .* (X # Y) + -1 .* Z # Z", "(CX * (H # I(2)))^ * |0,1>", "<0,1| * |+> # |->"] {
            let t = parse(src).unwrap();
            let back = parse(&render(&t)).unwrap();
            assert_eq!(operate_reduce(&t).unwrap(), operate_reduce(&back).unwrap(), "{src}");
        }
    }
}
