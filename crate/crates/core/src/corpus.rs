//! Assertion files and the corpus runner.
//!
//! Line format:
//!
//! ```text
//! # comment
//! HYP norm(alpha, beta)
//! LET psi = alpha .* |0> + beta .* |1>
//! NAME: KIND lhs == rhs
//! ```
//!
//! `KIND` is one of `EQ`, `MATEQ`, `OBS`, `MIXEQ`.

use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Pos, Result};
use crate::oracle::{self, ObsVerdict, OracleConfig, Witness};
use crate::par;
use crate::quantum::{self, MixedState};
use crate::rewrite::{operate_reduce_with, EngineConfig, NormalForm};
use crate::scalar::{NormHyp, Scalar};
use crate::syntax::{self, Ctx, Value};
use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AssertKind {
    /// Normal-form equality.
    EQ,
    /// Operator equality.
    MATEQ,
    /// Equality up to a global phase.
    OBS,
    /// Ensemble equality.
    MIXEQ,
}

impl AssertKind {
    fn parse(s: &str) -> Option<AssertKind> {
        Some(match s {
            "EQ" => AssertKind::EQ,
            "MATEQ" => AssertKind::MATEQ,
            "OBS" => AssertKind::OBS,
            "MIXEQ" => AssertKind::MIXEQ,
            _ => return None,
        })
    }
}

impl fmt::Display for AssertKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// One assertion with the bindings in scope at its line.
#[derive(Clone, Debug)]
pub struct Assertion {
    pub name: String,
    pub kind: AssertKind,
    pub lhs: String,
    pub rhs: String,
    pub line: usize,
    /// Column of `rhs` within the line.
    pub rhs_col: usize,
    pub ctx: Ctx,
}

/// A parsed assertion file.
#[derive(Clone, Debug, Default)]
pub struct CorpusFile {
    pub assertions: Vec<Assertion>,
}

fn syntax_err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { pos: Pos { line, col }, msg: msg.into() }
}

/// Shifts error positions on a line fragment starting at `col`.
fn shift(e: Error, col: usize) -> Error {
    let mv = |p: Pos| Pos { line: p.line, col: p.col + col };
    match e {
        Error::Syntax { pos, msg } => Error::Syntax { pos: mv(pos), msg },
        Error::DimMismatch { op, expected, got, pos } => Error::DimMismatch { op, expected, got, pos: pos.map(mv) },
        other => other,
    }
}

fn parse_hyp(rest: &str, line: usize) -> Result<NormHyp> {
    let inner = rest
        .trim()
        .strip_prefix("norm(")
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| syntax_err(line, 0, "expected `HYP norm(x, y)`"))?;
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [x, y] if !x.is_empty() && !y.is_empty() => Ok(NormHyp { x: x.to_string(), y: y.to_string() }),
        _ => Err(syntax_err(line, 0, "expected two variable names")),
    }
}

/// Parses file contents. `LET` right-hand sides are evaluated eagerly.
pub fn parse_file(src: &str) -> Result<CorpusFile> {
    let mut ctx = Ctx::default();
    let mut out = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim_end();
        let lead = text.len() - text.trim_start().len();
        let body = text.trim_start();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        if let Some(rest) = body.strip_prefix("HYP ") {
            ctx.hyps.push(parse_hyp(rest, line)?);
            continue;
        }
        if let Some(rest) = body.strip_prefix("LET ") {
            let (name, expr) = rest.split_once('=').ok_or_else(|| syntax_err(line, lead, "expected `LET name = expr`"))?;
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'') {
                return Err(syntax_err(line, lead + 4, "bad binding name"));
            }
            let col = text.len() - expr.len();
            let v = syntax::parse_value(expr, &ctx, line).map_err(|e| shift(e, col))?;
            ctx.lets.insert(name.to_string(), v);
            continue;
        }
        let (name, rest) = body.split_once(':').ok_or_else(|| syntax_err(line, lead, "expected `NAME: KIND lhs == rhs`"))?;
        let rest_col = text.len() - rest.len();
        let rest_trim = rest.trim_start();
        let kind_col = rest_col + (rest.len() - rest_trim.len());
        let (kind, sides) = rest_trim.split_once(char::is_whitespace).unwrap_or((rest_trim, ""));
        let kind = AssertKind::parse(kind).ok_or_else(|| syntax_err(line, kind_col, format!("unknown kind `{kind}`")))?;
        let (lhs, rhs) = sides.split_once("==").ok_or_else(|| syntax_err(line, kind_col, "expected `==`"))?;
        let rhs_col = text.len() - rhs.len();
        out.push(Assertion {
            name: name.trim().to_string(),
            kind,
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            line,
            rhs_col,
            ctx: ctx.clone(),
        });
    }
    Ok(CorpusFile { assertions: out })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Error,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Error => "error",
        })
    }
}

/// Outcome of one assertion.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub name: String,
    pub kind: AssertKind,
    pub verdict: Verdict,
    /// Wall times are `None` unless timing was requested, which keeps
    /// structured output reproducible.
    pub ms_symbolic: Option<f64>,
    pub ms_oracle: Option<f64>,
    pub steps: u64,
    pub line: usize,
    /// Symbolic phase `c` with `c * lhs = rhs`, for `OBS`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs_nf: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
}

/// Runner settings.
#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub oracle: OracleConfig,
    pub use_oracle: bool,
    pub timing: bool,
    pub trace: bool,
    pub fuel: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            oracle: OracleConfig::default(),
            use_oracle: true,
            timing: false,
            trace: false,
            fuel: EngineConfig::default().fuel,
        }
    }
}

pub(crate) enum Side {
    Term(Term),
    Mix(MixedState),
}

/// Symbolic result of one assertion.
struct Symbolic {
    holds: bool,
    steps: u64,
    phase: Option<Scalar>,
    lhs_nf: Option<String>,
    trace: Option<String>,
}

fn side(a: &Assertion, src: &str, col: usize) -> Result<Side> {
    match syntax::parse_value(src, &a.ctx, a.line).map_err(|e| shift(e, col))? {
        Value::Mix(m) => Ok(Side::Mix(m)),
        v => Ok(Side::Term(v.into_term().expect("not a mix"))),
    }
}

/// Normal form of one side, through the density path when the term is a
/// (super-operator applied to a) density operator.
fn nf_of(t: &Term, kind: AssertKind, cfg: &CheckConfig, trace: &mut Vec<String>) -> Result<(NormalForm, u64)> {
    if kind == AssertKind::EQ && quantum::as_pure(t).is_some() {
        return Ok((quantum::density_nf(t)?, 0));
    }
    if kind == AssertKind::MATEQ {
        let d = t.dims();
        if crate::term::log2_exact(d.rows).is_none() || crate::term::log2_exact(d.cols).is_none() {
            return Err(Error::NotQubitDims(d));
        }
    }
    let ecfg = EngineConfig { fuel: cfg.fuel, trace: cfg.trace, ..EngineConfig::default() };
    let (nf, red) = operate_reduce_with(t, &ecfg)?;
    if let Some(tr) = red.trace {
        trace.push(tr.to_text());
    }
    Ok((nf, red.steps))
}

/// `c` with `c * a = b` and `c conj(c) = 1`, when one exists symbolically.
pub fn symbolic_phase(a: &NormalForm, b: &NormalForm, hyps: &[NormHyp]) -> Option<Scalar> {
    if a.dims() != b.dims() || a.len() != b.len() {
        return None;
    }
    if a.is_zero() {
        return Some(Scalar::one());
    }
    let (k, x) = a.entries.iter().find(|(_, s)| s.inv().is_some())?;
    let c = b.entries.get(k)?.mul(&x.inv()?).reduce_hyps(hyps);
    let unit = c.mul(&c.conj()).reduce_hyps(hyps).is_one();
    (unit && a.scale(&c).reduce_hyps(hyps) == b.reduce_hyps(hyps)).then_some(c)
}

fn symbolic(a: &Assertion, l: &Side, r: &Side, cfg: &CheckConfig) -> Result<Symbolic> {
    let hyps = &a.ctx.hyps;
    let mut trace = Vec::new();
    match (l, r) {
        (Side::Term(x), Side::Term(y)) if a.kind != AssertKind::MIXEQ => {
            if x.dims() != y.dims() {
                return Err(Error::DimMismatch { op: "==", expected: x.dims(), got: y.dims(), pos: None });
            }
            let (nx, sx) = nf_of(x, a.kind, cfg, &mut trace)?;
            let (ny, sy) = nf_of(y, a.kind, cfg, &mut trace)?;
            let (nx, ny) = (nx.reduce_hyps(hyps), ny.reduce_hyps(hyps));
            let (holds, phase) = match a.kind {
                AssertKind::OBS => match symbolic_phase(&nx, &ny, hyps) {
                    Some(c) => (true, Some(c)),
                    None => {
                        let dx = density_of(&nx)?;
                        let dy = density_of(&ny)?;
                        (dx.reduce_hyps(hyps) == dy.reduce_hyps(hyps), None)
                    }
                },
                _ => (nx == ny, None),
            };
            Ok(Symbolic {
                holds,
                steps: sx + sy,
                phase,
                lhs_nf: Some(syntax::render_nf(&nx)),
                trace: cfg.trace.then(|| trace.join("\n")),
            })
        }
        (Side::Mix(x), Side::Mix(y)) if a.kind == AssertKind::MIXEQ => Ok(Symbolic {
            holds: quantum::mix_equal_exact(x, y, hyps),
            steps: 0,
            phase: None,
            lhs_nf: Some(x.reduce_hyps(hyps).to_string()),
            trace: None,
        }),
        _ => Err(Error::Input(format!("{}: sides do not match the assertion kind", a.kind))),
    }
}

/// Both sides of an assertion.
pub(crate) fn parse_sides(a: &Assertion) -> Result<(Side, Side)> {
    let lhs_col = a.rhs_col - 2 - a.lhs.len();
    Ok((side(a, &a.lhs, lhs_col)?, side(a, &a.rhs, a.rhs_col)?))
}

/// Symbolic verdict alone.
pub(crate) fn symbolic_holds(a: &Assertion, l: &Side, r: &Side, cfg: &CheckConfig) -> Result<bool> {
    symbolic(a, l, r, cfg).map(|s| s.holds)
}

fn density_of(nf: &NormalForm) -> Result<NormalForm> {
    Ok(nf.matmul(&nf.adjoint()))
}

/// Oracle verdict: `Ok(phase)` when equivalent, `Err(witness)` otherwise.
type OracleOutcome = std::result::Result<Option<num_complex::Complex64>, Option<Witness>>;

fn oracle_check(a: &Assertion, l: &Side, r: &Side, cfg: &OracleConfig) -> Result<OracleOutcome> {
    let cfg = OracleConfig { hyps: a.ctx.hyps.clone(), ..cfg.clone() };
    match (l, r) {
        (Side::Term(x), Side::Term(y)) => match a.kind {
            AssertKind::OBS => Ok(match oracle::obs_equiv(x, y, &cfg)? {
                ObsVerdict::Equivalent(c) => Ok(Some(c)),
                ObsVerdict::NotEquivalent(w) => Err(Some(w)),
            }),
            _ => Ok(oracle::mat_equiv(x, y, &cfg)?.map(|()| None).map_err(Some)),
        },
        (Side::Mix(x), Side::Mix(y)) => {
            Ok(if quantum::mix_equal(x, y, &a.ctx.hyps, &cfg, false)? { Ok(None) } else { Err(None) })
        }
        _ => Err(Error::Input("sides do not match the assertion kind".into())),
    }
}

fn ms(t: Instant) -> f64 {
    (t.elapsed().as_secs_f64() * 1e3 * 1000.0).round() / 1000.0
}

fn phase_close(sym: &Scalar, num: num_complex::Complex64, cfg: &OracleConfig, hyps: &[NormHyp]) -> bool {
    let mut names = Vec::new();
    sym.atom_names(&mut names);
    let cfg = OracleConfig { hyps: hyps.to_vec(), ..cfg.clone() };
    oracle::sample_envs(&names, &cfg)
        .iter()
        .all(|env| sym.eval(env).map(|v| (v - num).norm() <= cfg.tol).unwrap_or(false))
}

/// Runs one assertion.
pub fn check_one(a: &Assertion, cfg: &CheckConfig) -> Report {
    let mut rep = Report {
        name: a.name.clone(),
        kind: a.kind,
        verdict: Verdict::Error,
        ms_symbolic: None,
        ms_oracle: None,
        steps: 0,
        line: a.line,
        phase: None,
        witness: None,
        message: None,
        lhs_nf: None,
        trace: None,
    };
    let t0 = Instant::now();
    let (l, r) = match parse_sides(a) {
        Ok(s) => s,
        Err(e) => {
            rep.message = Some(e.to_string());
            return rep;
        }
    };
    let sym = symbolic(a, &l, &r, cfg);
    if cfg.timing {
        rep.ms_symbolic = Some(ms(t0));
    }
    let sym = match sym {
        Ok(s) => s,
        Err(e) => {
            rep.message = Some(e.to_string());
            return rep;
        }
    };
    rep.steps = sym.steps;
    rep.phase = sym.phase.as_ref().map(|p| p.to_string());
    rep.lhs_nf = sym.lhs_nf;
    rep.trace = sym.trace;
    rep.verdict = if sym.holds { Verdict::Pass } else { Verdict::Fail };
    if !cfg.use_oracle {
        return rep;
    }
    let t1 = Instant::now();
    let orc = oracle_check(a, &l, &r, &cfg.oracle);
    if cfg.timing {
        rep.ms_oracle = Some(ms(t1));
    }
    match orc {
        Err(e) => {
            rep.verdict = Verdict::Error;
            rep.message = Some(format!("oracle: {e}"));
        }
        Ok(Ok(phase)) => {
            if !sym.holds {
                rep.message = Some("oracle finds the sides equivalent; symbolic check does not".into());
            } else if let (Some(s), Some(n)) = (&sym.phase, phase) {
                if !phase_close(s, n, &cfg.oracle, &a.ctx.hyps) {
                    rep.verdict = Verdict::Fail;
                    rep.message = Some(format!("phase mismatch: symbolic {s}, oracle {}", oracle::fmt_c64(n)));
                }
            } else if let Some(n) = phase {
                rep.phase = Some(oracle::fmt_c64(n));
            }
        }
        Ok(Err(w)) => {
            rep.witness = w;
            if sym.holds {
                rep.verdict = Verdict::Fail;
                rep.message = Some("oracle refutes the symbolic verdict".into());
            }
        }
    }
    rep
}

/// Runs every assertion; reports follow file order.
pub fn check_file(file: &CorpusFile, cfg: &CheckConfig) -> Vec<Report> {
    par::in_pool(|| par::map(&file.assertions, |a| check_one(a, cfg)))
}

/// [`check_file`] on the calling thread, one assertion at a time.
pub fn check_file_seq(file: &CorpusFile, cfg: &CheckConfig) -> Vec<Report> {
    par::with_big_stack(|| par::map_seq(&file.assertions, |a| check_one(a, cfg)))
}

/// Reads, parses and runs a corpus file.
pub fn check_path(path: &std::path::Path, cfg: &CheckConfig) -> Result<Vec<Report>> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    Ok(check_file(&parse_file(&src)?, cfg))
}

/// Process exit status for a set of reports: 0 pass, 1 failure, 2 error.
pub fn exit_code(reports: &[Report]) -> i32 {
    if reports.iter().any(|r| r.verdict == Verdict::Error) {
        2
    } else if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        1
    } else {
        0
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<6} {:<5} {} (steps {})", self.verdict, self.kind, self.name, self.steps)?;
        if let Some(p) = &self.phase {
            write!(f, " phase {p}")?;
        }
        if let (Some(s), Some(o)) = (self.ms_symbolic, self.ms_oracle) {
            write!(f, " [{s:.1} ms symbolic, {o:.1} ms oracle]")?;
        } else if let Some(s) = self.ms_symbolic {
            write!(f, " [{s:.1} ms symbolic]")?;
        }
        if let Some(m) = &self.message {
            write!(f, "\n       {m}")?;
        }
        if let Some(w) = &self.witness {
            write!(f, "\n       witness: entry ({}, {}) sample {}: {} vs {}", w.row, w.col, w.sample, w.lhs, w.rhs)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(src: &str) -> Vec<Report> {
        check_file(&parse_file(src).unwrap(), &CheckConfig::default())
    }

    #[test]
    fn kinds() {
        let r = run("a: EQ H * |0> == |+>\nb: MATEQ H * X * H == Z\nc: OBS -1 .* |0> == |0>\n");
        assert!(r.iter().all(|r| r.verdict == Verdict::Pass), "{r:?}");
        assert_eq!(r[2].phase.as_deref(), Some("-1"));
    }

    #[test]
    fn failure_has_witness() {
        let r = run("bad: MATEQ X == Z\n");
        assert_eq!(r[0].verdict, Verdict::Fail);
        assert!(r[0].witness.is_some());
        assert_eq!(exit_code(&r), 1);
    }

    #[test]
    fn lets_and_hyps() {
        let src = "HYP norm(a, b)\nLET psi = a .* |0> + b .* |1>\nn: EQ psi^ * psi == 1\n";
        let r = run(src);
        assert_eq!(r[0].verdict, Verdict::Pass, "{r:?}");
    }

    #[test]
    fn input_errors() {
        assert!(parse_file("x EQ a == b").is_err());
        assert!(parse_file("x: FOO a == b").is_err());
        let r = run("x: EQ |0> * |0> == |0>\n");
        assert_eq!(r[0].verdict, Verdict::Error);
        assert!(r[0].message.as_ref().unwrap().contains("column 12"), "{r:?}");
    }
}
