//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Correctness criteria fail the run. The timing comparison against the dense
//! baseline is reported but does not fail the run, since it depends on the
//! host and is not a correctness property.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use qdirac_core::bench::{naive_dense, run_case, CASES};
use qdirac_core::corpus::{check_path, CheckConfig, Report, Verdict};
use qdirac_core::gen::{law_instance, Gen};
use qdirac_core::oracle::{eval_dense, mat_equiv, mat_equiv_basis, obs_equiv, sample_envs, ObsVerdict, OracleConfig};
use qdirac_core::quantum::{density, density_nf, mass_dense, mea_den, super_op};
use qdirac_core::rewrite::{normalize_operator, operate_reduce, Law};
use qdirac_core::scalar::Scalar;
use qdirac_core::term::{named, Term};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus_files() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus dir")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "qd"))
        .collect();
    v.sort();
    v
}

fn oracle() -> OracleConfig {
    OracleConfig { samples: 3, tol: 1e-9, seed: 42, hyps: Vec::new() }
}

fn law_soundness() -> Outcome {
    let start = Instant::now();
    let mut g = Gen::with_atoms(42);
    let mut cases = 0;
    for law in Law::TABLE {
        for i in 0..50 {
            let (l, r) = law_instance(law, &mut g, 3);
            let d = l.dims();
            ensure(d.rows <= 8 && d.cols <= 8, || format!("{law} case {i}: dims {d:?}"))?;
            let v = mat_equiv(&l, &r, &oracle()).map_err(|e| e.to_string())?;
            ensure(v.is_ok(), || format!("{law} case {i}: {:?}", v.clone().unwrap_err()))?;
            cases += 1;
        }
    }
    let el = start.elapsed();
    ensure(el < Duration::from_secs(30), || format!("took {el:?}"))?;
    Ok(format!("{} laws, {cases} cases, 3 envs, {el:.2?}", Law::TABLE.len()))
}

fn find<'a>(reports: &'a [(String, Vec<Report>)], file: &str, name: &str) -> Result<&'a Report, String> {
    reports
        .iter()
        .filter(|(f, _)| f == file)
        .flat_map(|(_, r)| r)
        .find(|r| r.name == name)
        .ok_or_else(|| format!("{file}: no assertion {name}"))
}

fn corpus_exactness() -> Outcome {
    let start = Instant::now();
    let cfg = CheckConfig::default();
    let mut all = Vec::new();
    let mut entangle = Duration::ZERO;
    for f in corpus_files() {
        let t = Instant::now();
        let reports = check_path(&f, &cfg).map_err(|e| format!("{}: {e}", f.display()))?;
        let stem = f.file_stem().unwrap().to_string_lossy().into_owned();
        if stem == "entangle12" {
            entangle = t.elapsed();
        }
        for r in &reports {
            ensure(r.verdict == Verdict::Pass, || format!("{stem}/{}: {}", r.name, r.verdict))?;
        }
        all.push((stem, reports));
    }
    let total = start.elapsed();
    let stems: Vec<&str> = all.iter().map(|(s, _)| s.as_str()).collect();
    for need in ["ghz", "bell", "gate_laws", "circuit_identities", "deutsch", "teleport", "simon", "grover", "entangle12"] {
        ensure(stems.contains(&need), || format!("missing corpus file {need}"))?;
    }
    for n in 1..=5 {
        ensure(stems.contains(&format!("dj_n{n}").as_str()), || format!("missing dj_n{n}"))?;
    }
    for name in ["pb00", "pb01", "pb10", "pb11"] {
        find(&all, "bell", name)?;
    }
    for name in ["Gro0", "Gro1", "Gro2", "Gro3"] {
        find(&all, "grover", name)?;
    }
    for name in ["swap_cx", "not_cx", "ce_phase", "cxx"] {
        find(&all, "circuit_identities", name)?;
    }
    find(&all, "simon", "simon")?;
    find(&all, "ghz", "ghz")?;
    for name in ["tele1", "tele2", "tele3", "prob00", "prob01", "prob10", "prob11"] {
        find(&all, "teleport", name)?;
    }
    for name in ["step31'", "step33'", "deutsch01'", "deutsch11'"] {
        let r = find(&all, "deutsch", name)?;
        ensure(r.phase.as_deref() == Some("-1"), || format!("deutsch/{name}: phase {:?}", r.phase))?;
    }
    ensure(entangle < Duration::from_secs(60), || format!("entangle12 took {entangle:?}"))?;
    ensure(total < Duration::from_secs(300), || format!("corpus took {total:?}"))?;
    let n: usize = all.iter().map(|(_, r)| r.len()).sum();
    Ok(format!("{} files, {n} assertions, total {total:.2?}, entangle12 {entangle:.2?}", all.len()))
}

/// Timing rows as (case, passed, detail).
fn symbolic_speed() -> Vec<(String, bool, String)> {
    CASES
        .iter()
        .map(|&c| match run_case(c, 5, &oracle()) {
            Err(e) => (c.to_string(), false, e.to_string()),
            Ok(row) => {
                let ok = row.symbolic_ok && row.dense_ok != Some(false);
                match (row.dense_ms, &row.dense_note) {
                    (Some(d), _) => (
                        c.to_string(),
                        ok && row.symbolic_ms < d,
                        format!("symbolic {:.3} ms, dense {d:.3} ms", row.symbolic_ms),
                    ),
                    (None, note) => (
                        c.to_string(),
                        ok && c == "entangle12",
                        format!("symbolic {:.3} ms, dense {}", row.symbolic_ms, note.clone().unwrap_or_default()),
                    ),
                }
            }
        })
        .collect()
}

fn equal(a: &Term, b: &Term) -> Result<bool, String> {
    Ok(mat_equiv(a, b, &oracle()).map_err(|e| e.to_string())?.is_ok())
}

fn partner(g: &mut Gen, t: &Term, same: bool) -> Term {
    let d = t.dims();
    if same {
        match g.below(3) {
            0 => Term::identity(d.rows).unwrap().matmul(t).unwrap(),
            1 => t.dagger().dagger(),
            _ => t.scale(Scalar::int(3)).scale(Scalar::rational(1, 3)),
        }
    } else {
        g.term(d.rows.trailing_zeros(), d.cols.trailing_zeros(), 3)
    }
}

fn denotation() -> Outcome {
    let mut g = Gen::with_atoms(101);
    for i in 0..200u32 {
        let q = 1 + i % 4;
        let t = if i % 2 == 0 { g.state(q, 3) } else { g.operator(q, 3) };
        let nf = operate_reduce(&t).map_err(|e| e.to_string())?;
        ensure(equal(&t, &nf.to_term())?, || format!("case {i}"))?;
    }
    Ok("200 terms up to 4 qubits".into())
}

fn canonicity() -> Outcome {
    let mut g = Gen::new(102);
    for i in 0..200u32 {
        let (rq, cq) = (g.below(4) as u32, g.below(4) as u32);
        let a = g.term(rq, cq, 3);
        let b = partner(&mut g, &a, i % 2 == 0);
        let nf = operate_reduce(&a).unwrap() == operate_reduce(&b).unwrap();
        ensure(nf == equal(&a, &b)?, || format!("case {i}"))?;
    }
    Ok("200 closed pairs up to 3 qubits".into())
}

fn obs_density() -> Outcome {
    let mut g = Gen::new(103);
    for i in 0..200u32 {
        let q = 1 + i % 3;
        let psi = g.state(q, 2);
        let phi = match i % 3 {
            0 => psi.scale(g.phase()),
            1 => g.state(q, 2),
            _ => psi.scale(Scalar::int(2)),
        };
        let obs = matches!(obs_equiv(&psi, &phi, &oracle()).unwrap(), ObsVerdict::Equivalent(_));
        let dens = density_nf(&density(&psi).unwrap()).unwrap() == density_nf(&density(&phi).unwrap()).unwrap();
        ensure(obs == dens, || format!("case {i}"))?;
    }
    Ok("200 pairs".into())
}

fn conservation() -> Outcome {
    let mut g = Gen::new(104);
    for i in 0..200u32 {
        let q = 1 + i % 3;
        let rho = density(&g.state(q, 2)).unwrap();
        let k = g.below(q as usize) as u32;
        let mix = mea_den(q - 1, k, &rho, &[]).map_err(|e| e.to_string())?;
        ensure(mix.mass(&[]).unwrap() == Scalar::one(), || format!("case {i}: symbolic mass"))?;
        for m in mass_dense(&mix, &oracle()).unwrap() {
            ensure((m - 1.0).abs() <= 1e-9, || format!("case {i}: mass {m}"))?;
        }
        let evolved = super_op(&g.unitary(q, 2), &rho).unwrap();
        let tr = normalize_operator(&evolved).unwrap().trace().unwrap();
        ensure(tr == Scalar::one(), || format!("case {i}: trace {tr}"))?;
    }
    Ok("200 measurements and evolutions".into())
}

fn controlled_phase() -> Outcome {
    let i2 = Term::identity(2).unwrap();
    let neg = i2.scale(Scalar::int(-1));
    let (b0, b3) = (named("B0").unwrap(), named("B3").unwrap());
    let ctrl = |u: &Term| b0.kron(&i2).add(&b3.kron(u)).unwrap();
    match obs_equiv(&i2, &neg, &oracle()).unwrap() {
        ObsVerdict::Equivalent(c) if (c - C64::new(-1.0, 0.0)).norm() < 1e-12 => {}
        other => return Err(format!("I vs -I: {other:?}")),
    }
    match obs_equiv(&ctrl(&i2), &ctrl(&neg), &oracle()).unwrap() {
        ObsVerdict::NotEquivalent(w) => Ok(format!("witness at ({}, {})", w.row, w.col)),
        other => Err(format!("controlled: {other:?}")),
    }
}

fn basis_path() -> Outcome {
    let mut g = Gen::with_atoms(105);
    for i in 0..200u32 {
        let a = g.operator(1 + i % 3, 3);
        let b = partner(&mut g, &a, i % 2 == 0);
        let basis = mat_equiv_basis(&a, &b, &oracle()).unwrap();
        ensure(equal(&a, &b)? == basis, || format!("case {i}"))?;
    }
    Ok("200 pairs".into())
}

fn naive_vs_structured() -> Outcome {
    let mut g = Gen::with_atoms(106);
    for i in 0..200u32 {
        let (rq, cq) = g.shape();
        let t = g.term(rq, cq, 4);
        for env in sample_envs(&t.atom_names(), &oracle()) {
            let (a, b) = (eval_dense(&t, &env).unwrap(), naive_dense(&t, &env).unwrap());
            ensure(a.approx_eq(&b, 1e-9), || format!("case {i}"))?;
        }
    }
    Ok("200 terms".into())
}

fn qdirac(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qdirac")).args(args).output().expect("run qdirac")
}

fn cli() -> Outcome {
    let files: Vec<String> = corpus_files()
        .into_iter()
        .filter(|p| !p.ends_with("entangle12.qd"))
        .map(|p| p.display().to_string())
        .collect();
    let mut args = vec!["--seed", "42", "--json", "check"];
    args.extend(files.iter().map(String::as_str));
    let (a, b) = (qdirac(&args), qdirac(&args));
    ensure(a.status.code() == Some(0), || format!("exit {:?}", a.status.code()))?;
    ensure(a.stdout == b.stdout, || "json output differs between runs".into())?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bad = dir.path().join("bad.qd");
    let src = std::fs::read_to_string(corpus_dir().join("ghz.qd")).unwrap();
    let corrupted = src.replacen("|1,1,1>", "|1,1,0>", 1);
    ensure(corrupted != src, || "could not corrupt ghz.qd".into())?;
    std::fs::write(&bad, corrupted).unwrap();
    let out = qdirac(&["--json", "check", bad.to_str().unwrap()]);
    ensure(out.status.code() == Some(1), || format!("corrupted file exit {:?}", out.status.code()))?;
    let text = String::from_utf8_lossy(&out.stdout);
    ensure(text.contains("\"witness\""), || "no witness in output".into())?;
    Ok(format!("{} bytes identical; corrupted file exits 1 with witness", a.stdout.len()))
}

fn main() {
    let mut hard_failures = 0;
    let mut line = |id: &str, label: &str, r: Outcome, counts: bool| match r {
        Ok(d) => println!("PASS {id} {label}: {d}"),
        Err(e) => {
            println!("FAIL {id} {label}: {e}");
            if counts {
                hard_failures += 1;
            }
        }
    };
    line("C1", "law soundness", law_soundness(), true);
    line("C2", "corpus exactness", corpus_exactness(), true);
    for (case, ok, detail) in symbolic_speed() {
        let r = if ok { Ok(detail) } else { Err(detail) };
        line("C3", &format!("symbolic faster than dense [{case}]"), r, false);
    }
    line("C4a", "normalization preserves denotation", denotation(), true);
    line("C4b", "normal forms are canonical", canonicity(), true);
    line("C4c", "observational equivalence iff equal densities", obs_density(), true);
    line("C4d", "mass and trace conservation", conservation(), true);
    line("C4e", "controlled phase separation", controlled_phase(), true);
    line("C4f", "basis and direct equivalence agree", basis_path(), true);
    line("C4g", "structured and naive dense agree", naive_vs_structured(), true);
    line("C5", "cli determinism and witness", cli(), true);
    if hard_failures > 0 {
        eprintln!("{hard_failures} correctness criteria failed");
        std::process::exit(1);
    }
}
