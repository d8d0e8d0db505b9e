//! Randomized properties of normalization, the oracle and the quantum layer.

use num_complex::Complex64 as C64;
use qdirac_core::bench::naive_dense;
use qdirac_core::gen::{law_instance, Gen};
use qdirac_core::oracle::{
    eval_dense, mat_equiv, mat_equiv_basis, obs_equiv, sample_envs, trace_dense, ObsVerdict, OracleConfig,
};
use qdirac_core::quantum::{density, density_nf, mass_dense, mea_den, super_op};
use qdirac_core::rewrite::{normalize_operator, normalize_with, operate_reduce, unified_base, EngineConfig, Law};
use qdirac_core::scalar::{Env, Scalar};
use qdirac_core::syntax::{parse, parse_value, render, render_nf, Ctx, Value};
use qdirac_core::term::{named, Term};

const CASES: u64 = 200;

fn cfg() -> OracleConfig {
    OracleConfig::default()
}

fn oracle_equal(a: &Term, b: &Term) -> bool {
    mat_equiv(a, b, &cfg()).unwrap().is_ok()
}

/// A term equal to `t` by construction, or usually different from it.
fn partner(g: &mut Gen, t: &Term, equal: bool) -> Term {
    let (rows, cols) = (t.dims().rows, t.dims().cols);
    if equal {
        match g.below(5) {
            0 => Term::identity(rows).unwrap().matmul(t).unwrap(),
            1 => t.dagger().dagger(),
            2 => t.scale(Scalar::int(2)).scale(Scalar::rational(1, 2)),
            3 => t.add(&Term::zero(rows, cols).unwrap()).unwrap(),
            _ => t.matmul(&Term::identity(cols).unwrap()).unwrap(),
        }
    } else {
        let rq = rows.trailing_zeros();
        let cq = cols.trailing_zeros();
        match g.below(2) {
            0 => g.term(rq, cq, 3),
            _ => t.add(&g.term(rq, cq, 1).scale(g.scalar())).unwrap(),
        }
    }
}

#[test]
fn normalization_preserves_denotation() {
    let mut g = Gen::with_atoms(11);
    for i in 0..CASES {
        let q = 1 + (i % 4) as u32;
        let t = if g.coin(0.5) {
            g.state(q, 3)
        } else {
            let cq = g.below(q as usize + 1) as u32;
            g.term(q, cq, 3)
        };
        let nf = operate_reduce(&t).unwrap();
        assert!(oracle_equal(&t, &nf.to_term()), "case {i}: {}", render(&t));
    }
}

#[test]
fn normal_forms_are_canonical() {
    let mut g = Gen::new(12);
    let (mut eq, mut ne) = (0, 0);
    for i in 0..CASES {
        let (rq, cq) = (g.below(4) as u32, g.below(4) as u32);
        let a = g.term(rq, cq, 3);
        let b = partner(&mut g, &a, i % 2 == 0);
        let same_nf = operate_reduce(&a).unwrap() == operate_reduce(&b).unwrap();
        let same_matrix = oracle_equal(&a, &b);
        assert_eq!(same_nf, same_matrix, "case {i}: {} vs {}", render(&a), render(&b));
        if same_matrix {
            eq += 1
        } else {
            ne += 1
        }
    }
    assert!(eq >= 50 && ne >= 50, "{eq} equal, {ne} different");
}

#[test]
fn observational_equivalence_matches_density_equality() {
    let mut g = Gen::new(13);
    let mut hits = 0;
    for i in 0..CASES {
        let q = 1 + (i % 3) as u32;
        let psi = g.state(q, 2);
        let phi = match g.below(3) {
            0 => psi.scale(g.phase()),
            1 => g.state(q, 2),
            _ => psi.scale(Scalar::int(2)),
        };
        let obs = matches!(obs_equiv(&psi, &phi, &cfg()).unwrap(), ObsVerdict::Equivalent(_));
        let dens = density_nf(&density(&psi).unwrap()).unwrap() == density_nf(&density(&phi).unwrap()).unwrap();
        assert_eq!(obs, dens, "case {i}: {} vs {}", render(&psi), render(&phi));
        hits += usize::from(obs);
    }
    assert!(hits >= 50);
}

#[test]
fn measurement_conserves_mass_and_unitaries_preserve_trace() {
    let mut g = Gen::new(14);
    for i in 0..CASES {
        let q = 1 + (i % 3) as u32;
        let psi = g.state(q, 2);
        let rho = density(&psi).unwrap();
        let k = g.below(q as usize) as u32;
        let mix = mea_den(q - 1, k, &rho, &[]).unwrap();
        assert_eq!(mix.mass(&[]).unwrap(), Scalar::one(), "case {i}");
        for m in mass_dense(&mix, &cfg()).unwrap() {
            assert!((m - 1.0).abs() <= 1e-9, "case {i}: mass {m}");
        }
        let u = g.unitary(q, 2);
        let evolved = super_op(&u, &rho).unwrap();
        assert_eq!(normalize_operator(&evolved).unwrap().trace().unwrap(), Scalar::one(), "case {i}");
        let tr = trace_dense(&eval_dense(&evolved, &Env::new()).unwrap()).unwrap();
        assert!((tr - C64::new(1.0, 0.0)).norm() <= 1e-9, "case {i}: trace {tr}");
    }
}

#[test]
fn controlled_phase_is_not_congruent() {
    let i2 = Term::identity(2).unwrap();
    let neg = i2.scale(Scalar::int(-1));
    let (b0, b3) = (named("B0").unwrap(), named("B3").unwrap());
    let ctrl = |u: &Term| b0.kron(&i2).add(&b3.kron(u)).unwrap();
    match obs_equiv(&i2, &neg, &cfg()).unwrap() {
        ObsVerdict::Equivalent(c) => assert!((c - C64::new(-1.0, 0.0)).norm() < 1e-12),
        other => panic!("expected a phase, got {other:?}"),
    }
    assert!(matches!(obs_equiv(&ctrl(&i2), &ctrl(&neg), &cfg()).unwrap(), ObsVerdict::NotEquivalent(_)));
}

#[test]
fn equivalence_paths_agree() {
    let mut g = Gen::with_atoms(15);
    for i in 0..CASES {
        let q = 1 + (i % 3) as u32;
        let a = g.operator(q, 3);
        let b = partner(&mut g, &a, i % 2 == 0);
        let direct = mat_equiv(&a, &b, &cfg()).unwrap().is_ok();
        assert_eq!(direct, mat_equiv_basis(&a, &b, &cfg()).unwrap(), "case {i}");
    }
}

#[test]
fn structured_and_naive_evaluation_agree() {
    let mut g = Gen::with_atoms(16);
    for i in 0..CASES {
        let (rq, cq) = g.shape();
        let t = g.term(rq, cq, 4);
        for env in sample_envs(&t.atom_names(), &cfg()) {
            let (a, b) = (eval_dense(&t, &env).unwrap(), naive_dense(&t, &env).unwrap());
            assert!(a.approx_eq(&b, 1e-9), "case {i}: {}", render(&t));
        }
    }
}

#[test]
fn printing_round_trips() {
    let mut g = Gen::with_atoms(17);
    for i in 0..CASES {
        let (rq, cq) = g.shape();
        let t = g.term(rq, cq, 3);
        let back = parse(&render(&t)).unwrap();
        assert!(oracle_equal(&t, &back), "case {i}: {}", render(&t));
        let nf = operate_reduce(&t).unwrap();
        match parse_value(&render_nf(&nf), &Ctx::default(), 1).unwrap() {
            Value::Term(u) => assert_eq!(nf, operate_reduce(&u).unwrap(), "case {i}: {}", render_nf(&nf)),
            Value::Scalar(s) => assert_eq!(nf.get(0, 0), s, "case {i}: {}", render_nf(&nf)),
            Value::Mix(_) => panic!("case {i}: unexpected mixture"),
        }
    }
}

#[test]
fn traces_replay_and_cite_known_laws() {
    let mut g = Gen::new(18);
    let ecfg = EngineConfig { trace: true, ..EngineConfig::default() };
    for i in 0..CASES {
        let t = if i % 2 == 0 { g.state(1 + (i % 3) as u32, 3) } else { g.operator(2, 3) };
        let red = normalize_with(&t, &ecfg).unwrap();
        let tr = red.trace.unwrap();
        assert_eq!(tr.steps.len() as u64, red.steps, "case {i}");
        assert_eq!(tr.replay().unwrap(), red.term, "case {i}");
        for s in &tr.steps {
            assert!(Law::parse(s.law.id()).is_some());
        }
        assert_eq!(unified_base(&red.term).unwrap(), operate_reduce(&t).unwrap());
    }
}

#[test]
fn law_instances_normalize_consistently_with_tracing() {
    let mut g = Gen::new(19);
    let ecfg = EngineConfig { trace: true, ..EngineConfig::default() };
    for law in Law::TABLE {
        let (l, _) = law_instance(law, &mut g, 2);
        let plain = normalize_with(&l, &EngineConfig::default()).unwrap();
        let traced = normalize_with(&l, &ecfg).unwrap();
        assert_eq!(plain.term, traced.term, "{law}");
        assert_eq!(plain.steps, traced.steps, "{law}");
    }
}
