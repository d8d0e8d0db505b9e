//! Every law of the catalog holds on random instances, checked by the dense oracle.

use qdirac_core::gen::{law_instance, Gen};
use qdirac_core::oracle::{mat_equiv, OracleConfig};
use qdirac_core::rewrite::{operate_reduce, Law};

const CASES: usize = 50;

fn cfg() -> OracleConfig {
    OracleConfig { samples: 3, tol: 1e-9, seed: 42, hyps: Vec::new() }
}

#[test]
fn laws_are_sound() {
    let mut g = Gen::with_atoms(2024);
    for law in Law::TABLE {
        for i in 0..CASES {
            let (l, r) = law_instance(law, &mut g, 3);
            assert!(l.dims().rows <= 8 && l.dims().cols <= 8);
            let verdict = mat_equiv(&l, &r, &cfg()).unwrap();
            assert!(verdict.is_ok(), "{law} case {i}: {:?}", verdict.unwrap_err());
        }
    }
}

#[test]
fn both_sides_of_a_law_share_a_normal_form() {
    let mut g = Gen::new(77);
    for law in Law::TABLE {
        for i in 0..20 {
            let (l, r) = law_instance(law, &mut g, 2);
            assert_eq!(operate_reduce(&l).unwrap(), operate_reduce(&r).unwrap(), "{law} case {i}");
        }
    }
}

#[test]
fn a_wrong_law_is_refuted() {
    let mut g = Gen::new(5);
    let mut refuted = 0;
    for _ in 0..50 {
        // (A * B)^ = A^ * B^ is false in general.
        let (a, b) = (g.operator(1, 2), g.operator(1, 2));
        let l = a.matmul(&b).unwrap().dagger();
        let r = a.dagger().matmul(&b.dagger()).unwrap();
        if mat_equiv(&l, &r, &cfg()).unwrap().is_err() {
            refuted += 1;
        }
    }
    assert!(refuted > 10, "only {refuted} refutations");
}
