use bdx::bd::*;
use bdx::{Error, Params};
use proptest::prelude::*;

fn unfiltered(p: &Params, q: usize) -> GammaRegistry {
    GammaRegistry::build(p, Filters::none(), q).unwrap()
}

fn close(a: &BDVec, b: &BDVec, tol: f64) -> bool {
    a.stage() == b.stage() && a.values().iter().zip(b.values()).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn stage_counts_n2() {
    let p = Params::example_n2();
    let reg = unfiltered(&p, 4);
    let sizes: Vec<usize> = (1..=4).map(|q| reg.delta(q).len()).collect();
    assert_eq!(sizes, vec![1, 2, 10, 110]);
    for &id in reg.delta(2) {
        let node = reg.node(id).unwrap();
        assert_eq!(node.kind_name(), "age1");
        assert_eq!(node.cut(), Some(0));
    }
}

#[test]
fn unfiltered_cap_is_enforced() {
    let p = Params::example_n2();
    let filters = Filters { stage_cap: 100, ..Filters::none() };
    let err = GammaRegistry::build(&p, filters, 4).unwrap_err();
    assert!(matches!(err, Error::StageTooLarge { stage: 4, size: 110, cap: 100 }));
}

#[test]
fn filtered_build_is_deterministic_and_capped() {
    let p = Params::example_n3();
    let a = GammaRegistry::build(&p, Filters::default(), 12).unwrap();
    let b = GammaRegistry::build(&p, Filters::default(), 12).unwrap();
    assert_eq!(a.dump(), b.dump());
    for q in 1..=12 {
        assert!(a.delta(q).len() <= Filters::default().max_stage_size);
        assert!(!a.delta(q).is_empty());
    }
}

#[test]
fn dump_round_trip() {
    let p = Params::example_n3();
    let reg = GammaRegistry::build(&p, Filters::default(), 8).unwrap();
    let text = reg.dump();
    let back = GammaRegistry::load(&text, &p, Filters::default()).unwrap();
    assert_eq!(back.dump(), text);
    assert_eq!(back.stages(), 8);
    let corrupted = text.replacen(" age1 1 0 - 1 0", " age1 1 5 - 1 0", 1);
    assert!(GammaRegistry::load(&corrupted, &p, Filters::default()).is_err());
}

#[test]
fn c_star_examples() {
    let p = Params::example_n2();
    let reg = unfiltered(&p, 3);
    let base = reg.member(0);
    let e_base = BDVec::unit(&reg, base, 1).unwrap();
    for &id in reg.delta(2) {
        let v = c_star_apply(id, &e_base, &reg, &p).unwrap();
        let eps = reg.node(id).unwrap().eps();
        assert!((v - eps * p.b[0]).abs() < 1e-15);
        let zero = BDVec::zeros(&reg, 1).unwrap();
        assert_eq!(c_star_apply(id, &zero, &reg, &p).unwrap(), 0.0);
    }
    assert!(matches!(
        c_star_apply(reg.delta(2)[0], &BDVec::zeros(&reg, 2).unwrap(), &reg, &p),
        Err(Error::StageMismatch { .. })
    ));
    let ext = extend(&e_base, 2, &reg, &p).unwrap();
    assert_eq!(ext.get(0), 1.0);
    assert!((ext.get(1).abs() - p.b[0]).abs() < 1e-15);
}

#[test]
fn age_a_reads_eta_coordinate() {
    let p = Params::example_n2();
    let mut reg = unfiltered(&p, 3);
    let eta = reg.delta(2)[0];
    let xi = reg.delta(3)[0];
    let gamma = reg.add_symbolic(GammaNode::age_a(4, 2, 2, eta, 1, xi), &p).unwrap();
    let x = BDVec::unit(&reg, eta, 3).unwrap();
    assert!((c_star_apply(gamma, &x, &reg, &p).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn extension_algebra() {
    let p = Params::example_n2();
    let reg = unfiltered(&p, 4);
    for q in 1..=4 {
        for &id in reg.gamma(q) {
            let x = BDVec::unit(&reg, id, q).unwrap();
            assert_eq!(extend(&x, q, &reg, &p).unwrap(), x);
            for l in q..=4 {
                let xl = extend(&x, l, &reg, &p).unwrap();
                assert_eq!(xl.restrict(&reg, q).unwrap(), x);
                let direct = extend(&x, 4, &reg, &p).unwrap();
                assert!(close(&extend(&xl, 4, &reg, &p).unwrap(), &direct, 1e-15));
            }
        }
    }
}

#[test]
fn operator_norms() {
    let p = Params::example_n2();
    let reg = unfiltered(&p, 4);
    assert_eq!(op_norm_i(2, 2, &reg, &p).unwrap(), 1.0);
    assert_eq!(op_norm_i(1, 2, &reg, &p).unwrap(), 1.0);
    for m in 1..=4 {
        for q in 1..=m {
            assert!(op_norm_i(q, m, &reg, &p).unwrap() <= p.c + 1e-9);
        }
    }
    let filtered = GammaRegistry::build(&p, Filters::default(), 20).unwrap();
    for q in 1..20 {
        assert!(op_norm_i(q, 20, &filtered, &p).unwrap() <= p.c + 1e-9);
    }
}

#[test]
fn fdd_algebra_on_basis() {
    for p in [Params::example_n2(), Params::example_n3()] {
        let reg = unfiltered(&p, 4);
        let m = 4;
        for &id in reg.gamma(m) {
            let x = BDVec::unit(&reg, id, m).unwrap();
            let mut sum = BDVec::zeros(&reg, m).unwrap();
            for q in 1..=m {
                sum = sum.axpy(1.0, &project(&x, q - 1, q, &reg, &p).unwrap()).unwrap();
            }
            assert!(close(&sum, &x, 1e-12));
            assert!(project(&x, 2, 2, &reg, &p).unwrap().is_zero());
            assert!(close(&project(&x, 0, m, &reg, &p).unwrap(), &x, 0.0));
            for (a, b) in [(0, 1), (0, 2), (1, 3), (2, 4), (0, 4), (1, 2), (3, 4)] {
                let pj = project(&x, a, b, &reg, &p).unwrap();
                for (c, d) in [(0, 2), (1, 4), (2, 3), (3, 4), (0, 4)] {
                    let lhs = project(&pj, c, d, &reg, &p).unwrap();
                    let (lo, hi) = (a.max(c), b.min(d));
                    let rhs =
                        if lo < hi { project(&x, lo, hi, &reg, &p).unwrap() } else { BDVec::zeros(&reg, m).unwrap() };
                    assert!(close(&lhs, &rhs, 1e-12), "P({c},{d}] P({a},{b}]");
                }
            }
        }
        for a in 0..m {
            for b in a..=m {
                assert!(op_norm_projection(a, b, m, &reg, &p).unwrap() <= 2.0 * p.c + 1e-9);
            }
        }
    }
}

#[test]
fn coordinate_functionals() {
    let p = Params::example_n3();
    let reg = unfiltered(&p, 4);
    for &id in reg.gamma(4) {
        let x = BDVec::unit(&reg, id, 4).unwrap();
        let basis = BDVec::fdd_basis(&reg, id).unwrap();
        let mut c = Coords::new(&reg, &p, &x);
        for &g in reg.gamma(4) {
            let rank = reg.node(g).unwrap().rank;
            let block = project(&x, rank - 1, rank, &reg, &p).unwrap();
            let pos = reg.position(g).unwrap();
            assert!((c.d_star(g) - block.get(pos)).abs() <= 1e-12);
            assert!((c.e_star(g) - c.c_star(g) - c.d_star(g)).abs() == 0.0);
            let kron = if g == id { 1.0 } else { 0.0 };
            assert!((d_star(g, &basis, &reg, &p).unwrap() - kron).abs() <= 1e-12);
        }
    }
}

#[test]
fn sup_norm_of_base_unit() {
    let p = Params::example_n2();
    let reg = GammaRegistry::build(&p, Filters::default(), 10).unwrap();
    let x = BDVec::unit(&reg, reg.member(0), 1).unwrap();
    let mut last = 0.0;
    for m in 1..=10 {
        let s = bd_sup_norm(&x, m, &reg, &p).unwrap();
        assert_eq!(s.horizon, m);
        assert!(s.value >= last);
        assert!((s.value - 1.0).abs() < 1e-12);
        last = s.value;
    }
    let zero = BDVec::zeros(&reg, 3).unwrap();
    assert_eq!(bd_sup_norm(&zero, 5, &reg, &p).unwrap().value, 0.0);
}

#[test]
fn supports_and_gaps() {
    let p = Params::example_n2();
    let reg = GammaRegistry::build(&p, Filters::default(), 9).unwrap();
    let basis = BDVec::fdd_basis(&reg, reg.delta(5)[0]).unwrap();
    assert_eq!(fdd_support(&basis, &reg, &p, 1e-12).into_iter().collect::<Vec<_>>(), vec![5]);
    let x = extend(&basis, 9, &reg, &p).unwrap();
    let tail = project(&x, 3, 9, &reg, &p).unwrap();
    assert!(fdd_support(&tail, &reg, &p, 1e-12).iter().all(|&q| q > 3 && q <= 9));
    let s = |v: &[usize]| v.iter().copied().collect();
    assert!(is_skipped(&[s(&[2, 3]), s(&[5]), s(&[7, 8])]));
    assert!(!is_skipped(&[s(&[2, 3]), s(&[4])]));
    assert!(prop3_gaps(&[s(&[3]), s(&[7])], &[1, 4, 8]));
    assert!(!prop3_gaps(&[s(&[3]), s(&[6])], &[1, 4, 8]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extension_bounded_by_c(values in prop::collection::vec(-1.0f64..1.0, 13), m in 4usize..12) {
        let p = Params::example_n2();
        let reg = GammaRegistry::build(&p, Filters::default(), 12).unwrap();
        let x = BDVec::from_values(&reg, 3, values[..reg.gamma_len(3)].to_vec()).unwrap();
        let ext = extend(&x, m, &reg, &p).unwrap();
        prop_assert!(ext.linf() <= p.c * x.linf() + 1e-12);
        prop_assert_eq!(ext.restrict(&reg, 3).unwrap(), x);
    }
}
