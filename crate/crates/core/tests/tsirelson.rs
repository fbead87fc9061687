use bdx::tsirelson::*;
use bdx::Params;
use proptest::prelude::*;

fn params(n3: bool) -> Params {
    if n3 {
        Params::example_n3()
    } else {
        Params::example_n2()
    }
}

fn sparse(max_len: usize, max_index: usize) -> impl Strategy<Value = SparseVec> {
    prop::collection::btree_map(1..=max_index, -2.0f64..2.0, 0..=max_len)
        .prop_map(|m| SparseVec::from_pairs(m).unwrap())
}

fn functional(n: usize, max_index: usize) -> impl Strategy<Value = WFunctional> {
    // random trees over a small index range, made successive by sorting leaves
    let leaf = (any::<bool>(), 1..=max_index).prop_map(|(negative, index)| WFunctional::Leaf { negative, index });
    leaf.prop_recursive(3, 24, n as u32, move |inner| prop::collection::vec(inner, 1..=n).prop_map(WFunctional::Node))
        .prop_map(relabel)
}

/// Reassigns leaf indices left to right so that children become successive.
fn relabel(f: WFunctional) -> WFunctional {
    fn go(f: WFunctional, next: &mut usize) -> WFunctional {
        match f {
            WFunctional::Leaf { negative, .. } => {
                *next += 1 + (*next % 2);
                WFunctional::Leaf { negative, index: *next }
            }
            WFunctional::Node(cs) => WFunctional::Node(cs.into_iter().map(|c| go(c, next)).collect()),
        }
    }
    go(f, &mut 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dp_matches_oracle(x in sparse(8, 14), n3 in any::<bool>()) {
        let p = params(n3);
        let dp = ts_norm(&x, &p).unwrap();
        let oracle = ts_norm_oracle(&x, &p).unwrap();
        prop_assert!((dp - oracle).abs() <= 1e-9, "dp {dp} oracle {oracle} on {x}");
    }

    #[test]
    fn sign_flips_and_deletions(x in sparse(10, 20), n3 in any::<bool>(), mask in any::<u32>()) {
        let p = params(n3);
        let v = ts_norm(&x, &p).unwrap();
        let flip: Vec<usize> = x.support().into_iter().filter(|i| mask & (1 << (i % 32)) != 0).collect();
        prop_assert!((ts_norm(&x.flip_signs(&flip), &p).unwrap() - v).abs() <= 1e-12);
        let smaller = x.restrict(|i| mask & (1 << (i % 32)) == 0);
        prop_assert!(ts_norm(&smaller, &p).unwrap() <= v + 1e-12);
    }

    #[test]
    fn sandwich_holds(x in sparse(16, 40), n3 in any::<bool>()) {
        let s = lr_sandwich(&x, &params(n3)).unwrap();
        prop_assert!(s.ok, "{s:?}");
    }

    #[test]
    fn witness_attains(x in sparse(12, 30), n3 in any::<bool>()) {
        let p = params(n3);
        let (v, f) = ts_norm_with_witness(&x, &p).unwrap();
        if let Some(f) = f {
            prop_assert!(f.is_proper());
            prop_assert!(f.check_well_formed(p.n).is_ok());
            prop_assert!((f.eval(&x, &p) - v).abs() <= 1e-12);
            prop_assert!(height_check(&f).unwrap().lemma2_ok);
        }
    }

    #[test]
    fn properize_dominates(f in functional(3, 6), x in sparse(12, 40)) {
        let p = Params::example_n3();
        prop_assume!(f.check_well_formed(3).is_ok());
        let g = properize(&f);
        prop_assert!(g.is_proper());
        prop_assert!(height_check(&g).unwrap().lemma2_ok);
        prop_assert!(eval_functional(&g, &x.abs(), &p) >= eval_functional(&f, &x, &p).abs() - 1e-12);
        prop_assert!(eval_functional(&f, &x, &p).abs() <= ts_norm(&x, &p).unwrap() + 1e-12);
        let fc = f.coefficients(&p);
        let gc = g.coefficients(&p);
        for (k, c) in fc {
            prop_assert!(gc[&k] + 1e-15 >= c.abs());
        }
    }
}

#[test]
fn branching_lower_bounds() {
    for (p, jmax) in [(Params::example_n2(), 4u32), (Params::example_n3(), 3)] {
        for j in 0..=jmax {
            let x = SparseVec::ones(p.n.pow(j));
            let v = ts_norm(&x, &p).unwrap();
            assert!(v >= p.weight_sum().powi(j as i32) - 1e-9, "n={} j={j}: {v}", p.n);
            let f = branching_functional(&p, j, DEFAULT_SIZE_CAP).unwrap();
            assert!((eval_functional(&f, &x, &p) - p.weight_sum().powi(j as i32)).abs() < 1e-12);
        }
    }
}

#[test]
fn extremal_vectors_have_norm_one() {
    for (p, lmax) in [(Params::example_n2(), 5u32), (Params::example_n3(), 3)] {
        for l in 0..=lmax {
            let x = prop14_vector(&p, l, DEFAULT_SIZE_CAP).unwrap();
            assert!((ts_norm(&x, &p).unwrap() - 1.0).abs() <= 1e-9);
            assert!((x.lp(p.r) - 1.0).abs() <= 1e-12);
            for pp in [3.0, 4.0, 6.0] {
                assert!((x.lp(pp) - prop14_lp_closed_form(&p, l, pp)).abs() <= 1e-12);
            }
        }
    }
}
