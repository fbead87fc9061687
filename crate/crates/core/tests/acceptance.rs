//! One test per acceptance criterion. Each prints a `criterion N: PASS|FAIL`
//! line with its measurements (visible with `--nocapture`) and fails when the
//! criterion or its runtime budget is missed.

use std::time::{Duration, Instant};

use bdx::analysis::{evaluation_analysis, lemma4_eval, tree_analysis};
use bdx::bd::*;
use bdx::estimates::*;
use bdx::tsirelson::*;
use bdx::Params;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn both() -> [Params; 2] {
    [Params::example_n2(), Params::example_n3()]
}

/// Prints the verdict line, then enforces it.
fn report(n: u32, title: &str, ok: bool, detail: String, start: Instant, budget_s: u64) {
    let elapsed = start.elapsed();
    let in_time = elapsed <= Duration::from_secs(budget_s);
    let verdict = if ok && in_time { "PASS" } else { "FAIL" };
    println!("criterion {n}: {verdict} {title}: {detail} ({:.2} s of {budget_s} s)", elapsed.as_secs_f64());
    assert!(ok, "criterion {n} ({title}) failed: {detail}");
    assert!(in_time, "criterion {n} ({title}) exceeded {budget_s} s");
}

fn random_sparse(rng: &mut ChaCha8Rng, max_len: usize, max_index: usize) -> SparseVec {
    let len = rng.gen_range(1..=max_len);
    let mut pairs: Vec<(usize, f64)> =
        (0..len).map(|_| (rng.gen_range(1..=max_index), rng.gen_range(-1.0..=1.0))).collect();
    pairs.sort_by_key(|&(i, _)| i);
    pairs.dedup_by_key(|&mut (i, _)| i);
    SparseVec::from_pairs(pairs).unwrap()
}

#[test]
fn criterion_01_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst, mut count) = (0.0f64, 0);
    for p in both() {
        for _ in 0..200 {
            let x = random_sparse(&mut rng, 8, 16);
            worst = worst.max((ts_norm(&x, &p).unwrap() - ts_norm_oracle(&x, &p).unwrap()).abs());
            count += 1;
        }
    }
    let detail = format!("{count} vectors, max |dp - oracle| = {worst:e}");
    report(1, "oracle equivalence", worst <= 1e-9, detail, start, 60);
}

#[test]
fn criterion_02_norm_sandwich() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut violations = 0;
    for p in both() {
        for _ in 0..1000 {
            let x = random_sparse(&mut rng, 16, 48);
            let ts = ts_norm(&x, &p).unwrap();
            if !(x.linf() <= ts + 1e-12 && ts <= x.lp(p.r) + 1e-9) {
                violations += 1;
            }
        }
    }
    report(2, "norm sandwich", violations == 0, format!("2000 vectors, {violations} violations"), start, 30);
}

#[test]
fn criterion_03_branching_bound() {
    let start = Instant::now();
    let mut slack = f64::INFINITY;
    for (p, jmax) in [(Params::example_n2(), 4u32), (Params::example_n3(), 3)] {
        for j in 0..=jmax {
            let v = ts_norm(&SparseVec::ones(p.n.pow(j)), &p).unwrap();
            slack = slack.min(v - p.weight_sum().powi(j as i32));
        }
    }
    report(3, "branching bound", slack >= -1e-9, format!("min ts - (Σb)^j = {slack:e}"), start, 60);
}

#[test]
fn criterion_04_extremal_vectors() {
    let start = Instant::now();
    let p = Params::example_n2();
    let (mut ts_err, mut closed_err, mut decay_ok) = (0.0f64, 0.0f64, true);
    for l in 0..=5u32 {
        let x = prop14_vector(&p, l, 1 << 16).unwrap();
        ts_err = ts_err.max((ts_norm(&x, &p).unwrap() - 1.0).abs());
        let lp = x.lp(4.0);
        // Σ b_i^{r' p'/r} summed directly
        let base: f64 = p.b.iter().map(|b| b.powf(p.r_conj * 4.0 / p.r)).sum();
        closed_err = closed_err.max((lp - base.powf(l as f64 / 4.0)).abs());
        if l > 0 {
            decay_ok &= lp < 0.93f64.powi(l as i32);
        }
    }
    let ok = ts_err <= 1e-9 && closed_err <= 1e-12 && decay_ok;
    let detail = format!("|ts - 1| ≤ {ts_err:e}, closed-form error {closed_err:e}, below 0.93^l: {decay_ok}");
    report(4, "extremal vectors", ok, detail, start, 60);
}

#[test]
fn criterion_05_extension_bound() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for p in both() {
        let mut reg = GammaRegistry::new(Filters::default());
        let mut worst = 0.0f64;
        let mut checked = 0;
        while reg.gamma_len(reg.stages()) <= 2000 {
            let m = reg.stages();
            for q in 1..=m {
                worst = worst.max(op_norm_i(q, m, &reg, &p).unwrap());
            }
            checked = m;
            reg.build_stage(&p).unwrap();
        }
        ok &= worst <= p.c + 1e-9;
        lines.push(format!("n={}: {checked} stages, max ‖i‖ = {worst:.6} ≤ C = {:.6}", p.n, p.c));
    }
    report(5, "extension bound", ok, lines.join("; "), start, 120);
}

fn close(a: &BDVec, b: &BDVec) -> bool {
    a.values().len() == b.values().len() && a.values().iter().zip(b.values()).all(|(x, y)| (x - y).abs() <= 1e-12)
}

#[test]
fn criterion_06_fdd_algebra() {
    let start = Instant::now();
    let (mut failures, mut worst) = (0, 0.0f64);
    for p in both() {
        let reg = GammaRegistry::build(&p, Filters::none(), 4).unwrap();
        for m in 1..=4 {
            let intervals: Vec<(usize, usize)> = (0..m).flat_map(|a| (a + 1..=m).map(move |b| (a, b))).collect();
            for &id in reg.gamma(m) {
                let x = BDVec::unit(&reg, id, m).unwrap();
                let mut sum = BDVec::zeros(&reg, m).unwrap();
                for q in 1..=m {
                    sum = sum.axpy(1.0, &project(&x, q - 1, q, &reg, &p).unwrap()).unwrap();
                }
                failures += usize::from(!close(&sum, &x));
                for &(a, b) in &intervals {
                    let pj = project(&x, a, b, &reg, &p).unwrap();
                    for &(c, d) in &intervals {
                        let (lo, hi) = (a.max(c), b.min(d));
                        let rhs = if lo < hi {
                            project(&x, lo, hi, &reg, &p).unwrap()
                        } else {
                            BDVec::zeros(&reg, m).unwrap()
                        };
                        failures += usize::from(!close(&project(&pj, c, d, &reg, &p).unwrap(), &rhs));
                    }
                }
                let mut c = Coords::new(&reg, &p, &x);
                for &g in reg.gamma(m) {
                    failures += usize::from((c.e_star(g) - c.c_star(g) - c.d_star(g)).abs() > 1e-12);
                }
            }
            for &(a, b) in &intervals {
                let norm = op_norm_projection(a, b, m, &reg, &p).unwrap();
                worst = worst.max(norm / (2.0 * p.c));
                failures += usize::from(norm > 2.0 * p.c + 1e-9);
            }
        }
    }
    let detail = format!("{failures} failures, max ‖P_I‖/(2C) = {worst:.6}");
    report(6, "FDD algebra", failures == 0, detail, start, 60);
}

#[test]
fn criterion_07_analysis_identities() {
    let start = Instant::now();
    let (mut eval_worst, mut tree_worst, mut pairs) = (0.0f64, 0.0f64, 0usize);
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for p in both() {
        let reg = GammaRegistry::build(&p, Filters::none(), 4).unwrap();
        let mut vectors: Vec<BDVec> = reg.gamma(4).iter().map(|&id| BDVec::fdd_basis(&reg, id).unwrap()).collect();
        for _ in 0..100 {
            let lo = rng.gen_range(0..4);
            let hi = rng.gen_range(lo + 1..=4);
            let mut values = vec![0.0; reg.gamma_len(hi)];
            for v in values.iter_mut().skip(reg.gamma_len(lo)) {
                *v = rng.gen_range(-1.0..1.0);
            }
            vectors.push(BDVec::from_values(&reg, hi, values).unwrap());
        }
        for &g in reg.gamma(4) {
            let eval = evaluation_analysis(g, &reg).unwrap();
            let tree = tree_analysis(g, &reg).unwrap();
            for x in &vectors {
                let mut c = Coords::new(&reg, &p, x);
                eval_worst = eval_worst.max((c.e_star(g) - eval.reconstruct(&mut c, &p)).abs());
                let l4 = lemma4_eval(&tree, x, &reg, &p).unwrap();
                tree_worst = tree_worst.max(l4.residual());
                pairs += 1;
            }
        }
    }
    let ok = eval_worst <= 1e-12 && tree_worst <= 1e-10;
    let detail = format!("{pairs} pairs, reconstruction {eval_worst:e}, telescoping {tree_worst:e}");
    report(7, "analysis identities", ok, detail, start, 120);
}

#[test]
fn criterion_08_lower_estimate() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let (mut worst, mut failed, mut min_ratio) = (f64::NEG_INFINITY, 0, f64::INFINITY);
    for p in both() {
        let mut reg = GammaRegistry::build(&p, Filters::default(), lower_instance_stages(8)).unwrap();
        for _ in 0..50 {
            let inst = lower_instance(&reg, &p, 8, 3, &mut rng).unwrap();
            assert!(inst.phi.is_proper() && inst.phi.height() <= 3);
            let w = witness_gamma(&inst.phi, &inst.blocks, &inst.coeffs, &mut reg, &p).unwrap();
            // |φ(Σ a_k e_k)| recomputed from the functional itself
            let a = SparseVec::from_coeffs(&inst.coeffs);
            let lhs = inst.phi.eval(&a, &p).abs();
            assert!((lhs - w.lhs).abs() <= 1e-12);
            worst = worst.max(lhs - p.c * w.value.abs());
        }
        for _ in 0..25 {
            let inst = lower_instance(&reg, &p, 8, 3, &mut rng).unwrap();
            let r = lower_estimate_check(&inst.blocks, &inst.coeffs, &mut reg, &p).unwrap();
            failed += usize::from(!r.ok);
            min_ratio = min_ratio.min(r.ratio);
        }
    }
    let ok = worst <= 1e-9 && failed == 0;
    let detail = format!(
        "100 witnesses, max |φ(a)| - C|x(γ)| = {worst:.3e}; 50 estimates, {failed} failed, min ratio {min_ratio:.6}"
    );
    report(8, "lower estimate", ok, detail, start, 300);
}

fn m_estimate(p: &Params, seed: u64) -> f64 {
    let (samples, description) = default_m_samples(p, 200, seed).unwrap();
    estimate_m(p, &samples, &description).unwrap().value
}

#[test]
fn criterion_09_upper_estimate() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let (mut pointwise_failed, mut upper_failed, mut worst) = (0, 0, 0.0f64);
    for p in both() {
        let p = p.clone().with_m_est(m_estimate(&p, 109));
        let eps = remark11_eps(&p).unwrap();
        let mut run = recipe_run(&SaturationConfig::new(109, 2), &p, eps, &mut rng).unwrap();
        let s5 = run.s5.clone();
        let k = s5.blocks.len();
        for i in 0..25 {
            let a: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..=1.0)).collect();
            // random nodes, block anchors and norming nodes of the combination
            let gamma = match i % 3 {
                0 => norm_proxy(&s5.blocks, &a, s5.recipe.max_height, &mut run.reg, &p).unwrap().witness.unwrap().gamma,
                1 => s5.blocks[i % k].anchor.unwrap(),
                _ => {
                    let all = run.reg.gamma(run.reg.stages());
                    all[rng.gen_range(0..all.len())]
                }
            };
            let r = prop8_check(gamma, &s5, &a, &run.reg, &p).unwrap();
            pointwise_failed += usize::from(!(r.ok && r.claims_ok));
            worst = worst.max(r.lhs / r.bound);
        }
        for _ in 0..13 {
            let a: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..=1.0)).collect();
            upper_failed += usize::from(!upper_estimate_check(&s5, &a, &mut run.reg, &p).unwrap().ok);
        }
    }
    let ok = pointwise_failed == 0 && upper_failed == 0;
    let detail = format!(
        "50 pointwise checks, {pointwise_failed} failed, max lhs/bound = {worst:.4}; 26 upper checks, {upper_failed} failed"
    );
    report(9, "upper estimate", ok, detail, start, 300);
}

#[test]
fn criterion_10_saturation_envelope() {
    let start = Instant::now();
    let p = Params::example_n2();
    let (mut outside, mut irreproducible, mut rows) = (0, 0, 0);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for seed in 1..=10 {
        let config = SaturationConfig::new(seed, 2);
        let report = saturation_experiment(&config, &p).unwrap();
        let (env_lo, env_hi) = report.envelope;
        // the envelope recomputed from the run's own M estimate
        let m = report.m_est.value;
        assert!((env_lo - m / p.c).abs() <= 1e-9 + p.tol);
        assert!((env_hi - 6.0 * p.c / (p.b[p.n - 1] * m)).abs() <= 1e-9 + p.tol);
        for row in &report.rows {
            let lr = row.coeffs.iter().map(|a| a.abs().powf(p.r)).sum::<f64>().powf(1.0 / p.r);
            assert!((row.ratio - row.bd / lr).abs() <= 1e-12);
            outside += usize::from(!(env_lo <= row.ratio && row.ratio <= env_hi));
            lo = lo.min(row.ratio);
            hi = hi.max(row.ratio);
            rows += 1;
        }
        let again = saturation_experiment(&config, &p).unwrap();
        irreproducible += usize::from(again.to_csv() != report.to_csv());
    }
    let ok = outside == 0 && irreproducible == 0;
    let detail =
        format!("10 runs, {rows} ratios in [{lo:.6}, {hi:.6}], {outside} outside, {irreproducible} irreproducible");
    report(10, "saturation envelope", ok, detail, start, 600);
}
