use bdx::analysis::{evaluation_analysis, lemma4_eval, tree_analysis};
use bdx::bd::{d_star, op_norm_i, op_norm_projection, project, BDVec, Coords, Filters, GammaRegistry};
use bdx::estimates::{
    default_m_samples, estimate_m, fmt_sig, lower_estimate_check, lower_instance, lower_instance_stages, norm_proxy,
    prop14_suite, prop8_check, recipe_run, remark11_eps, upper_estimate_check, witness_gamma, SaturationConfig,
};
use bdx::tsirelson::{
    branching_functional, eval_functional, lr_sandwich, ts_norm, ts_norm_oracle, ts_norm_with_witness, SparseVec,
};
use bdx::weights::validate;
use bdx::{Error, Params};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commands::CliError;
use crate::Suite;

const SIZE_CAP: usize = 1 << 16;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

fn check(name: &str, ok: bool, detail: String) -> Check {
    Check { name: name.to_string(), ok, detail }
}

/// A failed computation becomes a failed check rather than an abort.
fn guarded(name: &str, f: impl FnOnce() -> Result<(bool, String), Error>) -> Check {
    match f() {
        Ok((ok, detail)) => check(name, ok, detail),
        Err(e) => check(name, false, format!("error: {e}")),
    }
}

pub fn run(suite: Suite, p: &Params, stages: usize, seed: u64) -> Result<Vec<Check>, CliError> {
    let all = [Suite::Tsirelson, Suite::Bd, Suite::Analysis, Suite::Lower, Suite::Upper, Suite::Prop14];
    let selected: Vec<Suite> = if suite == Suite::All { all.to_vec() } else { vec![suite] };
    let mut out = vec![check("params/valid", validate(p).is_ok(), validate(p).to_string())];
    for s in selected {
        out.extend(match s {
            Suite::Tsirelson => tsirelson(p, seed),
            Suite::Bd => bd(p, stages),
            Suite::Analysis => analysis(p, stages, seed),
            Suite::Lower => lower(p, seed),
            Suite::Upper => upper(p, seed),
            Suite::Prop14 => prop14(p),
            Suite::All => unreachable!("expanded above"),
        });
    }
    Ok(out)
}

fn random_sparse(rng: &mut ChaCha8Rng, max_len: usize, max_index: usize) -> SparseVec {
    let len = rng.gen_range(1..=max_len);
    let pairs = (0..len).map(|_| (rng.gen_range(1..=max_index), rng.gen_range(-1.0..=1.0)));
    let mut pairs: Vec<(usize, f64)> = pairs.collect();
    pairs.sort_by_key(|&(i, _)| i);
    pairs.dedup_by_key(|&mut (i, _)| i);
    SparseVec::from_pairs(pairs).expect("distinct finite entries")
}

fn tsirelson(p: &Params, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let oracle = guarded("tsirelson/oracle", || {
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let x = random_sparse(&mut rng, 8, 14);
            worst = worst.max((ts_norm(&x, p)? - ts_norm_oracle(&x, p)?).abs());
        }
        Ok((worst <= 1e-9, format!("200 vectors, max diff {}", fmt_sig(worst))))
    });
    let sandwich = guarded("tsirelson/sandwich", || {
        let mut bad = 0;
        for _ in 0..1000 {
            let s = lr_sandwich(&random_sparse(&mut rng, 16, 40), p)?;
            if !(s.lower <= s.value + 1e-12 && s.value <= s.upper + 1e-9) {
                bad += 1;
            }
        }
        Ok((bad == 0, format!("1000 vectors, {bad} violations")))
    });
    let witness = guarded("tsirelson/witness", || {
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let x = random_sparse(&mut rng, 12, 30);
            let (v, phi) = ts_norm_with_witness(&x, p)?;
            let attained = phi.map_or(0.0, |phi| eval_functional(&phi, &x, p));
            worst = worst.max((v - attained).abs());
        }
        Ok((worst <= 1e-9, format!("100 vectors, max gap {}", fmt_sig(worst))))
    });
    let jmax = match p.n {
        2 => 4,
        3 => 3,
        _ => 2,
    };
    let branching = guarded("tsirelson/branching", || {
        let mut worst = f64::INFINITY;
        for j in 0..=jmax {
            let x = SparseVec::ones(p.n.pow(j));
            let bound = p.weight_sum().powi(j as i32);
            worst = worst.min(ts_norm(&x, p)? - bound);
            let f = branching_functional(p, j, SIZE_CAP)?;
            worst = worst.min(-(eval_functional(&f, &x, p) - bound).abs());
        }
        Ok((worst >= -1e-9, format!("j <= {jmax}, min slack {}", fmt_sig(worst))))
    });
    vec![oracle, sandwich, witness, branching]
}

/// Exhaustive up to stage 4; later stages only exist filtered at desk scale.
fn suite_registry(p: &Params, stages: usize) -> Result<GammaRegistry, Error> {
    let filters = if stages <= 4 { Filters::none() } else { Filters::default() };
    GammaRegistry::build(p, filters, stages)
}

fn close(a: &BDVec, b: &BDVec, tol: f64) -> bool {
    a.values().len() == b.values().len() && a.values().iter().zip(b.values()).all(|(x, y)| (x - y).abs() <= tol)
}

fn bd(p: &Params, stages: usize) -> Vec<Check> {
    let reg = match suite_registry(p, stages) {
        Ok(reg) => reg,
        Err(e) => return vec![check("bd/build", false, format!("error: {e}"))],
    };
    let sizes: Vec<String> = (1..=stages).map(|q| reg.gamma_len(q).to_string()).collect();
    let mut out = vec![check("bd/build", true, format!("|Γ_q| = {}", sizes.join(" ")))];
    out.push(guarded("bd/dump", || {
        let back = GammaRegistry::load(&reg.dump(), p, reg.filters().clone())?;
        Ok((back.dump() == reg.dump(), format!("{} nodes", reg.len())))
    }));
    out.push(guarded("bd/extension-bound", || {
        let mut worst = 0.0f64;
        for m in 1..=stages {
            for q in 1..=m {
                worst = worst.max(op_norm_i(q, m, &reg, p)?);
            }
        }
        let filtered = GammaRegistry::build(p, Filters::default(), 16)?;
        for m in (1..=16).filter(|&m| filtered.gamma_len(m) <= 2000) {
            for q in 1..=m {
                worst = worst.max(op_norm_i(q, m, &filtered, p)?);
            }
        }
        Ok((worst <= p.c + 1e-9, format!("max ‖i_q,m‖ {} against C = {}", fmt_sig(worst), fmt_sig(p.c))))
    }));
    out.push(guarded("bd/fdd-algebra", || {
        let m = stages;
        let intervals: Vec<(usize, usize)> = (0..m).flat_map(|a| (a + 1..=m).map(move |b| (a, b))).collect();
        let mut bad = 0;
        for &id in reg.gamma(m) {
            let x = BDVec::unit(&reg, id, m)?;
            let mut sum = BDVec::zeros(&reg, m)?;
            for q in 1..=m {
                sum = sum.axpy(1.0, &project(&x, q - 1, q, &reg, p)?)?;
            }
            bad += usize::from(!close(&sum, &x, 1e-12));
            for &(a, b) in &intervals {
                let pj = project(&x, a, b, &reg, p)?;
                for &(c, d) in &intervals {
                    let (lo, hi) = (a.max(c), b.min(d));
                    let rhs = if lo < hi { project(&x, lo, hi, &reg, p)? } else { BDVec::zeros(&reg, m)? };
                    bad += usize::from(!close(&project(&pj, c, d, &reg, p)?, &rhs, 1e-12));
                }
            }
            let basis = BDVec::fdd_basis(&reg, id)?;
            let mut c = Coords::new(&reg, p, &x);
            for &g in reg.gamma(m) {
                bad += usize::from((c.e_star(g) - c.c_star(g) - c.d_star(g)).abs() > 1e-12);
                let kron = if g == id { 1.0 } else { 0.0 };
                bad += usize::from((d_star(g, &basis, &reg, p)? - kron).abs() > 1e-12);
            }
        }
        let mut worst = 0.0f64;
        for &(a, b) in &intervals {
            worst = worst.max(op_norm_projection(a, b, m, &reg, p)?);
        }
        let ok = bad == 0 && worst <= 2.0 * p.c + 1e-9;
        Ok((ok, format!("{bad} identity failures, max ‖P_I‖ {}", fmt_sig(worst))))
    }));
    out
}

fn analysis(p: &Params, stages: usize, seed: u64) -> Vec<Check> {
    vec![guarded("analysis/identities", || {
        let reg = suite_registry(p, stages)?;
        let m = stages;
        let mut vectors: Vec<BDVec> =
            reg.gamma(m).iter().map(|&id| BDVec::fdd_basis(&reg, id)).collect::<Result<_, _>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let lo = rng.gen_range(0..m);
            let hi = rng.gen_range(lo + 1..=m);
            let mut values = vec![0.0; reg.gamma_len(hi)];
            for v in values.iter_mut().skip(reg.gamma_len(lo)) {
                *v = rng.gen_range(-1.0..1.0);
            }
            vectors.push(BDVec::from_values(&reg, hi, values)?);
        }
        let (mut eval_worst, mut tree_worst) = (0.0f64, 0.0f64);
        for &g in reg.gamma(m) {
            let eval = evaluation_analysis(g, &reg)?;
            let tree = tree_analysis(g, &reg)?;
            for x in &vectors {
                let mut c = Coords::new(&reg, p, x);
                eval_worst = eval_worst.max((c.e_star(g) - eval.reconstruct(&mut c, p)).abs());
                let l4 = lemma4_eval(&tree, x, &reg, p)?;
                tree_worst = tree_worst.max(l4.residual()).max(l4.ancestor_g);
            }
        }
        let ok = eval_worst <= 1e-12 && tree_worst <= 1e-10;
        let detail = format!(
            "{} nodes x {} vectors, residuals {} and {}",
            reg.gamma_len(m),
            vectors.len(),
            fmt_sig(eval_worst),
            fmt_sig(tree_worst)
        );
        Ok((ok, detail))
    })]
}

fn lower(p: &Params, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reg = match GammaRegistry::build(p, Filters::default(), lower_instance_stages(8)) {
        Ok(reg) => reg,
        Err(e) => return vec![check("lower/build", false, format!("error: {e}"))],
    };
    let witnesses = guarded("lower/witness", || {
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let inst = lower_instance(&reg, p, 8, 3, &mut rng)?;
            let w = witness_gamma(&inst.phi, &inst.blocks, &inst.coeffs, &mut reg, p)?;
            worst = worst.max(w.lhs - p.c * w.value.abs());
        }
        Ok((worst <= 1e-9, format!("50 instances, max |φ(a)| − C|x(γ)| {}", fmt_sig(worst))))
    });
    let estimates = guarded("lower/estimate", || {
        let mut failed = 0;
        let mut min_ratio = f64::INFINITY;
        for _ in 0..25 {
            let inst = lower_instance(&reg, p, 8, 3, &mut rng)?;
            let r = lower_estimate_check(&inst.blocks, &inst.coeffs, &mut reg, p)?;
            failed += usize::from(!r.ok);
            min_ratio = min_ratio.min(r.ratio);
        }
        Ok((failed == 0, format!("25 instances, {failed} failures, min ‖Σa x‖/‖Σa e‖ {}", fmt_sig(min_ratio))))
    });
    vec![witnesses, estimates]
}

fn upper(p: &Params, seed: u64) -> Vec<Check> {
    vec![guarded("upper/pointwise+estimate", || {
        let (samples, description) = default_m_samples(p, 200, seed)?;
        let m = estimate_m(p, &samples, &description)?;
        let p = p.clone().with_m_est(m.value);
        let eps = remark11_eps(&p)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut run = recipe_run(&SaturationConfig::new(seed, 2), &p, eps, &mut rng)?;
        let s5 = run.s5.clone();
        let k = s5.blocks.len();
        let mut failed = 0;
        let mut worst = 0.0f64;
        for i in 0..50 {
            let a: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..=1.0)).collect();
            let gamma = if i % 5 == 4 {
                let proxy = norm_proxy(&s5.blocks, &a, s5.recipe.max_height, &mut run.reg, &p)?;
                proxy.witness.map(|w| w.gamma).unwrap_or(run.reg.member(0))
            } else {
                let all = run.reg.gamma(run.reg.stages());
                all[rng.gen_range(0..all.len())]
            };
            let r = prop8_check(gamma, &s5, &a, &run.reg, &p)?;
            failed += usize::from(!(r.ok && r.claims_ok));
            worst = worst.max(r.lhs / r.bound.max(f64::MIN_POSITIVE));
        }
        for _ in 0..25 {
            let a: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..=1.0)).collect();
            failed += usize::from(!upper_estimate_check(&s5, &a, &mut run.reg, &p)?.ok);
        }
        Ok((
            failed == 0,
            format!("M_est {}, 75 checks, {failed} failures, max lhs/bound {}", fmt_sig(m.value), fmt_sig(worst)),
        ))
    })]
}

fn prop14(p: &Params) -> Vec<Check> {
    let lmax = if p.n == 2 { 5 } else { 3 };
    vec![guarded("prop14/extremals", || {
        let report = prop14_suite(p, lmax, &[4.0])?;
        Ok((report.ok(), format!("l <= {lmax}, decay factor at p' = 4: {}", fmt_sig(report.decay[0].1))))
    })]
}
