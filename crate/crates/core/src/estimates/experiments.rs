use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bd::{Filters, GammaRegistry};
use crate::error::{Error, Result};
use crate::estimates::{
    build_section5_blocks, norm_proxy, random_supply, remark11_eps, supply_layout, Block, BlockRecipe, Section5Blocks,
};
use crate::tsirelson::{prop14_lp_closed_form, prop14_vector, ts_norm, ts_norm_capped, SparseVec, DEFAULT_SIZE_CAP};
use crate::weights::Params;

/// `v` with 12 significant digits.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let decimals = (11 - v.abs().log10().floor() as i64).clamp(0, 30) as usize;
    format!("{v:.decimals$}")
}

/// Infimum of `‖a‖_T / ‖a‖_r` over a sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MEstimate {
    pub value: f64,
    /// Index of the minimizing sample.
    pub argmin: usize,
    pub samples: usize,
    pub description: String,
}

pub fn estimate_m(params: &Params, samples: &[SparseVec], description: &str) -> Result<MEstimate> {
    let mut value = f64::INFINITY;
    let mut argmin = 0;
    for (i, a) in samples.iter().enumerate() {
        let lr = a.lp(params.r);
        if lr == 0.0 {
            continue;
        }
        let ratio = ts_norm(a, params)? / lr;
        if ratio < value {
            value = ratio;
            argmin = i;
        }
    }
    Ok(MEstimate { value, argmin, samples: samples.len(), description: description.to_string() })
}

/// `e_1`, the extremal vectors `x_l` with at most 64 entries, `Σ_{l ≤ m} e_l`
/// for `m ≤ 16`, and `count` random vectors of length at most 12 with entries
/// uniform in `[−1, 1]`.
pub fn default_m_samples(params: &Params, count: usize, seed: u64) -> Result<(Vec<SparseVec>, String)> {
    let mut out = vec![SparseVec::unit(1)];
    let mut lmax = 0;
    while let Ok(x) = prop14_vector(params, lmax + 1, 64) {
        out.push(x);
        lmax += 1;
    }
    out.extend((2..=16).map(SparseVec::ones));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let len = rng.gen_range(1..=12);
        let coeffs: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        out.push(SparseVec::from_coeffs(&coeffs));
    }
    let description = format!("e_1; x_l for l <= {lmax}; ones(m) for m <= 16; {count} random (seed {seed})");
    Ok((out, description))
}

/// Knobs of the end-to-end saturation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationConfig {
    pub seed: u64,
    /// Number of renormalized blocks `x_k`.
    pub scale: usize,
    /// Height cap of the witnesses used as norm lower bounds.
    pub max_height: usize,
    pub stage_size: usize,
    pub m_samples: usize,
}

impl SaturationConfig {
    /// Taller witnesses for three or more blocks, whose last group needs
    /// norms above 10.
    pub fn new(seed: u64, scale: usize) -> Self {
        let max_height = if scale <= 2 { 8 } else { 12 };
        SaturationConfig { seed, scale, max_height, stage_size: 8, m_samples: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationRow {
    pub instance: usize,
    pub coeff_hash: String,
    pub coeffs: Vec<f64>,
    pub ts: f64,
    pub bd: f64,
    /// `bd / ‖a‖_r`.
    pub ratio: f64,
    pub horizon: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationReport {
    pub config: SaturationConfig,
    pub m_est: MEstimate,
    pub recipe: BlockRecipe,
    pub supply: usize,
    pub rows: Vec<SaturationRow>,
    /// `[M/C − tol, 6C/(b_n M) + tol]`.
    pub envelope: (f64, f64),
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub ok: bool,
}

impl SaturationReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("instance,coeff_hash,ts,bd,ratio,horizon\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.instance,
                r.coeff_hash,
                fmt_sig(r.ts),
                fmt_sig(r.bd),
                fmt_sig(r.ratio),
                r.horizon
            ));
        }
        out
    }

    /// The full report, configuration and recipe included.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// First 16 hex digits of the SHA-256 of the little-endian coefficient bytes.
pub fn coeff_hash(coeffs: &[f64]) -> String {
    let mut h = Sha256::new();
    for c in coeffs {
        h.update(c.to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

/// Coefficient vectors of one run: equal, the first unit vector, decreasing,
/// and three random ones.
fn coefficient_vectors(k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut out = vec![vec![1.0; k]];
    let mut unit = vec![0.0; k];
    unit[0] = 1.0;
    out.push(unit);
    out.push((1..=k).map(|i| 1.0 / i as f64).collect());
    for _ in 0..3 {
        out.push((0..k).map(|_| rng.gen_range(0.05..=1.0)).collect());
    }
    out
}

/// Largest group `F_k` considered when sizing the supply.
pub const MAX_GROUP: usize = 512;

/// Supply blocks that make `‖Σ_F y‖` pass every `n_k`, assuming peaks of at
/// least 0.8 and one spare block between consecutive `F_k`.
pub fn supply_needed(params: &Params, eps: f64, scale: usize, max_height: usize) -> Result<usize> {
    let mut total = 0;
    for k in 1..=scale {
        let eps_k = eps / 2f64.powi(k as i32);
        let target = ((1.0 / eps_k).ceil() + k as f64) / 0.8;
        let reaches = |m: usize| ts_norm_capped(&SparseVec::ones(m), params, max_height).map(|v| v.0 > target);
        let mut hi = 1;
        while !reaches(hi)? {
            hi *= 2;
            if hi > MAX_GROUP {
                let reached = ts_norm_capped(&SparseVec::ones(MAX_GROUP), params, max_height)?.0;
                return Err(Error::SupplyExhausted { block: k, target, reached });
            }
        }
        let mut lo = hi / 2;
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if reaches(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        total += hi + 1;
    }
    Ok(total)
}

/// Registry, supply and renormalized blocks of one seeded run.
#[derive(Debug, Clone)]
pub struct RecipeRun {
    pub reg: GammaRegistry,
    pub ys: Vec<Block>,
    pub s5: Section5Blocks,
    pub supply: usize,
}

/// Sizes the supply for `config.scale` blocks, builds a registry holding it,
/// draws the supply from `rng` and renormalizes it.
pub fn recipe_run<R: Rng>(config: &SaturationConfig, params: &Params, eps: f64, rng: &mut R) -> Result<RecipeRun> {
    let supply = supply_needed(params, eps, config.scale.max(1), config.max_height)?;
    let layout = supply_layout(supply, config.max_height);
    let filters = Filters { max_stage_size: config.stage_size, ..Filters::default() };
    let mut reg = GammaRegistry::build(params, filters, layout.top() + 2)?;
    let ys = random_supply(supply, config.max_height, &reg, params, rng)?;
    let s5 = build_section5_blocks(&ys, eps, config.scale.max(1), config.max_height, &mut reg, params)?;
    Ok(RecipeRun { reg, ys, s5, supply })
}

/// Random skipped supply, renormalized blocks, and the ratio
/// `‖Σ a_k x_k‖ / ‖a‖_r` for several coefficient vectors, checked against the
/// envelope implied by the lower and upper estimates.
pub fn saturation_experiment(config: &SaturationConfig, params: &Params) -> Result<SaturationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let k = config.scale.max(1);
    let coeffs = coefficient_vectors(k, &mut rng);
    let (mut samples, description) = default_m_samples(params, config.m_samples, config.seed)?;
    samples.extend(coeffs.iter().map(|a| SparseVec::from_coeffs(a)));
    let m_est = estimate_m(params, &samples, &format!("{description}; run coefficients"))?;
    let params = params.clone().with_m_est(m_est.value);
    let eps = remark11_eps(&params)?;

    let RecipeRun { mut reg, s5, supply, .. } = recipe_run(config, &params, eps, &mut rng)?;

    let mut rows = Vec::with_capacity(coeffs.len());
    for (instance, a) in coeffs.iter().enumerate() {
        let proxy = norm_proxy(&s5.blocks, a, config.max_height, &mut reg, &params)?;
        let sa = SparseVec::from_coeffs(a);
        let horizon = proxy.witness.as_ref().map_or(reg.stages(), |w| w.rank.max(reg.stages()));
        rows.push(SaturationRow {
            instance,
            coeff_hash: coeff_hash(a),
            coeffs: a.clone(),
            ts: ts_norm(&sa, &params)?,
            bd: proxy.value,
            ratio: proxy.value / sa.lp(params.r),
            horizon,
        });
    }
    let tol = params.norm_tol;
    let envelope = (m_est.value / params.c - tol, 6.0 * params.c / (params.b_n() * m_est.value) + tol);
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let ok = envelope.0 <= min_ratio && max_ratio <= envelope.1;
    Ok(SaturationReport {
        config: config.clone(),
        m_est,
        recipe: s5.recipe,
        supply,
        rows,
        envelope,
        min_ratio,
        max_ratio,
        ok,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop14Row {
    pub l: u32,
    pub ts: f64,
    pub pprime: f64,
    pub lp: f64,
    pub closed_form: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop14Report {
    pub rows: Vec<Prop14Row>,
    /// `(Σ_i b_i^{r' p'/r})^{1/p'}` for each `p'`.
    pub decay: Vec<(f64, f64)>,
    /// `‖x_l‖ = 1 ± tol` for every `l`.
    pub ts_ok: bool,
    /// `‖x_l‖_{p'}` matches the closed form to `1e−12`.
    pub closed_ok: bool,
    /// Consecutive ratios equal the decay factor, which is below 1.
    pub decay_ok: bool,
}

impl Prop14Report {
    pub fn ok(&self) -> bool {
        self.ts_ok && self.closed_ok && self.decay_ok
    }
}

/// The extremal vectors `x_l`, `l ≤ lmax`, against their norms and `ℓ_{p'}`
/// norms for each `p' > r`.
pub fn prop14_suite(params: &Params, lmax: u32, pprimes: &[f64]) -> Result<Prop14Report> {
    let mut rows = Vec::new();
    let (mut ts_ok, mut closed_ok, mut decay_ok) = (true, true, true);
    let mut decay = Vec::new();
    for &pp in pprimes {
        let factor = prop14_lp_closed_form(params, 1, pp);
        decay_ok &= factor < 1.0;
        decay.push((pp, factor));
    }
    for l in 0..=lmax {
        let x = prop14_vector(params, l, DEFAULT_SIZE_CAP)?;
        let ts = ts_norm(&x, params)?;
        ts_ok &= (ts - 1.0).abs() <= params.norm_tol;
        for &(pp, factor) in &decay {
            let lp = x.lp(pp);
            let closed_form = prop14_lp_closed_form(params, l, pp);
            closed_ok &= (lp - closed_form).abs() <= 1e-12;
            if l > 0 {
                let prev = prop14_lp_closed_form(params, l - 1, pp);
                decay_ok &= (lp / prev - factor).abs() <= 1e-12;
            }
            rows.push(Prop14Row { l, ts, pprime: pp, lp, closed_form });
        }
    }
    Ok(Prop14Report { rows, decay, ts_ok, closed_ok, decay_ok })
}
