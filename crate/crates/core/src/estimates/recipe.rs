use rand::Rng;
use serde::Serialize;

use crate::bd::{bd_sup_norm, BDVec, GammaId, GammaRegistry};
use crate::error::{Error, Result};
use crate::estimates::blocks::lift;
use crate::estimates::witness::{block_peak, witness_with};
use crate::estimates::{combine, random_blocks, Block, Layout, Witness};
use crate::tsirelson::{ts_norm_capped, SparseVec};
use crate::weights::Params;

/// Lower bound for `‖Σ a_k x_k‖`: the larger of the materialized sup and the
/// value at the witness of the best height-capped functional on the profile
/// `(|a_k x_k(peak_k)|)_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormProxy {
    pub sup: f64,
    pub witness: Option<Witness>,
    pub value: f64,
}

fn proxy_with(
    blocks: &[Block],
    peaks: &[(GammaId, f64)],
    x: &BDVec,
    coeffs: &[f64],
    max_height: usize,
    reg: &mut GammaRegistry,
    params: &Params,
) -> Result<NormProxy> {
    let sup = bd_sup_norm(x, reg.stages(), reg, params)?.value;
    let profile: Vec<f64> = peaks.iter().zip(coeffs).map(|(p, a)| (p.1 * a).abs()).collect();
    let (_, phi) = ts_norm_capped(&SparseVec::from_coeffs(&profile), params, max_height)?;
    let witness = match phi {
        None => None,
        Some(phi) => {
            let ids: Vec<Option<GammaId>> = peaks.iter().map(|p| Some(p.0)).collect();
            Some(witness_with(&phi, blocks, &ids, x, coeffs, reg, params)?)
        }
    };
    let value = witness.as_ref().map_or(sup, |w| sup.max(w.value.abs()));
    Ok(NormProxy { sup, witness, value })
}

/// [`NormProxy`] of `Σ a_k x_k`; block gaps must exceed `max_height + 1`.
pub fn norm_proxy(
    blocks: &[Block],
    coeffs: &[f64],
    max_height: usize,
    reg: &mut GammaRegistry,
    params: &Params,
) -> Result<NormProxy> {
    let x = combine(blocks, coeffs, reg, params)?;
    let peaks = blocks.iter().map(|b| block_peak(b, reg, params)).collect::<Result<Vec<_>>>()?;
    proxy_with(blocks, &peaks, &x, coeffs, max_height, reg, params)
}

/// `ε_k`, `n_k`, `F_k` and `λ_k` of the block renormalization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockRecipe {
    pub eps: f64,
    /// `ε_k = ε 2^{−k}`.
    pub eps_seq: Vec<f64>,
    /// `n_k = ⌈1/ε_k⌉ + k`.
    pub n_seq: Vec<usize>,
    /// Indices into the supply, 0-based.
    pub f_seq: Vec<Vec<usize>>,
    /// `λ_k = 1 / ‖Σ_{l ∈ F_k} y_l‖`.
    pub lambda: Vec<f64>,
    pub norms: Vec<f64>,
    pub max_height: usize,
}

impl BlockRecipe {
    /// `Σ ε_k < ε`, `1/n_k < ε_k`, `‖Σ_{F_k} y‖ > n_k` and `λ_k < ε_k`.
    pub fn invariants_hold(&self) -> bool {
        let k = self.norms.len();
        self.eps_seq.iter().sum::<f64>() < self.eps
            && self.n_seq.windows(2).all(|w| w[0] < w[1])
            && (0..k).all(|i| {
                let n_i = self.n_seq[i] as f64;
                1.0 / n_i < self.eps_seq[i] && self.norms[i] > n_i && self.lambda[i] < self.eps_seq[i]
            })
            && self.f_seq.windows(2).all(|w| w[0].last() < w[1].first())
    }
}

/// The recipe together with the normalized blocks `x_k = λ_k Σ_{F_k} y_l`.
#[derive(Debug, Clone)]
pub struct Section5Blocks {
    pub recipe: BlockRecipe,
    pub blocks: Vec<Block>,
}

/// Grows each `F_k` greedily over the supply until `‖Σ_{F_k} y_l‖ > n_k`.
///
/// Norms are [`NormProxy`] values with functionals capped at `max_height`;
/// one supply block is left out between consecutive `F_k` so that the gaps
/// between the `x_k` also hold the witnesses of the `x_k` themselves.
pub fn build_section5_blocks(
    ys: &[Block],
    eps: f64,
    count: usize,
    max_height: usize,
    reg: &mut GammaRegistry,
    params: &Params,
) -> Result<Section5Blocks> {
    let peaks = ys.iter().map(|y| block_peak(y, reg, params)).collect::<Result<Vec<_>>>()?;
    let mut recipe = BlockRecipe {
        eps,
        eps_seq: Vec::new(),
        n_seq: Vec::new(),
        f_seq: Vec::new(),
        lambda: Vec::new(),
        norms: Vec::new(),
        max_height,
    };
    let mut blocks = Vec::with_capacity(count);
    let mut cursor = 0;
    for k in 1..=count {
        let eps_k = eps / 2f64.powi(k as i32);
        let n_k = (1.0 / eps_k).ceil() as usize + k;
        let start = cursor;
        let mut sum: Option<BDVec> = None;
        let mut reached = 0.0;
        let proxy = loop {
            let Some(y) = ys.get(cursor) else {
                return Err(Error::SupplyExhausted { block: k, target: n_k as f64, reached });
            };
            cursor += 1;
            let stage = y.vec.stage();
            sum = Some(match sum {
                None => y.vec.clone(),
                Some(s) => lift(&s, stage, reg, params)?.axpy(1.0, &lift(&y.vec, stage, reg, params)?)?,
            });
            let ones = vec![1.0; cursor - start];
            let x = sum.as_ref().expect("just set");
            let proxy = proxy_with(&ys[start..cursor], &peaks[start..cursor], x, &ones, max_height, reg, params)?;
            reached = proxy.value;
            if reached > n_k as f64 {
                break proxy;
            }
        };
        let lambda = 1.0 / proxy.value;
        let vec = sum.expect("at least one block").scale(lambda);
        let anchor = proxy.witness.map(|w| w.gamma);
        blocks.push(Block { vec, lo: ys[start].lo, hi: ys[cursor - 1].hi, anchor });
        recipe.eps_seq.push(eps_k);
        recipe.n_seq.push(n_k);
        recipe.f_seq.push((start..cursor).collect());
        recipe.lambda.push(lambda);
        recipe.norms.push(proxy.value);
        cursor += 1;
    }
    Ok(Section5Blocks { recipe, blocks })
}

/// Empty ranks between supply blocks that leave room for witnesses capped at
/// `max_height`.
pub fn supply_gap(max_height: usize) -> usize {
    max_height + 2
}

/// `count` single-rank random blocks from rank 2 on, normalized at the
/// registry horizon.
pub fn random_supply<R: Rng>(
    count: usize,
    max_height: usize,
    reg: &GammaRegistry,
    params: &Params,
    rng: &mut R,
) -> Result<Vec<Block>> {
    random_blocks(&supply_layout(count, max_height), reg.stages(), reg, params, rng)
}

pub fn supply_layout(count: usize, max_height: usize) -> Layout {
    Layout::uniform(count, 2, supply_gap(max_height))
}
