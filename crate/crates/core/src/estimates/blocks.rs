use rand::Rng;

use crate::bd::{bd_sup_norm, extend, fdd_support, BDVec, GammaId, GammaRegistry};
use crate::error::{Error, Result};
use crate::weights::Params;

/// A block vector with its FDD range `[lo, hi]`.
///
/// `anchor` is a node already known to norm the block; witness constructions
/// consider it next to the materialized nodes of the range.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub vec: BDVec,
    pub lo: usize,
    pub hi: usize,
    pub anchor: Option<GammaId>,
}

impl Block {
    /// Reads the range off the FDD support; `None` for the zero vector.
    pub fn from_vec(vec: BDVec, reg: &GammaRegistry, params: &Params) -> Option<Self> {
        let support = fdd_support(&vec, reg, params, params.tol);
        let (lo, hi) = (*support.first()?, *support.last()?);
        Some(Block { vec, lo, hi, anchor: None })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Block { vec: self.vec.scale(s), ..self.clone() }
    }
}

/// `Σ a_k x_k`, at the largest stage among the blocks.
pub fn combine(blocks: &[Block], coeffs: &[f64], reg: &GammaRegistry, params: &Params) -> Result<BDVec> {
    if blocks.len() != coeffs.len() {
        return Err(Error::DimensionMismatch { expected: blocks.len(), got: coeffs.len() });
    }
    let stage = blocks.iter().map(|b| b.vec.stage()).max().unwrap_or(1);
    let mut acc = BDVec::zeros(reg, stage)?;
    for (b, &a) in blocks.iter().zip(coeffs) {
        if a != 0.0 {
            acc = acc.axpy(a, &lift(&b.vec, stage, reg, params)?)?;
        }
    }
    Ok(acc)
}

/// `extend`, skipping the work when the stage already matches.
pub(crate) fn lift(x: &BDVec, stage: usize, reg: &GammaRegistry, params: &Params) -> Result<BDVec> {
    if x.stage() == stage {
        Ok(x.clone())
    } else {
        extend(x, stage, reg, params)
    }
}

/// A vector at stage `hi` with uniform coefficients in `[−1, 1]` on
/// `Δ_lo ∪ … ∪ Δ_hi` and zeros below; its FDD support lies in `[lo, hi]`.
pub fn random_window_vector<R: Rng>(reg: &GammaRegistry, lo: usize, hi: usize, rng: &mut R) -> Result<BDVec> {
    if lo == 0 || lo > hi {
        return Err(Error::BadInterval { p: lo, q: hi, m: reg.stages() });
    }
    let mut values = vec![0.0; reg.gamma_len(hi.min(reg.stages()))];
    for v in values.iter_mut().skip(reg.gamma_len(lo - 1)) {
        *v = rng.gen_range(-1.0..=1.0);
    }
    BDVec::from_values(reg, hi, values)
}

/// Rank windows of a block sequence together with the cut sequence `(q_k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub windows: Vec<(usize, usize)>,
    pub qs: Vec<usize>,
}

impl Layout {
    /// `supp x_k ⊂ (q_k + k, q_{k+1})` with `q_1 = 0`: block `k` starts at
    /// `q_k + k + 1` and spans `width` ranks, so consecutive blocks are
    /// separated by `k + 2` empty ranks.
    pub fn gapped(count: usize, width: usize) -> Self {
        let width = width.max(1);
        let mut qs = vec![0];
        let mut windows = Vec::with_capacity(count);
        for k in 1..=count {
            let lo = qs[k - 1] + k + 1;
            let hi = lo + width - 1;
            windows.push((lo, hi));
            qs.push(hi + 1);
        }
        Layout { windows, qs }
    }

    /// Single-rank windows starting at `start`, separated by `gap` empty ranks.
    /// No cut sequence is attached; `qs` is empty.
    pub fn uniform(count: usize, start: usize, gap: usize) -> Self {
        let windows = (0..count).map(|i| start + i * (gap + 1)).map(|r| (r, r)).collect();
        Layout { windows, qs: Vec::new() }
    }

    /// Last rank used by the layout.
    pub fn top(&self) -> usize {
        self.windows.last().map_or(0, |w| w.1)
    }
}

/// Random blocks on `layout`, each normalized to sup norm 1 at `horizon`.
pub fn random_blocks<R: Rng>(
    layout: &Layout,
    horizon: usize,
    reg: &GammaRegistry,
    params: &Params,
    rng: &mut R,
) -> Result<Vec<Block>> {
    let mut out = Vec::with_capacity(layout.windows.len());
    for &(lo, hi) in &layout.windows {
        let x = random_window_vector(reg, lo, hi, rng)?;
        let norm = bd_sup_norm(&x, horizon, reg, params)?.value;
        let x = x.scale(1.0 / norm);
        out.push(Block::from_vec(x, reg, params).ok_or(Error::EmptyWindow { lo, hi })?);
    }
    Ok(out)
}
