use serde::Serialize;

use crate::bd::{Coords, GammaId, GammaKind, GammaRegistry};
use crate::error::Result;
use crate::weights::Params;

/// One link `(p_i, q_i, ε_i, ξ_i)` of the chain defining `γ`, with the chain
/// node `η_i` of rank `q_i + 1` and its weight index `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalysisEntry {
    pub index: usize,
    pub p: usize,
    pub q: usize,
    pub eps: f64,
    pub xi: GammaId,
    pub eta: GammaId,
}

/// `e*_γ = Σ_η d*_η + Σ_i b_i ε_i e*_{ξ_i} ∘ P_{(p_i, q_i]}`.
///
/// `etas` lists every `η_i`, including the age-1 seed `η_1`; for the base
/// node the chain is empty and `etas = [γ]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationAnalysis {
    pub gamma: GammaId,
    pub age: usize,
    pub entries: Vec<AnalysisEntry>,
    pub etas: Vec<GammaId>,
}

impl EvaluationAnalysis {
    /// The age-1 seed `η_1`, absent from the chain of the base node.
    pub fn bootstrap_eta(&self) -> Option<GammaId> {
        self.entries.first().map(|e| e.eta)
    }

    /// Right-hand side of the reconstruction identity at `x`.
    pub fn reconstruct(&self, coords: &mut Coords<'_>, params: &Params) -> f64 {
        let g: f64 = self.etas.iter().map(|&eta| coords.d_star(eta)).sum();
        let f: f64 = self.entries.iter().map(|e| params.weight(e.index) * e.eps * coords.proj(e.xi, e.p, e.q)).sum();
        f + g
    }
}

/// Unrolls the `η`-chain of `γ` backwards from `η_a = γ`.
pub fn evaluation_analysis(gamma: GammaId, reg: &GammaRegistry) -> Result<EvaluationAnalysis> {
    let mut entries = Vec::new();
    let mut current = gamma;
    loop {
        let node = reg.node(current)?;
        let q = node.rank - 1;
        match node.kind {
            GammaKind::Base => break,
            GammaKind::Age1 { p, eps, xi } => {
                entries.push(AnalysisEntry { index: 1, p, q, eps: eps as f64, xi, eta: current });
                break;
            }
            GammaKind::AgeA { a, p, eta, eps, xi } => {
                entries.push(AnalysisEntry { index: a, p, q, eps: eps as f64, xi, eta: current });
                current = eta;
            }
        }
    }
    entries.reverse();
    let etas = if entries.is_empty() { vec![gamma] } else { entries.iter().map(|e| e.eta).collect() };
    Ok(EvaluationAnalysis { gamma, age: entries.len().max(1), entries, etas })
}

/// The `r`-analysis of `e*_γ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RAnalysis {
    /// `r ≤ p_1`: the evaluation analysis itself.
    Full(EvaluationAnalysis),
    /// `r ≥ q_a`.
    Indecomposable,
    /// `p_1 < r < q_a`: entries from `i_r = min{i : r < q_i}` on, the first
    /// cut raised to `r` when `r > p_{i_r}`.
    Truncated {
        i_r: usize,
        entries: Vec<AnalysisEntry>,
        etas: Vec<GammaId>,
        /// `η_{i_r − 1}` when its rank is `r + 1`; it is the only dropped
        /// chain node that a vector ranged in `(r, ·]` can see.
        boundary_eta: Option<GammaId>,
    },
}

pub fn r_analysis(gamma: GammaId, r: usize, reg: &GammaRegistry) -> Result<RAnalysis> {
    let full = evaluation_analysis(gamma, reg)?;
    let q_a = reg.node(gamma)?.rank - 1;
    if r >= q_a || full.entries.is_empty() {
        return Ok(RAnalysis::Indecomposable);
    }
    if r <= full.entries[0].p {
        return Ok(RAnalysis::Full(full));
    }
    // r < q_a = q_{last} keeps the minimum well defined
    let pos = full.entries.iter().position(|e| r < e.q).expect("r < q_a");
    let mut entries = full.entries[pos..].to_vec();
    if r > entries[0].p {
        entries[0].p = r;
    }
    let boundary_eta = pos.checked_sub(1).map(|i| full.entries[i]).filter(|e| e.q == r).map(|e| e.eta);
    let etas = entries.iter().map(|e| e.eta).collect();
    Ok(RAnalysis::Truncated { i_r: pos + 1, entries, etas, boundary_eta })
}
