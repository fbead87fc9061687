use serde::Serialize;

use crate::bd::{bd_sup_norm, BDVec, Coords, GammaId, GammaNode, GammaRegistry};
use crate::error::{Error, Result};
use crate::estimates::{combine, Block};
use crate::tsirelson::{ts_norm_with_witness, SparseVec, WFunctional};
use crate::weights::Params;

/// A node maximizing `|x(γ)|` over a rank window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub gamma: GammaId,
    pub value: f64,
    /// `‖x‖` at the registry horizon.
    pub norm: f64,
    /// Set for the zero vector, where no lower bound is meaningful.
    pub degenerate: bool,
}

impl Peak {
    /// `|x(γ)| ≥ ‖x‖ / C − tol`.
    pub fn bound_ok(&self, params: &Params) -> bool {
        self.degenerate || self.value.abs() >= self.norm / params.c - params.norm_tol
    }
}

fn window(reg: &GammaRegistry, lo: usize, hi: usize) -> Vec<GammaId> {
    (lo.max(1)..=hi.min(reg.stages())).flat_map(|q| reg.delta(q).iter().copied()).collect()
}

/// First maximizer of `|x(γ)|`; ties keep the earliest candidate.
fn best(coords: &mut Coords<'_>, ids: impl IntoIterator<Item = GammaId>) -> Option<(GammaId, f64)> {
    let mut out: Option<(GammaId, f64)> = None;
    for id in ids {
        let v = coords.e_star(id);
        if out.is_none_or(|(_, b)| v.abs() > b.abs()) {
            out = Some((id, v));
        }
    }
    out
}

/// The materialized node of rank in `[lo, hi]` maximizing `|x(γ)|`.
pub fn find_peak_gamma(x: &BDVec, lo: usize, hi: usize, reg: &GammaRegistry, params: &Params) -> Result<Peak> {
    let ids = window(reg, lo, hi);
    let mut coords = Coords::new(reg, params, x);
    let (gamma, value) = best(&mut coords, ids).ok_or(Error::EmptyWindow { lo, hi })?;
    let norm = bd_sup_norm(x, reg.stages(), reg, params)?.value;
    Ok(Peak { gamma, value, norm, degenerate: x.is_zero() })
}

/// Best node for one block: its window together with its anchor.
pub(crate) fn block_peak(block: &Block, reg: &GammaRegistry, params: &Params) -> Result<(GammaId, f64)> {
    let mut coords = Coords::new(reg, params, &block.vec);
    let ids = window(reg, block.lo, block.hi).into_iter().chain(block.anchor);
    best(&mut coords, ids).ok_or(Error::EmptyWindow { lo: block.lo, hi: block.hi })
}

/// A symbolic node norming `Σ a_k x_k` against a functional.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub gamma: GammaId,
    pub rank: usize,
    /// `e*_γ(Σ a_k x_k)`.
    pub value: f64,
    /// `|φ(Σ a_k e_k)|`.
    pub lhs: f64,
    /// `lhs ≤ C·|value| + tol`.
    pub ok: bool,
}

/// Assembles the chain `η_1, …, η_a` of each internal node from the nodes
/// built for its children.
struct Builder<'b> {
    blocks: &'b [Block],
    peaks: Vec<Option<GammaId>>,
    x: &'b BDVec,
}

impl Builder<'_> {
    /// A node whose value on `x` sees exactly the blocks in `supp ψ`.
    fn build(&self, psi: &WFunctional, reg: &mut GammaRegistry, params: &Params) -> Result<GammaId> {
        let gamma = match psi {
            WFunctional::Leaf { index, .. } => self.peaks[index - 1].expect("peak computed for every leaf"),
            WFunctional::Node(children) => self.chain(psi, children, reg, params)?,
        };
        // blocks after supp ψ must sit above γ so that e*_γ ignores them
        let rank = reg.node(gamma)?.rank;
        if let Some(next) = self.blocks.get(psi.max_support()) {
            if rank >= next.lo {
                return Err(Error::WindowInfeasible(format!(
                    "node over blocks {}..={} reaches rank {rank}, block {} starts at {}",
                    psi.min_support(),
                    psi.max_support(),
                    psi.max_support() + 1,
                    next.lo
                )));
            }
        }
        Ok(gamma)
    }

    fn chain(
        &self,
        psi: &WFunctional,
        children: &[WFunctional],
        reg: &mut GammaRegistry,
        params: &Params,
    ) -> Result<GammaId> {
        let xis = children.iter().map(|c| self.build(c, reg, params)).collect::<Result<Vec<_>>>()?;
        // the cut sits just below the first block of each child
        let cuts: Vec<usize> = children.iter().map(|c| self.blocks[c.min_support() - 1].lo - 1).collect();
        let ranks = xis.iter().map(|&xi| reg.node(xi).map(|n| n.rank)).collect::<Result<Vec<_>>>()?;
        let signs: Vec<i8> = {
            let mut coords = Coords::new(reg, params, self.x);
            (0..xis.len()).map(|s| if coords.proj(xis[s], cuts[s], ranks[s]) < 0.0 { -1 } else { 1 }).collect()
        };
        let mut prev: Option<(GammaId, usize)> = None;
        for (s, c) in children.iter().enumerate() {
            let (xi, p, xi_rank) = (xis[s], cuts[s], ranks[s]);
            if p >= xi_rank || prev.is_some_and(|(_, r)| r > p) {
                return Err(Error::WindowInfeasible(format!(
                    "child {} of the node over blocks {}..={}: cut {p}, xi rank {xi_rank}, previous chain rank {}",
                    s + 1,
                    psi.min_support(),
                    psi.max_support(),
                    prev.map_or(0, |v| v.1)
                )));
            }
            let rank = xi_rank.max(self.blocks[c.max_support() - 1].hi) + 1;
            let node = match prev {
                None => GammaNode::age1(rank, p, signs[s], xi),
                Some((eta, _)) => GammaNode::age_a(rank, s + 1, p, eta, signs[s], xi),
            };
            prev = Some((reg.add_symbolic(node, params)?, rank));
        }
        Ok(prev.expect("proper node has children").0)
    }
}

fn leaves(phi: &WFunctional, out: &mut Vec<usize>) {
    match phi {
        WFunctional::Leaf { index, .. } => out.push(*index),
        WFunctional::Node(cs) => cs.iter().for_each(|c| leaves(c, out)),
    }
}

/// Builds `γ` with `|φ(Σ a_k e_k)| ≤ C |Σ a_k x_k(γ)|`.
///
/// Leaves use the peak of their own block. An internal node with children
/// `ψ_1 < … < ψ_a` becomes a symbolic chain whose `s`-th link cuts just below
/// the first block of `ψ_s`, reads the node built for `ψ_s`, and takes the sign
/// that makes its term nonnegative. Chain nodes sit in the gap after the last
/// block of their child, so each needs as many empty ranks as the height of the
/// subtree before it, plus two.
pub fn witness_gamma(
    phi: &WFunctional,
    blocks: &[Block],
    coeffs: &[f64],
    reg: &mut GammaRegistry,
    params: &Params,
) -> Result<Witness> {
    phi.check_well_formed(params.n)?;
    if !phi.is_proper() {
        return Err(Error::NotProper("witness construction needs fan-out at least 2".into()));
    }
    if phi.max_support() > blocks.len() {
        return Err(Error::MalformedFunctional(format!(
            "leaf {} beyond the {} blocks",
            phi.max_support(),
            blocks.len()
        )));
    }
    let x = combine(blocks, coeffs, reg, params)?;
    let mut used = Vec::new();
    leaves(phi, &mut used);
    let mut peaks = vec![None; blocks.len()];
    if matches!(phi, WFunctional::Node(_)) {
        for k in used {
            peaks[k - 1] = Some(block_peak(&blocks[k - 1], reg, params)?.0);
        }
    }
    witness_with(phi, blocks, &peaks, &x, coeffs, reg, params)
}

/// [`witness_gamma`] with `x = Σ a_k x_k` and the leaf peaks supplied.
pub(crate) fn witness_with(
    phi: &WFunctional,
    blocks: &[Block],
    peaks: &[Option<GammaId>],
    x: &BDVec,
    coeffs: &[f64],
    reg: &mut GammaRegistry,
    params: &Params,
) -> Result<Witness> {
    let gamma = match phi {
        WFunctional::Leaf { index, .. } => {
            let b = &blocks[index - 1];
            let ids = window(reg, b.lo, b.hi).into_iter().chain(b.anchor);
            best(&mut Coords::new(reg, params, x), ids).ok_or(Error::EmptyWindow { lo: b.lo, hi: b.hi })?.0
        }
        WFunctional::Node(_) => Builder { blocks, peaks: peaks.to_vec(), x }.build(phi, reg, params)?,
    };
    let value = Coords::new(reg, params, x).e_star(gamma);
    let lhs = phi.eval(&SparseVec::from_coeffs(coeffs), params).abs();
    Ok(Witness { gamma, rank: reg.node(gamma)?.rank, value, lhs, ok: lhs <= params.c * value.abs() + params.norm_tol })
}

/// Outcome of the lower estimate on one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerEstimate {
    pub ts: f64,
    /// Materialized sup norm of `Σ a_k x_k`.
    pub sup: f64,
    /// `max(sup, |e*_γ(Σ a_k x_k)|)` over the witness `γ`.
    pub bd: f64,
    pub ratio: f64,
    /// Largest rank at which a coordinate was read.
    pub horizon: usize,
    pub witness: Option<Witness>,
    pub ok: bool,
}

/// `‖Σ a_k e_k‖_T ≤ C ‖Σ a_k x_k‖`, the right side read on the materialized
/// stages and on the witness of the norm-attaining functional.
pub fn lower_estimate_check(
    blocks: &[Block],
    coeffs: &[f64],
    reg: &mut GammaRegistry,
    params: &Params,
) -> Result<LowerEstimate> {
    let (ts, phi) = ts_norm_with_witness(&SparseVec::from_coeffs(coeffs), params)?;
    let witness = phi.map(|phi| witness_gamma(&phi, blocks, coeffs, reg, params)).transpose()?;
    let x = combine(blocks, coeffs, reg, params)?;
    let sup = bd_sup_norm(&x, reg.stages(), reg, params)?.value;
    let bd = witness.as_ref().map_or(sup, |w| sup.max(w.value.abs()));
    let horizon = witness.as_ref().map_or(reg.stages(), |w| w.rank.max(reg.stages()));
    let ratio = if bd > 0.0 { ts / bd } else { 0.0 };
    Ok(LowerEstimate { ts, sup, bd, ratio, horizon, witness, ok: ts <= params.c * bd + params.norm_tol })
}
