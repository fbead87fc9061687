use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::analysis::{tree_analysis, TreeAnalysis};
use crate::bd::{fdd_support, project, BDVec, Coords, GammaId, GammaRegistry};
use crate::error::{Error, Result};
use crate::estimates::blocks::lift;
use crate::estimates::{norm_proxy, Block, Section5Blocks};
use crate::tsirelson::{ts_norm, SparseVec, WFunctional};
use crate::weights::Params;

/// `x_k = x′_k + x″_k + x‴_k` relative to `t_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockParts {
    /// Deepest tree node whose interval contains `ran x_k`; the root when none does.
    pub t: usize,
    /// First child of `t` whose interval meets `ran x_k`.
    pub s0: Option<usize>,
    /// Restriction to the interval of `s0`.
    pub x1: BDVec,
    /// Restriction to the intervals of the other children of `t`.
    pub x2: BDVec,
    pub x3: BDVec,
}

/// `K_t` and `E_t` at one tree node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeCount {
    pub node: usize,
    pub k: Vec<usize>,
    pub e: Vec<usize>,
}

impl NodeCount {
    pub fn size(&self) -> usize {
        self.k.len() + self.e.len()
    }
}

/// The sets `D_t`, `K_t`, `E_t` of one pair `(γ, (z_k))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairSets {
    /// `t_k` of each part, `None` when the part vanishes. Blocks are 1-based.
    pub t: Vec<Option<usize>>,
    /// `D_t` for every node where it is nonempty.
    pub d: BTreeMap<usize, Vec<usize>>,
    pub counts: Vec<NodeCount>,
}

impl PairSets {
    fn new(tree: &TreeAnalysis, t: Vec<Option<usize>>) -> Self {
        let mut d: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, tk) in t.iter().enumerate() {
            if let Some(tk) = *tk {
                for s in tree.path(tk) {
                    d.entry(s).or_default().push(i + 1);
                }
            }
        }
        let counts = d
            .keys()
            .map(|&node| NodeCount {
                node,
                k: (0..t.len()).filter(|&i| t[i] == Some(node)).map(|i| i + 1).collect(),
                e: tree.nodes[node].children.iter().copied().filter(|c| d.contains_key(c)).collect(),
            })
            .collect();
        PairSets { t, d, counts }
    }

    /// `max_t #(K_t ∪ E_t)`.
    pub fn max_count(&self) -> usize {
        self.counts.iter().map(NodeCount::size).max().unwrap_or(0)
    }

    /// `φ^t = Σ_{s ∈ E_t} b φ^s + Σ_{k ∈ K_t} b e*_k`, the items weighted
    /// `b_1, b_2, …` in the order of their supports. `None` when some node
    /// carries more than `n` items.
    pub fn functional(&self, n: usize) -> Option<WFunctional> {
        if self.d.is_empty() || self.max_count() > n {
            return None;
        }
        Some(self.functional_at(0))
    }

    fn functional_at(&self, t: usize) -> WFunctional {
        let count = self.counts.iter().find(|c| c.node == t).expect("node with nonempty D_t");
        let mut items: Vec<(usize, WFunctional)> = count.k.iter().map(|&k| (k, WFunctional::leaf(k))).collect();
        items.extend(count.e.iter().map(|&s| (self.d[&s][0], self.functional_at(s))));
        items.sort_by_key(|(key, _)| *key);
        WFunctional::node(items.into_iter().map(|(_, f)| f).collect())
    }
}

/// Per-block checks of the parts against the tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Remark7 {
    /// `max_k |g_{t_k}(x_k)| / (2 C n ε_k)`; at most 1 when the bound holds.
    pub g_ratio: f64,
    /// `max_k |g_{t_k}(x_k) − g_{t_k}(x‴_k)|`.
    pub g_identity: f64,
    /// `max_k |f_{t_k}(x‴_k)|`.
    pub f_residual: f64,
    /// `max_k max_{t ≺ t_k} |g_t(x‴_k)|`.
    pub ancestor_g: f64,
    /// `t_k(x′_k)` lies strictly below `t_k` whenever `x′_k ≠ 0`.
    pub deeper: bool,
}

impl Remark7 {
    pub fn holds(&self, tol: f64) -> bool {
        self.g_ratio <= 1.0 + tol
            && self.g_identity <= tol
            && self.f_residual <= tol
            && self.ancestor_g <= tol
            && self.deeper
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub gamma: GammaId,
    pub tree: TreeAnalysis,
    pub parts: Vec<BlockParts>,
    /// The pair `(γ, (x′_k))`.
    pub prime: PairSets,
    /// The pair `(γ, (x″_k))`.
    pub second: PairSets,
    pub remark7: Remark7,
}

impl Decomposition {
    /// `max_t #(K_t ∪ E_t)` over both pairs.
    pub fn lemma6_max(&self) -> usize {
        self.prime.max_count().max(self.second.max_count())
    }
}

fn restrict_to(x: &BDVec, p: usize, q: usize, reg: &GammaRegistry, params: &Params) -> Result<BDVec> {
    let q = q.min(x.stage());
    if p >= q {
        return BDVec::zeros(reg, x.stage());
    }
    project(x, p, q, reg, params)
}

fn meets(support: &BTreeSet<usize>, p: usize, q: usize) -> bool {
    p < q && support.range(p + 1..=q).next().is_some()
}

/// Splits every block against the tree analysis of `γ` and checks the
/// per-block identities; `eps_seq[k]` bounds the scaling inside block `k`.
pub fn decompose_blocks(
    gamma: GammaId,
    blocks: &[Block],
    eps_seq: &[f64],
    reg: &GammaRegistry,
    params: &Params,
) -> Result<Decomposition> {
    if eps_seq.len() != blocks.len() {
        return Err(Error::DimensionMismatch { expected: blocks.len(), got: eps_seq.len() });
    }
    let tree = tree_analysis(gamma, reg)?;
    let deepest = |s: &BTreeSet<usize>| Some(tree.deepest_containing(*s.first()?, *s.last()?).unwrap_or(0));
    let mut parts = Vec::with_capacity(blocks.len());
    let (mut t1, mut t2) = (Vec::new(), Vec::new());
    let mut r7 = Remark7 { g_ratio: 0.0, g_identity: 0.0, f_residual: 0.0, ancestor_g: 0.0, deeper: true };
    for (b, &eps_k) in blocks.iter().zip(eps_seq) {
        let support = fdd_support(&b.vec, reg, params, params.tol);
        let t = deepest(&support).unwrap_or(0);
        let kids = &tree.nodes[t].children;
        let s0 = kids.iter().copied().find(|&c| meets(&support, tree.nodes[c].p, tree.nodes[c].q));
        let mut x1 = BDVec::zeros(reg, b.vec.stage())?;
        let mut x2 = x1.clone();
        let (mut s1, mut s2) = (BTreeSet::new(), BTreeSet::new());
        for &c in kids {
            let (p, q) = (tree.nodes[c].p, tree.nodes[c].q);
            if !meets(&support, p, q) {
                continue;
            }
            let part = restrict_to(&b.vec, p, q, reg, params)?;
            // P_{(p,q]} cuts the FDD support down to (p, q]
            let inside = support.range(p + 1..=q).copied();
            if Some(c) == s0 {
                x1 = part;
                s1.extend(inside);
            } else {
                x2 = x2.axpy(1.0, &part)?;
                s2.extend(inside);
            }
        }
        let x3 = b.vec.sub(&x1)?.sub(&x2)?;
        let t_prime = deepest(&s1);
        if let Some(tp) = t_prime {
            r7.deeper &= tp != t && tree.path(tp).contains(&t);
        }
        t1.push(t_prime);
        t2.push(deepest(&s2));

        let g = tree.split_fg(t, &mut Coords::new(reg, params, &b.vec), params).g;
        let (fg3, ancestor) = {
            let mut c3 = Coords::new(reg, params, &x3);
            let path = tree.path(t);
            let ancestor =
                path[..path.len() - 1].iter().map(|&s| tree.split_fg(s, &mut c3, params).g.abs()).fold(0.0, f64::max);
            (tree.split_fg(t, &mut c3, params), ancestor)
        };
        let bound = 2.0 * params.c * params.n as f64 * eps_k;
        r7.g_ratio = r7.g_ratio.max(g.abs() / bound);
        r7.g_identity = r7.g_identity.max((g - fg3.g).abs());
        r7.f_residual = r7.f_residual.max(fg3.f.abs());
        r7.ancestor_g = r7.ancestor_g.max(ancestor);
        parts.push(BlockParts { t, s0, x1, x2, x3 });
    }
    let prime = PairSets::new(&tree, t1);
    let second = PairSets::new(&tree, t2);
    Ok(Decomposition { gamma, tree, parts, prime, second, remark7: r7 })
}

fn weighted<'v>(
    vecs: impl Iterator<Item = &'v BDVec> + Clone,
    coeffs: &[f64],
    reg: &GammaRegistry,
    params: &Params,
) -> Result<BDVec> {
    let stage = vecs.clone().map(BDVec::stage).max().unwrap_or(1);
    let mut acc = BDVec::zeros(reg, stage)?;
    for (v, &a) in vecs.zip(coeffs) {
        acc = acc.axpy(a, &lift(v, stage, reg, params)?)?;
    }
    Ok(acc)
}

/// Both sides of the pointwise upper estimate at one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop8Report {
    pub gamma: GammaId,
    /// `|Σ a_k x_k(γ)|`.
    pub lhs: f64,
    pub phi1: f64,
    pub phi2: f64,
    /// `2 C n ε (Σ a_k^r)^{1/r}`.
    pub tail: f64,
    /// `(2C/b_n)(φ_1 + φ_2)(Σ a_k e_k) + tail`, the constant the argument yields.
    pub bound: f64,
    /// The same with `1/b_n`, the constant of the statement.
    pub bound_stated: f64,
    pub lemma6_max: usize,
    /// `|f_∅(Σ a_k x′_k)|` and `|f_∅(Σ a_k x″_k)|`.
    pub f_prime: f64,
    pub f_second: f64,
    /// `f_prime ≤ (2C/b_n) φ_1` and `f_second ≤ (2C/b_n) φ_2`.
    pub claims_ok: bool,
    pub remark7: Remark7,
    pub ok: bool,
    pub ok_stated: bool,
}

/// Builds `φ_1, φ_2` from the decomposition of the recipe blocks at `γ` and
/// compares `|Σ a_k x_k(γ)|` with the bound.
pub fn prop8_check(
    gamma: GammaId,
    s5: &Section5Blocks,
    coeffs: &[f64],
    reg: &GammaRegistry,
    params: &Params,
) -> Result<Prop8Report> {
    let blocks = &s5.blocks;
    if coeffs.len() != blocks.len() {
        return Err(Error::DimensionMismatch { expected: blocks.len(), got: coeffs.len() });
    }
    let dec = decompose_blocks(gamma, blocks, &s5.recipe.eps_seq, reg, params)?;
    let a = SparseVec::from_coeffs(coeffs);
    let x = weighted(blocks.iter().map(|b| &b.vec), coeffs, reg, params)?;
    let lhs = Coords::new(reg, params, &x).e_star(gamma).abs();
    let xp = weighted(dec.parts.iter().map(|p| &p.x1), coeffs, reg, params)?;
    let xs = weighted(dec.parts.iter().map(|p| &p.x2), coeffs, reg, params)?;
    let f_prime = dec.tree.split_fg(0, &mut Coords::new(reg, params, &xp), params).f.abs();
    let f_second = dec.tree.split_fg(0, &mut Coords::new(reg, params, &xs), params).f.abs();
    let eval = |sets: &PairSets| match sets.functional(params.n) {
        Some(f) => Some(f.eval(&a, params)),
        None if sets.d.is_empty() => Some(0.0),
        None => None,
    };
    let (phi1, phi2) = (eval(&dec.prime), eval(&dec.second));
    let formed = phi1.is_some() && phi2.is_some();
    let (phi1, phi2) = (phi1.unwrap_or(f64::NAN), phi2.unwrap_or(f64::NAN));
    let lr = a.lp(params.r);
    let tail = 2.0 * params.c * params.n as f64 * s5.recipe.eps * lr;
    let k = 2.0 * params.c / params.b_n();
    let bound = k * (phi1 + phi2) + tail;
    let bound_stated = (phi1 + phi2) / params.b_n() + tail;
    let tol = params.norm_tol;
    Ok(Prop8Report {
        gamma,
        lhs,
        phi1,
        phi2,
        tail,
        bound,
        bound_stated,
        lemma6_max: dec.lemma6_max(),
        f_prime,
        f_second,
        claims_ok: formed && f_prime <= k * phi1 + tol && f_second <= k * phi2 + tol,
        remark7: dec.remark7,
        ok: formed && lhs <= bound + tol,
        ok_stated: formed && lhs <= bound_stated + tol,
    })
}

/// `ε = M / (n b_n)`.
pub fn remark11_eps(params: &Params) -> Result<f64> {
    let m = params.m_est.ok_or(Error::MissingMEstimate)?;
    Ok(m / (params.n as f64 * params.b_n()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperEstimate {
    /// [`NormProxy`](crate::estimates::NormProxy) value of `Σ a_k x_k`.
    pub bd: f64,
    pub ts: f64,
    /// `(6C/b_n) ‖Σ a_k e_k‖_T`.
    pub bound: f64,
    pub horizon: usize,
    pub ok: bool,
}

/// `‖Σ a_k x_k‖ ≤ (6C/b_n) ‖Σ a_k e_k‖_T` on recipe blocks.
pub fn upper_estimate_check(
    s5: &Section5Blocks,
    coeffs: &[f64],
    reg: &mut GammaRegistry,
    params: &Params,
) -> Result<UpperEstimate> {
    params.m_est.ok_or(Error::MissingMEstimate)?;
    let proxy = norm_proxy(&s5.blocks, coeffs, s5.recipe.max_height, reg, params)?;
    let ts = ts_norm(&SparseVec::from_coeffs(coeffs), params)?;
    let bound = 6.0 * params.c / params.b_n() * ts;
    let horizon = proxy.witness.as_ref().map_or(reg.stages(), |w| w.rank.max(reg.stages()));
    Ok(UpperEstimate { bd: proxy.value, ts, bound, horizon, ok: proxy.value <= bound + params.norm_tol })
}
