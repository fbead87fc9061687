use serde::Serialize;

use crate::analysis::{evaluation_analysis, r_analysis, AnalysisEntry, RAnalysis};
use crate::bd::{fdd_support, BDVec, Coords, GammaId, GammaRegistry};
use crate::error::{Error, Result};
use crate::weights::Params;

/// Guards against corrupted registries; ranks strictly decrease down the tree.
pub const MAX_TREE_DEPTH: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeNode {
    pub xi: GammaId,
    pub p: usize,
    pub q: usize,
    pub eps: f64,
    /// Index `i` of the weight `b_i`; 0 at the root.
    pub index: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Nodes whose `d*` make up `g_t`.
    pub g_etas: Vec<GammaId>,
    pub depth: usize,
}

/// Tree analysis of `e*_γ`; `nodes[0]` is the root with interval
/// `(0, rank γ − 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeAnalysis {
    pub gamma: GammaId,
    pub nodes: Vec<TreeNode>,
}

/// `(f_t(x), g_t(x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgSplit {
    pub f: f64,
    pub g: f64,
}

impl TreeAnalysis {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn is_maximal(&self, t: usize) -> bool {
        self.nodes[t].children.is_empty()
    }

    /// `ε_t b_t`, and 1 at the root.
    pub fn factor(&self, t: usize, params: &Params) -> f64 {
        let node = &self.nodes[t];
        if node.parent.is_none() {
            1.0
        } else {
            node.eps * params.weight(node.index)
        }
    }

    /// Nodes from the root down to `t`.
    pub fn path(&self, t: usize) -> Vec<usize> {
        let mut out = vec![t];
        let mut cur = t;
        while let Some(parent) = self.nodes[cur].parent {
            out.push(parent);
            cur = parent;
        }
        out.reverse();
        out
    }

    /// `Π_{∅ ⪯ s ⪯ t} ε_s b_s`.
    pub fn product(&self, t: usize, params: &Params) -> f64 {
        self.path(t).into_iter().map(|s| self.factor(s, params)).product()
    }

    pub fn split_fg(&self, t: usize, coords: &mut Coords<'_>, params: &Params) -> FgSplit {
        let node = &self.nodes[t];
        let f = node
            .children
            .iter()
            .map(|&s| {
                let c = &self.nodes[s];
                params.weight(c.index) * c.eps * coords.proj(c.xi, c.p, c.q)
            })
            .sum();
        let g = node.g_etas.iter().map(|&eta| coords.d_star(eta)).sum();
        FgSplit { f, g }
    }

    /// Deepest node whose interval contains `[lo, hi]`.
    pub fn deepest_containing(&self, lo: usize, hi: usize) -> Option<usize> {
        let contains = |t: usize| self.nodes[t].p < lo && hi <= self.nodes[t].q;
        if !contains(0) {
            return None;
        }
        let mut t = 0;
        while let Some(&c) = self.nodes[t].children.iter().find(|&&c| contains(c)) {
            t = c;
        }
        Some(t)
    }

    /// Checks nesting of parent and child intervals and disjointness of siblings.
    pub fn intervals_consistent(&self) -> bool {
        self.nodes.iter().all(|node| {
            let kids: Vec<&TreeNode> = node.children.iter().map(|&c| &self.nodes[c]).collect();
            kids.iter().all(|c| node.p <= c.p && c.p < c.q && c.q <= node.q)
                && kids.windows(2).all(|w| w[0].q <= w[1].p)
        })
    }
}

fn child(entry: &AnalysisEntry, parent: usize, depth: usize) -> TreeNode {
    TreeNode {
        xi: entry.xi,
        p: entry.p,
        q: entry.q,
        eps: entry.eps,
        index: entry.index,
        parent: Some(parent),
        children: Vec::new(),
        g_etas: Vec::new(),
        depth,
    }
}

/// Expands `e*_γ` until every leaf `ξ_t` is `p_t`-indecomposable.
///
/// `g_t` gathers `d*_η` for every retained chain node and, when present, the
/// dropped chain node of rank `p_t + 1`; for a maximal node it is `d*_{ξ_t}`
/// when `rank ξ_t = p_t + 1`. With these terms `e*_{ξ_t} = f_t + g_t` on every
/// vector ranged in `(p_t, q_t]`.
pub fn tree_analysis(gamma: GammaId, reg: &GammaRegistry) -> Result<TreeAnalysis> {
    let rank = reg.node(gamma)?.rank;
    let eval = evaluation_analysis(gamma, reg)?;
    let mut nodes = vec![TreeNode {
        xi: gamma,
        p: 0,
        q: rank - 1,
        eps: 1.0,
        index: 0,
        parent: None,
        children: Vec::new(),
        g_etas: eval.etas.clone(),
        depth: 0,
    }];
    let mut stack = Vec::new();
    for e in &eval.entries {
        let id = nodes.len();
        nodes.push(child(e, 0, 1));
        nodes[0].children.push(id);
        stack.push(id);
    }
    while let Some(t) = stack.pop() {
        let (xi, p, depth) = (nodes[t].xi, nodes[t].p, nodes[t].depth);
        if depth > MAX_TREE_DEPTH {
            return Err(Error::InvalidGamma(format!("tree analysis of {gamma} exceeds depth cap")));
        }
        let (entries, mut g_etas) = match r_analysis(xi, p, reg)? {
            RAnalysis::Indecomposable => {
                if reg.node(xi)?.rank == p + 1 {
                    nodes[t].g_etas.push(xi);
                }
                continue;
            }
            RAnalysis::Full(a) => (a.entries, a.etas),
            RAnalysis::Truncated { entries, etas, boundary_eta, .. } => {
                let mut g = etas;
                g.extend(boundary_eta);
                (entries, g)
            }
        };
        g_etas.sort();
        nodes[t].g_etas = g_etas;
        for e in &entries {
            let id = nodes.len();
            nodes.push(child(e, t, depth + 1));
            nodes[t].children.push(id);
            stack.push(id);
        }
    }
    Ok(TreeAnalysis { gamma, nodes })
}

/// Both sides of the telescoping identity for `e*_γ(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma4Eval {
    pub value: f64,
    pub t_x: usize,
    pub product: f64,
    pub fg: FgSplit,
    /// `max_{t ≺ t_x} |g_t(x)|`, which the identity requires to vanish.
    pub ancestor_g: f64,
}

impl Lemma4Eval {
    pub fn rhs(&self) -> f64 {
        self.product * (self.fg.f + self.fg.g)
    }

    pub fn residual(&self) -> f64 {
        (self.value - self.rhs()).abs()
    }
}

/// Evaluates `e*_γ(x)` directly and through the deepest tree node `t_x` whose
/// interval contains `ran x`; the root is used when no node does.
pub fn lemma4_eval(tree: &TreeAnalysis, x: &BDVec, reg: &GammaRegistry, params: &Params) -> Result<Lemma4Eval> {
    let support = fdd_support(x, reg, params, params.tol);
    let t_x = match (support.first(), support.last()) {
        (Some(&lo), Some(&hi)) => tree.deepest_containing(lo, hi).unwrap_or(0),
        _ => 0,
    };
    let mut coords = Coords::new(reg, params, x);
    let value = coords.e_star(tree.gamma);
    let fg = tree.split_fg(t_x, &mut coords, params);
    let path = tree.path(t_x);
    let ancestor_g =
        path[..path.len() - 1].iter().map(|&t| tree.split_fg(t, &mut coords, params).g.abs()).fold(0.0, f64::max);
    Ok(Lemma4Eval { value, t_x, product: tree.product(t_x, params), fg, ancestor_g })
}
