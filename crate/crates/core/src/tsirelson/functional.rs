use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::tsirelson::SparseVec;
use crate::weights::Params;

/// Default cap on the number of leaves of branching constructions.
pub const DEFAULT_SIZE_CAP: usize = 4096;

/// An element of the norming set, kept as its tree.
///
/// The `i`-th child of an internal node carries weight `b_i`; children must be
/// successively supported.
#[derive(Debug, Clone, PartialEq)]
pub enum WFunctional {
    Leaf { negative: bool, index: usize },
    Node(Vec<WFunctional>),
}

impl WFunctional {
    pub fn leaf(index: usize) -> Self {
        WFunctional::Leaf { negative: false, index }
    }

    pub fn signed_leaf(sign: f64, index: usize) -> Self {
        WFunctional::Leaf { negative: sign < 0.0, index }
    }

    pub fn node(children: Vec<WFunctional>) -> Self {
        WFunctional::Node(children)
    }

    pub fn min_support(&self) -> usize {
        match self {
            WFunctional::Leaf { index, .. } => *index,
            WFunctional::Node(cs) => cs.first().map_or(usize::MAX, |c| c.min_support()),
        }
    }

    pub fn max_support(&self) -> usize {
        match self {
            WFunctional::Leaf { index, .. } => *index,
            WFunctional::Node(cs) => cs.last().map_or(0, |c| c.max_support()),
        }
    }

    /// Leaf height: a leaf has height 0.
    pub fn height(&self) -> usize {
        match self {
            WFunctional::Leaf { .. } => 0,
            WFunctional::Node(cs) => 1 + cs.iter().map(|c| c.height()).max().unwrap_or(0),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            WFunctional::Leaf { .. } => 1,
            WFunctional::Node(cs) => cs.iter().map(|c| c.leaf_count()).sum(),
        }
    }

    /// Checks fan-out `1 ≤ a ≤ n` and successive child supports.
    pub fn check_well_formed(&self, n: usize) -> Result<()> {
        match self {
            WFunctional::Leaf { index, .. } => {
                if *index == 0 {
                    return Err(Error::MalformedFunctional("leaf index 0".into()));
                }
                Ok(())
            }
            WFunctional::Node(cs) => {
                if cs.is_empty() || cs.len() > n {
                    return Err(Error::MalformedFunctional(format!("node with {} children (n = {n})", cs.len())));
                }
                for c in cs {
                    c.check_well_formed(n)?;
                }
                for w in cs.windows(2) {
                    if w[0].max_support() >= w[1].min_support() {
                        return Err(Error::MalformedFunctional(format!(
                            "children not successive: max {} >= min {}",
                            w[0].max_support(),
                            w[1].min_support()
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Every internal node has at least two children.
    pub fn is_proper(&self) -> bool {
        match self {
            WFunctional::Leaf { .. } => true,
            WFunctional::Node(cs) => cs.len() >= 2 && cs.iter().all(|c| c.is_proper()),
        }
    }

    /// Coefficient of `e*_k` for every `k` in the support.
    pub fn coefficients(&self, params: &Params) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        self.collect_coefficients(params, 1.0, &mut out);
        out
    }

    fn collect_coefficients(&self, params: &Params, scale: f64, out: &mut BTreeMap<usize, f64>) {
        match self {
            WFunctional::Leaf { negative, index } => {
                let s = if *negative { -scale } else { scale };
                *out.entry(*index).or_insert(0.0) += s;
            }
            WFunctional::Node(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    c.collect_coefficients(params, scale * params.weight(i + 1), out);
                }
            }
        }
    }

    /// `⟨f, x⟩`.
    pub fn eval(&self, x: &SparseVec, params: &Params) -> f64 {
        match self {
            WFunctional::Leaf { negative, index } => {
                let v = x.get(*index);
                if *negative {
                    -v
                } else {
                    v
                }
            }
            WFunctional::Node(cs) => cs.iter().enumerate().map(|(i, c)| params.weight(i + 1) * c.eval(x, params)).sum(),
        }
    }

    /// Shifts every leaf index by `offset`.
    pub fn shifted(&self, offset: usize) -> Self {
        match self {
            WFunctional::Leaf { negative, index } => WFunctional::Leaf { negative: *negative, index: index + offset },
            WFunctional::Node(cs) => WFunctional::Node(cs.iter().map(|c| c.shifted(offset)).collect()),
        }
    }
}

impl fmt::Display for WFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WFunctional::Leaf { negative, index } => {
                write!(f, "{}e{}", if *negative { "-" } else { "+" }, index)
            }
            WFunctional::Node(cs) => {
                write!(f, "[")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, "]")
            }
        }
    }
}

pub fn eval_functional(f: &WFunctional, x: &SparseVec, params: &Params) -> f64 {
    f.eval(x, params)
}

/// Collapses every single-child chain and makes all leaves positive.
///
/// A leaf `m` keeps the product of the weights `b_t` only over those ancestors
/// `t` that have more than one child; a unary node contributes nothing. The
/// result dominates `f` coordinatewise and is proper.
pub fn properize(f: &WFunctional) -> WFunctional {
    match f {
        WFunctional::Leaf { index, .. } => WFunctional::leaf(*index),
        WFunctional::Node(cs) if cs.len() == 1 => properize(&cs[0]),
        WFunctional::Node(cs) => WFunctional::Node(cs.iter().map(properize).collect()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeightCheck {
    pub height: usize,
    pub max_support: usize,
    pub lemma2_ok: bool,
}

/// Height against maximal support index for a proper functional.
pub fn height_check(f: &WFunctional) -> Result<HeightCheck> {
    if !f.is_proper() {
        return Err(Error::NotProper(f.to_string()));
    }
    let height = f.height();
    let max_support = f.max_support();
    Ok(HeightCheck { height, max_support, lemma2_ok: height <= max_support })
}

/// The full `n`-ary tree of height `j` on indices `1..=n^j`.
pub fn branching_functional(params: &Params, j: u32, cap: usize) -> Result<WFunctional> {
    let size = params
        .n
        .checked_pow(j)
        .filter(|&s| s <= cap)
        .ok_or(Error::SizeCap { size: params.n.saturating_pow(j), cap })?;
    debug_assert!(size >= 1);
    fn build(n: usize, j: u32, start: usize) -> WFunctional {
        if j == 0 {
            return WFunctional::leaf(start);
        }
        let block = n.pow(j - 1);
        WFunctional::Node((0..n).map(|i| build(n, j - 1, start + i * block)).collect())
    }
    Ok(build(params.n, j, 1))
}
