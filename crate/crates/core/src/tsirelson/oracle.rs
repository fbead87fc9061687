//! Brute-force evaluation of the norm, independent of the interval DP.
//!
//! Leaves may sit on any subset of the support and children on any successive
//! subsets, not just intervals; no ordering argument on the weights is used.
//! The supremum over all trees on a subset `S` decomposes exactly into the
//! suprema on its children's subsets, so values are memoized per bitmask.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::tsirelson::SparseVec;
use crate::weights::Params;

pub const DEFAULT_ORACLE_CAP: usize = 8;

struct Oracle<'a> {
    abs: Vec<f64>,
    weights: &'a [f64],
    value: HashMap<u32, f64>,
    tail: HashMap<(u32, usize), f64>,
}

impl Oracle<'_> {
    /// Supremum of `⟨f, |x|⟩` over functionals supported in `mask`.
    fn value(&mut self, mask: u32) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        if let Some(&v) = self.value.get(&mask) {
            return v;
        }
        let mut best = bits(mask).map(|t| self.abs[t]).fold(0.0, f64::max);
        // first child on E, later children strictly above max E
        // `E = mask` is a unary node, dominated by the node's own value
        for e in subsets(mask).into_iter().filter(|&e| e != mask) {
            let rest = mask & !low_mask(highest(e) + 1);
            let v = self.weights[0] * self.value(e) + self.tail(rest, 1);
            best = best.max(v);
        }
        self.value.insert(mask, best);
        best
    }

    /// Best continuation with child slots `i, i+1, …` on subsets of `mask`;
    /// stopping is allowed.
    fn tail(&mut self, mask: u32, i: usize) -> f64 {
        if mask == 0 || i >= self.weights.len() {
            return 0.0;
        }
        if let Some(&v) = self.tail.get(&(mask, i)) {
            return v;
        }
        let mut best = 0.0;
        for e in subsets(mask) {
            let rest = mask & !low_mask(highest(e) + 1);
            let v = self.weights[i] * self.value(e) + self.tail(rest, i + 1);
            best = f64::max(best, v);
        }
        self.tail.insert((mask, i), best);
        best
    }
}

fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |t| mask & (1 << t) != 0)
}

fn highest(mask: u32) -> usize {
    31 - mask.leading_zeros() as usize
}

fn low_mask(k: usize) -> u32 {
    if k >= 32 {
        u32::MAX
    } else {
        (1u32 << k) - 1
    }
}

/// Nonempty submasks of `mask`.
fn subsets(mask: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut s = mask;
    while s != 0 {
        out.push(s);
        s = (s - 1) & mask;
    }
    out
}

/// Brute-force norm with the default support cap.
pub fn ts_norm_oracle(x: &SparseVec, params: &Params) -> Result<f64> {
    ts_norm_oracle_capped(x, params, DEFAULT_ORACLE_CAP)
}

pub fn ts_norm_oracle_capped(x: &SparseVec, params: &Params, cap: usize) -> Result<f64> {
    if x.len() > cap || x.len() > 20 {
        return Err(Error::SupportTooLarge { size: x.len(), cap });
    }
    let mut oracle = Oracle {
        abs: x.values().iter().map(|v| v.abs()).collect(),
        weights: &params.b,
        value: HashMap::new(),
        tail: HashMap::new(),
    };
    Ok(oracle.value(low_mask(x.len())))
}
