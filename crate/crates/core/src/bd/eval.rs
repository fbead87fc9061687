//! Memoized evaluation of `(i_t r_t x)(γ)` for arbitrary nodes.
//!
//! For `x` at stage `s` and `t ≤ s`, write `y_t = i_t r_t x`. For a node `γ`
//! of rank `R` with `t < R` the value `y_t(γ) = c*_γ(r_{R-1} y_t)` unrolls to
//!
//! * Age1: `b_1 ε (y_t(ξ) − y_{min(t,p)}(ξ))`,
//! * AgeA: `y_t(η) + b_a ε (y_t(ξ) − y_{min(t,p)}(ξ))`,
//!
//! because `r_p i_t r_t = i_{min(t,p)} r_{min(t,p)}` on `Γ_p`. Materialized
//! nodes of rank `≤ t` read `x` directly; a node outside the materialized
//! stages carries no FDD component, so it always takes the formula with
//! `t' = min(t, R − 1)`.

use std::collections::HashMap;

use crate::bd::{GammaId, GammaKind, GammaRegistry};

/// Linear values the evaluator can propagate.
pub(crate) trait Lin: Clone {
    fn zero() -> Self;
    fn add_scaled(&mut self, a: f64, other: &Self);
}

impl Lin for f64 {
    fn zero() -> Self {
        0.0
    }

    fn add_scaled(&mut self, a: f64, other: &Self) {
        *self += a * other;
    }
}

/// Sparse row over materialized positions, sorted by position.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Row(pub Vec<(usize, f64)>);

impl Row {
    pub fn l1(&self) -> f64 {
        self.0.iter().map(|(_, v)| v.abs()).sum()
    }
}

impl Lin for Row {
    fn zero() -> Self {
        Row(Vec::new())
    }

    fn add_scaled(&mut self, a: f64, other: &Self) {
        if a == 0.0 || other.0.is_empty() {
            return;
        }
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            let take_left = j >= other.0.len() || (i < self.0.len() && self.0[i].0 < other.0[j].0);
            let take_right = i >= self.0.len() || (j < other.0.len() && other.0[j].0 < self.0[i].0);
            let (pos, v) = if take_left {
                i += 1;
                self.0[i - 1]
            } else if take_right {
                j += 1;
                (other.0[j - 1].0, a * other.0[j - 1].1)
            } else {
                i += 1;
                j += 1;
                (self.0[i - 1].0, self.0[i - 1].1 + a * other.0[j - 1].1)
            };
            if v != 0.0 {
                out.push((pos, v));
            }
        }
        self.0 = out;
    }
}

pub(crate) struct Evaluator<'a, V: Lin, F: Fn(usize) -> V> {
    reg: &'a GammaRegistry,
    b: &'a [f64],
    stage: usize,
    floor: usize,
    leaf: F,
    memo: HashMap<(GammaId, usize), V>,
}

impl<'a, V: Lin, F: Fn(usize) -> V> Evaluator<'a, V, F> {
    /// `leaf(pos)` is `x` at a materialized position of `Γ_stage`; `r_floor x = 0`.
    pub fn new(reg: &'a GammaRegistry, b: &'a [f64], stage: usize, floor: usize, leaf: F) -> Self {
        Evaluator { reg, b, stage, floor, leaf, memo: HashMap::new() }
    }

    /// `(i_t r_t x)(γ)`, with `t` clamped to the stage of `x`.
    pub fn at(&mut self, id: GammaId, t: usize) -> V {
        let t = t.min(self.stage);
        if t <= self.floor {
            return V::zero();
        }
        let node = self.reg.node_unchecked(id);
        if node.rank <= t {
            if let Some(pos) = self.reg.position(id) {
                return (self.leaf)(pos);
            }
        }
        self.formula(id, t.min(node.rank - 1))
    }

    /// `c*_γ(r_{R-1} i_t r_t x)` for `t < R`.
    pub fn formula(&mut self, id: GammaId, t: usize) -> V {
        if t <= self.floor {
            return V::zero();
        }
        if let Some(v) = self.memo.get(&(id, t)) {
            return v.clone();
        }
        let node = *self.reg.node_unchecked(id);
        let value = match node.kind {
            GammaKind::Base => V::zero(),
            GammaKind::Age1 { p, eps, xi } => {
                let mut v = self.at(xi, t);
                v.add_scaled(-1.0, &self.at(xi, t.min(p)));
                let mut out = V::zero();
                out.add_scaled(self.b[0] * eps as f64, &v);
                out
            }
            GammaKind::AgeA { a, p, eta, eps, xi } => {
                let mut v = self.at(xi, t);
                v.add_scaled(-1.0, &self.at(xi, t.min(p)));
                let mut out = self.at(eta, t);
                out.add_scaled(self.b[a - 1] * eps as f64, &v);
                out
            }
        };
        self.memo.insert((id, t), value.clone());
        value
    }

    /// `e*_γ(x)`.
    pub fn e_star(&mut self, id: GammaId) -> V {
        self.at(id, self.stage)
    }

    /// `c*_γ(x)`.
    pub fn c_star(&mut self, id: GammaId) -> V {
        let rank = self.reg.node_unchecked(id).rank;
        self.formula(id, self.stage.min(rank - 1))
    }
}
