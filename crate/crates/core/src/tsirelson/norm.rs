//! Exact evaluation of the Tsirelson-type norm by interval dynamic programming.
//!
//! The norm is the least fixed point of
//! `N(x) = max(‖x‖_∞, max_{2≤a≤n, E_1<…<E_a} Σ_i b_i N(E_i x))`.
//!
//! Two reductions make a polynomial search exact:
//!
//! * The norming set is closed under sign changes and under restriction to
//!   subsets, so the norm is 1-unconditional and monotone in `|x|`. Any
//!   successive sets `E_1 < … < E_a` may therefore be enlarged to consecutive
//!   intervals of the support that cover it, without lowering the sum.
//! * Weights attach in the fixed order `b_1, …, b_a`. Because `b` is strictly
//!   descending, giving the nonempty parts the first `a` weights dominates any
//!   other injection of parts into weight slots, so empty parts never help.
//!
//! Each part has strictly smaller support than its parent interval and every
//! `b_i < 1`, so the recursion over support subintervals terminates.
//! The memo tables live inside a single call.

use crate::error::{Error, Result};
use crate::tsirelson::{SparseVec, WFunctional};
use crate::weights::{validate, Params};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Choice {
    Sup(usize),
    Parts(usize),
}

struct IntervalDp<'a> {
    m: usize,
    n: usize,
    weights: &'a [f64],
    values: Vec<f64>,
    norm: Vec<f64>,
    choice: Vec<Choice>,
    /// `best[k][i*m + j]`: best split of `[i, j]` into `k + 1` parts weighted
    /// `b_1..b_{k+1}`; `split[k]` keeps the start of the last part.
    best: Vec<Vec<f64>>,
    split: Vec<Vec<usize>>,
}

impl<'a> IntervalDp<'a> {
    fn run(values: Vec<f64>, weights: &'a [f64]) -> Self {
        let m = values.len();
        let n = weights.len();
        let mut dp = IntervalDp {
            m,
            n,
            weights,
            values,
            norm: vec![0.0; m * m],
            choice: vec![Choice::Sup(0); m * m],
            best: vec![vec![f64::NEG_INFINITY; m * m]; n],
            split: vec![vec![0; m * m]; n],
        };
        dp.fill();
        dp
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.m + j
    }

    fn fill(&mut self) {
        let m = self.m;
        for len in 1..=m {
            for i in 0..=(m - len) {
                let j = i + len - 1;
                let idx = self.at(i, j);
                for k in 1..self.n.min(len) {
                    // k + 1 parts: k parts in [i, mid], last part [mid + 1, j]
                    let mut best = f64::NEG_INFINITY;
                    let mut arg = 0;
                    for mid in (i + k - 1)..j {
                        let head = self.best[k - 1][self.at(i, mid)];
                        let tail = self.weights[k] * self.norm[self.at(mid + 1, j)];
                        let v = head + tail;
                        if v > best {
                            best = v;
                            arg = mid + 1;
                        }
                    }
                    self.best[k][idx] = best;
                    self.split[k][idx] = arg;
                }
                let (mut sup, mut pos) = (0.0, i);
                for t in i..=j {
                    if self.values[t] > sup {
                        sup = self.values[t];
                        pos = t;
                    }
                }
                let mut value = sup;
                let mut choice = Choice::Sup(pos);
                for k in 1..self.n.min(len) {
                    if self.best[k][idx] > value {
                        value = self.best[k][idx];
                        choice = Choice::Parts(k + 1);
                    }
                }
                self.norm[idx] = value;
                self.choice[idx] = choice;
                self.best[0][idx] = self.weights[0] * value;
            }
        }
    }

    fn value(&self) -> f64 {
        if self.m == 0 {
            0.0
        } else {
            self.norm[self.at(0, self.m - 1)]
        }
    }

    fn functional(&self, i: usize, j: usize, indices: &[usize], signs: &[f64]) -> WFunctional {
        match self.choice[self.at(i, j)] {
            Choice::Sup(t) => WFunctional::signed_leaf(signs[t], indices[t]),
            Choice::Parts(a) => {
                let mut parts = Vec::with_capacity(a);
                self.collect_parts(a - 1, i, j, indices, signs, &mut parts);
                WFunctional::Node(parts)
            }
        }
    }

    fn collect_parts(
        &self,
        k: usize,
        i: usize,
        j: usize,
        indices: &[usize],
        signs: &[f64],
        out: &mut Vec<WFunctional>,
    ) {
        if k == 0 {
            out.push(self.functional(i, j, indices, signs));
            return;
        }
        let start = self.split[k][self.at(i, j)];
        self.collect_parts(k - 1, i, start - 1, indices, signs, out);
        out.push(self.functional(start, j, indices, signs));
    }
}

/// Height-capped variant: `N_0 = ‖·‖_∞`, `N_h` allows trees of height `≤ h`.
struct CappedDp {
    m: usize,
    layers: Vec<IntervalLayer>,
}

struct IntervalLayer {
    norm: Vec<f64>,
    choice: Vec<Choice>,
    split: Vec<Vec<usize>>,
}

impl CappedDp {
    fn run(values: &[f64], weights: &[f64], cap: usize) -> Self {
        let m = values.len();
        let n = weights.len();
        let at = |i: usize, j: usize| i * m + j;
        let mut sup_layer =
            IntervalLayer { norm: vec![0.0; m * m], choice: vec![Choice::Sup(0); m * m], split: Vec::new() };
        for i in 0..m {
            let (mut sup, mut pos) = (0.0, i);
            for (j, &v) in values.iter().enumerate().skip(i) {
                if v > sup {
                    sup = v;
                    pos = j;
                }
                sup_layer.norm[at(i, j)] = sup;
                sup_layer.choice[at(i, j)] = Choice::Sup(pos);
            }
        }
        let mut layers = vec![sup_layer];
        for _ in 0..cap {
            let prev = layers.last().unwrap();
            let mut best = vec![vec![f64::NEG_INFINITY; m * m]; n];
            let mut split = vec![vec![0usize; m * m]; n];
            for i in 0..m {
                for j in i..m {
                    best[0][at(i, j)] = weights[0] * prev.norm[at(i, j)];
                }
            }
            for k in 1..n {
                for i in 0..m {
                    for j in (i + k)..m {
                        let mut b = f64::NEG_INFINITY;
                        let mut arg = 0;
                        for mid in (i + k - 1)..j {
                            let v = best[k - 1][at(i, mid)] + weights[k] * prev.norm[at(mid + 1, j)];
                            if v > b {
                                b = v;
                                arg = mid + 1;
                            }
                        }
                        best[k][at(i, j)] = b;
                        split[k][at(i, j)] = arg;
                    }
                }
            }
            let mut layer = IntervalLayer { norm: prev.norm.clone(), choice: prev.choice.clone(), split };
            for (k, row) in best.iter().enumerate().skip(1) {
                for (idx, &v) in row.iter().enumerate() {
                    if v > layer.norm[idx] {
                        layer.norm[idx] = v;
                        layer.choice[idx] = Choice::Parts(k + 1);
                    }
                }
            }
            layers.push(layer);
        }
        CappedDp { m, layers }
    }

    fn functional(&self, h: usize, i: usize, j: usize, indices: &[usize], signs: &[f64]) -> WFunctional {
        let idx = i * self.m + j;
        // an unchanged value means the choice was inherited from a lower layer
        let mut h = h;
        while h > 0 && self.layers[h].norm[idx] == self.layers[h - 1].norm[idx] {
            h -= 1;
        }
        let layer = &self.layers[h];
        match layer.choice[idx] {
            Choice::Sup(t) => WFunctional::signed_leaf(signs[t], indices[t]),
            Choice::Parts(a) => {
                let mut parts = Vec::with_capacity(a);
                self.collect(h, a - 1, i, j, indices, signs, &mut parts);
                WFunctional::Node(parts)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn collect(
        &self,
        h: usize,
        k: usize,
        i: usize,
        j: usize,
        indices: &[usize],
        signs: &[f64],
        out: &mut Vec<WFunctional>,
    ) {
        if k == 0 {
            out.push(self.functional(h - 1, i, j, indices, signs));
            return;
        }
        let start = self.layers[h].split[k][i * self.m + j];
        self.collect(h, k - 1, i, start - 1, indices, signs, out);
        out.push(self.functional(h - 1, start, j, indices, signs));
    }
}

fn check(params: &Params) -> Result<()> {
    let report = validate(params);
    if report.is_ok() {
        Ok(())
    } else {
        Err(Error::InvalidParams(report))
    }
}

/// The exact norm of `x`.
pub fn ts_norm(x: &SparseVec, params: &Params) -> Result<f64> {
    check(params)?;
    Ok(IntervalDp::run(x.abs().values(), &params.b).value())
}

/// The exact norm together with a proper functional attaining it.
pub fn ts_norm_with_witness(x: &SparseVec, params: &Params) -> Result<(f64, Option<WFunctional>)> {
    check(params)?;
    if x.is_empty() {
        return Ok((0.0, None));
    }
    let indices = x.support();
    let signs = x.values();
    let dp = IntervalDp::run(x.abs().values(), &params.b);
    let f = dp.functional(0, dp.m - 1, &indices, &signs);
    Ok((dp.value(), Some(f)))
}

/// Supremum over functionals of height at most `max_height`, with an attaining
/// functional. Equals [`ts_norm`] once `max_height ≥ |supp x|`.
pub fn ts_norm_capped(x: &SparseVec, params: &Params, max_height: usize) -> Result<(f64, Option<WFunctional>)> {
    check(params)?;
    if x.is_empty() {
        return Ok((0.0, None));
    }
    let indices = x.support();
    let signs = x.values();
    let dp = CappedDp::run(&x.abs().values(), &params.b, max_height);
    let h = dp.layers.len() - 1;
    let value = dp.layers[h].norm[dp.m - 1];
    Ok((value, Some(dp.functional(h, 0, dp.m - 1, &indices, &signs))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_vector_has_norm_one() {
        assert_eq!(ts_norm(&SparseVec::unit(1), &Params::example_n2()).unwrap(), 1.0);
    }

    #[test]
    fn two_ones() {
        let p = Params::example_n2();
        let v = ts_norm(&SparseVec::ones(2), &p).unwrap();
        assert!((v - 1.316515).abs() < 1e-6);
    }

    #[test]
    fn four_ones_beat_branching_bound() {
        let p = Params::example_n2();
        let v = ts_norm(&SparseVec::ones(4), &p).unwrap();
        assert!(v >= p.weight_sum().powi(2) - 1e-12);
    }

    #[test]
    fn witness_attains_value_and_is_proper() {
        let p = Params::example_n3();
        let x: SparseVec = "1:0.3 2:-1 4:0.8 5:0.2 7:-0.6 9:1".parse().unwrap();
        let (v, f) = ts_norm_with_witness(&x, &p).unwrap();
        let f = f.unwrap();
        assert!(f.is_proper());
        f.check_well_formed(p.n).unwrap();
        assert!((f.eval(&x, &p) - v).abs() < 1e-12);
    }

    #[test]
    fn capped_converges_to_exact() {
        let p = Params::example_n2();
        let x = SparseVec::ones(9);
        let exact = ts_norm(&x, &p).unwrap();
        let (c0, _) = ts_norm_capped(&x, &p, 0).unwrap();
        assert_eq!(c0, 1.0);
        let (c1, f1) = ts_norm_capped(&x, &p, 1).unwrap();
        assert!((c1 - p.weight_sum()).abs() < 1e-12);
        assert!(f1.unwrap().height() <= 1);
        let (c9, f9) = ts_norm_capped(&x, &p, 9).unwrap();
        assert!((c9 - exact).abs() < 1e-12);
        assert!((f9.unwrap().eval(&x, &p) - exact).abs() < 1e-12);
    }

    #[test]
    fn invalid_params_rejected() {
        let p = Params::new(vec![0.6, 0.6], 2.0);
        assert!(matches!(ts_norm(&SparseVec::unit(1), &p), Err(Error::InvalidParams(_))));
    }
}
