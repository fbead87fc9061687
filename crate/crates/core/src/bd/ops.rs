use std::collections::BTreeSet;

use crate::bd::eval::{Evaluator, Row};
use crate::bd::{BDVec, GammaId, GammaRegistry};
use crate::error::{Error, Result};
use crate::weights::Params;

type Leaf<'x> = Box<dyn Fn(usize) -> f64 + 'x>;

/// Coordinate evaluations of one fixed vector, memoized across queries.
pub struct Coords<'a> {
    reg: &'a GammaRegistry,
    inner: Evaluator<'a, f64, Leaf<'a>>,
}

impl<'a> Coords<'a> {
    pub fn new(reg: &'a GammaRegistry, params: &'a Params, x: &'a BDVec) -> Self {
        let leaf: Leaf<'a> = Box::new(move |pos| x.get(pos));
        let floor = x.zero_floor(reg);
        Coords { reg, inner: Evaluator::new(reg, &params.b, x.stage(), floor, leaf) }
    }

    /// `(i_t r_t x)(γ)`.
    pub fn at(&mut self, id: GammaId, t: usize) -> f64 {
        self.inner.at(id, t)
    }

    /// `e*_γ(x)`.
    pub fn e_star(&mut self, id: GammaId) -> f64 {
        self.inner.e_star(id)
    }

    /// `c*_γ(x)`.
    pub fn c_star(&mut self, id: GammaId) -> f64 {
        self.inner.c_star(id)
    }

    /// `d*_γ(x) = e*_γ(x) − c*_γ(x)`.
    pub fn d_star(&mut self, id: GammaId) -> f64 {
        self.e_star(id) - self.c_star(id)
    }

    /// `e*_γ(P_{(p,q]} x)`.
    pub fn proj(&mut self, id: GammaId, p: usize, q: usize) -> f64 {
        if q <= p {
            return 0.0;
        }
        self.at(id, q) - self.at(id, p)
    }

    /// Values of `i_{s,m}(x)` on `Γ_m`.
    pub fn extended(&mut self, m: usize) -> Vec<f64> {
        let ids = self.reg.gamma(m).to_vec();
        ids.into_iter().map(|id| self.e_star(id)).collect()
    }
}

fn check_built(reg: &GammaRegistry, m: usize) -> Result<()> {
    if m > reg.stages() {
        return Err(Error::StageNotBuilt { requested: m, built: reg.stages() });
    }
    Ok(())
}

fn resolve(reg: &GammaRegistry, id: GammaId) -> Result<()> {
    reg.node(id).map(|_| ())
}

/// `i_{q,m}(x)` for `x` at stage `q ≤ m`.
pub fn extend(x: &BDVec, m: usize, reg: &GammaRegistry, params: &Params) -> Result<BDVec> {
    check_built(reg, m)?;
    if m < x.stage() {
        return Err(Error::StageMismatch { expected: x.stage(), got: m });
    }
    let values = Coords::new(reg, params, x).extended(m);
    BDVec::from_values(reg, m, values)
}

/// `P_{(p,q]} x = i_q r_q x − i_p r_p x`, kept at the stage of `x`.
pub fn project(x: &BDVec, p: usize, q: usize, reg: &GammaRegistry, params: &Params) -> Result<BDVec> {
    let m = x.stage();
    if p > q || q > m {
        return Err(Error::BadInterval { p, q, m });
    }
    let mut c = Coords::new(reg, params, x);
    let values = reg.gamma(m).iter().map(|&id| c.proj(id, p, q)).collect();
    BDVec::from_values(reg, m, values)
}

pub fn e_star(id: GammaId, x: &BDVec, reg: &GammaRegistry, params: &Params) -> Result<f64> {
    resolve(reg, id)?;
    Ok(Coords::new(reg, params, x).e_star(id))
}

pub fn d_star(id: GammaId, x: &BDVec, reg: &GammaRegistry, params: &Params) -> Result<f64> {
    resolve(reg, id)?;
    Ok(Coords::new(reg, params, x).d_star(id))
}

/// `c*_γ(x)` for `x` at stage `rank γ − 1`.
pub fn c_star_apply(id: GammaId, x: &BDVec, reg: &GammaRegistry, params: &Params) -> Result<f64> {
    let rank = reg.node(id)?.rank;
    if x.stage() + 1 != rank {
        return Err(Error::StageMismatch { expected: rank - 1, got: x.stage() });
    }
    Ok(Coords::new(reg, params, x).c_star(id))
}

/// Rows of `i_{q,m}` over the positions of `Γ_q`, one per node of `Γ_m`.
pub(crate) fn extension_rows(q: usize, m: usize, reg: &GammaRegistry, params: &Params) -> Result<Vec<Row>> {
    check_built(reg, m)?;
    if q == 0 || q > m {
        return Err(Error::BadInterval { p: q, q: m, m });
    }
    let mut ev = Evaluator::new(reg, &params.b, q, 0, |pos| Row(vec![(pos, 1.0)]));
    Ok(reg.gamma(m).iter().map(|&id| ev.e_star(id)).collect())
}

/// `‖i_{q,m}‖ = max_γ ‖row_γ‖_1`.
pub fn op_norm_i(q: usize, m: usize, reg: &GammaRegistry, params: &Params) -> Result<f64> {
    Ok(extension_rows(q, m, reg, params)?.iter().map(Row::l1).fold(0.0, f64::max))
}

/// Operator norm of `P_{(p,q]}` on `ℓ∞(Γ_m)`.
pub fn op_norm_projection(p: usize, q: usize, m: usize, reg: &GammaRegistry, params: &Params) -> Result<f64> {
    if p > q || q > m {
        return Err(Error::BadInterval { p, q, m });
    }
    if p == q {
        return Ok(0.0);
    }
    let mut ev = Evaluator::new(reg, &params.b, m, 0, |pos| Row(vec![(pos, 1.0)]));
    let mut best: f64 = 0.0;
    for &id in reg.gamma(m) {
        let mut row = ev.at(id, q);
        let low = ev.at(id, p);
        crate::bd::eval::Lin::add_scaled(&mut row, -1.0, &low);
        best = best.max(row.l1());
    }
    Ok(best)
}

/// Finite-horizon sup norm with its stabilization diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupNorm {
    pub value: f64,
    pub horizon: usize,
    /// Value at `horizon` minus value at `horizon − 1` (0 when undefined).
    pub increment: f64,
}

/// `max_{γ ∈ Γ_m} |i_{s,m}(x)(γ)|`.
pub fn bd_sup_norm(x: &BDVec, m: usize, reg: &GammaRegistry, params: &Params) -> Result<SupNorm> {
    check_built(reg, m)?;
    let m = m.max(x.stage());
    let mut c = Coords::new(reg, params, x);
    let mut prev = 0.0;
    let mut value = 0.0;
    for q in 1..=m {
        prev = value;
        for &id in reg.delta(q) {
            value = f64::max(value, c.e_star(id).abs());
        }
    }
    let increment = if m > x.stage() { value - prev } else { 0.0 };
    Ok(SupNorm { value, horizon: m, increment })
}

/// `supp x = {q : P_{q} x ≠ 0}`, entries below `tol` treated as zero.
pub fn fdd_support(x: &BDVec, reg: &GammaRegistry, params: &Params, tol: f64) -> BTreeSet<usize> {
    let mut c = Coords::new(reg, params, x);
    let mut out = BTreeSet::new();
    for q in 1..=x.stage() {
        if reg.delta(q).iter().any(|&id| c.d_star(id).abs() > tol) {
            out.insert(q);
        }
    }
    out
}

/// `max supp x_i < min supp x_{i+1} − 1` for every consecutive pair.
pub fn is_skipped(supports: &[BTreeSet<usize>]) -> bool {
    supports.windows(2).all(|w| match (w[0].last(), w[1].first()) {
        (Some(&hi), Some(&lo)) => hi + 1 < lo,
        _ => true,
    })
}

/// `supp x_k ⊂ (q_k + k, q_{k+1})` for `k = 1..l`, given `q_1 < … < q_{l+1}`.
pub fn prop3_gaps(supports: &[BTreeSet<usize>], qs: &[usize]) -> bool {
    if qs.len() != supports.len() + 1 || qs.windows(2).any(|w| w[0] >= w[1]) {
        return false;
    }
    supports.iter().enumerate().all(|(i, s)| {
        let k = i + 1;
        s.iter().all(|&r| r > qs[i] + k && r < qs[i + 1])
    })
}
