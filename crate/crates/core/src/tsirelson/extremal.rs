use crate::error::{Error, Result};
use crate::tsirelson::{ts_norm, SparseVec};
use crate::weights::Params;

/// `x_l = Σ_{s ∈ {1..n}^l} a_s^{r'/r} e_s` with `a_s = Π b_{s_i}`, the
/// sequences `s` enumerated lexicographically onto `1..=n^l`.
pub fn prop14_vector(params: &Params, l: u32, cap: usize) -> Result<SparseVec> {
    let n = params.n;
    let size = n.checked_pow(l).filter(|&s| s <= cap).ok_or(Error::SizeCap { size: n.saturating_pow(l), cap })?;
    let expo = params.r_conj / params.r;
    let powered: Vec<f64> = params.b.iter().map(|b| b.powf(expo)).collect();
    let mut coeffs = vec![1.0; size];
    // digit t of the index picks the weight of level t
    let mut block = size;
    for _ in 0..l {
        block /= n;
        for (idx, c) in coeffs.iter_mut().enumerate() {
            *c *= powered[(idx / block) % n];
        }
    }
    Ok(SparseVec::from_coeffs(&coeffs))
}

/// `(Σ_i b_i^{r' p'/r})^{l/p'}`, the `ℓ_{p'}` norm of `x_l`.
pub fn prop14_lp_closed_form(params: &Params, l: u32, pprime: f64) -> f64 {
    let s: f64 = params.b.iter().map(|b| b.powf(params.r_conj * pprime / params.r)).sum();
    s.powf(l as f64 / pprime)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich {
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub ok: bool,
}

impl Sandwich {
    /// `‖x‖ / ‖x‖_r`, the sample entering the lower-constant estimate.
    pub fn ratio(&self) -> f64 {
        if self.upper == 0.0 {
            1.0
        } else {
            self.value / self.upper
        }
    }
}

/// `‖x‖_∞ ≤ ‖x‖ ≤ ‖x‖_r`.
pub fn lr_sandwich(x: &SparseVec, params: &Params) -> Result<Sandwich> {
    let lower = x.linf();
    let value = ts_norm(x, params)?;
    let upper = x.lp(params.r);
    let tol = params.norm_tol;
    let ok = lower <= value + tol && value <= upper + tol;
    Ok(Sandwich { lower, value, upper, ok })
}
