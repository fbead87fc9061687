use crate::bd::{GammaId, GammaRegistry};
use crate::error::{Error, Result};

/// `x ∈ ℓ∞(Γ_q)`, standing for `i_q(x)`; values are indexed by materialized
/// position.
#[derive(Debug, Clone, PartialEq)]
pub struct BDVec {
    stage: usize,
    values: Vec<f64>,
}

impl BDVec {
    pub fn zeros(reg: &GammaRegistry, stage: usize) -> Result<Self> {
        check_stage(reg, stage)?;
        Ok(BDVec { stage, values: vec![0.0; reg.gamma_len(stage)] })
    }

    pub fn from_values(reg: &GammaRegistry, stage: usize, values: Vec<f64>) -> Result<Self> {
        check_stage(reg, stage)?;
        if values.len() != reg.gamma_len(stage) {
            return Err(Error::StageMismatch { expected: reg.gamma_len(stage), got: values.len() });
        }
        Ok(BDVec { stage, values })
    }

    /// The unit vector `e_γ ∈ ℓ∞(Γ_q)`; it lies in `M_q` when `rank γ = q`.
    pub fn unit(reg: &GammaRegistry, id: GammaId, stage: usize) -> Result<Self> {
        let pos = reg.position(id).ok_or(Error::UnknownGamma(id))?;
        let mut x = BDVec::zeros(reg, stage)?;
        if pos >= x.values.len() {
            return Err(Error::StageMismatch { expected: stage, got: reg.node(id)?.rank });
        }
        x.values[pos] = 1.0;
        Ok(x)
    }

    /// The FDD basis vector of `M_{rank γ}` attached to `γ`.
    pub fn fdd_basis(reg: &GammaRegistry, id: GammaId) -> Result<Self> {
        BDVec::unit(reg, id, reg.node(id)?.rank)
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, pos: usize) -> f64 {
        self.values.get(pos).copied().unwrap_or(0.0)
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        BDVec { stage: self.stage, values: self.values.iter().map(|v| v * s).collect() }
    }

    /// `self + a·other`; both at the same stage.
    pub fn axpy(&self, a: f64, other: &BDVec) -> Result<Self> {
        if self.stage != other.stage {
            return Err(Error::StageMismatch { expected: self.stage, got: other.stage });
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect();
        Ok(BDVec { stage: self.stage, values })
    }

    pub fn sub(&self, other: &BDVec) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// `r_q(x)`.
    pub fn restrict(&self, reg: &GammaRegistry, q: usize) -> Result<Self> {
        if q > self.stage {
            return Err(Error::StageMismatch { expected: self.stage, got: q });
        }
        Ok(BDVec { stage: q, values: self.values[..reg.gamma_len(q)].to_vec() })
    }

    /// Largest `t` with `r_t(x) = 0`.
    pub fn zero_floor(&self, reg: &GammaRegistry) -> usize {
        let first = self.values.iter().position(|&v| v != 0.0);
        match first {
            None => self.stage,
            Some(pos) => reg.node_unchecked(reg.member(pos)).rank - 1,
        }
    }
}

fn check_stage(reg: &GammaRegistry, stage: usize) -> Result<()> {
    if stage == 0 || stage > reg.stages() {
        return Err(Error::StageNotBuilt { requested: stage, built: reg.stages() });
    }
    Ok(())
}
