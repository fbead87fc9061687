use std::fmt;

use serde::Serialize;

use crate::weights::Params;

/// Index of a node in its registry's arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct GammaId(pub usize);

impl fmt::Display for GammaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// How a node was generated. `eps` is `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GammaKind {
    /// The single node of rank 1; `c* = 0`.
    Base,
    /// `c*(x) = b_1 ε e*_ξ(x − i_p r_p x)`.
    Age1 { p: usize, eps: i8, xi: GammaId },
    /// `c*(x) = x(η) + b_a ε e*_ξ(x − i_p r_p x)` with `age(η) = a − 1`.
    AgeA { a: usize, p: usize, eta: GammaId, eps: i8, xi: GammaId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GammaNode {
    pub rank: usize,
    pub kind: GammaKind,
}

impl GammaNode {
    pub fn base() -> Self {
        GammaNode { rank: 1, kind: GammaKind::Base }
    }

    pub fn age1(rank: usize, p: usize, eps: i8, xi: GammaId) -> Self {
        GammaNode { rank, kind: GammaKind::Age1 { p, eps, xi } }
    }

    pub fn age_a(rank: usize, a: usize, p: usize, eta: GammaId, eps: i8, xi: GammaId) -> Self {
        GammaNode { rank, kind: GammaKind::AgeA { a, p, eta, eps, xi } }
    }

    pub fn age(&self) -> usize {
        match self.kind {
            GammaKind::Base | GammaKind::Age1 { .. } => 1,
            GammaKind::AgeA { a, .. } => a,
        }
    }

    /// `w(γ) = b_{age}`.
    pub fn weight(&self, params: &Params) -> f64 {
        params.weight(self.age())
    }

    /// The cut `p`, if any.
    pub fn cut(&self) -> Option<usize> {
        match self.kind {
            GammaKind::Base => None,
            GammaKind::Age1 { p, .. } | GammaKind::AgeA { p, .. } => Some(p),
        }
    }

    pub fn xi(&self) -> Option<GammaId> {
        match self.kind {
            GammaKind::Base => None,
            GammaKind::Age1 { xi, .. } | GammaKind::AgeA { xi, .. } => Some(xi),
        }
    }

    pub fn eta(&self) -> Option<GammaId> {
        match self.kind {
            GammaKind::AgeA { eta, .. } => Some(eta),
            _ => None,
        }
    }

    pub fn eps(&self) -> f64 {
        match self.kind {
            GammaKind::Base => 0.0,
            GammaKind::Age1 { eps, .. } | GammaKind::AgeA { eps, .. } => eps as f64,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            GammaKind::Base => "base",
            GammaKind::Age1 { .. } => "age1",
            GammaKind::AgeA { .. } => "agea",
        }
    }
}
