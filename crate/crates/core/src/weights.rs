//! Global parameters `(n, b, r)` and the constants derived from them.
//!
//! Every other module takes a `&Params` that has passed [`validate`]. The
//! weights are generically irrational, so all checks run against explicit
//! tolerances rather than exact arithmetic.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for algebraic identities (`Σ b^r' = 1`, `1/r + 1/r' = 1`, ...).
pub const DEFAULT_TOL: f64 = 1e-12;
/// Tolerance for comparisons between computed norms.
pub const DEFAULT_NORM_TOL: f64 = 1e-9;
/// Relative spread used to make a solved weight tail strictly descending.
pub const DESCENT_ETA: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub b: Vec<f64>,
    pub r: f64,
    pub r_conj: f64,
    /// Uniform bound for the extension operators, `1 / (1 - 2 b_2)`.
    pub c: f64,
    pub tol: f64,
    pub norm_tol: f64,
    /// Empirical lower ℓ_r constant, filled in by `estimates::estimate_m`.
    pub m_est: Option<f64>,
}

impl Params {
    /// Builds a parameter set from weights and exponent; derived constants are
    /// computed but nothing is validated.
    pub fn new(b: Vec<f64>, r: f64) -> Self {
        let r_conj = conjugate(r);
        let c = if b.len() >= 2 { 1.0 / (1.0 - 2.0 * b[1]) } else { f64::NAN };
        Params { n: b.len(), b, r, r_conj, c, tol: DEFAULT_TOL, norm_tol: DEFAULT_NORM_TOL, m_est: None }
    }

    /// Weight `b_i` for a 1-based position `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.b[i - 1]
    }

    pub fn b_n(&self) -> f64 {
        self.b[self.n - 1]
    }

    pub fn weight_sum(&self) -> f64 {
        self.b.iter().sum()
    }

    /// Returns `self` if it validates, otherwise the violation report as an error.
    pub fn checked(self) -> Result<Self> {
        let report = validate(&self);
        if report.is_ok() {
            Ok(self)
        } else {
            Err(Error::InvalidParams(report))
        }
    }

    pub fn with_m_est(mut self, m: f64) -> Self {
        self.m_est = Some(m);
        self
    }

    /// The `n = 2, r = 2, b = (√0.84, 0.4)` set used throughout the tests; `C = 5`.
    pub fn example_n2() -> Self {
        Params::new(vec![0.84f64.sqrt(), 0.4], 2.0)
    }

    /// The `n = 3, r = 2, b = (0.9, 0.35, √0.0675)` set.
    pub fn example_n3() -> Self {
        Params::new(vec![0.9, 0.35, (1.0f64 - 0.81 - 0.1225).sqrt()], 2.0)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_config_str(&text)
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        let file: ParamsFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.b.len() != file.n {
            return Err(Error::Parse(format!("n = {} but b has {} entries", file.n, file.b.len())));
        }
        let mut p = Params::new(file.b, file.r);
        if let Some(t) = file.tol {
            p.tol = t;
        }
        if let Some(t) = file.norm_tol {
            p.norm_tol = t;
        }
        p.m_est = file.m_est;
        Ok(p)
    }

    pub fn to_config_string(&self) -> String {
        let file = ParamsFile {
            n: self.n,
            b: self.b.clone(),
            r: self.r,
            tol: Some(self.tol),
            norm_tol: Some(self.norm_tol),
            m_est: self.m_est,
        };
        toml::to_string(&file).expect("params serialize")
    }
}

/// On-disk key-value form of [`Params`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsFile {
    pub n: usize,
    pub b: Vec<f64>,
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_est: Option<f64>,
}

pub fn conjugate(r: f64) -> f64 {
    r / (r - 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    TooFewWeights { n: usize },
    LengthMismatch { n: usize, len: usize },
    ExponentOutOfRange { r: f64 },
    NonPositive { index: usize, value: f64 },
    FirstNotBelowOne { value: f64 },
    TailNotBelowHalf { index: usize, value: f64 },
    NotDescending { index: usize },
    SumNotAboveOne { sum: f64 },
    PowerSumResidual { residual: f64 },
    ConjugateResidual { residual: f64 },
    ExtensionBoundResidual { residual: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewWeights { n } => write!(f, "n = {n} < 2"),
            Violation::LengthMismatch { n, len } => write!(f, "n = {n} but {len} weights"),
            Violation::ExponentOutOfRange { r } => write!(f, "r = {r} not in (1, inf)"),
            Violation::NonPositive { index, value } => write!(f, "b_{index} = {value} <= 0"),
            Violation::FirstNotBelowOne { value } => write!(f, "b_1 = {value} >= 1"),
            Violation::TailNotBelowHalf { index, value } => {
                write!(f, "b_{index} = {value} >= 1/2")
            }
            Violation::NotDescending { index } => {
                write!(f, "b_{} <= b_{} (not strictly descending)", index, index + 1)
            }
            Violation::SumNotAboveOne { sum } => write!(f, "sum b_i = {sum} <= 1"),
            Violation::PowerSumResidual { residual } => {
                write!(f, "|sum b_i^r' - 1| = {residual}")
            }
            Violation::ConjugateResidual { residual } => write!(f, "|1/r + 1/r' - 1| = {residual}"),
            Violation::ExtensionBoundResidual { residual } => {
                write!(f, "|C (1 - 2 b_2) - 1| = {residual}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks every parameter constraint, reporting each violation with its residual.
// negated comparisons so that NaN residuals count as violations
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn validate(p: &Params) -> ValidationReport {
    let mut v = Vec::new();
    if p.n < 2 {
        v.push(Violation::TooFewWeights { n: p.n });
    }
    if p.b.len() != p.n {
        v.push(Violation::LengthMismatch { n: p.n, len: p.b.len() });
        return ValidationReport { violations: v };
    }
    if !(p.r > 1.0 && p.r.is_finite()) {
        v.push(Violation::ExponentOutOfRange { r: p.r });
    }
    for (i, &bi) in p.b.iter().enumerate() {
        if bi <= 0.0 {
            v.push(Violation::NonPositive { index: i + 1, value: bi });
        }
    }
    if let Some(&b1) = p.b.first() {
        if b1 >= 1.0 {
            v.push(Violation::FirstNotBelowOne { value: b1 });
        }
    }
    for (i, &bi) in p.b.iter().enumerate().skip(1) {
        if bi >= 0.5 {
            v.push(Violation::TailNotBelowHalf { index: i + 1, value: bi });
        }
    }
    for i in 0..p.b.len().saturating_sub(1) {
        if p.b[i] <= p.b[i + 1] {
            v.push(Violation::NotDescending { index: i + 1 });
        }
    }
    let sum = p.weight_sum();
    if sum <= 1.0 {
        v.push(Violation::SumNotAboveOne { sum });
    }
    let residual = (p.b.iter().map(|bi| bi.powf(p.r_conj)).sum::<f64>() - 1.0).abs();
    if !(residual <= p.tol) {
        v.push(Violation::PowerSumResidual { residual });
    }
    let residual = (1.0 / p.r + 1.0 / p.r_conj - 1.0).abs();
    if !(residual <= p.tol) {
        v.push(Violation::ConjugateResidual { residual });
    }
    if p.n >= 2 {
        let residual = (p.c * (1.0 - 2.0 * p.b[1]) - 1.0).abs();
        // C <= 0 exactly when b_2 >= 1/2, which is reported above
        let sign_ok = p.c > 0.0 || p.b[1] >= 0.5;
        if !sign_ok || !(residual <= p.tol) {
            v.push(Violation::ExtensionBoundResidual { residual });
        }
    }
    ValidationReport { violations: v }
}

/// Solves for a weight tail `b_2 > ... > b_n` with `Σ b_i^r' = 1` given `b_1`.
///
/// The tail starts from the equal solution and is spread by
/// `b_i ∝ 1 + η (n - i)`, then rescaled back onto the power-sum constraint.
pub fn derive_weights(n: usize, r: f64, b1: f64) -> Result<Params> {
    let infeasible = |reason: &str| Error::Infeasible { n, r, b1, reason: reason.to_string() };
    if n < 2 {
        return Err(infeasible("n must be at least 2"));
    }
    if !(r > 1.0 && r.is_finite()) {
        return Err(infeasible("r must lie in (1, inf)"));
    }
    if !(b1 > 0.0 && b1 < 1.0) {
        return Err(infeasible("b1 must lie in (0, 1)"));
    }
    let rc = conjugate(r);
    let rest = 1.0 - b1.powf(rc);
    let shape: Vec<f64> = (2..=n).map(|i| 1.0 + DESCENT_ETA * (n - i) as f64).collect();
    let shape_mass: f64 = shape.iter().map(|s| s.powf(rc)).sum();
    let scale = (rest / shape_mass).powf(1.0 / rc);
    let mut b = vec![b1];
    b.extend(shape.iter().map(|s| s * scale));
    if b[1] >= 0.5 {
        return Err(infeasible(&format!("b_2 = {:.6} is not below 1/2", b[1])));
    }
    if b[1] >= b1 {
        return Err(infeasible(&format!("b_2 = {:.6} is not below b_1", b[1])));
    }
    if b.iter().sum::<f64>() <= 1.0 {
        return Err(infeasible("sum of weights does not exceed 1"));
    }
    Params::new(b, r).checked()
}
