use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A finitely supported real sequence with 1-based indices.
///
/// Entries are kept sorted by index with no explicit zeros, so the support is
/// exactly the list of stored indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVec {
    entries: Vec<(usize, f64)>,
}

impl SparseVec {
    pub fn zero() -> Self {
        SparseVec::default()
    }

    /// Unit vector `e_k`.
    pub fn unit(k: usize) -> Self {
        assert!(k >= 1, "indices are 1-based");
        SparseVec { entries: vec![(k, 1.0)] }
    }

    /// Builds from arbitrary `(index, value)` pairs; zeros are dropped.
    pub fn from_pairs<I: IntoIterator<Item = (usize, f64)>>(pairs: I) -> Result<Self> {
        let mut entries: Vec<(usize, f64)> = pairs.into_iter().filter(|&(_, v)| v != 0.0).collect();
        entries.sort_by_key(|&(i, _)| i);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Parse(format!("duplicate index {}", w[0].0)));
            }
        }
        if entries.iter().any(|&(i, v)| i == 0 || !v.is_finite()) {
            return Err(Error::Parse("indices must be >= 1 and values finite".into()));
        }
        Ok(SparseVec { entries })
    }

    /// `Σ_{l=1}^{len} e_l`.
    pub fn ones(len: usize) -> Self {
        SparseVec { entries: (1..=len).map(|i| (i, 1.0)).collect() }
    }

    /// Coefficients `a_1, ..., a_len` placed on indices `1..=len`.
    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        SparseVec { entries: coeffs.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (i + 1, v)).collect() }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        self.entries.iter().map(|&(i, _)| i).collect()
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.entries.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn linf(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, &(_, v)| m.max(v.abs()))
    }

    /// The ℓ_p norm for finite `p ≥ 1`.
    pub fn lp(&self, p: f64) -> f64 {
        let max = self.linf();
        if max == 0.0 {
            return 0.0;
        }
        // scaled to keep large p from underflowing
        let s: f64 = self.entries.iter().map(|&(_, v)| (v.abs() / max).powf(p)).sum();
        max * s.powf(1.0 / p)
    }

    pub fn abs(&self) -> Self {
        SparseVec { entries: self.entries.iter().map(|&(i, v)| (i, v.abs())).collect() }
    }

    /// Restriction to the indices for which `keep` holds.
    pub fn restrict<F: Fn(usize) -> bool>(&self, keep: F) -> Self {
        SparseVec { entries: self.entries.iter().copied().filter(|&(i, _)| keep(i)).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return SparseVec::zero();
        }
        SparseVec { entries: self.entries.iter().map(|&(i, v)| (i, v * s)).collect() }
    }

    /// Flips the sign of every entry whose index is in `indices`.
    pub fn flip_signs(&self, indices: &[usize]) -> Self {
        SparseVec {
            entries: self.entries.iter().map(|&(i, v)| if indices.contains(&i) { (i, -v) } else { (i, v) }).collect(),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|&(_, v)| v).collect()
    }
}

impl fmt::Display for SparseVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|(i, v)| format!("{i}:{v}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Parses whitespace-separated `index:value` pairs.
impl FromStr for SparseVec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for tok in s.split_whitespace() {
            let (i, v) =
                tok.split_once(':').ok_or_else(|| Error::Parse(format!("expected index:value, got `{tok}`")))?;
            let i: usize = i.parse().map_err(|_| Error::Parse(format!("bad index `{i}`")))?;
            let v: f64 = v.parse().map_err(|_| Error::Parse(format!("bad value `{v}`")))?;
            pairs.push((i, v));
        }
        SparseVec::from_pairs(pairs)
    }
}
