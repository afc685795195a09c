//! Integer encoding of configurations and sorted cube sets.
//!
//! A configuration c over n points of dimension ℓ is encoded as
//! Σ_ω c(ω)·n^ω. The top vertex is the most significant digit, so a sorted
//! list of codes groups cubes by their top value, and
//! code([c0, c1]) = code(c0) + n^{2^ℓ}·code(c1) for concatenation along the
//! last axis.

use serde::{Deserialize, Serialize};

use crate::cube::{vertex_count, Configuration, PointId, MAX_DIM};
use crate::error::{Error, Result};
use crate::guard;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codec {
    points: u64,
    dim: usize,
    weights: Vec<u64>,
    /// n^{2^ℓ}, the number of configurations; None if it overflows u64.
    total: Option<u64>,
}

impl Codec {
    pub fn new(points: usize, dim: usize) -> Result<Self> {
        if dim > MAX_DIM {
            return Err(Error::InvalidInput(format!("cube dimension above {MAX_DIM}")));
        }
        let n = points as u64;
        let count = vertex_count(dim) as u64;
        let total = guard::pow(n, count);
        // Every digit weight must fit, even when n^{2^ℓ} itself does not.
        if n > 1 && guard::pow(n, count - 1) > u64::MAX as u128 {
            return Err(Error::SizeGuard { requested: total, limit: guard::limit() });
        }
        let mut weights = Vec::with_capacity(count as usize);
        let mut w: u64 = 1;
        for i in 0..count {
            weights.push(w);
            if i + 1 < count {
                w = w.wrapping_mul(n.max(1));
            }
        }
        let total = if total <= u64::MAX as u128 { Some(total as u64) } else { None };
        Ok(Codec { points: n, dim, weights, total })
    }

    pub fn points(&self) -> u64 {
        self.points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total(&self) -> Option<u64> {
        self.total
    }

    pub fn weight(&self, v: usize) -> u64 {
        self.weights[v]
    }

    /// n^{2^ℓ − 1}, the weight of the top vertex.
    pub fn top_weight(&self) -> u64 {
        *self.weights.last().unwrap()
    }

    pub fn encode(&self, values: &[PointId]) -> u64 {
        values
            .iter()
            .zip(&self.weights)
            .fold(0u64, |acc, (&x, &w)| acc + x as u64 * w)
    }

    pub fn decode_into(&self, mut code: u64, out: &mut [PointId]) {
        for slot in out.iter_mut() {
            *slot = (code % self.points) as PointId;
            code /= self.points;
        }
    }

    pub fn decode(&self, code: u64) -> Vec<PointId> {
        let mut out = vec![0; self.weights.len()];
        if self.points > 0 {
            self.decode_into(code, &mut out);
        }
        out
    }

    pub fn digit(&self, code: u64, v: usize) -> PointId {
        ((code / self.weights[v]) % self.points) as PointId
    }

    pub fn configuration(&self, code: u64) -> Configuration {
        Configuration::new(self.dim, self.decode(code)).expect("codec dimension is valid")
    }

    pub fn encode_config(&self, c: &Configuration) -> Result<u64> {
        if c.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: c.dim() });
        }
        if c.values().iter().any(|&x| x as u64 >= self.points) {
            return Err(Error::InvalidInput("configuration value out of range".into()));
        }
        Ok(self.encode(c.values()))
    }
}

/// The ℓ-cubes of a cubespace over `points` points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum CubeSet {
    /// Every configuration is a cube.
    All { points: u32, dim: usize },
    /// Strictly increasing codes.
    Listed { points: u32, dim: usize, codes: Vec<u64> },
}

impl CubeSet {
    pub fn all(points: usize, dim: usize) -> Result<Self> {
        let codec = Codec::new(points, dim)?;
        if codec.total().is_none() {
            return Err(Error::SizeGuard {
                requested: guard::pow(points as u64, vertex_count(dim) as u64),
                limit: guard::limit(),
            });
        }
        Ok(CubeSet::All { points: points as u32, dim })
    }

    /// Sorts and deduplicates.
    pub fn from_codes(points: usize, dim: usize, mut codes: Vec<u64>) -> Result<Self> {
        let codec = Codec::new(points, dim)?;
        codes.sort_unstable();
        codes.dedup();
        if let Some(total) = codec.total() {
            if codes.last().is_some_and(|&c| c >= total) {
                return Err(Error::InvalidInput("cube code out of range".into()));
            }
            if codes.len() as u64 == total && total > 0 {
                return Ok(CubeSet::All { points: points as u32, dim });
            }
        }
        Ok(CubeSet::Listed { points: points as u32, dim, codes })
    }

    pub fn from_configurations<'a>(
        points: usize,
        dim: usize,
        configs: impl IntoIterator<Item = &'a Configuration>,
    ) -> Result<Self> {
        let codec = Codec::new(points, dim)?;
        let codes = configs
            .into_iter()
            .map(|c| codec.encode_config(c))
            .collect::<Result<Vec<_>>>()?;
        Self::from_codes(points, dim, codes)
    }

    pub fn points(&self) -> usize {
        match self {
            CubeSet::All { points, .. } | CubeSet::Listed { points, .. } => *points as usize,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            CubeSet::All { dim, .. } | CubeSet::Listed { dim, .. } => *dim,
        }
    }

    pub fn codec(&self) -> Codec {
        Codec::new(self.points(), self.dim()).expect("cube set was built with a valid codec")
    }

    fn all_total(&self) -> u64 {
        (self.points() as u64)
            .checked_pow(vertex_count(self.dim()) as u32)
            .expect("full cube sets have a representable size")
    }

    pub fn is_all(&self) -> bool {
        matches!(self, CubeSet::All { .. })
    }

    pub fn len(&self) -> u64 {
        match self {
            CubeSet::All { .. } => self.all_total(),
            CubeSet::Listed { codes, .. } => codes.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, code: u64) -> bool {
        match self {
            CubeSet::All { .. } => code < self.all_total(),
            CubeSet::Listed { codes, .. } => codes.binary_search(&code).is_ok(),
        }
    }

    pub fn contains_config(&self, c: &Configuration) -> bool {
        c.dim() == self.dim()
            && c.values().iter().all(|&x| (x as usize) < self.points())
            && self.contains(self.codec().encode(c.values()))
    }

    /// Codes in increasing order.
    pub fn iter(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        match self {
            CubeSet::All { .. } => Box::new(0..self.all_total()),
            CubeSet::Listed { codes, .. } => Box::new(codes.iter().copied()),
        }
    }

    /// Index of a code in increasing order, if present.
    pub fn position(&self, code: u64) -> Option<usize> {
        match self {
            CubeSet::All { .. } => self.contains(code).then_some(code as usize),
            CubeSet::Listed { codes, .. } => codes.binary_search(&code).ok(),
        }
    }

    pub fn nth(&self, i: usize) -> u64 {
        match self {
            CubeSet::All { .. } => i as u64,
            CubeSet::Listed { codes, .. } => codes[i],
        }
    }

    pub fn to_codes(&self) -> Vec<u64> {
        self.iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode_roundtrip() {
        let codec = Codec::new(5, 2).unwrap();
        for code in 0..codec.total().unwrap() {
            assert_eq!(codec.encode(&codec.decode(code)), code);
        }
    }

    #[test]
    fn concatenation_code() {
        let codec1 = Codec::new(3, 1).unwrap();
        let codec2 = Codec::new(3, 2).unwrap();
        let c0 = Configuration::new(1, vec![2, 1]).unwrap();
        let c1 = Configuration::new(1, vec![0, 2]).unwrap();
        let c = Configuration::concatenate(&c0, &c1, 1).unwrap();
        let w = codec1.total().unwrap();
        assert_eq!(
            codec2.encode(c.values()),
            codec1.encode(c0.values()) + w * codec1.encode(c1.values())
        );
    }

    #[test]
    fn full_listing_collapses_to_all() {
        let s = CubeSet::from_codes(2, 1, vec![3, 0, 1, 2, 2]).unwrap();
        assert!(s.is_all());
        assert_eq!(s.len(), 4);
        let t = CubeSet::from_codes(2, 1, vec![3, 0]).unwrap();
        assert_eq!(t.to_codes(), vec![0, 3]);
        assert!(t.contains(3) && !t.contains(1));
    }

    #[test]
    fn overflow_is_guarded() {
        assert!(Codec::new(1 << 20, 4).is_err());
        assert!(Codec::new(60, 3).is_ok());
        assert!(Codec::new(60, 4).is_err());
    }
}
