//! Discrete cubes {0,1}^ℓ, their faces and morphisms, and configurations.
//!
//! A vertex ω is stored as an integer whose bit `i` is ω_i (coordinates are
//! 0-based). Vertices, faces and morphisms are listed in ascending integer
//! or lexicographic order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guard;

pub type PointId = u32;
pub type Vertex = usize;

/// Largest cube dimension handled anywhere in the crate. Vertex sets are
/// kept in a `u64` mask, so 2^ℓ must fit in 64.
pub const MAX_DIM: usize = 6;

pub fn vertex_count(dim: usize) -> usize {
    1 << dim
}

pub fn top_vertex(dim: usize) -> Vertex {
    vertex_count(dim) - 1
}

/// |ω|
pub fn weight(v: Vertex) -> u32 {
    v.count_ones()
}

/// (−1)^{|ω|}
pub fn sign(v: Vertex) -> i64 {
    if weight(v) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Inserts `bit` at position `axis`, shifting higher coordinates up.
pub fn insert_bit(v: Vertex, axis: usize, bit: bool) -> Vertex {
    let low = v & ((1 << axis) - 1);
    let high = v >> axis;
    low | ((bit as usize) << axis) | (high << (axis + 1))
}

/// Removes coordinate `axis`, shifting higher coordinates down.
pub fn remove_bit(v: Vertex, axis: usize) -> Vertex {
    let low = v & ((1 << axis) - 1);
    let high = v >> (axis + 1);
    low | (high << axis)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Coord {
    Zero,
    One,
    Proj(usize),
    Flip(usize),
}

impl Coord {
    fn eval(self, v: Vertex) -> bool {
        match self {
            Coord::Zero => false,
            Coord::One => true,
            Coord::Proj(i) => (v >> i) & 1 == 1,
            Coord::Flip(i) => (v >> i) & 1 == 0,
        }
    }

    /// Position in the canonical order 0, 1, ω_0, 1−ω_0, ω_1, ...
    fn rank(self) -> usize {
        match self {
            Coord::Zero => 0,
            Coord::One => 1,
            Coord::Proj(i) => 2 + 2 * i,
            Coord::Flip(i) => 3 + 2 * i,
        }
    }

    fn from_rank(r: usize) -> Coord {
        match r {
            0 => Coord::Zero,
            1 => Coord::One,
            r if r % 2 == 0 => Coord::Proj((r - 2) / 2),
            r => Coord::Flip((r - 3) / 2),
        }
    }
}

/// A map {0,1}^source_dim → {0,1}^target_dim, one coordinate rule per
/// target coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CubeMorphism {
    source_dim: usize,
    coords: Vec<Coord>,
}

impl CubeMorphism {
    pub fn new(source_dim: usize, coords: Vec<Coord>) -> Result<Self> {
        for c in &coords {
            if let Coord::Proj(i) | Coord::Flip(i) = *c {
                if i >= source_dim {
                    return Err(Error::InvalidInput(format!(
                        "coordinate index {i} out of range for source dimension {source_dim}"
                    )));
                }
            }
        }
        if source_dim > MAX_DIM || coords.len() > MAX_DIM {
            return Err(Error::InvalidInput(format!("cube dimension above {MAX_DIM}")));
        }
        Ok(CubeMorphism { source_dim, coords })
    }

    pub fn identity(dim: usize) -> Self {
        CubeMorphism {
            source_dim: dim,
            coords: (0..dim).map(Coord::Proj).collect(),
        }
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn apply_vertex(&self, v: Vertex) -> Vertex {
        self.coords
            .iter()
            .enumerate()
            .fold(0, |acc, (j, c)| acc | ((c.eval(v) as usize) << j))
    }

    /// Table ω ↦ φ(ω) over the source cube.
    pub fn vertex_table(&self) -> Vec<Vertex> {
        (0..vertex_count(self.source_dim))
            .map(|v| self.apply_vertex(v))
            .collect()
    }

    /// `self ∘ inner`, computed on the coordinate rules.
    pub fn compose(&self, inner: &CubeMorphism) -> Result<CubeMorphism> {
        if inner.target_dim() != self.source_dim {
            return Err(Error::DimensionMismatch {
                expected: self.source_dim,
                found: inner.target_dim(),
            });
        }
        let coords = self
            .coords
            .iter()
            .map(|c| match *c {
                Coord::Zero | Coord::One => *c,
                Coord::Proj(i) => inner.coords[i],
                Coord::Flip(i) => match inner.coords[i] {
                    Coord::Zero => Coord::One,
                    Coord::One => Coord::Zero,
                    Coord::Proj(k) => Coord::Flip(k),
                    Coord::Flip(k) => Coord::Proj(k),
                },
            })
            .collect();
        Ok(CubeMorphism {
            source_dim: inner.source_dim,
            coords,
        })
    }
}

/// All (2+2ℓ)^k morphisms {0,1}^ℓ → {0,1}^k, lexicographic in the
/// coordinate list under the order 0 < 1 < ω_0 < 1−ω_0 < ω_1 < ...
pub fn enumerate_morphisms(source_dim: usize, target_dim: usize) -> Result<Vec<CubeMorphism>> {
    if source_dim > MAX_DIM || target_dim > MAX_DIM {
        return Err(Error::InvalidInput(format!("cube dimension above {MAX_DIM}")));
    }
    let base = 2 + 2 * source_dim;
    let total = guard::pow(base as u64, target_dim as u64);
    guard::check(total)?;
    let mut out = Vec::with_capacity(total as usize);
    for idx in 0..total as usize {
        let mut coords = vec![Coord::Zero; target_dim];
        let mut r = idx;
        for j in (0..target_dim).rev() {
            coords[j] = Coord::from_rank(r % base);
            r /= base;
        }
        out.push(CubeMorphism { source_dim, coords });
    }
    debug_assert!(out.windows(2).all(|w| {
        let a: Vec<_> = w[0].coords.iter().map(|c| c.rank()).collect();
        let b: Vec<_> = w[1].coords.iter().map(|c| c.rank()).collect();
        a < b
    }));
    Ok(out)
}

/// A face of {0,1}^ℓ: the vertices agreeing with `fixed` on its coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Face {
    ambient_dim: usize,
    /// Sorted by coordinate.
    fixed: Vec<(usize, bool)>,
}

impl Face {
    pub fn new(ambient_dim: usize, mut fixed: Vec<(usize, bool)>) -> Result<Self> {
        fixed.sort();
        for w in fixed.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidInput(format!("coordinate {} fixed twice", w[0].0)));
            }
        }
        if fixed.iter().any(|&(i, _)| i >= ambient_dim) {
            return Err(Error::InvalidInput("fixed coordinate out of range".into()));
        }
        Ok(Face { ambient_dim, fixed })
    }

    pub fn vertex(dim: usize, v: Vertex) -> Self {
        Face {
            ambient_dim: dim,
            fixed: (0..dim).map(|i| (i, (v >> i) & 1 == 1)).collect(),
        }
    }

    pub fn whole(dim: usize) -> Self {
        Face { ambient_dim: dim, fixed: Vec::new() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn codim(&self) -> usize {
        self.fixed.len()
    }

    pub fn fixed(&self) -> &[(usize, bool)] {
        &self.fixed
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.fixed.iter().all(|&(i, b)| ((v >> i) & 1 == 1) == b)
    }

    pub fn members(&self) -> Vec<Vertex> {
        (0..vertex_count(self.ambient_dim))
            .filter(|&v| self.contains(v))
            .collect()
    }

    /// Member vertices as a bit mask over {0,1}^ℓ.
    pub fn mask(&self) -> u64 {
        self.members().iter().fold(0u64, |m, &v| m | (1u64 << v))
    }

    /// Whether every fixed value is 1.
    pub fn is_upper(&self) -> bool {
        self.fixed.iter().all(|&(_, b)| b)
    }
}

/// All C(ℓ,d)·2^d faces of codimension d: coordinate subsets in
/// lexicographic order, then the fixed values as a binary counter.
pub fn enumerate_faces(dim: usize, codim: usize) -> Vec<Face> {
    let mut out = Vec::new();
    if codim > dim {
        return out;
    }
    let mut subsets: Vec<Vec<usize>> = (0..vertex_count(dim))
        .filter(|s| s.count_ones() as usize == codim)
        .map(|s| (0..dim).filter(|i| (s >> i) & 1 == 1).collect())
        .collect();
    subsets.sort();
    for coords in subsets {
        for vals in 0..(1usize << codim) {
            let fixed = coords
                .iter()
                .enumerate()
                .map(|(k, &i)| (i, (vals >> (codim - 1 - k)) & 1 == 1))
                .collect();
            out.push(Face { ambient_dim: dim, fixed });
        }
    }
    out
}

/// A map {0,1}^ℓ → points, stored in vertex order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration {
    dim: usize,
    values: Vec<PointId>,
}

impl Configuration {
    pub fn new(dim: usize, values: Vec<PointId>) -> Result<Self> {
        if dim > MAX_DIM {
            return Err(Error::InvalidInput(format!("cube dimension above {MAX_DIM}")));
        }
        if values.len() != vertex_count(dim) {
            return Err(Error::DimensionMismatch {
                expected: vertex_count(dim),
                found: values.len(),
            });
        }
        Ok(Configuration { dim, values })
    }

    /// □^ℓ(x)
    pub fn constant(dim: usize, x: PointId) -> Self {
        Configuration { dim, values: vec![x; vertex_count(dim)] }
    }

    /// ⌞^ℓ(x;y): y at the top vertex, x elsewhere.
    pub fn corner_pattern(dim: usize, x: PointId, y: PointId) -> Self {
        let mut c = Self::constant(dim, x);
        let top = top_vertex(dim);
        c.values[top] = y;
        c
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[PointId] {
        &self.values
    }

    pub fn into_values(self) -> Vec<PointId> {
        self.values
    }

    pub fn get(&self, v: Vertex) -> PointId {
        self.values[v]
    }

    /// c ∘ φ
    pub fn apply_morphism(&self, phi: &CubeMorphism) -> Result<Configuration> {
        if phi.target_dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: phi.target_dim(),
            });
        }
        let values = (0..vertex_count(phi.source_dim()))
            .map(|v| self.values[phi.apply_vertex(v)])
            .collect();
        Ok(Configuration { dim: phi.source_dim(), values })
    }

    /// [c0, c1] with the new coordinate inserted at position `axis`.
    pub fn concatenate(c0: &Configuration, c1: &Configuration, axis: usize) -> Result<Configuration> {
        if c0.dim != c1.dim {
            return Err(Error::DimensionMismatch { expected: c0.dim, found: c1.dim });
        }
        if axis > c0.dim {
            return Err(Error::InvalidInput(format!("axis {axis} out of range")));
        }
        if c0.dim + 1 > MAX_DIM {
            return Err(Error::InvalidInput(format!("cube dimension above {MAX_DIM}")));
        }
        let dim = c0.dim + 1;
        let values = (0..vertex_count(dim))
            .map(|v| {
                let w = remove_bit(v, axis);
                if (v >> axis) & 1 == 0 {
                    c0.values[w]
                } else {
                    c1.values[w]
                }
            })
            .collect();
        Ok(Configuration { dim, values })
    }

    /// The slice ω_axis = bit, as a configuration of one dimension lower.
    pub fn restrict(&self, axis: usize, bit: bool) -> Result<Configuration> {
        if axis >= self.dim {
            return Err(Error::InvalidInput(format!("axis {axis} out of range")));
        }
        let values = (0..vertex_count(self.dim - 1))
            .map(|w| self.values[insert_bit(w, axis, bit)])
            .collect();
        Ok(Configuration { dim: self.dim - 1, values })
    }

    /// Restriction to the face, with the free coordinates in increasing order.
    pub fn restrict_face(&self, face: &Face) -> Result<Configuration> {
        if face.ambient_dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: face.ambient_dim() });
        }
        let values = face.members().into_iter().map(|v| self.values[v]).collect();
        Ok(Configuration { dim: self.dim - face.codim(), values })
    }

    pub fn map_points(&self, f: impl Fn(PointId) -> PointId) -> Configuration {
        Configuration {
            dim: self.dim,
            values: self.values.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn corner(&self) -> Corner {
        let mut values = self.values.clone();
        values.pop();
        Corner { dim: self.dim, values }
    }
}

/// A configuration with the top vertex left undefined.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Corner {
    dim: usize,
    values: Vec<PointId>,
}

impl Corner {
    pub fn new(dim: usize, values: Vec<PointId>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidCorner(format!("corner dimension {dim} not in 1..={MAX_DIM}")));
        }
        if values.len() != vertex_count(dim) - 1 {
            return Err(Error::InvalidCorner(format!(
                "expected {} values, found {}",
                vertex_count(dim) - 1,
                values.len()
            )));
        }
        Ok(Corner { dim, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[PointId] {
        &self.values
    }

    pub fn complete(&self, top: PointId) -> Configuration {
        let mut values = self.values.clone();
        values.push(top);
        Configuration { dim: self.dim, values }
    }
}
