//! Equivalence relations on {0, ..., n−1}.

use serde::{Deserialize, Serialize};

use crate::cube::PointId;
use crate::error::{Error, Result};

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Classes are numbered by increasing least member.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct EquivRelation {
    class_of: Vec<u32>,
    classes: Vec<Vec<PointId>>,
}

impl TryFrom<Vec<u32>> for EquivRelation {
    type Error = Error;
    fn try_from(labels: Vec<u32>) -> Result<Self> {
        Ok(EquivRelation::from_labels(&labels))
    }
}

impl From<EquivRelation> for Vec<u32> {
    fn from(r: EquivRelation) -> Self {
        r.class_of
    }
}

impl EquivRelation {
    /// Points with equal labels are related.
    pub fn from_labels<T: Eq + Copy + std::hash::Hash>(labels: &[T]) -> Self {
        let mut seen = std::collections::HashMap::new();
        let mut class_of = Vec::with_capacity(labels.len());
        let mut classes: Vec<Vec<PointId>> = Vec::new();
        for (x, l) in labels.iter().enumerate() {
            let next = seen.len();
            let c = *seen.entry(*l).or_insert(next);
            if c == classes.len() {
                classes.push(Vec::new());
            }
            classes[c].push(x as PointId);
            class_of.push(c as u32);
        }
        EquivRelation { class_of, classes }
    }

    /// The equivalence relation generated by the pairs.
    pub fn generated(n: usize, pairs: impl IntoIterator<Item = (PointId, PointId)>) -> Self {
        let mut uf = UnionFind::new(n);
        for (a, b) in pairs {
            uf.union(a as usize, b as usize);
        }
        let labels: Vec<usize> = (0..n).map(|x| uf.find(x)).collect();
        Self::from_labels(&labels)
    }

    /// The relation given by `related`, which must already be an
    /// equivalence relation.
    pub fn from_predicate(n: usize, mut related: impl FnMut(PointId, PointId) -> bool) -> Result<Self> {
        let mut matrix = vec![false; n * n];
        for x in 0..n {
            for y in 0..n {
                matrix[x * n + y] = related(x as PointId, y as PointId);
            }
        }
        Self::from_matrix(n, &matrix)
    }

    /// `matrix[x*n + y]` says whether x ~ y.
    pub fn from_matrix(n: usize, matrix: &[bool]) -> Result<Self> {
        for x in 0..n {
            if !matrix[x * n + x] {
                return Err(Error::NotSymmetric { x: x as u32, y: x as u32 });
            }
            for y in 0..n {
                if matrix[x * n + y] && !matrix[y * n + x] {
                    return Err(Error::NotSymmetric { x: x as u32, y: y as u32 });
                }
            }
        }
        let r = Self::generated(
            n,
            (0..n).flat_map(|x| (0..n).filter(move |&y| matrix[x * n + y]).map(move |y| (x as u32, y as u32))),
        );
        for class in &r.classes {
            for &x in class {
                for &z in class {
                    if !matrix[x as usize * n + z as usize] {
                        let (y, z) = transitivity_break(n, matrix, class, x, z);
                        return Err(Error::NotEquivalence { x, y, z });
                    }
                }
            }
        }
        Ok(r)
    }

    pub fn trivial(n: usize) -> Self {
        Self::from_labels(&(0..n).collect::<Vec<_>>())
    }

    pub fn full(n: usize) -> Self {
        Self::from_labels(&vec![0; n])
    }

    pub fn points(&self) -> usize {
        self.class_of.len()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_of(&self, x: PointId) -> u32 {
        self.class_of[x as usize]
    }

    pub fn labels(&self) -> &[u32] {
        &self.class_of
    }

    pub fn classes(&self) -> &[Vec<PointId>] {
        &self.classes
    }

    pub fn related(&self, x: PointId, y: PointId) -> bool {
        self.class_of[x as usize] == self.class_of[y as usize]
    }

    pub fn is_trivial(&self) -> bool {
        self.classes.len() == self.class_of.len()
    }

    pub fn is_full(&self) -> bool {
        self.classes.len() <= 1
    }

    /// Whether every class of `self` lies inside a class of `other`.
    pub fn refines(&self, other: &EquivRelation) -> bool {
        self.classes
            .iter()
            .all(|c| c.iter().all(|&x| other.related(c[0], x)))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (PointId, PointId)> + '_ {
        self.classes
            .iter()
            .flat_map(|c| c.iter().flat_map(move |&x| c.iter().map(move |&y| (x, y))))
    }
}

/// Walks a shortest path from x to z inside the class and returns the first
/// step (y, y') with x ~ y, y ~ y' but not x ~ y'.
fn transitivity_break(n: usize, matrix: &[bool], class: &[PointId], x: PointId, z: PointId) -> (PointId, PointId) {
    let mut prev = vec![u32::MAX; n];
    let mut queue = std::collections::VecDeque::from([x]);
    prev[x as usize] = x;
    while let Some(u) = queue.pop_front() {
        for &v in class {
            if prev[v as usize] == u32::MAX && matrix[u as usize * n + v as usize] {
                prev[v as usize] = u;
                queue.push_back(v);
            }
        }
    }
    let mut path = vec![z];
    while *path.last().unwrap() != x {
        path.push(prev[*path.last().unwrap() as usize]);
    }
    path.reverse();
    for w in path.windows(2) {
        if !matrix[x as usize * n + w[1] as usize] {
            return (w[0], w[1]);
        }
    }
    unreachable!("x and z are unrelated")
}
