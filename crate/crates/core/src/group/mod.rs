//! Finite groups given by multiplication tables.

mod abelian;
pub mod catalog;
mod filtration;

pub use abelian::{abelian_invariants, FiniteAbelianGroup};
pub use filtration::{lower_central_chain, lower_central_series, validate_filtration, Filtration};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Elem = u32;

/// Largest group order accepted by [`FiniteGroup::new`].
pub const MAX_ORDER: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GroupTable", into = "GroupTable")]
pub struct FiniteGroup {
    order: usize,
    table: Vec<Elem>,
    identity: Elem,
    inverse: Vec<Elem>,
}

/// Serialized form: the row-major table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupTable {
    pub order: usize,
    pub table: Vec<Elem>,
}

impl TryFrom<GroupTable> for FiniteGroup {
    type Error = Error;
    fn try_from(t: GroupTable) -> Result<Self> {
        FiniteGroup::new(t.order, t.table)
    }
}

impl From<FiniteGroup> for GroupTable {
    fn from(g: FiniteGroup) -> Self {
        GroupTable { order: g.order, table: g.table }
    }
}

impl FiniteGroup {
    /// Validates a row-major table: `table[a*n + b] = a·b`.
    pub fn new(order: usize, table: Vec<Elem>) -> Result<Self> {
        if order == 0 {
            return Err(Error::NotAGroup("empty table".into()));
        }
        if order > MAX_ORDER {
            return Err(Error::InvalidInput(format!("group order {order} above {MAX_ORDER}")));
        }
        if table.len() != order * order {
            return Err(Error::NotAGroup(format!(
                "table has {} entries, expected {}",
                table.len(),
                order * order
            )));
        }
        if let Some(pos) = table.iter().position(|&x| x as usize >= order) {
            return Err(Error::NotAGroup(format!(
                "entry ({}, {}) = {} out of range",
                pos / order,
                pos % order,
                table[pos]
            )));
        }
        let mul = |a: usize, b: usize| table[a * order + b] as usize;
        let identity = (0..order)
            .find(|&e| (0..order).all(|x| mul(e, x) == x && mul(x, e) == x))
            .ok_or_else(|| Error::NotAGroup("no identity element".into()))?;
        let mut inverse = vec![0; order];
        for (a, slot) in inverse.iter_mut().enumerate() {
            let b = (0..order)
                .find(|&b| mul(a, b) == identity && mul(b, a) == identity)
                .ok_or_else(|| Error::NotAGroup(format!("element {a} has no inverse")))?;
            *slot = b as Elem;
        }
        let g = FiniteGroup { order, table, identity: identity as Elem, inverse };
        // Light's test: associativity against a generating set suffices.
        let gens = g.generating_set();
        for x in 0..order as Elem {
            for y in 0..order as Elem {
                let xy = g.mul(x, y);
                for &a in &gens {
                    if g.mul(xy, a) != g.mul(x, g.mul(y, a)) {
                        return Err(Error::NotAGroup(format!(
                            "associativity fails for ({x}, {y}, {a})"
                        )));
                    }
                }
            }
        }
        Ok(g)
    }

    pub fn trivial() -> Self {
        FiniteGroup { order: 1, table: vec![0], identity: 0, inverse: vec![0] }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> Elem {
        self.identity
    }

    pub fn table(&self) -> &[Elem] {
        &self.table
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.table[a as usize * self.order + b as usize]
    }

    pub fn inv(&self, a: Elem) -> Elem {
        self.inverse[a as usize]
    }

    /// a⁻¹b⁻¹ab
    pub fn commutator(&self, a: Elem, b: Elem) -> Elem {
        let ab = self.mul(a, b);
        self.mul(self.mul(self.inv(a), self.inv(b)), ab)
    }

    pub fn pow(&self, a: Elem, k: u64) -> Elem {
        let mut acc = self.identity;
        let mut base = a;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    pub fn element_order(&self, a: Elem) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.order as Elem
    }

    pub fn is_abelian(&self) -> bool {
        self.non_commuting_pair().is_none()
    }

    pub fn non_commuting_pair(&self) -> Option<(Elem, Elem)> {
        for a in self.elements() {
            for b in (a + 1)..self.order as Elem {
                if self.mul(a, b) != self.mul(b, a) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Greedy generating set: each element not yet reached is added.
    pub fn generating_set(&self) -> Vec<Elem> {
        let all: Vec<Elem> = self.elements().collect();
        generating_subset(self, &all)
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup::from_sorted(self.order, self.elements().collect())
    }

    pub fn trivial_subgroup(&self) -> Subgroup {
        Subgroup::from_sorted(self.order, vec![self.identity])
    }
}

/// Breadth-first closure of `gens` under right multiplication, seeded with
/// the identity. In a finite group this is the generated subgroup.
fn closure_elements(g: &FiniteGroup, gens: &[Elem], seen: &mut [bool]) -> Vec<Elem> {
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for x in 0..seen.len() {
        if seen[x] {
            queue.push_back(x as Elem);
            out.push(x as Elem);
        }
    }
    if out.is_empty() {
        seen[g.identity as usize] = true;
        queue.push_back(g.identity);
        out.push(g.identity);
    }
    while let Some(x) = queue.pop_front() {
        for &a in gens {
            let y = g.mul(x, a);
            if !seen[y as usize] {
                seen[y as usize] = true;
                out.push(y);
                queue.push_back(y);
            }
        }
    }
    out
}

fn generating_subset(g: &FiniteGroup, candidates: &[Elem]) -> Vec<Elem> {
    let mut gens = Vec::new();
    let mut seen = vec![false; g.order];
    seen[g.identity as usize] = true;
    for &c in candidates {
        if !seen[c as usize] {
            gens.push(c);
            let reached = closure_elements(g, &gens, &mut vec![false; g.order]);
            for r in reached {
                seen[r as usize] = true;
            }
        }
    }
    gens
}

/// A subgroup, stored as a sorted element list of the parent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subgroup {
    parent_order: usize,
    elements: Vec<Elem>,
}

impl Subgroup {
    fn from_sorted(parent_order: usize, elements: Vec<Elem>) -> Self {
        Subgroup { parent_order, elements }
    }

    /// Verifies that `elements` is a subgroup of `g`.
    pub fn new(g: &FiniteGroup, elements: &[Elem]) -> Result<Self> {
        let mut els = elements.to_vec();
        els.sort_unstable();
        els.dedup();
        if els.iter().any(|&x| x as usize >= g.order) {
            return Err(Error::NotSubgroup("element out of range".into()));
        }
        let mut mask = vec![false; g.order];
        for &x in &els {
            mask[x as usize] = true;
        }
        if !mask[g.identity as usize] {
            return Err(Error::NotSubgroup("identity missing".into()));
        }
        for &a in &els {
            if !mask[g.inv(a) as usize] {
                return Err(Error::NotSubgroup(format!("inverse of {a} missing")));
            }
            for &b in &els {
                if !mask[g.mul(a, b) as usize] {
                    return Err(Error::NotSubgroup(format!("product of {a} and {b} missing")));
                }
            }
        }
        Ok(Subgroup { parent_order: g.order, elements: els })
    }

    pub fn elements(&self) -> &[Elem] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, x: Elem) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.elements.iter().all(|&x| other.contains(x))
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.parent_order];
        for &x in &self.elements {
            m[x as usize] = true;
        }
        m
    }

    /// A small generating set of this subgroup.
    pub fn generators(&self, g: &FiniteGroup) -> Vec<Elem> {
        generating_subset(g, &self.elements)
    }
}

pub fn subgroup_closure(g: &FiniteGroup, gens: &[Elem]) -> Result<Subgroup> {
    if gens.iter().any(|&x| x as usize >= g.order) {
        return Err(Error::InvalidInput("generator out of range".into()));
    }
    let mut els = closure_elements(g, gens, &mut vec![false; g.order]);
    els.sort_unstable();
    Ok(Subgroup::from_sorted(g.order, els))
}

/// [A, B] = ⟨a⁻¹b⁻¹ab⟩
pub fn commutator_subgroup(g: &FiniteGroup, a: &Subgroup, b: &Subgroup) -> Subgroup {
    let mut mask = vec![false; g.order];
    let mut comms = Vec::new();
    for &x in a.elements() {
        for &y in b.elements() {
            let c = g.commutator(x, y);
            if !mask[c as usize] {
                mask[c as usize] = true;
                comms.push(c);
            }
        }
    }
    subgroup_closure(g, &comms).expect("commutators lie in the group")
}

pub fn check_normal(g: &FiniteGroup, n: &Subgroup) -> Result<()> {
    for x in g.elements() {
        let xi = g.inv(x);
        for &h in n.elements() {
            if !n.contains(g.mul(g.mul(x, h), xi)) {
                return Err(Error::NotNormal { g: x, h });
            }
        }
    }
    Ok(())
}

/// The quotient by a normal subgroup. Cosets are numbered by increasing
/// least element; the second component maps each element to its coset.
pub fn quotient_group(g: &FiniteGroup, n: &Subgroup) -> Result<(FiniteGroup, Vec<Elem>)> {
    check_normal(g, n)?;
    let mut proj = vec![u32::MAX; g.order];
    let mut reps = Vec::new();
    for x in g.elements() {
        if proj[x as usize] == u32::MAX {
            let idx = reps.len() as Elem;
            reps.push(x);
            for &h in n.elements() {
                proj[g.mul(x, h) as usize] = idx;
            }
        }
    }
    let m = reps.len();
    let mut table = vec![0; m * m];
    for (i, &a) in reps.iter().enumerate() {
        for (j, &b) in reps.iter().enumerate() {
            table[i * m + j] = proj[g.mul(a, b) as usize];
        }
    }
    Ok((FiniteGroup::new(m, table)?, proj))
}

/// The subgroup as a group in its own right, with the embedding into `g`.
pub fn subgroup_as_group(g: &FiniteGroup, h: &Subgroup) -> (FiniteGroup, Vec<Elem>) {
    let embed = h.elements().to_vec();
    let mut index = vec![u32::MAX; g.order];
    for (i, &x) in embed.iter().enumerate() {
        index[x as usize] = i as Elem;
    }
    let m = embed.len();
    let mut table = vec![0; m * m];
    for i in 0..m {
        for j in 0..m {
            table[i * m + j] = index[g.mul(embed[i], embed[j]) as usize];
        }
    }
    (FiniteGroup::new(m, table).expect("subgroup of a group is a group"), embed)
}

/// An isomorphism g → h as an image table, found by backtracking over
/// images of a generating set with matching element orders.
pub fn find_isomorphism(g: &FiniteGroup, h: &FiniteGroup) -> Option<Vec<Elem>> {
    if g.order() != h.order() {
        return None;
    }
    let gens = g.generating_set();
    let candidates: Vec<Vec<Elem>> = gens
        .iter()
        .map(|&a| h.elements().filter(|&b| h.element_order(b) == g.element_order(a)).collect())
        .collect();
    let mut images = vec![0; gens.len()];
    fn extend(g: &FiniteGroup, h: &FiniteGroup, gens: &[Elem], images: &[Elem]) -> Option<Vec<Elem>> {
        let mut phi = vec![u32::MAX; g.order()];
        phi[g.identity() as usize] = h.identity();
        let mut queue = VecDeque::from([g.identity()]);
        while let Some(x) = queue.pop_front() {
            for (&a, &b) in gens.iter().zip(images) {
                let (y, img) = (g.mul(x, a), h.mul(phi[x as usize], b));
                if phi[y as usize] == u32::MAX {
                    phi[y as usize] = img;
                    queue.push_back(y);
                } else if phi[y as usize] != img {
                    return None;
                }
            }
        }
        let mut hit = vec![false; h.order()];
        for &v in &phi {
            if std::mem::replace(&mut hit[v as usize], true) {
                return None;
            }
        }
        let hom = g
            .elements()
            .all(|x| g.elements().all(|y| phi[g.mul(x, y) as usize] == h.mul(phi[x as usize], phi[y as usize])));
        hom.then_some(phi)
    }
    fn rec(
        g: &FiniteGroup,
        h: &FiniteGroup,
        gens: &[Elem],
        candidates: &[Vec<Elem>],
        images: &mut [Elem],
        k: usize,
    ) -> Option<Vec<Elem>> {
        if k == gens.len() {
            return extend(g, h, gens, images);
        }
        for &b in &candidates[k] {
            images[k] = b;
            if let Some(phi) = rec(g, h, gens, candidates, images, k + 1) {
                return Some(phi);
            }
        }
        None
    }
    rec(g, h, &gens, &candidates, &mut images, 0)
}

#[cfg(test)]
mod tests {
    use super::catalog::*;
    use super::*;

    /// Brute-force oracle: iterate products until nothing new appears.
    fn naive_closure(g: &FiniteGroup, gens: &[Elem]) -> Vec<Elem> {
        let mut set: Vec<Elem> = vec![g.identity()];
        set.extend_from_slice(gens);
        loop {
            let mut next = set.clone();
            for &a in &set {
                for &b in &set {
                    next.push(g.mul(a, b));
                }
            }
            next.sort_unstable();
            next.dedup();
            if next.len() == set.len() {
                return next;
            }
            set = next;
        }
    }

    #[test]
    fn isomorphism_search() {
        let v4 = abelian_product(&[2, 2]);
        let (q, _) = quotient_group(&dihedral(4), &Subgroup::new(&dihedral(4), &[0, 2]).unwrap()).unwrap();
        let phi = find_isomorphism(&q, &v4).unwrap();
        for a in q.elements() {
            for b in q.elements() {
                assert_eq!(phi[q.mul(a, b) as usize], v4.mul(phi[a as usize], phi[b as usize]));
            }
        }
        assert!(find_isomorphism(&cyclic(4), &v4).is_none());
        assert!(find_isomorphism(&symmetric(3), &cyclic(6)).is_none());
    }

    #[test]
    fn z3_is_a_group() {
        let g = cyclic(3);
        assert_eq!(g.identity(), 0);
        assert_eq!(g.order(), 3);
    }

    #[test]
    fn corrupted_table_is_rejected() {
        let g = cyclic(4);
        let mut t = g.table().to_vec();
        t[1 * 4 + 2] = 0;
        assert!(matches!(FiniteGroup::new(4, t), Err(Error::NotAGroup(_))));
    }

    #[test]
    fn nonassociative_latin_square_is_rejected() {
        // A loop of order 5 that is not a group.
        let t = vec![
            0, 1, 2, 3, 4, //
            1, 0, 3, 4, 2, //
            2, 4, 0, 1, 3, //
            3, 2, 4, 0, 1, //
            4, 3, 1, 2, 0,
        ];
        let err = FiniteGroup::new(5, t).unwrap_err();
        assert!(matches!(err, Error::NotAGroup(ref s) if s.contains("associativity")));
    }

    #[test]
    fn s3_is_nonabelian() {
        let g = symmetric(3);
        assert_eq!(g.order(), 6);
        assert!(!g.is_abelian());
    }

    #[test]
    fn closures_match_oracle() {
        let d4 = dihedral(4);
        assert_eq!(subgroup_closure(&d4, &[]).unwrap().elements(), &[d4.identity()]);
        let r = subgroup_closure(&d4, &[1]).unwrap();
        assert_eq!(r.order(), 4);
        assert_eq!(r.elements(), naive_closure(&d4, &[1]).as_slice());
        let s3 = symmetric(3);
        let transpositions: Vec<Elem> =
            s3.elements().filter(|&x| x != s3.identity() && s3.element_order(x) == 2).collect();
        assert_eq!(subgroup_closure(&s3, &transpositions).unwrap().order(), 6);
    }

    #[test]
    fn commutator_subgroups() {
        let z6 = cyclic(6);
        assert!(commutator_subgroup(&z6, &z6.whole(), &z6.whole()).is_trivial());
        let s3 = symmetric(3);
        let c = commutator_subgroup(&s3, &s3.whole(), &s3.whole());
        assert_eq!(c.order(), 3);
        let d4 = dihedral(4);
        let c = commutator_subgroup(&d4, &d4.whole(), &d4.whole());
        assert_eq!(c.elements(), &[0, 2]);
    }

    #[test]
    fn quotients() {
        let d4 = dihedral(4);
        let (q, proj) = quotient_group(&d4, &d4.whole()).unwrap();
        assert_eq!(q.order(), 1);
        assert!(proj.iter().all(|&p| p == 0));

        let center = Subgroup::new(&d4, &[0, 2]).unwrap();
        let (q, proj) = quotient_group(&d4, &center).unwrap();
        assert_eq!(q.order(), 4);
        assert!(q.is_abelian());
        assert_eq!(abelian_invariants(&q).unwrap().factors(), &[2, 2]);
        for a in d4.elements() {
            for b in d4.elements() {
                assert_eq!(proj[d4.mul(a, b) as usize], q.mul(proj[a as usize], proj[b as usize]));
            }
        }
        let kernel: Vec<Elem> = d4.elements().filter(|&x| proj[x as usize] == 0).collect();
        assert_eq!(kernel, vec![0, 2]);

        let z4 = cyclic(4);
        let (q, _) = quotient_group(&z4, &Subgroup::new(&z4, &[0, 2]).unwrap()).unwrap();
        assert_eq!(abelian_invariants(&q).unwrap().factors(), &[2]);
    }

    #[test]
    fn non_normal_quotient_fails() {
        let s3 = symmetric(3);
        let t = s3.elements().find(|&x| s3.element_order(x) == 2).unwrap();
        let h = subgroup_closure(&s3, &[t]).unwrap();
        assert!(matches!(quotient_group(&s3, &h), Err(Error::NotNormal { .. })));
    }
}
