use serde::{Deserialize, Serialize};

use super::{quotient_group, subgroup_as_group, subgroup_closure, Elem, FiniteGroup, Subgroup};
use crate::error::{Error, Result};

/// A commutative group together with an explicit isomorphism onto
/// Z/n_1 × ... × Z/n_r with n_1 | n_2 | ... | n_r.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "super::GroupTable", into = "super::GroupTable")]
pub struct FiniteAbelianGroup {
    group: FiniteGroup,
    factors: Vec<u64>,
    /// Images of the standard generators e_1, ..., e_r.
    basis: Vec<Elem>,
    /// element ↦ coordinate tuple
    coords: Vec<Vec<u64>>,
    /// mixed-radix index of a tuple (first factor fastest) ↦ element
    from_index: Vec<Elem>,
    /// multiples[a][k] = k·a for 0 ≤ k < order; empty for large groups
    multiples: Vec<Vec<Elem>>,
}

impl TryFrom<super::GroupTable> for FiniteAbelianGroup {
    type Error = Error;
    fn try_from(t: super::GroupTable) -> Result<Self> {
        abelian_invariants(&FiniteGroup::new(t.order, t.table)?)
    }
}

impl From<FiniteAbelianGroup> for super::GroupTable {
    fn from(a: FiniteAbelianGroup) -> Self {
        a.group.into()
    }
}

impl FiniteAbelianGroup {
    pub fn cyclic(n: usize) -> Self {
        abelian_invariants(&super::catalog::cyclic(n)).expect("cyclic group is abelian")
    }

    pub fn product(factors: &[usize]) -> Self {
        abelian_invariants(&super::catalog::abelian_product(factors)).expect("product is abelian")
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn basis(&self) -> &[Elem] {
        &self.basis
    }

    pub fn zero(&self) -> Elem {
        self.group.identity()
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.group.mul(a, b)
    }

    pub fn neg(&self, a: Elem) -> Elem {
        self.group.inv(a)
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.group.mul(a, self.group.inv(b))
    }

    /// k·a for any integer k.
    pub fn times(&self, k: i64, a: Elem) -> Elem {
        let n = self.order() as i64;
        match self.multiples.get(a as usize) {
            Some(row) => row[k.rem_euclid(n) as usize],
            None => self.group.pow(a, k.rem_euclid(n) as u64),
        }
    }

    pub fn coords(&self, a: Elem) -> &[u64] {
        &self.coords[a as usize]
    }

    pub fn from_coords(&self, t: &[u64]) -> Elem {
        let mut idx = 0u64;
        let mut w = 1u64;
        for (k, &m) in self.factors.iter().enumerate() {
            idx += (t[k] % m) * w;
            w *= m;
        }
        self.from_index[idx as usize]
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        self.group.elements()
    }
}

/// Invariant factors and an explicit isomorphism, verified exhaustively.
pub fn abelian_invariants(g: &FiniteGroup) -> Result<FiniteAbelianGroup> {
    if let Some((a, b)) = g.non_commuting_pair() {
        return Err(Error::NotAbelian { a, b });
    }
    let n = g.order();
    let mut primes = Vec::new();
    let mut m = n;
    let mut p = 2;
    while m > 1 {
        if m % p == 0 {
            primes.push(p);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    // Cyclic primary components per prime, largest first.
    let mut primary: Vec<Vec<(u64, Elem)>> = Vec::new();
    for &p in &primes {
        let sylow: Vec<Elem> = g
            .elements()
            .filter(|&x| is_power_of(g.element_order(x), p))
            .collect();
        let sub = Subgroup::new(g, &sylow)?;
        let (pg, embed) = subgroup_as_group(g, &sub);
        let mut basis: Vec<(u64, Elem)> = decompose_p_group(&pg)
            .into_iter()
            .map(|x| (pg.element_order(x) as u64, embed[x as usize]))
            .collect();
        basis.sort_by(|a, b| b.0.cmp(&a.0));
        primary.push(basis);
    }
    let r = primary.iter().map(|v| v.len()).max().unwrap_or(0);
    // The k-th largest invariant factor collects the k-th largest primary
    // component of every prime.
    let mut factors = Vec::with_capacity(r);
    let mut basis = Vec::with_capacity(r);
    for k in 0..r {
        let mut order = 1u64;
        let mut elem = g.identity();
        for comps in &primary {
            if let Some(&(o, x)) = comps.get(k) {
                order *= o;
                elem = g.mul(elem, x);
            }
        }
        factors.push(order);
        basis.push(elem);
    }
    factors.reverse();
    basis.reverse();

    let mut from_index = vec![u32::MAX; n];
    let mut hit = vec![false; n];
    let mut coords = vec![Vec::new(); n];
    for idx in 0..n as u64 {
        let mut t = Vec::with_capacity(r);
        let mut rest = idx;
        let mut elem = g.identity();
        for (k, &m) in factors.iter().enumerate() {
            let c = rest % m;
            rest /= m;
            t.push(c);
            elem = g.mul(elem, g.pow(basis[k], c));
        }
        if std::mem::replace(&mut hit[elem as usize], true) {
            return Err(Error::NotAGroup(format!("decomposition is not injective at {elem}")));
        }
        from_index[idx as usize] = elem;
        coords[elem as usize] = t;
    }
    let mut multiples = if n <= 512 { vec![Vec::with_capacity(n); n] } else { Vec::new() };
    for a in g.elements().take(multiples.len()) {
        let mut x = g.identity();
        for _ in 0..n {
            multiples[a as usize].push(x);
            x = g.mul(x, a);
        }
    }
    let out = FiniteAbelianGroup {
        group: g.clone(),
        factors,
        basis,
        coords,
        from_index,
        multiples,
    };
    if n <= 1000 {
        verify_isomorphism(&out)?;
    }
    Ok(out)
}

fn is_power_of(mut k: usize, p: usize) -> bool {
    while k % p == 0 {
        k /= p;
    }
    k == 1
}

/// Basis of an abelian p-group: split off a cyclic subgroup of maximal
/// order, decompose the quotient, and lift each generator to an element of
/// the same order.
fn decompose_p_group(g: &FiniteGroup) -> Vec<Elem> {
    if g.order() == 1 {
        return Vec::new();
    }
    let b = g.elements().max_by_key(|&x| (g.element_order(x), std::cmp::Reverse(x))).unwrap();
    let cyc = subgroup_closure(g, &[b]).unwrap();
    let (q, proj) = quotient_group(g, &cyc).expect("abelian subgroups are normal");
    let mut out = vec![b];
    let b_order = g.element_order(b);
    // discrete log in ⟨b⟩
    let mut log = vec![usize::MAX; g.order()];
    let mut x = g.identity();
    for k in 0..b_order {
        log[x as usize] = k;
        x = g.mul(x, b);
    }
    for qy in decompose_p_group(&q) {
        let f = q.element_order(qy);
        let y = g.elements().find(|&y| proj[y as usize] == qy).unwrap();
        let k = log[g.pow(y, f as u64) as usize];
        debug_assert!(k % f == 0);
        let lifted = g.mul(y, g.inv(g.pow(b, (k / f) as u64)));
        debug_assert_eq!(g.element_order(lifted), f);
        out.push(lifted);
    }
    out
}

fn verify_isomorphism(a: &FiniteAbelianGroup) -> Result<()> {
    let n = a.order();
    for x in 0..n as Elem {
        let tx = a.coords(x);
        for y in 0..n as Elem {
            let ty = a.coords(y);
            let sum: Vec<u64> = tx
                .iter()
                .zip(ty)
                .zip(&a.factors)
                .map(|((&u, &v), &m)| (u + v) % m)
                .collect();
            if a.from_coords(&sum) != a.add(x, y) {
                return Err(Error::NotAGroup(format!("decomposition is not additive at ({x}, {y})")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::catalog::*;
    use super::*;

    /// Invariant factors from counts of elements of order dividing each
    /// prime power.
    fn oracle_factors(g: &FiniteGroup) -> Vec<u64> {
        let n = g.order();
        let mut per_prime: Vec<(usize, Vec<u32>)> = Vec::new();
        let mut m = n;
        let mut p = 2;
        while m > 1 {
            if m % p == 0 {
                let mut e = 0;
                while m % p == 0 {
                    m /= p;
                    e += 1;
                }
                // rank_k = log_p |{x : p^k x = 0}| − log_p |{x : p^{k−1} x = 0}|
                let count = |k: u32| {
                    let q = p.pow(k);
                    g.elements().filter(|&x| g.pow(x, q as u64) == g.identity()).count()
                };
                let logp = |c: usize| {
                    let mut c = c;
                    let mut l = 0;
                    while c > 1 {
                        c /= p;
                        l += 1;
                    }
                    l
                };
                let mut exps = Vec::new();
                for k in 1..=e {
                    let r = logp(count(k)) - logp(count(k - 1));
                    exps.push(r);
                }
                // exps[k-1] = number of cyclic factors of order ≥ p^k
                let mut parts = Vec::new();
                for k in 1..=e as usize {
                    let ge = exps[k - 1];
                    let gt = if k < e as usize { exps[k] } else { 0 };
                    for _ in 0..(ge - gt) {
                        parts.push(k as u32);
                    }
                }
                parts.sort_by(|a, b| b.cmp(a));
                per_prime.push((p, parts));
            }
            p += 1;
        }
        let r = per_prime.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
        let mut f: Vec<u64> = (0..r)
            .map(|k| {
                per_prime
                    .iter()
                    .map(|(p, v)| v.get(k).map_or(1, |&e| (*p as u64).pow(e)))
                    .product()
            })
            .collect();
        f.reverse();
        f
    }

    #[test]
    fn invariant_factors_match_oracle() {
        let cases: Vec<(FiniteGroup, Vec<u64>)> = vec![
            (cyclic(6), vec![6]),
            (abelian_product(&[2, 4]), vec![2, 4]),
            (abelian_product(&[4, 2]), vec![2, 4]),
            (abelian_product(&[2, 3, 4]), vec![2, 12]),
            (abelian_product(&[2, 2, 2]), vec![2, 2, 2]),
            (abelian_product(&[6, 10]), vec![2, 30]),
            (cyclic(1), vec![]),
        ];
        for (g, expected) in cases {
            assert_eq!(oracle_factors(&g), expected);
            let a = abelian_invariants(&g).unwrap();
            assert_eq!(a.factors(), expected.as_slice());
        }
    }

    #[test]
    fn nonabelian_rejected() {
        assert!(matches!(abelian_invariants(&symmetric(3)), Err(Error::NotAbelian { .. })));
    }

    #[test]
    fn times_and_coords() {
        let a = FiniteAbelianGroup::cyclic(5);
        assert_eq!(a.times(-1, 2), 3);
        assert_eq!(a.times(7, 1), 2);
        for x in a.elements() {
            assert_eq!(a.from_coords(a.coords(x)), x);
        }
    }
}
