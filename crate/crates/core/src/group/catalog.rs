//! Tables for standard small groups.

use super::{Elem, FiniteGroup};

pub fn cyclic(n: usize) -> FiniteGroup {
    let table = (0..n * n).map(|k| ((k / n + k % n) % n) as Elem).collect();
    FiniteGroup::new(n, table).expect("cyclic table")
}

/// Z/n_1 × ... × Z/n_k with mixed-radix indexing, first factor fastest.
pub fn abelian_product(factors: &[usize]) -> FiniteGroup {
    let n: usize = factors.iter().product();
    let digits = |mut x: usize| {
        factors
            .iter()
            .map(|&m| {
                let d = x % m;
                x /= m;
                d
            })
            .collect::<Vec<_>>()
    };
    let mut table = vec![0; n * n];
    for a in 0..n {
        let da = digits(a);
        for b in 0..n {
            let db = digits(b);
            let mut idx = 0;
            let mut w = 1;
            for (k, &m) in factors.iter().enumerate() {
                idx += ((da[k] + db[k]) % m) * w;
                w *= m;
            }
            table[a * n + b] = idx as Elem;
        }
    }
    FiniteGroup::new(n, table).expect("product table")
}

/// The dihedral group of order 2m. Element r^k s^e has index k + m·e,
/// so r = 1 and s = m.
pub fn dihedral(m: usize) -> FiniteGroup {
    let n = 2 * m;
    let mut table = vec![0; n * n];
    for a in 0..n {
        let (k1, e1) = (a % m, a / m);
        for b in 0..n {
            let (k2, e2) = (b % m, b / m);
            // r^k1 s^e1 r^k2 s^e2 = r^(k1 ± k2) s^(e1+e2)
            let k = if e1 == 0 { (k1 + k2) % m } else { (k1 + m - k2) % m };
            let e = (e1 + e2) % 2;
            table[a * n + b] = (k + m * e) as Elem;
        }
    }
    FiniteGroup::new(n, table).expect("dihedral table")
}

/// All permutations of 0..k in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..k).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..k).rev().find(|&i| p[i - 1] < p[i]) else { break };
        let j = (i..k).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

fn is_even(p: &[usize]) -> bool {
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 0
}

/// Group of permutations under (p·q)(x) = p(q(x)). The list must be closed
/// under composition.
pub fn from_permutations(perms: &[Vec<usize>]) -> FiniteGroup {
    let mut sorted = perms.to_vec();
    sorted.sort();
    let n = sorted.len();
    let mut table = vec![0; n * n];
    for (a, p) in sorted.iter().enumerate() {
        for (b, q) in sorted.iter().enumerate() {
            let pq: Vec<usize> = q.iter().map(|&x| p[x]).collect();
            table[a * n + b] = sorted.binary_search(&pq).expect("closed under composition") as Elem;
        }
    }
    FiniteGroup::new(n, table).expect("permutation table")
}

pub fn symmetric(k: usize) -> FiniteGroup {
    from_permutations(&permutations(k))
}

pub fn alternating(k: usize) -> FiniteGroup {
    let even: Vec<_> = permutations(k).into_iter().filter(|p| is_even(p)).collect();
    from_permutations(&even)
}

pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup) -> FiniteGroup {
    let (m, k) = (g.order(), h.order());
    let n = m * k;
    let mut table = vec![0; n * n];
    for a in 0..n {
        for b in 0..n {
            let x = g.mul((a % m) as Elem, (b % m) as Elem) as usize;
            let y = h.mul((a / m) as Elem, (b / m) as Elem) as usize;
            table[a * n + b] = (x + m * y) as Elem;
        }
    }
    FiniteGroup::new(n, table).expect("product table")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        assert_eq!(dihedral(4).order(), 8);
        assert_eq!(symmetric(4).order(), 24);
        assert_eq!(alternating(5).order(), 60);
        assert_eq!(abelian_product(&[2, 4]).order(), 8);
        assert_eq!(direct_product(&cyclic(2), &cyclic(3)).order(), 6);
    }

    #[test]
    fn dihedral_relations() {
        let d = dihedral(4);
        let (r, s) = (1, 4);
        assert_eq!(d.element_order(r), 4);
        assert_eq!(d.element_order(s), 2);
        // s r s = r⁻¹
        assert_eq!(d.mul(d.mul(s, r), s), d.inv(r));
    }

    #[test]
    fn a5_is_perfect() {
        let a5 = alternating(5);
        let c = super::super::commutator_subgroup(&a5, &a5.whole(), &a5.whole());
        assert_eq!(c.order(), 60);
    }
}
