//! Orbits of configurations under face-supported group elements.
//!
//! A generator is a vertex mask with a group element; it acts on a
//! configuration by moving every vertex in the mask by that element. Orbits
//! of a seed set under such generators give both Host–Kra cube groups (the
//! group acting on itself by left multiplication, seeded with the identity)
//! and the cubes built from them (seeded with constant configurations).

use rustc_hash::FxHashSet;

use crate::cube::{vertex_count, PointId};
use crate::cubeset::{Codec, CubeSet};
use crate::error::{Error, Result};
use crate::guard;

#[derive(Clone, Copy, Debug)]
pub(crate) struct FaceGen {
    pub mask: u64,
    pub elem: u32,
}

/// `table[g * points + x]` is the image of x under g.
pub(crate) struct ActionTable<'a> {
    pub points: usize,
    pub table: &'a [PointId],
}

enum Visited {
    Dense(Vec<u64>),
    Sparse(FxHashSet<u64>),
}

impl Visited {
    fn insert(&mut self, code: u64) -> bool {
        match self {
            Visited::Dense(bits) => {
                let (w, b) = ((code >> 6) as usize, code & 63);
                let new = bits[w] & (1 << b) == 0;
                bits[w] |= 1 << b;
                new
            }
            Visited::Sparse(s) => s.insert(code),
        }
    }

    fn contains(&self, code: u64) -> bool {
        match self {
            Visited::Dense(bits) => bits[(code >> 6) as usize] & (1 << (code & 63)) != 0,
            Visited::Sparse(s) => s.contains(&code),
        }
    }

    fn new(total: Option<u64>) -> Self {
        match total {
            Some(t) if t <= DENSE_LIMIT => Visited::Dense(vec![0; (t as usize).div_ceil(64)]),
            _ => Visited::Sparse(FxHashSet::default()),
        }
    }

    fn into_sorted(self) -> Vec<u64> {
        match self {
            Visited::Dense(bits) => {
                let mut out = Vec::new();
                for (w, &word) in bits.iter().enumerate() {
                    let mut m = word;
                    while m != 0 {
                        let b = m.trailing_zeros() as u64;
                        out.push(((w as u64) << 6) | b);
                        m &= m - 1;
                    }
                }
                out
            }
            Visited::Sparse(s) => {
                let mut v: Vec<u64> = s.into_iter().collect();
                v.sort_unstable();
                v
            }
        }
    }
}

const DENSE_LIMIT: u64 = 1 << 30;

/// Breadth-first orbit of the seeds. Stops early once every configuration
/// has been reached.
pub(crate) fn orbit(
    act: &ActionTable,
    dim: usize,
    gens: &[FaceGen],
    seeds: impl IntoIterator<Item = u64>,
) -> Result<CubeSet> {
    let codec = Codec::new(act.points, dim)?;
    let total = codec.total();
    let mut visited = Visited::new(total);
    let mut count: u64 = 0;
    let mut queue: Vec<u64> = Vec::new();
    for s in seeds {
        if visited.insert(s) {
            count += 1;
            queue.push(s);
        }
    }
    guard::check(count as u128)?;
    let nv = vertex_count(dim);
    let weights: Vec<u64> = (0..nv).map(|v| codec.weight(v)).collect();
    let masks: Vec<Vec<usize>> = gens
        .iter()
        .map(|g| (0..nv).filter(|&v| (g.mask >> v) & 1 == 1).collect())
        .collect();
    let mut digits = vec![0 as PointId; nv];
    let mut head = 0;
    while head < queue.len() {
        if total == Some(count) {
            break;
        }
        let code = queue[head];
        head += 1;
        codec.decode_into(code, &mut digits);
        for (g, verts) in gens.iter().zip(&masks) {
            let row = &act.table[g.elem as usize * act.points..];
            let mut next = code;
            for &v in verts {
                let old = digits[v] as u64;
                let new = row[digits[v] as usize] as u64;
                next = next.wrapping_sub(old.wrapping_mul(weights[v])).wrapping_add(new.wrapping_mul(weights[v]));
            }
            if visited.insert(next) {
                count += 1;
                if count as u128 > guard::limit() as u128 {
                    return Err(Error::SizeGuard { requested: count as u128, limit: guard::limit() });
                }
                queue.push(next);
            }
        }
        // Reclaim memory from the processed prefix of long queues.
        if head > (1 << 20) && head * 2 > queue.len() {
            queue.drain(..head);
            head = 0;
        }
    }
    if total == Some(count) {
        return CubeSet::all(act.points, dim);
    }
    CubeSet::from_codes(act.points, dim, visited.into_sorted())
}

/// The subgroup of G^{{0,1}^dim} generated by face generators, where
/// `table[a * points + b] = ab`. Generators are added one at a time; when
/// one is new, the right cosets of the previous subgroup are enumerated
/// from products of coset representatives with the generators so far.
pub(crate) fn face_subgroup(act: &ActionTable, identity: PointId, dim: usize, gens: &[FaceGen]) -> Result<CubeSet> {
    let n = act.points;
    let codec = Codec::new(n, dim)?;
    let total = codec.total();
    let nv = vertex_count(dim);
    let gen_vals: Vec<Vec<PointId>> = gens
        .iter()
        .map(|g| (0..nv).map(|v| if (g.mask >> v) & 1 == 1 { g.elem } else { identity }).collect())
        .collect();
    let mul = |x: &[PointId], y: &[PointId], out: &mut [PointId]| {
        for v in 0..nv {
            out[v] = act.table[x[v] as usize * n + y[v] as usize];
        }
    };
    let mut visited = Visited::new(total);
    let mut elements = vec![codec.encode(&vec![identity; nv])];
    visited.insert(elements[0]);
    let (mut buf, mut out) = (vec![0; nv], vec![0; nv]);
    let mut used: Vec<usize> = Vec::new();
    for (i, s) in gen_vals.iter().enumerate() {
        if total == Some(elements.len() as u64) {
            break;
        }
        if visited.contains(codec.encode(s)) {
            continue;
        }
        used.push(i);
        let prev = elements.len();
        let mut reps: Vec<Vec<PointId>> = vec![vec![identity; nv]];
        let mut pending = vec![s.clone()];
        let mut pos = 0;
        loop {
            for t in pending.drain(..) {
                if visited.contains(codec.encode(&t)) {
                    continue;
                }
                guard::check(elements.len() as u128 + prev as u128)?;
                for k in 0..prev {
                    codec.decode_into(elements[k], &mut buf);
                    mul(&buf, &t, &mut out);
                    let code = codec.encode(&out);
                    visited.insert(code);
                    elements.push(code);
                }
                reps.push(t);
            }
            pos += 1;
            if pos >= reps.len() {
                break;
            }
            for &j in &used {
                let mut t = vec![0; nv];
                mul(&reps[pos], &gen_vals[j], &mut t);
                pending.push(t);
            }
        }
    }
    if total == Some(elements.len() as u64) {
        return CubeSet::all(n, dim);
    }
    elements.sort_unstable();
    CubeSet::from_codes(n, dim, elements)
}
