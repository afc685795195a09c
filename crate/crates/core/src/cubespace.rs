//! Finite cubespaces and the axiom checks.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::cube::{
    insert_bit, top_vertex, vertex_count, Configuration, Coord, Corner, CubeMorphism, PointId,
    MAX_DIM,
};
use crate::cubeset::{Codec, CubeSet};
use crate::error::{Error, Result};
use crate::guard;
use crate::verdict::{Verdict, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Invariant,
    Ergodic,
    Fibrant,
    Unique,
    Glueing,
}

/// Results of checks already run, keyed by check and level.
pub type Flags = BTreeMap<(Check, usize), bool>;

/// A point set {0, ..., n−1} with explicit cube sets C^0, ..., C^ℓmax.
#[derive(Debug, Serialize, Deserialize)]
#[serde(try_from = "RawCubespace", into = "RawCubespace")]
pub struct FiniteCubespace {
    points: usize,
    cubes: Vec<CubeSet>,
    flags: RwLock<Flags>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawCubespace {
    pub points: usize,
    pub cubes: Vec<CubeSet>,
}

impl TryFrom<RawCubespace> for FiniteCubespace {
    type Error = Error;
    fn try_from(r: RawCubespace) -> Result<Self> {
        FiniteCubespace::new(r.points, r.cubes)
    }
}

impl From<FiniteCubespace> for RawCubespace {
    fn from(x: FiniteCubespace) -> Self {
        RawCubespace { points: x.points, cubes: x.cubes }
    }
}

impl Clone for FiniteCubespace {
    fn clone(&self) -> Self {
        FiniteCubespace {
            points: self.points,
            cubes: self.cubes.clone(),
            flags: RwLock::new(self.flags()),
        }
    }
}

impl PartialEq for FiniteCubespace {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points && self.cubes == other.cubes
    }
}

impl Eq for FiniteCubespace {}

impl FiniteCubespace {
    /// `cubes[ℓ]` must have dimension ℓ and C^0 must be every point.
    pub fn new(points: usize, cubes: Vec<CubeSet>) -> Result<Self> {
        if points == 0 {
            return Err(Error::InvalidInput("a cubespace needs at least one point".into()));
        }
        if cubes.is_empty() {
            return Err(Error::InvalidInput("C^0 is required".into()));
        }
        if cubes.len() > MAX_DIM + 1 {
            return Err(Error::InvalidInput(format!("cube dimension above {MAX_DIM}")));
        }
        for (l, c) in cubes.iter().enumerate() {
            if c.dim() != l {
                return Err(Error::DimensionMismatch { expected: l, found: c.dim() });
            }
            if c.points() != points {
                return Err(Error::InvalidInput(format!("C^{l} has the wrong point count")));
            }
            if let CubeSet::Listed { codes, .. } = c {
                if codes.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidInput(format!("C^{l} is not strictly sorted")));
                }
                if let Some(total) = c.codec().total() {
                    if codes.last().is_some_and(|&x| x >= total) {
                        return Err(Error::InvalidInput(format!("C^{l} has a code out of range")));
                    }
                }
            }
        }
        if cubes[0].len() != points as u64 {
            return Err(Error::InvalidInput("C^0 must contain every point".into()));
        }
        Ok(FiniteCubespace { points, cubes, flags: RwLock::new(Flags::new()) })
    }

    /// Every configuration is a cube at every level.
    pub fn full(points: usize, lmax: usize) -> Result<Self> {
        let cubes = (0..=lmax).map(|l| CubeSet::all(points, l)).collect::<Result<_>>()?;
        Self::new(points, cubes)
    }

    pub fn point() -> Self {
        Self::full(1, 4).expect("one point")
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn lmax(&self) -> usize {
        self.cubes.len() - 1
    }

    pub fn cubes(&self, l: usize) -> &CubeSet {
        &self.cubes[l]
    }

    pub fn all_cubes(&self) -> &[CubeSet] {
        &self.cubes
    }

    pub fn codec(&self, l: usize) -> Codec {
        Codec::new(self.points, l).expect("levels of a cubespace have valid codecs")
    }

    pub fn is_cube(&self, c: &Configuration) -> bool {
        c.dim() <= self.lmax() && self.cubes[c.dim()].contains_config(c)
    }

    pub fn is_cube_values(&self, dim: usize, values: &[PointId]) -> bool {
        self.cubes[dim].contains(self.codec(dim).encode(values))
    }

    /// The same cube sets cut down to levels 0..=lmax.
    pub fn truncate(&self, lmax: usize) -> FiniteCubespace {
        let keep = (lmax + 1).min(self.cubes.len());
        FiniteCubespace::new(self.points, self.cubes[..keep].to_vec()).expect("prefix of a valid cubespace")
    }

    pub fn flags(&self) -> Flags {
        self.flags.read().unwrap().clone()
    }

    fn cached(&self, check: Check, level: usize) -> Option<bool> {
        self.flags.read().unwrap().get(&(check, level)).copied()
    }

    fn record(&self, check: Check, level: usize, passed: bool) {
        self.flags.write().unwrap().insert((check, level), passed);
    }

    fn known_invariant(&self) -> bool {
        self.cached(Check::Invariant, self.lmax()) == Some(true)
    }
}

/// Generating morphisms into {0,1}^k: closure of a family under these
/// implies closure under every morphism between dimensions ≤ ℓmax.
/// Face restrictions, reflections and adjacent transpositions, merging the
/// last two coordinates, and duplication.
pub fn invariance_generators(k: usize, lmax: usize) -> Vec<CubeMorphism> {
    let mut out = Vec::new();
    if k >= 1 {
        for j in 0..k {
            for b in [Coord::Zero, Coord::One] {
                let coords = (0..k)
                    .map(|i| match i.cmp(&j) {
                        std::cmp::Ordering::Less => Coord::Proj(i),
                        std::cmp::Ordering::Equal => b,
                        std::cmp::Ordering::Greater => Coord::Proj(i - 1),
                    })
                    .collect();
                out.push(CubeMorphism::new(k - 1, coords).unwrap());
            }
        }
        for j in 0..k {
            let coords = (0..k).map(|i| if i == j { Coord::Flip(i) } else { Coord::Proj(i) }).collect();
            out.push(CubeMorphism::new(k, coords).unwrap());
        }
        for j in 0..k.saturating_sub(1) {
            let mut coords: Vec<Coord> = (0..k).map(Coord::Proj).collect();
            coords.swap(j, j + 1);
            out.push(CubeMorphism::new(k, coords).unwrap());
        }
    }
    if k >= 2 {
        let mut coords: Vec<Coord> = (0..k - 1).map(Coord::Proj).collect();
        coords.push(Coord::Proj(k - 2));
        out.push(CubeMorphism::new(k - 1, coords).unwrap());
    }
    if k < lmax {
        out.push(CubeMorphism::new(k + 1, (0..k).map(Coord::Proj).collect()).unwrap());
    }
    out
}

struct Pullback {
    morphism: CubeMorphism,
    table: Vec<usize>,
}

fn pullbacks(k: usize, lmax: usize) -> Vec<Pullback> {
    invariance_generators(k, lmax)
        .into_iter()
        .map(|m| Pullback { table: m.vertex_table(), morphism: m })
        .collect()
}

pub fn check_cube_invariance(x: &FiniteCubespace) -> Verdict {
    let lmax = x.lmax();
    let mut buf = vec![0; vertex_count(lmax)];
    let mut out = vec![0; vertex_count(lmax.min(MAX_DIM - 1) + 1)];
    for k in 0..=lmax {
        let codec = x.codec(k);
        let gens = pullbacks(k, lmax);
        let targets: Vec<Codec> = gens.iter().map(|g| x.codec(g.morphism.source_dim())).collect();
        for code in x.cubes(k).iter() {
            codec.decode_into(code, &mut buf[..vertex_count(k)]);
            for (g, tc) in gens.iter().zip(&targets) {
                let l = g.morphism.source_dim();
                for (v, &t) in g.table.iter().enumerate() {
                    out[v] = buf[t];
                }
                if !x.cubes(l).contains(tc.encode(&out[..vertex_count(l)])) {
                    x.record(Check::Invariant, lmax, false);
                    return Verdict::Fail(Witness::NotInvariant {
                        cube: codec.configuration(code),
                        morphism: g.morphism.clone(),
                    });
                }
            }
        }
    }
    x.record(Check::Invariant, lmax, true);
    Verdict::Pass
}

/// Smallest cube-invariant family over `points` points, up to `lmax`,
/// containing `seeds` and all 0-configurations.
pub fn invariance_closure(
    points: usize,
    lmax: usize,
    seeds: &[Configuration],
) -> Result<FiniteCubespace> {
    if lmax > MAX_DIM {
        return Err(Error::InvalidInput(format!("cube dimension above {MAX_DIM}")));
    }
    let codecs: Vec<Codec> = (0..=lmax).map(|l| Codec::new(points, l)).collect::<Result<_>>()?;
    let mut sets: Vec<HashSet<u64>> = vec![HashSet::new(); lmax + 1];
    let mut work: Vec<(usize, u64)> = Vec::new();
    let mut total: u128 = 0;
    let mut push = |sets: &mut Vec<HashSet<u64>>, work: &mut Vec<(usize, u64)>, l: usize, code: u64| -> Result<()> {
        if sets[l].insert(code) {
            total += 1;
            guard::check(total)?;
            work.push((l, code));
        }
        Ok(())
    };
    for p in 0..points as u64 {
        push(&mut sets, &mut work, 0, p)?;
    }
    for s in seeds {
        if s.dim() > lmax {
            return Err(Error::InvalidInput(format!("seed of dimension {} above ℓmax", s.dim())));
        }
        let code = codecs[s.dim()].encode_config(s)?;
        push(&mut sets, &mut work, s.dim(), code)?;
    }
    let gens: Vec<Vec<Pullback>> = (0..=lmax).map(|k| pullbacks(k, lmax)).collect();
    let mut buf = vec![0; vertex_count(lmax)];
    let mut out = vec![0; vertex_count(lmax)];
    while let Some((k, code)) = work.pop() {
        codecs[k].decode_into(code, &mut buf[..vertex_count(k)]);
        for g in &gens[k] {
            let l = g.morphism.source_dim();
            for (v, &t) in g.table.iter().enumerate() {
                out[v] = buf[t];
            }
            let c = codecs[l].encode(&out[..vertex_count(l)]);
            push(&mut sets, &mut work, l, c)?;
        }
    }
    let cubes = sets
        .into_iter()
        .enumerate()
        .map(|(l, s)| CubeSet::from_codes(points, l, s.into_iter().collect()))
        .collect::<Result<Vec<_>>>()?;
    FiniteCubespace::new(points, cubes)
}

pub fn check_ergodic(x: &FiniteCubespace, s: usize) -> Result<Verdict> {
    if s > x.lmax() {
        return Err(Error::InvalidInput(format!("level {s} above ℓmax {}", x.lmax())));
    }
    let set = x.cubes(s);
    let verdict = if set.is_all() || x.points == 1 {
        Verdict::Pass
    } else {
        // first code missing from the sorted list
        let mut expect = 0u64;
        let mut missing = None;
        for c in set.iter() {
            if c != expect {
                missing = Some(expect);
                break;
            }
            expect += 1;
        }
        let missing = missing.unwrap_or(expect);
        Verdict::Fail(Witness::MissingConfiguration { configuration: x.codec(s).configuration(missing) })
    };
    x.record(Check::Ergodic, s, verdict.passed());
    Ok(verdict)
}

/// Values of the lower face ω_i = 0 of a corner.
fn lower_face(values: &[PointId], dim: usize, i: usize) -> Vec<PointId> {
    (0..vertex_count(dim - 1)).map(|w| values[insert_bit(w, i, false)]).collect()
}

pub fn check_corner(x: &FiniteCubespace, corner: &Corner) -> Result<()> {
    let l = corner.dim();
    if l > x.lmax() {
        return Err(Error::InvalidCorner(format!("dimension {l} above ℓmax {}", x.lmax())));
    }
    if corner.values().iter().any(|&p| p as usize >= x.points) {
        return Err(Error::InvalidCorner("point out of range".into()));
    }
    for i in 0..l {
        if !x.is_cube_values(l - 1, &lower_face(corner.values(), l, i)) {
            return Err(Error::InvalidCorner(format!("face ω_{i} = 0 is not a cube")));
        }
    }
    Ok(())
}

/// All cubes extending the corner.
pub fn complete_corner(x: &FiniteCubespace, corner: &Corner) -> Result<Vec<Configuration>> {
    check_corner(x, corner)?;
    let l = corner.dim();
    let codec = x.codec(l);
    let mut vals = corner.values().to_vec();
    vals.push(0);
    let base = codec.encode(&vals);
    let w = codec.top_weight();
    Ok((0..x.points as u64)
        .filter(|&y| x.cubes(l).contains(base + y * w))
        .map(|y| corner.complete(y as PointId))
        .collect())
}

/// Walks every ℓ-corner of `x` in increasing vertex-by-vertex order.
///
/// When `x` is known to be cube invariant, partial assignments are pruned
/// as soon as a downward-closed face {ω ≤ v} fails to be a cube; otherwise
/// only the lower faces are tested, once complete. The callback gets the
/// 2^ℓ − 1 corner values and returns false to stop.
pub fn for_each_corner(
    x: &FiniteCubespace,
    l: usize,
    mut f: impl FnMut(&[PointId]) -> bool,
) -> Result<()> {
    assert!(l >= 1 && l <= x.lmax());
    let top = top_vertex(l);
    let prune = x.known_invariant();
    if !prune {
        guard::check(guard::pow(x.points as u64, top as u64))?;
    }
    // For each vertex v < top: the faces to test once v is assigned.
    let mut tests: Vec<Vec<(Vec<usize>, Codec)>> = vec![Vec::new(); top];
    for (v, slot) in tests.iter_mut().enumerate() {
        let w = v.count_ones() as usize;
        if prune || w == l - 1 {
            let subs: Vec<usize> = (0..=v).filter(|u| u & !v == 0).collect();
            slot.push((subs, x.codec(w)));
        }
    }
    let n = x.points as PointId;
    let mut vals = vec![0 as PointId; top];
    let mut digits = vec![0 as PointId; top];
    fn rec(
        x: &FiniteCubespace,
        v: usize,
        top: usize,
        n: PointId,
        vals: &mut [PointId],
        digits: &mut [PointId],
        tests: &[Vec<(Vec<usize>, Codec)>],
        f: &mut dyn FnMut(&[PointId]) -> bool,
    ) -> bool {
        if v == top {
            return f(vals);
        }
        for p in 0..n {
            vals[v] = p;
            let ok = tests[v].iter().all(|(subs, codec)| {
                for (k, &u) in subs.iter().enumerate() {
                    digits[k] = vals[u];
                }
                x.cubes(codec.dim()).contains(codec.encode(&digits[..subs.len()]))
            });
            if ok && !rec(x, v + 1, top, n, vals, digits, tests, f) {
                return false;
            }
        }
        true
    }
    rec(x, 0, top, n, &mut vals, &mut digits, &tests, &mut f);
    Ok(())
}

pub fn check_fibrant(x: &FiniteCubespace, up_to: usize) -> Result<Verdict> {
    if up_to > x.lmax() {
        return Err(Error::InvalidInput(format!("level {up_to} above ℓmax {}", x.lmax())));
    }
    if !x.known_invariant() && x.cached(Check::Invariant, x.lmax()).is_none() {
        check_cube_invariance(x);
    }
    for l in 1..=up_to {
        if let Some(true) = x.cached(Check::Fibrant, l) {
            continue;
        }
        let codec = x.codec(l);
        let w = codec.top_weight();
        let set = x.cubes(l);
        let n = x.points as u64;
        let mut witness = None;
        let mut vals = vec![0; vertex_count(l)];
        for_each_corner(x, l, |corner| {
            vals[..corner.len()].copy_from_slice(corner);
            vals[corner.len()] = 0;
            let base = codec.encode(&vals);
            if (0..n).any(|y| set.contains(base + y * w)) {
                true
            } else {
                witness = Some(Corner::new(l, corner.to_vec()).unwrap());
                false
            }
        })?;
        x.record(Check::Fibrant, l, witness.is_none());
        if let Some(corner) = witness {
            return Ok(Verdict::Fail(Witness::UncompletableCorner { corner }));
        }
    }
    Ok(Verdict::Pass)
}

pub fn check_uniqueness(x: &FiniteCubespace, s: usize) -> Result<Verdict> {
    if s > x.lmax() {
        return Err(Error::InvalidInput(format!("level {s} above ℓmax {}", x.lmax())));
    }
    let codec = x.codec(s);
    let w = codec.top_weight();
    let set = x.cubes(s);
    let verdict = if set.is_all() {
        if x.points == 1 {
            Verdict::Pass
        } else {
            Verdict::Fail(Witness::NotUnique {
                first: codec.configuration(0),
                second: codec.configuration(w),
            })
        }
    } else {
        let mut keyed: Vec<(u64, u64)> = set.iter().map(|c| (c % w, c)).collect();
        keyed.sort_unstable();
        match keyed.windows(2).find(|p| p[0].0 == p[1].0) {
            Some(p) => Verdict::Fail(Witness::NotUnique {
                first: codec.configuration(p[0].1),
                second: codec.configuration(p[1].1),
            }),
            None => Verdict::Pass,
        }
    };
    x.record(Check::Unique, s, verdict.passed());
    Ok(verdict)
}

/// Glueing for ℓ-cubes, 0 ≤ ℓ < up_to, using concatenation along the last
/// coordinate.
pub fn check_glueing(x: &FiniteCubespace, up_to: usize) -> Result<Verdict> {
    if up_to > x.lmax() {
        return Err(Error::InvalidInput(format!("level {up_to} above ℓmax {}", x.lmax())));
    }
    for l in 0..up_to {
        let verdict = glueing_at(x, l);
        x.record(Check::Glueing, l + 1, verdict.passed());
        if !verdict.passed() {
            return Ok(verdict);
        }
    }
    Ok(Verdict::Pass)
}

fn glueing_at(x: &FiniteCubespace, l: usize) -> Verdict {
    let upper = x.cubes(l + 1);
    if upper.is_all() {
        return Verdict::Pass;
    }
    let lower = x.cubes(l);
    let codec = x.codec(l);
    let w = codec.total().expect("lower level fits when the upper one does");
    // blocks[k] = (c2, sorted c1 with [c1, c2] a cube and c1 ∈ C^ℓ)
    let mut blocks: Vec<(u64, Vec<u64>)> = Vec::new();
    for code in upper.iter() {
        let (c1, c2) = (code % w, code / w);
        if !lower.contains(c1) {
            continue;
        }
        match blocks.last_mut() {
            Some((k, v)) if *k == c2 => v.push(c1),
            _ => blocks.push((c2, vec![c1])),
        }
    }
    let mut ids: HashMap<&[u64], usize> = HashMap::new();
    let block_id: Vec<usize> = blocks
        .iter()
        .map(|(_, v)| {
            let next = ids.len();
            *ids.entry(v.as_slice()).or_insert(next)
        })
        .collect();
    let find = |c: u64| blocks.binary_search_by_key(&c, |b| b.0).ok();
    for (k3, (c3, s3)) in blocks.iter().enumerate() {
        if !lower.contains(*c3) {
            continue;
        }
        for &c2 in s3 {
            let Some(k2) = find(c2) else { continue };
            if block_id[k2] == block_id[k3] {
                continue;
            }
            if let Some(&c1) = blocks[k2].1.iter().find(|c1| s3.binary_search(c1).is_err()) {
                return Verdict::Fail(Witness::Glueing {
                    first: codec.configuration(c1),
                    second: codec.configuration(c2),
                    third: codec.configuration(*c3),
                });
            }
        }
    }
    Verdict::Pass
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Nilspace { degree: usize },
    NotNilspace { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NilspaceCertificate {
    pub points: usize,
    pub lmax: usize,
    pub outcome: Outcome,
    pub invariance: Verdict,
    /// (ℓ, verdict) for 1 ≤ ℓ ≤ ℓmax; fibrancy beyond ℓmax is not claimed.
    pub fibrancy: Vec<(usize, Verdict)>,
    /// (s, verdict) for 0 ≤ s ≤ ℓmax.
    pub uniqueness: Vec<(usize, Verdict)>,
    /// Largest s ≤ ℓmax with C^s everything.
    pub ergodic_up_to: usize,
    /// Whether uniqueness held at every level from the degree up to ℓmax.
    pub uniqueness_persists: bool,
}

impl NilspaceCertificate {
    pub fn degree(&self) -> Option<usize> {
        match self.outcome {
            Outcome::Nilspace { degree } => Some(degree),
            Outcome::NotNilspace { .. } => None,
        }
    }
}

pub fn nilspace_degree(x: &FiniteCubespace) -> Result<NilspaceCertificate> {
    let lmax = x.lmax();
    let invariance = check_cube_invariance(x);
    let mut fibrancy = Vec::new();
    if invariance.passed() {
        for l in 1..=lmax {
            let v = check_fibrant(x, l)?;
            let failed = !v.passed();
            fibrancy.push((l, v));
            if failed {
                break;
            }
        }
    }
    let mut uniqueness = Vec::new();
    for s in 0..=lmax {
        uniqueness.push((s, check_uniqueness(x, s)?));
    }
    let mut ergodic_up_to = 0;
    for s in 0..=lmax {
        if check_ergodic(x, s)?.passed() {
            ergodic_up_to = s;
        } else {
            break;
        }
    }
    let first_unique = uniqueness.iter().find(|(s, v)| *s >= 1 && v.passed()).map(|(s, _)| *s);
    let uniqueness_persists = first_unique
        .is_some_and(|s0| uniqueness.iter().filter(|(s, _)| *s >= s0).all(|(_, v)| v.passed()));
    let outcome = if !invariance.passed() {
        Outcome::NotNilspace { reason: "cube invariance fails".into() }
    } else if let Some((l, _)) = fibrancy.iter().find(|(_, v)| !v.passed()) {
        Outcome::NotNilspace { reason: format!("{l}-corner without completion") }
    } else if let Some(s1) = first_unique {
        Outcome::Nilspace { degree: s1 - 1 }
    } else {
        Outcome::NotNilspace { reason: format!("no uniqueness up to ℓmax = {lmax}") }
    };
    Ok(NilspaceCertificate {
        points: x.points,
        lmax,
        outcome,
        invariance,
        fibrancy,
        uniqueness,
        ergodic_up_to,
        uniqueness_persists,
    })
}

impl Witness {
    /// Whether the witness still exhibits its failure on `x`.
    pub fn replays_on(&self, x: &FiniteCubespace) -> bool {
        match self {
            Witness::NotInvariant { cube, morphism } => {
                x.is_cube(cube)
                    && cube
                        .apply_morphism(morphism)
                        .map(|c| c.dim() <= x.lmax() && !x.is_cube(&c))
                        .unwrap_or(false)
            }
            Witness::MissingConfiguration { configuration } => {
                configuration.dim() <= x.lmax() && !x.is_cube(configuration)
            }
            Witness::UncompletableCorner { corner } => {
                complete_corner(x, corner).map(|v| v.is_empty()).unwrap_or(false)
            }
            Witness::NotUnique { first, second } => {
                first != second && x.is_cube(first) && x.is_cube(second) && first.corner() == second.corner()
            }
            Witness::Glueing { first, second, third } => {
                let l = first.dim();
                if l + 1 > x.lmax() {
                    return false;
                }
                let cat = |a: &Configuration, b: &Configuration| {
                    Configuration::concatenate(a, b, l).map(|c| x.is_cube(&c)).unwrap_or(false)
                };
                [first, second, third].iter().all(|c| x.is_cube(c))
                    && cat(first, second)
                    && cat(second, third)
                    && !cat(first, third)
            }
            _ => false,
        }
    }
}
