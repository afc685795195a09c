//! Canonical relations ∼_s, quotients, the tower of canonical factors,
//! structure groups and the weak structure checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constructions::standard_nilspace;
use crate::cube::{vertex_count, Configuration, PointId};
use crate::cubeset::{Codec, CubeSet};
use crate::cubespace::{nilspace_degree, FiniteCubespace};
use crate::error::{Error, Result};
use crate::fibrations::{check_fibration, CubespaceMap};
use crate::group::{abelian_invariants, Elem, FiniteAbelianGroup, FiniteGroup};
use crate::guard;
use crate::relation::EquivRelation;
use crate::verdict::{Verdict, Witness};

/// `m[x*n + y]`: some two (s+1)-cubes agree off the top vertex and have
/// tops x and y.
pub fn canonical_pairs(x: &FiniteCubespace, s: usize) -> Result<Vec<bool>> {
    let l = s + 1;
    if l > x.lmax() {
        return Err(Error::InvalidInput(format!("∼_{s} needs cubes of dimension {l}, ℓmax is {}", x.lmax())));
    }
    let n = x.points();
    let set = x.cubes(l);
    if set.is_all() {
        return Ok(vec![true; n * n]);
    }
    let w = x.codec(l).top_weight();
    let mut keyed: Vec<(u64, u32)> = set.iter().map(|c| (c % w, (c / w) as u32)).collect();
    keyed.sort_unstable();
    let mut m = vec![false; n * n];
    for group in keyed.chunk_by(|a, b| a.0 == b.0) {
        for &(_, a) in group {
            for &(_, b) in group {
                m[a as usize * n + b as usize] = true;
            }
        }
    }
    Ok(m)
}

/// ∼_s: generated by the pairs of [`canonical_pairs`], which are checked
/// to be transitive already (as they are on fibrant spaces).
pub fn canonical_relation(x: &FiniteCubespace, s: usize) -> Result<EquivRelation> {
    EquivRelation::from_matrix(x.points(), &canonical_pairs(x, s)?)
}

/// {(x, y) : ⌞^{s+1}(x; y) is a cube}.
pub fn canonical_relation_corner(x: &FiniteCubespace, s: usize) -> Result<EquivRelation> {
    let l = s + 1;
    if l > x.lmax() {
        return Err(Error::InvalidInput(format!("∼_{s} needs cubes of dimension {l}, ℓmax is {}", x.lmax())));
    }
    let codec = x.codec(l);
    let set = x.cubes(l);
    EquivRelation::from_predicate(x.points(), |a, b| {
        set.contains(codec.encode(Configuration::corner_pattern(l, a, b).values()))
    })
}

/// X/R with the images of cubes as cubes, and the projection.
pub fn quotient_cubespace(x: &FiniteCubespace, r: &EquivRelation) -> Result<(FiniteCubespace, CubespaceMap)> {
    if r.points() != x.points() {
        return Err(Error::DimensionMismatch { expected: x.points(), found: r.points() });
    }
    let m = r.num_classes();
    let mut cubes = Vec::with_capacity(x.lmax() + 1);
    for l in 0..=x.lmax() {
        cubes.push(image_cubes(x, l, r.labels(), m)?);
    }
    let y = FiniteCubespace::new(m, cubes)?;
    let proj = CubespaceMap::new(x.clone(), y.clone(), r.labels().to_vec())?;
    Ok((y, proj))
}

/// {φ∘c : c ∈ C^ℓ(X)} for a point map φ into m points.
pub(crate) fn image_cubes(x: &FiniteCubespace, l: usize, phi: &[PointId], m: usize) -> Result<CubeSet> {
    let set = x.cubes(l);
    if set.is_all() && phi.iter().copied().collect::<std::collections::HashSet<_>>().len() == m {
        return CubeSet::all(m, l);
    }
    guard::check(set.len() as u128)?;
    let (sc, tc) = (x.codec(l), Codec::new(m, l)?);
    let mut vals = vec![0; vertex_count(l)];
    let mut codes = Vec::with_capacity(set.len() as usize);
    for code in set.iter() {
        sc.decode_into(code, &mut vals);
        vals.iter_mut().for_each(|v| *v = phi[*v as usize]);
        codes.push(tc.encode(&vals));
    }
    CubeSet::from_codes(m, l, codes)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerLevel {
    pub level: usize,
    pub relation: EquivRelation,
    pub space: FiniteCubespace,
    pub projection: CubespaceMap,
    /// Fibration check of the projection up to ℓmax.
    pub fibration: Verdict,
}

/// π_t(X) = X/∼_t for t = 0, ..., s where s is the degree of X.
pub fn canonical_tower(x: &FiniteCubespace) -> Result<Vec<TowerLevel>> {
    let cert = nilspace_degree(x)?;
    let s = cert
        .degree()
        .ok_or_else(|| Error::NotNilspace(format!("{:?}", cert.outcome)))?;
    if s + 1 > x.lmax() {
        return Err(Error::InvalidInput(format!("degree {s} needs ℓmax ≥ {}", s + 1)));
    }
    (0..=s)
        .map(|t| {
            let relation = canonical_relation(x, t)?;
            let (space, projection) = quotient_cubespace(x, &relation)?;
            let fibration = check_fibration(&projection, x.lmax())?;
            Ok(TowerLevel { level: t, relation, space, projection, fibration })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureGroupResult {
    pub degree: usize,
    pub group: FiniteAbelianGroup,
    /// `action[a * n + x] = a.x`
    pub action: Vec<PointId>,
    /// ∼_{s−1}
    pub fibers: EquivRelation,
    pub free: Verdict,
    pub orbits_are_fibers: Verdict,
}

impl StructureGroupResult {
    pub fn act(&self, a: Elem, x: PointId) -> PointId {
        self.action[a as usize * self.fibers.points() + x as usize]
    }

    /// The unique a with a.x = y, for x ∼_{s−1} y.
    pub fn difference(&self, x: PointId, y: PointId) -> Option<Elem> {
        self.group.elements().find(|&a| self.act(a, x) == y)
    }

    /// `table[x * n + y]` = the a with a.x = y, or u32::MAX.
    pub fn difference_table(&self) -> Vec<Elem> {
        let n = self.fibers.points();
        let mut t = vec![u32::MAX; n * n];
        for a in self.group.elements() {
            for x in 0..n {
                t[x * n + self.act(a, x as PointId) as usize] = a;
            }
        }
        t
    }
}

/// A_s(X) from pairs Y = {(x, y) : x ∼_{s−1} y} modulo
/// (x, y) ≈ (x', y') iff [⌞^s(x; y), ⌞^s(x'; y')] is a cube. Each ≈-class
/// is the graph of a bijection of X, and these compose to the group.
pub fn structure_group(x: &FiniteCubespace, s: usize) -> Result<StructureGroupResult> {
    let n = x.points();
    if s == 0 {
        if n != 1 {
            return Err(Error::NotNilspace("a degree-0 ergodic nilspace is a point".into()));
        }
        let group = FiniteAbelianGroup::cyclic(1);
        return Ok(StructureGroupResult {
            degree: 0,
            group,
            action: vec![0],
            fibers: EquivRelation::full(1),
            free: Verdict::Pass,
            orbits_are_fibers: Verdict::Pass,
        });
    }
    if s + 1 > x.lmax() {
        return Err(Error::InvalidInput(format!("A_{s} needs ℓmax ≥ {}", s + 1)));
    }
    let fibers = canonical_relation(x, s - 1)?;
    let pairs: Vec<(PointId, PointId)> = (0..n as PointId)
        .flat_map(|a| (0..n as PointId).map(move |b| (a, b)))
        .filter(|&(a, b)| fibers.related(a, b))
        .collect();
    guard::check((pairs.len() as u128).pow(2))?;
    let codec = x.codec(s + 1);
    let cubes = x.cubes(s + 1);
    let half = vertex_count(s);
    let mut vals = vec![0; 2 * half];
    let approx = EquivRelation::from_predicate(pairs.len(), |i, j| {
        let (a, b) = pairs[i as usize];
        let (c, d) = pairs[j as usize];
        vals[..half].fill(a);
        vals[half - 1] = b;
        vals[half..].fill(c);
        vals[2 * half - 1] = d;
        cubes.contains(codec.encode(&vals))
    })?;

    // graphs
    let m = approx.num_classes();
    let mut graphs = vec![vec![u32::MAX; n]; m];
    for (i, &(a, b)) in pairs.iter().enumerate() {
        let k = approx.class_of(i as PointId) as usize;
        if graphs[k][a as usize] != u32::MAX {
            return Err(Error::NotGraph(format!("class {k} relates {a} to two points")));
        }
        graphs[k][a as usize] = b;
    }
    for (k, g) in graphs.iter().enumerate() {
        let mut hit = vec![false; n];
        for (a, &b) in g.iter().enumerate() {
            if b == u32::MAX {
                return Err(Error::NotGraph(format!("class {k} has no pair starting at {a}")));
            }
            if std::mem::replace(&mut hit[b as usize], true) {
                return Err(Error::NotGraph(format!("class {k} is not injective")));
            }
        }
    }
    // Every class has a pair starting at 0, and classes are numbered by
    // least member, so class k is the one sending 0 to the k-th point.
    let class_at_zero: Vec<Option<usize>> = {
        let mut v = vec![None; n];
        for (k, g) in graphs.iter().enumerate() {
            v[g[0] as usize] = Some(k);
        }
        v
    };
    let mut table = vec![0 as Elem; m * m];
    for k in 0..m {
        for l in 0..m {
            let composed: Vec<PointId> = (0..n).map(|a| graphs[k][graphs[l][a] as usize]).collect();
            let target = class_at_zero[composed[0] as usize]
                .ok_or_else(|| Error::NotGraph("composition leaves the classes".into()))?;
            if graphs[target] != composed {
                return Err(Error::NotGraph(format!("composition of classes {k} and {l} is not a class")));
            }
            table[k * m + l] = target as Elem;
        }
    }
    let group = abelian_invariants(&FiniteGroup::new(m, table)?)?;
    let action: Vec<PointId> = graphs.concat();

    let res = StructureGroupResult {
        degree: s,
        group,
        action,
        fibers,
        free: Verdict::Pass,
        orbits_are_fibers: Verdict::Pass,
    };
    let free = free_verdict(&res);
    let orbits = orbit_verdict(&res);
    Ok(StructureGroupResult { free, orbits_are_fibers: orbits, ..res })
}

fn free_verdict(r: &StructureGroupResult) -> Verdict {
    let zero = r.group.zero();
    for a in r.group.elements().filter(|&a| a != zero) {
        for x in 0..r.fibers.points() as PointId {
            if r.act(a, x) == x {
                return Verdict::Fail(Witness::Points {
                    first: x,
                    second: a,
                    reason: "nonzero element fixes the point".into(),
                });
            }
        }
    }
    Verdict::Pass
}

fn orbit_verdict(r: &StructureGroupResult) -> Verdict {
    let n = r.fibers.points();
    let orbits = EquivRelation::generated(
        n,
        r.group.elements().flat_map(|a| (0..n as PointId).map(move |x| (x, r.act(a, x)))),
    );
    for x in 0..n as PointId {
        for y in 0..n as PointId {
            if orbits.related(x, y) != r.fibers.related(x, y) {
                return Verdict::Fail(Witness::Points {
                    first: x,
                    second: y,
                    reason: "orbit and ∼_{s−1} class disagree".into(),
                });
            }
        }
    }
    Verdict::Pass
}

/// A_t(X), computed on the tower member π_t(X).
pub fn structure_group_at(x: &FiniteCubespace, t: usize) -> Result<(FiniteCubespace, StructureGroupResult)> {
    if t + 1 > x.lmax() {
        return Err(Error::InvalidInput(format!("A_{t} needs ℓmax ≥ {}", t + 1)));
    }
    let (pt, _) = quotient_cubespace(x, &canonical_relation(x, t)?)?;
    let a = structure_group(&pt, t)?;
    Ok((pt, a))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: usize,
    /// Cubes compared against the first cube over the same base cube.
    pub pairs_checked: u64,
    pub exhaustive: bool,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakStructureCertificate {
    pub degree: usize,
    /// A acts freely.
    pub free: Verdict,
    /// A-orbits are the fibers of π_{s−1}.
    pub orbits: Verdict,
    /// Cubes over a fixed π_{s−1}-image differ exactly by C^ℓ(D_s(A)).
    pub cubes: Vec<LevelReport>,
    /// Replacing vertices within ∼_{s−1} classes keeps cubes, ℓ ≤ s.
    pub replacement: Vec<(usize, Verdict)>,
}

impl WeakStructureCertificate {
    pub fn passed(&self) -> bool {
        self.free.passed()
            && self.orbits.passed()
            && self.cubes.iter().all(|r| r.verdict.passed())
            && self.replacement.iter().all(|(_, v)| v.passed())
    }
}

/// Comparison budget at levels above s+1.
pub const SAMPLE_PAIRS: u64 = 100_000;

pub fn verify_weak_structure(x: &FiniteCubespace, a: &StructureGroupResult) -> Result<WeakStructureCertificate> {
    let s = a.degree;
    let mut cubes = Vec::new();
    let mut replacement = Vec::new();
    if s >= 1 {
        let ds = standard_nilspace(&a.group, s, x.lmax())?;
        let diff = a.difference_table();
        let labels = a.fibers.labels();
        let m = a.fibers.num_classes();
        for l in 0..=x.lmax() {
            cubes.push(check_cubes_over_base(x, l, &ds, &diff, labels, m, l > s + 1)?);
        }
        for l in 0..=s.min(x.lmax()) {
            replacement.push((l, check_replacement(x, &a.fibers, l)?));
        }
    }
    Ok(WeakStructureCertificate { degree: s, free: a.free.clone(), orbits: a.orbits_are_fibers.clone(), cubes, replacement })
}

fn check_cubes_over_base(
    x: &FiniteCubespace,
    l: usize,
    ds: &FiniteCubespace,
    diff: &[Elem],
    labels: &[u32],
    m: usize,
    sampled: bool,
) -> Result<LevelReport> {
    let n = x.points();
    let (xc, bc, ac) = (x.codec(l), Codec::new(m, l)?, ds.codec(l));
    let dset = ds.cubes(l);
    let nv = vertex_count(l);
    let mut groups: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let mut vals = vec![0; nv];
    for code in x.cubes(l).iter() {
        xc.decode_into(code, &mut vals);
        vals.iter_mut().for_each(|v| *v = labels[*v as usize]);
        groups.entry(bc.encode(&vals)).or_default().push(code);
    }
    let fail = |c1: u64, c2: Vec<PointId>, reason: &str| LevelReport {
        level: l,
        pairs_checked: 0,
        exhaustive: !sampled,
        verdict: Verdict::Fail(Witness::ConfigurationPair {
            first: xc.configuration(c1),
            second: Configuration::new(l, c2).unwrap(),
            reason: reason.into(),
        }),
    };
    // Count check: with a free action, {a : a.c₁ is a cube} has the size of
    // the group of cubes over π(c₁); all connecting a lying in D_s(A)
    // and equal sizes give the equivalence for every c₂.
    let dcount = dset.len();
    let (mut v1, mut v2, mut a) = (vec![0; nv], vec![0; nv], vec![0; nv]);
    for group in groups.values() {
        if group.len() as u64 != dcount {
            let c1 = group[0];
            xc.decode_into(c1, &mut v1);
            // find a ∈ D_s(A) with a.c₁ not a cube, or report the size
            for acode in dset.iter() {
                ac.decode_into(acode, &mut a);
                let moved: Vec<PointId> = (0..nv)
                    .map(|w| {
                        let x0 = v1[w];
                        (0..n as PointId).find(|&y| diff[x0 as usize * n + y as usize] == a[w]).unwrap()
                    })
                    .collect();
                if !x.cubes(l).contains(xc.encode(&moved)) {
                    return Ok(fail(c1, moved, "connecting configuration lies in D_s(A) but the second is not a cube"));
                }
            }
            return Ok(LevelReport {
                level: l,
                pairs_checked: 0,
                exhaustive: !sampled,
                verdict: Verdict::Fail(Witness::Message {
                    reason: format!("{} cubes over one base cube, D_s(A) has {dcount}", group.len()),
                }),
            });
        }
    }
    // Cubes over one base cube differ from the first of them by elements of
    // C^ℓ(D_s(A)); as that is a group and differences add up pointwise, this
    // covers every pair.
    let mut checked = 0u64;
    'outer: for group in groups.values() {
        let c1 = group[0];
        xc.decode_into(c1, &mut v1);
        for &c2 in &group[1..] {
            if sampled && checked >= SAMPLE_PAIRS {
                break 'outer;
            }
            checked += 1;
            xc.decode_into(c2, &mut v2);
            for w in 0..nv {
                a[w] = diff[v1[w] as usize * n + v2[w] as usize];
            }
            if !dset.contains(ac.encode(&a)) {
                return Ok(LevelReport {
                    pairs_checked: checked,
                    ..fail(c1, v2.clone(), "both are cubes but the connecting configuration is not in D_s(A)")
                });
            }
        }
    }
    Ok(LevelReport { level: l, pairs_checked: checked, exhaustive: !sampled, verdict: Verdict::Pass })
}

/// Cubes of dimension ℓ form full preimages under the quotient by `r`.
pub fn check_replacement(x: &FiniteCubespace, r: &EquivRelation, l: usize) -> Result<Verdict> {
    let m = r.num_classes();
    let labels = r.labels();
    let (xc, bc) = (x.codec(l), Codec::new(m, l)?);
    let nv = vertex_count(l);
    let mut groups: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
    let mut vals = vec![0; nv];
    for code in x.cubes(l).iter() {
        xc.decode_into(code, &mut vals);
        vals.iter_mut().for_each(|v| *v = labels[*v as usize]);
        groups.entry(bc.encode(&vals)).or_insert((0, code)).0 += 1;
    }
    for (key, (count, first)) in groups {
        let base = bc.decode(key);
        let expect: u64 = base.iter().map(|&c| r.classes()[c as usize].len() as u64).product();
        if count != expect {
            // enumerate replacements of the first cube to find a missing one
            let mut idx = vec![0usize; nv];
            loop {
                let c: Vec<PointId> = (0..nv).map(|w| r.classes()[base[w] as usize][idx[w]]).collect();
                if !x.cubes(l).contains(xc.encode(&c)) {
                    return Ok(Verdict::Fail(Witness::ConfigurationPair {
                        first: xc.configuration(first),
                        second: Configuration::new(l, c)?,
                        reason: "replacement within classes is not a cube".into(),
                    }));
                }
                let mut k = 0;
                while k < nv {
                    idx[k] += 1;
                    if idx[k] < r.classes()[base[k] as usize].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == nv {
                    break;
                }
            }
        }
    }
    Ok(Verdict::Pass)
}
