//! i-translations: membership, the groups Aut_i(X) at small scale, and
//! moving translations along fibrations.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::cube::{enumerate_faces, vertex_count, Face, PointId};
use crate::cubespace::FiniteCubespace;
use crate::error::{Error, Result};
use crate::fibrations::{check_fibration, CubespaceMap};
use crate::group::FiniteGroup;
use crate::guard;
use crate::verdict::{Verdict, Witness};

/// Full enumeration of Aut_i(X) runs over all bijections up to this many
/// points.
pub const BRUTE_FORCE_CAP: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Translation {
    pub map: Vec<PointId>,
    pub level: usize,
    pub verified_up_to: usize,
}

impl Translation {
    /// Checks `map` is an i-translation up to `up_to`.
    pub fn new(x: &FiniteCubespace, map: Vec<PointId>, level: usize, up_to: usize) -> Result<Self> {
        match is_translation(x, &map, level, up_to)? {
            Verdict::Pass => Ok(Translation { map, level, verified_up_to: up_to }),
            Verdict::Fail(_) => Err(Error::CheckFailed(format!("not a {level}-translation"))),
        }
    }

    pub fn identity(x: &FiniteCubespace, level: usize) -> Self {
        Translation { map: (0..x.points() as PointId).collect(), level, verified_up_to: x.lmax() }
    }

    pub fn apply(&self, p: PointId) -> PointId {
        self.map[p as usize]
    }
}

fn check_bijection(n: usize, f: &[PointId]) -> Result<()> {
    if f.len() != n {
        return Err(Error::NotBijection(format!("{} images for {n} points", f.len())));
    }
    let mut seen = vec![false; n];
    for &p in f {
        if p as usize >= n || std::mem::replace(&mut seen[p as usize], true) {
            return Err(Error::NotBijection(format!("point {p} is hit twice or out of range")));
        }
    }
    Ok(())
}

/// [f]_F.c ∈ C^ℓ(X) for every cube c of dimension i ≤ ℓ ≤ up_to and every
/// face F of codimension i.
pub fn is_translation(x: &FiniteCubespace, f: &[PointId], i: usize, up_to: usize) -> Result<Verdict> {
    check_bijection(x.points(), f)?;
    if i == 0 {
        return Err(Error::InvalidInput("translation level must be at least 1".into()));
    }
    if up_to > x.lmax() {
        return Err(Error::InvalidInput(format!("cubes are known up to {} only", x.lmax())));
    }
    for l in i..=up_to {
        let faces = enumerate_faces(l, i);
        // an upper face first: it rejects most non-translations cheaply
        let upper = faces.iter().position(|fc| fc.is_upper()).unwrap_or(0);
        let order = std::iter::once(upper).chain((0..faces.len()).filter(|&k| k != upper));
        for k in order {
            if let Some(w) = face_failure(x, f, l, &faces[k]) {
                return Ok(Verdict::Fail(w));
            }
        }
    }
    Ok(Verdict::Pass)
}

fn face_failure(x: &FiniteCubespace, f: &[PointId], l: usize, face: &Face) -> Option<Witness> {
    let codec = x.codec(l);
    let set = x.cubes(l);
    let members = face.members();
    let mut vals = vec![0; vertex_count(l)];
    for code in set.iter() {
        codec.decode_into(code, &mut vals);
        for &w in &members {
            vals[w] = f[vals[w] as usize];
        }
        if !set.contains(codec.encode(&vals)) {
            return Some(Witness::NotTranslation { cube: codec.configuration(code), face: face.clone() });
        }
    }
    None
}

impl Witness {
    /// Whether a translation witness still fails for `f` on `x`.
    pub fn replays_on_translation(&self, x: &FiniteCubespace, f: &[PointId]) -> bool {
        let Witness::NotTranslation { cube, face } = self else {
            return false;
        };
        if !x.is_cube(cube) || face.ambient_dim() != cube.dim() {
            return false;
        }
        let mut vals = cube.values().to_vec();
        for w in face.members() {
            vals[w] = f[vals[w] as usize];
        }
        !x.is_cube_values(cube.dim(), &vals)
    }
}

/// A set of i-translations closed under composition and inverse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationGroup {
    pub level: usize,
    pub verified_up_to: usize,
    /// Sorted; the identity first.
    pub elements: Vec<Vec<PointId>>,
    /// Whether every i-translation is listed. Otherwise the group is a
    /// subgroup of Aut_i(X), possibly proper.
    pub exhaustive: bool,
}

impl TranslationGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, f: &[PointId]) -> bool {
        self.elements.binary_search_by(|e| e.as_slice().cmp(f)).is_ok()
    }

    /// The group under composition, element k being `elements[k]`.
    pub fn to_group(&self) -> Result<FiniteGroup> {
        let n = self.order();
        let mut table = Vec::with_capacity(n * n);
        for a in &self.elements {
            for b in &self.elements {
                let ab: Vec<PointId> = b.iter().map(|&p| a[p as usize]).collect();
                let k = self
                    .elements
                    .binary_search(&ab)
                    .map_err(|_| Error::CheckFailed("translations are not closed under composition".into()))?;
                table.push(k as u32);
            }
        }
        FiniteGroup::new(n, table)
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// All i-translations, by brute force over the bijections of X.
pub fn translation_group(x: &FiniteCubespace, i: usize) -> Result<TranslationGroup> {
    let n = x.points();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::SizeGuard { requested: factorial(n), limit: factorial(BRUTE_FORCE_CAP) as u64 });
    }
    let mut perm: Vec<PointId> = (0..n as PointId).collect();
    let mut elements = Vec::new();
    loop {
        if is_translation(x, &perm, i, x.lmax())?.passed() {
            elements.push(perm.clone());
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let g = TranslationGroup { level: i, verified_up_to: x.lmax(), elements, exhaustive: true };
    g.to_group()?;
    Ok(g)
}

fn next_permutation(p: &mut [PointId]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// The subgroup of Aut_i(X) generated by `generators`, each checked first.
pub fn translation_subgroup(x: &FiniteCubespace, i: usize, generators: &[Vec<PointId>]) -> Result<TranslationGroup> {
    for g in generators {
        if let Verdict::Fail(_) = is_translation(x, g, i, x.lmax())? {
            return Err(Error::CheckFailed(format!("a generator is not a {i}-translation")));
        }
    }
    let id: Vec<PointId> = (0..x.points() as PointId).collect();
    let mut set: BTreeSet<Vec<PointId>> = BTreeSet::from([id.clone()]);
    let mut frontier = vec![id];
    while let Some(a) = frontier.pop() {
        for g in generators {
            let ga: Vec<PointId> = a.iter().map(|&p| g[p as usize]).collect();
            if set.insert(ga.clone()) {
                guard::check(set.len() as u128 * x.points() as u128)?;
                frontier.push(ga);
            }
        }
    }
    Ok(TranslationGroup { level: i, verified_up_to: x.lmax(), elements: set.into_iter().collect(), exhaustive: false })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutFiltration {
    /// Aut_1, Aut_2, …, Aut_ℓmax.
    pub groups: Vec<TranslationGroup>,
    pub nested: Verdict,
    /// [Aut_i, Aut_j] ⊆ Aut_{i+j} for i + j ≤ ℓmax.
    pub commutators: Verdict,
}

/// Aut_i(X) for 1 ≤ i ≤ ℓmax with the nesting and commutator checks.
/// Above ℓmax the defining condition is empty, so levels stop there.
pub fn aut_filtration(x: &FiniteCubespace) -> Result<AutFiltration> {
    let groups: Vec<TranslationGroup> = (1..=x.lmax()).map(|i| translation_group(x, i)).collect::<Result<_>>()?;
    let mut nested = Verdict::Pass;
    'nest: for w in groups.windows(2) {
        for f in &w[1].elements {
            if !w[0].contains(f) {
                nested = Verdict::Fail(Witness::Message {
                    reason: format!("a {}-translation is not a {}-translation", w[1].level, w[0].level),
                });
                break 'nest;
            }
        }
    }
    let mut commutators = Verdict::Pass;
    'comm: for gi in &groups {
        for gj in &groups {
            let k = gi.level + gj.level;
            if k > x.lmax() {
                continue;
            }
            for a in &gi.elements {
                for b in &gj.elements {
                    let c = commutator(a, b);
                    if !groups[k - 1].contains(&c) {
                        commutators = Verdict::Fail(Witness::Message {
                            reason: format!("a commutator of Aut_{} and Aut_{} is not in Aut_{k}", gi.level, gj.level),
                        });
                        break 'comm;
                    }
                }
            }
        }
    }
    Ok(AutFiltration { groups, nested, commutators })
}

fn inverse(a: &[PointId]) -> Vec<PointId> {
    let mut inv = vec![0; a.len()];
    for (p, &q) in a.iter().enumerate() {
        inv[q as usize] = p as PointId;
    }
    inv
}

/// a⁻¹ b⁻¹ a b as maps, applied right to left.
pub fn commutator(a: &[PointId], b: &[PointId]) -> Vec<PointId> {
    let (ai, bi) = (inverse(a), inverse(b));
    (0..a.len()).map(|p| ai[bi[a[b[p] as usize] as usize] as usize]).collect()
}

fn require_fibration(phi: &CubespaceMap) -> Result<()> {
    let up_to = phi.source().lmax().min(phi.target().lmax());
    match check_fibration(phi, up_to)? {
        Verdict::Pass => Ok(()),
        Verdict::Fail(_) => Err(Error::CheckFailed("the map is not a fibration".into())),
    }
}

/// The translation f′ of Y with f′∘φ = φ∘f, when f maps fibers of φ onto
/// fibers.
pub fn push_translation(phi: &CubespaceMap, f: &Translation) -> Result<Translation> {
    require_fibration(phi)?;
    let fibers = phi.fibers();
    let mut down: Vec<Option<PointId>> = vec![None; phi.target().points()];
    for class in fibers.classes() {
        let y = phi.apply(class[0]);
        let img: BTreeSet<PointId> = class.iter().map(|&p| f.apply(p)).collect();
        let y2 = phi.apply(f.apply(class[0]));
        let target: BTreeSet<PointId> = fibers.classes()[fibers.class_of(f.apply(class[0])) as usize].iter().copied().collect();
        if img != target {
            return Err(Error::NoDescent(format!("the fiber over {y} is not mapped onto the fiber over {y2}")));
        }
        down[y as usize] = Some(y2);
    }
    let map: Vec<PointId> = down.into_iter().map(|y| y.expect("fibrations are surjective")).collect();
    let up_to = f.verified_up_to.min(phi.target().lmax());
    match is_translation(phi.target(), &map, f.level, up_to)? {
        Verdict::Pass => Ok(Translation { map, level: f.level, verified_up_to: up_to }),
        Verdict::Fail(_) => Err(Error::CheckFailed("the pushed map is not a translation".into())),
    }
}

/// Every i-translation f of X with φ∘f = f′∘φ.
pub fn pull_translation(phi: &CubespaceMap, f: &Translation) -> Result<Vec<Translation>> {
    require_fibration(phi)?;
    let x = phi.source();
    let fibers = phi.fibers();
    let by_base: HashMap<PointId, &Vec<PointId>> = fibers.classes().iter().map(|c| (phi.apply(c[0]), c)).collect();
    // each fiber maps bijectively onto the fiber over f′ of its base
    let mut count: u128 = 1;
    for class in fibers.classes() {
        let target = by_base[&f.apply(phi.apply(class[0]))];
        if target.len() != class.len() {
            return Ok(Vec::new());
        }
        count = count.saturating_mul(factorial(class.len()));
    }
    guard::check(count)?;
    let targets: Vec<&Vec<PointId>> = (0..x.points() as PointId).map(|p| by_base[&f.apply(phi.apply(p))]).collect();
    let mut map = vec![0; x.points()];
    let mut used = vec![false; x.points()];
    let mut out = Vec::new();
    let up_to = x.lmax();
    fn rec(
        p: usize,
        targets: &[&Vec<PointId>],
        map: &mut Vec<PointId>,
        used: &mut Vec<bool>,
        visit: &mut dyn FnMut(&[PointId]) -> Result<()>,
    ) -> Result<()> {
        if p == map.len() {
            return visit(map);
        }
        for &q in targets[p].iter() {
            if !used[q as usize] {
                used[q as usize] = true;
                map[p] = q;
                rec(p + 1, targets, map, used, visit)?;
                used[q as usize] = false;
            }
        }
        Ok(())
    }
    rec(0, &targets, &mut map, &mut used, &mut |m| {
        if is_translation(x, m, f.level, up_to)?.passed() {
            out.push(Translation { map: m.to_vec(), level: f.level, verified_up_to: up_to });
        }
        Ok(())
    })?;
    Ok(out)
}
