//! Host–Kra cube groups, Host–Kra nilspaces, the standard nilspaces D_s(A),
//! dynamical cubes of group actions and the regionally proximal relations.
//!
//! For a finite action the orbit closure defining dynamical cubes is just
//! the orbit, so no topology is involved anywhere here.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::cube::{enumerate_faces, enumerate_morphisms, sign, vertex_count, Configuration, Face, PointId};
use crate::cubeset::{Codec, CubeSet};
use crate::cubespace::FiniteCubespace;
use crate::error::{Error, Result};
use crate::group::{lower_central_chain, Elem, FiniteAbelianGroup, FiniteGroup, Filtration, Subgroup};
use crate::guard;
use crate::linalg::integer_echelon_high;
use crate::orbit::{face_subgroup, orbit, ActionTable, FaceGen};
use crate::relation::EquivRelation;

/// An action of a finite group on {0, ..., n−1}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAction", into = "RawAction")]
pub struct GroupAction {
    group: FiniteGroup,
    points: usize,
    /// `table[h * points + x] = h.x`
    table: Vec<PointId>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawAction {
    pub group: FiniteGroup,
    pub points: usize,
    pub table: Vec<PointId>,
}

impl TryFrom<RawAction> for GroupAction {
    type Error = Error;
    fn try_from(r: RawAction) -> Result<Self> {
        GroupAction::new(r.group, r.points, r.table)
    }
}

impl From<GroupAction> for RawAction {
    fn from(a: GroupAction) -> Self {
        RawAction { group: a.group, points: a.points, table: a.table }
    }
}

impl GroupAction {
    pub fn new(group: FiniteGroup, points: usize, table: Vec<PointId>) -> Result<Self> {
        if points == 0 {
            return Err(Error::InvalidInput("action on an empty set".into()));
        }
        if table.len() != group.order() * points {
            return Err(Error::InvalidInput("action table has the wrong size".into()));
        }
        if table.iter().any(|&x| x as usize >= points) {
            return Err(Error::InvalidInput("action table entry out of range".into()));
        }
        let a = GroupAction { group, points, table };
        let e = a.group.identity();
        for x in 0..points as PointId {
            if a.act(e, x) != x {
                return Err(Error::InvalidInput(format!("identity moves point {x}")));
            }
        }
        for g in a.group.elements() {
            for h in a.group.elements() {
                let gh = a.group.mul(g, h);
                for x in 0..points as PointId {
                    if a.act(g, a.act(h, x)) != a.act(gh, x) {
                        return Err(Error::InvalidInput(format!(
                            "action is not compatible: {g}.({h}.{x}) differs from ({g}{h}).{x}"
                        )));
                    }
                }
            }
        }
        Ok(a)
    }

    /// G acting on itself by left multiplication.
    pub fn left_translation(g: &FiniteGroup) -> Self {
        GroupAction { group: g.clone(), points: g.order(), table: g.table().to_vec() }
    }

    /// G acting on the left cosets xH, numbered by increasing least element.
    /// Also returns the coset of each element.
    pub fn on_cosets(g: &FiniteGroup, h: &Subgroup) -> (Self, Vec<PointId>) {
        let cosets = left_cosets(g, h);
        let m = cosets.iter().max().map_or(0, |&c| c as usize + 1);
        let mut reps = vec![u32::MAX; m];
        for x in g.elements() {
            let c = cosets[x as usize] as usize;
            if reps[c] == u32::MAX {
                reps[c] = x;
            }
        }
        let mut table = vec![0; g.order() * m];
        for a in g.elements() {
            for (c, &r) in reps.iter().enumerate() {
                table[a as usize * m + c] = cosets[g.mul(a, r) as usize];
            }
        }
        (GroupAction { group: g.clone(), points: m, table }, cosets)
    }

    /// The action of `g` through a homomorphism into the group of `inner`.
    pub fn through(g: &FiniteGroup, hom: &[Elem], inner: &GroupAction) -> Result<Self> {
        if hom.len() != g.order() {
            return Err(Error::InvalidInput("homomorphism has the wrong length".into()));
        }
        let n = inner.points;
        let mut table = Vec::with_capacity(g.order() * n);
        for a in g.elements() {
            table.extend_from_slice(&inner.table[hom[a as usize] as usize * n..][..n]);
        }
        GroupAction::new(g.clone(), n, table)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn table(&self) -> &[PointId] {
        &self.table
    }

    pub fn act(&self, h: Elem, x: PointId) -> PointId {
        self.table[h as usize * self.points + x as usize]
    }

    pub fn permutation(&self, h: Elem) -> Vec<PointId> {
        self.table[h as usize * self.points..][..self.points].to_vec()
    }

    pub fn orbits(&self) -> EquivRelation {
        EquivRelation::generated(
            self.points,
            self.group
                .elements()
                .flat_map(|h| (0..self.points as PointId).map(move |x| (x, self.act(h, x)))),
        )
    }

    /// Finite minimality.
    pub fn is_transitive(&self) -> bool {
        self.orbits().num_classes() == 1
    }
}

fn left_cosets(g: &FiniteGroup, h: &Subgroup) -> Vec<PointId> {
    let mut coset = vec![u32::MAX; g.order()];
    let mut next = 0;
    for x in g.elements() {
        if coset[x as usize] == u32::MAX {
            for &k in h.elements() {
                coset[g.mul(x, k) as usize] = next;
            }
            next += 1;
        }
    }
    coset
}

/// Generator [g]_F of a Host–Kra group, with the level g was drawn from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HkGenerator {
    pub face: Face,
    pub element: Elem,
    pub level: usize,
}

/// HK^ℓ(G_•) as a set of configurations over the elements of G.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HKCubeGroup {
    pub group: FiniteGroup,
    pub dim: usize,
    pub elements: CubeSet,
    pub generators: Vec<HkGenerator>,
}

impl HKCubeGroup {
    pub fn order(&self) -> u64 {
        self.elements.len()
    }

    pub fn contains(&self, gamma: &Configuration) -> bool {
        self.elements.contains_config(gamma)
    }
}

/// [g]_F for g in a generating set of G_i and F of codimension i, for
/// i = 0, ..., ℓ. `level(i)` gives G_i. Codimension 0 contributes the
/// diagonal copy of G_0, which is already generated by codimension 1 when
/// the filtration is proper, and makes HK^0 = G.
fn hk_generators(g: &FiniteGroup, level: &dyn Fn(usize) -> Subgroup, dim: usize) -> Vec<HkGenerator> {
    let mut out = Vec::new();
    for codim in 0..=dim {
        let gi = level(codim);
        if gi.is_trivial() {
            continue;
        }
        let gens = gi.generators(g);
        for face in enumerate_faces(dim, codim) {
            for &e in &gens {
                out.push(HkGenerator { face: face.clone(), element: e, level: codim });
            }
        }
    }
    out
}

fn face_gens(gens: &[HkGenerator]) -> Vec<FaceGen> {
    gens.iter().map(|g| FaceGen { mask: g.face.mask(), elem: g.element }).collect()
}

/// HK^ℓ(G_•): the closure in G^{{0,1}^ℓ} of the face generators.
pub fn hk_cube_group(g: &FiniteGroup, filtration: &Filtration, dim: usize) -> Result<HKCubeGroup> {
    hk_group_with_levels(g, &|i| filtration.level(i).clone(), dim)
}

fn hk_group_with_levels(g: &FiniteGroup, level: &dyn Fn(usize) -> Subgroup, dim: usize) -> Result<HKCubeGroup> {
    let generators = hk_generators(g, level, dim);
    let act = ActionTable { points: g.order(), table: g.table() };
    let elements = face_subgroup(&act, g.identity(), dim, &face_gens(&generators))?;
    Ok(HKCubeGroup { group: g.clone(), dim, elements, generators })
}

/// All products Π [g_F]_F over upper faces F (codimension 0 included),
/// with g_F ∈ G_{codim F}, faces taken in increasing codimension.
pub fn hk_upper_face_products(g: &FiniteGroup, filtration: &Filtration, dim: usize) -> Result<CubeSet> {
    let mut faces: Vec<Face> = Vec::new();
    for codim in 0..=dim {
        faces.extend(enumerate_faces(dim, codim).into_iter().filter(|f| f.is_upper()));
    }
    let choices: Vec<(Vec<usize>, Vec<Elem>)> = faces
        .iter()
        .map(|f| (f.members(), filtration.level(f.codim()).elements().to_vec()))
        .filter(|(_, els)| els.len() > 1)
        .collect();
    let count: u128 = choices.iter().map(|(_, e)| e.len() as u128).product();
    guard::check(count)?;
    let codec = Codec::new(g.order(), dim)?;
    let nv = vertex_count(dim);
    let mut codes = Vec::with_capacity(count as usize);
    let mut idx = vec![0usize; choices.len()];
    loop {
        let mut gamma = vec![g.identity(); nv];
        for (k, (members, els)) in choices.iter().enumerate() {
            let e = els[idx[k]];
            for &v in members {
                gamma[v] = g.mul(gamma[v], e);
            }
        }
        codes.push(codec.encode(&gamma));
        let mut k = 0;
        loop {
            if k == idx.len() {
                return CubeSet::from_codes(g.order(), dim, codes);
            }
            idx[k] += 1;
            if idx[k] < choices[k].1.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// The Host–Kra nilspace on G/Γ with the coset of each element. The
/// orders |Γ ∩ G_i| are reported since compatibility is automatic here.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HkNilspace {
    pub space: FiniteCubespace,
    pub coset_of: Vec<PointId>,
    pub gamma_levels: Vec<usize>,
}

pub fn hk_nilspace(g: &FiniteGroup, filtration: &Filtration, gamma: &Subgroup, lmax: usize) -> Result<HkNilspace> {
    let (action, coset_of) = GroupAction::on_cosets(g, gamma);
    let level = |i: usize| filtration.level(i).clone();
    let space = orbit_cubespace(&action, &level, lmax)?;
    let gamma_levels = filtration
        .levels()
        .iter()
        .map(|gi| gi.elements().iter().filter(|&&x| gamma.contains(x)).count())
        .collect();
    Ok(HkNilspace { space, coset_of, gamma_levels })
}

/// C^ℓ = {γ.□^ℓ(x)} for γ generated by the face generators of `level`.
fn orbit_cubespace(action: &GroupAction, level: &dyn Fn(usize) -> Subgroup, lmax: usize) -> Result<FiniteCubespace> {
    let n = action.points();
    let act = ActionTable { points: n, table: action.table() };
    let mut cubes = Vec::with_capacity(lmax + 1);
    for l in 0..=lmax {
        let gens = hk_generators(action.group(), level, l);
        let codec = Codec::new(n, l)?;
        let seeds: Vec<u64> = (0..n as PointId)
            .map(|x| codec.encode(&vec![x; vertex_count(l)]))
            .collect();
        cubes.push(orbit(&act, l, &face_gens(&gens), seeds)?);
    }
    FiniteCubespace::new(n, cubes)
}

/// D_s(A): configurations whose alternating sum vanishes along every cube
/// morphism {0,1}^{s+1} → {0,1}^ℓ.
pub fn standard_nilspace(a: &FiniteAbelianGroup, s: usize, lmax: usize) -> Result<FiniteCubespace> {
    let cubes = (0..=lmax)
        .map(|l| standard_cubes(a, s, l))
        .collect::<Result<Vec<_>>>()?;
    FiniteCubespace::new(a.order(), cubes)
}

/// Distinct linear forms c ↦ Σ_ω (−1)^{|ω|} c(φ(ω)) as coefficient vectors
/// over {0,1}^ℓ.
pub fn alternating_forms(s: usize, l: usize) -> Result<Vec<Vec<i64>>> {
    let nv = vertex_count(l);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for phi in enumerate_morphisms(s + 1, l)? {
        let mut coef = vec![0i64; nv];
        for w in 0..vertex_count(s + 1) {
            coef[phi.apply_vertex(w)] += sign(w);
        }
        if coef.iter().all(|&c| c == 0) {
            continue;
        }
        if seen.insert(coef.clone()) {
            out.push(coef);
        }
    }
    Ok(out)
}

fn standard_cubes(a: &FiniteAbelianGroup, s: usize, l: usize) -> Result<CubeSet> {
    let nv = vertex_count(l);
    let forms = alternating_forms(s, l)?;
    let rows = integer_echelon_high(&forms, nv);
    // rows[v] = the echelon row leading at vertex v, if any
    let mut lead: Vec<Option<Vec<(usize, i64)>>> = vec![None; nv];
    for r in rows {
        let v = (0..nv).rev().find(|&k| r[k] != 0).unwrap();
        let rest = (0..v).filter(|&k| r[k] != 0).map(|k| (k, r[k])).collect::<Vec<_>>();
        let mut full = rest;
        full.push((v, r[v]));
        lead[v] = Some(full);
    }
    let codec = Codec::new(a.order(), l)?;
    let mut codes = Vec::new();
    let mut vals = vec![0 as Elem; nv];
    fn rec(
        a: &FiniteAbelianGroup,
        v: usize,
        lead: &[Option<Vec<(usize, i64)>>],
        vals: &mut [Elem],
        codec: &Codec,
        codes: &mut Vec<u64>,
    ) -> Result<()> {
        if v == vals.len() {
            codes.push(codec.encode(vals));
            guard::check(codes.len() as u128)?;
            return Ok(());
        }
        match &lead[v] {
            None => {
                for x in a.elements() {
                    vals[v] = x;
                    rec(a, v + 1, lead, vals, codec, codes)?;
                }
            }
            Some(row) => {
                let (_, d) = *row.last().unwrap();
                let mut rest = a.zero();
                for &(k, c) in &row[..row.len() - 1] {
                    rest = a.add(rest, a.times(c, vals[k]));
                }
                if d == 1 {
                    vals[v] = a.neg(rest);
                    rec(a, v + 1, lead, vals, codec, codes)?;
                } else {
                    for x in a.elements() {
                        if a.add(a.times(d, x), rest) == a.zero() {
                            vals[v] = x;
                            rec(a, v + 1, lead, vals, codec, codes)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
    rec(a, 0, &lead, &mut vals, &codec, &mut codes)?;
    CubeSet::from_codes(a.order(), l, codes)
}

/// HK^ℓ(A_•) for the degree-s filtration A_0 = ... = A_s = A, A_{s+1} = 0,
/// acting on A. Equal to C^ℓ(D_s(A)).
pub fn standard_nilspace_via_hk(a: &FiniteAbelianGroup, s: usize, lmax: usize) -> Result<FiniteCubespace> {
    let filt = Filtration::abelian(a.group(), s)?;
    let cubes = (0..=lmax)
        .map(|l| hk_cube_group(a.group(), &filt, l).map(|h| h.elements))
        .collect::<Result<Vec<_>>>()?;
    FiniteCubespace::new(a.order(), cubes)
}

/// Terms of the lower central series of H, constant after it stabilizes.
pub fn stabilized_lcs(h: &FiniteGroup) -> impl Fn(usize) -> Subgroup {
    let chain = lower_central_chain(h);
    move |i: usize| {
        if i == 0 {
            chain[0].clone()
        } else {
            chain[(i - 1).min(chain.len() - 1)].clone()
        }
    }
}

/// C^ℓ_H(X) for ℓ ≤ ℓmax: orbits of constant configurations under the
/// Host–Kra group of H with its lower central series, the tail held
/// constant when H is not nilpotent.
pub fn dynamical_cubespace(action: &GroupAction, lmax: usize) -> Result<FiniteCubespace> {
    let level = stabilized_lcs(action.group());
    orbit_cubespace(action, &level, lmax)
}

/// C^ℓ_H(X) at a single level.
pub fn dynamical_cubes(action: &GroupAction, l: usize) -> Result<CubeSet> {
    let level = stabilized_lcs(action.group());
    let n = action.points();
    let act = ActionTable { points: n, table: action.table() };
    let gens = hk_generators(action.group(), &level, l);
    let codec = Codec::new(n, l)?;
    let seeds: Vec<u64> = (0..n as PointId).map(|x| codec.encode(&vec![x; vertex_count(l)])).collect();
    orbit(&act, l, &face_gens(&gens), seeds)
}

/// RP^s_H(X) = {(x, y) : ⌞^{s+1}(x; y) ∈ C^{s+1}_H(X)}, checked to be an
/// H-invariant equivalence relation.
pub fn rp_relation(action: &GroupAction, s: usize, cubes: Option<&CubeSet>) -> Result<EquivRelation> {
    let owned;
    let set = match cubes {
        Some(c) if c.dim() == s + 1 => c,
        Some(_) => return Err(Error::InvalidInput("precomputed cubes have the wrong dimension".into())),
        None => {
            owned = dynamical_cubes(action, s + 1)?;
            &owned
        }
    };
    let n = action.points();
    let codec = Codec::new(n, s + 1)?;
    let rel = EquivRelation::from_predicate(n, |x, y| {
        set.contains(codec.encode(Configuration::corner_pattern(s + 1, x, y).values()))
    })?;
    for h in action.group().elements() {
        for (x, y) in rel.pairs() {
            if !rel.related(action.act(h, x), action.act(h, y)) {
                return Err(Error::NotEquivariant(format!("RP^{s} is not invariant under element {h}")));
            }
        }
    }
    Ok(rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubespace::{check_cube_invariance, nilspace_degree};
    use crate::group::catalog::*;
    use crate::group::{lower_central_series, validate_filtration};

    /// Closure oracle: products of generators until nothing new appears.
    fn naive_hk(g: &FiniteGroup, gens: &[HkGenerator], dim: usize) -> HashSet<Vec<Elem>> {
        let nv = vertex_count(dim);
        let as_vec = |x: &HkGenerator| {
            let mut v = vec![g.identity(); nv];
            for w in x.face.members() {
                v[w] = x.element;
            }
            v
        };
        let gvecs: Vec<Vec<Elem>> = gens.iter().map(as_vec).collect();
        let mut set: HashSet<Vec<Elem>> = HashSet::from([vec![g.identity(); nv]]);
        let mut frontier: Vec<Vec<Elem>> = set.iter().cloned().collect();
        while let Some(x) = frontier.pop() {
            for gv in &gvecs {
                let y: Vec<Elem> = (0..nv).map(|v| g.mul(x[v], gv[v])).collect();
                if set.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        set
    }

    #[test]
    fn z4_degree_one_hk2() {
        let z4 = cyclic(4);
        let f = lower_central_series(&z4).unwrap();
        let hk = hk_cube_group(&z4, &f, 2).unwrap();
        assert_eq!(hk.order(), 64);
        let codec = Codec::new(4, 2).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let v = [a, (a + b) % 4, (a + c) % 4, (a + b + c) % 4];
                    assert!(hk.elements.contains(codec.encode(&v)));
                }
            }
        }
    }

    #[test]
    fn d4_hk2_matches_naive_closure() {
        let d4 = dihedral(4);
        let f = lower_central_series(&d4).unwrap();
        let hk = hk_cube_group(&d4, &f, 2).unwrap();
        assert_eq!(hk.order(), 1024);
        let naive = naive_hk(&d4, &hk.generators, 2);
        assert_eq!(naive.len(), 1024);
        let codec = Codec::new(8, 2).unwrap();
        for v in &naive {
            assert!(hk.elements.contains(codec.encode(v)));
        }
    }

    #[test]
    fn hk0_is_the_group() {
        let d4 = dihedral(4);
        let f = lower_central_series(&d4).unwrap();
        assert_eq!(hk_cube_group(&d4, &f, 0).unwrap().order(), 8);
    }

    #[test]
    fn hk_is_closed_under_reindexing() {
        let d4 = dihedral(4);
        let f = lower_central_series(&d4).unwrap();
        let hk: Vec<HKCubeGroup> = (0..=2).map(|l| hk_cube_group(&d4, &f, l).unwrap()).collect();
        for k in 0..=2 {
            let codec = Codec::new(8, k).unwrap();
            for l in 0..=2 {
                for phi in enumerate_morphisms(l, k).unwrap() {
                    for code in hk[k].elements.iter() {
                        let gamma = codec.configuration(code);
                        assert!(hk[l].contains(&gamma.apply_morphism(&phi).unwrap()));
                    }
                }
            }
        }
    }

    #[test]
    fn commutator_identity_on_generators() {
        let d4 = dihedral(4);
        let dim = 3;
        for f1 in enumerate_faces(dim, 1) {
            for f2 in enumerate_faces(dim, 2) {
                let meet: Vec<usize> = f1.members().into_iter().filter(|&v| f2.contains(v)).collect();
                if meet.is_empty() {
                    continue;
                }
                for g1 in d4.elements() {
                    for g2 in d4.elements() {
                        for v in 0..vertex_count(dim) {
                            let a = if f1.contains(v) { g1 } else { d4.identity() };
                            let b = if f2.contains(v) { g2 } else { d4.identity() };
                            let expect = if meet.contains(&v) { d4.commutator(g1, g2) } else { d4.identity() };
                            assert_eq!(d4.commutator(a, b), expect);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn upper_face_products_match_closure() {
        let d4 = dihedral(4);
        let f = lower_central_series(&d4).unwrap();
        for l in 0..=3 {
            let hk = hk_cube_group(&d4, &f, l).unwrap();
            assert_eq!(hk_upper_face_products(&d4, &f, l).unwrap(), hk.elements);
        }
    }

    #[test]
    fn standard_d1_counts() {
        let z2 = FiniteAbelianGroup::cyclic(2);
        let x = standard_nilspace(&z2, 1, 3).unwrap();
        assert_eq!(x.cubes(2).len(), 8);
        assert_eq!(x.cubes(3).len(), 16);
        let y = standard_nilspace(&z2, 2, 3).unwrap();
        assert_eq!(y.cubes(3).len(), 128);
    }

    #[test]
    fn standard_equals_hk() {
        for a in [FiniteAbelianGroup::cyclic(3), FiniteAbelianGroup::product(&[2, 2])] {
            for s in 1..=2 {
                assert_eq!(standard_nilspace(&a, s, s + 1).unwrap(), standard_nilspace_via_hk(&a, s, s + 1).unwrap());
            }
        }
    }

    #[test]
    fn hk_nilspace_of_z2_is_d1() {
        let z2 = cyclic(2);
        let f = lower_central_series(&z2).unwrap();
        let hk = hk_nilspace(&z2, &f, &z2.trivial_subgroup(), 3).unwrap();
        let d1 = standard_nilspace(&FiniteAbelianGroup::cyclic(2), 1, 3).unwrap();
        assert_eq!(hk.space, d1);
    }

    #[test]
    fn hk_nilspace_z4_degree_two() {
        let z4 = cyclic(4);
        let f = validate_filtration(&z4, &[vec![0, 1, 2, 3], vec![0, 1, 2, 3], vec![0, 2], vec![0]]).unwrap();
        let hk = hk_nilspace(&z4, &f, &z4.trivial_subgroup(), 4).unwrap();
        assert!(check_cube_invariance(&hk.space).passed());
        assert_eq!(nilspace_degree(&hk.space).unwrap().degree(), Some(2));
    }

    #[test]
    fn dynamical_examples() {
        let z2 = cyclic(2);
        let swap = GroupAction::left_translation(&z2);
        let x = dynamical_cubespace(&swap, 2).unwrap();
        let d1 = standard_nilspace(&FiniteAbelianGroup::cyclic(2), 1, 2).unwrap();
        assert_eq!(x, d1);

        let z6 = GroupAction::left_translation(&cyclic(6));
        let c2 = dynamical_cubes(&z6, 2).unwrap();
        assert_eq!(c2.len(), 216);
        let codec = Codec::new(6, 2).unwrap();
        for code in c2.iter() {
            let v = codec.decode(code);
            assert_eq!((v[3] + v[0]) % 6, (v[1] + v[2]) % 6);
        }
    }

    #[test]
    fn hyperface_definition_agrees_for_non_nilpotent_groups() {
        // Only hyperface generators with every element of S3.
        let s3 = symmetric(3);
        let act = GroupAction::left_translation(&s3);
        let whole = s3.whole();
        let hyper = |i: usize| if i <= 1 { whole.clone() } else { s3.trivial_subgroup() };
        for l in 0..=2 {
            let a = orbit_cubespace(&act, &hyper, l).unwrap();
            let b = dynamical_cubespace(&act, l).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rp_examples() {
        let z6 = GroupAction::left_translation(&cyclic(6));
        assert!(rp_relation(&z6, 1, None).unwrap().is_trivial());
        // Z/4 acting on two points through the mod-2 quotient
        let z4 = cyclic(4);
        let swap = GroupAction::left_translation(&cyclic(2));
        let act = GroupAction::through(&z4, &[0, 1, 0, 1], &swap).unwrap();
        assert!(rp_relation(&act, 1, None).unwrap().is_trivial());
    }

    #[test]
    fn central_elements_are_rp_related() {
        // (x, hx) ∈ RP^1 for h in the second lower central term.
        let d4 = dihedral(4);
        let act = GroupAction::left_translation(&d4);
        let rp = rp_relation(&act, 1, None).unwrap();
        for x in d4.elements() {
            assert!(rp.related(x, act.act(2, x)));
        }
    }
}
