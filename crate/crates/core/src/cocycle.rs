//! Functions into finite abelian groups, their derivatives, cocycles,
//! discrepancy, the functional equation ρ = ∂^ℓ f + ρ̃∘φ, straight sections
//! and straight classes.

use std::collections::{HashMap, HashSet, VecDeque};

use rustc_hash::FxHashMap;

use serde::{Deserialize, Serialize};

use crate::cube::{sign, vertex_count, Configuration, PointId};
use crate::cubespace::FiniteCubespace;
use crate::error::{Error, Result};
use crate::factors::{quotient_cubespace, structure_group, StructureGroupResult};
use crate::fibrations::{check_fibration, classify, shadow, universal_factor, Classification, CubespaceMap, FibrationKind};
use crate::group::{find_isomorphism, Elem, FiniteAbelianGroup};
use crate::guard;
use crate::linalg::{gcd, smith_mod};
use crate::relation::EquivRelation;
use crate::verdict::{Verdict, Witness};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupValuedFunction {
    pub group: FiniteAbelianGroup,
    pub values: Vec<Elem>,
}

impl GroupValuedFunction {
    pub fn new(group: FiniteAbelianGroup, values: Vec<Elem>) -> Result<Self> {
        if values.iter().any(|&a| a as usize >= group.order()) {
            return Err(Error::InvalidInput("function value outside the group".into()));
        }
        Ok(GroupValuedFunction { group, values })
    }

    pub fn zero(group: &FiniteAbelianGroup, points: usize) -> Self {
        GroupValuedFunction { group: group.clone(), values: vec![group.zero(); points] }
    }

    pub fn get(&self, x: PointId) -> Elem {
        self.values[x as usize]
    }

    pub fn sub(&self, other: &GroupValuedFunction) -> GroupValuedFunction {
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| self.group.sub(a, b)).collect();
        GroupValuedFunction { group: self.group.clone(), values }
    }
}

/// A function on C^ℓ(X), values listed in the order of the cube set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cocycle {
    pub level: usize,
    pub group: FiniteAbelianGroup,
    pub values: Vec<Elem>,
}

impl Cocycle {
    pub fn new(x: &FiniteCubespace, level: usize, group: FiniteAbelianGroup, values: Vec<Elem>) -> Result<Self> {
        if level > x.lmax() {
            return Err(Error::InvalidInput(format!("level {level} above ℓmax {}", x.lmax())));
        }
        if values.len() as u64 != x.cubes(level).len() {
            return Err(Error::DimensionMismatch { expected: x.cubes(level).len() as usize, found: values.len() });
        }
        if values.iter().any(|&a| a as usize >= group.order()) {
            return Err(Error::InvalidInput("cocycle value outside the group".into()));
        }
        Ok(Cocycle { level, group, values })
    }

    pub fn from_fn(
        x: &FiniteCubespace,
        level: usize,
        group: &FiniteAbelianGroup,
        mut f: impl FnMut(&[PointId]) -> Elem,
    ) -> Result<Self> {
        guard::check(x.cubes(level).len() as u128)?;
        let codec = x.codec(level);
        let mut vals = vec![0; vertex_count(level)];
        let values = x
            .cubes(level)
            .iter()
            .map(|c| {
                codec.decode_into(c, &mut vals);
                f(&vals)
            })
            .collect();
        Cocycle::new(x, level, group.clone(), values)
    }

    /// Value on the cube with this code.
    pub fn get(&self, x: &FiniteCubespace, code: u64) -> Option<Elem> {
        x.cubes(self.level).position(code).map(|i| self.values[i])
    }
}

/// Σ_ω (−1)^{|ω|} vals[ω]
pub fn alternating_sum(a: &FiniteAbelianGroup, vals: &[Elem]) -> Elem {
    vals.iter()
        .enumerate()
        .fold(a.zero(), |acc, (w, &v)| if sign(w) > 0 { a.add(acc, v) } else { a.sub(acc, v) })
}

/// ∂^ℓ f(c) = Σ_ω (−1)^{|ω|} f(c(ω)).
pub fn derivative(x: &FiniteCubespace, f: &GroupValuedFunction, l: usize) -> Result<Cocycle> {
    if f.values.len() != x.points() {
        return Err(Error::DimensionMismatch { expected: x.points(), found: f.values.len() });
    }
    let mut buf = vec![0; vertex_count(l)];
    Cocycle::from_fn(x, l, &f.group, |c| {
        for (b, &p) in buf.iter_mut().zip(c) {
            *b = f.values[p as usize];
        }
        alternating_sum(&f.group, &buf)
    })
}

/// Additivity ρ([c₁,c₃]) = ρ([c₁,c₂]) + ρ([c₂,c₃]) along every axis,
/// checking the degenerate and antisymmetric cases first.
pub fn is_cocycle(x: &FiniteCubespace, rho: &Cocycle) -> Result<Verdict> {
    let l = rho.level;
    if l == 0 {
        return Ok(Verdict::Pass);
    }
    let a = &rho.group;
    let codec = x.codec(l);
    let half = x.codec(l - 1);
    let nv = vertex_count(l);
    let mut vals = vec![0; nv];
    let (mut lo, mut hi) = (vec![0; nv / 2], vec![0; nv / 2]);
    for axis in 0..l {
        // (c₀, c₁, ρ([c₀, c₁])) sorted, with the range of each c₀
        let mut pairs: Vec<(u64, u64, Elem)> = Vec::with_capacity(x.cubes(l).len() as usize);
        for (k, code) in x.cubes(l).iter().enumerate() {
            codec.decode_into(code, &mut vals);
            let (mut i0, mut i1) = (0, 0);
            for (w, &v) in vals.iter().enumerate() {
                if (w >> axis) & 1 == 0 {
                    lo[i0] = v;
                    i0 += 1;
                } else {
                    hi[i1] = v;
                    i1 += 1;
                }
            }
            pairs.push((half.encode(&lo), half.encode(&hi), rho.values[k]));
        }
        pairs.sort_unstable();
        let mut ranges: FxHashMap<u64, (usize, usize)> = FxHashMap::default();
        let mut i = 0;
        while i < pairs.len() {
            let j = i + pairs[i..].iter().take_while(|p| p.0 == pairs[i].0).count();
            ranges.insert(pairs[i].0, (i, j));
            i = j;
        }
        let row = |c: u64| ranges.get(&c).map_or(&pairs[..0], |&(i, j)| &pairs[i..j]);
        let get = |c0: u64, c1: u64| {
            let r = row(c0);
            r.binary_search_by(|p| p.1.cmp(&c1)).ok().map(|k| r[k].2)
        };
        let witness = |c1: u64, c2: u64, c3: u64| {
            Verdict::Fail(Witness::Cocycle {
                axis,
                first: half.configuration(c1),
                second: half.configuration(c2),
                third: half.configuration(c3),
            })
        };
        for &(c0, c1, v) in &pairs {
            if c0 == c1 && v != a.zero() {
                return Ok(witness(c0, c0, c0));
            }
        }
        for &(c0, c1, u) in &pairs {
            if let Some(v) = get(c1, c0) {
                if a.add(u, v) != a.zero() {
                    return Ok(witness(c0, c1, c0));
                }
            }
        }
        for &(c1, c2, r12) in &pairs {
            let first = row(c1);
            let mut k = 0;
            for &(_, c3, r23) in row(c2) {
                // both rows are sorted by their second entry
                while k < first.len() && first[k].1 < c3 {
                    k += 1;
                }
                if k < first.len() && first[k].1 == c3 && first[k].2 != a.add(r12, r23) {
                    return Ok(witness(c1, c2, c3));
                }
            }
        }
    }
    Ok(Verdict::Pass)
}

impl Witness {
    /// Whether an additivity witness still fails for `rho` on `x`.
    pub fn replays_on_cocycle(&self, x: &FiniteCubespace, rho: &Cocycle) -> bool {
        let Witness::Cocycle { axis, first, second, third } = self else {
            return false;
        };
        let val = |p: &Configuration, q: &Configuration| {
            Configuration::concatenate(p, q, *axis)
                .ok()
                .and_then(|c| x.codec(rho.level).encode_config(&c).ok())
                .and_then(|code| rho.get(x, code))
        };
        match (val(first, second), val(second, third), val(first, third)) {
            (Some(a), Some(b), Some(c)) => c != rho.group.add(a, b),
            _ => false,
        }
    }
}

/// (f.c)(ω) = f(ω).c(ω) for the structure group action.
pub fn shift(top: &StructureGroupResult, f: &[Elem], c: &[PointId]) -> Vec<PointId> {
    c.iter().zip(f).map(|(&p, &a)| top.act(a, p)).collect()
}

/// The unique a with [a]_0.c a cube, for c of dimension s+1 over a cube of
/// π_{s−1}(X). No such a means the base is not a cube.
pub fn discrepancy(x: &FiniteCubespace, top: &StructureGroupResult, c: &[PointId]) -> Result<Elem> {
    let l = top.degree + 1;
    if c.len() != vertex_count(l) {
        return Err(Error::DimensionMismatch { expected: vertex_count(l), found: c.len() });
    }
    let codec = x.codec(l);
    let set = x.cubes(l);
    let mut buf = c.to_vec();
    let mut found = None;
    for a in top.group.elements() {
        buf[0] = top.act(a, c[0]);
        if set.contains(codec.encode(&buf)) {
            if found.is_some() {
                return Err(Error::CheckFailed("discrepancy is not unique".into()));
            }
            found = Some(a);
        }
    }
    found.ok_or(Error::BaseNotCube)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalSolution {
    pub f: GroupValuedFunction,
    pub rho_tilde: Cocycle,
    pub rho_tilde_is_cocycle: Verdict,
    /// Generators of the homogeneous solutions, as (f part, ρ̃ part).
    pub kernel: Vec<(Vec<Elem>, Vec<Elem>)>,
    /// Number of solutions, saturating.
    pub solution_count: u128,
}

/// Equations above this count are not re-solved to extract an
/// infeasibility witness.
const WITNESS_ROWS: usize = 3000;

/// Solves ρ = ∂^ℓ f + ρ̃∘φ exactly for f: X → A and ρ̃ on C^ℓ(Y), one
/// invariant factor of A at a time.
pub fn solve_functional(phi: &CubespaceMap, rho: &Cocycle) -> Result<FunctionalSolution> {
    let x = phi.source();
    let y = phi.target();
    let l = rho.level;
    if l > y.lmax() {
        return Err(Error::InvalidInput(format!("target has no cubes of dimension {l}")));
    }
    if !is_cocycle(x, rho)?.passed() {
        return Err(Error::CheckFailed("ρ is not a cocycle".into()));
    }
    let a = &rho.group;
    let n = x.points();
    let ny = y.cubes(l).len() as usize;
    let cols = n + ny;
    guard::check(x.cubes(l).len() as u128 * cols as u128)?;
    let (xc, yc) = (x.codec(l), y.codec(l));
    let nv = vertex_count(l);

    // Sparse rows, deduplicated; each remembers the cube it came from.
    let mut rows: Vec<(Vec<(usize, i64)>, usize)> = Vec::new();
    let mut seen: FxHashMap<Vec<(usize, i64)>, usize> = FxHashMap::default();
    let mut row_of_cube = Vec::with_capacity(x.cubes(l).len() as usize);
    let mut vals = vec![0; nv];
    let mut cube_codes = Vec::new();
    let mut acc = vec![0i64; n];
    let mut touched: Vec<usize> = Vec::with_capacity(nv);
    for (k, code) in x.cubes(l).iter().enumerate() {
        xc.decode_into(code, &mut vals);
        for (w, &p) in vals.iter().enumerate() {
            let p = p as usize;
            if acc[p] == 0 && !touched.contains(&p) {
                touched.push(p);
            }
            acc[p] += sign(w);
        }
        touched.sort_unstable();
        let mut key: Vec<(usize, i64)> = Vec::with_capacity(touched.len() + 1);
        for &p in &touched {
            if acc[p] != 0 {
                key.push((p, acc[p]));
            }
            acc[p] = 0;
        }
        touched.clear();
        vals.iter_mut().for_each(|p| *p = phi.apply(*p));
        let d = y.cubes(l).position(yc.encode(&vals)).ok_or_else(|| Error::CheckFailed("φ is not a morphism".into()))?;
        key.push((n + d, 1));
        let r = match seen.get(&key) {
            Some(&r) => r,
            None => {
                seen.insert(key.clone(), rows.len());
                rows.push((key, k));
                rows.len() - 1
            }
        };
        row_of_cube.push(r);
        cube_codes.push(code);
    }

    let factors: Vec<u64> = a.factors().to_vec();
    let mut f_coords = vec![vec![0u64; factors.len()]; n];
    let mut r_coords = vec![vec![0u64; factors.len()]; ny];
    let mut kernel = Vec::new();
    let mut count: u128 = 1;
    for (i, &m) in factors.iter().enumerate() {
        let modulus = m as i128;
        // right-hand side per deduplicated row, checked for consistency
        let mut rhs = vec![None::<i128>; rows.len()];
        for (k, &r) in row_of_cube.iter().enumerate() {
            let b = a.coords(rho.values[k])[i] as i128;
            match rhs[r] {
                None => rhs[r] = Some(b),
                Some(prev) if prev != b => {
                    return Err(Error::Infeasible {
                        reason: format!("two cubes give the same equation with different values mod {m}"),
                        equations: vec![(cube_codes[rows[r].1], 1), (cube_codes[k], -1)],
                    });
                }
                _ => {}
            }
        }
        let rhs: Vec<i128> = rhs.into_iter().map(|b| b.unwrap()).collect();
        let dense: Vec<Vec<i128>> = rows
            .iter()
            .map(|(coef, _)| {
                let mut r = vec![0i128; cols];
                for &(c, v) in coef {
                    r[c] = v as i128;
                }
                r
            })
            .collect();
        let smith = smith_mod(&dense, cols, modulus, &rhs, false);
        let rank = smith.diag.len();
        let mut y_part = vec![0i128; cols];
        let mut bad = None;
        for t in 0..dense.len() {
            let b = smith.rhs[t];
            if t < rank {
                let g = gcd(smith.diag[t], modulus);
                if b % g != 0 {
                    bad = Some(t);
                    break;
                }
                let mg = modulus / g;
                y_part[t] = ((b / g) * mod_inverse(smith.diag[t] / g, mg)).rem_euclid(mg);
            } else if b != 0 {
                bad = Some(t);
                break;
            }
        }
        if let Some(t) = bad {
            let equations = if dense.len() <= WITNESS_ROWS {
                let s2 = smith_mod(&dense, cols, modulus, &rhs, true);
                let u = s2.u.unwrap();
                u[t].iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(r, &c)| (cube_codes[rows[r].1], c as i64))
                    .collect()
            } else {
                Vec::new()
            };
            return Err(Error::Infeasible { reason: format!("no solution modulo {m}"), equations });
        }
        let solution: Vec<i128> =
            (0..cols).map(|r| (0..cols).map(|t| smith.v[r][t] * y_part[t]).sum::<i128>().rem_euclid(modulus)).collect();
        for p in 0..n {
            f_coords[p][i] = solution[p] as u64;
        }
        for d in 0..ny {
            r_coords[d][i] = solution[n + d] as u64;
        }
        // homogeneous solutions
        for t in 0..cols {
            let step = if t < rank {
                let g = gcd(smith.diag[t], modulus);
                if g == 1 {
                    continue;
                }
                count = count.saturating_mul(g as u128);
                modulus / g
            } else {
                count = count.saturating_mul(modulus as u128);
                1
            };
            let gen: Vec<u64> = (0..cols).map(|r| (smith.v[r][t] * step).rem_euclid(modulus) as u64).collect();
            let lift = |v: u64| {
                let mut t = vec![0u64; factors.len()];
                t[i] = v;
                a.from_coords(&t)
            };
            kernel.push((gen[..n].iter().map(|&v| lift(v)).collect(), gen[n..].iter().map(|&v| lift(v)).collect()));
        }
    }
    let f = GroupValuedFunction::new(a.clone(), f_coords.iter().map(|t| a.from_coords(t)).collect())?;
    let rho_tilde = Cocycle::new(y, l, a.clone(), r_coords.iter().map(|t| a.from_coords(t)).collect())?;

    // ρ = ∂^ℓ f + ρ̃∘φ on every cube
    let df = derivative(x, &f, l)?;
    for (k, code) in x.cubes(l).iter().enumerate() {
        xc.decode_into(code, &mut vals);
        vals.iter_mut().for_each(|p| *p = phi.apply(*p));
        let r = rho_tilde.values[y.cubes(l).position(yc.encode(&vals)).unwrap()];
        if a.add(df.values[k], r) != rho.values[k] {
            return Err(Error::CheckFailed(format!("solution does not reproduce ρ on cube {code}")));
        }
    }
    let rho_tilde_is_cocycle = is_cocycle(y, &rho_tilde)?;
    Ok(FunctionalSolution { f, rho_tilde, rho_tilde_is_cocycle, kernel, solution_count: count })
}

fn mod_inverse(a: i128, m: i128) -> i128 {
    if m == 1 {
        return 0;
    }
    (1..m).find(|&k| (a * k).rem_euclid(m) == 1).expect("unit modulo m")
}

/// Every homogeneous solution (f part only), deduplicated.
pub fn homogeneous_f_parts(sol: &FunctionalSolution) -> Result<Vec<Vec<Elem>>> {
    let a = &sol.f.group;
    let n = sol.f.values.len();
    let start = vec![a.zero(); n];
    let mut seen: HashSet<Vec<Elem>> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(h) = queue.pop_front() {
        for (g, _) in &sol.kernel {
            let next: Vec<Elem> = h.iter().zip(g).map(|(&p, &q)| a.add(p, q)).collect();
            if seen.insert(next.clone()) {
                guard::check(seen.len() as u128)?;
                queue.push_back(next);
            }
        }
    }
    let mut out: Vec<Vec<Elem>> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

/// Whether any two solutions differ by a function constant on the fibers
/// of φ. Fails with two points of one fiber where some difference varies.
pub fn uniqueness_clause(phi: &CubespaceMap, sol: &FunctionalSolution) -> Result<Verdict> {
    let fibers = phi.fibers();
    for h in homogeneous_f_parts(sol)? {
        for class in fibers.classes() {
            if let Some(&q) = class.iter().find(|&&q| h[q as usize] != h[class[0] as usize]) {
                return Ok(Verdict::Fail(Witness::Points {
                    first: class[0],
                    second: q,
                    reason: "two solutions differ by a function that varies on this fiber".into(),
                }));
            }
        }
    }
    Ok(Verdict::Pass)
}

/// Setting for sections: X of degree s, its top structure group, and a
/// fibration ψ from π(X) = π_{s−1}(X) onto a nilspace B₂.
pub struct SectionSetting<'a> {
    pub x: &'a FiniteCubespace,
    pub top: &'a StructureGroupResult,
    pub psi: &'a CubespaceMap,
    /// π(X), built from the fibers of the structure group.
    pub base: FiniteCubespace,
}

impl<'a> SectionSetting<'a> {
    pub fn new(x: &'a FiniteCubespace, top: &'a StructureGroupResult, psi: &'a CubespaceMap) -> Result<Self> {
        if top.degree == 0 || top.degree + 1 > x.lmax() {
            return Err(Error::InvalidInput("sections need a structure group of degree s ≥ 1 with ℓmax ≥ s+1".into()));
        }
        let (base, _) = quotient_cubespace(x, &top.fibers)?;
        if psi.source() != &base {
            return Err(Error::InvalidInput("ψ must start at π(X)".into()));
        }
        Ok(SectionSetting { x, top, psi, base })
    }

    pub fn level(&self) -> usize {
        self.top.degree + 1
    }

    fn pi(&self, p: PointId) -> PointId {
        self.top.fibers.class_of(p)
    }

    /// The least point of each π-fiber.
    pub fn least_section(&self) -> Vec<PointId> {
        self.top.fibers.classes().iter().map(|c| c[0]).collect()
    }

    /// ρ(c) = D(σ∘c) on C^{s+1}(π(X)).
    pub fn discrepancy_cocycle(&self, sigma: &[PointId]) -> Result<Cocycle> {
        let mut buf = vec![0; vertex_count(self.level())];
        let mut err = None;
        let c = Cocycle::from_fn(&self.base, self.level(), &self.top.group, |c| {
            for (b, &p) in buf.iter_mut().zip(c) {
                *b = sigma[p as usize];
            }
            discrepancy(self.x, self.top, &buf).unwrap_or_else(|e| {
                err.get_or_insert(e);
                0
            })
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(c),
        }
    }

    /// D(σ(c₁)) = D(σ(c₂)) whenever ψ(c₁) = ψ(c₂).
    pub fn is_straight(&self, sigma: &[PointId]) -> Result<Verdict> {
        for (b, &p) in sigma.iter().enumerate() {
            if self.pi(p) as usize != b {
                return Ok(Verdict::Fail(Witness::Points {
                    first: b as PointId,
                    second: p,
                    reason: "not a section of π".into(),
                }));
            }
        }
        let rho = self.discrepancy_cocycle(sigma)?;
        let l = self.level();
        let (bc, tc) = (self.base.codec(l), self.psi.target().codec(l));
        let mut seen: HashMap<u64, (u64, Elem)> = HashMap::new();
        let mut vals = vec![0; vertex_count(l)];
        for (k, code) in self.base.cubes(l).iter().enumerate() {
            bc.decode_into(code, &mut vals);
            vals.iter_mut().for_each(|p| *p = self.psi.apply(*p));
            let key = tc.encode(&vals);
            match seen.get(&key) {
                None => {
                    seen.insert(key, (code, rho.values[k]));
                }
                Some(&(other, d)) if d != rho.values[k] => {
                    return Ok(Verdict::Fail(Witness::ConfigurationPair {
                        first: bc.configuration(other),
                        second: bc.configuration(code),
                        reason: "same image under ψ, different discrepancy".into(),
                    }));
                }
                _ => {}
            }
        }
        Ok(Verdict::Pass)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Straightening {
    pub initial: Vec<PointId>,
    pub rho: Cocycle,
    pub rho_is_cocycle: Verdict,
    pub correction: GroupValuedFunction,
    /// σ(b) = f(b).σ₀(b)
    pub section: Vec<PointId>,
    pub straight: Verdict,
}

/// Corrects σ₀ (by default the least point of each fiber) to a straight
/// section by solving ρ = ∂^{s+1} f + ρ̃∘ψ for ρ = D(σ₀(·)).
pub fn straighten_section(setting: &SectionSetting, sigma0: Option<&[PointId]>) -> Result<Straightening> {
    let initial = sigma0.map(|s| s.to_vec()).unwrap_or_else(|| setting.least_section());
    if initial.len() != setting.base.points() {
        return Err(Error::DimensionMismatch { expected: setting.base.points(), found: initial.len() });
    }
    let rho = setting.discrepancy_cocycle(&initial)?;
    let rho_is_cocycle = is_cocycle(&setting.base, &rho)?;
    let sol = solve_functional(setting.psi, &rho)?;
    let section: Vec<PointId> =
        initial.iter().enumerate().map(|(b, &p)| setting.top.act(sol.f.values[b], p)).collect();
    let straight = setting.is_straight(&section)?;
    Ok(Straightening { initial, rho, rho_is_cocycle, correction: sol.f, section, straight })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StraightClass {
    /// The point of B₂ below the class.
    pub base: PointId,
    pub points: Vec<PointId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StraightClasses {
    pub classes: Vec<StraightClass>,
    /// Every point lies in exactly one class.
    pub partition: Verdict,
    /// Classes grouped into orbits under the structure group.
    pub families: Vec<Vec<usize>>,
    /// Each family covers every point once.
    pub families_partition: bool,
}

/// Exactly one point per π-fiber over ψ^{-1}(b'), and an (s+1)-config into
/// the set is a cube iff its π-image is.
pub fn is_straight_class(setting: &SectionSetting, points: &[PointId]) -> Verdict {
    let bases: Vec<PointId> = points.iter().map(|&p| setting.pi(p)).collect();
    let mut sorted = bases.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let b2 = setting.psi.apply(bases[0]);
    let fiber: Vec<PointId> = (0..setting.base.points() as PointId).filter(|&b| setting.psi.apply(b) == b2).collect();
    if sorted.len() != points.len() || sorted != fiber {
        return Verdict::Fail(Witness::Message { reason: "not one point per π-fiber over a ψ-fiber".into() });
    }
    match cube_criterion(setting, points, None) {
        Some((c, _)) => Verdict::Fail(Witness::MissingConfiguration { configuration: c }),
        None => Verdict::Pass,
    }
}

/// First configuration into `points` (using `must_use` if given) whose
/// π-image is a cube but which is not itself a cube.
fn cube_criterion(setting: &SectionSetting, points: &[PointId], must_use: Option<PointId>) -> Option<(Configuration, ())> {
    let l = setting.level();
    let nv = vertex_count(l);
    let (xc, bc) = (setting.x.codec(l), setting.base.codec(l));
    let (xs, bs) = (setting.x.cubes(l), setting.base.cubes(l));
    let k = points.len();
    let mut idx = vec![0usize; nv];
    let mut c = vec![0; nv];
    let mut b = vec![0; nv];
    loop {
        for w in 0..nv {
            c[w] = points[idx[w]];
            b[w] = setting.pi(c[w]);
        }
        if must_use.is_none_or(|p| c.contains(&p)) && bs.contains(bc.encode(&b)) && !xs.contains(xc.encode(&c)) {
            return Some((Configuration::new(l, c).unwrap(), ()));
        }
        let mut w = 0;
        while w < nv {
            idx[w] += 1;
            if idx[w] < k {
                break;
            }
            idx[w] = 0;
            w += 1;
        }
        if w == nv {
            return None;
        }
    }
}

/// All straight ψ-classes, by a transversal search pruned with the cube
/// criterion on partial transversals.
pub fn straight_classes(setting: &SectionSetting) -> Result<StraightClasses> {
    let nb2 = setting.psi.target().points();
    let fibers = setting.top.fibers.classes();
    let mut classes = Vec::new();
    for b2 in 0..nb2 as PointId {
        let over: Vec<PointId> = (0..setting.base.points() as PointId).filter(|&b| setting.psi.apply(b) == b2).collect();
        let count: u128 = over.iter().map(|&b| fibers[b as usize].len() as u128).product();
        guard::check(count)?;
        let mut chosen = Vec::with_capacity(over.len());
        fn rec(
            setting: &SectionSetting,
            over: &[PointId],
            fibers: &[Vec<PointId>],
            chosen: &mut Vec<PointId>,
            b2: PointId,
            out: &mut Vec<StraightClass>,
        ) {
            if chosen.len() == over.len() {
                let mut points = chosen.clone();
                points.sort_unstable();
                out.push(StraightClass { base: b2, points });
                return;
            }
            for &p in &fibers[over[chosen.len()] as usize] {
                chosen.push(p);
                if cube_criterion(setting, chosen, Some(p)).is_none() {
                    rec(setting, over, fibers, chosen, b2, out);
                }
                chosen.pop();
            }
        }
        rec(setting, &over, fibers, &mut chosen, b2, &mut classes);
    }
    let n = setting.x.points();
    let mut hits = vec![0usize; n];
    for c in &classes {
        for &p in &c.points {
            hits[p as usize] += 1;
        }
    }
    let partition = match hits.iter().position(|&h| h != 1) {
        None => Verdict::Pass,
        Some(p) => Verdict::Fail(Witness::Points {
            first: p as PointId,
            second: p as PointId,
            reason: format!("point lies in {} straight classes", hits[p]),
        }),
    };
    // orbits of the structure group on classes
    let index: HashMap<Vec<PointId>, usize> = classes.iter().enumerate().map(|(i, c)| (c.points.clone(), i)).collect();
    let mut family_of = vec![usize::MAX; classes.len()];
    let mut families: Vec<Vec<usize>> = Vec::new();
    for i in 0..classes.len() {
        if family_of[i] != usize::MAX {
            continue;
        }
        let mut fam = Vec::new();
        for a in setting.top.group.elements() {
            let mut moved: Vec<PointId> = classes[i].points.iter().map(|&p| setting.top.act(a, p)).collect();
            moved.sort_unstable();
            let j = *index
                .get(&moved)
                .ok_or_else(|| Error::CheckFailed("a translate of a straight class is not straight".into()))?;
            if family_of[j] == usize::MAX {
                family_of[j] = families.len();
                fam.push(j);
            }
        }
        fam.sort_unstable();
        families.push(fam);
    }
    let families_partition = families
        .iter()
        .all(|fam| fam.iter().map(|&i| classes[i].points.len()).sum::<usize>() == n && covered(&classes, fam, n) == n);
    Ok(StraightClasses { classes, partition, families, families_partition })
}

fn covered(classes: &[StraightClass], fam: &[usize], n: usize) -> usize {
    let mut hit = vec![false; n];
    let mut total = 0;
    for &i in fam {
        for &p in &classes[i].points {
            if !std::mem::replace(&mut hit[p as usize], true) {
                total += 1;
            }
        }
    }
    total
}

/// The classes a.σ(ψ^{-1}(b')) for a straight section σ.
pub fn section_classes(setting: &SectionSetting, section: &[PointId]) -> Vec<Vec<PointId>> {
    let mut out: Vec<Vec<PointId>> = Vec::new();
    for b2 in 0..setting.psi.target().points() as PointId {
        let over: Vec<PointId> = (0..setting.base.points() as PointId).filter(|&b| setting.psi.apply(b) == b2).collect();
        for a in setting.top.group.elements() {
            let mut pts: Vec<PointId> = over.iter().map(|&b| setting.top.act(a, section[b as usize])).collect();
            pts.sort_unstable();
            if !out.contains(&pts) {
                out.push(pts);
            }
        }
    }
    out.sort();
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StraightQuotient {
    pub space: FiniteCubespace,
    pub map: CubespaceMap,
    pub fibration: Verdict,
    pub classification: Classification,
    /// The shadow of the quotient map is ψ, up to an isomorphism
    /// π(Y) ≅ B₂.
    pub shadow_matches: Verdict,
    /// The top structure groups of X and Y are isomorphic.
    pub same_structure_group: bool,
}

/// X modulo a partition into straight classes.
pub fn quotient_by_straight_classes(setting: &SectionSetting, classes: &[Vec<PointId>]) -> Result<StraightQuotient> {
    let n = setting.x.points();
    let mut label = vec![u32::MAX; n];
    for (i, c) in classes.iter().enumerate() {
        if !is_straight_class(setting, c).passed() {
            return Err(Error::NotPartition(format!("class {i} is not a straight class")));
        }
        for &p in c {
            if label[p as usize] != u32::MAX {
                return Err(Error::NotPartition(format!("point {p} lies in two classes")));
            }
            label[p as usize] = i as u32;
        }
    }
    if let Some(p) = label.iter().position(|&l| l == u32::MAX) {
        return Err(Error::NotPartition(format!("point {p} is in no class")));
    }
    let s = setting.top.degree;
    let (space, map) = quotient_cubespace(setting.x, &EquivRelation::from_labels(&label))?;
    let fibration = check_fibration(&map, setting.x.lmax())?;
    let classification = classify(&map, s)?;
    let sh = shadow(&map, s)?;
    // ι: π(Y) → B₂ with ι∘shadow = ψ, bijective and cube-preserving both ways
    let shadow_matches = {
        let mut iota = vec![u32::MAX; sh.map.target().points()];
        let mut ok = true;
        for b in 0..setting.base.points() as PointId {
            // the shadow's source is π(X) computed afresh; points agree
            // because both number fibers by least member
            let (u, v) = (sh.map.apply(b), setting.psi.apply(b));
            if iota[u as usize] == u32::MAX {
                iota[u as usize] = v;
            } else if iota[u as usize] != v {
                ok = false;
            }
        }
        if !ok || iota.contains(&u32::MAX) {
            Verdict::Fail(Witness::Message { reason: "shadow does not factor through ψ".into() })
        } else {
            let fwd = CubespaceMap::new(sh.map.target().clone(), setting.psi.target().clone(), iota.clone())?;
            let mut inv = vec![0; iota.len()];
            for (u, &v) in iota.iter().enumerate() {
                inv[v as usize] = u as PointId;
            }
            if !fwd.is_bijective() {
                Verdict::Fail(Witness::Message { reason: "π(Y) and B₂ have different sizes".into() })
            } else {
                let back = CubespaceMap::new(setting.psi.target().clone(), sh.map.target().clone(), inv)?;
                let m1 = crate::fibrations::check_morphism(&fwd);
                let m2 = crate::fibrations::check_morphism(&back);
                if m1.passed() && m2.passed() {
                    Verdict::Pass
                } else {
                    Verdict::Fail(Witness::Message { reason: "π(Y) → B₂ is not an isomorphism".into() })
                }
            }
        }
    };
    let same_structure_group = match structure_group(&space, s) {
        Ok(ay) => find_isomorphism(ay.group.group(), setting.top.group.group()).is_some(),
        Err(_) => false,
    };
    Ok(StraightQuotient { space, map, fibration, classification, shadow_matches, same_structure_group })
}

/// The fibers of the straight quotient partition those of ψ∘π: returns
/// the factoring map from the quotient to B₂.
pub fn quotient_refines_base(setting: &SectionSetting, q: &StraightQuotient) -> Result<CubespaceMap> {
    let proj: Vec<PointId> = (0..setting.x.points() as PointId).map(|p| setting.psi.apply(setting.pi(p))).collect();
    let down = CubespaceMap::new(setting.x.clone(), setting.psi.target().clone(), proj)?;
    universal_factor(&q.map, &down)
}

/// Whether `kind` is horizontal in the sense used by the straight quotient.
pub fn is_horizontal(kind: FibrationKind) -> bool {
    matches!(kind, FibrationKind::Horizontal | FibrationKind::Both)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{hk_nilspace, standard_nilspace};
    use crate::group::catalog::cyclic;
    use crate::group::validate_filtration;
    use rand::{Rng, SeedableRng};

    fn d(n: usize, s: usize, lmax: usize) -> FiniteCubespace {
        standard_nilspace(&FiniteAbelianGroup::cyclic(n), s, lmax).unwrap()
    }

    fn hk_z4_deg2(lmax: usize) -> FiniteCubespace {
        let z4 = cyclic(4);
        let f = validate_filtration(&z4, &[vec![0, 1, 2, 3], vec![0, 1, 2, 3], vec![0, 2], vec![0]]).unwrap();
        hk_nilspace(&z4, &f, &z4.trivial_subgroup(), lmax).unwrap().space
    }

    fn to_point(x: &FiniteCubespace) -> CubespaceMap {
        CubespaceMap::constant(x, &FiniteCubespace::full(1, x.lmax()).unwrap(), 0).unwrap()
    }

    #[test]
    fn derivative_examples() {
        let x = d(2, 1, 2);
        let z2 = FiniteAbelianGroup::cyclic(2);
        let id = GroupValuedFunction::new(z2.clone(), vec![0, 1]).unwrap();
        let d2 = derivative(&x, &id, 2).unwrap();
        assert!(d2.values.iter().all(|&v| v == 0));
        let d1 = derivative(&x, &id, 1).unwrap();
        let codec = x.codec(1);
        assert_eq!(d1.get(&x, codec.encode(&[0, 1])), Some(1));
        let constant = GroupValuedFunction::new(z2, vec![1, 1]).unwrap();
        assert!(derivative(&x, &constant, 2).unwrap().values.iter().all(|&v| v == 0));
        assert!(is_cocycle(&x, &d1).unwrap().passed());
    }

    #[test]
    fn constant_one_is_not_a_cocycle() {
        let x = d(2, 1, 2);
        let rho = Cocycle::new(&x, 2, FiniteAbelianGroup::cyclic(2), vec![1; 8]).unwrap();
        let v = is_cocycle(&x, &rho).unwrap();
        let w = v.witness().unwrap();
        assert!(w.replays_on_cocycle(&x, &rho));
    }

    #[test]
    fn discrepancy_example() {
        let x = d(2, 1, 2);
        let top = structure_group(&x, 1).unwrap();
        // [a]_0.(0,0,0,1) is a cube iff a − 0 − 0 + 1 = 0
        let a = discrepancy(&x, &top, &[0, 0, 0, 1]).unwrap();
        assert_eq!(top.act(a, 0), 1);
        assert_eq!(discrepancy(&x, &top, &[0, 1, 1, 0]).unwrap(), top.group.zero());
    }

    #[test]
    fn discrepancy_identity_on_d1z4() {
        let x = d(4, 1, 2);
        let top = structure_group(&x, 1).unwrap();
        let a = &top.group;
        let els: Vec<Elem> = a.elements().collect();
        for c in 0..256u32 {
            let cfg: Vec<PointId> = (0..4).map(|w| (c >> (2 * w)) & 3).collect();
            let dc = discrepancy(&x, &top, &cfg).unwrap();
            for fcode in 0..256u32 {
                let f: Vec<Elem> = (0..4).map(|w| els[((fcode >> (2 * w)) & 3) as usize]).collect();
                let lhs = discrepancy(&x, &top, &shift(&top, &f, &cfg)).unwrap();
                assert_eq!(lhs, a.sub(dc, alternating_sum(a, &f)));
            }
        }
    }

    #[test]
    fn solver_round_trip_to_point() {
        let x = hk_z4_deg2(3);
        let phi = to_point(&x);
        let a = FiniteAbelianGroup::product(&[2, 4]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let g = GroupValuedFunction::new(a.clone(), (0..4).map(|_| rng.gen_range(0..8)).collect()).unwrap();
            let rho = derivative(&x, &g, 3).unwrap();
            let sol = solve_functional(&phi, &rho).unwrap();
            let df = derivative(&x, &sol.f, 3).unwrap();
            for k in 0..rho.values.len() {
                assert_eq!(a.add(df.values[k], sol.rho_tilde.values[0]), rho.values[k]);
            }
            assert!(sol.rho_tilde_is_cocycle.passed());
        }
    }

    #[test]
    fn zero_cocycle_has_zero_solution() {
        let x = d(3, 1, 2);
        let a = FiniteAbelianGroup::cyclic(3);
        let rho = Cocycle::new(&x, 2, a.clone(), vec![0; x.cubes(2).len() as usize]).unwrap();
        let sol = solve_functional(&to_point(&x), &rho).unwrap();
        assert!(sol.f.values.iter().all(|&v| v == 0));
        assert!(sol.solution_count > 1);
    }

    #[test]
    fn extension_cocycle_is_infeasible() {
        // ρ = h·k on 2-cubes (a, a+h, a+k, a+h+k) of D_1(Z/2): additive, but
        // every f: Z/2 → Z/2 is affine so ∂²f = 0 and ρ is not constant
        let x = d(2, 1, 2);
        let a = FiniteAbelianGroup::cyclic(2);
        let rho = Cocycle::from_fn(&x, 2, &a, |c| (c[1] ^ c[0]) & (c[2] ^ c[0])).unwrap();
        assert!(is_cocycle(&x, &rho).unwrap().passed());
        match solve_functional(&to_point(&x), &rho) {
            Err(Error::Infeasible { equations, .. }) => {
                assert!(!equations.is_empty());
                for (code, _) in equations {
                    assert!(x.cubes(2).contains(code));
                }
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
        // over Z/4 the same values are ∂²f for f(x) = x(x−1)/2
        let y = d(4, 1, 2);
        let rho4 = Cocycle::from_fn(&y, 2, &a, |c| {
            let (h, k) = ((c[1] + 4 - c[0]) % 4, (c[2] + 4 - c[0]) % 4);
            h * k % 2
        })
        .unwrap();
        assert!(solve_functional(&to_point(&y), &rho4).is_ok());
    }

    #[test]
    fn uniqueness_without_smallness_fails_at_level_two() {
        let x = d(2, 1, 2);
        let a = FiniteAbelianGroup::cyclic(2);
        let rho = Cocycle::new(&x, 2, a, vec![0; 8]).unwrap();
        let phi = to_point(&x);
        let sol = solve_functional(&phi, &rho).unwrap();
        // h = identity has ∂²h = 0 and is not constant
        assert!(!uniqueness_clause(&phi, &sol).unwrap().passed());
        // at level 1 every solution of the homogeneous system is constant
        let rho1 = Cocycle::new(&x, 1, FiniteAbelianGroup::cyclic(2), vec![0; 4]).unwrap();
        let sol1 = solve_functional(&phi, &rho1).unwrap();
        assert!(uniqueness_clause(&phi, &sol1).unwrap().passed());
    }

    fn hk_setting_parts() -> (FiniteCubespace, StructureGroupResult, CubespaceMap) {
        let x = hk_z4_deg2(3);
        let top = structure_group(&x, 2).unwrap();
        let (base, _) = quotient_cubespace(&x, &top.fibers).unwrap();
        let psi = to_point(&base);
        (x, top, psi)
    }

    #[test]
    fn straightening_pipeline_on_hk_z4() {
        let (x, top, psi) = hk_setting_parts();
        let setting = SectionSetting::new(&x, &top, &psi).unwrap();
        // bend the least section by moving one fiber point
        let bent = vec![0, 3];
        let st = straighten_section(&setting, Some(&bent)).unwrap();
        assert!(st.rho_is_cocycle.passed());
        assert!(st.straight.passed());
        let classes = section_classes(&setting, &st.section);
        assert_eq!(classes.len(), 2);
        for c in &classes {
            assert!(is_straight_class(&setting, c).passed());
        }
        let q = quotient_by_straight_classes(&setting, &classes).unwrap();
        assert_eq!(q.space.points(), 2);
        assert!(q.fibration.passed());
        assert!(is_horizontal(q.classification.kind));
        assert!(q.shadow_matches.passed());
        assert!(q.same_structure_group);
        assert!(quotient_refines_base(&setting, &q).is_ok());
    }

    #[test]
    fn straight_classes_on_hk_z4_overlap() {
        let (x, top, psi) = hk_setting_parts();
        let setting = SectionSetting::new(&x, &top, &psi).unwrap();
        let sc = straight_classes(&setting).unwrap();
        let sets: Vec<&Vec<PointId>> = sc.classes.iter().map(|c| &c.points).collect();
        assert_eq!(sets, vec![&vec![0, 1], &vec![0, 3], &vec![1, 2], &vec![2, 3]]);
        assert!(!sc.partition.passed());
        assert_eq!(sc.families, vec![vec![0, 3], vec![1, 2]]);
        assert!(sc.families_partition);
    }

    #[test]
    fn identity_psi_classes_are_points() {
        let x = d(2, 2, 3);
        let top = structure_group(&x, 2).unwrap();
        let (base, _) = quotient_cubespace(&x, &top.fibers).unwrap();
        let psi = CubespaceMap::identity(&base);
        let setting = SectionSetting::new(&x, &top, &psi).unwrap();
        let sc = straight_classes(&setting).unwrap();
        assert_eq!(sc.classes.len(), 2);
        assert!(sc.partition.passed());
        assert!(straighten_section(&setting, None).unwrap().straight.passed());
    }
}
