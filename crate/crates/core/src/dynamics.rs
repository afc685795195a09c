//! Finite dynamical systems: dynamical cubespaces, RP^s quotients, descent
//! of actions through fibrations and maximality of the RP^s factor.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::constructions::{dynamical_cubespace, rp_relation, GroupAction};
use crate::cube::PointId;
use crate::cubespace::{check_ergodic, nilspace_degree, FiniteCubespace};
use crate::error::{Error, Result};
use crate::factors::quotient_cubespace;
use crate::fibrations::CubespaceMap;
use crate::group::Elem;
use crate::relation::EquivRelation;
use crate::translations::{is_translation, push_translation, Translation};
use crate::verdict::{Verdict, Witness};

/// A group action with its dynamical cubespace, built on first use.
#[derive(Debug, Serialize, Deserialize)]
pub struct DynamicalSystem {
    action: GroupAction,
    lmax: usize,
    #[serde(skip)]
    cubes: OnceLock<FiniteCubespace>,
}

impl Clone for DynamicalSystem {
    fn clone(&self) -> Self {
        DynamicalSystem { action: self.action.clone(), lmax: self.lmax, cubes: self.cubes.clone() }
    }
}

impl DynamicalSystem {
    pub fn new(action: GroupAction, lmax: usize) -> Self {
        DynamicalSystem { action, lmax, cubes: OnceLock::new() }
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// Finite minimality: the action is transitive.
    pub fn is_minimal(&self) -> bool {
        self.action.is_transitive()
    }

    pub fn cubespace(&self) -> Result<&FiniteCubespace> {
        if let Some(c) = self.cubes.get() {
            return Ok(c);
        }
        let built = dynamical_cubespace(&self.action, self.lmax)?;
        Ok(self.cubes.get_or_init(|| built))
    }

    /// The restriction to each orbit, with the original point numbers.
    pub fn components(&self) -> Result<Vec<(Vec<PointId>, DynamicalSystem)>> {
        let orbits = self.action.orbits();
        let g = self.action.group();
        let mut out = Vec::new();
        for class in orbits.classes() {
            let mut local = vec![u32::MAX; self.action.points()];
            for (k, &p) in class.iter().enumerate() {
                local[p as usize] = k as PointId;
            }
            let mut table = Vec::with_capacity(g.order() * class.len());
            for h in g.elements() {
                table.extend(class.iter().map(|&p| local[self.action.act(h, p) as usize]));
            }
            let action = GroupAction::new(g.clone(), class.len(), table)?;
            out.push((class.clone(), DynamicalSystem::new(action, self.lmax)));
        }
        Ok(out)
    }
}

/// The action of H on X/R for an H-invariant relation R.
pub fn quotient_action(action: &GroupAction, r: &EquivRelation) -> Result<GroupAction> {
    let m = r.num_classes();
    let mut table = Vec::with_capacity(action.group().order() * m);
    for h in action.group().elements() {
        for class in r.classes() {
            let img = r.class_of(action.act(h, class[0]));
            if class.iter().any(|&p| r.class_of(action.act(h, p)) != img) {
                return Err(Error::NotEquivariant(format!("element {h} does not preserve the relation")));
            }
            table.push(img);
        }
    }
    GroupAction::new(action.group().clone(), m, table)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RpQuotient {
    pub s: usize,
    pub relation: EquivRelation,
    pub space: FiniteCubespace,
    pub map: CubespaceMap,
    pub action: GroupAction,
    pub degree: Option<usize>,
    pub degree_at_most_s: Verdict,
    pub ergodic: Verdict,
    /// Every h acts on the quotient as a 1-translation.
    pub translations: Verdict,
}

/// X/RP^s with the cubes of C_H(X) pushed down, checked to be an ergodic
/// nilspace of degree at most s on which H acts by 1-translations.
pub fn rp_quotient(sys: &DynamicalSystem, s: usize) -> Result<RpQuotient> {
    if !sys.is_minimal() {
        return Err(Error::NotMinimal { orbits: sys.action.orbits().num_classes() });
    }
    if sys.lmax < s + 1 {
        return Err(Error::InvalidInput(format!("RP^{s} needs cubes of dimension {}", s + 1)));
    }
    let x = sys.cubespace()?;
    let relation = rp_relation(&sys.action, s, Some(x.cubes(s + 1)))?;
    let (space, map) = quotient_cubespace(x, &relation)?;
    let action = quotient_action(&sys.action, &relation)?;
    let degree = nilspace_degree(&space)?.degree();
    let degree_at_most_s = match degree {
        Some(d) if d <= s => Verdict::Pass,
        Some(d) => Verdict::Fail(Witness::Message { reason: format!("quotient has degree {d}") }),
        None => Verdict::Fail(Witness::Message { reason: "quotient is not a nilspace up to ℓmax".into() }),
    };
    let ergodic = check_ergodic(&space, 1)?;
    let mut translations = Verdict::Pass;
    for h in action.group().elements() {
        if let Verdict::Fail(w) = is_translation(&space, &action.permutation(h), 1, space.lmax())? {
            translations = Verdict::Fail(w);
            break;
        }
    }
    Ok(RpQuotient { s, relation, space, map, action, degree, degree_at_most_s, ergodic, translations })
}

/// rp_quotient on each orbit separately.
pub fn rp_quotient_components(sys: &DynamicalSystem, s: usize) -> Result<Vec<(Vec<PointId>, Result<RpQuotient>)>> {
    Ok(sys.components()?.into_iter().map(|(pts, c)| (pts, rp_quotient(&c, s))).collect())
}

/// The action of H on the target of φ with ψ(h)∘φ = φ∘h, built by pushing
/// the generators and checked on every element.
pub fn descend_action(action: &GroupAction, phi: &CubespaceMap) -> Result<GroupAction> {
    let x = phi.source();
    if action.points() != x.points() {
        return Err(Error::DimensionMismatch { expected: x.points(), found: action.points() });
    }
    let g = action.group();
    let gens = g.generating_set();
    let mut pushed: Vec<(Elem, Vec<PointId>)> = Vec::new();
    for &h in &gens {
        let t = Translation::new(x, action.permutation(h), 1, x.lmax())
            .map_err(|_| Error::CheckFailed(format!("element {h} is not a 1-translation")))?;
        pushed.push((h, push_translation(phi, &t)?.map));
    }
    // words in the generators, breadth first
    let m = phi.target().points();
    let mut table: Vec<Option<Vec<PointId>>> = vec![None; g.order()];
    table[g.identity() as usize] = Some((0..m as PointId).collect());
    let mut queue = vec![g.identity()];
    while let Some(a) = queue.pop() {
        let pa = table[a as usize].clone().unwrap();
        for (h, ph) in &pushed {
            let ha = g.mul(*h, a);
            if table[ha as usize].is_none() {
                table[ha as usize] = Some(pa.iter().map(|&y| ph[y as usize]).collect());
                queue.push(ha);
            }
        }
    }
    let mut flat = Vec::with_capacity(g.order() * m);
    for h in g.elements() {
        let ph = table[h as usize].as_ref().expect("generating set");
        for p in 0..x.points() as PointId {
            if ph[phi.apply(p) as usize] != phi.apply(action.act(h, p)) {
                return Err(Error::NoDescent(format!("element {h} does not commute with the map at point {p}")));
            }
        }
        flat.extend_from_slice(ph);
    }
    GroupAction::new(g.clone(), m, flat)
}

/// Checks that RP^s(X) refines the fibers of an equivariant factor map
/// ψ: X → Z whose own RP^s is trivial.
pub fn maximality_check(action: &GroupAction, s: usize, z_action: &GroupAction, psi: &[PointId]) -> Result<Verdict> {
    if psi.len() != action.points() || action.group() != z_action.group() {
        return Err(Error::InvalidInput("factor map does not match the systems".into()));
    }
    if psi.iter().any(|&z| z as usize >= z_action.points()) {
        return Err(Error::InvalidInput("factor map leaves Z".into()));
    }
    for h in action.group().elements() {
        for p in 0..action.points() as PointId {
            if psi[action.act(h, p) as usize] != z_action.act(h, psi[p as usize]) {
                return Err(Error::NotEquivariant(format!("ψ(h.x) differs from h.ψ(x) for h = {h}, x = {p}")));
            }
        }
    }
    let mut hit = vec![false; z_action.points()];
    psi.iter().for_each(|&z| hit[z as usize] = true);
    if let Some(z) = hit.iter().position(|&b| !b) {
        return Ok(Verdict::Fail(Witness::NotSurjective { point: z as PointId }));
    }
    if !rp_relation(z_action, s, None)?.is_trivial() {
        return Err(Error::InvalidInput(format!("the candidate factor has nontrivial RP^{s}")));
    }
    let rp = rp_relation(action, s, None)?;
    for (p, q) in rp.pairs() {
        if psi[p as usize] != psi[q as usize] {
            return Ok(Verdict::Fail(Witness::Points {
                first: p,
                second: q,
                reason: format!("related by RP^{s} but separated by the factor"),
            }));
        }
    }
    Ok(Verdict::Pass)
}
