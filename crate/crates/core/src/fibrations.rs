//! Maps between finite cubespaces: morphisms, fibrations, shadows,
//! horizontal and vertical fibrations and their decomposition.

use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::cube::{vertex_count, Configuration, Corner, PointId};
use crate::cubespace::{check_cube_invariance, for_each_corner, FiniteCubespace};
use crate::error::{Error, Result};
use crate::factors::{canonical_relation, quotient_cubespace};
use crate::relation::EquivRelation;
use crate::verdict::{Verdict, Witness};

/// Results of the verifiers run on a map so far. `None` means unverified.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapStatus {
    pub morphism: Option<Verdict>,
    /// Highest level checked with its verdict.
    pub fibration: Option<(usize, Verdict)>,
    pub horizontal: Option<Verdict>,
    pub vertical: Option<Verdict>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(try_from = "RawMap", into = "RawMap")]
pub struct CubespaceMap {
    source: FiniteCubespace,
    target: FiniteCubespace,
    map: Vec<PointId>,
    status: RwLock<MapStatus>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawMap {
    pub source: FiniteCubespace,
    pub target: FiniteCubespace,
    pub map: Vec<PointId>,
}

impl TryFrom<RawMap> for CubespaceMap {
    type Error = Error;
    fn try_from(r: RawMap) -> Result<Self> {
        CubespaceMap::new(r.source, r.target, r.map)
    }
}

impl From<CubespaceMap> for RawMap {
    fn from(m: CubespaceMap) -> Self {
        RawMap { source: m.source, target: m.target, map: m.map }
    }
}

impl Clone for CubespaceMap {
    fn clone(&self) -> Self {
        CubespaceMap {
            source: self.source.clone(),
            target: self.target.clone(),
            map: self.map.clone(),
            status: RwLock::new(self.status()),
        }
    }
}

impl PartialEq for CubespaceMap {
    fn eq(&self, other: &Self) -> bool {
        self.map == other.map && self.source == other.source && self.target == other.target
    }
}

impl Eq for CubespaceMap {}

impl CubespaceMap {
    pub fn new(source: FiniteCubespace, target: FiniteCubespace, map: Vec<PointId>) -> Result<Self> {
        if map.len() != source.points() {
            return Err(Error::DimensionMismatch { expected: source.points(), found: map.len() });
        }
        if map.iter().any(|&y| y as usize >= target.points()) {
            return Err(Error::InvalidInput("map value outside the target".into()));
        }
        Ok(CubespaceMap { source, target, map, status: RwLock::new(MapStatus::default()) })
    }

    pub fn identity(x: &FiniteCubespace) -> Self {
        let map = (0..x.points() as PointId).collect();
        CubespaceMap::new(x.clone(), x.clone(), map).unwrap()
    }

    pub fn constant(x: &FiniteCubespace, y: &FiniteCubespace, point: PointId) -> Result<Self> {
        CubespaceMap::new(x.clone(), y.clone(), vec![point; x.points()])
    }

    /// `after ∘ self`
    pub fn then(&self, after: &CubespaceMap) -> Result<CubespaceMap> {
        if self.target.points() != after.source.points() || self.target != after.source {
            return Err(Error::InvalidInput("maps are not composable".into()));
        }
        let map = self.map.iter().map(|&y| after.map[y as usize]).collect();
        CubespaceMap::new(self.source.clone(), after.target.clone(), map)
    }

    pub fn source(&self) -> &FiniteCubespace {
        &self.source
    }

    pub fn target(&self) -> &FiniteCubespace {
        &self.target
    }

    pub fn map(&self) -> &[PointId] {
        &self.map
    }

    pub fn apply(&self, x: PointId) -> PointId {
        self.map[x as usize]
    }

    pub fn apply_config(&self, c: &Configuration) -> Configuration {
        c.map_points(|x| self.map[x as usize])
    }

    pub fn status(&self) -> MapStatus {
        self.status.read().unwrap().clone()
    }

    /// Points with the same image.
    pub fn fibers(&self) -> EquivRelation {
        EquivRelation::from_labels(&self.map)
    }

    pub fn is_bijective(&self) -> bool {
        self.source.points() == self.target.points() && {
            let mut hit = vec![false; self.target.points()];
            self.map.iter().all(|&y| !std::mem::replace(&mut hit[y as usize], true))
        }
    }

    fn levels(&self) -> usize {
        self.source.lmax().min(self.target.lmax())
    }
}

/// {φ∘c : c ∈ C^ℓ(X)} ⊆ C^ℓ(Y) for every ℓ available on both sides.
pub fn check_morphism(f: &CubespaceMap) -> Verdict {
    if let Some(v) = &f.status.read().unwrap().morphism {
        return v.clone();
    }
    let mut verdict = Verdict::Pass;
    'levels: for l in 0..=f.levels() {
        let (sc, tc) = (f.source.codec(l), f.target.codec(l));
        let mut vals = vec![0; vertex_count(l)];
        for code in f.source.cubes(l).iter() {
            sc.decode_into(code, &mut vals);
            vals.iter_mut().for_each(|x| *x = f.map[*x as usize]);
            if !f.target.cubes(l).contains(tc.encode(&vals)) {
                verdict = Verdict::Fail(Witness::CubeNotPreserved { cube: sc.configuration(code) });
                break 'levels;
            }
        }
    }
    f.status.write().unwrap().morphism = Some(verdict.clone());
    verdict
}

/// Relative corner completion for 0 ≤ ℓ ≤ `up_to`. Level 0 is
/// surjectivity. Fails with the morphism witness when `f` is not a morphism.
pub fn check_fibration(f: &CubespaceMap, up_to: usize) -> Result<Verdict> {
    if up_to > f.levels() {
        return Err(Error::InvalidInput(format!("level {up_to} above the common ℓmax {}", f.levels())));
    }
    if let Some((l, v)) = &f.status.read().unwrap().fibration {
        if *l >= up_to && v.passed() {
            return Ok(Verdict::Pass);
        }
    }
    let m = check_morphism(f);
    if !m.passed() {
        return Ok(m);
    }
    let verdict = fibration_verdict(f, up_to)?;
    f.status.write().unwrap().fibration = Some((up_to, verdict.clone()));
    Ok(verdict)
}

fn fibration_verdict(f: &CubespaceMap, up_to: usize) -> Result<Verdict> {
    let mut hit = vec![false; f.target.points()];
    for &y in &f.map {
        hit[y as usize] = true;
    }
    if let Some(y) = hit.iter().position(|&h| !h) {
        return Ok(Verdict::Fail(Witness::NotSurjective { point: y as PointId }));
    }
    check_cube_invariance(&f.source);
    let (n, m) = (f.source.points(), f.target.points());
    for l in 1..=up_to {
        let (sc, tc) = (f.source.codec(l), f.target.codec(l));
        let (sw, tw) = (sc.top_weight(), tc.top_weight());
        let (sset, tset) = (f.source.cubes(l), f.target.cubes(l));
        let nv = vertex_count(l);
        let mut svals = vec![0; nv];
        let mut tvals = vec![0; nv];
        let mut reached = vec![false; m];
        let mut witness = None;
        for_each_corner(&f.source, l, |corner| {
            svals[..nv - 1].copy_from_slice(corner);
            svals[nv - 1] = 0;
            for (t, &s) in tvals.iter_mut().zip(corner) {
                *t = f.map[s as usize];
            }
            tvals[nv - 1] = 0;
            let (sbase, tbase) = (sc.encode(&svals), tc.encode(&tvals));
            reached.iter_mut().for_each(|r| *r = false);
            for x in 0..n as u64 {
                if sset.contains(sbase + x * sw) {
                    reached[f.map[x as usize] as usize] = true;
                }
            }
            for y in 0..m as u64 {
                if !reached[y as usize] && tset.contains(tbase + y * tw) {
                    let corner = Corner::new(l, corner.to_vec()).unwrap();
                    tvals[nv - 1] = y as PointId;
                    let target = Configuration::new(l, tvals.clone()).unwrap();
                    witness = Some(Witness::FibrationCorner { corner, target });
                    return false;
                }
            }
            true
        })?;
        if let Some(w) = witness {
            return Ok(Verdict::Fail(w));
        }
    }
    Ok(Verdict::Pass)
}

impl Witness {
    /// Whether the witness still exhibits its failure on `f`.
    pub fn replays_on_map(&self, f: &CubespaceMap) -> bool {
        match self {
            Witness::CubeNotPreserved { cube } => {
                cube.dim() <= f.levels() && f.source.is_cube(cube) && !f.target.is_cube(&f.apply_config(cube))
            }
            Witness::NotSurjective { point } => !f.map.contains(point),
            Witness::FibrationCorner { corner, target } => {
                let l = corner.dim();
                let image: Vec<PointId> = corner.values().iter().map(|&x| f.apply(x)).collect();
                l <= f.levels()
                    && f.target.is_cube(target)
                    && target.values()[..vertex_count(l) - 1] == image[..]
                    && crate::cubespace::check_corner(&f.source, corner).is_ok()
                    && (0..f.source.points() as PointId).all(|x| {
                        !(f.apply(x) == target.get(vertex_count(l) - 1) && f.source.is_cube(&corner.complete(x)))
                    })
            }
            _ => false,
        }
    }
}

/// The canonical projections π = π_{s−1} of both sides and the induced map
/// between them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shadow {
    pub source_projection: CubespaceMap,
    pub target_projection: CubespaceMap,
    pub map: CubespaceMap,
}

/// ψ with π∘φ = ψ∘π, for φ between nilspaces of degree s. A target of
/// lower degree is used with its cubes unchanged.
pub fn shadow(f: &CubespaceMap, s: usize) -> Result<Shadow> {
    if s == 0 {
        return Err(Error::InvalidInput("shadow needs s ≥ 1".into()));
    }
    let (px, sp) = quotient_cubespace(&f.source, &canonical_relation(&f.source, s - 1)?)?;
    let (py, tp) = quotient_cubespace(&f.target, &canonical_relation(&f.target, s - 1)?)?;
    let mut psi = vec![u32::MAX; px.points()];
    for x in 0..f.source.points() as PointId {
        let (a, b) = (sp.apply(x), tp.apply(f.apply(x)));
        if psi[a as usize] == u32::MAX {
            psi[a as usize] = b;
        } else if psi[a as usize] != b {
            return Err(Error::NoDescent(format!("π(φ(x)) is not a function of π(x) at point {x}")));
        }
    }
    let map = CubespaceMap::new(px, py, psi)?;
    Ok(Shadow { source_projection: sp, target_projection: tp, map })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FibrationKind {
    Horizontal,
    Vertical,
    Both,
    Neither,
}

/// Each characterization checked separately.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: FibrationKind,
    /// φ is injective on π-fibers.
    pub horizontal_injective: Verdict,
    /// φ maps each π-fiber bijectively onto a π-fiber.
    pub horizontal_bijective: Verdict,
    /// π(φ(x₁)) = π(φ(x₂)) forces π(x₁) = π(x₂).
    pub vertical_fibers: Verdict,
    /// The shadow is an isomorphism.
    pub vertical_shadow: Verdict,
    /// φ(x₁) = φ(x₂) forces ⌞^s(x₁; x₂) to be a cube.
    pub vertical_corner: Verdict,
    /// Whether the equivalent characterizations agree.
    pub consistent: bool,
}

pub fn classify(f: &CubespaceMap, s: usize) -> Result<Classification> {
    let fib = check_fibration(f, f.levels())?;
    if !fib.passed() {
        return Err(Error::CheckFailed("map is not a fibration".into()));
    }
    let sh = shadow(f, s)?;
    let (sp, tp) = (&sh.source_projection, &sh.target_projection);
    let n = f.source.points() as PointId;
    let pts = |a, b, reason: &str| Verdict::Fail(Witness::Points { first: a, second: b, reason: reason.into() });

    let mut h1 = Verdict::Pass;
    let mut v1 = Verdict::Pass;
    let mut v5 = Verdict::Pass;
    let codec = f.source.codec(s);
    'pairs: for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let same_pi = sp.apply(a) == sp.apply(b);
            let same_phi = f.apply(a) == f.apply(b);
            if h1.passed() && same_pi && same_phi {
                h1 = pts(a, b, "distinct points in one π-fiber with the same image");
            }
            if v1.passed() && tp.apply(f.apply(a)) == tp.apply(f.apply(b)) && !same_pi {
                v1 = pts(a, b, "images in one π-fiber but points are not");
            }
            if v5.passed()
                && same_phi
                && !f.source.cubes(s).contains(codec.encode(Configuration::corner_pattern(s, a, b).values()))
            {
                v5 = pts(a, b, "same image but the corner configuration is not a cube");
            }
            if !h1.passed() && !v1.passed() && !v5.passed() {
                break 'pairs;
            }
        }
    }

    let pi_y = tp.fibers();
    let mut h2 = Verdict::Pass;
    let pi_x = sp.fibers();
    'points: for x in 0..n {
        let src = &pi_x.classes()[pi_x.class_of(x) as usize];
        let dst = &pi_y.classes()[pi_y.class_of(f.apply(x)) as usize];
        let mut hit = vec![false; f.target.points()];
        for &z in src {
            let y = f.apply(z);
            if !dst.contains(&y) || std::mem::replace(&mut hit[y as usize], true) {
                h2 = pts(x, z, "φ is not a bijection between the π-fibers");
                break 'points;
            }
        }
        if src.len() != dst.len() {
            h2 = pts(x, x, "π-fibers have different sizes");
            break;
        }
    }

    let v2 = if !sh.map.is_bijective() {
        Verdict::Fail(Witness::Message { reason: "shadow is not bijective".into() })
    } else {
        let mut inv = vec![0; sh.map.target().points()];
        for (a, &b) in sh.map.map().iter().enumerate() {
            inv[b as usize] = a as PointId;
        }
        let back = CubespaceMap::new(sh.map.target().clone(), sh.map.source().clone(), inv)?;
        match check_morphism(&back) {
            Verdict::Pass => Verdict::Pass,
            Verdict::Fail(_) => Verdict::Fail(Witness::Message { reason: "inverse of the shadow is not a morphism".into() }),
        }
    };

    let horizontal = h1.passed();
    let vertical = v1.passed();
    let consistent = h1.passed() == h2.passed() && v1.passed() == v2.passed() && v1.passed() == v5.passed();
    let kind = match (horizontal, vertical) {
        (true, true) => FibrationKind::Both,
        (true, false) => FibrationKind::Horizontal,
        (false, true) => FibrationKind::Vertical,
        (false, false) => FibrationKind::Neither,
    };
    {
        let mut st = f.status.write().unwrap();
        st.horizontal = Some(h1.clone());
        st.vertical = Some(v1.clone());
    }
    Ok(Classification {
        kind,
        horizontal_injective: h1,
        horizontal_bijective: h2,
        vertical_fibers: v1,
        vertical_shadow: v2,
        vertical_corner: v5,
        consistent,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    /// x₁ ∼ x₂ iff φ(x₁) = φ(x₂) and ⌞^s(x₁; x₂) is a cube.
    pub relation: EquivRelation,
    pub middle: FiniteCubespace,
    pub vertical: CubespaceMap,
    pub horizontal: CubespaceMap,
}

/// φ = φ_h ∘ φ_v through the quotient by the relative relation above.
pub fn decompose(f: &CubespaceMap, s: usize) -> Result<Decomposition> {
    if s == 0 || s > f.source.lmax() {
        return Err(Error::InvalidInput(format!("degree {s} outside 1..=ℓmax")));
    }
    let codec = f.source.codec(s);
    let cubes = f.source.cubes(s);
    let relation = EquivRelation::from_predicate(f.source.points(), |a, b| {
        f.apply(a) == f.apply(b) && cubes.contains(codec.encode(Configuration::corner_pattern(s, a, b).values()))
    })?;
    let (middle, vertical) = quotient_cubespace(&f.source, &relation)?;
    let h: Vec<PointId> = relation.classes().iter().map(|c| f.apply(c[0])).collect();
    let horizontal = CubespaceMap::new(middle.clone(), f.target.clone(), h)?;
    for x in 0..f.source.points() as PointId {
        if horizontal.apply(vertical.apply(x)) != f.apply(x) {
            return Err(Error::CheckFailed(format!("decomposition does not commute at {x}")));
        }
    }
    Ok(Decomposition { relation, middle, vertical, horizontal })
}

/// The unique map ψ: Y → Z with ψ∘φ_YX = φ_ZX, provided every φ_YX-fiber
/// lies inside a φ_ZX-fiber; checked to be a fibration.
pub fn universal_factor(f_yx: &CubespaceMap, f_zx: &CubespaceMap) -> Result<CubespaceMap> {
    if f_yx.source != f_zx.source {
        return Err(Error::InvalidInput("maps have different sources".into()));
    }
    let mut psi = vec![u32::MAX; f_yx.target.points()];
    for x in 0..f_yx.source.points() as PointId {
        let (y, z) = (f_yx.apply(x), f_zx.apply(x));
        if psi[y as usize] == u32::MAX {
            psi[y as usize] = z;
        } else if psi[y as usize] != z {
            return Err(Error::NoRefinement(format!("fiber over {y} meets two fibers of the second map")));
        }
    }
    if let Some(y) = psi.iter().position(|&z| z == u32::MAX) {
        return Err(Error::NoRefinement(format!("point {y} is not in the image")));
    }
    let out = CubespaceMap::new(f_yx.target.clone(), f_zx.target.clone(), psi)?;
    let up_to = out.levels();
    match check_fibration(&out, up_to)? {
        Verdict::Pass => Ok(out),
        Verdict::Fail(w) => Err(Error::CheckFailed(format!("factoring map is not a fibration: {w:?}"))),
    }
}

/// φ(x) = φ(x') ⟹ φ(f(x)) = φ(f(x')) for a point bijection f.
pub fn respects_fibers(phi: &CubespaceMap, f: &[PointId]) -> Verdict {
    let n = phi.source.points() as PointId;
    for a in 0..n {
        for b in a + 1..n {
            if phi.apply(a) == phi.apply(b) && phi.apply(f[a as usize]) != phi.apply(f[b as usize]) {
                return Verdict::Fail(Witness::Points {
                    first: a,
                    second: b,
                    reason: "same fiber, images in different fibers".into(),
                });
            }
        }
    }
    Verdict::Pass
}
