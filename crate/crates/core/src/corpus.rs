//! Named small instances used by the tests, the acceptance suite and the
//! `corpus` subcommand.

use crate::constructions::{hk_nilspace, standard_nilspace, GroupAction};
use crate::cube::PointId;
use crate::cubespace::FiniteCubespace;
use crate::error::{Error, Result};
use crate::factors::quotient_cubespace;
use crate::fibrations::CubespaceMap;
use crate::format::Kind;
use crate::group::catalog::{alternating, cyclic, dihedral};
use crate::group::{lower_central_series, subgroup_closure, validate_filtration, Filtration, FiniteAbelianGroup, FiniteGroup};
use crate::relation::EquivRelation;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CorpusItem {
    Cubespace(FiniteCubespace),
    Map(CubespaceMap),
    Action(GroupAction),
}

impl CorpusItem {
    pub fn kind(&self) -> Kind {
        match self {
            CorpusItem::Cubespace(_) => Kind::Cubespace,
            CorpusItem::Map(_) => Kind::Map,
            CorpusItem::Action(_) => Kind::Action,
        }
    }
}

/// (name, description)
pub const NAMES: &[(&str, &str)] = &[
    ("d1-z2", "D_1(Z/2)"),
    ("d1-z3", "D_1(Z/3)"),
    ("d1-z4", "D_1(Z/4)"),
    ("d1-z2xz2", "D_1(Z/2 x Z/2)"),
    ("d2-z2", "D_2(Z/2)"),
    ("d2-z3", "D_2(Z/3)"),
    ("d2-z4", "D_2(Z/4)"),
    ("d2-z2xz2", "D_2(Z/2 x Z/2)"),
    ("hk-d4", "Host-Kra nilspace of D4 with its lower central series, trivial lattice"),
    ("hk-z4-deg2", "Host-Kra nilspace of Z/4 filtered Z/4 ⊇ Z/4 ⊇ {0,2} ⊇ {0}"),
    ("mod2-d1-z4", "D_1(Z/4) → D_1(Z/2), reduction mod 2"),
    ("mod2-hk-z4-deg2", "HK(Z/4, degree 2) → D_1(Z/2), reduction mod 2"),
    ("z6-rotation", "Z/6 acting on itself"),
    ("a5-left", "A5 acting on itself by left multiplication"),
    ("d4-on-4", "D4 acting on the cosets of its center"),
];

fn default_lmax(name: &str) -> usize {
    match name {
        "d2-z2" | "d2-z3" | "d2-z4" | "d2-z2xz2" | "hk-d4" | "hk-z4-deg2" | "mod2-hk-z4-deg2" => 3,
        "a5-left" => 2,
        _ => 3,
    }
}

/// The filtration Z/4 = G_0 = G_1 ⊇ G_2 = {0, 2} ⊇ G_3 = {0}.
pub fn z4_degree_two() -> (FiniteGroup, Filtration) {
    let z4 = cyclic(4);
    let f = validate_filtration(&z4, &[vec![0, 1, 2, 3], vec![0, 1, 2, 3], vec![0, 2], vec![0]])
        .expect("a valid filtration");
    (z4, f)
}

pub fn hk_z4_deg2(lmax: usize) -> Result<FiniteCubespace> {
    let (z4, f) = z4_degree_two();
    Ok(hk_nilspace(&z4, &f, &z4.trivial_subgroup(), lmax)?.space)
}

pub fn hk_d4(lmax: usize) -> Result<FiniteCubespace> {
    let g = dihedral(4);
    let f = lower_central_series(&g)?;
    Ok(hk_nilspace(&g, &f, &g.trivial_subgroup(), lmax)?.space)
}

fn abelian(name: &str) -> FiniteAbelianGroup {
    match name {
        "z2" => FiniteAbelianGroup::cyclic(2),
        "z3" => FiniteAbelianGroup::cyclic(3),
        "z4" => FiniteAbelianGroup::cyclic(4),
        _ => FiniteAbelianGroup::product(&[2, 2]),
    }
}

/// Reduction mod 2 from a 4-point space whose points are Z/4 in order.
fn mod2(source: FiniteCubespace) -> Result<CubespaceMap> {
    let labels: Vec<PointId> = vec![0, 1, 0, 1];
    let (target, _) = quotient_cubespace(&source, &EquivRelation::from_labels(&labels))?;
    CubespaceMap::new(source, target, labels)
}

/// Builds a named instance; `lmax` overrides the default cube depth.
pub fn instance(name: &str, lmax: Option<usize>) -> Result<CorpusItem> {
    let l = lmax.unwrap_or_else(|| default_lmax(name));
    if let Some(rest) = name.strip_prefix('d').filter(|r| r.starts_with("1-") || r.starts_with("2-")) {
        let (deg, group) = rest.split_once('-').unwrap();
        if ["z2", "z3", "z4", "z2xz2"].contains(&group) {
            let s: usize = deg.parse().unwrap();
            return Ok(CorpusItem::Cubespace(standard_nilspace(&abelian(group), s, l)?));
        }
    }
    Ok(match name {
        "hk-d4" => CorpusItem::Cubespace(hk_d4(l)?),
        "hk-z4-deg2" => CorpusItem::Cubespace(hk_z4_deg2(l)?),
        "mod2-d1-z4" => CorpusItem::Map(mod2(standard_nilspace(&abelian("z4"), 1, l)?)?),
        "mod2-hk-z4-deg2" => CorpusItem::Map(mod2(hk_z4_deg2(l)?)?),
        "z6-rotation" => CorpusItem::Action(GroupAction::left_translation(&cyclic(6))),
        "a5-left" => CorpusItem::Action(GroupAction::left_translation(&alternating(5))),
        "d4-on-4" => {
            let g = dihedral(4);
            let center = subgroup_closure(&g, &[2])?;
            CorpusItem::Action(GroupAction::on_cosets(&g, &center).0)
        }
        _ => return Err(Error::InvalidInput(format!("unknown corpus instance {name}"))),
    })
}

pub fn cubespace(name: &str, lmax: Option<usize>) -> Result<FiniteCubespace> {
    match instance(name, lmax)? {
        CorpusItem::Cubespace(x) => Ok(x),
        _ => Err(Error::InvalidInput(format!("{name} is not a cubespace"))),
    }
}

pub fn map(name: &str, lmax: Option<usize>) -> Result<CubespaceMap> {
    match instance(name, lmax)? {
        CorpusItem::Map(m) => Ok(m),
        _ => Err(Error::InvalidInput(format!("{name} is not a map"))),
    }
}

pub fn action(name: &str) -> Result<GroupAction> {
    match instance(name, None)? {
        CorpusItem::Action(a) => Ok(a),
        _ => Err(Error::InvalidInput(format!("{name} is not an action"))),
    }
}
