//! Acceptance gate: one PASS/FAIL line per criterion. Every comparison is
//! exact (tolerance 0); the only numeric budgets are the wall-clock limits
//! printed next to each line.
//!
//! Criteria 7 and 8 contain claims that do not hold on the finite instances
//! as stated. They report FAIL with the reason, and the test asserts that the
//! failing set is exactly that known set.

use std::collections::BTreeSet;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nilkit::cocycle::{
    alternating_sum, derivative, discrepancy, is_cocycle, is_horizontal, quotient_by_straight_classes,
    quotient_refines_base, section_classes, shift, solve_functional, straight_classes, straighten_section,
    uniqueness_clause, Cocycle, GroupValuedFunction, SectionSetting,
};
use nilkit::constructions::{
    hk_cube_group, hk_upper_face_products, rp_relation, standard_nilspace, GroupAction,
};
use nilkit::corpus;
use nilkit::cube::PointId;
use nilkit::cubeset::{Codec, CubeSet};
use nilkit::cubespace::{
    check_cube_invariance, check_ergodic, check_glueing, check_uniqueness, nilspace_degree,
    FiniteCubespace,
};
use nilkit::dynamics::{maximality_check, rp_quotient, DynamicalSystem};
use nilkit::factors::{
    canonical_relation, canonical_relation_corner, quotient_cubespace, structure_group, structure_group_at,
    verify_weak_structure,
};
use nilkit::fibrations::{check_fibration, check_morphism, classify, decompose, CubespaceMap, FibrationKind};
use nilkit::format::{decode, encode, parse_envelope, FiltrationFile, Kind, Provenance};
use nilkit::group::catalog::dihedral;
use nilkit::group::{
    find_isomorphism, lower_central_series, quotient_group, subgroup_as_group, Elem, Filtration,
    FiniteAbelianGroup,
};
use nilkit::relation::EquivRelation;
use nilkit::translations::{
    aut_filtration, is_translation, pull_translation, push_translation, translation_group, Translation,
};
use nilkit::Error;

/// Criteria expected to fail; see the module comment.
const KNOWN_RED: &[usize] = &[7, 8];

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e(err: Error) -> String {
    format!("error: {err}")
}

const ABELIAN: &[(&str, &[usize])] = &[("Z/2", &[2]), ("Z/3", &[3]), ("Z/4", &[4]), ("Z/2xZ/2", &[2, 2])];

const CUBESPACES: &[(&str, usize)] = &[
    ("d1-z2", 1),
    ("d1-z3", 1),
    ("d1-z4", 1),
    ("d1-z2xz2", 1),
    ("d2-z2", 2),
    ("d2-z3", 2),
    ("d2-z4", 2),
    ("d2-z2xz2", 2),
    ("hk-d4", 2),
    ("hk-z4-deg2", 2),
];

fn to_point(x: &FiniteCubespace) -> CubespaceMap {
    CubespaceMap::constant(x, &FiniteCubespace::full(1, x.lmax()).unwrap(), 0).unwrap()
}

fn criterion_1() -> Check {
    for (name, factors) in ABELIAN {
        let a = FiniteAbelianGroup::product(factors);
        for s in 1..=2 {
            let x = standard_nilspace(&a, s, s + 2).map_err(e)?;
            // the degree is decided by cubes up to dimension s+1
            let cert = nilspace_degree(&x.truncate(s + 1)).map_err(e)?;
            ensure(cert.degree() == Some(s), format!("D_{s}({name}): degree {:?}", cert.degree()))?;
            ensure(check_ergodic(&x, s).map_err(e)?.passed(), format!("D_{s}({name}) not {s}-ergodic"))?;
            ensure(check_glueing(&x, s + 2).map_err(e)?.passed(), format!("D_{s}({name}) glueing"))?;
        }
    }
    Ok("8 spaces: degree s, s-ergodic, glueing to s+2".into())
}

fn criterion_2() -> Check {
    let mut compared = 0;
    for (name, factors) in ABELIAN {
        let a = FiniteAbelianGroup::product(factors);
        for s in 1..=2 {
            let f = Filtration::abelian(a.group(), s).map_err(e)?;
            let x = standard_nilspace(&a, s, s + 2).map_err(e)?;
            for l in 0..=s + 2 {
                let hk = hk_cube_group(a.group(), &f, l).map_err(e)?;
                ensure(
                    hk.elements.to_codes() == x.cubes(l).to_codes(),
                    format!("HK^{l} differs from C^{l}(D_{s}({name}))"),
                )?;
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} cube sets equal"))
}

fn criterion_3() -> Check {
    let g = dihedral(4);
    let f = lower_central_series(&g).map_err(e)?;
    let x = corpus::hk_d4(3).map_err(e)?;
    let cert = nilspace_degree(&x).map_err(e)?;
    ensure(cert.degree() == Some(2), format!("degree {:?}", cert.degree()))?;
    ensure(check_ergodic(&x, 1).map_err(e)?.passed(), "not ergodic")?;

    let top = structure_group(&x, 2).map_err(e)?;
    ensure(top.group.factors() == [2], format!("A_2 = {:?}", top.group.factors()))?;
    let (g2, _) = subgroup_as_group(&g, f.level(2));
    ensure(find_isomorphism(top.group.group(), &g2).is_some(), "A_2 not isomorphic to G_2")?;

    let (_, a1) = structure_group_at(&x, 1).map_err(e)?;
    ensure(a1.group.factors() == [2, 2], format!("A_1 = {:?}", a1.group.factors()))?;
    let (quot, _) = quotient_group(&g, f.level(2)).map_err(e)?;
    ensure(find_isomorphism(a1.group.group(), &quot).is_some(), "A_1 not isomorphic to G/G_2")?;

    let closure = hk_cube_group(&g, &f, 2).map_err(e)?;
    let faces = hk_upper_face_products(&g, &f, 2).map_err(e)?;
    ensure(closure.elements.len() == faces.len(), format!("|HK^2| {} vs {}", closure.elements.len(), faces.len()))?;
    ensure(closure.elements.to_codes() == faces.to_codes(), "HK^2 sets differ")?;
    Ok(format!("degree 2, A_2 = Z/2, A_1 = Z/2xZ/2, |HK^2| = {}", closure.elements.len()))
}

fn criterion_4() -> Check {
    for (name, s) in CUBESPACES {
        let x = corpus::cubespace(name, Some(s + 1)).map_err(e)?;
        let top = structure_group(&x, *s).map_err(e)?;
        let cert = verify_weak_structure(&x, &top).map_err(e)?;
        ensure(cert.free.passed() && cert.orbits.passed(), format!("{name}: action"))?;
        let levels: Vec<usize> = cert.cubes.iter().map(|r| r.level).collect();
        ensure((0..=s + 1).all(|l| levels.contains(&l)), format!("{name}: levels {levels:?}"))?;
        for r in &cert.cubes {
            ensure(r.exhaustive && r.verdict.passed(), format!("{name}: level {}", r.level))?;
        }
    }
    Ok(format!("{} instances, items 1 and 2 exhaustive", CUBESPACES.len()))
}

fn criterion_5() -> Check {
    let mut pairs = 0;
    for (name, _) in CUBESPACES {
        let x = corpus::cubespace(name, Some(3)).map_err(e)?;
        for s in 0..x.lmax() {
            let r = canonical_relation(&x, s).map_err(e)?;
            ensure(r == canonical_relation_corner(&x, s).map_err(e)?, format!("{name}: relations differ at s = {s}"))?;
            let (q, _) = quotient_cubespace(&x, &r).map_err(e)?;
            ensure(check_uniqueness(&q, s + 1).map_err(e)?.passed(), format!("{name}: quotient at s = {s}"))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} (instance, s) pairs"))
}

/// Whether the image of `c` under the ∼_{s−1} quotient is a cube.
fn base_is_cube(base: &FiniteCubespace, proj: &CubespaceMap, c: &[PointId], dim: usize) -> bool {
    let img: Vec<PointId> = c.iter().map(|&p| proj.apply(p)).collect();
    base.is_cube_values(dim, &img)
}

fn criterion_6() -> Check {
    let mut checked: u64 = 0;
    let cases = [("d1-z2", 1usize), ("d1-z4", 1), ("hk-z4-deg2", 2)];
    for (name, s) in cases {
        let x = corpus::cubespace(name, Some(s + 1)).map_err(e)?;
        let top = structure_group(&x, s).map_err(e)?;
        let (base, proj) = quotient_cubespace(&x, &top.fibers).map_err(e)?;
        let a = &top.group;
        let els: Vec<Elem> = a.elements().collect();
        let dim = s + 1;
        let codec = Codec::new(x.points(), dim).map_err(e)?;
        let fcodec = Codec::new(els.len(), dim).map_err(e)?;
        for code in 0..codec.total().unwrap() {
            let c = codec.decode(code);
            let dc = match discrepancy(&x, &top, &c) {
                Ok(d) => d,
                Err(Error::BaseNotCube) => {
                    ensure(!base_is_cube(&base, &proj, &c, dim), format!("{name}: undefined over a base cube"))?;
                    continue;
                }
                Err(err) => return Err(e(err)),
            };
            for fc in 0..fcodec.total().unwrap() {
                let f: Vec<Elem> = fcodec.decode(fc).into_iter().map(|i| els[i as usize]).collect();
                let lhs = discrepancy(&x, &top, &shift(&top, &f, &c)).map_err(e)?;
                ensure(lhs == a.sub(dc, alternating_sum(a, &f)), format!("{name}: identity fails at {c:?}, {f:?}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} pairs"))
}

fn criterion_7() -> Check {
    let a = FiniteAbelianGroup::product(&[2, 4]);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut rounds = 0;
    let mut uniqueness_failures = Vec::new();
    for (name, s) in CUBESPACES {
        let l = s + 1;
        let x = corpus::cubespace(name, Some(l)).map_err(e)?;
        let phi = to_point(&x);
        for i in 0..200 {
            let g = GroupValuedFunction::new(a.clone(), (0..x.points()).map(|_| rng.gen_range(0..8)).collect())
                .map_err(e)?;
            let rho = derivative(&x, &g, l).map_err(e)?;
            let sol = solve_functional(&phi, &rho).map_err(e)?;
            let df = derivative(&x, &sol.f, l).map_err(e)?;
            let rebuilt = (0..rho.values.len()).all(|k| a.add(df.values[k], sol.rho_tilde.values[0]) == rho.values[k]);
            ensure(rebuilt, format!("{name}: round trip {i} does not reconstruct"))?;
            rounds += 1;
            if i == 0 && x.points() <= 16 && !uniqueness_clause(&phi, &sol).map_err(e)?.passed() {
                uniqueness_failures.push(*name);
            }
        }
    }
    ensure(
        uniqueness_failures.is_empty(),
        format!(
            "{rounds} round trips exact; uniqueness clause fails on {uniqueness_failures:?}: \
             ∂^ℓ h = 0 has non-constant solutions h at ℓ = s+1"
        ),
    )?;
    Ok(format!("{rounds} round trips exact, uniqueness clause holds"))
}

fn criterion_8() -> Check {
    let x = corpus::hk_z4_deg2(3).map_err(e)?;
    let top = structure_group(&x, 2).map_err(e)?;
    let (base, _) = quotient_cubespace(&x, &top.fibers).map_err(e)?;
    ensure(base.points() == 2, "π_1 is not D_1(Z/2)")?;
    let psi = to_point(&base);
    let setting = SectionSetting::new(&x, &top, &psi).map_err(e)?;

    let st = straighten_section(&setting, None).map_err(e)?;
    ensure(st.rho_is_cocycle.passed() && st.straight.passed(), "straightened section not straight")?;
    let classes = section_classes(&setting, &st.section);
    let q = quotient_by_straight_classes(&setting, &classes).map_err(e)?;
    ensure(q.fibration.passed(), "quotient map not a fibration")?;
    ensure(is_horizontal(q.classification.kind), format!("quotient map is {:?}", q.classification.kind))?;
    ensure(q.shadow_matches.passed(), "shadow is not ψ")?;
    quotient_refines_base(&setting, &q).map_err(e)?;

    let sc = straight_classes(&setting).map_err(e)?;
    let sets: Vec<&Vec<PointId>> = sc.classes.iter().map(|c| &c.points).collect();
    ensure(
        sc.partition.passed(),
        format!(
            "section, horizontal quotient and refinement pass; straight classes {sets:?} overlap \
             (each of the {} structure-group families is a partition: {})",
            sc.families.len(),
            sc.families_partition
        ),
    )?;
    Ok("straight section, partition, horizontal quotient with shadow ψ".into())
}

fn criterion_9() -> Check {
    let f = corpus::map("mod2-hk-z4-deg2", Some(3)).map_err(e)?;
    let d = decompose(&f, 2).map_err(e)?;
    ensure(d.middle.points() == 2, format!("Z has {} points", d.middle.points()))?;
    let composed = d.vertical.then(&d.horizontal).map_err(e)?;
    ensure(composed.map() == f.map(), "f_h ∘ f_v ≠ f")?;
    for (label, m, want) in [("f_v", &d.vertical, FibrationKind::Vertical), ("f_h", &d.horizontal, FibrationKind::Horizontal)] {
        ensure(check_fibration(m, m.source().lmax()).map_err(e)?.passed(), format!("{label} not a fibration"))?;
        let c = classify(m, 2).map_err(e)?;
        ensure(c.consistent, format!("{label}: characterizations disagree"))?;
        ensure(c.kind == want || c.kind == FibrationKind::Both, format!("{label} is {:?}", c.kind))?;
    }
    ensure(classify(&f, 2).map_err(e)?.consistent, "f: characterizations disagree")?;
    Ok("Z has 2 points, f_v vertical, f_h horizontal, f_h ∘ f_v = f".into())
}

fn criterion_10() -> Check {
    for (name, n) in [("d1-z2", 2u32), ("d1-z4", 4)] {
        let x = corpus::cubespace(name, Some(3)).map_err(e)?;
        let aut = aut_filtration(&x).map_err(e)?;
        ensure(aut.nested.passed() && aut.commutators.passed(), format!("{name}: filtration law"))?;
        ensure(aut.groups.iter().all(|g| g.exhaustive), format!("{name}: not exhaustive"))?;
        let top = structure_group(&x, 1).map_err(e)?;
        for el in top.group.elements() {
            let perm: Vec<PointId> = (0..n).map(|p| top.act(el, p)).collect();
            ensure(aut.groups[0].contains(&perm), format!("{name}: translation {perm:?} not in Aut_1"))?;
        }
        ensure(aut.groups[1].order() == 1, format!("{name}: |Aut_2| = {}", aut.groups[1].order()))?;
    }
    let mut round_trips = 0;
    for name in ["mod2-d1-z4", "mod2-hk-z4-deg2"] {
        let phi = corpus::map(name, Some(3)).map_err(e)?;
        let x = phi.source();
        for m in translation_group(x, 1).map_err(e)?.elements {
            let t = Translation::new(x, m, 1, x.lmax()).map_err(e)?;
            let down = push_translation(&phi, &t).map_err(e)?;
            ensure(pull_translation(&phi, &down).map_err(e)?.contains(&t), format!("{name}: pull misses {:?}", t.map))?;
            round_trips += 1;
        }
    }
    Ok(format!("Aut_1 ⊇ A, Aut_2 = 1, law holds; {round_trips} push/pull round trips"))
}

fn criterion_11() -> Check {
    let z6 = corpus::action("z6-rotation").map_err(e)?;
    ensure(rp_relation(&z6, 1, None).map_err(e)?.is_trivial(), "RP^1 of Z/6 not diagonal")?;

    let t = Instant::now();
    let a5 = corpus::action("a5-left").map_err(e)?;
    ensure(rp_relation(&a5, 1, None).map_err(e)?.is_full(), "RP^1 of A5 not everything")?;
    let a5_time = t.elapsed();

    let act = corpus::action("d4-on-4").map_err(e)?;
    let q = rp_quotient(&DynamicalSystem::new(act.clone(), 3), 1).map_err(e)?;
    ensure(q.degree == Some(1), format!("quotient degree {:?}", q.degree))?;
    for h in act.group().elements() {
        let v = is_translation(&q.space, &q.action.permutation(h), 1, q.space.lmax()).map_err(e)?;
        ensure(v.passed(), format!("h = {h} is not a 1-translation"))?;
    }
    ensure(maximality_check(&act, 1, &q.action, q.map.map()).map_err(e)?.passed(), "maximality against Q")?;
    let pt = GroupAction::new(act.group().clone(), 1, vec![0; act.group().order()]).map_err(e)?;
    ensure(maximality_check(&act, 1, &pt, &vec![0; act.points()]).map_err(e)?.passed(), "maximality against a point")?;
    Ok(format!("Z/6 diagonal, A5 full ({:.1}s), D4 quotient degree 1, maximal", a5_time.as_secs_f64()))
}

fn round_trip<T>(kind: Kind, value: &T, provenance: Option<Provenance>) -> Result<(), String>
where
    T: serde::Serialize + serde::de::DeserializeOwned + PartialEq + std::fmt::Debug,
{
    let text = encode(kind, value, provenance).map_err(e)?;
    let back: T = decode(kind, &text).map_err(e)?;
    ensure(&back == value, format!("{} does not decode to itself", kind.name()))?;
    let again = encode(kind, &back, parse_envelope(&text).map_err(e)?.provenance).map_err(e)?;
    ensure(again == text, format!("{} bytes differ after a round trip", kind.name()))
}

fn criterion_12() -> Check {
    let g = dihedral(4);
    round_trip(Kind::Group, &g, None)?;
    let filt = FiltrationFile::from_filtration(&g, &lower_central_series(&g).map_err(e)?);
    round_trip(Kind::Filtration, &filt, None)?;
    for (name, _) in corpus::NAMES {
        let lmax = if *name == "a5-left" { None } else { Some(2) };
        match corpus::instance(name, lmax).map_err(e)? {
            corpus::CorpusItem::Cubespace(x) => {
                round_trip(Kind::Cubespace, &x, Some(Provenance::new(name, serde_json::json!({"lmax": 2}))))?
            }
            corpus::CorpusItem::Map(m) => round_trip(Kind::Map, &m, None)?,
            corpus::CorpusItem::Action(a) => round_trip(Kind::Action, &a, None)?,
        }
    }
    let x = corpus::cubespace("d1-z4", Some(2)).map_err(e)?;
    let z4 = FiniteAbelianGroup::cyclic(4);
    let fun = GroupValuedFunction::new(z4.clone(), vec![0, 1, 0, 3]).map_err(e)?;
    round_trip(Kind::Function, &fun, None)?;
    round_trip(Kind::Cocycle, &derivative(&x, &fun, 2).map_err(e)?, None)?;
    round_trip(Kind::Relation, &EquivRelation::from_labels(&[0, 1, 0, 1]), None)?;
    round_trip(Kind::Translation, &Translation::new(&x, vec![1, 2, 3, 0], 1, 2).map_err(e)?, None)?;
    round_trip(Kind::Certificate, &nilspace_degree(&x).map_err(e)?, None)?;

    let mut replayed = 0;
    // a cube set missing one cube: invariance, then fibrancy
    let mut codes = x.cubes(2).to_codes();
    codes.remove(5);
    let mut sets = x.all_cubes().to_vec();
    sets[2] = CubeSet::from_codes(4, 2, codes).map_err(e)?;
    let broken = FiniteCubespace::new(4, sets).map_err(e)?;
    let w = check_cube_invariance(&broken);
    let w = w.witness().ok_or("corrupted cube set passes invariance")?;
    ensure(w.replays_on(&broken) && !w.replays_on(&x), "invariance witness does not replay")?;
    replayed += 1;

    let full = FiniteCubespace::full(2, 2).map_err(e)?;
    let v = check_uniqueness(&full, 1).map_err(e)?;
    ensure(v.witness().is_some_and(|w| w.replays_on(&full)), "uniqueness witness")?;
    replayed += 1;

    // three points with 0 ~ 1 ~ 2 as edges but not 0 ~ 2
    let edges: Vec<u64> =
        [[0, 0], [1, 1], [2, 2], [0, 1], [1, 0], [1, 2], [2, 1]].iter().map(|c| Codec::new(3, 1).unwrap().encode(c)).collect();
    let path = FiniteCubespace::new(3, vec![CubeSet::all(3, 0).map_err(e)?, CubeSet::from_codes(3, 1, edges).map_err(e)?])
        .map_err(e)?;
    let v = check_glueing(&path, 1).map_err(e)?;
    ensure(v.witness().is_some_and(|w| w.replays_on(&path)), "glueing witness")?;
    replayed += 1;

    let d2 = corpus::cubespace("d1-z2", Some(2)).map_err(e)?;
    let rho = Cocycle::new(&d2, 2, FiniteAbelianGroup::cyclic(2), vec![1; 8]).map_err(e)?;
    let v = is_cocycle(&d2, &rho).map_err(e)?;
    ensure(v.witness().is_some_and(|w| w.replays_on_cocycle(&d2, &rho)), "cocycle witness")?;
    replayed += 1;

    let swap = CubespaceMap::new(x.clone(), x.clone(), vec![0, 1, 3, 2]).map_err(e)?;
    let v = check_morphism(&swap);
    ensure(v.witness().is_some_and(|w| w.replays_on_map(&swap)), "morphism witness")?;
    replayed += 1;

    let onto_full = CubespaceMap::new(d2.clone(), FiniteCubespace::full(2, 2).map_err(e)?, vec![0, 1]).map_err(e)?;
    let v = check_fibration(&onto_full, 2).map_err(e)?;
    ensure(v.witness().is_some_and(|w| w.replays_on_map(&onto_full)), "fibration witness")?;
    replayed += 1;

    let v = is_translation(&d2, &[1, 0], 2, 2).map_err(e)?;
    ensure(v.witness().is_some_and(|w| w.replays_on_translation(&d2, &[1, 0])), "translation witness")?;
    replayed += 1;
    Ok(format!("all artifact kinds bit-exact, {replayed} witnesses replay"))
}

#[test]
fn acceptance() {
    let criteria: [(fn() -> Check, Duration); 12] = [
        (criterion_1, Duration::from_secs(60)),
        (criterion_2, Duration::from_secs(60)),
        (criterion_3, Duration::from_secs(60)),
        (criterion_4, Duration::from_secs(60)),
        (criterion_5, Duration::from_secs(60)),
        (criterion_6, Duration::from_secs(60)),
        (criterion_7, Duration::from_secs(60)),
        (criterion_8, Duration::from_secs(60)),
        (criterion_9, Duration::from_secs(60)),
        (criterion_10, Duration::from_secs(60)),
        (criterion_11, Duration::from_secs(600)),
        (criterion_12, Duration::from_secs(60)),
    ];
    let mut failing = BTreeSet::new();
    for (i, (run, budget)) in criteria.iter().enumerate() {
        let n = i + 1;
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > *budget => Err(format!("over budget: {:.1}s > {}s", elapsed.as_secs_f64(), budget.as_secs())),
            other => other,
        };
        // written to the handle directly so the lines show without --nocapture
        let mut out = std::io::stdout().lock();
        match &outcome {
            Ok(detail) => writeln!(
                out,
                "criterion {n:>2}: PASS [{:.1}s/{}s] {detail}",
                elapsed.as_secs_f64(),
                budget.as_secs()
            )
            .unwrap(),
            Err(detail) => {
                failing.insert(n);
                writeln!(out, "criterion {n:>2}: FAIL [{:.1}s/{}s] {detail}", elapsed.as_secs_f64(), budget.as_secs())
                    .unwrap();
            }
        }
    }
    let known: BTreeSet<usize> = KNOWN_RED.iter().copied().collect();
    assert_eq!(failing, known, "failing criteria differ from the known set");
}
