use proptest::prelude::*;

use nilkit::cocycle::{
    alternating_sum, derivative, discrepancy, is_cocycle, shift, solve_functional, Cocycle, GroupValuedFunction,
};
use nilkit::constructions::{
    hk_cube_group, hk_upper_face_products, rp_relation, standard_nilspace, GroupAction,
};
use nilkit::cube::{enumerate_morphisms, vertex_count, Configuration, PointId};
use nilkit::cubeset::CubeSet;
use nilkit::cubespace::{check_cube_invariance, FiniteCubespace};
use nilkit::factors::{canonical_relation, canonical_relation_corner, canonical_tower, structure_group};
use nilkit::fibrations::CubespaceMap;
use nilkit::format::{decode, encode, Kind};
use nilkit::group::catalog::{cyclic, dihedral, direct_product, symmetric};
use nilkit::group::{lower_central_series, Elem, Filtration, FiniteAbelianGroup, FiniteGroup};
use nilkit::linalg::smith_mod;
use nilkit::relation::EquivRelation;
use nilkit::translations::{is_translation, translation_group};

fn small_factors() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![
        Just(vec![2]),
        Just(vec![3]),
        Just(vec![4]),
        Just(vec![5]),
        Just(vec![6]),
        Just(vec![2, 2]),
        Just(vec![2, 4]),
    ]
}

fn nilpotent_group() -> impl Strategy<Value = FiniteGroup> {
    prop_oneof![
        (2usize..=7).prop_map(cyclic),
        Just(dihedral(4)),
        Just(direct_product(&cyclic(2), &cyclic(4))),
        Just(direct_product(&dihedral(4), &cyclic(2))),
    ]
}

fn to_point(x: &FiniteCubespace) -> CubespaceMap {
    CubespaceMap::constant(x, &FiniteCubespace::full(1, x.lmax()).unwrap(), 0).unwrap()
}

fn values(len: usize, order: usize) -> impl Strategy<Value = Vec<Elem>> {
    prop::collection::vec(0..order as Elem, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn derivatives_are_cocycles(n in 2usize..=5, m in 2usize..=6, l in 1usize..=2, seed in any::<u64>()) {
        let x = standard_nilspace(&FiniteAbelianGroup::cyclic(n), 1, 2).unwrap();
        let a = FiniteAbelianGroup::cyclic(m);
        let vals: Vec<Elem> = (0..n).map(|i| ((seed >> (4 * i)) % m as u64) as Elem).collect();
        let f = GroupValuedFunction::new(a, vals).unwrap();
        prop_assert!(is_cocycle(&x, &derivative(&x, &f, l).unwrap()).unwrap().passed());
    }

    #[test]
    fn coboundaries_solve_back(factors in small_factors(), n in 2usize..=4, s in 1usize..=2, raw in values(4, 64)) {
        let x = standard_nilspace(&FiniteAbelianGroup::cyclic(n), s, s + 1).unwrap();
        let a = FiniteAbelianGroup::product(&factors);
        let g = GroupValuedFunction::new(a.clone(), raw[..n].iter().map(|v| v % a.order() as Elem).collect()).unwrap();
        let rho = derivative(&x, &g, s + 1).unwrap();
        let sol = solve_functional(&to_point(&x), &rho).unwrap();
        let df = derivative(&x, &sol.f, s + 1).unwrap();
        for k in 0..rho.values.len() {
            prop_assert_eq!(a.add(df.values[k], sol.rho_tilde.values[0]), rho.values[k]);
        }
        // the difference of two solutions is homogeneous
        let diff = g.sub(&sol.f);
        let dd = derivative(&x, &diff, s + 1).unwrap();
        prop_assert!(dd.values.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn discrepancy_moves_by_the_derivative(n in 2usize..=6, c in values(4, 6), f in values(4, 6)) {
        let x = standard_nilspace(&FiniteAbelianGroup::cyclic(n), 1, 2).unwrap();
        let top = structure_group(&x, 1).unwrap();
        let a = &top.group;
        let c: Vec<PointId> = c.iter().map(|v| v % n as PointId).collect();
        let f: Vec<Elem> = f.iter().map(|v| v % a.order() as Elem).collect();
        let dc = discrepancy(&x, &top, &c).unwrap();
        let moved = discrepancy(&x, &top, &shift(&top, &f, &c)).unwrap();
        prop_assert_eq!(moved, a.sub(dc, alternating_sum(a, &f)));
    }

    #[test]
    fn smith_form_is_an_equivalence(
        n in 2i128..=12,
        rows in 1usize..=5,
        cols in 1usize..=4,
        raw in prop::collection::vec(-20i128..20, 20),
    ) {
        let m: Vec<Vec<i128>> = (0..rows).map(|i| (0..cols).map(|j| raw[i * cols + j]).collect()).collect();
        let sm = smith_mod(&m, cols, n, &vec![0; rows], true);
        let u = sm.u.unwrap();
        // U·M·V is diagonal with the reported entries
        for i in 0..rows {
            for j in 0..cols {
                let mut e = 0i128;
                for r in 0..rows {
                    for c in 0..cols {
                        e += u[i][r] * m[r][c] * sm.v[c][j];
                    }
                }
                let want = if i == j && i < sm.diag.len() { sm.diag[i] } else { 0 };
                prop_assert_eq!(e.rem_euclid(n), want.rem_euclid(n));
            }
        }
    }

    #[test]
    fn relations_from_labels_partition(labels in prop::collection::vec(0u8..5, 1..12)) {
        let r = EquivRelation::from_labels(&labels);
        let covered: usize = r.classes().iter().map(|c| c.len()).sum();
        prop_assert_eq!(covered, labels.len());
        for x in 0..labels.len() {
            for y in 0..labels.len() {
                prop_assert_eq!(r.related(x as PointId, y as PointId), labels[x] == labels[y]);
            }
        }
        prop_assert!(EquivRelation::trivial(labels.len()).refines(&r));
        prop_assert!(r.refines(&EquivRelation::full(labels.len())));
    }

    #[test]
    fn artifacts_round_trip(factors in small_factors(), s in 1usize..=2, labels in prop::collection::vec(0u8..4, 1..8)) {
        let a = FiniteAbelianGroup::product(&factors);
        let x = standard_nilspace(&a, s, s).unwrap();
        let text = encode(Kind::Cubespace, &x, None).unwrap();
        let back: FiniteCubespace = decode(Kind::Cubespace, &text).unwrap();
        prop_assert_eq!(encode(Kind::Cubespace, &back, None).unwrap(), text);
        prop_assert_eq!(back, x);
        let r = EquivRelation::from_labels(&labels);
        let back: EquivRelation = decode(Kind::Relation, &encode(Kind::Relation, &r, None).unwrap()).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn standard_nilspaces_are_invariant(factors in small_factors(), s in 1usize..=2) {
        let a = FiniteAbelianGroup::product(&factors);
        let x = standard_nilspace(&a, s, s + 1).unwrap();
        prop_assert!(check_cube_invariance(&x).passed());
        prop_assert_eq!(canonical_relation(&x, s).unwrap(), canonical_relation_corner(&x, s).unwrap());
    }

    #[test]
    fn dropping_a_cube_is_caught_and_replays(n in 2usize..=4, pick in any::<prop::sample::Index>()) {
        let x = standard_nilspace(&FiniteAbelianGroup::cyclic(n), 1, 2).unwrap();
        let mut codes = x.cubes(2).to_codes();
        // keep degenerate cubes so the failure is about the dropped one
        codes.retain(|&c| {
            let v = x.codec(2).decode(c);
            v[0] != v[1] && v[0] != v[2]
        });
        let drop = codes[pick.index(codes.len())];
        let kept: Vec<u64> = x.cubes(2).to_codes().into_iter().filter(|&c| c != drop).collect();
        let mut sets = x.all_cubes().to_vec();
        sets[2] = CubeSet::from_codes(n, 2, kept).unwrap();
        let broken = FiniteCubespace::new(n, sets).unwrap();
        let v = check_cube_invariance(&broken);
        let w = v.witness().expect("a dropped cube breaks invariance");
        prop_assert!(w.replays_on(&broken));
        prop_assert!(!w.replays_on(&x));
    }

    #[test]
    fn hk_closure_matches_upper_faces(g in nilpotent_group(), dim in 0usize..=3) {
        let f = lower_central_series(&g).unwrap();
        let closure = hk_cube_group(&g, &f, dim).unwrap();
        prop_assert_eq!(closure.elements.to_codes(), hk_upper_face_products(&g, &f, dim).unwrap().to_codes());
    }

    #[test]
    fn hk_cubes_are_invariant_under_cube_morphisms(g in nilpotent_group(), k in 0usize..=2, pick in any::<prop::sample::Index>()) {
        let f = lower_central_series(&g).unwrap();
        let hk = hk_cube_group(&g, &f, 2).unwrap();
        let codes = hk.elements.to_codes();
        let c = hk.elements.codec().configuration(codes[pick.index(codes.len())]);
        let small = hk_cube_group(&g, &f, k).unwrap();
        for phi in enumerate_morphisms(k, 2).unwrap() {
            prop_assert!(small.contains(&c.apply_morphism(&phi).unwrap()));
        }
    }

    #[test]
    fn abelian_hk_is_the_standard_nilspace(factors in small_factors(), s in 1usize..=2, l in 0usize..=3) {
        let a = FiniteAbelianGroup::product(&factors);
        let f = Filtration::abelian(a.group(), s).unwrap();
        let x = standard_nilspace(&a, s, l).unwrap();
        prop_assert_eq!(hk_cube_group(a.group(), &f, l).unwrap().elements.to_codes(), x.cubes(l).to_codes());
    }

    #[test]
    fn tower_projections_are_fibrations(
        (factors, s) in (small_factors(), 1usize..=2).prop_filter("small at degree 2", |(f, s)| *s == 1 || f.iter().product::<usize>() <= 4),
    ) {
        let x = standard_nilspace(&FiniteAbelianGroup::product(&factors), s, s + 1).unwrap();
        let tower = canonical_tower(&x).unwrap();
        prop_assert!(tower.iter().all(|t| t.fibration.passed()));
        prop_assert_eq!(tower.last().unwrap().space.points(), x.points());
    }

    #[test]
    fn structure_group_elements_are_translations(factors in small_factors()) {
        let x = standard_nilspace(&FiniteAbelianGroup::product(&factors), 1, 2).unwrap();
        let top = structure_group(&x, 1).unwrap();
        for e in top.group.elements() {
            let perm: Vec<PointId> = (0..x.points() as PointId).map(|p| top.act(e, p)).collect();
            prop_assert!(is_translation(&x, &perm, 1, 2).unwrap().passed());
        }
    }

    #[test]
    fn rp_relations_decrease(g in prop_oneof![(2usize..=6).prop_map(cyclic), Just(dihedral(4)), Just(symmetric(3))]) {
        let act = GroupAction::left_translation(&g);
        let r1 = rp_relation(&act, 1, None).unwrap();
        let r2 = rp_relation(&act, 2, None).unwrap();
        prop_assert!(r2.refines(&r1));
    }
}

#[test]
fn translation_groups_are_closed() {
    let x = nilkit::corpus::hk_d4(3).unwrap();
    let t = translation_group(&x, 1).unwrap();
    assert!(t.exhaustive);
    for f in &t.elements {
        for g in &t.elements {
            let fg: Vec<PointId> = g.iter().map(|&p| f[p as usize]).collect();
            assert!(t.contains(&fg));
        }
    }
}

#[test]
fn cube_codes_follow_vertex_order() {
    let c = Configuration::new(2, vec![0, 1, 2, 3]).unwrap();
    let x = FiniteCubespace::full(4, 2).unwrap();
    assert_eq!(x.codec(2).encode_config(&c).unwrap(), 1 * 4 + 2 * 16 + 3 * 64);
    assert_eq!(vertex_count(3), 8);
}

#[test]
fn random_cocycle_values_are_rejected_when_not_additive() {
    let x = standard_nilspace(&FiniteAbelianGroup::cyclic(3), 1, 2).unwrap();
    let a = FiniteAbelianGroup::cyclic(3);
    let mut vals = vec![0; x.cubes(2).len() as usize];
    vals[7] = 1;
    let rho = Cocycle::new(&x, 2, a, vals).unwrap();
    let v = is_cocycle(&x, &rho).unwrap();
    assert!(v.witness().is_some_and(|w| w.replays_on_cocycle(&x, &rho)));
}
