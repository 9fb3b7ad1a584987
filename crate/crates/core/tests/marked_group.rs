use abelperc_core::lattice::IntegerLattice;
use abelperc_core::marked_group::{agreement_radius, convergence_certificate, mg_distance, parse_group, MarkedAbelianGroup};
use proptest::prelude::*;

fn lattice(d: usize) -> impl Strategy<Value = IntegerLattice> {
    prop::collection::vec(prop::collection::vec(-5i64..=5, d), 0..=d + 1).prop_map(move |g| IntegerLattice::from_i64(d, &g).unwrap())
}

fn group(d: usize) -> impl Strategy<Value = MarkedAbelianGroup> {
    lattice(d).prop_map(move |l| MarkedAbelianGroup::from_subgroup(d, &l).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn subgroup_round_trip(l in (1usize..=4).prop_flat_map(lattice)) {
        let d = l.dim();
        let g = MarkedAbelianGroup::from_subgroup(d, &l).unwrap();
        prop_assert_eq!(&g.relations().unwrap(), &l);
        let again = MarkedAbelianGroup::from_key(&g.key()).unwrap();
        prop_assert_eq!(again.key(), g.key());
        prop_assert_eq!(parse_group(&g.to_string()).unwrap().key(), g.key());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn quotients_compose(
        (g, y1, y2) in (2usize..=3).prop_flat_map(|d| (group(d), prop::collection::vec(-4i64..=4, d), prop::collection::vec(-4i64..=4, d)))
    ) {
        let q1 = g.quotient(&[g.image(&y1)]).unwrap();
        let q12 = q1.quotient(&[q1.image(&y2)]).unwrap();
        let direct = g.quotient(&[g.image(&y1), g.image(&y2)]).unwrap();
        prop_assert_eq!(q12.key(), direct.key());
        prop_assert!(g.lattice().is_sublattice_of(q1.lattice()).unwrap());
    }

    #[test]
    fn mg_distance_is_an_ultrametric((f, g, h) in (1usize..=3).prop_flat_map(|d| (group(d), group(d), group(d))), k_max in 1u32..=6) {
        let (fg, gh, fh) = (mg_distance(&f, &g, k_max), mg_distance(&g, &h, k_max), mg_distance(&f, &h, k_max));
        prop_assert!(fh <= fg.max(gh));
        prop_assert_eq!(fg, mg_distance(&g, &f, k_max));
        prop_assert_eq!(mg_distance(&f, &f, k_max), 0.0);
    }

    #[test]
    fn certificate_implies_agreement((g, y) in (2usize..=3).prop_flat_map(|d| (group(d), prop::collection::vec(-5i64..=5, d))), k in 1u32..=5) {
        let h = g.quotient(&[g.image(&y)]).unwrap();
        // Word length is the L1 norm, so a relation missing the word ball of
        // radius k has Euclidean norm above k / sqrt(d).
        if convergence_certificate(&g, &h, k).unwrap().is_some() {
            let d = g.marks() as f64;
            let j = ((k * k) as f64 / d).sqrt().floor() as u32;
            prop_assert!(agreement_radius(&g, &h, k).is_none_or(|r| r >= j));
        }
    }
}

#[test]
fn shifted_third_mark_converges_to_z3() {
    // marks S ∪ {(n,1)} on Z^2 approach Z^3 in the marked topology
    let limit = parse_group("3;").unwrap();
    let mut last = 1.0;
    for n in [1, 2, 4, 8] {
        let g = parse_group(&format!("[Z^2; (1,0), (0,1), ({n},1)]")).unwrap();
        let d = mg_distance(&g, &limit, 12);
        assert!(d <= last, "n={n}: {d} > {last}");
        last = d;
    }
    assert!(last < 0.5f64.powi(4));
}
