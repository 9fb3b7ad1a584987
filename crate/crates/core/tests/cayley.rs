use abelperc_core::cayley::{bs_agreement_radius, rooted_isomorphic, CayleyView, RootedBall, DEFAULT_VERTEX_BUDGET};
use abelperc_core::lattice::IntegerLattice;
use abelperc_core::marked_group::{convergence_certificate, parse_group, MarkedAbelianGroup};
use proptest::prelude::*;

fn group(d: usize) -> impl Strategy<Value = MarkedAbelianGroup> {
    prop::collection::vec(prop::collection::vec(-4i64..=4, d), 0..=d)
        .prop_map(move |g| MarkedAbelianGroup::from_subgroup(d, &IntegerLattice::from_i64(d, &g).unwrap()).unwrap())
}

fn view(s: &str) -> CayleyView {
    CayleyView::new(parse_group(s).unwrap())
}

#[test]
fn free_ball_sizes_match_closed_forms() {
    let (z2, z3) = (view("2;"), view("3;"));
    for k in 0..=8u64 {
        let b2 = z2.word_ball(k as u32).unwrap();
        assert_eq!(b2.len() as u64, 2 * k * k + 2 * k + 1, "Z^2 k={k}");
        let b3 = z3.word_ball(k as u32).unwrap();
        assert_eq!(b3.len() as u64, (2 * k + 1) * (2 * k * k + 2 * k + 3) / 3, "Z^3 k={k}");
    }
}

#[test]
fn triangular_ball_sizes_are_centred_hexagonal() {
    let t = view("3; 1,1,-1");
    for k in 0..=8usize {
        assert_eq!(t.word_ball(k as u32).unwrap().len(), 3 * k * k + 3 * k + 1);
    }
}

#[test]
fn triangular_unit_ball_is_a_wheel() {
    let golden = "\
# rooted-ball v1
radius 1
vertices 7
0: 1 2 3 4 5 6
1: 0 4 5
2: 0 3 6
3: 0 2 5
4: 0 1 6
5: 0 1 3
6: 0 2 4
";
    let ball = view("3; 1,1,-1").word_ball(1).unwrap();
    assert_eq!(ball.to_text(), golden);
    let back = RootedBall::from_text(golden).unwrap();
    assert_eq!(back.adjacency, ball.adjacency);
    assert_eq!(back.edge_count(), 12);
}

#[test]
fn even_radius_certificate_does_not_give_half_radius_balls() {
    // Z^2 against Z^2/<(0,3)>: no relation of word length <= 2, yet (0,1)
    // and (0,-1) become adjacent, so the unit balls already differ.
    let g = parse_group("2;").unwrap();
    let h = parse_group("2; 0,3").unwrap();
    assert!(convergence_certificate(&g, &h, 2).unwrap().is_some());
    assert_eq!(bs_agreement_radius(&g, &h, 4).unwrap(), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn balls_look_the_same_from_every_vertex(g in (1usize..=3).prop_flat_map(group), y in prop::collection::vec(-6i64..=6, 3), k in 1u32..=3) {
        let v = CayleyView::new(g.clone());
        let root = g.image(&y[..g.marks()]);
        let at_zero = v.word_ball(k).unwrap();
        let at_root = v.word_ball_at(&root, k, DEFAULT_VERTEX_BUDGET).unwrap();
        prop_assert_eq!(at_zero.len(), at_root.len());
        prop_assert_eq!(&at_zero.dist, &at_root.dist);
        prop_assert!(rooted_isomorphic(&at_zero, &at_root).unwrap());
        for (a, b) in at_zero.elements.iter().zip(&at_root.elements) {
            prop_assert_eq!(&g.add(a, &root), b);
        }
    }

    #[test]
    fn certificate_gives_isomorphic_balls_below_half_radius((g, y) in (2usize..=3).prop_flat_map(|d| (group(d), prop::collection::vec(-5i64..=5, d))), k in 1u32..=6) {
        let h = g.quotient(&[g.image(&y)]).unwrap();
        if convergence_certificate(&g, &h, k).unwrap().is_some() {
            let j = (k - 1) / 2;
            prop_assert!(bs_agreement_radius(&g, &h, j.max(1)).unwrap() >= j);
        }
    }

    #[test]
    fn text_round_trip(g in (1usize..=3).prop_flat_map(group), k in 0u32..=3) {
        let ball = CayleyView::new(g).word_ball(k).unwrap();
        let back = RootedBall::from_text(&ball.to_text()).unwrap();
        prop_assert_eq!(back.radius, ball.radius);
        prop_assert_eq!(&back.adjacency, &ball.adjacency);
        prop_assert!(rooted_isomorphic(&back, &ball).unwrap());
    }
}
