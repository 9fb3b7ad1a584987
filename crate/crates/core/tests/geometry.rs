use abelperc_core::cayley::CayleyView;
use abelperc_core::geometry::kappa::translate_count;
use abelperc_core::geometry::*;
use abelperc_core::marked_group::{parse_group, GroupElement};
use abelperc_core::percolation::window::box_elements;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reference() -> GoodQuadruple {
    GoodQuadruple { a: [5.0, -3.0], b: [5.0, 3.0], v: [5.0, 3.0] }
}

fn quadruples() -> Vec<GoodQuadruple> {
    vec![
        reference(),
        GoodQuadruple { a: [6.0, -2.0], b: [4.0, 5.0], v: [-1.0, 3.5] },
        GoodQuadruple { a: [3.0, -4.0], b: [3.0, 4.0], v: [0.0, 4.0] },
    ]
}

/// Brute-force distance from `p` to the segment, by dense sampling.
fn sampled_segment_distance(p: P2, a: P2, b: P2) -> f64 {
    (0..=20000)
        .map(|i| {
            let t = i as f64 / 20000.0;
            let q = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            (p[0] - q[0]).hypot(p[1] - q[1])
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn segment_graph_matches_sampled_distance() {
    let map = GraphMap::standard(parse_group("2;").unwrap()).unwrap();
    let (a, b) = ([-1.5, 0.3], [2.2, 1.7]);
    let set = PlanarSet::segment(a, b);
    for x in box_elements(map.group(), 5) {
        let p = [x.free[0] as f64, x.free[1] as f64];
        let sampled = sampled_segment_distance(p, a, b);
        if (sampled - 1.0).abs() > 1e-3 {
            assert_eq!(map.contains(&set, &x), sampled <= 1.0, "{x}");
        }
    }
}

#[test]
fn graph_of_is_monotone() {
    let map = GraphMap::standard(parse_group("[Z^2 x Z/2; (1,0,0), (0,1,0), (1,1,1)]").unwrap()).unwrap();
    let small = PlanarSet::segment([0.0, 0.0], [2.0, 1.0]);
    let large = PlanarSet::parallelogram([3.0, 1.5], [-1.0, 2.0]);
    for x in box_elements(map.group(), 6) {
        if map.contains(&small, &x) {
            assert!(map.contains(&large, &x));
        }
        let mut t = x.clone();
        t.tor[0] = 1 - t.tor[0];
        assert_eq!(map.contains(&large, &x), map.contains(&large, &t));
    }
}

fn random_path(view: &CayleyView, rng: &mut ChaCha8Rng, len: usize, start: GroupElement) -> Vec<GroupElement> {
    let mut path = vec![start];
    for _ in 0..len {
        let nb = view.neighbors(path.last().unwrap());
        path.push(nb[rng.random_range(0..nb.len())].clone());
    }
    path
}

#[test]
fn paths_leaving_a_graph_set_cross_its_boundary() {
    let groups = ["2;", "3; 1,1,-1", "[Z^2 x Z/3; (1,0,0), (0,1,0), (0,0,1)]", "3;"];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for (gi, gs) in groups.iter().enumerate() {
        let g = parse_group(gs).unwrap();
        let view = CayleyView::new(g.clone());
        let r = g.rank();
        let basis = if r == 3 { Basis::euler_zyz(0.4 * gi as f64, 0.7, 1.1, false) } else { Basis::planar(0.3 * gi as f64, gi % 2 == 1) };
        let map = GraphMap::new(g.clone(), basis).unwrap();
        while checked < 2500 * (gi + 1) {
            let set = match rng.random_range(0..3) {
                0 => {
                    let lo: f64 = rng.random_range(-4.0..0.0);
                    PlanarSet::rect((lo, lo + rng.random_range(0.5..4.0)), (f64::NEG_INFINITY, f64::INFINITY))
                }
                1 => PlanarSet::parallelogram([rng.random_range(1.5..5.0), rng.random_range(-2.0..2.0)], [rng.random_range(-2.0..2.0), rng.random_range(1.5..5.0)]),
                _ => PlanarSet::half_planes(vec![HalfPlane::new([rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)], rng.random_range(-2.0..2.0)).unwrap()]),
            };
            let mut start = g.zero();
            for c in start.free.iter_mut() {
                *c = rng.random_range(-3..=3);
            }
            let path = random_path(&view, &mut rng, 30, start);
            let inside = map.contains(&set, &path[0]);
            let Some(cut) = path.iter().position(|x| map.contains(&set, x) != inside) else { continue };
            let straddling = &path[..=cut];
            assert!(boundary_separation_check(&view, straddling, &set, &map).unwrap(), "{gs} {set}");
            checked += 1;
        }
    }
    assert_eq!(checked, 10_000);
}

#[test]
fn boundary_check_rejects_non_straddling_paths() {
    let g = parse_group("2;").unwrap();
    let view = CayleyView::new(g.clone());
    let map = GraphMap::standard(g.clone()).unwrap();
    let set = PlanarSet::rect((-5.0, 5.0), (-5.0, 5.0));
    let e = |a: i64, b: i64| GroupElement { free: vec![a, b], tor: vec![] };
    assert!(boundary_separation_check(&view, &[e(0, 0), e(1, 0)], &set, &map).is_err());
    assert!(boundary_separation_check(&view, &[e(0, 0), e(2, 0)], &set, &map).is_err());
    let half = PlanarSet::rect((f64::NEG_INFINITY, 0.0), (f64::NEG_INFINITY, f64::INFINITY));
    assert!(boundary_separation_check(&view, &[e(1, 0), e(2, 0)], &half, &map).unwrap());
}

#[test]
fn zones_split_and_sit_in_the_region() {
    for q in quadruples() {
        let map = GraphMap::standard(parse_group("2;").unwrap()).unwrap();
        let zones = q.zone_sets();
        let whole = PlanarSet::segment(q.a, q.b);
        let region = q.region_set();
        for x in box_elements(map.group(), 20) {
            let lab = map.contains(&whole, &x);
            assert_eq!(lab, map.contains(&zones[0], &x) || map.contains(&zones[1], &x));
            for z in &zones {
                if map.contains(z, &x) {
                    assert!(map.contains(&region, &x));
                }
            }
        }
    }
}

#[test]
fn chimney_boundary_is_lr_and_ud() {
    let g = parse_group("2;").unwrap();
    let view = CayleyView::new(g.clone());
    let map = GraphMap::standard(g.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ch = chimney_sets(6.0, 1.5, 3.0).unwrap();
    let sides = ch.lr.clone().union(ch.ud.clone());
    let mut seen = 0;
    while seen < 300 {
        let path = random_path(&view, &mut rng, 60, g.zero());
        let Some(cut) = path.iter().position(|x| !map.contains(&ch.c, x)) else { continue };
        assert!(path[..=cut].iter().any(|x| map.contains(&sides, x)));
        seen += 1;
    }
}

#[test]
fn ud_avoids_the_ball_above_ell_b() {
    let map = GraphMap::standard(parse_group("2;").unwrap()).unwrap();
    for k in [1.0, 2.0, 3.5] {
        let nb = n_b(&map, k);
        let ball: Vec<GroupElement> = box_elements(map.group(), 6).into_iter().filter(|x| map.in_ball(x, k)).collect();
        let far = PlanarSet::rect((-nb + 1.0, nb - 1.0), (-nb + 1.0, nb - 1.0));
        for x in &ball {
            assert!(far.boundary_distance(map.project(x)) > map.r_s());
        }
        for (n, h) in [(nb + 1.0, 0.0), (nb + 2.0, 3.0), (nb + 1.0, -5.0)] {
            let l = ell_b(n, h, nb) - 1.0;
            let ch = chimney_sets(n, h, l).unwrap();
            assert!(ball.iter().all(|x| !map.contains(&ch.ud, x)), "k={k} n={n} h={h}");
        }
    }
}

#[test]
fn chimney_central_symmetry() {
    let map = GraphMap::standard(parse_group("2;").unwrap()).unwrap();
    let up = chimney_sets(7.0, 2.0, 3.0).unwrap();
    let down = chimney_sets(7.0, -2.0, 3.0).unwrap();
    for x in box_elements(map.group(), 12) {
        let mirrored = GroupElement { free: vec![x.free[0], -x.free[1]], tor: vec![] };
        assert_eq!(map.contains(&up.lr, &x), map.contains(&down.lr, &mirrored));
        assert_eq!(map.contains(&up.ud, &x), map.contains(&down.ud, &mirrored));
    }
}

fn brute_inflated(map: &GraphMap, set: &PlanarSet, x: &GroupElement) -> bool {
    box_elements(map.group(), 2).iter().any(|d| {
        let n2: i64 = d.free.iter().map(|c| c * c).sum();
        (n2 as f64) <= map.r_s() * map.r_s() + 1e-9 && {
            let y = GroupElement { free: x.free.iter().zip(&d.free).map(|(a, b)| a + b).collect(), tor: x.tor.clone() };
            map.contains(set, &y)
        }
    })
}

#[test]
fn basis_perturbation_inclusion_inside_certified_neighbourhood() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for gs in ["2;", "3; 1,1,-1"] {
        let g = parse_group(gs).unwrap();
        let e = Basis::standard(2);
        let map_e = GraphMap::new(g.clone(), e.clone()).unwrap();
        for _ in 0..8 {
            let set = PlanarSet::segment([rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)], [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]);
            let n = 6.0;
            let eps = neighbourhood_radius(&map_e, &set, n);
            assert!(eps > 0.0);
            // rotations with 2 sin(t/2) <= eps
            let t = 2.0 * (eps / 2.0).asin() * rng.random_range(0.0..1.0);
            let f = Basis::planar(if rng.random_bool(0.5) { t } else { -t }, false);
            assert!(e.op_distance(&f) <= eps + 1e-12);
            let map_f = GraphMap::new(g.clone(), f).unwrap();
            for x in box_elements(&g, 8) {
                if map_e.in_ball(&x, n) && map_e.contains(&set, &x) {
                    assert!(map_f.in_inflated(&set, &x), "{gs} {set} {x}");
                    assert!(brute_inflated(&map_f, &set, &x));
                }
            }
        }
    }
}

#[test]
fn graph_membership_passes_to_the_quotient() {
    let cases: Vec<(&str, Vec<i64>)> = vec![("3;", vec![0, 0, 4]), ("3;", vec![1, 1, 0]), ("3;", vec![2, -1, 3])];
    for (gs, l) in cases {
        let g = parse_group(gs).unwrap();
        let lambda = vec![GroupElement { free: l.clone(), tor: vec![] }];
        let layout = RenormLayout::aligned(g.clone(), lambda, reference(), 1).unwrap();
        let map = GraphMap::new(g.clone(), layout.basis().clone()).unwrap();
        let sets = [PlanarSet::segment([0.5, -1.0], [3.0, 2.0]), reference().parallelogram(1.0).translate([2.0, -1.0])];
        for x in box_elements(&g, 4) {
            let xbar = layout.quotient_map(&x);
            for s in &sets {
                let up = map.contains(s, &x);
                let down = s.distance(layout.project(&xbar)) <= g.r_s() + 1e-9;
                assert_eq!(up, down, "{l:?} {x}");
            }
        }
    }
}

#[test]
fn kappa_bounds_corridor_overlap() {
    let g = parse_group("3;").unwrap();
    let lambda = vec![GroupElement { free: vec![0, 0, 4], tor: vec![] }];
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for q in quadruples() {
        let k = kappa(&q);
        let layout = RenormLayout::aligned(g.clone(), lambda.clone(), q, 12).unwrap();
        let h = layout.group().clone();
        let mut worst = 0;
        for _ in 0..10_000 {
            let x = GroupElement { free: vec![rng.random_range(-25..=25), rng.random_range(-25..=25)], tor: vec![rng.random_range(0..4)] };
            let count = layout.corridors_containing(&x).len() as u32;
            worst = worst.max(count);
            assert!(count <= k, "{q}: {count} > {k}");
        }
        assert!(h.rank() == 2 && worst > 0);
    }
}

#[test]
fn kappa_dominates_brute_force_translates() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for q in quadruples() {
        let report = kappa_report(&q);
        assert!(report.exact);
        let (u, v) = (q.u(), q.v);
        let mut best = 0;
        for _ in 0..4000 {
            let (s, t): (f64, f64) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            let w = [s * u[0] + t * v[0], s * u[1] + t * v[1]];
            best = best.max(translate_count(&q, w, 40));
        }
        // The maximum can sit on a measure-zero set of translates (closed
        // parallelograms), so random translates only give a lower bound.
        assert!(best <= report.kappa && best >= 100, "{q}: sampled {best} vs {}", report.kappa);
        assert_eq!(translate_count(&q, report.witness, 40), report.kappa);
    }
}

#[test]
fn reference_kappa_is_frozen() {
    assert_eq!(kappa(&reference()), 121);
}

#[test]
fn boxes_are_translates_and_separate() {
    let g = parse_group("3;").unwrap();
    let lambda = vec![GroupElement { free: vec![0, 0, 4], tor: vec![] }];
    let layout = RenormLayout::aligned(g, lambda, reference(), 6).unwrap();
    let h = layout.group().clone();
    let pts = layout.window_elements().unwrap();
    let (b00, c00) = layout.boxes_corridors([0, 0]);
    let (b_far, _) = layout.boxes_corridors([3, 0]);
    let (b12, _) = layout.boxes_corridors([1, 2]);
    // w = (1, 2) shifts planar images by u + 2v = (15, 6) = free (15, 6)
    let shift = GroupElement { free: vec![15, 6], tor: vec![0] };
    for x in &pts {
        assert!(!(b00(x) && b_far(x)));
        if b00(x) {
            assert!(c00(x));
        }
        assert_eq!(b00(x), b12(&h.add(x, &shift)));
    }
}

fn is_good(q: &GoodQuadruple) -> bool {
    q.check(1.0).0
}

proptest! {
    #[test]
    fn good_quadruple_rotation_invariance(
        ax in -8.0f64..8.0, ay in -8.0f64..8.0, bx in -8.0f64..8.0, by in -8.0f64..8.0,
        t in 0.0f64..1.0, theta in -3.2f64..3.2,
    ) {
        let v = [(1.0 - t) * -ax + t * bx, (1.0 - t) * -ay + t * by];
        let q = GoodQuadruple { a: [ax, ay], b: [bx, by], v };
        let (ok, d) = q.check(1.0);
        let rotated = q.rotate(theta);
        let (ok_r, d_r) = rotated.check(1.0);
        if d.disk_margin.abs() > 1e-6 {
            prop_assert_eq!(ok, ok_r);
        }
        prop_assert!((d.disk_margin - d_r.disk_margin).abs() < 1e-9);
        prop_assert_eq!(is_good(&q), ok);
    }

    #[test]
    fn planar_literals_round_trip(ax in -9.0f64..9.0, ay in -9.0f64..9.0, bx in -9.0f64..9.0, by in -9.0f64..9.0, s in 0.5f64..4.0) {
        let set = PlanarSet::scaled_parallelogram([ax, ay], [bx, by], s).union(PlanarSet::segment([ax, by], [bx, ay]));
        let back: PlanarSet = set.to_string().parse().unwrap();
        prop_assert_eq!(back, set);
    }
}
