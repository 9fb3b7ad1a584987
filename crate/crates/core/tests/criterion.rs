use abelperc_core::cayley::CayleyView;
use abelperc_core::criterion::search::ELL_RESOLUTION;
use abelperc_core::criterion::*;
use abelperc_core::geometry::*;
use abelperc_core::marked_group::{parse_group, GroupElement, MarkedAbelianGroup};
use abelperc_core::percolation::DEFAULT_SAW_CAP;
use abelperc_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reference() -> GoodQuadruple {
    GoodQuadruple { a: [5.0, -3.0], b: [5.0, 3.0], v: [5.0, 3.0] }
}

fn z2() -> MarkedAbelianGroup {
    parse_group("2;").unwrap()
}

fn params(p: f64, eta: f64, m: usize) -> FCParams {
    let q = reference();
    let n = auto_n(&q, 1.0, m);
    FCParams { p, n, eta, m, basis: Basis::standard(2), quadruple: q, estimates: None }
}

fn z3_layout(window: i64) -> RenormLayout {
    let lambda = vec![GroupElement { free: vec![0, 0, 4], tor: vec![] }];
    RenormLayout::aligned(parse_group("3;").unwrap(), lambda, reference(), window).unwrap()
}

#[test]
fn fc_check_extremes() {
    let g = z2();
    let (ok, r) = fc_check(&g, &params(1.0, 0.05, 2), 300, 1).unwrap();
    assert!(ok, "{}", r.summary());
    assert!(r.zones.iter().all(|z| z.successes == z.trials));
    let (ok, r) = fc_check(&g, &params(0.0, 0.05, 2), 300, 1).unwrap();
    assert!(!ok);
    assert!(r.zones.iter().all(|z| z.successes == 0));
}

#[test]
fn fc_check_rejects_bad_input() {
    assert!(matches!(fc_check(&parse_group("1;").unwrap(), &params(0.9, 0.1, 2), 10, 1), Err(Error::RankTooSmall { .. })));
    let mut bad = params(0.9, 0.1, 2);
    bad.m = bad.n as usize;
    assert!(fc_check(&z2(), &bad, 10, 1).is_err());
    let mut bad = params(0.9, 0.1, 2);
    bad.quadruple = GoodQuadruple { a: [1.0, 0.0], b: [0.0, 1.0], v: [0.0, 1.0] };
    assert!(fc_check(&z2(), &bad, 10, 1).is_err());
}

#[test]
fn fc_check_passes_supercritical_z2() {
    let (ok, r) = fc_check(&z2(), &params(0.75, 0.2, 2), 10_000, 20_240_901).unwrap();
    assert!(ok, "{}", r.summary());
    assert!(!r.saw_truncated && r.paths > 0);
    assert!(r.certified_eta() < 0.2);
}

#[test]
fn fc_witness_reverifies_from_text() {
    let g = z2();
    let (ok, r) = fc_check(&g, &params(0.8, 0.2, 2), 2000, 5).unwrap();
    assert!(ok);
    let text = params(0.8, 0.2, 2).with_report(&r).to_text(&g);
    assert!(text.starts_with(FC_HEADER));
    let (g2, p2) = FCParams::from_text(&text).unwrap();
    assert_eq!(g2.key(), g.key());
    assert_eq!(p2.estimates.as_ref().unwrap()[r.worst_zone].successes, r.zones[r.worst_zone].successes);
    let (ok2, _) = fc_check(&g2, &p2, 2000, 6).unwrap();
    assert!(ok2);
}

#[test]
fn fc_check_is_deterministic_across_thread_counts() {
    let g = z2();
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| fc_check(&g, &params(0.7, 0.3, 2), 1500, 9).unwrap().1)
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.zones, b.zones);
    assert_eq!(a.trials_run, b.trials_run);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]
    #[test]
    fn fc_is_monotone_in_p(p in 0.3f64..0.9, dp in 0.0f64..0.1, seed in 0u64..1000) {
        let q = reference();
        let inst = FcInstance::new(&z2(), &Basis::standard(2), &q, auto_n(&q, 1.0, 2), 2, DEFAULT_SAW_CAP).unwrap();
        let key = fc_stream(seed);
        let lo = inst.run_with_stop(p, 0.2, 300, key, false);
        let hi = inst.run_with_stop(p + dp, 0.2, 300, key, false);
        for z in 0..4 {
            prop_assert!(hi.zones[z].successes >= lo.zones[z].successes);
        }
        prop_assert!(!lo.pass || hi.pass);
    }
}

#[test]
fn fc_search_rejects_rank_one() {
    let r = fc_search(&parse_group("1;").unwrap(), 0.9, 0.1, &SearchSettings::default(), 1);
    assert!(matches!(r, Err(Error::RankTooSmall { rank: 1 })));
}

#[test]
fn fc_search_fails_early_when_subcritical() {
    let s = SearchSettings { trials: 600, ..SearchSettings::default() };
    let r = fc_search(&z2(), 0.3, 0.1, &s, 17).unwrap();
    assert!(r.params.is_none());
    assert!(matches!(r.stage, SearchStage::PathLength | SearchStage::SeedBall), "{:?}", r.stage);
    assert!(r.failure.is_some());
}

#[test]
fn fc_search_finds_a_witness_on_supercritical_z2() {
    let r = fc_search(&z2(), 0.8, 0.1, &SearchSettings::default(), 42).unwrap();
    let params = r.params.expect("witness");
    assert_eq!(r.stage, SearchStage::Done);
    // Both chimney sides connect almost surely at p = 0.8.
    assert!(r.log.iter().any(|s| s.stage == SearchStage::Balance && s.what.contains("saturated")));
    let (g, reread) = FCParams::from_text(&params.to_text(&z2())).unwrap();
    let (ok, report) = fc_check(&g, &reread, 4000, 1_000_003).unwrap();
    assert!(ok, "{}", report.summary());
}

#[test]
fn ell_eq_orders_at_bottom_and_top() {
    let g = z2();
    let map = GraphMap::standard(g.clone()).unwrap();
    let nb = n_b(&map, 1.0);
    let n = 3.0 * nb;
    let e = ell_eq_estimate(&g, &Basis::standard(2), 1.0, n, 0.0, nb, 0.55, 2000, 3).unwrap();
    assert_eq!(e.bottom, Dominance::UpDown);
    assert_eq!(e.top, Dominance::LeftRight);
    assert!(e.bracket.0 < e.bracket.1);
    let hat = e.ell_hat.unwrap();
    assert!(hat >= e.ell_b - 1.0 && hat <= e.bracket.1 + 1e-9);
}

#[test]
fn p_zero_scan_oracle() {
    // rate 0.01 with kappa = 10 and delta = 0.1
    let (p, eta) = (0.6, 1e-6);
    let r = p_zero(p, 0.1, 10, eta).unwrap();
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
    for t in 1..=2000u64 {
        let f = 1.0 - 0.99f64.powi(t as i32) - eta * (1.0 - p).powf(-(t as f64));
        if f > best {
            best = f;
            arg = t;
        }
    }
    assert_eq!(r.t_star, Some(arg));
    assert!((r.p0 - best).abs() < 1e-12);
    // marginal balance near the peak
    let gain = 0.99f64.powi(arg as i32) * 0.01;
    let cost = eta * (1.0 - p).powf(-(arg as f64)) * (1.0f64 / (1.0 - p)).ln();
    assert!(gain / cost > 0.3 && gain / cost < 3.0);
    assert_eq!(p_zero(0.5, 1.0, 2, 0.0).unwrap().p0, 1.0);
}

fn explorer(window: i64) -> Explorer {
    Explorer::new(z3_layout(window), 2).unwrap()
}

#[test]
fn explore_extremes() {
    let (state, x) = explore(z3_layout(2), 1.0, 0.05, 2, 1).unwrap();
    assert!(!x.is_empty());
    assert!(x.values().all(|&b| b));
    assert!(state.window_exhausted);
    let (state, x) = explore(z3_layout(2), 0.0, 0.0, 2, 1).unwrap();
    assert_eq!(x.get(&[0, 0]), Some(&false));
    assert_eq!(x.len(), 1);
    assert!(state.u.is_empty() && !state.window_exhausted);
}

#[test]
fn explore_replays_and_respects_sprinkle_budget() {
    let ex = explorer(2);
    let rate = SprinkleParams::new(0.05, ex.kappa()).unwrap().rate();
    for run in 0..6 {
        let s = ex.run(0.65, rate, 77, run, TieBreak::Lexicographic);
        assert!(s.max_sprinkles_per_edge <= ex.kappa());
        let mut seen = std::collections::HashSet::new();
        assert!(s.sprinkle_log.iter().all(|z| seen.insert(*z)));
        let (config, uses) = ex.replay(&s, 0.65, rate, 77, run);
        assert_eq!(config, s.config);
        assert!(uses.iter().all(|&u| u <= ex.kappa()));
        assert!(ex.verify_soundness(&s));
        for w in s.steps.windows(2) {
            assert!(w[1].cluster_size >= w[0].cluster_size);
            assert_eq!(w[1].t, w[0].t + 1);
        }
    }
}

#[test]
fn explore_is_order_robust() {
    let ex = explorer(2);
    let rate = SprinkleParams::new(0.05, ex.kappa()).unwrap().rate();
    let freq = |rule| {
        let (mut hit, mut n) = (0u64, 0u64);
        for run in 0..60 {
            let s = ex.run(0.65, rate, 11, run, rule);
            for st in s.steps.iter().skip(1) {
                n += 1;
                hit += st.x as u64;
            }
        }
        (hit, n)
    };
    let (h1, n1) = freq(TieBreak::Lexicographic);
    let (h2, n2) = freq(TieBreak::ClosestToOrigin);
    let (p1, p2) = (h1 as f64 / n1 as f64, h2 as f64 / n2 as f64);
    let se = (p1 * (1.0 - p1) / n1 as f64 + p2 * (1.0 - p2) / n2 as f64).sqrt();
    assert!((p1 - p2).abs() <= 3.0 * se + 1e-9, "{p1} vs {p2}");
}

#[test]
fn conditional_stats_need_thirty_runs() {
    let ex = explorer(1);
    let rate = SprinkleParams::new(0.05, ex.kappa()).unwrap().rate();
    let runs: Vec<_> = (0..29).map(|r| ex.run(1.0, rate, 2, r, TieBreak::Lexicographic)).collect();
    assert!(conditional_success_stats(&runs).is_err());
    let runs: Vec<_> = (0..30).map(|r| ex.run(1.0, rate, 2, r, TieBreak::Lexicographic)).collect();
    let rows = conditional_success_stats(&runs).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.freq == 1.0));
}

/// Some zone or its mirror image, translated by any vertex of `B_z` whose
/// projection lies in the planar box, lands in `B_{z'} + B(1)`. Mirror images are allowed because `S(m)` and the
/// region are centrally symmetric, so the estimates cover `-Z` as well.
#[test]
fn zones_translate_into_neighbouring_boxes() {
    let layout = z3_layout(3);
    let h = layout.group().clone();
    let view = CayleyView::new(h.clone());
    let q = reference();
    let inst = FcInstance::new(layout.base(), layout.basis(), &q, auto_n(&q, layout.r_s(), 2), 2, DEFAULT_SAW_CAP).unwrap();
    let mut zones: Vec<Vec<GroupElement>> =
        (0..4).map(|z| inst.zone(z).iter().map(|&i| layout.quotient_map(inst.window().vertex(i))).collect()).collect();
    zones.extend(zones.clone().into_iter().map(|z| z.iter().map(|y| h.neg(y)).collect::<Vec<_>>()));
    let near = |x: &GroupElement, z: [i64; 2]| layout.in_box(x, z) || view.neighbors(x).iter().any(|y| layout.in_box(y, z));
    let core = layout.box_set([0, 0]);
    let pts: Vec<GroupElement> =
        layout.window_elements().unwrap().into_iter().filter(|x| core.distance(layout.project(x)) <= 1e-9).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..60 {
        let x = &pts[rng.random_range(0..pts.len())];
        for dz in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
            let ok = zones.iter().any(|zone| zone.iter().all(|y| near(&h.add(x, y), dz)));
            assert!(ok, "{x} toward {dz:?}");
        }
    }
    // Vertices in the R_S fringe of the box can miss every zone.
    let fringe = GroupElement { free: vec![-6, 0], tor: vec![0] };
    assert!(layout.in_box(&fringe, [0, 0]));
    assert!(!zones.iter().any(|zone| zone.iter().all(|y| near(&h.add(&fringe, y), [1, 0]))));
}

#[test]
fn renorm_p_zero_gate_constant() {
    assert!(SITE_PC_Z2 > 0.59 && SITE_PC_Z2 < 0.6);
    let k = kappa(&reference());
    let d = omega_total_domination_check(0.65, 0.0, k);
    assert!((d.value - 0.65).abs() < 1e-15 && d.margin.abs() < 1e-15);
}
