//! Empirical search for an `FC(p, N, eta)` witness, following the
//! constructive proof: path length `m`, seed ball `B(k)`, uniqueness radius
//! `n`, balanced chimneys `C(n, h, l)`, zone splitting, then a final check.
//!
//! Every probability below is a Monte Carlo estimate on a finite window, so
//! the stage thresholds are heuristics; only the final [`fc_check`] verdict
//! is a statement with a confidence bound.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use super::fc::{auto_n, fc_stream, FCParams, FcInstance, FcReport};
use crate::cayley::CayleyView;
use crate::error::{Error, Result};
use crate::geometry::planar::{add, dot, norm, scale, sub};
use crate::geometry::{chimney_sets, ell_b, n_b, Basis, GoodQuadruple, GraphMap, PlanarSet, P2, TOL};
use crate::marked_group::{GroupElement, MarkedAbelianGroup};
use crate::percolation::rng::unit;
use crate::percolation::window::{box_elements, geometric_ball_elements};
use crate::percolation::{
    enumerate_saw_capped, estimate, wilson, BoundaryRule, Clusters, EdgeWindow, StreamKey, UnionFind, VertexSet, DEFAULT_SAW_CAP, Z95,
};

#[derive(Clone, Debug, Serialize)]
pub struct SearchSettings {
    /// Trials per staging estimate.
    pub trials: u64,
    /// Trials of the final check.
    pub check_trials: u64,
    /// Radius `K` of the window standing in for "connected to infinity".
    pub k_window: f64,
    /// Stage (2) asks for `P[B(k) <-> boundary] > 1 - eta^ladder_exponent`.
    pub ladder_exponent: i32,
    pub m_max: usize,
    pub k_max: usize,
    pub n_max: usize,
    /// Number of `h` values scanned when minimising `l_eq(h)`.
    pub h_points: usize,
    /// Extra chimney widths tried when the bottom comparison is not decisive.
    pub width_tries: usize,
    pub saw_cap: usize,
    /// Half-width of the window in the directions of `Ker(pi_e)` (rank > 2 only).
    pub kernel_width: Option<f64>,
    pub basis: Option<Basis>,
    #[serde(skip)]
    pub budget: Duration,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            trials: 2000,
            check_trials: 10_000,
            k_window: 20.0,
            ladder_exponent: 2,
            m_max: 10,
            k_max: 16,
            n_max: 40,
            h_points: 5,
            width_tries: 4,
            saw_cap: DEFAULT_SAW_CAP,
            kernel_width: None,
            basis: None,
            budget: Duration::from_secs(20 * 60),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum SearchStage {
    PathLength,
    SeedBall,
    Uniqueness,
    Balance,
    Split,
    Check,
    Done,
}

impl SearchStage {
    pub fn label(&self) -> &'static str {
        match self {
            SearchStage::PathLength => "1-path-length",
            SearchStage::SeedBall => "2-seed-ball",
            SearchStage::Uniqueness => "3-uniqueness",
            SearchStage::Balance => "4-balance",
            SearchStage::Split => "5-split",
            SearchStage::Check => "6-check",
            SearchStage::Done => "done",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageRecord {
    pub stage: SearchStage,
    pub what: String,
    pub value: f64,
    pub estimate: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub params: Option<FCParams>,
    /// The stage that succeeded last (or `Done`).
    pub stage: SearchStage,
    pub failure: Option<String>,
    pub log: Vec<StageRecord>,
    pub check: Option<FcReport>,
}

/// Which of the two chimney connection probabilities is larger, decided by
/// non-overlapping Wilson intervals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Dominance {
    UpDown,
    LeftRight,
    Tie,
}

#[derive(Clone, Debug, Serialize)]
pub struct EllEqEstimate {
    /// Point-estimate crossover inside the bracket; `None` when no flip was found.
    pub ell_hat: Option<f64>,
    /// Last `l` where up-down dominated and first `l` where left-right did.
    pub bracket: (f64, f64),
    pub ell_b: f64,
    pub bottom: Dominance,
    pub top: Dominance,
    /// Both connection probabilities at `l_B` sit above the saturation level,
    /// so no crossover is resolvable and `ell_hat` is `l_B` itself.
    pub saturated: bool,
    /// `(l, P[A <-> UD], P[A <-> LR])` for every evaluated `l`, sorted by `l`.
    pub samples: Vec<(f64, f64, f64)>,
}

/// Resolution of the `l` bisections.
pub const ELL_RESOLUTION: f64 = 1.0 / 24.0;

/// Shared-uniform sampler on a finite window around `pi_e^{-1}` of a disk:
/// trial `t` opens the same edges whatever region it is restricted to.
pub struct RegionSampler {
    window: EdgeWindow,
    map: GraphMap,
    p: f64,
    key: StreamKey,
    trials: u64,
    projections: Vec<P2>,
}

impl RegionSampler {
    /// Window `|pi_e x| <= reach`, and `|x - pi_e x| <= kernel_width` when the rank exceeds 2.
    pub fn new(map: GraphMap, reach: f64, kernel_width: f64, p: f64, trials: u64, key: StreamKey) -> Result<Self> {
        let g = map.group();
        let side = (reach * reach + kernel_width * kernel_width).sqrt().floor() as i64 + 1;
        let verts: Vec<GroupElement> = box_elements(g, side)
            .into_iter()
            .filter(|x| {
                let pr = norm(map.project(x));
                let n2: i64 = x.free.iter().map(|c| c * c).sum();
                pr <= reach && (n2 as f64 - pr * pr).max(0.0) <= kernel_width * kernel_width + TOL
            })
            .collect();
        let view = CayleyView::new(g.clone());
        let window = EdgeWindow::from_vertices(&view, verts, BoundaryRule::Empty)?;
        let projections = window.vertices().iter().map(|x| map.project(x)).collect();
        Ok(RegionSampler { window, map, p, key, trials, projections })
    }

    pub fn window(&self) -> &EdgeWindow {
        &self.window
    }

    /// Indices of window vertices in `Graph(set)`.
    pub fn graph(&self, set: &PlanarSet) -> Vec<u32> {
        let r = self.map.r_s() + TOL;
        (0..self.window.vertex_count() as u32).filter(|&i| set.distance(self.projections[i as usize]) <= r).collect()
    }

    pub fn ball(&self, k: f64) -> Vec<u32> {
        (0..self.window.vertex_count() as u32).filter(|&i| self.map.in_ball(self.window.vertex(i), k)).collect()
    }

    /// Runs `f` on every trial with clusters restricted to `region`, in trial order.
    pub fn map_trials<T: Send>(&self, region: &[u32], f: impl Fn(&mut UnionFind) -> T + Sync) -> Vec<T> {
        let n = self.window.vertex_count();
        let mut mask = vec![false; n];
        for &v in region {
            mask[v as usize] = true;
        }
        let edges: Vec<u32> =
            (0..self.window.edge_count() as u32).filter(|&e| { let (a, b) = self.window.edges()[e as usize]; mask[a as usize] && mask[b as usize] }).collect();
        (0..self.trials)
            .into_par_iter()
            .map_init(
                || (vec![0u32; self.window.edge_count()], UnionFind::new(n)),
                |(u, uf), t| {
                    self.key.fill_uniforms(t, u);
                    uf.reset();
                    for &e in &edges {
                        if unit(u[e as usize]) < self.p {
                            let (a, b) = self.window.edges()[e as usize];
                            uf.union(a, b);
                        }
                    }
                    f(uf)
                },
            )
            .collect()
    }
}

fn roots(uf: &mut UnionFind, set: &[u32]) -> Vec<u32> {
    let mut r: Vec<u32> = set.iter().map(|&v| uf.find(v)).collect();
    r.sort_unstable();
    r.dedup();
    r
}

fn hits(uf: &mut UnionFind, a_roots: &[u32], target: &[u32]) -> bool {
    target.iter().any(|&v| a_roots.binary_search(&uf.find(v)).is_ok())
}

fn dominance(ud: u64, lr: u64, trials: u64) -> Dominance {
    let (ud_lo, ud_hi) = wilson(ud, trials, Z95);
    let (lr_lo, lr_hi) = wilson(lr, trials, Z95);
    if ud_lo > lr_hi {
        Dominance::UpDown
    } else if lr_lo > ud_hi {
        Dominance::LeftRight
    } else {
        Dominance::Tie
    }
}

struct Chimneys<'s> {
    sampler: &'s RegionSampler,
    a: Vec<u32>,
    n: f64,
    h: f64,
    cache: HashMap<u64, (u64, u64)>,
}

impl Chimneys<'_> {
    /// `(#A <-> UD, #A <-> LR)` inside `C(n, h, l)`.
    fn counts(&mut self, l: f64) -> Result<(u64, u64)> {
        if let Some(c) = self.cache.get(&l.to_bits()) {
            return Ok(*c);
        }
        let ch = chimney_sets(self.n, self.h, l)?;
        let region = self.sampler.graph(&ch.c);
        let ud = self.sampler.graph(&ch.ud);
        let lr = self.sampler.graph(&ch.lr);
        let a = &self.a;
        let res = self.sampler.map_trials(&region, |uf| {
            let ar = roots(uf, a);
            (hits(uf, &ar, &ud), hits(uf, &ar, &lr))
        });
        let c = (res.iter().filter(|r| r.0).count() as u64, res.iter().filter(|r| r.1).count() as u64);
        self.cache.insert(l.to_bits(), c);
        Ok(c)
    }

    fn compare(&mut self, l: f64) -> Result<Dominance> {
        let (ud, lr) = self.counts(l)?;
        Ok(dominance(ud, lr, self.sampler.trials))
    }

    fn samples(&self) -> Vec<(f64, f64, f64)> {
        let t = self.sampler.trials as f64;
        let mut v: Vec<(f64, f64, f64)> = self.cache.iter().map(|(k, c)| (f64::from_bits(*k), c.0 as f64 / t, c.1 as f64 / t)).collect();
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        v
    }
}

/// Largest `l` in `[lo, hi]` (to `ELL_RESOLUTION`) where `pred` still holds,
/// assuming it holds at `lo`.
fn bisect_last(lo: f64, hi: f64, mut pred: impl FnMut(f64) -> Result<bool>) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    while b - a > ELL_RESOLUTION {
        let mid = 0.5 * (a + b);
        if pred(mid)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(a)
}

fn ell_eq_on(ch: &mut Chimneys<'_>, n_b_val: f64, l_cap: f64, saturation: Option<f64>) -> Result<EllEqEstimate> {
    let lb = ell_b(ch.n, ch.h, n_b_val);
    let bottom = ch.compare(lb)?;
    let mut out =
        EllEqEstimate { ell_hat: None, bracket: (lb - 1.0, f64::INFINITY), ell_b: lb, bottom, top: Dominance::Tie, saturated: false, samples: Vec::new() };
    if bottom != Dominance::UpDown {
        if let (Dominance::Tie, Some(level)) = (bottom, saturation) {
            let (ud, lr) = ch.counts(lb)?;
            let t = ch.sampler.trials;
            if wilson(ud, t, Z95).0 > level && wilson(lr, t, Z95).0 > level {
                out.ell_hat = Some(lb);
                out.bracket = (lb, lb);
                out.saturated = true;
            }
        }
        out.samples = ch.samples();
        return Ok(out);
    }
    // Grow until left-right dominates.
    let mut hi = lb;
    let mut step = 1.0f64.max(lb / 4.0);
    let mut top = Dominance::UpDown;
    while hi < l_cap {
        hi = (hi + step).min(l_cap);
        step *= 2.0;
        top = ch.compare(hi)?;
        if top == Dominance::LeftRight {
            break;
        }
    }
    out.top = top;
    if top != Dominance::LeftRight {
        out.bracket = (lb, f64::INFINITY);
        out.samples = ch.samples();
        return Ok(out);
    }
    let last_ud = bisect_last(lb, hi, |l| Ok(ch.compare(l)? == Dominance::UpDown))?;
    let first_lr = {
        let last_not_lr = bisect_last(last_ud, hi, |l| Ok(ch.compare(l)? != Dominance::LeftRight))?;
        (last_not_lr + ELL_RESOLUTION).min(hi)
    };
    let (lo_b, hi_b) = (last_ud.min(first_lr), last_ud.max(first_lr));
    let hat = bisect_last(lo_b, hi_b, |l| {
        let (ud, lr) = ch.counts(l)?;
        Ok(ud >= lr)
    })?;
    out.bracket = (lo_b, hi_b);
    out.ell_hat = Some(hat);
    out.samples = ch.samples();
    Ok(out)
}

/// Default upper end of the `l` range searched for the crossover.
pub fn ell_cap(n: f64, h: f64, n_b_val: f64) -> f64 {
    ell_b(n, h, n_b_val) + 3.0 * (n + h.abs())
}

fn chimney_reach(n: f64, h: f64, l: f64, r_s: f64) -> f64 {
    n.hypot(h.abs() + l) + r_s + 1.0
}

/// Brackets `l_eq(h)`, the last `l >= l_B(n, h) - 1` at which
/// `P[A <-> UD inside C(n,h,l)] >= P[A <-> LR inside C(n,h,l)]`, with
/// `A = B(k)`. Bisection uses common random numbers on one window.
#[allow(clippy::too_many_arguments)]
pub fn ell_eq_estimate(
    group: &MarkedAbelianGroup,
    basis: &Basis,
    k: f64,
    n: f64,
    h: f64,
    n_b_val: f64,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<EllEqEstimate> {
    let map = GraphMap::new(group.clone(), basis.clone())?;
    let cap = ell_cap(n, h, n_b_val);
    let reach = chimney_reach(n, h, cap, map.r_s());
    let kw = n_b_val.max(k + 1.0) * map.r_s();
    let sampler = RegionSampler::new(map, reach, kw, p, trials, StreamKey::named(seed, "ell-eq"))?;
    let a = sampler.ball(k);
    let mut ch = Chimneys { sampler: &sampler, a, n, h, cache: HashMap::new() };
    ell_eq_on(&mut ch, n_b_val, cap, None)
}

/// Choice of a split point `s` on a segment `[p0, p1]`.
#[derive(Clone, Debug, Serialize)]
pub struct SplitResult {
    pub s: f64,
    pub point: P2,
    /// `P[A <-> L(p0, point)]`.
    pub left: f64,
    /// `P[A <-> L(point, p1)]`.
    pub right: f64,
    /// `P[A <-> L(p0, p1)]`.
    pub whole: f64,
}

/// For `x` with `pi x = q`: the least `s` with `q` within `r` of
/// `[p0, p0 + s d]`, and the largest `s` with `q` within `r` of `[p0 + s d, p1]`.
fn segment_params(q: P2, p0: P2, p1: P2, r: f64) -> Option<(f64, f64)> {
    let d = sub(p1, p0);
    let len = norm(d);
    if len == 0.0 {
        return (norm(sub(q, p0)) <= r).then_some((0.0, 1.0));
    }
    let w = sub(q, p0);
    let tau = dot(w, d) / (len * len);
    let perp = (dot(w, w) - tau * tau * len * len).max(0.0).sqrt();
    if perp > r {
        return None;
    }
    let half = (r * r - perp * perp).sqrt() / len;
    let (s_in, s_out) = (tau - half, tau + half);
    if s_in > 1.0 || s_out < 0.0 {
        return None;
    }
    Some((s_in.max(0.0), s_out.min(1.0)))
}

/// Splits `[p0, p1]` so that `A` reaches both halves inside `region` with
/// the largest common frequency. `A` reaches `L(p0, p0 + s d)` iff
/// `s >= t_min` and `L(p0 + s d, p1)` iff `s <= s_max`, with `t_min, s_max`
/// read off the cluster of `A` in each trial.
pub fn split_segment(sampler: &RegionSampler, a: &[u32], region: &[u32], p0: P2, p1: P2) -> SplitResult {
    let r = sampler.map.r_s() + TOL;
    let params: Vec<(u32, f64, f64)> = region
        .iter()
        .filter_map(|&v| segment_params(sampler.projections[v as usize], p0, p1, r).map(|(t, s)| (v, t, s)))
        .collect();
    let per_trial = sampler.map_trials(region, |uf| {
        let ar = roots(uf, a);
        let mut t_min = f64::INFINITY;
        let mut s_max = f64::NEG_INFINITY;
        for &(v, t, s) in &params {
            if ar.binary_search(&uf.find(v)).is_ok() {
                t_min = t_min.min(t);
                s_max = s_max.max(s);
            }
        }
        (t_min, s_max)
    });
    let total = per_trial.len() as f64;
    let mut cands: Vec<f64> = per_trial.iter().flat_map(|&(t, s)| [t, s]).filter(|x| x.is_finite()).collect();
    cands.extend([0.0, 1.0]);
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let mut ts: Vec<f64> = per_trial.iter().map(|x| x.0).collect();
    let mut ss: Vec<f64> = per_trial.iter().map(|x| x.1).collect();
    ts.sort_by(f64::total_cmp);
    ss.sort_by(f64::total_cmp);
    let left = |s: f64| ts.partition_point(|&t| t <= s) as f64 / total;
    let right = |s: f64| (ss.len() - ss.partition_point(|&x| x < s)) as f64 / total;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for &s in &cands {
        let v = left(s).min(right(s));
        if v > best.0 {
            best = (v, s);
        }
    }
    let s = best.1;
    let whole = per_trial.iter().filter(|x| x.0.is_finite()).count() as f64 / total;
    SplitResult { s, point: add(p0, scale(sub(p1, p0), s)), left: left(s), right: right(s), whole }
}

struct Search<'a> {
    group: &'a MarkedAbelianGroup,
    view: CayleyView,
    p: f64,
    eta: f64,
    s: &'a SearchSettings,
    seed: u64,
    start: Instant,
    log: Vec<StageRecord>,
}

impl Search<'_> {
    fn out_of_budget(&self) -> bool {
        self.start.elapsed() > self.s.budget
    }

    fn key(&self, label: &str) -> StreamKey {
        StreamKey::named(self.seed, label)
    }

    fn record(&mut self, stage: SearchStage, what: impl Into<String>, value: f64, estimate: f64, accepted: bool) {
        self.log.push(StageRecord { stage, what: what.into(), value, estimate, accepted });
    }

    /// Smallest frequency over `S(m)` of reaching the boundary of `B(radius)`,
    /// stopping once it is at most `floor`.
    fn worst_path_reach(&self, m: usize, radius: f64, trials: u64, floor: f64) -> Result<f64> {
        let window = EdgeWindow::geometric_ball(&self.view, radius);
        let saw = enumerate_saw_capped(&self.view, m, 1.0, self.s.saw_cap)?;
        let paths: Vec<Vec<u32>> = saw.paths.iter().map(|p| p.iter().filter_map(|x| window.index_of(x)).collect()).collect();
        let boundary: Vec<u32> = window.boundary().iter().collect();
        let nv = window.vertex_count();
        let ne = window.edge_count();
        let key = self.key(&format!("stage1-{radius}"));
        let mut fails = vec![0u64; paths.len()];
        let stop_at = ((1.0 - floor) * trials as f64).floor() as u64 + 1;
        let mut done = 0;
        while done < trials {
            let end = (done + 256).min(trials);
            let part = (done..end)
                .into_par_iter()
                .fold(
                    || (vec![0u64; paths.len()], vec![0u32; ne], UnionFind::new(nv), vec![false; nv]),
                    |(mut acc, mut u, mut uf, mut mark), t| {
                        key.fill_uniforms(t, &mut u);
                        uf.reset();
                        for (e, &(a, b)) in window.edges().iter().enumerate() {
                            if unit(u[e]) < self.p {
                                uf.union(a, b);
                            }
                        }
                        mark.iter_mut().for_each(|m| *m = false);
                        for &v in &boundary {
                            let r = uf.find(v) as usize;
                            mark[r] = true;
                        }
                        for (i, path) in paths.iter().enumerate() {
                            if !path.iter().any(|&v| mark[uf.find(v) as usize]) {
                                acc[i] += 1;
                            }
                        }
                        (acc, u, uf, mark)
                    },
                )
                .map(|x| x.0)
                .reduce(|| vec![0u64; paths.len()], |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                });
            fails.iter_mut().zip(part).for_each(|(x, y)| *x += y);
            done = end;
            if fails.iter().any(|&f| f >= stop_at) {
                break;
            }
        }
        let worst = fails.iter().copied().max().unwrap_or(done);
        Ok(1.0 - worst as f64 / done as f64)
    }

    fn stage_m(&mut self) -> Result<Option<usize>> {
        let target = 1.0 - self.eta;
        for m in 1..=self.s.m_max {
            if self.out_of_budget() {
                return Ok(None);
            }
            let est = self.worst_path_reach(m, self.s.k_window, self.s.trials, target)?;
            let ok = est > target;
            self.record(SearchStage::PathLength, format!("m={m} K={}", self.s.k_window), m as f64, est, ok);
            if ok {
                let est2 = self.worst_path_reach(m, 2.0 * self.s.k_window, self.s.trials, 0.0)?;
                self.record(SearchStage::PathLength, format!("m={m} K={} (drift)", 2.0 * self.s.k_window), m as f64, est2, est2 > target);
                return Ok(Some(m));
            }
        }
        Ok(None)
    }

    fn ball_reach(&self, k: usize, radius: f64) -> f64 {
        let window = EdgeWindow::geometric_ball(&self.view, radius);
        let a = window.set_of(&geometric_ball_elements(self.group, k as f64));
        let b = window.boundary().clone();
        estimate(&window, self.p, self.s.trials, self.key(&format!("stage2-{k}-{radius}")), |c| Clusters::new(c, None).connected(&a, &b)).phat()
    }

    fn stage_k(&mut self, m: usize) -> Option<usize> {
        let target = 1.0 - self.eta.powi(self.s.ladder_exponent);
        for k in m + 1..=self.s.k_max.max(m + 1) {
            if self.out_of_budget() {
                return None;
            }
            let radius = self.s.k_window.max(2.0 * k as f64 + 2.0);
            let est = self.ball_reach(k, radius);
            let ok = est > target;
            self.record(SearchStage::SeedBall, format!("k={k} K={radius}"), k as f64, est, ok);
            if ok {
                let est2 = self.ball_reach(k, 2.0 * radius);
                self.record(SearchStage::SeedBall, format!("k={k} K={} (drift)", 2.0 * radius), k as f64, est2, est2 > target);
                return Some(k);
            }
        }
        None
    }

    fn stage_n(&mut self, k: usize) -> Option<usize> {
        let target = 1.0 - self.eta;
        for n in k + 1..=self.s.n_max.max(k + 1) {
            if self.out_of_budget() {
                return None;
            }
            let window = EdgeWindow::geometric_ball(&self.view, (n + 1) as f64);
            let a = window.set_of(&geometric_ball_elements(self.group, k as f64));
            let rho = n as f64 * self.group.r_s();
            let outside = window.set_where(|x| (x.free.iter().map(|c| c * c).sum::<i64>() as f64) > rho * rho + TOL);
            let est = estimate(&window, self.p, self.s.trials, self.key(&format!("stage3-{n}")), |c| {
                Clusters::new(c, None).unique_crossing(&a, &outside)
            })
            .phat();
            let ok = est > target;
            self.record(SearchStage::Uniqueness, format!("n={n}"), n as f64, est, ok);
            if ok {
                return Some(n);
            }
        }
        None
    }
}

/// Searches for `m`, `N` and a good quadruple with `FC(p, N, eta)` passing.
pub fn fc_search(group: &MarkedAbelianGroup, p: f64, eta: f64, settings: &SearchSettings, seed: u64) -> Result<SearchReport> {
    if group.rank() < 2 {
        return Err(Error::RankTooSmall { rank: group.rank() });
    }
    if !(eta > 0.0 && eta < 1.0) || !(0.0..=1.0).contains(&p) {
        return Err(Error::pre(format!("need 0 <= p <= 1 and 0 < eta < 1, got p = {p}, eta = {eta}")));
    }
    let basis = settings.basis.clone().unwrap_or_else(|| Basis::standard(group.rank()));
    let map = GraphMap::new(group.clone(), basis.clone())?;
    let mut search = Search {
        group,
        view: CayleyView::new(group.clone()),
        p,
        eta,
        s: settings,
        seed,
        start: Instant::now(),
        log: Vec::new(),
    };
    let fail = |search: Search, stage: SearchStage, why: String| {
        let why = if search.out_of_budget() { format!("budget exhausted: {why}") } else { why };
        Ok(SearchReport { params: None, stage, failure: Some(why), log: search.log, check: None })
    };

    let Some(m) = search.stage_m()? else {
        return fail(search, SearchStage::PathLength, format!("no m <= {} with worst S(m) reach above {}", settings.m_max, 1.0 - eta));
    };
    let Some(k) = search.stage_k(m) else {
        return fail(search, SearchStage::SeedBall, "no seed ball radius reached the ladder threshold".into());
    };
    let Some(n) = search.stage_n(k) else {
        return fail(search, SearchStage::Uniqueness, format!("no n <= {} with a unique crossing above {}", settings.n_max, 1.0 - eta));
    };

    // Stage 4: balanced chimneys.
    let nb = n_b(&map, (n + 1) as f64);
    let kw = settings.kernel_width.unwrap_or(nb * map.r_s());
    let h_span = |nc: f64| -> Vec<f64> {
        let q = settings.h_points.max(1);
        if q == 1 {
            return vec![0.0];
        }
        (0..q).map(|i| -nc + 2.0 * nc * i as f64 / (q - 1) as f64).collect()
    };
    let mut chosen = None;
    for extra in 0..=settings.width_tries {
        if search.out_of_budget() {
            break;
        }
        let nc = nb + 1.0 + extra as f64 * (nb / 2.0).ceil();
        let hs = h_span(nc);
        let hmax = hs.iter().fold(0.0f64, |a, h| a.max(h.abs()));
        let reach = chimney_reach(nc, hmax, ell_cap(nc, hmax, nb), map.r_s());
        let sampler = RegionSampler::new(map.clone(), reach, kw, p, settings.trials, search.key(&format!("stage4-{nc}")))?;
        let a = sampler.ball(k as f64);
        let mut ests = Vec::new();
        let mut decisive = true;
        for &h in &hs {
            let mut ch = Chimneys { sampler: &sampler, a: a.clone(), n: nc, h, cache: HashMap::new() };
            let e = ell_eq_on(&mut ch, nb, ell_cap(nc, h, nb), Some(1.0 - eta))?;
            search.record(SearchStage::Balance, format!("n_c={nc} h={h} bottom={:?} top={:?}{}", e.bottom, e.top, if e.saturated { " saturated" } else { "" }), h, e.ell_hat.unwrap_or(f64::NAN), e.ell_hat.is_some());
            if e.ell_hat.is_none() {
                decisive = false;
                break;
            }
            ests.push((h, e));
        }
        if decisive {
            chosen = Some((nc, sampler, a, ests));
            break;
        }
    }
    let Some((nc, sampler, a, ests)) = chosen else {
        return fail(search, SearchStage::Balance, "no chimney width with a decisive up-down/left-right flip".into());
    };
    let (h_opt, e_opt) = ests.iter().min_by(|x, y| x.1.ell_hat.unwrap().total_cmp(&y.1.ell_hat.unwrap())).unwrap();
    let (h_opt, l0) = (*h_opt, e_opt.ell_hat.unwrap() + 1.0 / 12.0);
    search.record(SearchStage::Balance, format!("h_opt={h_opt} l0"), h_opt, l0, true);

    // Stage 5: zones L(a,u), L(u,b) from the left-right side, then L(b,v), L(v,-a).
    let c0 = chimney_sets(nc, h_opt, l0)?;
    let region0 = sampler.graph(&c0.c);
    let mut best_sigma = (f64::NEG_INFINITY, 0.0);
    for sigma in [-2.0, 0.0, 2.0] {
        let h0 = h_opt + sigma * l0 / 3.0;
        let lr = sampler.graph(&chimney_sets(nc, h0, l0 / 3.0)?.lr);
        let hits_lr = sampler.map_trials(&region0, |uf| {
            let ar = roots(uf, &a);
            hits(uf, &ar, &lr)
        });
        let f = hits_lr.iter().filter(|&&b| b).count() as f64 / hits_lr.len() as f64;
        search.record(SearchStage::Split, format!("sigma={sigma}"), h0, f, false);
        if f > best_sigma.0 {
            best_sigma = (f, h0);
        }
    }
    let h0 = best_sigma.1;
    let a0 = [nc, h0 - l0 / 3.0];
    let b0 = [nc, h0 + l0 / 3.0];
    let su = split_segment(&sampler, &a, &region0, a0, b0);
    search.record(SearchStage::Split, "u on [a0,b0]", su.point[1], su.left.min(su.right), true);
    let hu = su.point[1];
    let mut chu = Chimneys { sampler: &sampler, a: a.clone(), n: nc, h: hu, cache: HashMap::new() };
    let eu = ell_eq_on(&mut chu, nb, ell_cap(nc, hu, nb), Some(1.0 - eta))?;
    let Some(l_eq_u) = eu.ell_hat else {
        return fail(search, SearchStage::Split, format!("no flip for l_eq at h = {hu}"));
    };
    let l = (l_eq_u - 1.0 / 12.0).max(eu.ell_b - 1.0 + ELL_RESOLUTION);
    let qa = [nc, hu - l];
    let qb = [nc, hu + l];
    let cu = chimney_sets(nc, hu, l)?;
    let region_u = sampler.graph(&cu.c);
    let sv = split_segment(&sampler, &a, &region_u, [-qa[0], -qa[1]], qb);
    search.record(SearchStage::Split, "v on [-a,b]", sv.s, sv.left.min(sv.right), true);
    let quadruple = GoodQuadruple { a: qa, b: qb, v: sv.point };
    let (good, diag) = quadruple.check(map.r_s());
    search.record(SearchStage::Split, format!("quadruple {quadruple}"), l, diag.disk_margin, good);
    if !good {
        return fail(search, SearchStage::Split, format!("constructed quadruple is not good (margin {})", diag.disk_margin));
    }

    // Stage 6: final check, widening N then m within budget.
    let n0 = auto_n(&quadruple, map.r_s(), m);
    let n_big = ((3.0 * norm(qa).max(norm(qb)) / map.r_s()).ceil() as u32 + 2).max(n0);
    let mut attempts = vec![(m, n0)];
    if n_big > n0 {
        attempts.push((m, n_big));
    }
    for extra in 1..=2 {
        if m + extra <= settings.m_max {
            attempts.push((m + extra, n_big));
        }
    }
    let mut last = None;
    for (mm, nn) in attempts {
        if search.out_of_budget() {
            break;
        }
        let inst = FcInstance::new(group, &basis, &quadruple, nn, mm, settings.saw_cap)?;
        let report = inst.run(p, eta, settings.check_trials, fc_stream(seed));
        search.record(SearchStage::Check, format!("m={mm} N={nn}"), nn as f64, report.zones[report.worst_zone].lower, report.pass);
        if report.pass {
            let params = FCParams { p, n: nn, eta, m: mm, basis: basis.clone(), quadruple, estimates: None }.with_report(&report);
            return Ok(SearchReport { params: Some(params), stage: SearchStage::Done, failure: None, log: search.log, check: Some(report) });
        }
        last = Some(report);
    }
    let why = last.as_ref().map(|r| r.summary()).unwrap_or_else(|| "no check ran".into());
    let mut rep = fail(search, SearchStage::Check, why)?;
    rep.check = last;
    Ok(rep)
}

/// `S(m)` paths fully inside a vertex set, found by depth-first search from
/// `B(1)`; used to test whether an explored cluster contains a path of `S(m)`.
pub fn contains_saw(view: &CayleyView, window: &EdgeWindow, inside: &VertexSet, m: usize) -> bool {
    fn extend(window: &EdgeWindow, inside: &VertexSet, path: &mut Vec<u32>, m: usize) -> bool {
        if path.len() == m + 1 {
            return true;
        }
        let last = *path.last().unwrap();
        for &(y, _) in window.incident(last) {
            if inside.contains(y) && !path.contains(&y) {
                path.push(y);
                if extend(window, inside, path, m) {
                    return true;
                }
                path.pop();
            }
        }
        false
    }
    for s in geometric_ball_elements(view.group(), 1.0) {
        if let Some(i) = window.index_of(&s) {
            if inside.contains(i) {
                let mut path = vec![i];
                if extend(window, inside, &mut path, m) {
                    return true;
                }
            }
        }
    }
    false
}
