//! Sprinkling, `p_0`, and the box-by-box exploration of the origin cluster
//! on a quotient `H = G / Lambda`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::Serialize;

use super::search::contains_saw;
use crate::cayley::CayleyView;
use crate::error::{Error, Result};
use crate::geometry::{kappa, RenormLayout};
use crate::percolation::rng::unit;
use crate::percolation::{sample, wilson, BoundaryRule, EdgeWindow, StreamKey, UnionFind, VertexSet, Z95};

/// Site percolation threshold of `Z^2` (numerical literature value), used
/// only as the gate for calling the renormalized lattice supercritical.
pub const SITE_PC_Z2: f64 = 0.592_746;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SprinkleParams {
    pub delta: f64,
    pub kappa: u32,
}

impl SprinkleParams {
    pub fn new(delta: f64, kappa: u32) -> Result<Self> {
        let s = SprinkleParams { delta, kappa };
        let r = s.rate();
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::pre(format!("need 0 < delta/kappa < 1, got {r}")));
        }
        Ok(s)
    }

    /// Per-corridor sprinkling rate `delta / kappa`.
    pub fn rate(&self) -> f64 {
        self.delta / self.kappa as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PZero {
    pub p0: f64,
    /// Maximiser of `f`; `None` when the supremum 1 is not attained (`eta = 0`).
    pub t_star: Option<u64>,
}

/// `f(t) = 1 - (1 - delta/kappa)^t - eta (1 - p)^{-t}`.
pub fn p_zero_term(p: f64, rate: f64, eta: f64, t: u64) -> f64 {
    let t = t as f64;
    1.0 - (1.0 - rate).powf(t) - eta * (-(t) * (1.0 - p).ln()).exp()
}

/// `p_0 = sup_{t >= 1} f(t)`. `f` is concave in `t`, so the scan stops at
/// the first decrease.
pub fn p_zero(p: f64, delta: f64, kappa: u32, eta: f64) -> Result<PZero> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::pre(format!("p_zero needs 0 < p < 1, got {p}")));
    }
    let rate = SprinkleParams::new(delta, kappa)?.rate();
    if !(eta >= 0.0) {
        return Err(Error::pre(format!("eta must be non-negative, got {eta}")));
    }
    if eta == 0.0 {
        return Ok(PZero { p0: 1.0, t_star: None });
    }
    let mut t = 1;
    let mut best = p_zero_term(p, rate, eta, 1);
    loop {
        let next = p_zero_term(p, rate, eta, t + 1);
        if next > best {
            best = next;
            t += 1;
        } else {
            return Ok(PZero { p0: best, t_star: Some(t) });
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Domination {
    /// `1 - (1 - p)(1 - delta/kappa)^kappa`.
    pub value: f64,
    /// `p + delta`.
    pub target: f64,
    pub margin: f64,
}

/// Evaluates the per-edge law of `omega_total` against `p + delta`. The
/// margin is reported, not asserted: it is negative for `kappa = 1`.
pub fn omega_total_domination_check(p: f64, delta: f64, kappa: u32) -> Domination {
    let k = kappa as f64;
    let value = 1.0 - (1.0 - p) * (1.0 - delta / k).powf(k);
    let target = p + delta;
    Domination { value, target, margin: value - target }
}

/// How the next site is chosen among unexplored neighbours of `U_t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TieBreak {
    /// Smallest `(z2, z1)`.
    Lexicographic,
    /// Smallest `z1^2 + z2^2`, then `(z2, z1)`.
    ClosestToOrigin,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: usize,
    pub z: [i64; 2],
    pub x: bool,
    pub cluster_size: u32,
    /// `|U_{t-1}|`, the number of successes before this step.
    pub successes_before: usize,
    /// Edges newly opened by this step's sprinkle.
    pub sprinkled_open: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExplorationState {
    pub t: usize,
    pub u: Vec<[i64; 2]>,
    pub v: Vec<[i64; 2]>,
    /// Origin cluster `H_t` as sorted window indices.
    pub h: Vec<u32>,
    /// `omega_t` on the window edges.
    pub config: Vec<bool>,
    /// Sites whose sprinkle `xi^z` was consumed, in order.
    pub sprinkle_log: Vec<[i64; 2]>,
    pub steps: Vec<StepRecord>,
    /// Some unexplored neighbour of `U` fell outside the window.
    pub window_exhausted: bool,
    pub max_sprinkles_per_edge: u32,
}

impl ExplorationState {
    /// `X` on explored sites.
    pub fn site_config(&self) -> BTreeMap<[i64; 2], bool> {
        self.steps.iter().map(|s| (s.z, s.x)).collect()
    }

    /// `#` for `X = 1`, `.` for `X = 0`, blank when unexplored; top row is `z2 = w`.
    pub fn site_map(&self, w: i64) -> String {
        let x = self.site_config();
        let mut s = String::new();
        for z2 in (-w..=w).rev() {
            let row: String = (-w..=w)
                .map(|z1| match x.get(&[z1, z2]) {
                    Some(true) => '#',
                    Some(false) => '.',
                    None => ' ',
                })
                .collect();
            writeln!(s, "{}", row.trim_end()).unwrap();
        }
        s
    }

    /// One CSV row per step: `step,z1,z2,x,cluster_size,successes_before,sprinkled_open`.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("step,z1,z2,x,cluster_size,successes_before,sprinkled_open\n");
        for r in &self.steps {
            writeln!(s, "{},{},{},{},{},{},{}", r.t, r.z[0], r.z[1], r.x as u8, r.cluster_size, r.successes_before, r.sprinkled_open).unwrap();
        }
        s
    }
}

/// Window, boxes and corridors of a layout, built once and shared by replicas.
pub struct Explorer {
    layout: RenormLayout,
    view: CayleyView,
    window: EdgeWindow,
    origin: u32,
    sites: Vec<[i64; 2]>,
    site_index: HashMap<[i64; 2], usize>,
    boxes: Vec<Vec<u32>>,
    corridors: Vec<Vec<u32>>,
    kappa: u32,
    m: usize,
}

impl Explorer {
    pub fn new(layout: RenormLayout, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::pre("path length m must be at least 1"));
        }
        let view = CayleyView::new(layout.group().clone());
        let verts = layout.window_elements()?;
        let window = EdgeWindow::from_vertices(&view, verts, BoundaryRule::Empty)?;
        let origin = window.index_of(&layout.group().zero()).ok_or_else(|| Error::pre("origin outside the corridor window"))?;
        let sites = layout.sites();
        let site_index = sites.iter().enumerate().map(|(i, z)| (*z, i)).collect();
        let mut boxes = Vec::with_capacity(sites.len());
        let mut corridors = Vec::with_capacity(sites.len());
        for &z in &sites {
            let (in_box, in_corr) = layout.boxes_corridors(z);
            let mut mask = vec![false; window.vertex_count()];
            let mut b = Vec::new();
            for (i, x) in window.vertices().iter().enumerate() {
                if in_corr(x) {
                    mask[i] = true;
                    if in_box(x) {
                        b.push(i as u32);
                    }
                }
            }
            let edges = (0..window.edge_count() as u32)
                .filter(|&e| {
                    let (a, c) = window.edges()[e as usize];
                    mask[a as usize] && mask[c as usize]
                })
                .collect();
            boxes.push(b);
            corridors.push(edges);
        }
        let kappa = kappa(layout.quadruple());
        Ok(Explorer { layout, view, window, origin, sites, site_index, boxes, corridors, kappa, m })
    }

    pub fn layout(&self) -> &RenormLayout {
        &self.layout
    }

    pub fn window(&self) -> &EdgeWindow {
        &self.window
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn sites(&self) -> &[[i64; 2]] {
        &self.sites
    }

    pub fn box_vertices(&self, z: [i64; 2]) -> Option<&[u32]> {
        self.site_index.get(&z).map(|&i| self.boxes[i].as_slice())
    }

    pub fn corridor_edges(&self, z: [i64; 2]) -> Option<&[u32]> {
        self.site_index.get(&z).map(|&i| self.corridors[i].as_slice())
    }

    fn omega_key(seed: u64) -> StreamKey {
        StreamKey::named(seed, "explore").derive("omega0")
    }

    fn xi_key(seed: u64, site: usize) -> StreamKey {
        StreamKey::named(seed, "explore").derive_index("xi", site as u64)
    }

    /// Open bits of `xi^z` on the corridor edges of site `i`, in corridor order.
    fn sprinkle(&self, i: usize, rate: f64, seed: u64, run: u64) -> Vec<bool> {
        let mut u = vec![0u32; self.corridors[i].len()];
        Self::xi_key(seed, i).fill_uniforms(run, &mut u);
        u.into_iter().map(|x| unit(x) < rate).collect()
    }

    fn hits_box(&self, uf: &mut UnionFind, i: usize) -> bool {
        let r = uf.find(self.origin);
        self.boxes[i].iter().any(|&v| uf.find(v) == r)
    }

    /// One run of the exploration algorithm. `rate` is the per-corridor
    /// sprinkling rate `delta / kappa`; run `run` reads stream `run` of every key.
    pub fn run(&self, p: f64, rate: f64, seed: u64, run: u64, rule: TieBreak) -> ExplorationState {
        let omega0 = sample(&self.window, p, Self::omega_key(seed), run);
        let mut config = omega0.bits().to_vec();
        let n = self.window.vertex_count();
        let mut uf = UnionFind::new(n);
        for (e, &(a, b)) in self.window.edges().iter().enumerate() {
            if config[e] {
                uf.union(a, b);
            }
        }
        let mut uses = vec![0u32; self.window.edge_count()];
        let mut explored: HashSet<[i64; 2]> = HashSet::new();
        let mut st = ExplorationState {
            t: 0,
            u: Vec::new(),
            v: Vec::new(),
            h: Vec::new(),
            config: Vec::new(),
            sprinkle_log: Vec::new(),
            steps: Vec::new(),
            window_exhausted: false,
            max_sprinkles_per_edge: 0,
        };
        let root = uf.find(self.origin);
        let h0 = VertexSet::from_mask((0..n as u32).map(|v| uf.find(v) == root).collect());
        let x0 = contains_saw(&self.view, &self.window, &h0, self.m);
        st.steps.push(StepRecord { t: 0, z: [0, 0], x: x0, cluster_size: uf.set_size(self.origin), successes_before: 0, sprinkled_open: 0 });
        explored.insert([0, 0]);
        if x0 {
            st.u.push([0, 0]);
        } else {
            st.v.push([0, 0]);
        }
        loop {
            let mut cands: Vec<[i64; 2]> = Vec::new();
            for z in &st.u {
                for d in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
                    let y = [z[0] + d[0], z[1] + d[1]];
                    if explored.contains(&y) {
                        continue;
                    }
                    if self.site_index.contains_key(&y) {
                        cands.push(y);
                    } else {
                        st.window_exhausted = true;
                    }
                }
            }
            let Some(&zt) = cands.iter().min_by_key(|z| match rule {
                TieBreak::Lexicographic => (0, z[1], z[0]),
                TieBreak::ClosestToOrigin => (z[0] * z[0] + z[1] * z[1], z[1], z[0]),
            }) else {
                break;
            };
            st.t += 1;
            let i = self.site_index[&zt];
            let xi = self.sprinkle(i, rate, seed, run);
            let mut opened = 0;
            for (&e, &open) in self.corridors[i].iter().zip(&xi) {
                uses[e as usize] += 1;
                if open && !config[e as usize] {
                    config[e as usize] = true;
                    opened += 1;
                    let (a, b) = self.window.edges()[e as usize];
                    uf.union(a, b);
                }
            }
            st.sprinkle_log.push(zt);
            let x = self.hits_box(&mut uf, i);
            st.steps.push(StepRecord { t: st.t, z: zt, x, cluster_size: uf.set_size(self.origin), successes_before: st.u.len(), sprinkled_open: opened });
            explored.insert(zt);
            if x {
                st.u.push(zt);
            } else {
                st.v.push(zt);
            }
        }
        let root = uf.find(self.origin);
        st.h = (0..n as u32).filter(|&v| uf.find(v) == root).collect();
        st.max_sprinkles_per_edge = uses.into_iter().max().unwrap_or(0);
        st.config = config;
        st
    }

    /// Rebuilds `omega_t` as `omega_0` OR the logged sprinkles and returns it
    /// with the number of sprinkles covering each edge.
    pub fn replay(&self, state: &ExplorationState, p: f64, rate: f64, seed: u64, run: u64) -> (Vec<bool>, Vec<u32>) {
        let mut config = sample(&self.window, p, Self::omega_key(seed), run).bits().to_vec();
        let mut uses = vec![0u32; self.window.edge_count()];
        for z in &state.sprinkle_log {
            let i = self.site_index[z];
            for (&e, open) in self.corridors[i].iter().zip(self.sprinkle(i, rate, seed, run)) {
                uses[e as usize] += 1;
                config[e as usize] |= open;
            }
        }
        (config, uses)
    }

    /// Every `z` with `X(z) = 1` has its box joined to the origin by an open
    /// path of the final configuration.
    pub fn verify_soundness(&self, state: &ExplorationState) -> bool {
        let mut uf = UnionFind::new(self.window.vertex_count());
        for (e, &(a, b)) in self.window.edges().iter().enumerate() {
            if state.config[e] {
                uf.union(a, b);
            }
        }
        state.steps.iter().filter(|s| s.x && s.t > 0).all(|s| self.hits_box(&mut uf, self.site_index[&s.z]))
    }
}

/// Runs the exploration once with the lexicographic rule; returns the final
/// state and the site values `X`.
pub fn explore(layout: RenormLayout, p: f64, delta: f64, m: usize, seed: u64) -> Result<(ExplorationState, BTreeMap<[i64; 2], bool>)> {
    let ex = Explorer::new(layout, m)?;
    let rate = delta / ex.kappa() as f64;
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::pre(format!("need 0 <= delta/kappa < 1, got {rate}")));
    }
    let st = ex.run(p, rate, seed, 0, TieBreak::Lexicographic);
    let x = st.site_config();
    Ok((st, x))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StratumRow {
    /// `step` (by `t`) or `successes` (by `|U_{t-1}|`).
    pub stratum: &'static str,
    pub key: usize,
    pub samples: u64,
    pub successes: u64,
    pub freq: f64,
    pub lower: f64,
    pub upper: f64,
    /// Half-width of the 95% interval.
    pub ci: f64,
}

/// Frequency of `X(z_t) = 1` for `t >= 1`, stratified by `t` and by `|U_{t-1}|`.
pub fn conditional_success_stats(runs: &[ExplorationState]) -> Result<Vec<StratumRow>> {
    if runs.len() < 30 {
        return Err(Error::pre(format!("need at least 30 runs, got {}", runs.len())));
    }
    let mut by_step: BTreeMap<usize, (u64, u64)> = BTreeMap::new();
    let mut by_u: BTreeMap<usize, (u64, u64)> = BTreeMap::new();
    for r in runs {
        for s in r.steps.iter().filter(|s| s.t >= 1) {
            let e = by_step.entry(s.t).or_default();
            e.0 += 1;
            e.1 += s.x as u64;
            let e = by_u.entry(s.successes_before).or_default();
            e.0 += 1;
            e.1 += s.x as u64;
        }
    }
    let row = |stratum: &'static str, key: usize, (n, k): (u64, u64)| {
        let (lower, upper) = wilson(k, n, Z95);
        StratumRow { stratum, key, samples: n, successes: k, freq: k as f64 / n as f64, lower, upper, ci: (upper - lower) / 2.0 }
    };
    let mut out: Vec<StratumRow> = by_step.into_iter().map(|(k, c)| row("step", k, c)).collect();
    out.extend(by_u.into_iter().map(|(k, c)| row("successes", k, c)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_zero_hand_values() {
        let r = p_zero(0.5, 1.0, 2, 0.25).unwrap();
        assert_eq!(r.t_star, Some(1));
        assert!(r.p0.abs() < 1e-15);
        assert_eq!(p_zero(0.6, 0.05, 10, 0.0).unwrap(), PZero { p0: 1.0, t_star: None });
        assert!(p_zero(1.0, 0.05, 10, 0.1).is_err());
        assert!(p_zero(0.5, 2.0, 1, 0.1).is_err());
    }

    #[test]
    fn p_zero_matches_full_scan() {
        let r = p_zero(0.6, 1.0, 100, 1e-6).unwrap();
        let (t, f) = (1..=2000u64).map(|t| (t, p_zero_term(0.6, 0.01, 1e-6, t))).fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
        assert_eq!(r.t_star, Some(t));
        assert_eq!(r.p0, f);
    }

    #[test]
    fn domination_margins() {
        assert_eq!(omega_total_domination_check(0.6, 0.0, 10).margin, 0.0);
        let d = omega_total_domination_check(0.3, 0.1, 1);
        assert!((d.value - (0.3 + 0.1 - 0.03)).abs() < 1e-12);
        assert!(d.margin < 0.0);
    }
}
