//! Critical-point estimation by boundary-reach bisection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cayley::CayleyView;
use crate::marked_group::MarkedAbelianGroup;
use crate::percolation::estimate::{wilson, Z95};
use crate::percolation::rng::StreamKey;
use crate::percolation::threshold::{bottleneck_to_set, Scratch};
use crate::percolation::window::EdgeWindow;

pub const METHOD_BISECTION: &str = "boundary-bisection";
pub const METHOD_SENTINEL: &str = "rank-sentinel";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcSettings {
    /// Free-coordinate half width `L` of the box window.
    pub window: i64,
    pub trials: u64,
    /// Bisection stops when the bracket is narrower than this.
    pub tol: f64,
    /// Calibrated crossing level for `P_p(0 <-> boundary)`.
    pub threshold: f64,
    pub seed: u64,
    /// Also estimate at window `2L` and report the gap.
    pub drift: bool,
}

impl Default for PcSettings {
    fn default() -> Self {
        PcSettings { window: 128, trials: 10_000, tol: 1e-3, threshold: 0.5, seed: 42, drift: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowEstimate {
    pub window: i64,
    pub p_hat: f64,
    pub ci: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcEstimate {
    pub group_key: String,
    pub rank: usize,
    pub p_hat: f64,
    pub ci: f64,
    pub window: i64,
    pub trials: u64,
    pub method: String,
    pub seed: u64,
    pub stream: u64,
    /// Estimate at window `2L`, when requested.
    pub doubled: Option<WindowEstimate>,
}

pub const PC_COLUMNS: &str = "group,key,rank,p_hat,ci,window,trials,method,seed,stream,p_hat_2l,drift";

impl PcEstimate {
    /// `|p(2L) - p(L)|`, the finite-size drift.
    pub fn drift(&self) -> Option<f64> {
        self.doubled.as_ref().map(|d| (d.p_hat - self.p_hat).abs())
    }

    /// One row under [`PC_COLUMNS`]; `literal` is the group as the user wrote it.
    pub fn csv_row(&self, literal: &str) -> String {
        let cell = |s: &str| if s.contains([',', '"']) { format!("\"{}\"", s.replace('"', "\"\"")) } else { s.to_string() };
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            cell(literal),
            cell(&self.group_key),
            self.rank,
            self.p_hat,
            self.ci,
            self.window,
            self.trials,
            self.method,
            self.seed,
            self.stream,
            opt(self.doubled.as_ref().map(|d| d.p_hat)),
            opt(self.drift()),
        )
    }
}

/// Per-trial connection thresholds `p*` of origin to the box boundary.
pub fn origin_thresholds(view: &CayleyView, l: i64, trials: u64, key: StreamKey) -> Vec<f64> {
    let w = EdgeWindow::free_box(view, l);
    let origin = w.index_of(&view.group().zero()).expect("origin in window");
    (0..trials)
        .into_par_iter()
        .map_init(
            || (Scratch::default(), vec![0u32; w.edge_count()]),
            |(scratch, u), t| {
                key.fill_uniforms(t, u);
                bottleneck_to_set(&w, &[origin], w.boundary(), u, scratch).unwrap_or(f64::INFINITY)
            },
        )
        .collect()
}

/// Bisection on `p` for `level(F(p)) >= threshold`, where `F(p)` counts
/// thresholds below `p` and `level` maps a count to a probability.
fn bisect(sorted: &[f64], tol: f64, threshold: f64, level: impl Fn(u64, u64) -> f64) -> f64 {
    let n = sorted.len() as u64;
    let count = |p: f64| sorted.partition_point(|&x| x < p) as u64;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if level(count(mid), n) >= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `(p_hat, ci)` from sampled thresholds. The interval inverts the Wilson
/// bounds of `F` at the crossing and adds half the bisection tolerance.
pub fn crossing_from_thresholds(thresholds: &[f64], tol: f64, threshold: f64) -> (f64, f64) {
    let mut s = thresholds.to_vec();
    s.sort_by(f64::total_cmp);
    let p_hat = bisect(&s, tol, threshold, |k, n| k as f64 / n as f64);
    let p_lo = bisect(&s, tol, threshold, |k, n| wilson(k, n, Z95).1);
    let p_hi = bisect(&s, tol, threshold, |k, n| wilson(k, n, Z95).0);
    let ci = (p_hat - p_lo).max(p_hi - p_hat) + tol / 2.0;
    (p_hat, ci)
}

pub fn pc_stream(group: &MarkedAbelianGroup, l: i64, seed: u64) -> StreamKey {
    StreamKey::named(seed, &format!("estimate-pc|{}|{l}", group.key()))
}

fn window_estimate(view: &CayleyView, l: i64, s: &PcSettings) -> (WindowEstimate, StreamKey) {
    let key = pc_stream(view.group(), l, s.seed);
    let th = origin_thresholds(view, l, s.trials, key);
    let (p_hat, ci) = crossing_from_thresholds(&th, s.tol, s.threshold);
    (WindowEstimate { window: l, p_hat, ci }, key)
}

/// Estimate of the percolation threshold. Groups of rank below 2 get the
/// sentinel `1` without sampling.
pub fn estimate_pc(group: &MarkedAbelianGroup, s: &PcSettings) -> PcEstimate {
    if !group.percolates() {
        return PcEstimate {
            group_key: group.key(),
            rank: group.rank(),
            p_hat: 1.0,
            ci: 0.0,
            window: s.window,
            trials: 0,
            method: METHOD_SENTINEL.into(),
            seed: s.seed,
            stream: 0,
            doubled: None,
        };
    }
    forced_estimate(group, s)
}

/// Sampling estimate regardless of rank; finite-window diagnostic only.
pub fn forced_estimate(group: &MarkedAbelianGroup, s: &PcSettings) -> PcEstimate {
    let view = CayleyView::new(group.clone());
    let (main, key) = window_estimate(&view, s.window, s);
    let doubled = s.drift.then(|| window_estimate(&view, 2 * s.window, s).0);
    PcEstimate {
        group_key: group.key(),
        rank: group.rank(),
        p_hat: main.p_hat,
        ci: main.ci,
        window: s.window,
        trials: s.trials,
        method: METHOD_BISECTION.into(),
        seed: s.seed,
        stream: key.stream,
        doubled,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marked_group::parse_group;

    #[test]
    fn rank_one_gets_sentinel() {
        let e = estimate_pc(&parse_group("[Z; 1]").unwrap(), &PcSettings::default());
        assert_eq!(e.p_hat, 1.0);
        assert_eq!(e.method, METHOD_SENTINEL);
    }

    #[test]
    fn crossing_of_known_thresholds() {
        let th: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let (p, ci) = crossing_from_thresholds(&th, 1e-4, 0.5);
        assert!((p - 0.5).abs() < 2e-3, "{p}");
        assert!(ci > 0.0 && ci < 0.05);
    }

    #[test]
    fn small_square_estimate_is_reproducible() {
        let g = parse_group("2;").unwrap();
        let s = PcSettings { window: 8, trials: 200, tol: 1e-3, threshold: 0.5, seed: 1, drift: false };
        let a = estimate_pc(&g, &s);
        let b = estimate_pc(&g, &s);
        assert_eq!(a, b);
        assert!(a.p_hat > 0.3 && a.p_hat < 0.7);
    }
}
