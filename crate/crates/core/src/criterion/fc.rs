//! The finite-size criterion `FC(p, N, eta)` and its Monte Carlo check.
//!
//! For a fixed basis `e`, `m` and good quadruple, the check estimates
//! `P[gamma <-> Z inside R_N]` for every `gamma in S(m)` and every zone
//! `Z in Z_N`, where `R_N = (R(a,b) + B(1)) cap B(N)` and
//! `Z_N = (Z + B(1)) cap B(N)`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::cayley::CayleyView;
use crate::error::{Error, Result};
use crate::geometry::{Basis, GoodQuadruple, GraphMap, ZONE_NAMES};
use crate::marked_group::{parse_group, GroupElement, MarkedAbelianGroup};
use crate::percolation::rng::unit;
use crate::percolation::window::geometric_ball_elements;
use crate::percolation::{enumerate_saw_capped, wilson, BoundaryRule, EdgeWindow, StreamKey, UnionFind, DEFAULT_SAW_CAP, Z95};

pub const FC_HEADER: &str = "abelperc-fc 1";

/// Trials per deterministic chunk; early stopping is only decided between chunks.
pub const FC_CHUNK: u64 = 512;

const NONE: u32 = u32::MAX;

/// Worst-path estimate for one zone.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZoneEstimate {
    /// Index of the worst path in enumeration order.
    pub worst_path: usize,
    pub successes: u64,
    pub trials: u64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FCParams {
    pub p: f64,
    /// The truncation radius `N`.
    pub n: u32,
    pub eta: f64,
    pub m: usize,
    pub basis: Basis,
    pub quadruple: GoodQuadruple,
    /// Filled in by [`fc_check`].
    pub estimates: Option<[ZoneEstimate; 4]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FcReport {
    pub pass: bool,
    pub threshold: f64,
    pub trials: u64,
    pub trials_run: u64,
    /// Stopped once some pair could no longer pass.
    pub early_stop: bool,
    pub paths: usize,
    /// `S(m)` exceeded the cap; only the enumerated prefix was checked.
    pub saw_truncated: bool,
    pub region_vertices: usize,
    pub zone_sizes: [usize; 4],
    pub zones: [ZoneEstimate; 4],
    pub worst_zone: usize,
    pub worst_path: Vec<GroupElement>,
}

impl FcReport {
    /// `1 - ` the smallest lower confidence bound, i.e. the `eta` this run certifies.
    pub fn certified_eta(&self) -> f64 {
        1.0 - self.zones[self.worst_zone].lower
    }

    pub fn summary(&self) -> String {
        let w = &self.zones[self.worst_zone];
        format!(
            "{} worst {} path #{} {}/{} lower {:.5} vs {:.5}{}{}",
            if self.pass { "PASS" } else { "FAIL" },
            ZONE_NAMES[self.worst_zone],
            w.worst_path,
            w.successes,
            w.trials,
            w.lower,
            self.threshold,
            if self.early_stop { " (early stop)" } else { "" },
            if self.saw_truncated { " (S(m) truncated)" } else { "" },
        )
    }
}

/// Smallest failure count at which the Wilson lower bound drops to `1 - eta`.
fn failure_limit(eta: f64, trials: u64) -> u64 {
    let target = 1.0 - eta;
    let (mut lo, mut hi) = (0u64, trials + 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        let below = mid > trials || wilson(trials - mid, trials, Z95).0 <= target;
        if below {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// `N` large enough that `B(N)` holds `m`-paths and twice the reach of `[a, b, -a, -b]`.
pub fn auto_n(quadruple: &GoodQuadruple, r_s: f64, m: usize) -> u32 {
    let reach = quadruple.a[0].hypot(quadruple.a[1]).max(quadruple.b[0].hypot(quadruple.b[1]));
    let n = (2.0 * reach / r_s).ceil() as u32 + 2;
    n.max(m as u32 + 1)
}

/// Precomputed region, zones and paths, reusable across `p` and seeds.
pub struct FcInstance {
    window: EdgeWindow,
    zones: [Vec<u32>; 4],
    paths: Vec<Vec<u32>>,
    elements: Vec<Vec<GroupElement>>,
    truncated: bool,
}

struct Scratch {
    uniforms: Vec<u32>,
    uf: UnionFind,
    bits: Vec<u8>,
}

impl FcInstance {
    pub fn new(group: &MarkedAbelianGroup, basis: &Basis, quadruple: &GoodQuadruple, n: u32, m: usize, saw_cap: usize) -> Result<Self> {
        if group.rank() < 2 {
            return Err(Error::RankTooSmall { rank: group.rank() });
        }
        if m == 0 || m as u64 >= n as u64 {
            return Err(Error::pre(format!("need 1 <= m < N, got m = {m}, N = {n}")));
        }
        let map = GraphMap::new(group.clone(), basis.clone())?;
        let (ok, diag) = quadruple.check(map.r_s());
        if !ok {
            return Err(Error::pre(format!("quadruple {quadruple} is not good (disk margin {:.4})", diag.disk_margin)));
        }
        let region = quadruple.region_set();
        let verts: Vec<GroupElement> =
            geometric_ball_elements(group, n as f64).into_iter().filter(|x| map.in_inflated(&region, x)).collect();
        let view = CayleyView::new(group.clone());
        let window = EdgeWindow::from_vertices(&view, verts, BoundaryRule::Empty)?;
        let zone_sets = quadruple.zone_sets();
        let zones = zone_sets.map(|z| (0..window.vertex_count() as u32).filter(|&i| map.in_inflated(&z, window.vertex(i))).collect());
        let saw = enumerate_saw_capped(&view, m, 1.0, saw_cap)?;
        let paths = saw.paths.iter().map(|p| p.iter().map(|x| window.index_of(x).unwrap_or(NONE)).collect()).collect();
        Ok(FcInstance { window, zones, paths, elements: saw.paths, truncated: saw.truncated })
    }

    pub fn window(&self) -> &EdgeWindow {
        &self.window
    }

    pub fn paths(&self) -> &[Vec<GroupElement>] {
        &self.elements
    }

    pub fn zone(&self, z: usize) -> &[u32] {
        &self.zones[z]
    }

    fn trial(&self, p: f64, key: StreamKey, t: u64, s: &mut Scratch, acc: &mut [u64]) {
        key.fill_uniforms(t, &mut s.uniforms);
        s.uf.reset();
        for (e, &(a, b)) in self.window.edges().iter().enumerate() {
            if unit(s.uniforms[e]) < p {
                s.uf.union(a, b);
            }
        }
        s.bits.iter_mut().for_each(|b| *b = 0);
        for (z, zone) in self.zones.iter().enumerate() {
            for &v in zone {
                let r = s.uf.find(v) as usize;
                s.bits[r] |= 1 << z;
            }
        }
        for (i, path) in self.paths.iter().enumerate() {
            let mut mask = 0u8;
            for &v in path {
                if v != NONE {
                    mask |= s.bits[s.uf.find(v) as usize];
                }
            }
            for z in 0..4 {
                if mask & (1 << z) == 0 {
                    acc[i * 4 + z] += 1;
                }
            }
        }
    }

    /// Per-`(path, zone)` failure counts over trials `0..trials` of `key`,
    /// stopping between chunks once some count reaches `stop_at`.
    fn failures(&self, p: f64, trials: u64, key: StreamKey, stop_at: u64) -> (Vec<u64>, u64) {
        let cells = self.paths.len() * 4;
        let nv = self.window.vertex_count();
        let ne = self.window.edge_count();
        let mut fails = vec![0u64; cells];
        let mut done = 0;
        while done < trials {
            let end = (done + FC_CHUNK).min(trials);
            let part = (done..end)
                .into_par_iter()
                .fold(
                    || (vec![0u64; cells], Scratch { uniforms: vec![0; ne], uf: UnionFind::new(nv), bits: vec![0; nv] }),
                    |(mut acc, mut s), t| {
                        self.trial(p, key, t, &mut s, &mut acc);
                        (acc, s)
                    },
                )
                .map(|(acc, _)| acc)
                .reduce(
                    || vec![0u64; cells],
                    |mut a, b| {
                        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                        a
                    },
                );
            fails.iter_mut().zip(part).for_each(|(x, y)| *x += y);
            done = end;
            if fails.iter().any(|&f| f >= stop_at) {
                break;
            }
        }
        (fails, done)
    }

    pub fn run(&self, p: f64, eta: f64, trials: u64, key: StreamKey) -> FcReport {
        self.run_with_stop(p, eta, trials, key, true)
    }

    /// Like [`FcInstance::run`]; with `early_stop = false` every trial runs.
    pub fn run_with_stop(&self, p: f64, eta: f64, trials: u64, key: StreamKey, early_stop: bool) -> FcReport {
        assert!(trials >= 1, "at least one trial");
        let limit = failure_limit(eta, trials);
        let stop_at = if early_stop { limit.max(1) } else { u64::MAX };
        let (fails, done) = self.failures(p, trials, key, stop_at);
        let zones: [ZoneEstimate; 4] = std::array::from_fn(|z| {
            let (worst_path, f) = (0..self.paths.len()).map(|i| (i, fails[i * 4 + z])).fold((0, 0), |best, c| if c.1 > best.1 { c } else { best });
            let successes = if self.paths.is_empty() { 0 } else { done - f };
            let (lower, upper) = wilson(successes, done, Z95);
            ZoneEstimate { worst_path, successes, trials: done, lower, upper }
        });
        let worst_zone = (0..4).fold(0, |best, z| if zones[z].lower < zones[best].lower { z } else { best });
        let threshold = 1.0 - eta;
        let early = done < trials;
        let pass = !self.paths.is_empty() && !early && zones.iter().all(|e| e.lower > threshold);
        FcReport {
            pass,
            threshold,
            trials,
            trials_run: done,
            early_stop: early,
            paths: self.paths.len(),
            saw_truncated: self.truncated,
            region_vertices: self.window.vertex_count(),
            zone_sizes: std::array::from_fn(|z| self.zones[z].len()),
            worst_path: self.elements.get(zones[worst_zone].worst_path).cloned().unwrap_or_default(),
            zones,
            worst_zone,
        }
    }
}

/// Stream used by [`fc_check`] for a given seed.
pub fn fc_stream(seed: u64) -> StreamKey {
    StreamKey::named(seed, "fc-check")
}

/// Monte Carlo check of `FC(p, N, eta)` for the basis and quadruple in
/// `params`. Returns the verdict and a report naming the worst pair.
pub fn fc_check(group: &MarkedAbelianGroup, params: &FCParams, trials: u64, seed: u64) -> Result<(bool, FcReport)> {
    fc_check_with_cap(group, params, trials, seed, DEFAULT_SAW_CAP)
}

pub fn fc_check_with_cap(group: &MarkedAbelianGroup, params: &FCParams, trials: u64, seed: u64, saw_cap: usize) -> Result<(bool, FcReport)> {
    check_eta(params.eta)?;
    let inst = FcInstance::new(group, &params.basis, &params.quadruple, params.n, params.m, saw_cap)?;
    let report = inst.run(params.p, params.eta, trials, fc_stream(seed));
    Ok((report.pass, report))
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::pre(format!("eta must lie in (0, 1), got {eta}")));
    }
    Ok(())
}

impl FCParams {
    pub fn with_report(mut self, report: &FcReport) -> Self {
        self.estimates = Some(report.zones.clone());
        self
    }

    /// Text form; see the crate README for the grammar.
    pub fn to_text(&self, group: &MarkedAbelianGroup) -> String {
        let mut s = String::new();
        writeln!(s, "{FC_HEADER}").unwrap();
        writeln!(s, "group {}", group.key()).unwrap();
        writeln!(s, "p {}", self.p).unwrap();
        writeln!(s, "N {}", self.n).unwrap();
        writeln!(s, "eta {}", self.eta).unwrap();
        writeln!(s, "m {}", self.m).unwrap();
        let cols: Vec<String> =
            self.basis.columns().iter().map(|c| c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")).collect();
        writeln!(s, "basis {}", cols.join(";")).unwrap();
        writeln!(s, "quadruple {}", self.quadruple).unwrap();
        if let Some(est) = &self.estimates {
            for (z, e) in est.iter().enumerate() {
                writeln!(
                    s,
                    "zone {z} worst_path={} successes={} trials={} lower={} upper={}",
                    e.worst_path, e.successes, e.trials, e.lower, e.upper
                )
                .unwrap();
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<(MarkedAbelianGroup, FCParams)> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim())).filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, h)) if h == FC_HEADER => {}
            Some((n, h)) => return Err(Error::parse(n, format!("expected header `{FC_HEADER}`, got `{h}`"))),
            None => return Err(Error::parse(1, "empty FC file")),
        }
        let mut group = None;
        let (mut p, mut n, mut eta, mut m, mut basis, mut quad) = (None, None, None, None, None, None);
        let mut zones: Vec<Option<ZoneEstimate>> = vec![None; 4];
        for (ln, line) in lines {
            let (key, rest) = line.split_once(char::is_whitespace).ok_or_else(|| Error::parse(ln, format!("expected `key value`, got `{line}`")))?;
            let rest = rest.trim();
            let num = |what: &str| -> Result<f64> { rest.parse().map_err(|_| Error::parse(ln, format!("bad {what} `{rest}`"))) };
            match key {
                "group" => group = Some(parse_group(rest).map_err(|e| Error::parse(ln, e.to_string()))?),
                "p" => p = Some(num("p")?),
                "N" => n = Some(rest.parse::<u32>().map_err(|_| Error::parse(ln, format!("bad N `{rest}`")))?),
                "eta" => eta = Some(num("eta")?),
                "m" => m = Some(rest.parse::<usize>().map_err(|_| Error::parse(ln, format!("bad m `{rest}`")))?),
                "basis" => {
                    let cols: std::result::Result<Vec<Vec<f64>>, _> =
                        rest.split(';').map(|c| c.split(',').map(|x| x.trim().parse::<f64>()).collect()).collect();
                    let cols = cols.map_err(|_| Error::parse(ln, format!("bad basis `{rest}`")))?;
                    basis = Some(Basis::from_columns(cols).map_err(|e| Error::parse(ln, e.to_string()))?);
                }
                "quadruple" => quad = Some(rest.parse::<GoodQuadruple>().map_err(|e| Error::parse(ln, e.to_string()))?),
                "zone" => {
                    let mut it = rest.split_whitespace();
                    let z: usize = it.next().and_then(|x| x.parse().ok()).filter(|&z| z < 4).ok_or_else(|| Error::parse(ln, "bad zone index"))?;
                    let mut e = ZoneEstimate { worst_path: 0, successes: 0, trials: 0, lower: 0.0, upper: 1.0 };
                    for kv in it {
                        let (k, v) = kv.split_once('=').ok_or_else(|| Error::parse(ln, format!("expected key=value, got `{kv}`")))?;
                        let bad = || Error::parse(ln, format!("bad value in `{kv}`"));
                        match k {
                            "worst_path" => e.worst_path = v.parse().map_err(|_| bad())?,
                            "successes" => e.successes = v.parse().map_err(|_| bad())?,
                            "trials" => e.trials = v.parse().map_err(|_| bad())?,
                            "lower" => e.lower = v.parse().map_err(|_| bad())?,
                            "upper" => e.upper = v.parse().map_err(|_| bad())?,
                            _ => return Err(Error::parse(ln, format!("unknown zone field `{k}`"))),
                        }
                    }
                    zones[z] = Some(e);
                }
                _ => return Err(Error::parse(ln, format!("unknown key `{key}`"))),
            }
        }
        let need = |what: &str| Error::parse(0, format!("missing `{what}` line"));
        let estimates = if zones.iter().all(Option::is_some) {
            let z: Vec<ZoneEstimate> = zones.into_iter().map(Option::unwrap).collect();
            Some(z.try_into().unwrap())
        } else if zones.iter().all(Option::is_none) {
            None
        } else {
            return Err(Error::parse(0, "zone estimates must cover all four zones"));
        };
        let params = FCParams {
            p: p.ok_or_else(|| need("p"))?,
            n: n.ok_or_else(|| need("N"))?,
            eta: eta.ok_or_else(|| need("eta"))?,
            m: m.ok_or_else(|| need("m"))?,
            basis: basis.ok_or_else(|| need("basis"))?,
            quadruple: quad.ok_or_else(|| need("quadruple"))?,
            estimates,
        };
        Ok((group.ok_or_else(|| need("group"))?, params))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(p: f64, eta: f64) -> FCParams {
        FCParams {
            p,
            n: 8,
            eta,
            m: 2,
            basis: Basis::standard(2),
            quadruple: GoodQuadruple { a: [5.0, -3.0], b: [5.0, 3.0], v: [5.0, 3.0] },
            estimates: None,
        }
    }

    #[test]
    fn failure_limit_matches_wilson() {
        for &(eta, t) in &[(0.1, 1000u64), (0.2, 50), (0.01, 10_000)] {
            let f = failure_limit(eta, t);
            assert!(wilson(t - f, t, Z95).0 <= 1.0 - eta);
            if f > 0 {
                assert!(wilson(t - f + 1, t, Z95).0 > 1.0 - eta);
            }
        }
    }

    #[test]
    fn extremes() {
        let g = parse_group("2;").unwrap();
        let (ok, r) = fc_check(&g, &reference(1.0, 0.2), 200, 1).unwrap();
        assert!(ok, "{}", r.summary());
        let (ok, r) = fc_check(&g, &reference(0.0, 0.2), 200, 1).unwrap();
        assert!(!ok);
        assert_eq!(r.zones[r.worst_zone].successes, 0);
    }

    #[test]
    fn text_round_trip() {
        let g = parse_group("2;").unwrap();
        let (_, r) = fc_check(&g, &reference(0.9, 0.2), 100, 3).unwrap();
        let params = reference(0.9, 0.2).with_report(&r);
        let text = params.to_text(&g);
        let (g2, back) = FCParams::from_text(&text).unwrap();
        assert_eq!(g2, g);
        assert_eq!(back, params);
        assert!(FCParams::from_text("abelperc-fc 2\n").is_err());
        let err = FCParams::from_text(&text.replace("eta 0.2", "eta x")).unwrap_err().to_string();
        assert!(err.contains("line 5"), "{err}");
    }

    #[test]
    fn preconditions() {
        let z = parse_group("[Z; 1]").unwrap();
        assert!(matches!(fc_check(&z, &FCParams { basis: Basis::standard(1), ..reference(0.5, 0.2) }, 10, 0), Err(Error::RankTooSmall { .. })));
        let g = parse_group("2;").unwrap();
        assert!(fc_check(&g, &FCParams { m: 8, ..reference(0.5, 0.2) }, 10, 0).is_err());
    }
}
