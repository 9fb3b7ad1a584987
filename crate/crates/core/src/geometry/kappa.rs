//! The overlap constant `kappa`: the largest number of lattice translates
//! `w + z1 u + z2 v` falling in `[5a, 5b, -5a, -5b]`.
//!
//! In the coordinates `s = M^{-1} w` with `M = [u v]`, the count at `w` is the
//! number of `z in Z^2` with `z + s in K`, `K = M^{-1} [5a, 5b, -5a, -5b]`.
//! That is the depth of `s` in the arrangement of the translates `K - z`,
//! which is periodic, so only `s in [0, 1)^2` matters.

use serde::Serialize;

use super::planar::{cross, scale, sub, P2};
use super::quadruple::GoodQuadruple;

/// Above this many arrangement vertices the grid fallback is used.
pub const MAX_ARRANGEMENT_VERTICES: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KappaReport {
    pub kappa: u32,
    /// True when the value is the exact maximum over the arrangement.
    pub exact: bool,
    /// A translate `w` attaining the reported count (exact mode).
    pub witness: P2,
    pub candidates: usize,
}

struct Region {
    /// Vertices of `K`, counter-clockwise.
    verts: [P2; 4],
    /// Inward-facing constraints `n . p <= c`.
    cons: [(P2, f64); 4],
    lo: P2,
    hi: P2,
}

impl Region {
    fn new(q: &GoodQuadruple) -> Option<Self> {
        let u = q.u();
        let v = q.v;
        let det = cross(u, v);
        if det.abs() < 1e-12 {
            return None;
        }
        let inv = |p: P2| [(p[0] * v[1] - p[1] * v[0]) / det, (u[0] * p[1] - u[1] * p[0]) / det];
        let a = scale(q.a, 5.0);
        let b = scale(q.b, 5.0);
        let mut verts = [inv(a), inv(b), inv([-a[0], -a[1]]), inv([-b[0], -b[1]])];
        let area: f64 = (0..4).map(|i| cross(verts[i], verts[(i + 1) % 4])).sum();
        if area < 0.0 {
            verts.reverse();
        }
        let mut cons = [([0.0, 0.0], 0.0); 4];
        for i in 0..4 {
            let p = verts[i];
            let e = sub(verts[(i + 1) % 4], p);
            let len = e[0].hypot(e[1]);
            let n = [e[1] / len, -e[0] / len];
            cons[i] = (n, n[0] * p[0] + n[1] * p[1]);
        }
        let lo = [verts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min), verts.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min)];
        let hi = [verts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max), verts.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max)];
        Some(Region { verts, cons, lo, hi })
    }

    /// `#{z : z + s in K inflated by slack}`.
    fn depth(&self, s: P2, slack: f64) -> u32 {
        let mut count = 0;
        let z0 = ((self.lo[0] - s[0] - slack).floor() as i64, (self.lo[1] - s[1] - slack).floor() as i64);
        let z1 = ((self.hi[0] - s[0] + slack).ceil() as i64, (self.hi[1] - s[1] + slack).ceil() as i64);
        for zx in z0.0..=z1.0 {
            for zy in z0.1..=z1.1 {
                let p = [zx as f64 + s[0], zy as f64 + s[1]];
                if self.cons.iter().all(|&(n, c)| n[0] * p[0] + n[1] * p[1] <= c + slack) {
                    count += 1;
                }
            }
        }
        count
    }
}

fn segment_intersection(p: P2, p2: P2, q: P2, q2: P2) -> Option<P2> {
    let r = sub(p2, p);
    let s = sub(q2, q);
    let den = cross(r, s);
    if den.abs() < 1e-14 {
        return None;
    }
    let t = cross(sub(q, p), s) / den;
    let w = cross(sub(q, p), r) / den;
    if (-1e-12..=1.0 + 1e-12).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&w) {
        Some([p[0] + t * r[0], p[1] + t * r[1]])
    } else {
        None
    }
}

/// Upper bound on `max_w Card{z : w + z1 u + z2 v in [5a,5b,-5a,-5b]}`,
/// exact when the arrangement is small enough.
pub fn kappa(q: &GoodQuadruple) -> u32 {
    kappa_report(q).kappa
}

pub fn kappa_report(q: &GoodQuadruple) -> KappaReport {
    let region = Region::new(q).expect("good quadruples have independent u, v");
    let unit = |s: P2| (-1e-9..=1.0 + 1e-9).contains(&s[0]) && (-1e-9..=1.0 + 1e-9).contains(&s[1]);
    // Edges of translates K - z that meet the unit square.
    let mut edges: Vec<(P2, P2)> = Vec::new();
    let mut candidates: Vec<P2> = vec![[0.0, 0.0]];
    let zx = ((region.lo[0] - 1.0).floor() as i64 - 1, region.hi[0].ceil() as i64 + 1);
    let zy = ((region.lo[1] - 1.0).floor() as i64 - 1, region.hi[1].ceil() as i64 + 1);
    for x in zx.0..=zx.1 {
        for y in zy.0..=zy.1 {
            let t = [x as f64, y as f64];
            for i in 0..4 {
                let a = sub(region.verts[i], t);
                let b = sub(region.verts[(i + 1) % 4], t);
                if a[0].max(b[0]) < -1e-9 || a[0].min(b[0]) > 1.0 + 1e-9 || a[1].max(b[1]) < -1e-9 || a[1].min(b[1]) > 1.0 + 1e-9 {
                    continue;
                }
                if unit(a) {
                    candidates.push(a);
                }
                edges.push((a, b));
            }
        }
    }
    // Square sides bound the cells restricted to the fundamental domain.
    let square = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    for i in 0..4 {
        edges.push((square[i], square[(i + 1) % 4]));
        candidates.push(square[i]);
    }
    let mut exact = true;
    'outer: for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            if let Some(p) = segment_intersection(edges[i].0, edges[i].1, edges[j].0, edges[j].1) {
                if unit(p) {
                    candidates.push(p);
                    if candidates.len() > MAX_ARRANGEMENT_VERTICES {
                        exact = false;
                        break 'outer;
                    }
                }
            }
        }
    }
    let (best, at, count) = if exact {
        let mut best = 0;
        let mut at = [0.0, 0.0];
        for &s in &candidates {
            let d = region.depth(s, 1e-9);
            if d > best {
                best = d;
                at = s;
            }
        }
        (best, at, candidates.len())
    } else {
        // Every s lies within pitch/sqrt(2) of a grid point; inflate by that.
        let steps = 400usize;
        let pitch = 1.0 / steps as f64;
        let slack = pitch * std::f64::consts::FRAC_1_SQRT_2 + 1e-9;
        let mut best = 0;
        let mut at = [0.0, 0.0];
        for i in 0..steps {
            for j in 0..steps {
                let s = [i as f64 * pitch, j as f64 * pitch];
                let d = region.depth(s, slack);
                if d > best {
                    best = d;
                    at = s;
                }
            }
        }
        (best, at, steps * steps)
    };
    let (u, v) = (q.u(), q.v);
    KappaReport {
        kappa: best.max(1),
        exact,
        witness: [at[0] * u[0] + at[1] * v[0], at[0] * u[1] + at[1] * v[1]],
        candidates: count,
    }
}

/// Direct count `Card{z : w + z1 u + z2 v in [5a,5b,-5a,-5b]}` for one `w`.
pub fn translate_count(q: &GoodQuadruple, w: P2, z_range: i64) -> u32 {
    let p = q.parallelogram(5.0);
    let (u, v) = (q.u(), q.v);
    let mut count = 0;
    for z1 in -z_range..=z_range {
        for z2 in -z_range..=z_range {
            let x = [w[0] + z1 as f64 * u[0] + z2 as f64 * v[0], w[1] + z1 as f64 * u[1] + z2 as f64 * v[1]];
            if p.contains(x) {
                count += 1;
            }
        }
    }
    count
}
