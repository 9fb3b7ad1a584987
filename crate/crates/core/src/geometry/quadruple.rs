//! Good quadruples `(a, b, u, v)`, their zones, and the chimney sets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::planar::{add, cross, dot, neg, norm, parse_point, scale, segment_distance, sub, PlanarSet, P2};
use super::graph::{ball_offsets, GraphMap};
use super::TOL;
use crate::error::{Error, Result};

/// `(a, b, u, v)` with `u = (a + b)/2` derived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodQuadruple {
    pub a: P2,
    pub b: P2,
    pub v: P2,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadDiagnostics {
    pub u: P2,
    /// `v = (1 - t)(-a) + t b` for the closest `t`.
    pub t: f64,
    /// Distance from `v` to the segment `[-a, b]`.
    pub segment_residual: f64,
    /// Distances from the origin to the edge lines through `a, b` and
    /// through `b, -a`.
    pub edge_distances: [f64; 2],
    /// `min(edge distances) - R_S`.
    pub disk_margin: f64,
    pub midpoint_ok: bool,
    pub on_segment: bool,
    pub contains_disk: bool,
    /// The disk touches the parallelogram boundary.
    pub zero_margin: bool,
}

/// Checks the three good-quadruple conditions with explicit margins.
pub fn is_good_quadruple(a: P2, b: P2, v: P2, r_s: f64) -> (bool, QuadDiagnostics) {
    let u = scale(add(a, b), 0.5);
    let ma = neg(a);
    let d = sub(b, ma);
    let len2 = dot(d, d);
    let t = if len2 > 0.0 { dot(sub(v, ma), d) / len2 } else { 0.0 };
    let segment_residual = segment_distance(v, ma, b);
    let area = cross(a, b).abs();
    let line = |p: P2, q: P2| {
        let l = norm(sub(q, p));
        if l == 0.0 {
            0.0
        } else {
            area / l
        }
    };
    let edge_distances = [line(a, b), line(b, ma)];
    let min_edge = if area <= 1e-12 { 0.0 } else { edge_distances[0].min(edge_distances[1]) };
    let disk_margin = min_edge - r_s;
    let on_segment = segment_residual <= TOL;
    let contains_disk = area > 1e-12 && disk_margin >= -TOL;
    let diag = QuadDiagnostics {
        u,
        t,
        segment_residual,
        edge_distances,
        disk_margin,
        midpoint_ok: true,
        on_segment,
        contains_disk,
        zero_margin: contains_disk && disk_margin.abs() <= TOL,
    };
    (on_segment && contains_disk, diag)
}

impl GoodQuadruple {
    pub fn new(a: P2, b: P2, v: P2, r_s: f64) -> Result<Self> {
        let (ok, diag) = is_good_quadruple(a, b, v, r_s);
        if !ok {
            return Err(Error::pre(format!(
                "not a good quadruple: v residual {:e}, disk margin {:.6}",
                diag.segment_residual, diag.disk_margin
            )));
        }
        Ok(GoodQuadruple { a, b, v })
    }

    pub fn u(&self) -> P2 {
        scale(add(self.a, self.b), 0.5)
    }

    pub fn check(&self, r_s: f64) -> (bool, QuadDiagnostics) {
        is_good_quadruple(self.a, self.b, self.v, r_s)
    }

    /// The planar sets of the zones `L(a,u), L(u,b), L(b,v), L(v,-a)`.
    pub fn zone_sets(&self) -> [PlanarSet; 4] {
        let u = self.u();
        [
            PlanarSet::segment(self.a, u),
            PlanarSet::segment(u, self.b),
            PlanarSet::segment(self.b, self.v),
            PlanarSet::segment(self.v, neg(self.a)),
        ]
    }

    /// Planar set of `R(a,b) = Graph([3a, 3b, -3a, -3b])`.
    pub fn region_set(&self) -> PlanarSet {
        PlanarSet::scaled_parallelogram(self.a, self.b, 3.0)
    }

    /// `[sa, sb, -sa, -sb]`.
    pub fn parallelogram(&self, s: f64) -> PlanarSet {
        PlanarSet::scaled_parallelogram(self.a, self.b, s)
    }

    /// Largest norm among `a, b, v`.
    pub fn reach(&self) -> f64 {
        norm(self.a).max(norm(self.b)).max(norm(self.v))
    }

    pub fn rotate(&self, theta: f64) -> GoodQuadruple {
        let (s, c) = theta.sin_cos();
        let rot = |p: P2| [c * p[0] - s * p[1], s * p[0] + c * p[1]];
        GoodQuadruple { a: rot(self.a), b: rot(self.b), v: rot(self.v) }
    }
}

pub const ZONE_NAMES: [&str; 4] = ["L(a,u)", "L(u,b)", "L(b,v)", "L(v,-a)"];

/// Planar sets of the chimney `C(n,h,l)` and its sides, with
/// `a = (n, h - l)`, `b = (n, h + l)`.
#[derive(Clone, Debug)]
pub struct Chimney {
    pub a: P2,
    pub b: P2,
    /// `[a, b, -a, -b]`.
    pub c: PlanarSet,
    /// `[a, b] cup [-a, -b]`.
    pub lr: PlanarSet,
    /// `[-a, b] cup [-b, a]`.
    pub ud: PlanarSet,
}

pub fn chimney_sets(n: f64, h: f64, l: f64) -> Result<Chimney> {
    if !(n > 0.0 && l > 0.0) {
        return Err(Error::pre("chimney needs n > 0 and l > 0"));
    }
    let a = [n, h - l];
    let b = [n, h + l];
    Ok(Chimney {
        a,
        b,
        c: PlanarSet::parallelogram(a, b),
        lr: PlanarSet::segment(a, b).union(PlanarSet::segment(neg(a), neg(b))),
        ud: PlanarSet::segment(neg(a), b).union(PlanarSet::segment(neg(b), a)),
    })
}

/// `l_B(n, h) = n_B (1 + |h| / n)`.
pub fn ell_b(n: f64, h: f64, n_b: f64) -> f64 {
    assert!(n > 0.0, "ell_b needs n > 0");
    n_b * (1.0 + h.abs() / n)
}

/// Smallest integer `n_B` with `B(k) cap Graph(R^2 minus (-n_B+1, n_B-1)^2)`
/// empty, i.e. every `x in B(k)` has `|pi(x)|_inf < n_B - 1 - R_S`.
pub fn n_b(map: &GraphMap, k: f64) -> f64 {
    let reach = ball_offsets(map.group(), k)
        .iter()
        .map(|d| {
            let p = map.basis().project_int(d);
            p[0].abs().max(p[1].abs())
        })
        .fold(0.0, f64::max);
    (reach + map.r_s() + 1.0 + TOL).floor() + 1.0
}

impl fmt::Display for GoodQuadruple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a=({},{}) b=({},{}) v=({},{})", self.a[0], self.a[1], self.b[0], self.b[1], self.v[0], self.v[1])
    }
}

impl FromStr for GoodQuadruple {
    type Err = Error;

    /// `a=(x,y) b=(x,y) v=(x,y)`; the goodness conditions are not checked here.
    fn from_str(s: &str) -> Result<Self> {
        let mut a = None;
        let mut b = None;
        let mut v = None;
        for tok in s.split_whitespace() {
            let (k, val) = tok.split_once('=').ok_or_else(|| Error::parse(0, format!("expected key=(x,y), got `{tok}`")))?;
            let p = parse_point(val)?;
            match k {
                "a" => a = Some(p),
                "b" => b = Some(p),
                "v" => v = Some(p),
                "u" => {}
                _ => return Err(Error::parse(0, format!("unknown quadruple key `{k}`"))),
            }
        }
        match (a, b, v) {
            (Some(a), Some(b), Some(v)) => Ok(GoodQuadruple { a, b, v }),
            _ => Err(Error::parse(0, "quadruple needs a, b and v")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_quadruple() {
        let (ok, d) = is_good_quadruple([5.0, -3.0], [5.0, 3.0], [5.0, 3.0], 1.0);
        assert!(ok);
        assert_eq!(d.u, [5.0, 0.0]);
        // |a x b| = 30, |b - a| = 6, |a + b| = 10
        assert!((d.edge_distances[0] - 5.0).abs() < 1e-12);
        assert!((d.edge_distances[1] - 3.0).abs() < 1e-12);
        assert!((d.disk_margin - 2.0).abs() < 1e-12);
        assert!(!d.zero_margin);
    }

    #[test]
    fn bad_quadruples() {
        assert!(!is_good_quadruple([5.0, -3.0], [5.0, 3.0], [6.0, 3.0], 1.0).0);
        assert!(!is_good_quadruple([1.0, 1.0], [1.0, 1.0], [1.0, 1.0], 1.0).0);
        let (ok, d) = is_good_quadruple([1.0, -1.0], [1.0, 1.0], [1.0, 1.0], 1.0);
        assert!(ok && d.zero_margin);
    }

    #[test]
    fn ell_b_values() {
        assert_eq!(ell_b(10.0, 0.0, 3.0), 3.0);
        assert_eq!(ell_b(10.0, 10.0, 3.0), 6.0);
        assert!(ell_b(10.0, -4.0, 3.0) < ell_b(10.0, 5.0, 3.0));
    }

    #[test]
    fn quadruple_literal_round_trip() {
        let q: GoodQuadruple = "a=(5,-3) b=(5,3) v=(5,3)".parse().unwrap();
        assert_eq!(q.to_string().parse::<GoodQuadruple>().unwrap(), q);
        assert!("a=(5,-3) b=(5,3)".parse::<GoodQuadruple>().is_err());
    }
}
