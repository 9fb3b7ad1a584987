//! Planar sets: finite unions of convex pieces, possibly unbounded.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TOL;
use crate::error::{Error, Result};

pub type P2 = [f64; 2];

#[inline]
pub fn add(a: P2, b: P2) -> P2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(a: P2, s: f64) -> P2 {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn neg(a: P2) -> P2 {
    [-a[0], -a[1]]
}

#[inline]
pub fn dot(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: P2) -> f64 {
    a[0].hypot(a[1])
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn segment_distance(p: P2, a: P2, b: P2) -> f64 {
    let d = sub(b, a);
    let len2 = dot(d, d);
    if len2 == 0.0 {
        return norm(sub(p, a));
    }
    let t = (dot(sub(p, a), d) / len2).clamp(0.0, 1.0);
    norm(sub(p, add(a, scale(d, t))))
}

/// `{p : normal . p <= offset}` with a unit normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub normal: P2,
    pub offset: f64,
}

impl HalfPlane {
    pub fn new(normal: P2, offset: f64) -> Result<Self> {
        let n = norm(normal);
        if !(n > 0.0) || !offset.is_finite() {
            return Err(Error::pre("half-plane needs a nonzero normal and finite offset"));
        }
        Ok(HalfPlane { normal: scale(normal, 1.0 / n), offset: offset / n })
    }

    /// Positive outside, negative inside.
    #[inline]
    pub fn excess(&self, p: P2) -> f64 {
        dot(self.normal, p) - self.offset
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Piece {
    /// Convex hull, stored as its counter-clockwise vertex cycle (1 or 2
    /// vertices for a point or segment).
    Hull(Vec<P2>),
    /// Intersection of half-planes; no constraints means the whole plane.
    HalfPlanes(Vec<HalfPlane>),
}

fn convex_hull(mut pts: Vec<P2>) -> Vec<P2> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| norm(sub(*a, *b)) <= 1e-12);
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<P2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(sub(lower[lower.len() - 1], lower[lower.len() - 2]), sub(p, lower[lower.len() - 2])) <= 1e-12 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<P2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(sub(upper[upper.len() - 1], upper[upper.len() - 2]), sub(p, upper[upper.len() - 2])) <= 1e-12 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn line_intersection(h: &HalfPlane, k: &HalfPlane) -> Option<P2> {
    let det = cross(h.normal, k.normal);
    if det.abs() < 1e-12 {
        return None;
    }
    Some([
        (h.offset * k.normal[1] - k.offset * h.normal[1]) / det,
        (h.normal[0] * k.offset - k.normal[0] * h.offset) / det,
    ])
}

impl Piece {
    pub fn hull(points: Vec<P2>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::pre("hull of no points"));
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::pre("non-finite hull vertex"));
        }
        Ok(Piece::Hull(convex_hull(points)))
    }

    fn feasible(hs: &[HalfPlane], p: P2) -> bool {
        hs.iter().all(|h| h.excess(p) <= TOL)
    }

    fn edges(v: &[P2]) -> impl Iterator<Item = (P2, P2)> + '_ {
        let n = v.len();
        (0..n).map(move |i| (v[i], v[(i + 1) % n]))
    }

    pub fn distance(&self, p: P2) -> f64 {
        match self {
            Piece::Hull(v) => {
                if v.len() >= 3 && Self::edges(v).all(|(a, b)| cross(sub(b, a), sub(p, a)) >= 0.0) {
                    return 0.0;
                }
                if v.len() == 1 {
                    return norm(sub(p, v[0]));
                }
                Self::edges(v).map(|(a, b)| segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
            }
            Piece::HalfPlanes(hs) => {
                if hs.iter().all(|h| h.excess(p) <= 0.0) {
                    return 0.0;
                }
                let mut best = f64::INFINITY;
                for h in hs {
                    let q = sub(p, scale(h.normal, h.excess(p)));
                    if Self::feasible(hs, q) {
                        best = best.min(norm(sub(p, q)));
                    }
                }
                for i in 0..hs.len() {
                    for j in i + 1..hs.len() {
                        if let Some(q) = line_intersection(&hs[i], &hs[j]) {
                            if Self::feasible(hs, q) {
                                best = best.min(norm(sub(p, q)));
                            }
                        }
                    }
                }
                best
            }
        }
    }

    /// Distance to the topological boundary of the piece.
    pub fn boundary_distance(&self, p: P2) -> f64 {
        match self {
            Piece::Hull(v) => {
                if v.len() < 3 {
                    return self.distance(p);
                }
                Self::edges(v).map(|(a, b)| segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
            }
            Piece::HalfPlanes(hs) => {
                let d = self.distance(p);
                if d > 0.0 {
                    return d;
                }
                hs.iter().map(|h| -h.excess(p)).fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Radius of a disk about the origin containing the piece, if bounded.
    pub fn bounding_radius(&self) -> Option<f64> {
        match self {
            Piece::Hull(v) => Some(v.iter().map(|&q| norm(q)).fold(0.0, f64::max)),
            Piece::HalfPlanes(hs) => {
                let mut angles: Vec<f64> = hs.iter().map(|h| h.normal[1].atan2(h.normal[0])).collect();
                angles.sort_by(f64::total_cmp);
                let mut vertices = Vec::new();
                for i in 0..hs.len() {
                    for j in i + 1..hs.len() {
                        if let Some(q) = line_intersection(&hs[i], &hs[j]) {
                            if Self::feasible(hs, q) {
                                vertices.push(q);
                            }
                        }
                    }
                }
                let spans = angles.len() >= 3
                    && angles.windows(2).all(|w| w[1] - w[0] < std::f64::consts::PI - 1e-12)
                    && angles[0] + 2.0 * std::f64::consts::PI - angles[angles.len() - 1] < std::f64::consts::PI - 1e-12;
                if !spans {
                    // Reported unbounded even when the intersection happens to be empty.
                    return None;
                }
                Some(vertices.iter().map(|&q| norm(q)).fold(0.0, f64::max))
            }
        }
    }

    pub fn translate(&self, w: P2) -> Piece {
        match self {
            Piece::Hull(v) => Piece::Hull(v.iter().map(|&q| add(q, w)).collect()),
            Piece::HalfPlanes(hs) => Piece::HalfPlanes(
                hs.iter().map(|h| HalfPlane { normal: h.normal, offset: h.offset + dot(h.normal, w) }).collect(),
            ),
        }
    }

    /// Image under `p -> s p` for `s > 0`.
    pub fn scale(&self, s: f64) -> Piece {
        match self {
            Piece::Hull(v) => Piece::Hull(v.iter().map(|&q| scale(q, s)).collect()),
            Piece::HalfPlanes(hs) => {
                Piece::HalfPlanes(hs.iter().map(|h| HalfPlane { normal: h.normal, offset: h.offset * s }).collect())
            }
        }
    }
}

/// Finite union of convex pieces. The empty union is the empty set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanarSet {
    pieces: Vec<Piece>,
}

impl PlanarSet {
    pub fn empty() -> Self {
        PlanarSet { pieces: Vec::new() }
    }

    pub fn from_pieces(pieces: Vec<Piece>) -> Self {
        PlanarSet { pieces }
    }

    pub fn point(p: P2) -> Self {
        Self::from_pieces(vec![Piece::Hull(vec![p])])
    }

    /// `[a, b]`.
    pub fn segment(a: P2, b: P2) -> Self {
        Self::from_pieces(vec![Piece::Hull(convex_hull(vec![a, b]))])
    }

    /// `[a, b, -a, -b] = {la + mb : |l| + |m| <= 1}`.
    pub fn parallelogram(a: P2, b: P2) -> Self {
        Self::from_pieces(vec![Piece::Hull(convex_hull(vec![a, b, neg(a), neg(b)]))])
    }

    /// `[sa, sb, -sa, -sb]`.
    pub fn scaled_parallelogram(a: P2, b: P2, s: f64) -> Self {
        Self::parallelogram(scale(a, s), scale(b, s))
    }

    pub fn polygon(points: Vec<P2>) -> Result<Self> {
        Ok(Self::from_pieces(vec![Piece::hull(points)?]))
    }

    pub fn half_planes(constraints: Vec<HalfPlane>) -> Self {
        Self::from_pieces(vec![Piece::HalfPlanes(constraints)])
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`; infinite bounds allowed.
    pub fn rect(x: (f64, f64), y: (f64, f64)) -> Self {
        let mut hs = Vec::new();
        let mut push = |n: P2, c: f64| {
            if c.is_finite() {
                hs.push(HalfPlane { normal: n, offset: c });
            }
        };
        push([-1.0, 0.0], -x.0);
        push([1.0, 0.0], x.1);
        push([0.0, -1.0], -y.0);
        push([0.0, 1.0], y.1);
        Self::half_planes(hs)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn union(mut self, other: PlanarSet) -> Self {
        self.pieces.extend(other.pieces);
        self
    }

    pub fn translate(&self, w: P2) -> Self {
        Self::from_pieces(self.pieces.iter().map(|p| p.translate(w)).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_pieces(self.pieces.iter().map(|p| p.scale(s)).collect())
    }

    pub fn distance(&self, p: P2) -> f64 {
        self.pieces.iter().map(|c| c.distance(p)).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: P2) -> bool {
        self.distance(p) <= TOL
    }

    /// Distance to the union of the pieces' boundaries. For a single piece
    /// this is the distance to the boundary of the set; for unions it is a
    /// lower bound (boundaries buried inside other pieces are counted).
    pub fn boundary_distance(&self, p: P2) -> f64 {
        self.pieces.iter().map(|c| c.boundary_distance(p)).fold(f64::INFINITY, f64::min)
    }

    pub fn bounding_radius(&self) -> Option<f64> {
        self.pieces.iter().try_fold(0.0f64, |acc, c| c.bounding_radius().map(|r| acc.max(r)))
    }
}

fn fmt_point(p: P2) -> String {
    format!("({},{})", p[0], p[1])
}

impl fmt::Display for PlanarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return write!(f, "empty");
        }
        let parts: Vec<String> = self
            .pieces
            .iter()
            .map(|piece| match piece {
                Piece::Hull(v) => {
                    let pts: Vec<String> = v.iter().map(|&q| fmt_point(q)).collect();
                    format!("hull {}", pts.join(" "))
                }
                Piece::HalfPlanes(hs) if hs.is_empty() => "plane".to_string(),
                Piece::HalfPlanes(hs) => {
                    let cs: Vec<String> = hs.iter().map(|h| format!("{} <= {}", fmt_point(h.normal), h.offset)).collect();
                    format!("halfplanes {}", cs.join("; "))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" | "))
    }
}

/// Parses a `(x,y)` literal.
pub fn parse_point(s: &str) -> Result<P2> {
    let t = s.trim();
    let inner = t
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::parse(0, format!("expected (x,y), got `{t}`")))?;
    let parts: Vec<&str> = inner.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::parse(0, format!("expected two coordinates in `{t}`")));
    }
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| Error::parse(0, format!("bad number `{}`: {e}", x.trim())));
    Ok([num(parts[0])?, num(parts[1])?])
}

/// Splits `"(1,2) (3, 4)"` into point literals.
pub(crate) fn split_points(s: &str) -> Result<Vec<P2>> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let end = rest.find(')').ok_or_else(|| Error::parse(0, format!("unclosed point in `{s}`")))?;
        out.push(parse_point(&rest[..=end])?);
        rest = rest[end + 1..].trim_start();
    }
    Ok(out)
}

fn parse_piece(s: &str) -> Result<PlanarSet> {
    let s = s.trim();
    let (word, rest) = s.split_once(char::is_whitespace).unwrap_or((s, ""));
    match word {
        "empty" => Ok(PlanarSet::empty()),
        "plane" => Ok(PlanarSet::half_planes(Vec::new())),
        "point" => {
            let p = split_points(rest)?;
            if p.len() != 1 {
                return Err(Error::parse(0, "point takes one coordinate pair"));
            }
            Ok(PlanarSet::point(p[0]))
        }
        "segment" => {
            let p = split_points(rest)?;
            if p.len() != 2 {
                return Err(Error::parse(0, "segment takes two points"));
            }
            Ok(PlanarSet::segment(p[0], p[1]))
        }
        "parallelogram" => {
            let (pts, factor) = match rest.split_once(" x ") {
                Some((p, f)) => (p, f.trim().parse::<f64>().map_err(|e| Error::parse(0, format!("bad scale: {e}")))?),
                None => (rest, 1.0),
            };
            let p = split_points(pts)?;
            if p.len() != 2 {
                return Err(Error::parse(0, "parallelogram takes two points"));
            }
            Ok(PlanarSet::scaled_parallelogram(p[0], p[1], factor))
        }
        "hull" => PlanarSet::polygon(split_points(rest)?),
        "halfplanes" => {
            let mut hs = Vec::new();
            for c in rest.split(';') {
                let (n, off) = c.split_once("<=").ok_or_else(|| Error::parse(0, format!("expected `(nx,ny) <= c` in `{c}`")))?;
                let off = off.trim().parse::<f64>().map_err(|e| Error::parse(0, format!("bad offset: {e}")))?;
                hs.push(HalfPlane::new(parse_point(n)?, off)?);
            }
            Ok(PlanarSet::half_planes(hs))
        }
        other => Err(Error::parse(0, format!("unknown planar set `{other}`"))),
    }
}

impl FromStr for PlanarSet {
    type Err = Error;

    /// Grammar: `piece ( '|' piece )*` with pieces `point P`, `segment P P`,
    /// `parallelogram P P [x s]`, `hull P+`, `halfplanes P <= c (; P <= c)*`,
    /// `plane`, `empty`; `P = (x,y)`.
    fn from_str(s: &str) -> Result<Self> {
        let mut out = PlanarSet::empty();
        for part in s.split('|') {
            out = out.union(parse_piece(part)?);
        }
        Ok(out)
    }
}
