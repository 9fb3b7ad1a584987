//! The `Graph_e` map from planar sets to vertex sets, balls `B(k)` and
//! Minkowski inflation by `B(1)`.

use std::collections::HashSet;

use super::basis::Basis;
use super::planar::{PlanarSet, P2};
use super::TOL;
use crate::cayley::CayleyView;
use crate::error::{Error, Result};
use crate::marked_group::{GroupElement, MarkedAbelianGroup};
use crate::percolation::window::box_elements;
use crate::percolation::{EdgeWindow, VertexSet};

/// `R_S`. Basis-independent since the basis is orthonormal.
pub fn r_s(group: &MarkedAbelianGroup, _basis: &Basis) -> f64 {
    group.r_s()
}

/// `Graph_e` for a fixed group and basis: `x in Graph(X)` iff
/// `dist(pi_e(x_free), X) <= R_S`.
#[derive(Clone, Debug)]
pub struct GraphMap {
    group: MarkedAbelianGroup,
    basis: Basis,
    r_s: f64,
    offsets: Vec<Vec<i64>>,
}

impl GraphMap {
    pub fn new(group: MarkedAbelianGroup, basis: Basis) -> Result<Self> {
        if group.rank() < 2 {
            return Err(Error::RankTooSmall { rank: group.rank() });
        }
        if basis.dim() != group.rank() {
            return Err(Error::DimensionMismatch { expected: group.rank(), found: basis.dim() });
        }
        let r_s = group.r_s();
        let offsets = ball_offsets(&group, 1.0);
        Ok(GraphMap { group, basis, r_s, offsets })
    }

    pub fn standard(group: MarkedAbelianGroup) -> Result<Self> {
        let r = group.rank();
        Self::new(group, Basis::standard(r))
    }

    pub fn group(&self) -> &MarkedAbelianGroup {
        &self.group
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn r_s(&self) -> f64 {
        self.r_s
    }

    /// Free offsets `d` with `|d| <= R_S`, i.e. the free parts of `B(1)`.
    pub fn unit_offsets(&self) -> &[Vec<i64>] {
        &self.offsets
    }

    #[inline]
    pub fn project(&self, x: &GroupElement) -> P2 {
        self.basis.project_int(&x.free)
    }

    pub fn contains(&self, set: &PlanarSet, x: &GroupElement) -> bool {
        self.contains_with_slack(set, x, 0.0)
    }

    /// Membership with the threshold moved by `slack` (negative shrinks).
    pub fn contains_with_slack(&self, set: &PlanarSet, x: &GroupElement, slack: f64) -> bool {
        set.distance(self.project(x)) <= self.r_s + TOL + slack
    }

    /// `x in Graph(boundary of X)`.
    pub fn in_boundary(&self, set: &PlanarSet, x: &GroupElement) -> bool {
        set.boundary_distance(self.project(x)) <= self.r_s + TOL
    }

    /// `x in B(k)`.
    pub fn in_ball(&self, x: &GroupElement, k: f64) -> bool {
        in_ball(x, k * self.r_s)
    }

    /// `x in Graph(X) + B(1)`.
    pub fn in_inflated(&self, set: &PlanarSet, x: &GroupElement) -> bool {
        let base = self.project(x);
        self.offsets.iter().any(|d| {
            let q = self.basis.project_int(d);
            set.distance([base[0] - q[0], base[1] - q[1]]) <= self.r_s + TOL
        })
    }

    /// Members of `Graph(X)`, restricted to the free box `[-w, w]^r` when a
    /// window is given. Without a window the set must be bounded and the
    /// group of rank 2 (otherwise the cylinder is infinite).
    pub fn materialize(&self, set: &PlanarSet, window: Option<i64>) -> Result<Vec<GroupElement>> {
        let w = match window {
            Some(w) => w,
            None => {
                let rad = set.bounding_radius().filter(|_| self.group.rank() == 2).ok_or_else(|| {
                    Error::pre("unbounded Graph(X) needs an explicit window")
                })?;
                (rad + self.r_s + TOL).floor() as i64
            }
        };
        Ok(box_elements(&self.group, w).into_iter().filter(|x| self.contains(set, x)).collect())
    }
}

#[inline]
fn in_ball(x: &GroupElement, radius: f64) -> bool {
    let n2: i64 = x.free.iter().map(|c| c * c).sum();
    (n2 as f64) <= radius * radius + TOL
}

/// Free vectors `d` with `|d| <= k R_S`.
pub fn ball_offsets(group: &MarkedAbelianGroup, k: f64) -> Vec<Vec<i64>> {
    let rho = k * group.r_s();
    let l = (rho + TOL).floor() as i64;
    let r = group.rank();
    let mut out = Vec::new();
    let mut d = vec![-l; r];
    if r == 0 {
        return vec![Vec::new()];
    }
    loop {
        if (d.iter().map(|c| c * c).sum::<i64>() as f64) <= rho * rho + TOL {
            out.push(d.clone());
        }
        let mut c = r;
        loop {
            if c == 0 {
                return out;
            }
            c -= 1;
            if d[c] < l {
                d[c] += 1;
                break;
            }
            d[c] = -l;
        }
    }
}

/// `Z + B(1)` for an arbitrary vertex predicate `Z`. Torsion is saturated:
/// `B(1)` contains every torsion element.
pub fn inflate<'a>(group: &'a MarkedAbelianGroup, pred: impl Fn(&GroupElement) -> bool + 'a) -> impl Fn(&GroupElement) -> bool + 'a {
    let offsets = ball_offsets(group, 1.0);
    let tors = group.torsion_elements();
    move |x: &GroupElement| {
        offsets.iter().any(|d| {
            let free: Vec<i64> = x.free.iter().zip(d).map(|(a, b)| a - b).collect();
            tors.iter().any(|t| pred(&GroupElement { free: free.clone(), tor: t.clone() }))
        })
    }
}

/// `(Z + B(1))` restricted to the window, for `Z` a window vertex set.
pub fn inflate_set(window: &EdgeWindow, set: &VertexSet, group: &MarkedAbelianGroup) -> VertexSet {
    let frees: HashSet<&[i64]> = set.iter().map(|i| window.vertex(i).free.as_slice()).collect();
    let offsets = ball_offsets(group, 1.0);
    let mut buf = vec![0i64; group.rank()];
    let mask = window
        .vertices()
        .iter()
        .map(|x| {
            offsets.iter().any(|d| {
                for (k, b) in buf.iter_mut().enumerate() {
                    *b = x.free[k] - d[k];
                }
                frees.contains(buf.as_slice())
            })
        })
        .collect();
    VertexSet::from_mask(mask)
}

/// Separation oracle: a path from inside `Graph(X)` to outside meets
/// `Graph(boundary X)`. Errors when the path is not a graph path or does not
/// straddle `Graph(X)`.
pub fn boundary_separation_check(view: &CayleyView, path: &[GroupElement], set: &PlanarSet, map: &GraphMap) -> Result<bool> {
    if path.len() < 2 {
        return Err(Error::pre("path needs at least two vertices"));
    }
    for w in path.windows(2) {
        if !view.adjacent(&w[0], &w[1]) {
            return Err(Error::pre(format!("{} and {} are not adjacent", w[0], w[1])));
        }
    }
    let inside = map.contains(set, &path[0]);
    let last = map.contains(set, &path[path.len() - 1]);
    if inside == last {
        return Err(Error::pre("path endpoints do not straddle Graph(X)"));
    }
    Ok(path.iter().any(|x| map.in_boundary(set, x)))
}

/// Largest `eps` such that every basis `f` with `|e - f|_op <= eps`
/// satisfies `Graph_e(X) cap B(N) subset (Graph_f(X) + B(1)) cap B(N)`.
/// Certified pointwise: each `x` is witnessed by the neighbour `y in x + B(1)`
/// with the largest margin, which moves by at most `eps |y|` under `f`.
pub fn neighbourhood_radius(map: &GraphMap, set: &PlanarSet, n: f64) -> f64 {
    let r_s = map.r_s();
    let scale = (n + 1.0) * r_s;
    let mut eps = f64::INFINITY;
    for free in ball_offsets(map.group(), n) {
        let p = map.basis().project_int(&free);
        if set.distance(p) > r_s + TOL {
            continue;
        }
        let best = map
            .unit_offsets()
            .iter()
            .map(|d| {
                let q = map.basis().project_int(d);
                r_s - set.distance([p[0] + q[0], p[1] + q[1]])
            })
            .fold(f64::NEG_INFINITY, f64::max);
        eps = eps.min(best / scale);
    }
    eps.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marked_group::parse_group;

    #[test]
    fn segment_graph_on_square_lattice() {
        let map = GraphMap::standard(parse_group("2;").unwrap()).unwrap();
        let set = PlanarSet::segment([0.0, 0.0], [2.0, 0.0]);
        let pts = map.materialize(&set, None).unwrap();
        assert_eq!(pts.len(), 11);
        assert!(pts.iter().any(|x| x.free == vec![-1, 0]));
        assert!(!pts.iter().any(|x| x.free == vec![-1, 1]));
    }

    #[test]
    fn point_graph_is_a_ball_times_torsion() {
        let g = parse_group("[Z^2 x Z/3; (1,0,0), (0,1,0), (0,0,1)]").unwrap();
        let map = GraphMap::standard(g).unwrap();
        let pts = map.materialize(&PlanarSet::point([0.0, 0.0]), None).unwrap();
        assert_eq!(pts.len(), 5 * 3);
    }

    #[test]
    fn unbounded_without_window_is_rejected() {
        let map = GraphMap::standard(parse_group("3;").unwrap()).unwrap();
        assert!(map.materialize(&PlanarSet::point([0.0, 0.0]), None).is_err());
        assert_eq!(map.materialize(&PlanarSet::point([0.0, 0.0]), Some(1)).unwrap().len(), 5 * 3);
    }

    #[test]
    fn inflating_a_singleton_gives_the_unit_ball() {
        let g = parse_group("2;").unwrap();
        let origin = g.zero();
        let pred = inflate(&g, |x: &GroupElement| *x == origin);
        let hits = box_elements(&g, 3).into_iter().filter(|x| pred(x)).count();
        assert_eq!(hits, 5);
        let none = inflate(&g, |_: &GroupElement| false);
        assert!(!none(&g.zero()));
    }
}
