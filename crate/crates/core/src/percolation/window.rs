//! Finite vertex/edge windows of a Cayley graph.

use std::collections::HashMap;

use crate::cayley::CayleyView;
use crate::error::{Error, Result};
use crate::marked_group::{GroupElement, MarkedAbelianGroup};

/// Vertex subset of a window, as a membership mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexSet {
    mask: Vec<bool>,
    count: usize,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        VertexSet { mask: vec![false; n], count: 0 }
    }

    pub fn all(n: usize) -> Self {
        VertexSet { mask: vec![true; n], count: n }
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        let count = mask.iter().filter(|&&b| b).count();
        VertexSet { mask, count }
    }

    pub fn from_indices(n: usize, idx: impl IntoIterator<Item = u32>) -> Self {
        let mut s = Self::empty(n);
        for i in idx {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, i: u32) {
        if !self.mask[i as usize] {
            self.mask[i as usize] = true;
            self.count += 1;
        }
    }

    #[inline]
    pub fn contains(&self, i: u32) -> bool {
        self.mask[i as usize]
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn universe(&self) -> usize {
        self.mask.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u32)
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        Self::from_mask(self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect())
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        Self::from_mask(self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect())
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| !*a || *b)
    }
}

/// Which vertices count as the window's boundary.
pub enum BoundaryRule {
    /// Vertices with at least one graph neighbour outside the window.
    Inner,
    Explicit(Vec<bool>),
    Empty,
}

#[derive(Clone, Debug)]
enum Locator {
    Hash(HashMap<GroupElement, u32>),
    /// Free box `[-l, l]^r` times the full torsion, mixed radix with the
    /// last coordinate fastest.
    DenseBox { l: i64, torsion: Vec<i64> },
}

#[derive(Clone, Debug)]
pub struct EdgeWindow {
    vertices: Vec<GroupElement>,
    locator: Locator,
    edges: Vec<(u32, u32)>,
    boundary: VertexSet,
    offsets: Vec<u32>,
    adj: Vec<(u32, u32)>,
}

impl EdgeWindow {
    /// Window on an explicit vertex list (order preserved, duplicates rejected).
    pub fn from_vertices(view: &CayleyView, vertices: Vec<GroupElement>, rule: BoundaryRule) -> Result<Self> {
        let mut map = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            view.group().check(v)?;
            if map.insert(v.clone(), i as u32).is_some() {
                return Err(Error::pre(format!("duplicate window vertex {v}")));
            }
        }
        Ok(Self::assemble(view, vertices, Locator::Hash(map), rule))
    }

    /// All vertices with `|x_free_i| <= l` for every free coordinate.
    pub fn free_box(view: &CayleyView, l: i64) -> Self {
        let g = view.group();
        let vertices = box_elements(g, l);
        let locator = Locator::DenseBox { l, torsion: g.torsion().to_vec() };
        Self::assemble(view, vertices, locator, BoundaryRule::Inner)
    }

    /// Geometric ball `B(k) = {x : |x_free| <= k R_S}` with inner boundary.
    pub fn geometric_ball(view: &CayleyView, k: f64) -> Self {
        let vertices = geometric_ball_elements(view.group(), k);
        Self::from_vertices(view, vertices, BoundaryRule::Inner).expect("distinct ball vertices")
    }

    /// Vertices of `[-l, l]^r x T` satisfying a predicate.
    pub fn from_predicate(view: &CayleyView, l: i64, pred: impl Fn(&GroupElement) -> bool, rule: BoundaryRule) -> Self {
        let vertices = box_elements(view.group(), l).into_iter().filter(|x| pred(x)).collect();
        Self::from_vertices(view, vertices, rule).expect("distinct box vertices")
    }

    /// Word-metric ball of radius `k`.
    pub fn word_ball(view: &CayleyView, k: u32) -> Result<Self> {
        let ball = view.word_ball(k)?;
        Self::from_vertices(view, ball.elements, BoundaryRule::Inner)
    }

    fn assemble(view: &CayleyView, vertices: Vec<GroupElement>, locator: Locator, rule: BoundaryRule) -> Self {
        let g = view.group();
        let mut w = EdgeWindow {
            vertices,
            locator,
            edges: Vec::new(),
            boundary: VertexSet::empty(0),
            offsets: Vec::new(),
            adj: Vec::new(),
        };
        let n = w.vertices.len();
        let mut edges = Vec::new();
        let mut inner = vec![false; n];
        let involution: Vec<bool> = view.step_classes().iter().map(|s| g.neg(s) == *s).collect();
        for i in 0..n {
            for (c, s) in view.step_classes().iter().enumerate() {
                let y = g.add(&w.vertices[i], s);
                match w.index_of(&y) {
                    Some(j) => {
                        if !involution[c] || (i as u32) < j {
                            edges.push((i as u32, j));
                        }
                    }
                    None => inner[i] = true,
                }
                if !involution[c] {
                    let y = g.sub(&w.vertices[i], s);
                    if w.index_of(&y).is_none() {
                        inner[i] = true;
                    }
                }
            }
        }
        let mut deg = vec![0u32; n + 1];
        for &(a, b) in &edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        let mut offsets = vec![0u32; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + deg[i];
        }
        let mut fill = offsets.clone();
        let mut adj = vec![(0u32, 0u32); offsets[n] as usize];
        for (e, &(a, b)) in edges.iter().enumerate() {
            adj[fill[a as usize] as usize] = (b, e as u32);
            fill[a as usize] += 1;
            adj[fill[b as usize] as usize] = (a, e as u32);
            fill[b as usize] += 1;
        }
        w.boundary = match rule {
            BoundaryRule::Inner => VertexSet::from_mask(inner),
            BoundaryRule::Explicit(m) => VertexSet::from_mask(m),
            BoundaryRule::Empty => VertexSet::empty(n),
        };
        w.edges = edges;
        w.offsets = offsets;
        w.adj = adj;
        w
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[GroupElement] {
        &self.vertices
    }

    pub fn vertex(&self, i: u32) -> &GroupElement {
        &self.vertices[i as usize]
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn boundary(&self) -> &VertexSet {
        &self.boundary
    }

    /// `(neighbour, edge id)` pairs of a vertex.
    #[inline]
    pub fn incident(&self, v: u32) -> &[(u32, u32)] {
        &self.adj[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }

    pub fn index_of(&self, x: &GroupElement) -> Option<u32> {
        match &self.locator {
            Locator::Hash(m) => m.get(x).copied(),
            Locator::DenseBox { l, torsion } => {
                let side = 2 * l + 1;
                let mut idx: i64 = 0;
                for &c in &x.free {
                    if c.abs() > *l {
                        return None;
                    }
                    idx = idx * side + (c + l);
                }
                for (&c, &t) in x.tor.iter().zip(torsion) {
                    idx = idx * t + c;
                }
                Some(idx as u32)
            }
        }
    }

    pub fn set_where(&self, pred: impl Fn(&GroupElement) -> bool) -> VertexSet {
        VertexSet::from_mask(self.vertices.iter().map(pred).collect())
    }

    pub fn set_of(&self, elements: &[GroupElement]) -> VertexSet {
        VertexSet::from_indices(self.vertex_count(), elements.iter().filter_map(|x| self.index_of(x)))
    }

    pub fn all(&self) -> VertexSet {
        VertexSet::all(self.vertex_count())
    }
}

/// Free box `[-l, l]^r` times all torsion, in dense mixed-radix order.
pub fn box_elements(g: &MarkedAbelianGroup, l: i64) -> Vec<GroupElement> {
    let tors = g.torsion_elements();
    let r = g.rank();
    let side = (2 * l + 1) as usize;
    let total = side.pow(r as u32);
    let mut out = Vec::with_capacity(total * tors.len());
    let mut free = vec![-l; r];
    for _ in 0..total {
        for t in &tors {
            out.push(GroupElement { free: free.clone(), tor: t.clone() });
        }
        for c in (0..r).rev() {
            if free[c] < l {
                free[c] += 1;
                break;
            }
            free[c] = -l;
        }
    }
    out
}

/// `B(k) = {x : |x_free| <= k R_S}` (all torsion), box order.
pub fn geometric_ball_elements(g: &MarkedAbelianGroup, k: f64) -> Vec<GroupElement> {
    let rho = k * g.r_s();
    let l = (rho + 1e-9).floor() as i64;
    let lim = rho * rho + 1e-9;
    box_elements(g, l)
        .into_iter()
        .filter(|x| x.free.iter().map(|&c| (c * c) as f64).sum::<f64>() <= lim)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marked_group::parse_group;

    fn view(s: &str) -> CayleyView {
        CayleyView::new(parse_group(s).unwrap())
    }

    #[test]
    fn square_box_counts() {
        let w = EdgeWindow::free_box(&view("2;"), 2);
        assert_eq!(w.vertex_count(), 25);
        assert_eq!(w.edge_count(), 40);
        assert_eq!(w.boundary().len(), 16);
        for (i, x) in w.vertices().iter().enumerate() {
            assert_eq!(w.index_of(x), Some(i as u32));
        }
    }

    #[test]
    fn involution_edges_are_not_doubled() {
        let w = EdgeWindow::free_box(&view("[Z x Z/2; (1,0), (0,1)]"), 1);
        assert_eq!(w.vertex_count(), 6);
        // 2 horizontal edges per rung row, 3 rungs
        assert_eq!(w.edge_count(), 4 + 3);
    }

    #[test]
    fn geometric_ball_of_square_lattice() {
        let g = parse_group("2;").unwrap();
        assert_eq!(geometric_ball_elements(&g, 1.0).len(), 5);
        assert_eq!(geometric_ball_elements(&g, 2.0).len(), 13);
    }

    #[test]
    fn dense_and_hash_locators_agree() {
        let v = view("[Z^2 x Z/3; (1,0,0), (0,1,0), (0,0,1)]");
        let dense = EdgeWindow::free_box(&v, 2);
        let hashed = EdgeWindow::from_vertices(&v, dense.vertices().to_vec(), BoundaryRule::Inner).unwrap();
        assert_eq!(dense.edges(), hashed.edges());
        assert_eq!(dense.boundary(), hashed.boundary());
    }
}
