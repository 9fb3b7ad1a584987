//! Connection events on sampled configurations.

use super::config::PercConfig;
use super::union_find::UnionFind;
use super::window::VertexSet;

/// Open clusters of a configuration restricted to a vertex set `C`.
/// Build once and query many events that share `C`.
pub struct Clusters {
    uf: UnionFind,
    restrict: Option<Vec<bool>>,
    scratch: Vec<u32>,
}

impl Clusters {
    pub fn new(config: &PercConfig, restrict: Option<&VertexSet>) -> Self {
        let w = config.window();
        let mut uf = UnionFind::new(w.vertex_count());
        for (e, &(a, b)) in w.edges().iter().enumerate() {
            if !config.is_open(e) {
                continue;
            }
            if let Some(c) = restrict {
                if !c.contains(a) || !c.contains(b) {
                    continue;
                }
            }
            uf.union(a, b);
        }
        Clusters { uf, restrict: restrict.map(|c| c.mask().to_vec()), scratch: Vec::new() }
    }

    fn inside(&self, v: u32) -> bool {
        self.restrict.as_ref().is_none_or(|m| m[v as usize])
    }

    pub fn root(&mut self, v: u32) -> Option<u32> {
        if self.inside(v) {
            Some(self.uf.find(v))
        } else {
            None
        }
    }

    pub fn cluster_size(&mut self, v: u32) -> u32 {
        self.uf.set_size(v)
    }

    fn roots_of(&mut self, a: &VertexSet) -> Vec<u32> {
        let mut roots: Vec<u32> = Vec::new();
        for v in a.iter() {
            if let Some(r) = self.root(v) {
                roots.push(r);
            }
        }
        roots.sort_unstable();
        roots.dedup();
        roots
    }

    /// Number of distinct clusters meeting both `A ∩ C` and `B ∩ C`.
    pub fn crossing_count(&mut self, a: &VertexSet, b: &VertexSet) -> usize {
        let ra = self.roots_of(a);
        let mut rb = std::mem::take(&mut self.scratch);
        rb.clear();
        for v in b.iter() {
            if let Some(r) = self.root(v) {
                rb.push(r);
            }
        }
        rb.sort_unstable();
        rb.dedup();
        let n = rb.iter().filter(|r| ra.binary_search(r).is_ok()).count();
        self.scratch = rb;
        n
    }

    pub fn connected(&mut self, a: &VertexSet, b: &VertexSet) -> bool {
        let ra = self.roots_of(a);
        if ra.is_empty() {
            return false;
        }
        for v in b.iter() {
            if let Some(r) = self.root(v) {
                if ra.binary_search(&r).is_ok() {
                    return true;
                }
            }
        }
        false
    }

    pub fn unique_crossing(&mut self, a: &VertexSet, b: &VertexSet) -> bool {
        self.crossing_count(a, b) == 1
    }
}

/// `A <-> B` by an open path inside `C`.
pub fn connected_in(c: &PercConfig, a: &VertexSet, b: &VertexSet, within: &VertexSet) -> bool {
    Clusters::new(c, Some(within)).connected(a, b)
}

/// Exactly one `C`-restricted cluster meets both `A` and `B`.
pub fn unique_crossing(c: &PercConfig, a: &VertexSet, b: &VertexSet, within: &VertexSet) -> bool {
    Clusters::new(c, Some(within)).unique_crossing(a, b)
}

/// `A` connects to the window's boundary set.
pub fn reaches_boundary(c: &PercConfig, a: &VertexSet) -> bool {
    Clusters::new(c, None).connected(a, c.window().boundary())
}
