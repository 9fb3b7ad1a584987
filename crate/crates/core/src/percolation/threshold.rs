//! Per-sample connection thresholds.
//!
//! With one uniform per edge, `A <-> boundary` holds at `p` iff some path
//! from `A` to the boundary has all uniforms below `p`. The smallest such
//! `p` is the minimax (bottleneck) path value, found by a Dijkstra-style
//! search keyed on the running maximum. One search gives the outcome at
//! every `p` simultaneously, which is the coupling used by the bisections.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::rng::unit;
use super::window::{EdgeWindow, VertexSet};

/// Reusable buffers for [`bottleneck_to_set`].
#[derive(Default)]
pub struct Scratch {
    best: Vec<u32>,
    stamp: Vec<u32>,
    generation: u32,
    heap: BinaryHeap<Reverse<(u32, u32)>>,
}

impl Scratch {
    fn begin(&mut self, n: usize) {
        if self.stamp.len() != n {
            self.stamp = vec![0; n];
            self.best = vec![u32::MAX; n];
            self.generation = 0;
        }
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.fill(0);
            self.generation = 1;
        }
        self.heap.clear();
    }

    #[inline]
    fn get(&self, v: u32) -> Option<u32> {
        (self.stamp[v as usize] == self.generation).then(|| self.best[v as usize])
    }

    #[inline]
    fn set(&mut self, v: u32, x: u32) {
        self.stamp[v as usize] = self.generation;
        self.best[v as usize] = x;
    }
}

/// Smallest `p` at which `sources` connect to `targets`, or `None` if no
/// path exists in the window. Sources inside `targets` give `Some(0.0)`.
pub fn bottleneck_to_set(
    window: &EdgeWindow,
    sources: &[u32],
    targets: &VertexSet,
    uniforms: &[u32],
    scratch: &mut Scratch,
) -> Option<f64> {
    scratch.begin(window.vertex_count());
    for &s in sources {
        if targets.contains(s) {
            return Some(0.0);
        }
        scratch.set(s, 0);
        scratch.heap.push(Reverse((0, s)));
    }
    // Values are raw draws; a path with maximum `m` is open iff unit(m) < p.
    while let Some(Reverse((val, v))) = scratch.heap.pop() {
        if scratch.get(v) != Some(val) {
            continue;
        }
        if targets.contains(v) {
            return Some(unit(val));
        }
        for &(w, e) in window.incident(v) {
            let nv = val.max(uniforms[e as usize]);
            if scratch.get(w).is_none_or(|b| nv < b) {
                scratch.set(w, nv);
                scratch.heap.push(Reverse((nv, w)));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::CayleyView;
    use crate::marked_group::parse_group;
    use crate::percolation::config::PercConfig;
    use crate::percolation::events::reaches_boundary;
    use crate::percolation::rng::StreamKey;

    #[test]
    fn threshold_matches_direct_events() {
        let view = CayleyView::new(parse_group("3; 1,1,-1").unwrap());
        let w = EdgeWindow::free_box(&view, 4);
        let origin = w.index_of(&view.group().zero()).unwrap();
        let key = StreamKey::named(9, "threshold-test");
        let mut scratch = Scratch::default();
        let mut u = vec![0u32; w.edge_count()];
        let src = VertexSet::from_indices(w.vertex_count(), [origin]);
        for t in 0..40 {
            key.fill_uniforms(t, &mut u);
            let pstar = bottleneck_to_set(&w, &[origin], w.boundary(), &u, &mut scratch).unwrap();
            for p in [0.2, 0.3, 0.35, 0.4, 0.5, 0.7] {
                let c = PercConfig::from_uniforms(&w, p, &u, None);
                assert_eq!(reaches_boundary(&c, &src), pstar < p, "trial {t} p {p} p*={pstar}");
            }
        }
    }
}
