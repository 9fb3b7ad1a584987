//! Simple Cayley graphs of marked abelian groups: neighbours, word balls,
//! rooted-ball isomorphism and the local (Benjamini–Schramm) distance.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::marked_group::{GroupElement, MarkedAbelianGroup};

pub const DEFAULT_VERTEX_BUDGET: usize = 2_000_000;
pub const DEFAULT_SEARCH_BUDGET: u64 = 50_000_000;

#[derive(Clone, Debug)]
pub struct CayleyView {
    group: MarkedAbelianGroup,
    steps: Vec<GroupElement>,
    classes: Vec<GroupElement>,
}

impl CayleyView {
    /// Steps are `s_1, -s_1, s_2, -s_2, ...` with zeros and repeats dropped.
    pub fn new(group: MarkedAbelianGroup) -> Self {
        let mut steps: Vec<GroupElement> = Vec::new();
        let mut classes = Vec::new();
        for s in group.images() {
            if s.is_zero() || steps.contains(s) {
                continue;
            }
            classes.push(s.clone());
            steps.push(s.clone());
            let n = group.neg(s);
            if n != *s {
                steps.push(n);
            }
        }
        CayleyView { group, steps, classes }
    }

    pub fn group(&self) -> &MarkedAbelianGroup {
        &self.group
    }

    pub fn steps(&self) -> &[GroupElement] {
        &self.steps
    }

    /// One representative per `{s, -s}` pair.
    pub fn step_classes(&self) -> &[GroupElement] {
        &self.classes
    }

    pub fn degree(&self) -> usize {
        self.steps.len()
    }

    pub fn neighbors(&self, x: &GroupElement) -> Vec<GroupElement> {
        self.steps.iter().map(|s| self.group.add(x, s)).collect()
    }

    pub fn adjacent(&self, x: &GroupElement, y: &GroupElement) -> bool {
        let d = self.group.sub(y, x);
        self.steps.contains(&d)
    }

    pub fn word_ball(&self, k: u32) -> Result<RootedBall> {
        self.word_ball_with_budget(k, DEFAULT_VERTEX_BUDGET)
    }

    pub fn word_ball_with_budget(&self, k: u32, budget: usize) -> Result<RootedBall> {
        self.word_ball_at(&self.group.zero(), k, budget)
    }

    /// Ball around an arbitrary root; vertices are stored as absolute elements.
    pub fn word_ball_at(&self, root: &GroupElement, k: u32, budget: usize) -> Result<RootedBall> {
        let mut index: HashMap<GroupElement, usize> = HashMap::new();
        let mut elements = vec![root.clone()];
        let mut dist = vec![0u32];
        index.insert(root.clone(), 0);
        let mut head = 0;
        while head < elements.len() {
            if dist[head] < k {
                for y in self.neighbors(&elements[head]) {
                    if !index.contains_key(&y) {
                        if elements.len() >= budget {
                            return Err(Error::VertexBudget { budget });
                        }
                        index.insert(y.clone(), elements.len());
                        elements.push(y);
                        dist.push(dist[head] + 1);
                    }
                }
            }
            head += 1;
        }
        let adjacency = elements
            .iter()
            .map(|x| {
                let mut a: Vec<usize> = self.neighbors(x).iter().filter_map(|y| index.get(y).copied()).collect();
                a.sort_unstable();
                a
            })
            .collect();
        Ok(RootedBall { radius: k, elements, dist, adjacency })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedBall {
    pub radius: u32,
    /// Vertex labels in BFS discovery order; the root is index 0. Empty
    /// when the ball was read from text.
    pub elements: Vec<GroupElement>,
    pub dist: Vec<u32>,
    pub adjacency: Vec<Vec<usize>>,
}

impl RootedBall {
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Adjacency-list text:
    ///
    /// ```text
    /// # rooted-ball v1
    /// radius 1
    /// vertices 3
    /// 0: 1 2
    /// 1: 0
    /// 2: 0
    /// ```
    pub fn to_text(&self) -> String {
        let mut s = String::from("# rooted-ball v1\n");
        writeln!(s, "radius {}", self.radius).unwrap();
        writeln!(s, "vertices {}", self.len()).unwrap();
        for (i, a) in self.adjacency.iter().enumerate() {
            let list: Vec<String> = a.iter().map(|x| x.to_string()).collect();
            writeln!(s, "{i}: {}", list.join(" ")).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty input"))?;
        if header.trim() != "# rooted-ball v1" {
            return Err(Error::parse(1, "missing '# rooted-ball v1' header"));
        }
        let mut field = |name: &str| -> Result<usize> {
            let (i, l) = lines.next().ok_or_else(|| Error::parse(0, format!("missing {name}")))?;
            l.trim()
                .strip_prefix(name)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::parse(i + 1, format!("expected '{name} <n>'")))
        };
        let radius = field("radius")? as u32;
        let n = field("vertices")?;
        let mut adjacency = vec![Vec::new(); n];
        for (i, l) in lines {
            let (v, rest) = l.split_once(':').ok_or_else(|| Error::parse(i + 1, "expected 'v: neighbours'"))?;
            let v: usize = v.trim().parse().map_err(|_| Error::parse(i + 1, "bad vertex index"))?;
            if v >= n {
                return Err(Error::parse(i + 1, "vertex index out of range"));
            }
            for t in rest.split_whitespace() {
                let w: usize = t.parse().map_err(|_| Error::parse(i + 1, "bad neighbour index"))?;
                if w >= n {
                    return Err(Error::parse(i + 1, "neighbour index out of range"));
                }
                adjacency[v].push(w);
            }
            adjacency[v].sort_unstable();
        }
        let dist = bfs_dist(&adjacency);
        Ok(RootedBall { radius, elements: Vec::new(), dist, adjacency })
    }
}

fn bfs_dist(adj: &[Vec<usize>]) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adj.len()];
    if adj.is_empty() {
        return dist;
    }
    dist[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == u32::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Joint colour refinement on the disjoint union of two rooted graphs,
/// seeded with (distance to root, degree).
fn refine(b1: &RootedBall, b2: &RootedBall) -> (Vec<usize>, Vec<usize>) {
    let mut ids: HashMap<(u32, usize), usize> = HashMap::new();
    let mut seed = |b: &RootedBall| -> Vec<usize> {
        (0..b.len())
            .map(|v| {
                let key = (b.dist[v], b.adjacency[v].len());
                let n = ids.len();
                *ids.entry(key).or_insert(n)
            })
            .collect()
    };
    let mut c1 = seed(b1);
    let mut c2 = seed(b2);
    let mut classes = ids.len();
    loop {
        let mut ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let mut step = |b: &RootedBall, c: &[usize]| -> Vec<usize> {
            (0..b.len())
                .map(|v| {
                    let mut nb: Vec<usize> = b.adjacency[v].iter().map(|&w| c[w]).collect();
                    nb.sort_unstable();
                    let n = ids.len();
                    *ids.entry((c[v], nb)).or_insert(n)
                })
                .collect()
        };
        let n1 = step(b1, &c1);
        let n2 = step(b2, &c2);
        let now = ids.len();
        c1 = n1;
        c2 = n2;
        if now == classes {
            return (c1, c2);
        }
        classes = now;
    }
}

/// Root-preserving isomorphism test.
pub fn rooted_isomorphic(b1: &RootedBall, b2: &RootedBall) -> Result<bool> {
    rooted_isomorphic_with_budget(b1, b2, DEFAULT_SEARCH_BUDGET)
}

pub fn rooted_isomorphic_with_budget(b1: &RootedBall, b2: &RootedBall, budget: u64) -> Result<bool> {
    if b1.radius != b2.radius {
        return Err(Error::pre(format!("radii differ: {} vs {}", b1.radius, b2.radius)));
    }
    if b1.len() != b2.len() || b1.edge_count() != b2.edge_count() {
        return Ok(false);
    }
    if b1.is_empty() {
        return Ok(true);
    }
    let (c1, c2) = refine(b1, b2);
    let mut h1 = c1.clone();
    let mut h2 = c2.clone();
    h1.sort_unstable();
    h2.sort_unstable();
    if h1 != h2 || c1[0] != c2[0] {
        return Ok(false);
    }
    let mut order: Vec<usize> = (0..b1.len()).collect();
    order.sort_by_key(|&v| (b1.dist[v], v));
    let mut by_colour: HashMap<usize, Vec<usize>> = HashMap::new();
    for (v, &c) in c2.iter().enumerate() {
        by_colour.entry(c).or_default().push(v);
    }
    let mut map = vec![usize::MAX; b1.len()];
    let mut used = vec![false; b2.len()];
    let mut nodes = 0u64;
    let ctx = Search { b1, b2, c1: &c1, by_colour: &by_colour, order: &order, budget };
    ctx.extend(0, &mut map, &mut used, &mut nodes)
}

struct Search<'a> {
    b1: &'a RootedBall,
    b2: &'a RootedBall,
    c1: &'a [usize],
    by_colour: &'a HashMap<usize, Vec<usize>>,
    order: &'a [usize],
    budget: u64,
}

impl Search<'_> {
    fn extend(&self, depth: usize, map: &mut [usize], used: &mut [bool], nodes: &mut u64) -> Result<bool> {
        if depth == self.order.len() {
            return Ok(true);
        }
        *nodes += 1;
        if *nodes > self.budget {
            return Err(Error::SearchBudget { budget: self.budget });
        }
        let v = self.order[depth];
        let mapped_nb: Vec<usize> = self.b1.adjacency[v].iter().copied().filter(|&w| map[w] != usize::MAX).collect();
        let candidates: &[usize] = if depth == 0 { &[0] } else { &self.by_colour[&self.c1[v]] };
        for &x in candidates {
            if used[x] {
                continue;
            }
            // Edge counts to mapped vertices must match, and every mapped
            // neighbour must land on a neighbour.
            let ok = mapped_nb.iter().all(|&w| self.b2.has_edge(x, map[w]))
                && self.b2.adjacency[x].iter().filter(|&&y| used[y]).count() == mapped_nb.len();
            if !ok {
                continue;
            }
            map[v] = x;
            used[x] = true;
            if self.extend(depth + 1, map, used, nodes)? {
                return Ok(true);
            }
            map[v] = usize::MAX;
            used[x] = false;
        }
        Ok(false)
    }
}

/// Largest `k <= k_max` with isomorphic rooted word balls.
pub fn bs_agreement_radius(g: &MarkedAbelianGroup, h: &MarkedAbelianGroup, k_max: u32) -> Result<u32> {
    let vg = CayleyView::new(g.clone());
    let vh = CayleyView::new(h.clone());
    for k in 1..=k_max {
        let bg = vg.word_ball(k)?;
        let bh = vh.word_ball(k)?;
        if !rooted_isomorphic(&bg, &bh)? {
            return Ok(k - 1);
        }
    }
    Ok(k_max)
}

/// `2^-n` for the agreement radius `n`; equal balls through `k_max` give
/// `2^-k_max`, an upper bound on the true distance.
pub fn bs_distance(g: &MarkedAbelianGroup, h: &MarkedAbelianGroup, k_max: u32) -> Result<f64> {
    Ok(0.5f64.powi(bs_agreement_radius(g, h, k_max)? as i32))
}
