//! Marked abelian groups `[G; s_1..s_d]`, realized as `Z^d / Gamma`.
//!
//! A group is stored in coordinates `Z^r x T` with `T = Z/t_1 x ... x Z/t_q`
//! and `t_1 | t_2 | ...`. The coordinates are a deterministic function of
//! the canonical relation lattice, so equal keys give equal coordinates.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{echelon, solve_hermite, to_big, to_i64, BallNorm, IntVec, IntegerLattice};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub free: Vec<i64>,
    pub tor: Vec<i64>,
}

impl GroupElement {
    pub fn zero(rank: usize, torsion_len: usize) -> Self {
        GroupElement { free: vec![0; rank], tor: vec![0; torsion_len] }
    }

    pub fn is_zero(&self) -> bool {
        self.free.iter().all(|&x| x == 0) && self.tor.iter().all(|&x| x == 0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        let mut first = true;
        for x in &self.free {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
            first = false;
        }
        for x in &self.tor {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{x}~")?;
            first = false;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug)]
pub struct MarkedAbelianGroup {
    marks: usize,
    lattice: IntegerLattice,
    rank: usize,
    torsion: Vec<i64>,
    images: Vec<GroupElement>,
    /// Preimages in `Z^d` of the free unit vectors, then of the torsion unit vectors.
    section: Vec<Vec<i64>>,
}

impl PartialEq for MarkedAbelianGroup {
    fn eq(&self, other: &Self) -> bool {
        self.marks == other.marks && self.lattice == other.lattice
    }
}

impl Eq for MarkedAbelianGroup {}

impl MarkedAbelianGroup {
    pub fn from_subgroup(d: usize, gamma: &IntegerLattice) -> Result<Self> {
        if gamma.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: gamma.dim() });
        }
        let k = gamma.rank();
        let smith = gamma.smith_decomposition();
        let v = &smith.v;
        let mut tor_pos = Vec::new();
        let mut torsion = Vec::new();
        for (i, di) in smith.diag.iter().enumerate() {
            if *di > BigInt::one() {
                tor_pos.push(i);
                torsion.push(di.to_i64().ok_or_else(|| Error::Overflow(format!("invariant factor {di}")))?);
            }
        }
        let r = d - k;
        let s: Vec<IntVec> = (0..r).map(|a| (0..d).map(|j| v[j][k + a].clone()).collect()).collect();
        let free_rows = if r > 0 {
            let e = echelon(s, d, false);
            debug_assert_eq!(e.rank(), r);
            e.rows
        } else {
            Vec::new()
        };
        let mut images = Vec::with_capacity(d);
        for j in 0..d {
            let free = (0..r).map(|a| free_rows[a][j].to_i64()).collect::<Option<Vec<_>>>();
            let free = free.ok_or_else(|| Error::Overflow("generator image".into()))?;
            let tor = tor_pos
                .iter()
                .zip(&torsion)
                .map(|(&p, &t)| v[j][p].mod_floor(&BigInt::from(t)).to_i64().unwrap())
                .collect();
            images.push(GroupElement { free, tor });
        }
        let section = compute_section(&images, r, &torsion)?;
        Ok(MarkedAbelianGroup { marks: d, lattice: gamma.clone(), rank: r, torsion, images, section })
    }

    /// The group generated by explicit marks inside `Z^r x (Z/n_1 x ...)`.
    /// The moduli need not form an invariant-factor chain.
    pub fn from_marks(rank: usize, moduli: &[i64], marks: &[Vec<i64>]) -> Result<Self> {
        let d = marks.len();
        if d == 0 {
            return Err(Error::pre("at least one mark is required"));
        }
        let width = rank + moduli.len();
        for m in marks {
            if m.len() != width {
                return Err(Error::DimensionMismatch { expected: width, found: m.len() });
            }
        }
        if moduli.iter().any(|&n| n < 1) {
            return Err(Error::pre("torsion moduli must be positive"));
        }
        let (gamma, generates) = relation_lattice(marks, rank, moduli)?;
        if !generates {
            return Err(Error::pre("marks do not generate the group"));
        }
        Self::from_subgroup(d, &gamma)
    }

    pub fn marks(&self) -> usize {
        self.marks
    }

    pub fn lattice(&self) -> &IntegerLattice {
        &self.lattice
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn torsion(&self) -> &[i64] {
        &self.torsion
    }

    pub fn torsion_order(&self) -> usize {
        self.torsion.iter().map(|&t| t as usize).product()
    }

    pub fn images(&self) -> &[GroupElement] {
        &self.images
    }

    pub fn section(&self) -> &[Vec<i64>] {
        &self.section
    }

    /// `R_S`: the largest Euclidean norm among free parts of the marks.
    pub fn r_s(&self) -> f64 {
        self.images
            .iter()
            .map(|s| s.free.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// All torsion parts in lexicographic order.
    pub fn torsion_elements(&self) -> Vec<Vec<i64>> {
        let mut out = vec![Vec::new()];
        for &t in &self.torsion {
            out = out.into_iter().flat_map(|p| (0..t).map(move |c| [p.clone(), vec![c]].concat())).collect();
        }
        out
    }

    /// Membership in the class where percolation has a nontrivial phase.
    pub fn percolates(&self) -> bool {
        self.rank >= 2
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement::zero(self.rank, self.torsion.len())
    }

    pub fn check(&self, x: &GroupElement) -> Result<()> {
        if x.free.len() != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, found: x.free.len() });
        }
        if x.tor.len() != self.torsion.len() {
            return Err(Error::TorsionMismatch { expected: self.torsion.clone(), found: x.tor.clone() });
        }
        Ok(())
    }

    pub fn canonicalize(&self, x: &mut GroupElement) {
        for (c, &t) in x.tor.iter_mut().zip(&self.torsion) {
            *c = c.rem_euclid(t);
        }
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let free = x.free.iter().zip(&y.free).map(|(a, b)| a + b).collect();
        let tor = x.tor.iter().zip(&y.tor).zip(&self.torsion).map(|((a, b), t)| (a + b) % t).collect();
        GroupElement { free, tor }
    }

    pub fn try_add(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.add(x, y))
    }

    pub fn neg(&self, x: &GroupElement) -> GroupElement {
        let free = x.free.iter().map(|a| -a).collect();
        let tor = x.tor.iter().zip(&self.torsion).map(|(a, t)| (t - a) % t).collect();
        GroupElement { free, tor }
    }

    pub fn sub(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        self.add(x, &self.neg(y))
    }

    /// Image of `y in Z^d` under `Z^d -> G`.
    pub fn image(&self, y: &[i64]) -> GroupElement {
        let mut acc = self.zero();
        for (c, img) in y.iter().zip(&self.images) {
            for (a, b) in acc.free.iter_mut().zip(&img.free) {
                *a += c * b;
            }
            for (a, b) in acc.tor.iter_mut().zip(&img.tor) {
                *a += c * b;
            }
        }
        self.canonicalize(&mut acc);
        acc
    }

    /// Some preimage of `x` in `Z^d`.
    pub fn lift(&self, x: &GroupElement) -> Vec<i64> {
        let mut y = vec![0i64; self.marks];
        let coords = x.free.iter().chain(x.tor.iter());
        for (c, s) in coords.zip(&self.section) {
            for (a, b) in y.iter_mut().zip(s) {
                *a += c * b;
            }
        }
        y
    }

    /// `G / Lambda` for `Lambda` generated by elements of this group.
    pub fn quotient(&self, lambda_gens: &[GroupElement]) -> Result<Self> {
        let mut gens: Vec<IntVec> = self.lattice.basis().to_vec();
        for l in lambda_gens {
            self.check(l)?;
            gens.push(to_big(&self.lift(l)));
        }
        let gamma = IntegerLattice::from_generators(self.marks, &gens)?;
        Self::from_subgroup(self.marks, &gamma)
    }

    /// Canonical text key `d; row; row` (zero lattice: `d;`).
    pub fn key(&self) -> String {
        let rows: Vec<String> = self
            .lattice
            .basis()
            .iter()
            .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        if rows.is_empty() {
            format!("{};", self.marks)
        } else {
            format!("{}; {}", self.marks, rows.join("; "))
        }
    }

    pub fn from_key(s: &str) -> Result<Self> {
        let mut parts = s.split(';');
        let d: usize = parts
            .next()
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| Error::parse(1, format!("bad mark count in key {s:?}")))?;
        let mut rows = Vec::new();
        for p in parts {
            let p = p.trim();
            if p.is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<BigInt>, _> = p.split(',').map(|x| x.trim().parse::<BigInt>()).collect();
            let row = row.map_err(|_| Error::parse(1, format!("bad integer row {p:?}")))?;
            rows.push(row);
        }
        let gamma = IntegerLattice::from_generators(d, &rows)?;
        Self::from_subgroup(d, &gamma)
    }

    /// Short human-readable description such as `Z^2 x Z/4`.
    pub fn structure(&self) -> String {
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" x ")
        }
    }

    /// Lattice of relations among the generator images; equals the
    /// defining lattice by construction.
    pub fn relations(&self) -> Result<IntegerLattice> {
        let marks: Vec<Vec<i64>> =
            self.images.iter().map(|g| g.free.iter().chain(g.tor.iter()).copied().collect()).collect();
        Ok(relation_lattice(&marks, self.rank, &self.torsion)?.0)
    }
}

impl fmt::Display for MarkedAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}; ", self.structure())?;
        for (i, g) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, "]")
    }
}

/// Relations among `marks` in `Z^r x prod Z/n_i`, plus whether the marks
/// generate the whole group.
fn relation_lattice(marks: &[Vec<i64>], rank: usize, moduli: &[i64]) -> Result<(IntegerLattice, bool)> {
    let d = marks.len();
    let width = rank + moduli.len();
    let mut rows: Vec<IntVec> = marks.iter().map(|m| to_big(m)).collect();
    for (i, &n) in moduli.iter().enumerate() {
        let mut row = vec![BigInt::zero(); width];
        row[rank + i] = BigInt::from(n);
        rows.push(row);
    }
    let e = echelon(rows, width, true);
    let kernel: Vec<IntVec> = e.transform[e.rank()..].iter().map(|u| u[..d].to_vec()).collect();
    let gamma = IntegerLattice::from_generators(d, &kernel)?;
    let generates = e.rank() == width
        && e.pivots.iter().enumerate().all(|(i, &p)| e.rows[i][p] == BigInt::one());
    Ok((gamma, generates))
}

fn compute_section(images: &[GroupElement], rank: usize, torsion: &[i64]) -> Result<Vec<Vec<i64>>> {
    let d = images.len();
    let width = rank + torsion.len();
    let mut rows: Vec<IntVec> =
        images.iter().map(|g| to_big(&g.free.iter().chain(g.tor.iter()).copied().collect::<Vec<_>>())).collect();
    for (i, &t) in torsion.iter().enumerate() {
        let mut row = vec![BigInt::zero(); width];
        row[rank + i] = BigInt::from(t);
        rows.push(row);
    }
    let e = echelon(rows, width, true);
    let rk = e.rank();
    let mut section = Vec::with_capacity(width);
    for c in 0..width {
        let mut target = vec![BigInt::zero(); width];
        target[c] = BigInt::one();
        let z = solve_hermite(&e.rows[..rk], &e.pivots, &target)
            .ok_or_else(|| Error::pre("generator images do not generate the group"))?;
        let mut y = vec![BigInt::zero(); d];
        for (zi, urow) in z.iter().zip(&e.transform) {
            for (a, b) in y.iter_mut().zip(urow) {
                *a += zi * b;
            }
        }
        section.push(to_i64(&y)?);
    }
    Ok(section)
}

/// `2^-n` with `n` the largest radius `<= k_max` at which the relation
/// lattices agree on the Euclidean ball; `0` if they agree through `k_max`.
pub fn mg_distance(g: &MarkedAbelianGroup, h: &MarkedAbelianGroup, k_max: u32) -> f64 {
    match agreement_radius(g, h, k_max) {
        None => 0.0,
        Some(n) => 0.5f64.powi(n as i32),
    }
}

/// Largest integer radius of agreement, or `None` when the lattices agree
/// on the whole ball of radius `k_max`.
pub fn agreement_radius(g: &MarkedAbelianGroup, h: &MarkedAbelianGroup, k_max: u32) -> Option<u32> {
    if g.marks != h.marks {
        return Some(0);
    }
    let a = g.lattice.points_in_ball(k_max as f64, &BallNorm::Euclidean);
    let b = h.lattice.points_in_ball(k_max as f64, &BallNorm::Euclidean);
    let (sa, sb): (std::collections::BTreeSet<_>, std::collections::BTreeSet<_>) =
        (a.into_iter().collect(), b.into_iter().collect());
    let min_sq = sa.symmetric_difference(&sb).map(|x| x.iter().map(|v| v * v).sum::<i64>()).min()?;
    // Agreement holds at integer k iff k^2 < min_sq.
    let mut n = (min_sq as f64).sqrt().floor() as i64;
    while n * n >= min_sq {
        n -= 1;
    }
    while (n + 1) * (n + 1) < min_sq {
        n += 1;
    }
    Some(n.max(0) as u32)
}

/// Generators of `Lambda` with `h = g / Lambda` and `Lambda` missing the
/// word ball of radius `k` in `g` (except at 0). `None` when `Gamma_g` is
/// not contained in `Gamma_h` or the ball condition fails.
pub fn convergence_certificate(g: &MarkedAbelianGroup, h: &MarkedAbelianGroup, k: u32) -> Result<Option<Vec<GroupElement>>> {
    if g.marks != h.marks {
        return Err(Error::DimensionMismatch { expected: g.marks, found: h.marks });
    }
    if !g.lattice.is_sublattice_of(&h.lattice)? {
        return Ok(None);
    }
    // The word ball of radius k is the image of the L1 ball of Z^d.
    for y in h.lattice.points_in_ball(k as f64, &BallNorm::L1) {
        if y.iter().all(|&c| c == 0) {
            continue;
        }
        if !g.lattice.contains_i64(&y)? {
            return Ok(None);
        }
    }
    let mut gens: Vec<GroupElement> = Vec::new();
    for row in h.lattice.basis_i64()? {
        let e = g.image(&row);
        if !e.is_zero() && !gens.contains(&e) {
            gens.push(e);
        }
    }
    Ok(Some(gens))
}

/// Parses a marked-group literal.
///
/// Accepted forms:
/// * canonical key `d; r1; r2` (e.g. `3; 1,1,-1`, `2;`);
/// * bracket form `[Z^2 x Z/4; (1,0,0), (0,1,0), (0,0,1)]`, `[Z; 1, 3, 4]`,
///   `[(Z/5)^2; (1,0), (0,1)]`. Free coordinates come first, then torsion
///   coordinates in the order the factors are written.
pub fn parse_group(s: &str) -> Result<MarkedAbelianGroup> {
    let s = s.trim();
    if !s.starts_with('[') {
        return MarkedAbelianGroup::from_key(s);
    }
    let inner = s
        .strip_prefix('[')
        .and_then(|x| x.strip_suffix(']'))
        .ok_or_else(|| Error::parse(1, format!("unbalanced brackets in {s:?}")))?;
    let (head, tail) =
        inner.split_once(';').ok_or_else(|| Error::parse(1, format!("missing ';' in group literal {s:?}")))?;
    let (rank, moduli) = parse_structure(head)?;
    let width = rank + moduli.len();
    let marks = parse_marks(tail, width)?;
    MarkedAbelianGroup::from_marks(rank, &moduli, &marks)
}

fn parse_structure(head: &str) -> Result<(usize, Vec<i64>)> {
    let mut rank = 0;
    let mut moduli = Vec::new();
    for factor in head.split(['x', '*', '×']) {
        let f: String = factor.chars().filter(|c| !c.is_whitespace()).collect();
        if f.is_empty() {
            return Err(Error::parse(1, format!("empty factor in {head:?}")));
        }
        let (base, power) = match f.rsplit_once('^') {
            Some((b, p)) => {
                let p: usize = p.parse().map_err(|_| Error::parse(1, format!("bad exponent in {f:?}")))?;
                (b.trim_start_matches('(').trim_end_matches(')').to_string(), p)
            }
            None => (f.clone(), 1),
        };
        if base == "0" {
            continue;
        }
        if base == "Z" {
            rank += power;
        } else if let Some(n) = base.strip_prefix("Z/") {
            let n: i64 = n.parse().map_err(|_| Error::parse(1, format!("bad modulus in {f:?}")))?;
            if n < 1 {
                return Err(Error::parse(1, format!("modulus must be positive in {f:?}")));
            }
            moduli.extend(std::iter::repeat_n(n, power));
        } else {
            return Err(Error::parse(1, format!("unknown factor {f:?}")));
        }
    }
    Ok((rank, moduli))
}

fn parse_marks(tail: &str, width: usize) -> Result<Vec<Vec<i64>>> {
    let t = tail.trim();
    let mut marks = Vec::new();
    if t.contains('(') {
        let mut rest = t;
        while let Some(open) = rest.find('(') {
            let close = rest[open..]
                .find(')')
                .ok_or_else(|| Error::parse(1, format!("unclosed tuple in {tail:?}")))?
                + open;
            let body = &rest[open + 1..close];
            // `~` marks torsion coordinates in the Display form.
            let v: std::result::Result<Vec<i64>, _> = if body.trim().is_empty() {
                Ok(Vec::new())
            } else {
                body.split(',').map(|x| x.trim().trim_end_matches('~').parse::<i64>()).collect()
            };
            marks.push(v.map_err(|_| Error::parse(1, format!("bad tuple ({body})")))?);
            rest = &rest[close + 1..];
        }
    } else {
        for x in t.split(',') {
            let v: i64 = x.trim().parse().map_err(|_| Error::parse(1, format!("bad mark {x:?}")))?;
            marks.push(vec![v]);
        }
    }
    for m in &marks {
        if m.len() != width {
            return Err(Error::parse(1, format!("mark has {} coordinates, group needs {width}", m.len())));
        }
    }
    Ok(marks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> MarkedAbelianGroup {
        parse_group(s).unwrap()
    }

    fn ge(free: &[i64], tor: &[i64]) -> GroupElement {
        GroupElement { free: free.to_vec(), tor: tor.to_vec() }
    }

    #[test]
    fn from_subgroup_examples() {
        let z = MarkedAbelianGroup::from_subgroup(1, &IntegerLattice::zero(1)).unwrap();
        assert_eq!(z.rank(), 1);
        assert_eq!(z.images(), &[ge(&[1], &[])]);

        let n = 6;
        let l = IntegerLattice::from_i64(2, &[vec![n, 0], vec![0, n]]).unwrap();
        let t = MarkedAbelianGroup::from_subgroup(2, &l).unwrap();
        assert_eq!(t.rank(), 0);
        assert_eq!(t.torsion(), &[6, 6]);

        let l = IntegerLattice::from_i64(3, &[vec![1, 1, -1]]).unwrap();
        let tri = MarkedAbelianGroup::from_subgroup(3, &l).unwrap();
        assert_eq!(tri.rank(), 2);
        assert!(tri.torsion().is_empty());
        assert_eq!(tri.images(), &[ge(&[1, 0], &[]), ge(&[0, 1], &[]), ge(&[1, 1], &[])]);
        assert_eq!(tri.key(), "3; 1,1,-1");
    }

    #[test]
    fn literal_forms_agree() {
        let a = g("[Z^2; (1,0), (0,1), (1,1)]");
        let b = g("3; 1,1,-1");
        assert_eq!(a, b);
        assert_eq!(g("[Z; 1, 3, 4]").rank(), 1);
        assert_eq!(g("2;").rank(), 2);
        assert!(parse_group("[Z^2; (2,0), (0,1)]").is_err());
    }

    #[test]
    fn quotient_examples() {
        let z2 = g("2;");
        assert_eq!(z2.quotient(&[]).unwrap(), z2);
        let n = 5;
        let q = z2.quotient(&[ge(&[0, n], &[])]).unwrap();
        assert_eq!(q.rank(), 1);
        assert_eq!(q.torsion(), &[n]);
        let z3 = g("3;");
        let q = z3.quotient(&[ge(&[0, 0, 4], &[])]).unwrap();
        assert_eq!(q.rank(), 2);
        assert_eq!(q.torsion(), &[4]);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(g("[Z; 1]").rank(), 1);
        assert_eq!(g("[(Z/2)^2; (1,0), (0,1)]").rank(), 0);
        assert_eq!(g("3; 1,1,-1").rank(), 2);
    }

    #[test]
    fn element_ops() {
        let grp = g("[Z x Z/2; (1,0), (0,1)]");
        let x = ge(&[1], &[1]);
        assert!(grp.add(&x, &grp.neg(&x)).is_zero());
        assert_eq!(grp.add(&ge(&[1], &[1]), &ge(&[0], &[1])), ge(&[1], &[0]));
        assert!(matches!(grp.try_add(&x, &ge(&[1], &[])), Err(Error::TorsionMismatch { .. })));
    }

    #[test]
    fn distance_examples() {
        let tri = g("3; 1,1,-1");
        assert_eq!(mg_distance(&tri, &tri, 6), 0.0);
        let z = g("[Z; 1]");
        for n in [3i64, 5, 9] {
            let cyc = MarkedAbelianGroup::from_subgroup(1, &IntegerLattice::from_i64(1, &[vec![n]]).unwrap()).unwrap();
            assert_eq!(agreement_radius(&cyc, &z, 20), Some((n - 1) as u32));
        }
        let m10 = g("[Z; 1, 10, 11]");
        let k = agreement_radius(&m10, &tri, 12).unwrap();
        assert!(k >= 2, "agreement radius {k}");
    }

    #[test]
    fn certificate_examples() {
        let z2 = g("2;");
        assert_eq!(convergence_certificate(&z2, &z2, 3).unwrap(), Some(vec![]));
        let h7 = z2.quotient(&[ge(&[0, 7], &[])]).unwrap();
        let cert = convergence_certificate(&z2, &h7, 3).unwrap().unwrap();
        assert_eq!(cert, vec![ge(&[0, 7], &[])]);
        let h2 = z2.quotient(&[ge(&[0, 2], &[])]).unwrap();
        assert_eq!(convergence_certificate(&z2, &h2, 3).unwrap(), None);
    }

    #[test]
    fn key_round_trip() {
        for s in ["2;", "3; 1,1,-1", "2; 1,1; 0,2", "[Z^2 x Z/4; (1,0,0), (0,1,0), (0,0,1)]"] {
            let a = g(s);
            assert_eq!(MarkedAbelianGroup::from_key(&a.key()).unwrap(), a);
            assert_eq!(a.relations().unwrap(), *a.lattice());
        }
    }
}
