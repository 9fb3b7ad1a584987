//! Exact integer-matrix algebra for subgroups of `Z^d`.
//!
//! Lattices are stored by a row Hermite basis: pivots strictly increase
//! left to right, pivot entries are positive, and entries above a pivot
//! are reduced into `[0, pivot)`. Two generator sets span the same
//! subgroup iff their stored bases are equal.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type IntVec = Vec<BigInt>;

pub fn to_big(v: &[i64]) -> IntVec {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn to_i64(v: &[BigInt]) -> Result<Vec<i64>> {
    v.iter()
        .map(|x| x.to_i64().ok_or_else(|| Error::Overflow(format!("{x} does not fit in i64"))))
        .collect()
}

pub(crate) fn identity(n: usize) -> Vec<IntVec> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

/// `rows[dst] -= q * rows[src]`
fn row_sub(rows: &mut [IntVec], dst: usize, src: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let s = rows[src].clone();
    for (d, s) in rows[dst].iter_mut().zip(s.iter()) {
        *d -= q * s;
    }
}

fn row_neg(rows: &mut [IntVec], i: usize) {
    for x in rows[i].iter_mut() {
        *x = -std::mem::take(x);
    }
}

/// `cols[dst] -= q * cols[src]` on a row-major matrix.
fn col_sub(m: &mut [IntVec], dst: usize, src: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        let s = row[src].clone();
        row[dst] -= q * s;
    }
}

fn col_swap(m: &mut [IntVec], a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

/// Row echelon (Hermite) form with an optional unimodular transform.
///
/// `transform * input == rows` where `rows` has the nonzero Hermite rows
/// first followed by zero rows. The trailing rows of `transform` span the
/// left kernel of the input.
pub(crate) struct Echelon {
    pub rows: Vec<IntVec>,
    pub pivots: Vec<usize>,
    pub transform: Vec<IntVec>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

pub(crate) fn echelon(mut a: Vec<IntVec>, ncols: usize, track: bool) -> Echelon {
    let m = a.len();
    let mut u = if track { identity(m) } else { Vec::new() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == m {
            break;
        }
        let mut found = false;
        loop {
            let mut best: Option<usize> = None;
            for i in r..m {
                if !a[i][col].is_zero() && best.is_none_or(|b| a[i][col].abs() < a[b][col].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            found = true;
            a.swap(r, b);
            if track {
                u.swap(r, b);
            }
            let mut clear = true;
            for i in r + 1..m {
                if a[i][col].is_zero() {
                    continue;
                }
                let q = a[i][col].div_floor(&a[r][col]);
                row_sub(&mut a, i, r, &q);
                if track {
                    row_sub(&mut u, i, r, &q);
                }
                if !a[i][col].is_zero() {
                    clear = false;
                }
            }
            if clear {
                break;
            }
        }
        if !found {
            continue;
        }
        if a[r][col].is_negative() {
            row_neg(&mut a, r);
            if track {
                row_neg(&mut u, r);
            }
        }
        for i in 0..r {
            let q = a[i][col].div_floor(&a[r][col]);
            row_sub(&mut a, i, r, &q);
            if track {
                row_sub(&mut u, i, r, &q);
            }
        }
        pivots.push(col);
        r += 1;
    }
    Echelon { rows: a, pivots, transform: u }
}

/// Solve `z * H = target` for a Hermite matrix with the given pivots.
/// Returns `None` when the target is not in the row span over `Z`.
pub(crate) fn solve_hermite(rows: &[IntVec], pivots: &[usize], target: &[BigInt]) -> Option<IntVec> {
    let mut w: IntVec = target.to_vec();
    let mut z = Vec::with_capacity(pivots.len());
    for (i, &p) in pivots.iter().enumerate() {
        let (q, rem) = w[p].div_rem(&rows[i][p]);
        if !rem.is_zero() {
            return None;
        }
        for (wj, hj) in w.iter_mut().zip(rows[i].iter()) {
            *wj -= &q * hj;
        }
        z.push(q);
    }
    if w.iter().all(Zero::is_zero) {
        Some(z)
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegerLattice {
    dim: usize,
    basis: Vec<IntVec>,
}

/// `U * M * V = D` for the basis matrix `M` (k x d) of a lattice.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: Vec<IntVec>,
    /// Nonzero invariant factors `d_1 | d_2 | ...`, one per basis row.
    pub diag: Vec<BigInt>,
    pub v: Vec<IntVec>,
}

/// Norm used by [`IntegerLattice::points_in_ball`].
pub enum BallNorm<'a> {
    Euclidean,
    L1,
    Sup,
    /// A caller-supplied norm together with `c` such that `norm(x) <= k`
    /// implies `max |x_i| <= c * k`.
    Custom { norm: &'a dyn Fn(&[i64]) -> f64, sup_factor: f64 },
}

impl BallNorm<'_> {
    fn sup_bound(&self, k: f64) -> f64 {
        match self {
            BallNorm::Custom { sup_factor, .. } => sup_factor * k,
            _ => k,
        }
    }

    fn within(&self, x: &[i128], k: f64) -> bool {
        const TOL: f64 = 1e-9;
        match self {
            BallNorm::Euclidean => (x.iter().map(|&v| v * v).sum::<i128>() as f64) <= k * k + TOL,
            BallNorm::L1 => (x.iter().map(|v| v.abs()).sum::<i128>() as f64) <= k + TOL,
            BallNorm::Sup => x.iter().all(|v| v.abs() as f64 <= k + TOL),
            BallNorm::Custom { norm, .. } => {
                let y: Vec<i64> = x.iter().map(|&v| v as i64).collect();
                norm(&y) <= k + TOL
            }
        }
    }
}

pub fn hermite_normal_form(dim: usize, generators: &[IntVec]) -> Result<IntegerLattice> {
    IntegerLattice::from_generators(dim, generators)
}

impl IntegerLattice {
    pub fn zero(dim: usize) -> Self {
        IntegerLattice { dim, basis: Vec::new() }
    }

    pub fn from_generators(dim: usize, generators: &[IntVec]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::pre("ambient dimension must be positive"));
        }
        for g in generators {
            if g.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: g.len() });
            }
        }
        let e = echelon(generators.to_vec(), dim, false);
        let rank = e.rank();
        let mut rows = e.rows;
        rows.truncate(rank);
        Ok(IntegerLattice { dim, basis: rows })
    }

    pub fn from_i64(dim: usize, generators: &[Vec<i64>]) -> Result<Self> {
        let g: Vec<IntVec> = generators.iter().map(|v| to_big(v)).collect();
        Self::from_generators(dim, &g)
    }

    /// Accepts a basis that is already canonical; errors otherwise.
    pub fn from_canonical(dim: usize, basis: Vec<IntVec>) -> Result<Self> {
        let l = Self::from_generators(dim, &basis)?;
        if l.basis != basis {
            return Err(Error::pre("basis is not in canonical Hermite form"));
        }
        Ok(l)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[IntVec] {
        &self.basis
    }

    pub fn basis_i64(&self) -> Result<Vec<Vec<i64>>> {
        self.basis.iter().map(|r| to_i64(r)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.basis
            .iter()
            .map(|r| r.iter().position(|x| !x.is_zero()).expect("basis rows are nonzero"))
            .collect()
    }

    /// Coefficients of `v` in the stored basis, if `v` is in the lattice.
    pub fn coefficients(&self, v: &[BigInt]) -> Result<Option<IntVec>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        Ok(solve_hermite(&self.basis, &self.pivots(), v))
    }

    pub fn contains(&self, v: &[BigInt]) -> Result<bool> {
        Ok(self.coefficients(v)?.is_some())
    }

    pub fn contains_i64(&self, v: &[i64]) -> Result<bool> {
        self.contains(&to_big(v))
    }

    pub fn sum(&self, other: &IntegerLattice) -> Result<IntegerLattice> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut g = self.basis.clone();
        g.extend(other.basis.iter().cloned());
        Self::from_generators(self.dim, &g)
    }

    pub fn is_sublattice_of(&self, other: &IntegerLattice) -> Result<bool> {
        for b in &self.basis {
            if !other.contains(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Index `[Z^d : L]` for full-rank lattices.
    pub fn index(&self) -> Option<BigInt> {
        if self.rank() != self.dim {
            return None;
        }
        let mut acc = BigInt::one();
        for (i, p) in self.pivots().into_iter().enumerate() {
            acc *= &self.basis[i][p];
        }
        Some(acc)
    }

    pub fn smith_decomposition(&self) -> SmithForm {
        smith(&self.basis, self.dim)
    }

    /// All lattice points of norm at most `k`, sorted lexicographically.
    pub fn points_in_ball(&self, k: f64, norm: &BallNorm) -> Vec<Vec<i64>> {
        assert!(k >= 0.0, "radius must be nonnegative");
        let bound = (norm.sup_bound(k) + 1e-9).floor() as i128;
        let rows: Vec<Vec<i128>> = self
            .basis
            .iter()
            .map(|r| r.iter().map(|x| x.to_i128().expect("basis entry exceeds i128")).collect())
            .collect();
        let pivots = self.pivots();
        let mut out = Vec::new();
        let mut partial = vec![0i128; self.dim];
        enumerate_ball(&rows, &pivots, 0, 0, &mut partial, bound, k, norm, &mut out);
        out.sort();
        out
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate_ball(
    rows: &[Vec<i128>],
    pivots: &[usize],
    level: usize,
    done_cols: usize,
    partial: &mut Vec<i128>,
    bound: i128,
    k: f64,
    norm: &BallNorm,
    out: &mut Vec<Vec<i64>>,
) {
    let next_final = if level < rows.len() { pivots[level] } else { partial.len() };
    if partial[done_cols..next_final].iter().any(|x| x.abs() > bound) {
        return;
    }
    if let BallNorm::Euclidean = norm {
        let s: i128 = partial[..next_final].iter().map(|x| x * x).sum();
        if s as f64 > k * k + 1e-9 {
            return;
        }
    }
    if level == rows.len() {
        if norm.within(partial, k) {
            out.push(partial.iter().map(|&x| x as i64).collect());
        }
        return;
    }
    let p = pivots[level];
    let h = rows[level][p];
    let lo = Integer::div_ceil(&(-bound - partial[p]), &h);
    let hi = Integer::div_floor(&(bound - partial[p]), &h);
    for c in lo..=hi {
        for (x, r) in partial.iter_mut().zip(&rows[level]) {
            *x += c * r;
        }
        enumerate_ball(rows, pivots, level + 1, next_final, partial, bound, k, norm, out);
        for (x, r) in partial.iter_mut().zip(&rows[level]) {
            *x -= c * r;
        }
    }
}

fn smith(m: &[IntVec], ncols: usize) -> SmithForm {
    let k = m.len();
    let mut a: Vec<IntVec> = m.to_vec();
    let mut u = identity(k);
    let mut v = identity(ncols);
    for t in 0..k.min(ncols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..k {
                for j in t..ncols {
                    if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                return finish_smith(a, u, v, t);
            };
            a.swap(t, bi);
            u.swap(t, bi);
            col_swap(&mut a, t, bj);
            col_swap(&mut v, t, bj);
            let mut clean = true;
            for i in t + 1..k {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                row_sub(&mut a, i, t, &q);
                row_sub(&mut u, i, t, &q);
                clean &= a[i][t].is_zero();
            }
            for j in t + 1..ncols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                col_sub(&mut a, j, t, &q);
                col_sub(&mut v, j, t, &q);
                clean &= a[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..k).find(|&i| (t + 1..ncols).any(|j| !a[i][j].is_multiple_of(&a[t][t])));
            if let Some(i) = bad {
                row_sub(&mut a, t, i, &BigInt::from(-1));
                row_sub(&mut u, t, i, &BigInt::from(-1));
                continue;
            }
            break;
        }
        if a[t][t].is_negative() {
            row_neg(&mut a, t);
            row_neg(&mut u, t);
        }
    }
    let r = k.min(ncols);
    finish_smith(a, u, v, r)
}

fn finish_smith(a: Vec<IntVec>, u: Vec<IntVec>, v: Vec<IntVec>, nonzero: usize) -> SmithForm {
    let diag = (0..nonzero).map(|i| a[i][i].clone()).collect();
    SmithForm { u, diag, v }
}

pub fn mat_mul(a: &[IntVec], b: &[IntVec]) -> Vec<IntVec> {
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| row.iter().zip(b.iter()).map(|(x, brow)| x * &brow[j]).sum())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(d: usize, g: &[&[i64]]) -> IntegerLattice {
        let g: Vec<Vec<i64>> = g.iter().map(|r| r.to_vec()).collect();
        IntegerLattice::from_i64(d, &g).unwrap()
    }

    #[test]
    fn hnf_examples() {
        assert!(lat(2, &[]).is_zero());
        assert_eq!(lat(2, &[&[2, 0], &[0, 2]]).basis_i64().unwrap(), vec![vec![2, 0], vec![0, 2]]);
        assert_eq!(lat(2, &[&[2, 0], &[1, 1]]).basis_i64().unwrap(), vec![vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn hnf_rejects_ragged_input() {
        let err = IntegerLattice::from_i64(2, &[vec![1, 0], vec![1]]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn smith_examples() {
        let s = lat(2, &[]).smith_decomposition();
        assert!(s.diag.is_empty());
        let s = lat(2, &[&[2, 0], &[0, 2]]).smith_decomposition();
        assert_eq!(s.diag, vec![BigInt::from(2), BigInt::from(2)]);
        let l = lat(2, &[&[1, 1], &[0, 2]]);
        let s = l.smith_decomposition();
        assert_eq!(s.diag, vec![BigInt::from(1), BigInt::from(2)]);
        let umv = mat_mul(&mat_mul(&s.u, l.basis()), &s.v);
        assert_eq!(umv, vec![to_big(&[1, 0]), to_big(&[0, 2])]);
    }

    #[test]
    fn contains_examples() {
        let l = lat(2, &[&[2, 0], &[1, 1]]);
        assert!(l.contains_i64(&[3, 1]).unwrap());
        assert!(l.contains_i64(&[0, 0]).unwrap());
        assert!(!lat(2, &[&[2, 0], &[0, 2]]).contains_i64(&[1, 0]).unwrap());
        assert!(matches!(l.contains_i64(&[1]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn ball_examples() {
        assert_eq!(lat(3, &[]).points_in_ball(7.5, &BallNorm::Euclidean), vec![vec![0, 0, 0]]);
        let pts = lat(3, &[&[1, 1, -1]]).points_in_ball(2.0, &BallNorm::Euclidean);
        assert_eq!(pts, vec![vec![-1, -1, 1], vec![0, 0, 0], vec![1, 1, -1]]);
        assert_eq!(lat(2, &[&[5, 0], &[0, 5]]).points_in_ball(4.0, &BallNorm::Euclidean), vec![vec![0, 0]]);
    }

    #[test]
    fn index_of_full_rank() {
        assert_eq!(lat(2, &[&[2, 0], &[1, 1]]).index(), Some(BigInt::from(2)));
        assert_eq!(lat(2, &[&[2, 0]]).index(), None);
    }
}
