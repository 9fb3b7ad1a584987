//! Orthonormal bases of `R^r` and the planar projection `pi_e`.

use serde::{Deserialize, Serialize};

use super::planar::P2;
use crate::error::{Error, Result};

pub const ORTHO_TOL: f64 = 1e-9;

/// Orthonormal basis `e_1..e_r`, stored by columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    columns: Vec<Vec<f64>>,
}

fn dotn(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Basis {
    pub fn standard(r: usize) -> Self {
        let columns = (0..r).map(|i| (0..r).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Basis { columns }
    }

    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let r = columns.len();
        if columns.iter().any(|c| c.len() != r) {
            return Err(Error::pre("basis must be square"));
        }
        let b = Basis { columns };
        let res = b.orthonormality_residual();
        if res > ORTHO_TOL {
            return Err(Error::pre(format!("basis is not orthonormal (residual {res:e})")));
        }
        Ok(b)
    }

    /// Rotation of the plane by `theta`, optionally followed by a reflection
    /// of the second axis.
    pub fn planar(theta: f64, reflect: bool) -> Self {
        let (s, c) = theta.sin_cos();
        let e2 = if reflect { vec![s, -c] } else { vec![-s, c] };
        Basis { columns: vec![vec![c, s], e2] }
    }

    /// `R_z(alpha) R_y(beta) R_z(gamma)`, optionally with the third column negated.
    pub fn euler_zyz(alpha: f64, beta: f64, gamma: f64, reflect: bool) -> Self {
        let rz = |t: f64| {
            let (s, c) = t.sin_cos();
            [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
        };
        let ry = |t: f64| {
            let (s, c) = t.sin_cos();
            [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
        };
        let mul = |a: [[f64; 3]; 3], b: [[f64; 3]; 3]| {
            let mut m = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
                }
            }
            m
        };
        let m = mul(mul(rz(alpha), ry(beta)), rz(gamma));
        let mut columns: Vec<Vec<f64>> = (0..3).map(|j| (0..3).map(|i| m[i][j]).collect()).collect();
        if reflect {
            columns[2].iter_mut().for_each(|x| *x = -*x);
        }
        Basis { columns }
    }

    /// Basis whose last vectors span `kernel` (given as integer vectors) and
    /// whose first two span a complement, by Gram-Schmidt on `kernel`
    /// followed by the standard vectors.
    pub fn aligned_to(r: usize, kernel: &[Vec<i64>]) -> Result<Self> {
        let mut ortho: Vec<Vec<f64>> = Vec::new();
        let push = |ortho: &mut Vec<Vec<f64>>, v: Vec<f64>| {
            let mut w = v;
            for q in ortho.iter() {
                let c = dotn(&w, q);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
            let n = dotn(&w, &w).sqrt();
            if n > 1e-9 {
                ortho.push(w.into_iter().map(|x| x / n).collect());
                true
            } else {
                false
            }
        };
        for k in kernel {
            if k.len() != r {
                return Err(Error::DimensionMismatch { expected: r, found: k.len() });
            }
            push(&mut ortho, k.iter().map(|&x| x as f64).collect());
        }
        let kdim = ortho.len();
        if kdim + 2 > r {
            return Err(Error::BasisAlignment(format!("kernel of dimension {kdim} leaves no plane in R^{r}")));
        }
        for i in 0..r {
            if ortho.len() == r {
                break;
            }
            push(&mut ortho, (0..r).map(|j| if i == j { 1.0 } else { 0.0 }).collect());
        }
        let mut columns: Vec<Vec<f64>> = ortho[kdim..].to_vec();
        columns.extend_from_slice(&ortho[..kdim]);
        Basis::from_columns(columns)
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// `max |E^T E - I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.columns.iter().enumerate() {
            for (j, b) in self.columns.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dotn(a, b) - target).abs());
            }
        }
        worst
    }

    /// First two coordinates of `x` in this basis.
    #[inline]
    pub fn project(&self, x: &[f64]) -> P2 {
        [dotn(x, &self.columns[0]), dotn(x, &self.columns[1])]
    }

    pub fn project_int(&self, x: &[i64]) -> P2 {
        let mut p = [0.0; 2];
        for (k, &c) in x.iter().enumerate() {
            if c != 0 {
                p[0] += c as f64 * self.columns[0][k];
                p[1] += c as f64 * self.columns[1][k];
            }
        }
        p
    }

    /// Operator 2-norm of the difference of the two basis matrices.
    pub fn op_distance(&self, other: &Basis) -> f64 {
        let diff: Vec<Vec<f64>> = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        spectral_norm(&diff)
    }
}

/// Largest singular value of a square matrix given by columns, from the
/// cyclic Jacobi eigenvalues of `A^T A`.
pub fn spectral_norm(cols: &[Vec<f64>]) -> f64 {
    let n = cols.len();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| dotn(&cols[i], &cols[j])).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).fold(0.0f64, f64::max).max(0.0).sqrt()
}

/// Finite family of bases such that every orthonormal basis is within
/// `eps` (operator norm) of one of them. Implemented for `r = 2, 3`.
pub fn basis_cover(r: usize, eps: f64) -> Result<Vec<Basis>> {
    if !(eps > 0.0) {
        return Err(Error::pre("cover radius must be positive"));
    }
    let tau = 2.0 * std::f64::consts::PI;
    match r {
        // |R(t) - R(t')| = 2|sin((t - t')/2)| <= |t - t'|
        2 => {
            let n = (tau / (2.0 * eps)).ceil() as usize;
            let mut out = Vec::with_capacity(2 * n);
            for reflect in [false, true] {
                for k in 0..n {
                    out.push(Basis::planar(k as f64 * tau / n as f64, reflect));
                }
            }
            Ok(out)
        }
        // Each Euler angle moves the matrix by at most its own change, so a
        // grid of pitch h leaves every rotation within 3h/2.
        3 => {
            let h = 2.0 * eps / 3.0;
            let na = (tau / h).ceil() as usize;
            let nb = (std::f64::consts::PI / h).ceil() as usize;
            let mut out = Vec::with_capacity(2 * na * na * (nb + 1));
            for reflect in [false, true] {
                for i in 0..na {
                    for j in 0..=nb {
                        for k in 0..na {
                            out.push(Basis::euler_zyz(
                                i as f64 * tau / na as f64,
                                j as f64 * std::f64::consts::PI / nb as f64,
                                k as f64 * tau / na as f64,
                                reflect,
                            ));
                        }
                    }
                }
            }
            Ok(out)
        }
        _ => Err(Error::Unsupported(format!("basis cover for rank {r} (only 2 and 3)"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_basis_puts_kernel_last() {
        let b = Basis::aligned_to(3, &[vec![0, 0, 4]]).unwrap();
        assert!(b.project_int(&[0, 0, 1]).iter().all(|c| c.abs() < 1e-12));
        assert_eq!(b.project_int(&[1, 2, 7]), [1.0, 2.0]);
        let tilted = Basis::aligned_to(3, &[vec![1, 1, 0]]).unwrap();
        assert!(tilted.project_int(&[3, 3, 0]).iter().all(|c| c.abs() < 1e-12));
        assert!(tilted.orthonormality_residual() < 1e-12);
        assert!(Basis::aligned_to(2, &[vec![1, 0]]).is_err());
    }

    #[test]
    fn spectral_norm_matches_rotation_gap() {
        let a = Basis::planar(0.3, false);
        let b = Basis::planar(0.5, false);
        assert!((a.op_distance(&b) - 2.0 * (0.1f64).sin()).abs() < 1e-12);
        let diag = vec![vec![3.0, 0.0, 0.0], vec![0.0, -5.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert!((spectral_norm(&diag) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn euler_bases_are_orthonormal() {
        for (a, b, c) in [(0.1, 0.2, 0.3), (3.0, 1.0, -2.0)] {
            assert!(Basis::euler_zyz(a, b, c, true).orthonormality_residual() < 1e-12);
        }
        assert!(basis_cover(4, 0.1).is_err());
    }
}
