//! Boxes `B_z` and corridors `C_z` on a quotient `H = G / Lambda`.

use super::basis::Basis;
use super::planar::{add, norm, scale, PlanarSet, P2};
use super::quadruple::GoodQuadruple;
use super::TOL;
use crate::error::{Error, Result};
use crate::marked_group::{GroupElement, MarkedAbelianGroup};
use crate::percolation::window::box_elements;

/// Layout of boxes and corridors for `z` in `[-window, window]^2`.
#[derive(Clone, Debug)]
pub struct RenormLayout {
    quadruple: GoodQuadruple,
    basis: Basis,
    base: MarkedAbelianGroup,
    group: MarkedAbelianGroup,
    lambda: Vec<GroupElement>,
    /// Planar image of each free unit vector of `H`.
    q_free: Vec<P2>,
    r_s: f64,
    window: i64,
}

impl RenormLayout {
    /// Requires `Lambda subset Ker(pi_e) x T` and a quotient of rank at least 2.
    pub fn new(base: MarkedAbelianGroup, lambda: Vec<GroupElement>, basis: Basis, quadruple: GoodQuadruple, window: i64) -> Result<Self> {
        if base.rank() < 2 {
            return Err(Error::RankTooSmall { rank: base.rank() });
        }
        if basis.dim() != base.rank() {
            return Err(Error::DimensionMismatch { expected: base.rank(), found: basis.dim() });
        }
        let r_s = base.r_s();
        if !quadruple.check(r_s).0 {
            return Err(Error::pre(format!("layout quadruple {quadruple} is not good")));
        }
        for l in &lambda {
            base.check(l)?;
            let p = basis.project_int(&l.free);
            if norm(p) > TOL {
                return Err(Error::BasisAlignment(format!("{l} projects to ({:.3e},{:.3e}), not into Ker(pi_e)", p[0], p[1])));
            }
        }
        let group = base.quotient(&lambda)?;
        if group.rank() < 2 {
            return Err(Error::RankTooSmall { rank: group.rank() });
        }
        let q_free: Vec<P2> = (0..group.rank())
            .map(|j| {
                let mut e = group.zero();
                e.free[j] = 1;
                basis.project_int(&base.image(&group.lift(&e)).free)
            })
            .collect();
        for t in 0..group.torsion().len() {
            let mut e = group.zero();
            e.tor[t] = 1;
            let p = basis.project_int(&base.image(&group.lift(&e)).free);
            if norm(p) > TOL {
                return Err(Error::BasisAlignment("torsion of the quotient has nonzero planar image".into()));
            }
        }
        Ok(RenormLayout { quadruple, basis, base, group, lambda, q_free, r_s, window })
    }

    /// Layout with the basis built from `Lambda`'s free parts.
    pub fn aligned(base: MarkedAbelianGroup, lambda: Vec<GroupElement>, quadruple: GoodQuadruple, window: i64) -> Result<Self> {
        let kernel: Vec<Vec<i64>> = lambda.iter().map(|l| l.free.clone()).collect();
        let basis = Basis::aligned_to(base.rank(), &kernel)?;
        Self::new(base, lambda, basis, quadruple, window)
    }

    pub fn quadruple(&self) -> &GoodQuadruple {
        &self.quadruple
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn base(&self) -> &MarkedAbelianGroup {
        &self.base
    }

    /// The quotient `H`.
    pub fn group(&self) -> &MarkedAbelianGroup {
        &self.group
    }

    pub fn lambda(&self) -> &[GroupElement] {
        &self.lambda
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    pub fn r_s(&self) -> f64 {
        self.r_s
    }

    /// `G -> H`.
    pub fn quotient_map(&self, x: &GroupElement) -> GroupElement {
        self.group.image(&self.base.lift(x))
    }

    /// `pi_e` of any lift of `x` (well defined by the alignment).
    pub fn project(&self, x: &GroupElement) -> P2 {
        let mut p = [0.0, 0.0];
        for (c, q) in x.free.iter().zip(&self.q_free) {
            p = add(p, scale(*q, *c as f64));
        }
        p
    }

    pub fn center(&self, z: [i64; 2]) -> P2 {
        add(scale(self.quadruple.u(), z[0] as f64), scale(self.quadruple.v, z[1] as f64))
    }

    /// `z1 u + z2 v + [a, b, -a, -b]`.
    pub fn box_set(&self, z: [i64; 2]) -> PlanarSet {
        self.quadruple.parallelogram(1.0).translate(self.center(z))
    }

    /// `z1 u + z2 v + [4a, 4b, -4a, -4b]`.
    pub fn corridor_set(&self, z: [i64; 2]) -> PlanarSet {
        self.quadruple.parallelogram(4.0).translate(self.center(z))
    }

    pub fn in_box(&self, x: &GroupElement, z: [i64; 2]) -> bool {
        self.box_set(z).distance(self.project(x)) <= self.r_s + TOL
    }

    pub fn in_corridor(&self, x: &GroupElement, z: [i64; 2]) -> bool {
        self.corridor_set(z).distance(self.project(x)) <= self.r_s + TOL
    }

    /// `(B_z, C_z)` as vertex predicates on `H`.
    pub fn boxes_corridors(&self, z: [i64; 2]) -> (impl Fn(&GroupElement) -> bool + '_, impl Fn(&GroupElement) -> bool + '_) {
        let b = self.box_set(z);
        let c = self.corridor_set(z);
        let r = self.r_s + TOL;
        (move |x: &GroupElement| b.distance(self.project(x)) <= r, move |x: &GroupElement| c.distance(self.project(x)) <= r)
    }

    pub fn sites(&self) -> Vec<[i64; 2]> {
        let w = self.window;
        (-w..=w).flat_map(|z2| (-w..=w).map(move |z1| [z1, z2])).collect()
    }

    /// Every `z` in the window whose corridor contains `x`.
    pub fn corridors_containing(&self, x: &GroupElement) -> Vec<[i64; 2]> {
        let p = self.project(x);
        self.sites().into_iter().filter(|&z| self.corridor_set(z).distance(p) <= self.r_s + TOL).collect()
    }

    /// All vertices of `H` lying in some corridor of the window. Needs a
    /// rank-2 quotient so that the union is finite.
    pub fn window_elements(&self) -> Result<Vec<GroupElement>> {
        if self.group.rank() != 2 {
            return Err(Error::Unsupported(format!("finite corridor window needs a rank-2 quotient, got rank {}", self.group.rank())));
        }
        let (q0, q1) = (self.q_free[0], self.q_free[1]);
        let det = q0[0] * q1[1] - q0[1] * q1[0];
        if det.abs() < 1e-12 {
            return Err(Error::BasisAlignment("quotient lattice projects degenerately".into()));
        }
        let w = self.window as f64;
        let reach = 4.0 * norm(self.quadruple.a).max(norm(self.quadruple.b)) + self.r_s;
        let rho = w * (norm(self.quadruple.u()) + norm(self.quadruple.v)) + reach;
        // |y| <= |Q^{-1}| rho with |Q^{-1}| <= Frobenius norm.
        let inv_frob = (q0[0].powi(2) + q0[1].powi(2) + q1[0].powi(2) + q1[1].powi(2)).sqrt() / det.abs();
        let l = (inv_frob * rho).ceil() as i64 + 1;
        let corridors: Vec<PlanarSet> = self.sites().into_iter().map(|z| self.corridor_set(z)).collect();
        Ok(box_elements(&self.group, l)
            .into_iter()
            .filter(|x| {
                let p = self.project(x);
                norm(p) <= rho + 1.0 && corridors.iter().any(|c| c.distance(p) <= self.r_s + TOL)
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marked_group::parse_group;

    fn layout() -> RenormLayout {
        let g = parse_group("3;").unwrap();
        let lambda = vec![GroupElement { free: vec![0, 0, 4], tor: vec![] }];
        let q = GoodQuadruple { a: [5.0, -3.0], b: [5.0, 3.0], v: [5.0, 3.0] };
        RenormLayout::aligned(g, lambda, q, 1).unwrap()
    }

    #[test]
    fn quotient_is_z2_times_z4() {
        let l = layout();
        assert_eq!(l.group().rank(), 2);
        assert_eq!(l.group().torsion(), &[4]);
    }

    #[test]
    fn misaligned_basis_is_rejected() {
        let g = parse_group("3;").unwrap();
        let lambda = vec![GroupElement { free: vec![0, 0, 4], tor: vec![] }];
        let q = GoodQuadruple { a: [5.0, -3.0], b: [5.0, 3.0], v: [5.0, 3.0] };
        let err = RenormLayout::new(g, lambda, Basis::euler_zyz(0.0, 0.3, 0.0, false), q, 1).unwrap_err();
        assert!(matches!(err, Error::BasisAlignment(_)));
    }

    #[test]
    fn boxes_sit_inside_corridors() {
        let l = layout();
        let pts = l.window_elements().unwrap();
        let (b, c) = l.boxes_corridors([1, 0]);
        for x in &pts {
            if b(x) {
                assert!(c(x));
            }
        }
    }
}
