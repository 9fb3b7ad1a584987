//! Continuous-to-discrete geometry: planar sets, the `Graph_e` map, good
//! quadruples, boxes and corridors, and the overlap constant `kappa`.

pub mod basis;
pub mod graph;
pub mod kappa;
pub mod layout;
pub mod planar;
pub mod quadruple;

pub use basis::{basis_cover, Basis};
pub use graph::{ball_offsets, boundary_separation_check, inflate, inflate_set, neighbourhood_radius, r_s, GraphMap};
pub use kappa::{kappa, kappa_report, KappaReport};
pub use layout::RenormLayout;
pub use planar::{HalfPlane, Piece, PlanarSet, P2};
pub use quadruple::{chimney_sets, ell_b, is_good_quadruple, n_b, Chimney, GoodQuadruple, QuadDiagnostics, ZONE_NAMES};

/// Absolute tolerance of planar distance comparisons.
pub const TOL: f64 = 1e-9;
