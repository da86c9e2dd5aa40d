//! Scaling limits of the torus model: the half-infinite cylinder
//! `Z × Z_n`, the plane `Z²`, and the circle/ellipse geometry that decides
//! which phase a given `β` selects.

pub mod arc;
pub mod cylinder;
pub mod plane;
pub mod quadrature;
pub mod roots;

pub use arc::{arc_geometry, occupation_from_beta, predicted_sector_sign, ArcGeometry, ArcPhase};
pub use cylinder::{cylinder_correlation, CylinderKernelSpec};
pub use plane::{plane_correlation, PlaneKernelSpec};
pub use roots::{mu, root_sets, RootSets};
