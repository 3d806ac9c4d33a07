//! Numerical toolkit for Ricci-flow bubble dynamics on 4-orbifolds.
//!
//! The crate covers, in order of dependency: pointwise 2-form and curvature
//! algebra on ℝ⁴ (`frame4`), cohomogeneity-one metrics over S³/Γ and their
//! curvature (`cohom1`), the Eguchi-Hanson family and its infinitesimal
//! Ricci-flat deformations (`eh_deform`), orbifold-point stability of Einstein
//! metrics and Ricci solitons (`stability`), bubble-parameter ODE dynamics
//! (`flow`), glued approximate-flow background metrics and their curvature
//! scans (`glue`), and ADE moduli algebra with desingularization topology
//! (`moduli`).

pub mod cohom1;
pub mod eh_deform;
pub mod stability;
pub mod flow;
pub mod frame4;
pub mod glue;
pub mod moduli;
pub mod quad;

pub use cohom1::{PointCurvature, RadialProfile, TriaxialMetric};
pub use eh_deform::ZetaParam;
pub use frame4::{CurvBlocks, Orientation, Riemann4, Sym2Traceless, TwoForm};

/// Least-squares slope of a set of (x, y) points.
pub fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
