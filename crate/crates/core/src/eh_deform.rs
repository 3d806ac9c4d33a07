//! The Eguchi-Hanson family `eh_ζ`, its explicit infinitesimal Ricci-flat
//! deformations `o_i(ζ)`, the radial potential `u`, and the suspension
//! eigenfunction.
//!
//! For `ζ ∈ ℝ³∖{0}` and `ε = |ζ|^{1/2}`, the metric is
//! `eh_ζ = √(r⁴/(ε⁴+r⁴))(dr² + r²α₁²) + √(ε⁴+r⁴)(α₂² + α₃²)` in the frame
//! rotated so that `α₁` pairs with `ζ/|ζ|`. The deformations have frame
//! components `oᵢ = ε⁴/(ε⁴+r⁴) · Mᵢ` for constant traceless matrices `Mᵢ`,
//! pointwise norm `2ε⁴/(ε⁴+r⁴)` and L² norms `2π²|ζ|²`.
//!
//! L² pairings use the unit-volume convention `Vol(S³) = 2π²` of the
//! deformation family (the measure of the double cover of the ℝP³ sections),
//! which is the normalization entering every Gram-matrix statement here.

use crate::cohom1::{round_suspension, CohomError, RadialProfile, TriaxialMetric};
use crate::quad;
use nalgebra::{Matrix3, Matrix4, Vector3};
use std::f64::consts::PI;

#[derive(Debug, thiserror::Error)]
pub enum EhError {
    #[error("zeta must be nonzero")]
    ZeroZeta,
    #[error("index {0} outside 1..=3")]
    BadIndex(usize),
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("angle {0} outside the open interval (0, π)")]
    AngleOutOfRange(f64),
    #[error(transparent)]
    Geometry(#[from] CohomError),
    #[error(transparent)]
    Quadrature(#[from] quad::QuadError),
}

/// Bubble parameter `ζ ∈ ℝ³∖{0}` with `ε = |ζ|^{1/2}` and the adapted
/// oriented orthonormal frame (first axis `ζ/|ζ|`).
#[derive(Debug, Clone)]
pub struct ZetaParam {
    zeta: Vector3<f64>,
    eps: f64,
    frame: Matrix3<f64>,
}

impl ZetaParam {
    pub fn new(zeta: [f64; 3]) -> Result<Self, EhError> {
        let z = Vector3::from_column_slice(&zeta);
        let n = z.norm();
        if n == 0.0 {
            return Err(EhError::ZeroZeta);
        }
        let u1 = z / n;
        // Complete to a right-handed frame using the least-aligned axis.
        let mut axis = Vector3::zeros();
        let amin = (0..3).min_by(|&i, &j| u1[i].abs().partial_cmp(&u1[j].abs()).unwrap()).unwrap();
        axis[amin] = 1.0;
        let u2 = (axis - u1 * u1.dot(&axis)).normalize();
        let u3 = u1.cross(&u2);
        let frame = Matrix3::from_columns(&[u1, u2, u3]);
        Ok(Self {
            zeta: z,
            eps: n.sqrt(),
            frame,
        })
    }

    pub fn zeta(&self) -> Vector3<f64> {
        self.zeta
    }

    pub fn norm(&self) -> f64 {
        self.zeta.norm()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Rotation with columns `(ζ/|ζ|, ·, ·)` mapping the reference frame to
    /// the ζ-adapted frame.
    pub fn frame(&self) -> Matrix3<f64> {
        self.frame
    }
}

/// Profile factor `E(r) = ε⁴ + r⁴` with two derivatives.
fn e_factor(eps: f64, r: f64) -> (f64, f64, f64) {
    let e = eps.powi(4) + r.powi(4);
    (e, 4.0 * r.powi(3), 12.0 * r.powi(2))
}

/// The Eguchi-Hanson metric of parameter ζ as a triaxial metric:
/// `a₀ = r E^{-1/4}`, `a₁ = r² E^{-1/4}`, `a₂ = a₃ = E^{1/4}` with
/// `E = ε⁴ + r⁴`; group ℤ₂ at infinity, frame rotated to the ζ-adapted frame.
pub fn eh_metric(z: &ZetaParam) -> Result<TriaxialMetric, EhError> {
    let eps = z.eps();
    let hi = f64::INFINITY;
    let a0 = RadialProfile::new(0.0, hi, move |r| {
        let (e, de, _) = e_factor(eps, r);
        let em14 = e.powf(-0.25);
        let v = r * em14;
        let dv = em14 - 0.25 * r * e.powf(-1.25) * de;
        // a₀'' = −5r³E^{−5/4} + 5r⁷E^{−9/4}
        let ddv = -5.0 * r.powi(3) * e.powf(-1.25) + 5.0 * r.powi(7) * e.powf(-2.25);
        (v, dv, ddv)
    });
    let a1 = RadialProfile::new(0.0, hi, move |r| {
        let (e, _, _) = e_factor(eps, r);
        let v = r * r * e.powf(-0.25);
        let dv = 2.0 * r * e.powf(-0.25) - r.powi(5) * e.powf(-1.25);
        let ddv = 2.0 * e.powf(-0.25) - 7.0 * r.powi(4) * e.powf(-1.25)
            + 5.0 * r.powi(8) * e.powf(-2.25);
        (v, dv, ddv)
    });
    let a23 = move |r: f64| {
        let (e, _, _) = e_factor(eps, r);
        let v = e.powf(0.25);
        let dv = r.powi(3) * e.powf(-0.75);
        let ddv = 3.0 * r.powi(2) * e.powf(-0.75) - 3.0 * r.powi(6) * e.powf(-1.75);
        (v, dv, ddv)
    };
    let a2 = RadialProfile::new(0.0, hi, a23);
    let a3 = RadialProfile::new(0.0, hi, a23);
    Ok(TriaxialMetric::new(a0, a1, a2, a3, 2).with_frame_rotation(z.frame()))
}

/// Constant frame matrices of the three deformations: `oᵢ = ε⁴/(ε⁴+r⁴)·Mᵢ`.
fn o_patterns() -> [Matrix4<f64>; 3] {
    let m1 = Matrix4::from_diagonal(&nalgebra::Vector4::new(-1.0, -1.0, 1.0, 1.0));
    let mut m2 = Matrix4::zeros();
    m2[(0, 2)] = 1.0;
    m2[(2, 0)] = 1.0;
    m2[(1, 3)] = -1.0;
    m2[(3, 1)] = -1.0;
    let mut m3 = Matrix4::zeros();
    m3[(0, 3)] = 1.0;
    m3[(3, 0)] = 1.0;
    m3[(1, 2)] = 1.0;
    m3[(2, 1)] = 1.0;
    [m1, m2, m3]
}

/// The three deformation tensors at radius `r`, as frame components in the
/// orthonormal coframe of `eh_ζ` (ζ-adapted frame).
pub fn o_tensors(z: &ZetaParam, r: f64) -> Result<[Matrix4<f64>; 3], EhError> {
    if r <= 0.0 {
        return Err(EhError::NonPositiveRadius(r));
    }
    let c = o_coefficient(z, r);
    Ok(o_patterns().map(|m| m * c))
}

/// Radial coefficient `ε⁴/(ε⁴+r⁴)` shared by the three deformations.
pub fn o_coefficient(z: &ZetaParam, r: f64) -> f64 {
    let e4 = z.eps().powi(4);
    e4 / (e4 + r.powi(4))
}

/// Pointwise norm `|oᵢ|(r) = 2ε⁴/(ε⁴+r⁴)`.
pub fn o_pointwise_norm(z: &ZetaParam, r: f64) -> f64 {
    2.0 * o_coefficient(z, r)
}

/// L² pairing `⟨oᵢ, oⱼ⟩` over the bubble, by adaptive quadrature on
/// `[0, R_cut]` plus the exact tail of the closed-form integrand. Returns
/// `2π²|ζ|²δᵢⱼ` within the quadrature tolerance.
pub fn l2_pairing(z: &ZetaParam, i: usize, j: usize) -> Result<f64, EhError> {
    if !(1..=3).contains(&i) {
        return Err(EhError::BadIndex(i));
    }
    if !(1..=3).contains(&j) {
        return Err(EhError::BadIndex(j));
    }
    let pats = o_patterns();
    let pij = pats[i - 1].component_mul(&pats[j - 1]).sum();
    if pij == 0.0 {
        return Ok(0.0);
    }
    let eps = z.eps();
    let e8 = eps.powi(4) * eps.powi(4);
    // ⟨oᵢ,oⱼ⟩(r)·√g = pij·ε⁸/E²·r³, weighted by Vol(S³) = 2π².
    let w = 2.0 * PI * PI;
    let r_cut = 100.0 * eps;
    let integrand = move |r: f64| {
        let e = eps.powi(4) + r.powi(4);
        pij * e8 / (e * e) * r.powi(3) * w
    };
    let tol = 1e-10;
    let (val, _err) = quad::integrate(integrand, 0.0, r_cut, tol, 2000)?;
    // Exact tail: ∫_R^∞ ε⁸ r³/E² dr = ε⁸/(4E(R)).
    let tail = pij * w * e8 / (4.0 * (eps.powi(4) + r_cut.powi(4)));
    Ok(val + tail)
}

/// The radial potential `u = ½√(ε⁴+r⁴)` with its derivatives.
pub fn potential_u(z: &ZetaParam, r: f64) -> (f64, f64, f64) {
    let (e, _, _) = e_factor(z.eps(), r);
    let s = e.sqrt();
    let u = 0.5 * s;
    let du = r.powi(3) / s;
    let ddu = 3.0 * r.powi(2) / s - 2.0 * r.powi(6) / (s * e);
    (u, du, ddu)
}

/// Hessian of `u` in the orthonormal coframe of `eh_ζ`.
pub fn potential_hessian(z: &ZetaParam, r: f64) -> Result<Matrix4<f64>, EhError> {
    let m = eh_metric(z)?;
    let (_, du, ddu) = potential_u(z, r);
    Ok(m.radial_hessian(r, du, ddu)?)
}

/// Sup-norm over the interior grid points of the Lichnerowicz Laplacian
/// applied to `o_i`, with the radial derivatives of the deformation
/// coefficient taken by second-order central finite differences on a uniform
/// grid. Converges to zero at rate O(h²) under grid refinement.
pub fn lichnerowicz_residual(
    z: &ZetaParam,
    i: usize,
    grid_lo: f64,
    grid_hi: f64,
    n: usize,
) -> Result<f64, EhError> {
    if !(1..=3).contains(&i) {
        return Err(EhError::BadIndex(i));
    }
    if n < 64 {
        return Err(EhError::Geometry(CohomError::GridTooCoarse(n, 64)));
    }
    let metric = eh_metric(z)?;
    let pat = o_patterns()[i - 1];
    let h = (grid_hi - grid_lo) / (n - 1) as f64;
    let c: Vec<f64> = (0..n).map(|k| o_coefficient(z, grid_lo + k as f64 * h)).collect();
    let mut sup: f64 = 0.0;
    for k in 1..n - 1 {
        let r = grid_lo + k as f64 * h;
        let dc = (c[k + 1] - c[k - 1]) / (2.0 * h);
        let ddc = (c[k + 1] - 2.0 * c[k] + c[k - 1]) / (h * h);
        let hh = pat * c[k];
        let dh = pat * dc;
        let ddh = pat * ddc;
        let lich = metric.lichnerowicz_invariant(r, &hh, &dh, &ddh)?;
        sup = sup.max(lich.abs().max());
    }
    Ok(sup)
}

/// Trace and divergence sup-norms of `o_i` over sample radii, using the
/// analytic radial derivative of the coefficient.
pub fn kernel_gauge_residual(z: &ZetaParam, i: usize, radii: &[f64]) -> Result<(f64, f64), EhError> {
    if !(1..=3).contains(&i) {
        return Err(EhError::BadIndex(i));
    }
    let metric = eh_metric(z)?;
    let pat = o_patterns()[i - 1];
    let e4 = z.eps().powi(4);
    let mut tr_sup: f64 = 0.0;
    let mut div_sup: f64 = 0.0;
    for &r in radii {
        let e = e4 + r.powi(4);
        let c = e4 / e;
        let dc = -e4 * 4.0 * r.powi(3) / (e * e);
        let hh = pat * c;
        let dh = pat * dc;
        tr_sup = tr_sup.max(hh.trace().abs());
        let div = metric.divergence_invariant(r, &hh, &dh)?;
        div_sup = div_sup.max(div.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    Ok((tr_sup, div_sup))
}

/// Value and residual data of the suspension eigenfunction `v(θ) = cos θ` on
/// `dθ² + sin²θ·g_{S³/Γ}`: the eigenvalue identity `Δv + 4v = 0` and the
/// conformal identity `Hess v = −v·g`.
#[derive(Debug, Clone, Copy)]
pub struct SuspensionEigen {
    pub value: f64,
    pub laplace_residual: f64,
    pub hessian_residual: f64,
}

pub fn suspension_eigenfunction(theta: f64) -> Result<SuspensionEigen, EhError> {
    if !(theta > 0.0 && theta < PI) {
        return Err(EhError::AngleOutOfRange(theta));
    }
    let m = round_suspension(2);
    let v = theta.cos();
    let dv = -theta.sin();
    let ddv = -theta.cos();
    let lap = m.radial_laplacian(theta, dv, ddv)?;
    let hess = m.radial_hessian(theta, dv, ddv)?;
    Ok(SuspensionEigen {
        value: v,
        laplace_residual: (lap + 4.0 * v).abs(),
        hessian_residual: (hess + Matrix4::identity() * v).abs().max(),
    })
}

/// Leading correction `H⁴_ζ` of `eh_ζ − e` at infinity, as components in the
/// flat orthonormal coframe `(dr, rα₁, rα₂, rα₃)` of the ζ-adapted frame:
/// `ε⁴/(2r⁴)·diag(−1,−1,1,1)`, which equals `ζ⁺∘ρ(ζ)⁻/(2r⁴)`.
pub fn h4_leading(z: &ZetaParam, r: f64) -> Matrix4<f64> {
    let c = z.eps().powi(4) / (2.0 * r.powi(4));
    Matrix4::from_diagonal(&nalgebra::Vector4::new(-c, -c, c, c))
}

/// Frame components of `eh_ζ − e` in the flat orthonormal coframe.
pub fn eh_minus_flat(z: &ZetaParam, r: f64) -> Result<Matrix4<f64>, EhError> {
    let m = eh_metric(z)?;
    let p = m.profiles_at(r)?;
    let mut d = Matrix4::zeros();
    d[(0, 0)] = p.a[0] * p.a[0] - 1.0;
    for i in 1..4 {
        d[(i, i)] = (p.a[i] / r).powi(2) - 1.0;
    }
    Ok(d)
}
