//! Orbifold-point stability of Einstein metrics and gradient Ricci solitons,
//! and the obstruction pairing that drives the bubble-parameter dynamics.
//!
//! Stability at an orbifold point is decided by the sign of the weighted
//! selfdual curvature `R̄⁺ = R⁺ + (Λ − R/4)·Id`: negative definite means the
//! point is strictly stable (bubbles shrink along immortal flows), positive
//! definite strictly unstable (bubbles grow along ancient flows).
//!
//! The obstruction pairing computes the projection coefficients of the
//! linearized Einstein deviation onto the deformation kernel by a boundary
//! integral over S³ pairing the r⁻⁴ leading terms of the deformations with
//! the quadratic term of the orbifold metric. A single scalar calibration in
//! the isotropic case `R⁺ = Id` fixes the normalization; thereafter
//! `λᵢ = −R⁺_{1i}` in the ζ-adapted frame.

use crate::eh_deform::ZetaParam;
use crate::frame4::{
    compose, omega_basis, reassemble_curvature, zeta_plus, CurvBlocks, Orientation, RhoRotation,
};
use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use std::sync::OnceLock;

/// Eigenvalue tolerance separating Marginal from the strict verdicts.
pub const VERDICT_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum StabilityError {
    #[error("unknown builtin model `{0}`")]
    UnknownModel(String),
    #[error(transparent)]
    Zeta(#[from] crate::eh_deform::EhError),
}

/// Point data of a gradient Ricci soliton (or Einstein metric, `f` constant)
/// at an orbifold point.
#[derive(Debug, Clone)]
pub struct SolitonPointData {
    /// Soliton constant Λ in `Ric + Hess f = Λ g`.
    pub lambda: f64,
    /// Scalar curvature at the point.
    pub scal: f64,
    /// Selfdual curvature block at the point (basis `ω₁⁺, ω₂⁺, ω₃⁺`).
    pub rplus: Matrix3<f64>,
    /// Coefficients `f_ij` of the mixed quadratic part of the potential.
    pub f_hess_coeffs: Option<Matrix3<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    StrictlyStable,
    StrictlyUnstable,
    Mixed,
    Marginal,
}

impl std::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VerdictKind::StrictlyStable => "StrictlyStable",
            VerdictKind::StrictlyUnstable => "StrictlyUnstable",
            VerdictKind::Mixed => "Mixed",
            VerdictKind::Marginal => "Marginal",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// Eigenvalues of the weighted selfdual curvature, ascending.
    pub eigenvalues: [f64; 3],
}

/// Weighted selfdual curvature `R̄⁺ = R⁺ + (Λ − R/4)·Id`.
pub fn weighted_rplus(d: &SolitonPointData) -> Matrix3<f64> {
    d.rplus + Matrix3::identity() * (d.lambda - d.scal / 4.0)
}

/// Classify the orbifold point by the eigenvalues of `R̄⁺`.
pub fn classify(d: &SolitonPointData) -> Verdict {
    let w = weighted_rplus(d);
    let sym = (w + w.transpose()) * 0.5;
    let mut eig: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let eigenvalues = [eig[0], eig[1], eig[2]];
    let kind = if eigenvalues.iter().any(|e| e.abs() <= VERDICT_TOL) {
        VerdictKind::Marginal
    } else if eigenvalues.iter().all(|e| *e < -VERDICT_TOL) {
        VerdictKind::StrictlyStable
    } else if eigenvalues.iter().all(|e| *e > VERDICT_TOL) {
        VerdictKind::StrictlyUnstable
    } else {
        VerdictKind::Mixed
    };
    Verdict { kind, eigenvalues }
}

/// Quadratic part of the soliton potential and its Hessian:
/// `F₂ = (Λ/2 − R/(2n))r² + ½Σ f_ij xᵀ(ωᵢ⁺∘ωⱼ⁻)x` with n = 4, and
/// `Hess F₂ = (Λ − R/n)e + Σ f_ij ωᵢ⁺∘ωⱼ⁻`; solves `Δ_e F₂ = nΛ − R`.
#[derive(Debug, Clone)]
pub struct SolitonQuadratic {
    pub radial_coeff: f64,
    pub mixed_coeffs: Matrix3<f64>,
    pub hessian: Matrix4<f64>,
}

impl SolitonQuadratic {
    pub fn value_at(&self, x: Vector4<f64>) -> f64 {
        (x.transpose() * self.hessian * x)[(0, 0)] / 2.0
    }

    pub fn laplacian(&self) -> f64 {
        self.hessian.trace()
    }
}

pub fn soliton_quadratic(d: &SolitonPointData) -> SolitonQuadratic {
    let n = 4.0;
    let radial = d.lambda / 2.0 - d.scal / (2.0 * n);
    let f = d.f_hess_coeffs.unwrap_or_else(Matrix3::zeros);
    let plus = omega_basis(Orientation::Plus);
    let minus = omega_basis(Orientation::Minus);
    let mut hess = Matrix4::identity() * (d.lambda - d.scal / n);
    for i in 0..3 {
        for j in 0..3 {
            if f[(i, j)] != 0.0 {
                let prod = compose(&plus[i], &minus[j]).expect("mixed-duality composition");
                hess += prod.matrix() * f[(i, j)];
            }
        }
    }
    SolitonQuadratic {
        radial_coeff: radial,
        mixed_coeffs: f,
        hessian: hess,
    }
}

// ---------------------------------------------------------------------------
// Obstruction pairing.
// ---------------------------------------------------------------------------

/// Bianchi-gauge quadratic term of an Einstein metric with prescribed
/// selfdual curvature block at the point: the normal-coordinates quadratic
/// `−⅓ R_{ikjl} x^k x^l` of the curvature tensor reassembled from blocks
/// `(R⁺, (tr R⁺/3)·Id, 0)`, plus the curvature-neutral gauge correction
/// `−(2Λ/9)(x⊗x + ½|x|²e)` that restores `B_e H₂ = 0` (Λ = tr R⁺).
pub fn quadratic_term_for(rplus: &Matrix3<f64>) -> impl Fn(Vector4<f64>) -> Matrix4<f64> {
    let lambda = rplus.trace();
    let blocks = CurvBlocks {
        rplus: *rplus,
        rminus: Matrix3::identity() * (lambda / 3.0),
        ric_mixed: Matrix3::zeros(),
        scal: 4.0 * lambda,
        wplus: *rplus - Matrix3::identity() * (lambda / 3.0),
        wminus: Matrix3::zeros(),
    };
    let riem = reassemble_curvature(&blocks, Orientation::Plus);
    move |x: Vector4<f64>| {
        let mut h = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let mut v = 0.0;
                for k in 0..4 {
                    for l in 0..4 {
                        v += riem.comps[i][k][j][l] * x[k] * x[l];
                    }
                }
                h[(i, j)] = -v / 3.0;
            }
        }
        h - (x * x.transpose() + Matrix4::identity() * (0.5 * x.norm_squared()))
            * (2.0 * lambda / 9.0)
    }
}

/// The boundary fields `ζᵢ⁺∘ρ_x(ζ⁺)` on the unit sphere, with `ζᵢ⁺` the forms
/// of the ζ-adapted frame. Pairing these against the quadratic term reads the
/// projection coefficients off index-aligned: the quarter-turn that relates
/// them to the literal r⁻⁴ asymptotics of the `oᵢ(ζ)` cancels against the
/// same twist in the deformation family.
fn o_leading_fields(z: &ZetaParam) -> impl Fn(Vector4<f64>) -> [Matrix4<f64>; 3] {
    let frame = z.frame();
    let zeta = z.zeta();
    let n = z.norm();
    let col = |k: usize| {
        let c = frame.column(k) * n;
        zeta_plus([c[0], c[1], c[2]])
    };
    let paired = [col(0), col(1), col(2)];
    let zarr = [zeta[0], zeta[1], zeta[2]];
    move |x: Vector4<f64>| {
        let rho = RhoRotation::new(x).expect("nonzero sphere point");
        let rz = rho.apply(&zeta_plus(zarr));
        [
            (paired[0].matrix() * rz.matrix()),
            (paired[1].matrix() * rz.matrix()),
            (paired[2].matrix() * rz.matrix()),
        ]
    }
}

/// Gauss–Legendre nodes and weights on [0,1] (12 points), enough to integrate
/// the low-degree trigonometric integrands of the boundary pairing exactly to
/// machine precision.
fn gauss12() -> ([f64; 12], [f64; 12]) {
    // Nodes/weights on [-1,1].
    const X: [f64; 6] = [
        0.125_233_408_511_469,
        0.367_831_498_998_180,
        0.587_317_954_286_617,
        0.769_902_674_194_305,
        0.904_117_256_370_475,
        0.981_560_634_246_719,
    ];
    const W: [f64; 6] = [
        0.249_147_045_813_403,
        0.233_492_536_538_355,
        0.203_167_426_723_066,
        0.160_078_328_543_346,
        0.106_939_325_995_318,
        0.047_175_336_386_512,
    ];
    let mut xs = [0.0; 12];
    let mut ws = [0.0; 12];
    for i in 0..6 {
        xs[i] = 0.5 * (1.0 - X[5 - i]);
        xs[11 - i] = 0.5 * (1.0 + X[5 - i]);
        ws[i] = 0.5 * W[5 - i];
        ws[11 - i] = 0.5 * W[5 - i];
    }
    (xs, ws)
}

/// Integrate a smooth ℝ³-valued function over the unit S³ with a
/// tensor-product Gauss–Legendre rule in hyperspherical coordinates.
fn sphere_integral3<F: Fn(Vector4<f64>) -> [f64; 3]>(f: F) -> [f64; 3] {
    use std::f64::consts::PI;
    let (xs, ws) = gauss12();
    let mut total = [0.0; 3];
    for (i, &xi) in xs.iter().enumerate() {
        let psi1 = PI * xi;
        let (s1, c1) = psi1.sin_cos();
        for (j, &xj) in xs.iter().enumerate() {
            let psi2 = PI * xj;
            let (s2, c2) = psi2.sin_cos();
            for (k, &xk) in xs.iter().enumerate() {
                let psi3 = 2.0 * PI * xk;
                let (s3, c3) = psi3.sin_cos();
                let x = Vector4::new(c1, s1 * c2, s1 * s2 * c3, s1 * s2 * s3);
                let meas = s1 * s1 * s2 * (PI * PI * 2.0 * PI);
                let w = ws[i] * ws[j] * ws[k] * meas;
                let v = f(x);
                for (t, vi) in total.iter_mut().zip(v) {
                    *t += w * vi;
                }
            }
        }
    }
    total
}

fn raw_pairing(rplus: &Matrix3<f64>, z: &ZetaParam) -> [f64; 3] {
    let h2 = quadratic_term_for(rplus);
    let o4 = o_leading_fields(z);
    sphere_integral3(|x| {
        let h = h2(x);
        let o = o4(x);
        [
            o[0].component_mul(&h).sum(),
            o[1].component_mul(&h).sum(),
            o[2].component_mul(&h).sum(),
        ]
    })
}

fn calibration() -> f64 {
    static CAL: OnceLock<f64> = OnceLock::new();
    *CAL.get_or_init(|| {
        let z = ZetaParam::new([1.0, 0.0, 0.0]).expect("unit zeta");
        raw_pairing(&Matrix3::identity(), &z)[0]
    })
}

/// Projection coefficients `λ` of the linearized Einstein deviation
/// `dRic(h₂) − Λ·eh_ζ` onto the deformation basis `(oᵢ(ζ))`, via the
/// boundary quadrature `∫_{S³} ⟨Oᵢ⁴, H₂⟩ dσ`. Calibrated once so that
/// `R⁺ = Id, ζ = (1,0,0)` gives `λ = (−1, 0, 0)`; thereafter
/// `λᵢ = −R⁺_{1i}` in the ζ-adapted frame.
pub fn obstruction_pairing(rplus: &Matrix3<f64>, z: &ZetaParam) -> [f64; 3] {
    let q = raw_pairing(rplus, z);
    let c = calibration() * z.norm() * z.norm();
    [-q[0] / c, -q[1] / c, -q[2] / c]
}

/// The bubble-parameter generator induced by the pairing: `ζ̇ = −2 Σ λᵢ ζᵢ`
/// where `ζᵢ = |ζ|·(i-th adapted frame vector)`. Equals `2R⁺ζ`.
pub fn pairing_generator(rplus: &Matrix3<f64>, z: &ZetaParam) -> Vector3<f64> {
    let lam = obstruction_pairing(rplus, z);
    let f = z.frame();
    let mut v = Vector3::zeros();
    for i in 0..3 {
        v += f.column(i) * (lam[i] * z.norm());
    }
    -2.0 * v
}

/// Sign and calibrated value of the isotropic obstruction: for a constant
/// curvature orbifold (`R⁺ = (Λ/3)·Id`) the deviation projects onto `o₁` with
/// coefficient `−Λ/3`, i.e. `dRic(h₂) − Λg = −(Λ/3)·o₁`; bubbles grow at
/// spherical points (Λ > 0) and shrink at hyperbolic ones.
pub const EH_ISOTROPIC_OBSTRUCTION: f64 = 1.0 / 3.0;

// ---------------------------------------------------------------------------
// Builtin model registry.
// ---------------------------------------------------------------------------

/// Closed-form registry entries: model name, point data, expected verdict.
pub fn builtin_models() -> Vec<(&'static str, SolitonPointData, VerdictKind)> {
    let id = Matrix3::identity();
    let d3 = |a: f64, b: f64, c: f64| Matrix3::from_diagonal(&Vector3::new(a, b, c));
    vec![
        (
            "spherical",
            SolitonPointData {
                lambda: 3.0,
                scal: 12.0,
                rplus: id,
                f_hess_coeffs: None,
            },
            VerdictKind::StrictlyUnstable,
        ),
        (
            "hyperbolic",
            SolitonPointData {
                lambda: -3.0,
                scal: -12.0,
                rplus: -id,
                f_hess_coeffs: None,
            },
            VerdictKind::StrictlyStable,
        ),
        (
            // Complex hyperbolic in the orientation opposite to the Kähler
            // one, where the metric is selfdual: R⁺ = (Λ/3)·Id.
            "complex-hyperbolic",
            SolitonPointData {
                lambda: -3.0,
                scal: -12.0,
                rplus: -id,
                f_hess_coeffs: None,
            },
            VerdictKind::StrictlyStable,
        ),
        (
            "gaussian-shrinker",
            SolitonPointData {
                lambda: 0.5,
                scal: 0.0,
                rplus: Matrix3::zeros(),
                f_hess_coeffs: None,
            },
            VerdictKind::StrictlyUnstable,
        ),
        (
            "gaussian-expander",
            SolitonPointData {
                lambda: -0.5,
                scal: 0.0,
                rplus: Matrix3::zeros(),
                f_hess_coeffs: None,
            },
            VerdictKind::StrictlyStable,
        ),
        (
            "cylinder-r-s3",
            SolitonPointData {
                lambda: 2.0,
                scal: 6.0,
                rplus: id * 0.5,
                f_hess_coeffs: Some(d3(0.5, 0.5, -0.5)),
            },
            VerdictKind::StrictlyUnstable,
        ),
        (
            "cylinder-r2-s2",
            SolitonPointData {
                lambda: 1.0,
                scal: 2.0,
                rplus: d3(0.5, 0.0, 0.0),
                f_hess_coeffs: Some(d3(0.5, 0.0, 0.0)),
            },
            VerdictKind::StrictlyUnstable,
        ),
        (
            "cylinder-r-h3",
            SolitonPointData {
                lambda: -2.0,
                scal: -6.0,
                rplus: id * -0.5,
                f_hess_coeffs: Some(d3(-0.5, -0.5, 0.5)),
            },
            VerdictKind::StrictlyStable,
        ),
        (
            "cylinder-r2-h2",
            SolitonPointData {
                lambda: -1.0,
                scal: -2.0,
                rplus: d3(-0.5, 0.0, 0.0),
                f_hess_coeffs: Some(d3(-0.5, 0.0, 0.0)),
            },
            VerdictKind::StrictlyStable,
        ),
        (
            "flat",
            SolitonPointData {
                lambda: 0.0,
                scal: 0.0,
                rplus: Matrix3::zeros(),
                f_hess_coeffs: None,
            },
            VerdictKind::Marginal,
        ),
    ]
}

pub fn lookup_model(name: &str) -> Result<SolitonPointData, StabilityError> {
    builtin_models()
        .into_iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, d, _)| d)
        .ok_or_else(|| StabilityError::UnknownModel(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_symmetric(rng: &mut StdRng, scale: f64) -> Matrix3<f64> {
        let mut m = Matrix3::zeros();
        for i in 0..3 {
            for j in i..3 {
                let v = rng.gen_range(-scale..scale);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    #[test]
    fn weighted_rplus_examples() {
        let sph = lookup_model("spherical").unwrap();
        assert!((weighted_rplus(&sph) - Matrix3::identity()).abs().max() < 1e-14);
        let hyp = lookup_model("hyperbolic").unwrap();
        assert!((weighted_rplus(&hyp) + Matrix3::identity()).abs().max() < 1e-14);
        // Einstein input (R = 4Λ) leaves R⁺ unchanged.
        let d = SolitonPointData {
            lambda: 1.7,
            scal: 6.8,
            rplus: Matrix3::new(0.3, 0.1, 0.0, 0.1, -0.2, 0.4, 0.0, 0.4, 0.9),
            f_hess_coeffs: None,
        };
        assert!((weighted_rplus(&d) - d.rplus).abs().max() < 1e-14);
    }

    #[test]
    fn weighted_rplus_is_affine_in_lambda_and_scal() {
        let base = SolitonPointData {
            lambda: 0.4,
            scal: 1.2,
            rplus: Matrix3::identity() * 0.1,
            f_hess_coeffs: None,
        };
        let mut d1 = base.clone();
        d1.lambda += 1.0;
        let slope_l = weighted_rplus(&d1) - weighted_rplus(&base);
        assert!((slope_l - Matrix3::identity()).abs().max() < 1e-13);
        let mut d2 = base.clone();
        d2.scal += 1.0;
        let slope_r = weighted_rplus(&d2) - weighted_rplus(&base);
        assert!((slope_r + Matrix3::identity() * 0.25).abs().max() < 1e-13);
    }

    #[test]
    fn gaussian_solitons() {
        let shr = lookup_model("gaussian-shrinker").unwrap();
        assert_eq!(classify(&shr).kind, VerdictKind::StrictlyUnstable);
        let exp = lookup_model("gaussian-expander").unwrap();
        assert_eq!(classify(&exp).kind, VerdictKind::StrictlyStable);
    }

    #[test]
    fn registry_matches_expected_verdicts() {
        for (name, data, expect) in builtin_models() {
            assert_eq!(classify(&data).kind, expect, "model {name}");
        }
    }

    #[test]
    fn flat_is_marginal() {
        let flat = lookup_model("flat").unwrap();
        let v = classify(&flat);
        assert_eq!(v.kind, VerdictKind::Marginal);
        assert!(v.eigenvalues.iter().all(|e| e.abs() < 1e-14));
    }

    #[test]
    fn classify_rotation_invariant() {
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..200 {
            let d = SolitonPointData {
                lambda: rng.gen_range(-2.0..2.0),
                scal: rng.gen_range(-8.0..8.0),
                rplus: random_symmetric(&mut rng, 2.0),
                f_hess_coeffs: None,
            };
            // Random rotation from QR-like construction.
            let axis = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let rot = nalgebra::Rotation3::new(axis).matrix().clone_owned();
            let mut dr = d.clone();
            dr.rplus = rot * d.rplus * rot.transpose();
            let a = classify(&d);
            let b = classify(&dr);
            assert_eq!(a.kind, b.kind);
            for k in 0..3 {
                assert!((a.eigenvalues[k] - b.eigenvalues[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn soliton_quadratic_einstein_case() {
        let d = SolitonPointData {
            lambda: 3.0,
            scal: 12.0,
            rplus: Matrix3::identity(),
            f_hess_coeffs: None,
        };
        let q = soliton_quadratic(&d);
        assert_eq!(q.radial_coeff, 0.0);
        assert!(q.hessian.abs().max() < 1e-14);
    }

    #[test]
    fn soliton_quadratic_mixed_term() {
        let mut f = Matrix3::zeros();
        f[(0, 0)] = 1.0;
        let d = SolitonPointData {
            lambda: 0.0,
            scal: 0.0,
            rplus: Matrix3::zeros(),
            f_hess_coeffs: Some(f),
        };
        let q = soliton_quadratic(&d);
        let expect = Matrix4::from_diagonal(&Vector4::new(-1.0, -1.0, 1.0, 1.0));
        assert!((q.hessian - expect).abs().max() < 1e-14);
        assert!(q.laplacian().abs() < 1e-14);
    }

    #[test]
    fn soliton_quadratic_laplacian_identity() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..10 {
            let d = SolitonPointData {
                lambda: rng.gen_range(-2.0..2.0),
                scal: rng.gen_range(-8.0..8.0),
                rplus: Matrix3::zeros(),
                f_hess_coeffs: Some(random_symmetric(&mut rng, 1.0)),
            };
            let q = soliton_quadratic(&d);
            assert!((q.laplacian() - (4.0 * d.lambda - d.scal)).abs() < 1e-12);
            // F₂(x) gradient at 0 vanishes and value is quadratic: spot check
            // the quadratic-form consistency.
            let x = Vector4::new(0.3, -0.7, 0.2, 0.9);
            let v = q.value_at(x);
            let radial = q.radial_coeff * x.norm_squared();
            let mixed = v - radial;
            // Mixed part is traceless quadratic: evaluating on an orthogonal
            // rotation of x that flips two axes changes sign structure but we
            // only assert finiteness and the Laplacian identity here.
            assert!(mixed.is_finite());
        }
    }

    /// Linearized curvature at 0 of `e + H₂` for a quadratic H₂: at the
    /// origin the Christoffel terms vanish and, in the sign convention of
    /// this crate (round sphere has `R_{ijij} = +1`),
    /// `R_{ijkl} = −½(∂ᵢ∂ₖ h_{jl} + ∂ⱼ∂ₗ h_{ik} − ∂ᵢ∂ₗ h_{jk} − ∂ⱼ∂ₖ h_{il})`
    /// holds exactly. Second derivatives by central differences.
    fn curvature_of_quadratic<F: Fn(Vector4<f64>) -> Matrix4<f64>>(h2: F) -> crate::Riemann4 {
        let h = 1e-3;
        let dd = |i: usize, j: usize, a: usize, b: usize| {
            let mut xi = Vector4::zeros();
            xi[i] = h;
            let mut xj = Vector4::zeros();
            xj[j] = h;
            (h2(xi + xj)[(a, b)] - h2(xi - xj)[(a, b)] - h2(-xi + xj)[(a, b)]
                + h2(-xi - xj)[(a, b)])
                / (4.0 * h * h)
        };
        let mut r = crate::Riemann4::zero();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        r.comps[i][j][k][l] = -0.5
                            * (dd(i, k, j, l) + dd(j, l, i, k) - dd(i, l, j, k) - dd(j, k, i, l));
                    }
                }
            }
        }
        r
    }

    #[test]
    fn quadratic_term_has_prescribed_curvature() {
        use crate::frame4::decompose_curvature;
        // Spherical case first: H₂(Id) must give constant curvature 1.
        let h2 = quadratic_term_for(&Matrix3::identity());
        let r = curvature_of_quadratic(h2);
        let cc = crate::Riemann4::constant_curvature(1.0);
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        assert!(
                            (r.comps[i][j][k][l] - cc.comps[i][j][k][l]).abs() < 1e-8,
                            "[{i}{j}{k}{l}] {} vs {}",
                            r.comps[i][j][k][l],
                            cc.comps[i][j][k][l]
                        );
                    }
                }
            }
        }
        // Random selfdual blocks round-trip through the quadratic term.
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..5 {
            let rp = random_symmetric(&mut rng, 1.0);
            let r = curvature_of_quadratic(quadratic_term_for(&rp));
            let blocks = decompose_curvature(&r, Orientation::Plus).unwrap();
            assert!((blocks.rplus - rp).abs().max() < 1e-7, "{:?}", blocks.rplus - rp);
        }
    }

    #[test]
    fn quadratic_term_is_bianchi_gauged() {
        // B_e(H₂) = div H₂ − ½ d tr H₂ must vanish; for quadratic H₂ both
        // terms are linear in x, so test at a few points with central FD.
        let mut rng = StdRng::seed_from_u64(11);
        let rp = random_symmetric(&mut rng, 1.0);
        let h2 = quadratic_term_for(&rp);
        let h = 1e-4;
        let x0 = Vector4::new(0.21, -0.63, 0.44, 0.11);
        for j in 0..4 {
            let mut bj = 0.0;
            for i in 0..4 {
                let mut e = Vector4::zeros();
                e[i] = h;
                let d = (h2(x0 + e)[(i, j)] - h2(x0 - e)[(i, j)]) / (2.0 * h);
                bj += d;
            }
            let mut ej = Vector4::zeros();
            ej[j] = h;
            let dtr = (h2(x0 + ej).trace() - h2(x0 - ej).trace()) / (2.0 * h);
            bj -= 0.5 * dtr;
            assert!(bj.abs() < 1e-8, "B_{j} = {bj}");
        }
    }

    #[test]
    fn pairing_isotropic_calibration() {
        let z = ZetaParam::new([1.0, 0.0, 0.0]).unwrap();
        let lam = obstruction_pairing(&Matrix3::identity(), &z);
        assert!((lam[0] + 1.0).abs() < 1e-10);
        assert!(lam[1].abs() < 1e-10);
        assert!(lam[2].abs() < 1e-10);
        let lam_neg = obstruction_pairing(&(-Matrix3::identity()), &z);
        assert!((lam_neg[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pairing_reads_off_rplus_row() {
        let mut rng = StdRng::seed_from_u64(2024);
        for trial in 0..20 {
            let rp = random_symmetric(&mut rng, 1.5);
            let zv = [
                rng.gen_range(-1.0..1.0f64),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            if zv.iter().map(|v| v * v).sum::<f64>() < 1e-2 {
                continue;
            }
            let z = ZetaParam::new(zv).unwrap();
            let lam = obstruction_pairing(&rp, &z);
            let f = z.frame();
            let adapted = f.transpose() * rp * f;
            for i in 0..3 {
                assert!(
                    (lam[i] + adapted[(0, i)]).abs() < 1e-3,
                    "trial {trial} λ_{} = {} vs −R⁺₁ᵢ = {}",
                    i + 1,
                    lam[i],
                    -adapted[(0, i)]
                );
            }
        }
    }

    #[test]
    fn pairing_off_diagonal_entry() {
        let mut rp = Matrix3::from_diagonal(&Vector3::new(0.3, -0.4, 0.9));
        rp[(0, 1)] = 0.65;
        rp[(1, 0)] = 0.65;
        let z = ZetaParam::new([1.0, 0.0, 0.0]).unwrap();
        let lam = obstruction_pairing(&rp, &z);
        assert!((lam[1] + 0.65).abs() < 1e-3, "λ₂ = {}", lam[1]);
    }

    #[test]
    fn pairing_normalized_coefficients_scale_invariant() {
        let rp = Matrix3::new(0.2, 0.4, -0.1, 0.4, -0.6, 0.3, -0.1, 0.3, 0.8);
        let z1 = ZetaParam::new([0.3, -0.5, 0.2]).unwrap();
        let z2 = ZetaParam::new([1.5, -2.5, 1.0]).unwrap();
        let a = obstruction_pairing(&rp, &z1);
        let b = obstruction_pairing(&rp, &z2);
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < 1e-6, "λ_{}: {} vs {}", i + 1, a[i], b[i]);
        }
    }

    #[test]
    fn pairing_generator_is_twice_rplus() {
        let mut rng = StdRng::seed_from_u64(99);
        for _ in 0..5 {
            let rp = random_symmetric(&mut rng, 1.0);
            let zv = [0.7, -0.3, 0.5];
            let z = ZetaParam::new(zv).unwrap();
            let gen = pairing_generator(&rp, &z);
            let expect = 2.0 * rp * z.zeta();
            let scale = expect.norm().max(1.0);
            assert!((gen - expect).norm() < 1e-3 * scale, "{gen} vs {expect}");
        }
    }

    #[test]
    fn unknown_model_rejected() {
        assert!(lookup_model("bryant-steady").is_err());
    }
}
