//! Cohomogeneity-one (triaxial, Bianchi-IX type) metrics over S³/Γ and their
//! curvature.
//!
//! A metric `g = a₀(r)²dr² + Σᵢ aᵢ(r)²αᵢ²` is stored through four radial
//! profiles. The invariant coframe `(a₀ dr, a₁α₁, a₂α₂, a₃α₃)` satisfies
//! `dαᵢ = 2αⱼ∧αₖ`, and curvature is evaluated from the structure equations of
//! that coframe. An independent finite-difference oracle computes the same
//! curvature from Christoffel symbols in an Euler-angle coordinate chart.

use crate::frame4::Riemann4;
use nalgebra::{Matrix3, Matrix4};
use std::sync::Arc;

/// Tolerance for the algebraic curvature symmetries of evaluated curvature.
pub const CURV_SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum CohomError {
    #[error("radius {r} outside profile domain ({lo}, {hi})")]
    OutOfDomain { r: f64, lo: f64, hi: f64 },
    #[error("profile a{index} is not positive at r = {r} (value {value})")]
    NonPositiveProfile { index: usize, r: f64, value: f64 },
    #[error("finite-difference step underflow at r = {0}")]
    StepUnderflow(f64),
    #[error("grid too coarse: {0} points, need at least {1}")]
    GridTooCoarse(usize, usize),
}

type ProfileFn = dyn Fn(f64) -> (f64, f64, f64) + Send + Sync;

/// A radial profile carrying its value and first two derivatives.
#[derive(Clone)]
pub struct RadialProfile {
    eval: Arc<ProfileFn>,
    lo: f64,
    hi: f64,
}

impl std::fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RadialProfile({}, {})", self.lo, self.hi)
    }
}

impl RadialProfile {
    pub fn new<F>(lo: f64, hi: f64, eval: F) -> Self
    where
        F: Fn(f64) -> (f64, f64, f64) + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            lo,
            hi,
        }
    }

    pub fn constant(lo: f64, hi: f64, c: f64) -> Self {
        Self::new(lo, hi, move |_| (c, 0.0, 0.0))
    }

    /// The profile `r ↦ c·r`.
    pub fn linear(lo: f64, hi: f64, c: f64) -> Self {
        Self::new(lo, hi, move |r| (c * r, c, 0.0))
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn contains(&self, r: f64) -> bool {
        r > self.lo && r < self.hi
    }

    /// Value and first two derivatives at `r`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64, f64), CohomError> {
        if !self.contains(r) {
            return Err(CohomError::OutOfDomain {
                r,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok((self.eval)(r))
    }
}

/// Pointwise curvature data in the orthonormal coframe
/// `(a₀ dr, a₁α₁, a₂α₂, a₃α₃)`.
#[derive(Debug, Clone)]
pub struct PointCurvature {
    pub riem: Riemann4,
    pub ricci: Matrix4<f64>,
    pub scal: f64,
}

/// Metric `a₀²dr² + Σ aᵢ²αᵢ²` over S³/Γ with an optional rotation of the
/// invariant frame `(α₁,α₂,α₃)` relative to a fixed reference frame.
#[derive(Debug, Clone)]
pub struct TriaxialMetric {
    pub a0: RadialProfile,
    pub a1: RadialProfile,
    pub a2: RadialProfile,
    pub a3: RadialProfile,
    pub group_order: u32,
    pub frame_rotation: Matrix3<f64>,
}

/// Profile values and derivatives at one radius.
#[derive(Debug, Clone, Copy)]
pub struct ProfilePoint {
    pub a: [f64; 4],
    pub da: [f64; 4],
    pub dda: [f64; 4],
}

/// Connection data of the invariant orthonormal frame at one radius: the
/// commutator coefficients `C_abc = ⟨[e_a,e_b], e_c⟩`, the connection
/// coefficients `Γ_abc = ⟨∇_{e_a}e_b, e_c⟩` and their radial derivatives.
#[derive(Debug, Clone)]
pub struct FrameConnection {
    pub a: [f64; 4],
    pub c: [[[f64; 4]; 4]; 4],
    pub gamma: [[[f64; 4]; 4]; 4],
    pub dgamma: [[[f64; 4]; 4]; 4],
}

const CYCLIC: [(usize, usize, usize); 3] = [(1, 2, 3), (2, 3, 1), (3, 1, 2)];

impl TriaxialMetric {
    pub fn new(
        a0: RadialProfile,
        a1: RadialProfile,
        a2: RadialProfile,
        a3: RadialProfile,
        group_order: u32,
    ) -> Self {
        Self {
            a0,
            a1,
            a2,
            a3,
            group_order,
            frame_rotation: Matrix3::identity(),
        }
    }

    pub fn with_frame_rotation(mut self, rot: Matrix3<f64>) -> Self {
        self.frame_rotation = rot;
        self
    }

    pub fn domain(&self) -> (f64, f64) {
        let lo = self
            .a0
            .domain()
            .0
            .max(self.a1.domain().0)
            .max(self.a2.domain().0)
            .max(self.a3.domain().0);
        let hi = self
            .a0
            .domain()
            .1
            .min(self.a1.domain().1)
            .min(self.a2.domain().1)
            .min(self.a3.domain().1);
        (lo, hi)
    }

    pub fn profiles_at(&self, r: f64) -> Result<ProfilePoint, CohomError> {
        let evals = [
            self.a0.eval(r)?,
            self.a1.eval(r)?,
            self.a2.eval(r)?,
            self.a3.eval(r)?,
        ];
        let mut p = ProfilePoint {
            a: [0.0; 4],
            da: [0.0; 4],
            dda: [0.0; 4],
        };
        for (i, (v, dv, ddv)) in evals.into_iter().enumerate() {
            if v <= 0.0 {
                return Err(CohomError::NonPositiveProfile {
                    index: i,
                    r,
                    value: v,
                });
            }
            p.a[i] = v;
            p.da[i] = dv;
            p.dda[i] = ddv;
        }
        Ok(p)
    }

    /// Riemannian measure of the invariant slice: `a₀a₁a₂a₃ · 2π²/|Γ|`, so that
    /// `∫ f(r) · volume_density(r) dr` integrates the radial function f over
    /// the whole space.
    pub fn volume_density(&self, r: f64) -> Result<f64, CohomError> {
        let p = self.profiles_at(r)?;
        Ok(p.a[0] * p.a[1] * p.a[2] * p.a[3] * 2.0 * std::f64::consts::PI.powi(2)
            / self.group_order as f64)
    }

    /// Connection of the orthonormal frame `e₀ = ∂_r/a₀`, `eᵢ = Yᵢ/aᵢ` where
    /// `[Yᵢ, Yⱼ] = −2Yₖ`: commutators are
    /// `[e₀, eᵢ] = −(aᵢ'/(a₀aᵢ)) eᵢ` and `[eᵢ, eⱼ] = −(2aₖ/(aᵢaⱼ)) eₖ`.
    pub fn connection_at(&self, r: f64) -> Result<FrameConnection, CohomError> {
        let p = self.profiles_at(r)?;
        let mut c = [[[0.0; 4]; 4]; 4];
        let mut dc = [[[0.0; 4]; 4]; 4];
        let a = p.a;
        let da = p.da;
        let dda = p.dda;
        for i in 1..4 {
            // k_i = a_i'/(a₀ a_i)
            let k = da[i] / (a[0] * a[i]);
            let dk = dda[i] / (a[0] * a[i])
                - da[i] * (da[0] * a[i] + a[0] * da[i]) / (a[0] * a[i]).powi(2);
            c[0][i][i] = -k;
            c[i][0][i] = k;
            dc[0][i][i] = -dk;
            dc[i][0][i] = dk;
        }
        for &(i, j, k) in &CYCLIC {
            // m_k = 2a_k/(a_i a_j)
            let m = 2.0 * a[k] / (a[i] * a[j]);
            let dm = 2.0 * da[k] / (a[i] * a[j])
                - 2.0 * a[k] * (da[i] * a[j] + a[i] * da[j]) / (a[i] * a[j]).powi(2);
            c[i][j][k] = -m;
            c[j][i][k] = m;
            dc[i][j][k] = -dm;
            dc[j][i][k] = dm;
        }
        // Koszul in an orthonormal frame: Γ_abc = ½(C_abc − C_acb − C_bca).
        let mut gamma = [[[0.0; 4]; 4]; 4];
        let mut dgamma = [[[0.0; 4]; 4]; 4];
        for a_ in 0..4 {
            for b in 0..4 {
                for cc in 0..4 {
                    gamma[a_][b][cc] = 0.5 * (c[a_][b][cc] - c[a_][cc][b] - c[b][cc][a_]);
                    dgamma[a_][b][cc] = 0.5 * (dc[a_][b][cc] - dc[a_][cc][b] - dc[b][cc][a_]);
                }
            }
        }
        Ok(FrameConnection {
            a,
            c,
            gamma,
            dgamma,
        })
    }

    /// Curvature at radius `r` from the structure equations of the coframe.
    pub fn curvature_at(&self, r: f64) -> Result<PointCurvature, CohomError> {
        let con = self.connection_at(r)?;
        let g = &con.gamma;
        let dg = &con.dgamma;
        let a0 = con.a[0];
        let mut riem = Riemann4::zero();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        // ⟨R(e_a,e_b)e_c, e_d⟩ with R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y].
                        let mut v = 0.0;
                        if a == 0 {
                            v += dg[b][c][d] / a0;
                        }
                        if b == 0 {
                            v -= dg[a][c][d] / a0;
                        }
                        for e in 0..4 {
                            v += g[b][c][e] * g[a][e][d] - g[a][c][e] * g[b][e][d];
                            v -= con.c[a][b][e] * g[e][c][d];
                        }
                        // Sign flip puts the round sphere at R_{ijij} = +1.
                        riem.comps[a][b][c][d] = -v;
                    }
                }
            }
        }
        let ricci = riem.ricci();
        let scal = ricci.trace();
        Ok(PointCurvature { riem, ricci, scal })
    }

    /// Hessian (in the orthonormal coframe) of a radial function given by
    /// `(f, f', f'')` at radius `r`; only the frame-diagonal entries survive.
    pub fn radial_hessian(&self, r: f64, df: f64, ddf: f64) -> Result<Matrix4<f64>, CohomError> {
        let p = self.profiles_at(r)?;
        let mut h = Matrix4::zeros();
        h[(0, 0)] = (ddf * p.a[0] - df * p.da[0]) / p.a[0].powi(3);
        for i in 1..4 {
            h[(i, i)] = p.da[i] * df / (p.a[i] * p.a[0].powi(2));
        }
        Ok(h)
    }

    /// Laplacian of a radial function: trace of [`Self::radial_hessian`].
    pub fn radial_laplacian(&self, r: f64, df: f64, ddf: f64) -> Result<f64, CohomError> {
        Ok(self.radial_hessian(r, df, ddf)?.trace())
    }

    /// Covariant derivative `(∇H)_{cab}` of an invariant symmetric 2-tensor
    /// with frame components `h(r)` and radial derivative `dh(r)`.
    pub fn nabla_invariant(
        con: &FrameConnection,
        h: &Matrix4<f64>,
        dh: &Matrix4<f64>,
    ) -> [[[f64; 4]; 4]; 4] {
        let mut out = [[[0.0; 4]; 4]; 4];
        for c in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    let mut v = 0.0;
                    if c == 0 {
                        v += dh[(a, b)] / con.a[0];
                    }
                    for d in 0..4 {
                        v -= con.gamma[c][a][d] * h[(d, b)] + con.gamma[c][b][d] * h[(a, d)];
                    }
                    out[c][a][b] = v;
                }
            }
        }
        out
    }

    /// Divergence `(div H)_b = Σ_a (∇H)_{aab}` of an invariant symmetric
    /// 2-tensor.
    pub fn divergence_invariant(
        &self,
        r: f64,
        h: &Matrix4<f64>,
        dh: &Matrix4<f64>,
    ) -> Result<[f64; 4], CohomError> {
        let con = self.connection_at(r)?;
        let nh = Self::nabla_invariant(&con, h, dh);
        let mut div = [0.0; 4];
        for b in 0..4 {
            for a in 0..4 {
                div[b] += nh[a][a][b];
            }
        }
        Ok(div)
    }

    /// Rough Laplacian `(ΔH)_{ab} = Σ_c (∇²H)_{ccab}` of an invariant
    /// symmetric 2-tensor given with two radial derivatives.
    pub fn rough_laplacian_invariant(
        &self,
        r: f64,
        h: &Matrix4<f64>,
        dh: &Matrix4<f64>,
        ddh: &Matrix4<f64>,
    ) -> Result<Matrix4<f64>, CohomError> {
        let con = self.connection_at(r)?;
        let a0 = con.a[0];
        let da0 = {
            let p = self.profiles_at(r)?;
            p.da[0]
        };
        let nh = Self::nabla_invariant(&con, h, dh);
        // Radial derivative of (∇H)_{cab}.
        let mut dnh = [[[0.0; 4]; 4]; 4];
        for c in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    let mut v = 0.0;
                    if c == 0 {
                        v += ddh[(a, b)] / a0 - dh[(a, b)] * da0 / (a0 * a0);
                    }
                    for d in 0..4 {
                        v -= con.dgamma[c][a][d] * h[(d, b)]
                            + con.gamma[c][a][d] * dh[(d, b)]
                            + con.dgamma[c][b][d] * h[(a, d)]
                            + con.gamma[c][b][d] * dh[(a, d)];
                    }
                    dnh[c][a][b] = v;
                }
            }
        }
        let mut lap = Matrix4::zeros();
        for a in 0..4 {
            for b in 0..4 {
                let mut v = 0.0;
                for c in 0..4 {
                    // (∇²H)_{ccab}
                    let mut w = 0.0;
                    if c == 0 {
                        w += dnh[c][a][b] / a0;
                    }
                    for e in 0..4 {
                        w -= con.gamma[c][c][e] * nh[e][a][b]
                            + con.gamma[c][a][e] * nh[c][e][b]
                            + con.gamma[c][b][e] * nh[c][a][e];
                    }
                    v += w;
                }
                lap[(a, b)] = v;
            }
        }
        Ok(lap)
    }

    /// Lichnerowicz Laplacian on an invariant symmetric 2-tensor:
    /// `Δ_L H = ΔH + 2R̊H − Ric∘H − H∘Ric` with `(R̊H)_{ab} = R_{acbd}H_{cd}`.
    pub fn lichnerowicz_invariant(
        &self,
        r: f64,
        h: &Matrix4<f64>,
        dh: &Matrix4<f64>,
        ddh: &Matrix4<f64>,
    ) -> Result<Matrix4<f64>, CohomError> {
        let lap = self.rough_laplacian_invariant(r, h, dh, ddh)?;
        let curv = self.curvature_at(r)?;
        let mut out = lap;
        for a in 0..4 {
            for b in 0..4 {
                let mut v = 0.0;
                for c in 0..4 {
                    for d in 0..4 {
                        v += curv.riem.comps[a][c][b][d] * h[(c, d)];
                    }
                }
                out[(a, b)] += 2.0 * v;
            }
        }
        out -= curv.ricci * h + h * curv.ricci;
        Ok(out)
    }
}

/// Flat cone `dr² + r²Σαᵢ²` over S³/Γ.
pub fn flat_cone(group_order: u32, r_max: f64) -> TriaxialMetric {
    TriaxialMetric::new(
        RadialProfile::constant(0.0, r_max, 1.0),
        RadialProfile::linear(0.0, r_max, 1.0),
        RadialProfile::linear(0.0, r_max, 1.0),
        RadialProfile::linear(0.0, r_max, 1.0),
        group_order,
    )
}

/// Unit round suspension `dr² + sin²r·Σαᵢ²` over S³/Γ (constant curvature +1).
pub fn round_suspension(group_order: u32) -> TriaxialMetric {
    let sine = || RadialProfile::new(0.0, std::f64::consts::PI, |r| (r.sin(), r.cos(), -r.sin()));
    TriaxialMetric::new(
        RadialProfile::constant(0.0, std::f64::consts::PI, 1.0),
        sine(),
        sine(),
        sine(),
        group_order,
    )
}

/// Hyperbolic suspension `dr² + sinh²r·Σαᵢ²` over S³/Γ (constant curvature −1).
pub fn hyperbolic_suspension(group_order: u32, r_max: f64) -> TriaxialMetric {
    let sh = move || RadialProfile::new(0.0, r_max, |r| (r.sinh(), r.cosh(), r.sinh()));
    TriaxialMetric::new(
        RadialProfile::constant(0.0, r_max, 1.0),
        sh(),
        sh(),
        sh(),
        group_order,
    )
}

// ---------------------------------------------------------------------------
// Finite-difference oracle in an Euler-angle chart.
// ---------------------------------------------------------------------------

/// Generic base point of the Euler chart, away from the singular locus
/// sin θ = 0 of the angles.
const FD_BASE: [f64; 3] = [1.047_197_551_196_597_6, 0.785_398_163_397_448_3, 0.523_598_775_598_298_8];

/// Invariant coframe in Euler angles (θ, φ, ψ):
/// σ₁ = ½(cos ψ dθ + sin ψ sin θ dφ), σ₂ = ½(sin ψ dθ − cos ψ sin θ dφ),
/// σ₃ = ½(dψ + cos θ dφ); these satisfy dσᵢ = 2σⱼ∧σₖ.
fn sigma_matrix(angles: [f64; 3]) -> Matrix3<f64> {
    let (theta, _phi, psi) = (angles[0], angles[1], angles[2]);
    Matrix3::new(
        0.5 * psi.cos(),
        0.5 * psi.sin() * theta.sin(),
        0.0,
        0.5 * psi.sin(),
        -0.5 * psi.cos() * theta.sin(),
        0.0,
        0.0,
        0.5 * theta.cos(),
        0.5,
    )
}

fn metric_components(metric: &TriaxialMetric, y: [f64; 4]) -> Result<Matrix4<f64>, CohomError> {
    let p = metric.profiles_at(y[0])?;
    let s = sigma_matrix([y[1], y[2], y[3]]);
    let mut g = Matrix4::zeros();
    g[(0, 0)] = p.a[0] * p.a[0];
    for mu in 0..3 {
        for nu in 0..3 {
            let mut v = 0.0;
            for i in 0..3 {
                v += p.a[i + 1] * p.a[i + 1] * s[(i, mu)] * s[(i, nu)];
            }
            g[(mu + 1, nu + 1)] = v;
        }
    }
    Ok(g)
}

fn five_point<F>(f: F, x: f64, h: f64) -> Result<f64, CohomError>
where
    F: Fn(f64) -> Result<f64, CohomError>,
{
    if h <= f64::EPSILON * (1.0 + x.abs()) {
        return Err(CohomError::StepUnderflow(x));
    }
    Ok((f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?) / (12.0 * h))
}

fn christoffel(metric: &TriaxialMetric, y: [f64; 4], h: f64) -> Result<[[[f64; 4]; 4]; 4], CohomError> {
    let g = metric_components(metric, y)?;
    let ginv = g.try_inverse().ok_or(CohomError::StepUnderflow(y[0]))?;
    // ∂_μ g_νρ by 5-point differences.
    let mut dg = [[[0.0; 4]; 4]; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            for rho in nu..4 {
                let d = five_point(
                    |x| {
                        let mut yy = y;
                        yy[mu] = x;
                        Ok(metric_components(metric, yy)?[(nu, rho)])
                    },
                    y[mu],
                    h,
                )?;
                dg[mu][nu][rho] = d;
                dg[mu][rho][nu] = d;
            }
        }
    }
    let mut gam = [[[0.0; 4]; 4]; 4];
    for lam in 0..4 {
        for mu in 0..4 {
            for nu in mu..4 {
                let mut v = 0.0;
                for rho in 0..4 {
                    v += ginv[(lam, rho)] * (dg[mu][rho][nu] + dg[nu][rho][mu] - dg[rho][mu][nu]);
                }
                gam[lam][mu][nu] = 0.5 * v;
                gam[lam][nu][mu] = 0.5 * v;
            }
        }
    }
    Ok(gam)
}

/// Curvature at radius `r` from Christoffel symbols computed by 5-point
/// finite differences of the metric components in the Euler-angle chart.
/// Independent referee for [`TriaxialMetric::curvature_at`].
pub fn fd_oracle(metric: &TriaxialMetric, r: f64) -> Result<PointCurvature, CohomError> {
    let (lo, hi) = metric.domain();
    // Keep the stencil inside the domain.
    let h = (1e-3 * (1.0 + r)).min(0.2 * (r - lo).min(hi - r).max(f64::EPSILON));
    if h <= 1e4 * f64::EPSILON * (1.0 + r) {
        return Err(CohomError::StepUnderflow(r));
    }
    let y0 = [r, FD_BASE[0], FD_BASE[1], FD_BASE[2]];
    let g = metric_components(metric, y0)?;

    // R^ρ_{σμν} = ∂_μ Γ^ρ_{νσ} − ∂_ν Γ^ρ_{μσ} + Γ^ρ_{μλ}Γ^λ_{νσ} − Γ^ρ_{νλ}Γ^λ_{μσ}
    let gam0 = christoffel(metric, y0, h)?;
    let mut dgam = [[[[0.0; 4]; 4]; 4]; 4]; // dgam[μ][ρ][ν][σ] = ∂_μ Γ^ρ_{νσ}
    for mu in 0..4 {
        let d = five_point_tensor(metric, y0, mu, h)?;
        dgam[mu] = d;
    }
    let mut rm = [[[[0.0; 4]; 4]; 4]; 4]; // rm[ρ][σ][μ][ν]
    for rho in 0..4 {
        for sig in 0..4 {
            for mu in 0..4 {
                for nu in 0..4 {
                    let mut v = dgam[mu][rho][nu][sig] - dgam[nu][rho][mu][sig];
                    for lam in 0..4 {
                        v += gam0[rho][mu][lam] * gam0[lam][nu][sig]
                            - gam0[rho][nu][lam] * gam0[lam][mu][sig];
                    }
                    rm[rho][sig][mu][nu] = v;
                }
            }
        }
    }
    // Lower the first index: R_{ρσμν} = g_{ρλ} R^λ_{σμν}.
    let mut rl = [[[[0.0; 4]; 4]; 4]; 4];
    for rho in 0..4 {
        for sig in 0..4 {
            for mu in 0..4 {
                for nu in 0..4 {
                    let mut v = 0.0;
                    for lam in 0..4 {
                        v += g[(rho, lam)] * rm[lam][sig][mu][nu];
                    }
                    rl[rho][sig][mu][nu] = v;
                }
            }
        }
    }
    // Orthonormal frame: E₀ = ∂_r/a₀, Eᵢ = Yᵢ/aᵢ with Y the dual of σ.
    let p = metric.profiles_at(r)?;
    let s = sigma_matrix([y0[1], y0[2], y0[3]]);
    let sinv = s.try_inverse().ok_or(CohomError::StepUnderflow(r))?;
    let mut frame = Matrix4::zeros(); // frame[(μ, a)] = E_a^μ
    frame[(0, 0)] = 1.0 / p.a[0];
    for i in 0..3 {
        for mu in 0..3 {
            frame[(mu + 1, i + 1)] = sinv[(mu, i)] / p.a[i + 1];
        }
    }
    // mine_{abcd} = ⟨R(E_a,E_b)E_c, E_d⟩ = E_a^μ E_b^ν E_c^σ E_d^ρ R_{ρσμν};
    // the final sign flip matches `curvature_at`.
    let mut riem = Riemann4::zero();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut v = 0.0;
                    for mu in 0..4 {
                        let ea = frame[(mu, a)];
                        if ea == 0.0 {
                            continue;
                        }
                        for nu in 0..4 {
                            let eb = frame[(nu, b)];
                            if eb == 0.0 {
                                continue;
                            }
                            for sig in 0..4 {
                                let ec = frame[(sig, c)];
                                if ec == 0.0 {
                                    continue;
                                }
                                for rho in 0..4 {
                                    let ed = frame[(rho, d)];
                                    if ed == 0.0 {
                                        continue;
                                    }
                                    v += ea * eb * ec * ed * rl[rho][sig][mu][nu];
                                }
                            }
                        }
                    }
                    riem.comps[a][b][c][d] = -v;
                }
            }
        }
    }
    let ricci = riem.ricci();
    let scal = ricci.trace();
    Ok(PointCurvature { riem, ricci, scal })
}

fn five_point_tensor(
    metric: &TriaxialMetric,
    y0: [f64; 4],
    mu: usize,
    h: f64,
) -> Result<[[[f64; 4]; 4]; 4], CohomError> {
    let mut out = [[[0.0; 4]; 4]; 4];
    let mut samples = Vec::with_capacity(4);
    for k in [-2.0, -1.0, 1.0, 2.0] {
        let mut y = y0;
        y[mu] += k * h;
        samples.push(christoffel(metric, y, h)?);
    }
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                out[a][b][c] = (samples[0][a][b][c] - 8.0 * samples[1][a][b][c]
                    + 8.0 * samples[2][a][b][c]
                    - samples[3][a][b][c])
                    / (12.0 * h);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame4::{decompose_curvature, Orientation};

    fn max_abs(r: &Riemann4) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        m = m.max(r.comps[i][j][k][l].abs());
                    }
                }
            }
        }
        m
    }

    #[test]
    fn flat_cone_is_flat() {
        let m = flat_cone(2, 10.0);
        for r in [0.3, 1.0, 2.7, 8.0] {
            let c = m.curvature_at(r).unwrap();
            assert!(max_abs(&c.riem) < 1e-12, "riem at {r}: {}", max_abs(&c.riem));
        }
    }

    #[test]
    fn round_suspension_unit_curvature() {
        let m = round_suspension(2);
        for r in [0.4, 1.2, 2.3] {
            let c = m.curvature_at(r).unwrap();
            assert!((c.scal - 12.0).abs() < 1e-10);
            // All sectional curvatures 1: riem equals the constant-curvature tensor.
            let cc = Riemann4::constant_curvature(1.0);
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        for l in 0..4 {
                            assert!(
                                (c.riem.comps[i][j][k][l] - cc.comps[i][j][k][l]).abs() < 1e-10
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn suspension_links_frame4_normalization() {
        let m = round_suspension(2);
        let c = m.curvature_at(0.9).unwrap();
        let b = decompose_curvature(&c.riem, Orientation::Plus).unwrap();
        assert!((b.rplus - Matrix3::identity()).abs().max() < 1e-10);
        assert!((b.rminus - Matrix3::identity()).abs().max() < 1e-10);
    }

    #[test]
    fn hyperbolic_suspension_curvature() {
        let m = hyperbolic_suspension(1, 10.0);
        let c = m.curvature_at(1.5).unwrap();
        assert!((c.scal + 12.0).abs() < 1e-10);
    }

    #[test]
    fn first_bianchi_identity() {
        let m = round_suspension(2);
        let c = m.curvature_at(1.1).unwrap();
        assert!(c.riem.max_first_bianchi_violation() < 1e-10);
    }

    #[test]
    fn curvature_symmetries() {
        let m = hyperbolic_suspension(2, 10.0);
        let c = m.curvature_at(0.8).unwrap();
        assert!(c.riem.max_pair_symmetry_violation() < CURV_SYMMETRY_TOL);
        assert!(c.riem.max_antisymmetry_violation() < CURV_SYMMETRY_TOL);
    }

    #[test]
    fn volume_density_flat_cone() {
        let m = flat_cone(2, 10.0);
        let v = m.volume_density(1.0).unwrap();
        assert!((v - std::f64::consts::PI.powi(2)).abs() < 1e-12);
        let m1 = flat_cone(1, 10.0);
        let v1 = m1.volume_density(1.0).unwrap();
        assert!((v1 - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn out_of_domain_rejected() {
        let m = round_suspension(2);
        assert!(m.curvature_at(4.0).is_err());
        assert!(m.volume_density(-1.0).is_err());
    }

    #[test]
    fn fd_oracle_flat_cone() {
        let m = flat_cone(2, 10.0);
        let c = fd_oracle(&m, 2.0).unwrap();
        assert!(max_abs(&c.riem) < 1e-6);
    }

    #[test]
    fn fd_oracle_suspension_scalar() {
        let m = round_suspension(2);
        let c = fd_oracle(&m, 0.7).unwrap();
        assert!((c.scal - 12.0).abs() < 1e-5, "scal {}", c.scal);
    }

    #[test]
    fn fd_oracle_matches_structure_equations() {
        let m = hyperbolic_suspension(2, 10.0);
        for r in [0.6, 1.4] {
            let a = m.curvature_at(r).unwrap();
            let b = fd_oracle(&m, r).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        for l in 0..4 {
                            assert!(
                                (a.riem.comps[i][j][k][l] - b.riem.comps[i][j][k][l]).abs() < 1e-5,
                                "mismatch at {r} [{i}{j}{k}{l}]: {} vs {}",
                                a.riem.comps[i][j][k][l],
                                b.riem.comps[i][j][k][l]
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn radial_hessian_flat_r_squared() {
        // Hess(r²/2) = e on flat space.
        let m = flat_cone(1, 10.0);
        let h = m.radial_hessian(1.3, 1.3, 1.0).unwrap();
        assert!((h - Matrix4::identity()).abs().max() < 1e-12);
    }

    #[test]
    fn suspension_eigenfunction_laplacian() {
        // Δcos = −4cos on the unit suspension.
        let m = round_suspension(2);
        for r in [0.3, 1.1, 2.7] {
            let lap = m.radial_laplacian(r, -r.sin(), -r.cos()).unwrap();
            assert!((lap + 4.0 * r.cos()).abs() < 1e-10);
        }
    }
}
