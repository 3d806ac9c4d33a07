//! Bubble-parameter ODE dynamics: the exact flow `ζ(t) = exp(2tR⁺)ζ₀`, its
//! Duhamel perturbation by an inhomogeneity η, schedule validation, and the
//! normalized ↔ unnormalized time conversions.

use crate::quad;
use nalgebra::{Matrix3, Vector3};

#[derive(Debug, thiserror::Error)]
pub enum FlowError {
    #[error("parameter validation failed: {0:?}")]
    InvalidParams(Vec<String>),
    #[error("perturbation exceeds its declared bound at t = {t}: |η|e^{{∓η₀t}} = {ratio}")]
    EtaBoundExceeded { t: f64, ratio: f64 },
    #[error("time conversion requires Λ ≠ 0")]
    ZeroLambda,
    #[error("unnormalized time {that} outside the domain of Λ = {lambda} (need −2Λt̂ > 0)")]
    BadUnnormalizedTime { that: f64, lambda: f64 },
    #[error("degenerate ODE blows up at t* = {t_star}; requested {t}")]
    PastBlowUp { t: f64, t_star: f64 },
    #[error(transparent)]
    Quadrature(#[from] quad::QuadError),
}

/// Time direction of the flow: ancient solutions live on t ≤ T ≤ 0 with
/// Λ₀ > 0 (smallest eigenvalue of 2R⁺), immortal ones on t ≥ T ≥ 0 with
/// Λ₀ < 0 (largest eigenvalue of 2R⁺). The bubble size `ε₀(t) = e^{Λ₀t/2}`
/// is small in both regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Ancient,
    Immortal,
}

/// Flow schedule parameters.
#[derive(Debug, Clone, Copy)]
pub struct FlowParams {
    /// Relevant eigenvalue of 2R⁺ (sign encodes the direction).
    pub lambda0: f64,
    pub sigma: f64,
    /// Exponent δ in the gluing-radius schedule δ(t) = ε₀(t)^δ.
    pub delta_exp: f64,
    pub iota: f64,
    /// Projection decay rate η₀ (positive in both regimes).
    pub eta0: f64,
    pub direction: Direction,
}

/// Outcome of the parameter validator: every violated constraint is listed.
#[derive(Debug, Clone)]
pub struct Validation {
    pub ok: bool,
    pub violations: Vec<String>,
}

/// Check the full admissibility suite of a parameter set: σ ∈ (0, ½),
/// ι ∈ (0, 2/σ − 4), δ ∈ (5/9, (3−σ)/(5−σ)) sharpened to
/// δ < (3−(1+ι)σ)/(5−σ), the chained inequality
/// `0 < ισ < 2(η₀/Λ₀ − 1) < (5−σ)(1−δ) − 2`, a nonempty window
/// (6−10δ, 2] for the secondary projection rates, and the sign of Λ₀
/// consistent with the direction.
pub fn validate_params(p: &FlowParams) -> Validation {
    let mut v = Vec::new();
    let sigma = p.sigma;
    if !(sigma > 0.0 && sigma < 0.5) {
        v.push(format!("sigma = {} outside (0, 1/2)", sigma));
    }
    let iota_hi = 2.0 / sigma - 4.0;
    if !(p.iota > 0.0 && p.iota < iota_hi) {
        v.push(format!("iota = {} outside (0, {})", p.iota, iota_hi));
    }
    let d_lo = 5.0 / 9.0;
    let d_hi0 = (3.0 - sigma) / (5.0 - sigma);
    if !(p.delta_exp > d_lo && p.delta_exp < d_hi0) {
        v.push(format!("delta = {} outside (5/9, {d_hi0})", p.delta_exp));
    }
    let d_hi1 = (3.0 - (1.0 + p.iota) * sigma) / (5.0 - sigma);
    if !(p.delta_exp < d_hi1) {
        v.push(format!("delta = {} not below the sharpened bound {d_hi1}", p.delta_exp));
    }
    match p.direction {
        Direction::Ancient if p.lambda0 <= 0.0 => {
            v.push(format!("ancient direction needs lambda0 > 0, got {}", p.lambda0))
        }
        Direction::Immortal if p.lambda0 >= 0.0 => {
            v.push(format!("immortal direction needs lambda0 < 0, got {}", p.lambda0))
        }
        _ => {}
    }
    let lam = p.lambda0.abs();
    if lam > 0.0 {
        let mid = 2.0 * (p.eta0 / lam - 1.0);
        let hi = (5.0 - sigma) * (1.0 - p.delta_exp) - 2.0;
        let lo = p.iota * sigma;
        if !(lo > 0.0 && lo < mid && mid < hi) {
            v.push(format!(
                "chain 0 < iota*sigma < 2(eta0/|lambda0| - 1) < (5-sigma)(1-delta) - 2 \
                 fails: 0 < {lo} < {mid} < {hi}"
            ));
        }
    }
    let beta_lo = 6.0 - 10.0 * p.delta_exp;
    if !(beta_lo < 2.0) {
        v.push(format!("projection-rate window ({beta_lo}, 2] empty"));
    }
    Validation {
        ok: v.is_empty(),
        violations: v,
    }
}

/// `exp(2tR⁺)` applied through the symmetric eigendecomposition of R⁺.
pub fn matrix_exp_2t(rplus: &Matrix3<f64>, t: f64) -> Matrix3<f64> {
    let sym = (rplus + rplus.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let q = eig.eigenvectors;
    let d = Matrix3::from_diagonal(&eig.eigenvalues.map(|l| (2.0 * t * l).exp()));
    q * d * q.transpose()
}

/// Exact flow `ζ(t) = exp(2tR⁺)ζ₀`.
pub fn zeta_exact(t: f64, rplus: &Matrix3<f64>, zeta0: &Vector3<f64>) -> Vector3<f64> {
    matrix_exp_2t(rplus, t) * zeta0
}

/// Inhomogeneity for the Duhamel flow: a callable with a declared
/// exponential-envelope bound `|η(t)| ≤ bound · e^{±η₀ t}` (sign by
/// direction) that the integrator enforces on samples.
pub struct EtaPerturbation<'a> {
    pub f: &'a (dyn Fn(f64) -> Vector3<f64> + 'a),
    pub eta0: f64,
    pub bound: f64,
}

impl<'a> EtaPerturbation<'a> {
    fn envelope(&self, t: f64, dir: Direction) -> f64 {
        match dir {
            Direction::Ancient => (self.eta0 * t).exp(),
            Direction::Immortal => (-self.eta0 * t).exp(),
        }
    }

    fn check_bound(&self, lo: f64, hi: f64, dir: Direction) -> Result<(), FlowError> {
        let n = 64;
        for k in 0..=n {
            let t = lo + (hi - lo) * k as f64 / n as f64;
            let env = self.envelope(t, dir);
            let ratio = (self.f)(t).norm() / (self.bound * env);
            if ratio > 1.0 + 1e-9 {
                return Err(FlowError::EtaBoundExceeded { t, ratio });
            }
        }
        Ok(())
    }
}

/// Duhamel solution of `ζ̇ = 2R⁺ζ + η` with `ζ(T) = exp(2TR⁺)ζ₀`:
/// ancient, t ≤ T: `ζ(t) = exp(2tR⁺)ζ₀ − ∫ₜ^T exp(2(t−s)R⁺) η(s) ds`;
/// immortal, t ≥ T: `ζ(t) = exp(2tR⁺)ζ₀ + ∫_T^t exp(2(t−s)R⁺) η(s) ds`.
pub fn zeta_duhamel(
    t: f64,
    rplus: &Matrix3<f64>,
    zeta0: &Vector3<f64>,
    eta: &EtaPerturbation,
    horizon: f64,
    dir: Direction,
) -> Result<Vector3<f64>, FlowError> {
    let (lo, hi) = if t <= horizon { (t, horizon) } else { (horizon, t) };
    eta.check_bound(lo, hi, dir)?;
    let mut out = zeta_exact(t, rplus, zeta0);
    if lo == hi {
        return Ok(out);
    }
    let sign = match dir {
        Direction::Ancient => -1.0,
        Direction::Immortal => 1.0,
    };
    // Componentwise adaptive quadrature of exp(2(t−s)R⁺)η(s).
    let tol = 1e-10;
    for comp in 0..3 {
        let (val, _) = quad::integrate(
            |s| (matrix_exp_2t(rplus, t - s) * (eta.f)(s))[comp],
            lo,
            hi,
            tol,
            600,
        )?;
        out[comp] += sign * val;
    }
    Ok(out)
}

/// Two-sided sandwich constants of the perturbed flow when `2R⁺ = Λ₀·Id` and
/// `‖η‖ ≤ bound`: `C₁ e^{Λ₀t} ≤ |ζ(t)| ≤ C₂ e^{Λ₀t}` with
/// `C± = |ζ₀| ± bound/(η₀ − Λ₀)`.
pub fn sandwich_constants(zeta0_norm: f64, eta0: f64, lambda0: f64, bound: f64) -> (f64, f64) {
    let m = bound / (eta0 - lambda0);
    (zeta0_norm - m, zeta0_norm + m)
}

/// Bubble-size and gluing-radius schedules `ε₀(t) = e^{Λ₀t/2}`,
/// `δ(t) = ε₀(t)^δ`.
pub fn schedules(p: &FlowParams, t: f64) -> Result<(f64, f64), FlowError> {
    let v = validate_params(p);
    if !v.ok {
        return Err(FlowError::InvalidParams(v.violations));
    }
    let eps0 = (0.5 * p.lambda0 * t).exp();
    Ok((eps0, eps0.powf(p.delta_exp)))
}

/// The change of variables from the renormalized to the unnormalized flow.
#[derive(Debug, Clone)]
pub struct UnnormalizedScales {
    pub that: f64,
    pub metric_scale: f64,
    pub zeta_hat: Vector3<f64>,
}

/// `t̂ = −e^{−2Λt̄}/(2Λ)`, metric scale `e^{−2Λt̄}`, and
/// `ζ̂(t̂) = (−2Λt̂) · exp(ln(−2Λt̂) · R⁺/(−Λ)) ζ₀`.
pub fn unnormalized_scales(
    lambda: f64,
    tbar: f64,
    rplus: &Matrix3<f64>,
    zeta0: &Vector3<f64>,
) -> Result<UnnormalizedScales, FlowError> {
    if lambda == 0.0 {
        return Err(FlowError::ZeroLambda);
    }
    let scale = (-2.0 * lambda * tbar).exp();
    let that = -scale / (2.0 * lambda);
    let zeta_hat = zeta_exact(-scale.ln() / (2.0 * lambda), rplus, zeta0) * scale;
    Ok(UnnormalizedScales {
        that,
        metric_scale: scale,
        zeta_hat,
    })
}

/// Inverse conversion `t̄ = −ln(−2Λt̂)/(2Λ)`.
pub fn tbar_from_that(lambda: f64, that: f64) -> Result<f64, FlowError> {
    if lambda == 0.0 {
        return Err(FlowError::ZeroLambda);
    }
    let arg = -2.0 * lambda * that;
    if arg <= 0.0 {
        return Err(FlowError::BadUnnormalizedTime { that, lambda });
    }
    Ok(-arg.ln() / (2.0 * lambda))
}

/// A sampled bubble-parameter path with derived schedule columns.
#[derive(Debug, Clone)]
pub struct ZetaPath {
    pub times: Vec<f64>,
    pub zetas: Vec<Vector3<f64>>,
    pub eps0: Vec<f64>,
    pub eps: Vec<f64>,
    pub delta: Vec<f64>,
}

impl ZetaPath {
    /// Sample times, ζ values and schedules for the exact flow.
    pub fn sample_exact(
        rplus: &Matrix3<f64>,
        zeta0: &Vector3<f64>,
        lambda0: f64,
        delta_exp: f64,
        t0: f64,
        t1: f64,
        steps: usize,
    ) -> Self {
        let mut path = ZetaPath {
            times: Vec::new(),
            zetas: Vec::new(),
            eps0: Vec::new(),
            eps: Vec::new(),
            delta: Vec::new(),
        };
        for k in 0..=steps {
            let t = t0 + (t1 - t0) * k as f64 / steps as f64;
            let z = zeta_exact(t, rplus, zeta0);
            path.push(t, z, lambda0, delta_exp);
        }
        path
    }

    pub fn push(&mut self, t: f64, z: Vector3<f64>, lambda0: f64, delta_exp: f64) {
        let eps0 = (0.5 * lambda0 * t).exp();
        self.times.push(t);
        self.eps0.push(eps0);
        self.eps.push(z.norm().sqrt());
        self.delta.push(eps0.powf(delta_exp));
        self.zetas.push(z);
    }

    /// CSV rendering with header `t,zeta_x,zeta_y,zeta_z,eps0,delta`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,zeta_x,zeta_y,zeta_z,eps0,delta\n");
        for k in 0..self.times.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.times[k],
                self.zetas[k][0],
                self.zetas[k][1],
                self.zetas[k][2],
                self.eps0[k],
                self.delta[k]
            ));
        }
        out
    }
}

/// Integrate the degenerate cubic ODE `ζ̇ = 2c|ζ|²ζ` by classical RK4; the
/// aligned size satisfies `ε(t) = (ε₀⁻⁴ − 4ct)^{−1/4}` and blows up at
/// `t* = 1/(4c|ζ₀|²)`.
pub fn bk_degenerate_ode(
    c: f64,
    zeta0: &Vector3<f64>,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<ZetaPath, FlowError> {
    let t_star = if c > 0.0 {
        t0 + 1.0 / (4.0 * c * zeta0.norm_squared())
    } else {
        f64::INFINITY
    };
    if t1 >= t_star {
        return Err(FlowError::PastBlowUp { t: t1, t_star });
    }
    let rhs = |z: &Vector3<f64>| z * (2.0 * c * z.norm_squared());
    let mut path = ZetaPath {
        times: Vec::new(),
        zetas: Vec::new(),
        eps0: Vec::new(),
        eps: Vec::new(),
        delta: Vec::new(),
    };
    let h = (t1 - t0) / steps as f64;
    let mut z = *zeta0;
    for k in 0..=steps {
        let t = t0 + h * k as f64;
        path.times.push(t);
        path.zetas.push(z);
        path.eps0.push(f64::NAN);
        path.eps.push(z.norm().sqrt());
        path.delta.push(f64::NAN);
        if k < steps {
            let k1 = rhs(&z);
            let k2 = rhs(&(z + k1 * (h / 2.0)));
            let k3 = rhs(&(z + k2 * (h / 2.0)));
            let k4 = rhs(&(z + k3 * h));
            z += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
    }
    Ok(path)
}
