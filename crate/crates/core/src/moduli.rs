//! ADE moduli algebra: Dynkin/intersection data, period-point degeneracy,
//! the Gram and projection identities of the deformation basis `o_ij`, the
//! componentwise parameter flow, and desingularization topology.

use crate::flow::zeta_exact;
use crate::frame4::{omega_basis, zeta_plus, FrameError, Orientation, RhoRotation, Sym2Traceless};
use nalgebra::{DMatrix, Matrix3, Vector3, Vector4};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, thiserror::Error)]
pub enum ModuliError {
    #[error("invalid rank {k} for type {ade}")]
    BadRank { ade: String, k: usize },
    #[error("period component {0} is zero")]
    ZeroPeriod(usize),
    #[error("index out of range: {0}")]
    BadIndex(usize),
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("inconsistent topology input: b± = ({bp}, {bm}) not nonnegative integers")]
    InconsistentTopology { bp: f64, bm: f64 },
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// ADE type of an isolated orbifold singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "k")]
pub enum AdeType {
    A(usize),
    D(usize),
    E6,
    E7,
    E8,
}

impl std::fmt::Display for AdeType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AdeType::A(k) => write!(f, "A{k}"),
            AdeType::D(k) => write!(f, "D{k}"),
            AdeType::E6 => write!(f, "E6"),
            AdeType::E7 => write!(f, "E7"),
            AdeType::E8 => write!(f, "E8"),
        }
    }
}

impl AdeType {
    pub fn rank(&self) -> usize {
        match self {
            AdeType::A(k) | AdeType::D(k) => *k,
            AdeType::E6 => 6,
            AdeType::E7 => 7,
            AdeType::E8 => 8,
        }
    }

    /// Order of the finite subgroup of SU(2): cyclic k+1, binary dihedral
    /// 4(k−2), binary tetrahedral 24, octahedral 48, icosahedral 120.
    pub fn group_order(&self) -> usize {
        match self {
            AdeType::A(k) => k + 1,
            AdeType::D(k) => 4 * (k - 2),
            AdeType::E6 => 24,
            AdeType::E7 => 48,
            AdeType::E8 => 120,
        }
    }
}

/// Dynkin data of an ADE singularity: the intersection form (Cartan matrix
/// with −2 diagonal, negative definite), the root list in simple-root
/// coordinates, and the group order.
#[derive(Debug, Clone)]
pub struct DynkinData {
    pub ade: AdeType,
    pub k: usize,
    /// Intersection form: diagonal −2, adjacency +1.
    pub cartan: DMatrix<i64>,
    /// Roots θ ∈ ℤᵏ with θᵀ(−cartan)θ = 2.
    pub roots: Vec<Vec<i64>>,
    pub group_order: usize,
}

fn adjacency(ade: AdeType) -> Result<Vec<(usize, usize)>, ModuliError> {
    let k = ade.rank();
    let path = |n: usize| (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect::<Vec<_>>();
    match ade {
        AdeType::A(n) => {
            if n < 1 {
                return Err(ModuliError::BadRank { ade: ade.to_string(), k });
            }
            Ok(path(n))
        }
        AdeType::D(n) => {
            if n < 4 {
                return Err(ModuliError::BadRank { ade: ade.to_string(), k });
            }
            // Path on 0..n−2 with the fork node n−1 attached to n−3.
            let mut e = path(n - 1);
            e.push((n - 3, n - 1));
            Ok(e)
        }
        AdeType::E6 | AdeType::E7 | AdeType::E8 => {
            // Path on 0..k−2 with the branch node k−1 attached to node 2.
            let mut e = path(k - 1);
            e.push((2, k - 1));
            Ok(e)
        }
    }
}

/// Build Dynkin data: intersection matrix, root enumeration (orbit of the
/// simple roots under the simple reflections), group order.
pub fn dynkin(ade: AdeType) -> Result<DynkinData, ModuliError> {
    let k = ade.rank();
    let edges = adjacency(ade)?;
    let mut a = DMatrix::<i64>::zeros(k, k);
    for i in 0..k {
        a[(i, i)] = -2;
    }
    for (i, j) in edges {
        a[(i, j)] = 1;
        a[(j, i)] = 1;
    }
    // Positive Cartan matrix C = −A drives the reflections
    // sᵢ(v)ᵢ = vᵢ − Σⱼ C_ij vⱼ.
    let mut roots: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut frontier: Vec<Vec<i64>> = Vec::new();
    for i in 0..k {
        let mut e = vec![0i64; k];
        e[i] = 1;
        frontier.push(e);
    }
    while let Some(v) = frontier.pop() {
        if !roots.insert(v.clone()) {
            continue;
        }
        for i in 0..k {
            let mut w = v.clone();
            let mut pairing = 0i64;
            for j in 0..k {
                pairing += -a[(i, j)] * v[j];
            }
            w[i] -= pairing;
            if !roots.contains(&w) {
                frontier.push(w);
            }
        }
    }
    Ok(DynkinData {
        ade,
        k,
        cartan: a,
        roots: roots.into_iter().collect(),
        group_order: ade.group_order(),
    })
}

/// A period point `ζ = (ζ₁, …, ζ_k) ∈ (ℝ³)^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodPoint {
    pub zeta: Vec<Vector3<f64>>,
}

impl PeriodPoint {
    pub fn new(zeta: Vec<Vector3<f64>>) -> Self {
        Self { zeta }
    }
}

/// True iff some root θ satisfies `Σⱼ θⱼ ζⱼ = 0 ∈ ℝ³` (within 1e−12 of the
/// period scale); returns the witnessing root.
pub fn is_degenerate(d: &DynkinData, p: &PeriodPoint) -> (bool, Option<Vec<i64>>) {
    let scale = p
        .zeta
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    for theta in &d.roots {
        let mut s = Vector3::zeros();
        for (j, z) in p.zeta.iter().enumerate() {
            s += z * theta[j] as f64;
        }
        if s.norm() <= 1e-12 * scale {
            // Canonical witness: first nonzero entry positive.
            let mut w = theta.clone();
            if let Some(first) = w.iter().find(|&&v| v != 0) {
                if *first < 0 {
                    for v in &mut w {
                        *v = -*v;
                    }
                }
            }
            return (true, Some(w));
        }
    }
    (false, None)
}

/// Gram matrix of the deformation basis: `⟨o_ij, o_kl⟩ = −2δ_ik a_jl`, i.e.
/// the block matrix `I₃ ⊗ (−2A)` with rows indexed by (form i, sphere j),
/// i-major. Diagonal entries 4; symmetric positive definite.
pub fn oij_gram(d: &DynkinData) -> DMatrix<f64> {
    let k = d.k;
    let mut g = DMatrix::<f64>::zeros(3 * k, 3 * k);
    for i in 0..3 {
        for j in 0..k {
            for l in 0..k {
                g[(i * k + j, i * k + l)] = -2.0 * d.cartan[(j, l)] as f64;
            }
        }
    }
    g
}

/// L² projection onto the deformation span from the pairing data
/// `H_ij = ⟨h, o_ij⟩` (3×k): coefficients `c_ij = −½ Σₗ b_jl H_il` with
/// `B = A⁻¹`. Applying the Gram matrix to the coefficients recovers H.
pub fn l2_project(d: &DynkinData, pairings: &DMatrix<f64>) -> DMatrix<f64> {
    let k = d.k;
    let a = DMatrix::<f64>::from_fn(k, k, |i, j| d.cartan[(i, j)] as f64);
    let b = a.try_inverse().expect("intersection form is definite");
    let mut c = DMatrix::<f64>::zeros(3, k);
    for i in 0..3 {
        for j in 0..k {
            let mut v = 0.0;
            for l in 0..k {
                v += b[(j, l)] * pairings[(i, l)];
            }
            c[(i, j)] = -0.5 * v;
        }
    }
    c
}

/// Pairings `⟨Σ c_ij o_ij, o_kl⟩ = −2 Σ_j c_kj a_jl` of a coefficient array.
pub fn pairings_of_coefficients(d: &DynkinData, coeffs: &DMatrix<f64>) -> DMatrix<f64> {
    let k = d.k;
    let mut h = DMatrix::<f64>::zeros(3, k);
    for i in 0..3 {
        for l in 0..k {
            let mut v = 0.0;
            for j in 0..k {
                v += -2.0 * coeffs[(i, j)] * d.cartan[(j, l)] as f64;
            }
            h[(i, l)] = v;
        }
    }
    h
}

/// The r⁻⁴ leading term of the deformation `o_ij`:
/// `2|Γ|/Vol(S³) · ρ(ζⱼ⁺)∘ωᵢ⁺ / r⁴` with `Vol(S³) = 2π²`, as frame
/// components in the radial coframe (evaluated at the pole, where the
/// coordinate and radial frames agree).
pub fn oij_leading(
    d: &DynkinData,
    p: &PeriodPoint,
    i: usize,
    j: usize,
    r: f64,
) -> Result<Sym2Traceless, ModuliError> {
    if r <= 0.0 {
        return Err(ModuliError::NonPositiveRadius(r));
    }
    if !(1..=3).contains(&i) || !(1..=d.k).contains(&j) {
        return Err(ModuliError::BadIndex(if i > 3 { i } else { j }));
    }
    let zj = p.zeta[j - 1];
    if zj.norm() == 0.0 {
        return Err(ModuliError::ZeroPeriod(j));
    }
    let rho = RhoRotation::new(Vector4::new(1.0, 0.0, 0.0, 0.0))?;
    let rz = rho.apply(&zeta_plus([zj[0], zj[1], zj[2]]));
    let omega = &omega_basis(Orientation::Plus)[i - 1];
    let coeff = 2.0 * d.group_order as f64 / (2.0 * std::f64::consts::PI.powi(2)) / r.powi(4);
    Ok(Sym2Traceless::new(rz.matrix() * omega.matrix() * coeff)?)
}

/// Apply the exact flow to each component of the period point:
/// `ζⱼ(t) = exp(2tR⁺)ζⱼ(0)`.
pub fn component_flow(rplus: &Matrix3<f64>, p: &PeriodPoint, t: f64) -> PeriodPoint {
    PeriodPoint::new(p.zeta.iter().map(|z| zeta_exact(t, rplus, z)).collect())
}

// ---------------------------------------------------------------------------
// Desingularization topology.
// ---------------------------------------------------------------------------

/// Orientation label of a glued ALE piece, in the aggregate signature
/// convention `σ = S⁻ − S⁺`: a `Minus` label adds +k to the signature (the
/// piece carries a positive-definite intersection form), a `Plus` label adds
/// −k (the hyperkähler/anti-selfdual gluing orientation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingOrientation {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Singularity {
    #[serde(flatten)]
    pub ade: AdeType,
    pub orientation: SingOrientation,
}

/// Topological data of the orbifold: Euler characteristic and signature of
/// the underlying space plus the list of singularities to desingularize.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbifoldTopology {
    pub chi_orb: i64,
    pub sigma_orb: i64,
    pub singularities: Vec<Singularity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TopologyResult {
    pub chi: i64,
    pub sigma: i64,
    pub b_plus: i64,
    pub b_minus: i64,
}

/// Characteristic numbers of the desingularization (assuming the result is
/// simply connected with b₁ = 0): each ALE piece of rank k replaces a point
/// by χ = k+1, and contributes ∓k to the signature according to its label:
/// `χ = χ_orb − s + Σ(kᵢ+1)`, `σ = σ_orb − Σ sign(θᵢ)·kᵢ`,
/// `b± = (χ − 2 ± σ)/2`.
pub fn desingularization_topology(o: &OrbifoldTopology) -> Result<TopologyResult, ModuliError> {
    let s = o.singularities.len() as i64;
    let mut chi = o.chi_orb - s;
    let mut sigma = o.sigma_orb;
    for sing in &o.singularities {
        let k = sing.ade.rank() as i64;
        chi += k + 1;
        sigma += match sing.orientation {
            SingOrientation::Plus => -k,
            SingOrientation::Minus => k,
        };
    }
    let bp2 = chi - 2 + sigma;
    let bm2 = chi - 2 - sigma;
    if bp2 % 2 != 0 || bm2 % 2 != 0 || bp2 < 0 || bm2 < 0 {
        return Err(ModuliError::InconsistentTopology {
            bp: bp2 as f64 / 2.0,
            bm: bm2 as f64 / 2.0,
        });
    }
    Ok(TopologyResult {
        chi,
        sigma,
        b_plus: bp2 / 2,
        b_minus: bm2 / 2,
    })
}
