//! Pointwise linear algebra of 2-forms and curvature operators on oriented
//! Euclidean 4-space.
//!
//! The six basis forms `ω₁± = dx¹∧dx² ± dx³∧dx⁴` (and cyclic permutations of
//! the indices {2,3,4}) diagonalize the Hodge star. Every symmetric curvature
//! operator on Λ² splits into 3×3 blocks over (Λ⁺, Λ⁻); the off-diagonal block
//! carries the traceless Ricci curvature through the map
//! `(ω⁺, ω⁻) ↦ ω⁺∘ω⁻ ∈ Sym²₀`.

use nalgebra::{Matrix3, Matrix4, Vector4};

/// Entrywise tolerance for the antisymmetry and trace invariants.
pub const FORM_TOL: f64 = 1e-14;
/// Tolerance on the pair symmetry `R_{ijkl} = R_{klij}` of curvature input.
pub const PAIR_SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum FrameError {
    #[error("matrix is not antisymmetric (max deviation {0:.3e})")]
    NotAntisymmetric(f64),
    #[error("compose needs one selfdual and one anti-selfdual form")]
    SameDuality,
    #[error("curvature violates pair symmetry R_ijkl = R_klij (max deviation {0:.3e})")]
    PairSymmetry(f64),
    #[error("curvature violates antisymmetry in an index pair (max deviation {0:.3e})")]
    IndexAntisymmetry(f64),
    #[error("rho rotation is undefined at x = 0")]
    ZeroVector,
}

/// Orientation of ℝ⁴; `Minus` swaps the roles of Λ⁺ and Λ⁻.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Plus,
    Minus,
}

/// A 2-form on ℝ⁴, stored as the antisymmetric matrix `W_uv = ω(e_u, e_v)`.
///
/// The basis forms carry the norm convention `|ωᵢ±|² = 2`, i.e. the form inner
/// product is `⟨α, β⟩ = ½ Σ_uv α_uv β_uv`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm {
    matrix: Matrix4<f64>,
}

impl TwoForm {
    pub fn new(matrix: Matrix4<f64>) -> Result<Self, FrameError> {
        let dev = (matrix + matrix.transpose()).abs().max();
        if dev > FORM_TOL {
            return Err(FrameError::NotAntisymmetric(dev));
        }
        Ok(Self { matrix })
    }

    pub fn zero() -> Self {
        Self {
            matrix: Matrix4::zeros(),
        }
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.matrix
    }

    /// Form inner product `½ Σ_uv α_uv β_uv`; the basis forms have `⟨ω,ω⟩ = 2`.
    pub fn inner(&self, other: &TwoForm) -> f64 {
        0.5 * self.matrix.component_mul(&other.matrix).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    /// Hodge star in the standard orientation: `*(dxⁱ∧dxʲ) = dxᵏ∧dxˡ` for
    /// (i,j,k,l) an even permutation of (1,2,3,4).
    pub fn hodge_star(&self) -> TwoForm {
        let w = &self.matrix;
        let mut s = Matrix4::zeros();
        // (0,1)<->(2,3), (0,2)<->(3,1), (0,3)<->(1,2)
        s[(0, 1)] = w[(2, 3)];
        s[(2, 3)] = w[(0, 1)];
        s[(0, 2)] = w[(3, 1)];
        s[(3, 1)] = w[(0, 2)];
        s[(0, 3)] = w[(1, 2)];
        s[(1, 2)] = w[(0, 3)];
        let st = s - s.transpose();
        TwoForm { matrix: st }
    }

    fn duality(&self) -> Option<Orientation> {
        let star = self.hodge_star();
        let norm = self.matrix.abs().max().max(1e-300);
        if (star.matrix - self.matrix).abs().max() < 1e-9 * norm {
            Some(Orientation::Plus)
        } else if (star.matrix + self.matrix).abs().max() < 1e-9 * norm {
            Some(Orientation::Minus)
        } else {
            None
        }
    }

    pub fn scale(&self, c: f64) -> TwoForm {
        TwoForm {
            matrix: self.matrix * c,
        }
    }

    pub fn add(&self, other: &TwoForm) -> TwoForm {
        TwoForm {
            matrix: self.matrix + other.matrix,
        }
    }
}

/// A symmetric traceless 2-tensor on ℝ⁴.
#[derive(Debug, Clone, PartialEq)]
pub struct Sym2Traceless {
    matrix: Matrix4<f64>,
}

impl Sym2Traceless {
    pub fn new(matrix: Matrix4<f64>) -> Result<Self, FrameError> {
        let sym_dev = (matrix - matrix.transpose()).abs().max();
        if sym_dev > FORM_TOL {
            return Err(FrameError::NotAntisymmetric(sym_dev));
        }
        let tr = matrix.trace().abs();
        if tr > FORM_TOL {
            return Err(FrameError::PairSymmetry(tr));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.matrix
    }

    /// Frobenius norm, i.e. `(Σ_uv h_uv²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }
}

/// The basis `(ω₁, ω₂, ω₃)` of Λ^± built from cyclic permutations of {2,3,4}:
/// `ω₁± = dx¹∧dx² ± dx³∧dx⁴`, `ω₂± = dx¹∧dx³ ± dx⁴∧dx²`,
/// `ω₃± = dx¹∧dx⁴ ± dx²∧dx³`. Each satisfies `|ω|² = 2`.
pub fn omega_basis(orientation: Orientation) -> [TwoForm; 3] {
    let s = match orientation {
        Orientation::Plus => 1.0,
        Orientation::Minus => -1.0,
    };
    // (i, j) of the leading dx¹∧dxʲ term and (k, l) of the companion term.
    let pairs = [((0, 1), (2, 3)), ((0, 2), (3, 1)), ((0, 3), (1, 2))];
    pairs.map(|((a, b), (c, d))| {
        let mut m = Matrix4::zeros();
        m[(a, b)] = 1.0;
        m[(b, a)] = -1.0;
        m[(c, d)] = s;
        m[(d, c)] = -s;
        TwoForm { matrix: m }
    })
}

/// Composition `ω⁺∘ω⁻` of a selfdual and an anti-selfdual form: the matrix
/// product of the two antisymmetric matrices. The factors commute and the
/// result is symmetric and traceless.
pub fn compose(a: &TwoForm, b: &TwoForm) -> Result<Sym2Traceless, FrameError> {
    let da = a.duality();
    let db = b.duality();
    let zero_a = a.matrix.abs().max() == 0.0;
    let zero_b = b.matrix.abs().max() == 0.0;
    if !zero_a && !zero_b {
        match (da, db) {
            (Some(x), Some(y)) if x != y => {}
            _ => return Err(FrameError::SameDuality),
        }
    }
    Sym2Traceless::new(a.matrix * b.matrix)
}

/// The full curvature tensor `R_{ijkl}` in an orthonormal frame, with the sign
/// convention in which the unit round sphere has `R_{ijij} = +1` for `i ≠ j`.
#[derive(Debug, Clone)]
pub struct Riemann4 {
    pub comps: [[[[f64; 4]; 4]; 4]; 4],
}

impl Riemann4 {
    pub fn zero() -> Self {
        Self {
            comps: [[[[0.0; 4]; 4]; 4]; 4],
        }
    }

    /// Constant-curvature tensor `K (δ_ik δ_jl − δ_il δ_jk)`.
    pub fn constant_curvature(k: f64) -> Self {
        let mut r = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                for a in 0..4 {
                    for b in 0..4 {
                        let d = |p: usize, q: usize| if p == q { 1.0 } else { 0.0 };
                        r.comps[i][j][a][b] = k * (d(i, a) * d(j, b) - d(i, b) * d(j, a));
                    }
                }
            }
        }
        r
    }

    pub fn max_pair_symmetry_violation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        dev = dev.max((self.comps[i][j][k][l] - self.comps[k][l][i][j]).abs());
                    }
                }
            }
        }
        dev
    }

    pub fn max_antisymmetry_violation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        dev = dev.max((self.comps[i][j][k][l] + self.comps[j][i][k][l]).abs());
                        dev = dev.max((self.comps[i][j][k][l] + self.comps[i][j][l][k]).abs());
                    }
                }
            }
        }
        dev
    }

    /// Max violation of the first Bianchi identity `R_{i[jkl]} = 0`.
    pub fn max_first_bianchi_violation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        dev = dev.max(
                            (self.comps[i][j][k][l]
                                + self.comps[i][k][l][j]
                                + self.comps[i][l][j][k])
                                .abs(),
                        );
                    }
                }
            }
        }
        dev
    }

    /// `Ric_{jl} = Σ_i R_{ijil}`.
    pub fn ricci(&self) -> Matrix4<f64> {
        let mut ric = Matrix4::zeros();
        for j in 0..4 {
            for l in 0..4 {
                let mut s = 0.0;
                for i in 0..4 {
                    s += self.comps[i][j][i][l];
                }
                ric[(j, l)] = s;
            }
        }
        ric
    }

    pub fn scalar(&self) -> f64 {
        self.ricci().trace()
    }

    /// Frobenius norm `(Σ R_{ijkl}²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        s += self.comps[i][j][k][l] * self.comps[i][j][k][l];
                    }
                }
            }
        }
        s.sqrt()
    }

    /// Projection onto the pair-symmetric part, `(R_{ijkl} + R_{klij})/2`.
    /// Exact on algebraic curvature tensors; used for curvature assembled
    /// from interpolated profiles, whose derivative error breaks the pair
    /// symmetry at interpolation order.
    pub fn symmetrized(&self) -> Riemann4 {
        let mut r = Riemann4::zero();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        r.comps[i][j][k][l] =
                            0.5 * (self.comps[i][j][k][l] + self.comps[k][l][i][j]);
                    }
                }
            }
        }
        r
    }

    /// Action of the curvature operator on a 2-form: `(Rω)_{ij} = ½ R_{ijkl} ω_{kl}`.
    pub fn act(&self, w: &TwoForm) -> TwoForm {
        let mut out = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let mut s = 0.0;
                for k in 0..4 {
                    for l in 0..4 {
                        s += self.comps[i][j][k][l] * w.matrix[(k, l)];
                    }
                }
                out[(i, j)] = 0.5 * s;
            }
        }
        TwoForm { matrix: out }
    }
}

/// The curvature operator split into blocks over `Λ⁺ ⊕ Λ⁻`.
///
/// Normalization is pinned by constant curvature: `Ric = Λ g` with all
/// sectional curvatures equal gives `rplus = rminus = (Λ/3)·Id`, so that
/// `tr R± = scal/4` and `R± = W± + (scal/12)·Id`.
#[derive(Debug, Clone)]
pub struct CurvBlocks {
    pub rplus: Matrix3<f64>,
    pub rminus: Matrix3<f64>,
    /// Off-diagonal block `⟨R(ωᵢ⁺), ωⱼ⁻⟩/2`; carries the traceless Ricci.
    pub ric_mixed: Matrix3<f64>,
    pub scal: f64,
    pub wplus: Matrix3<f64>,
    pub wminus: Matrix3<f64>,
}

impl CurvBlocks {
    pub fn max_block_norm(&self) -> f64 {
        self.rplus
            .abs()
            .max()
            .max(self.rminus.abs().max())
            .max(self.ric_mixed.abs().max())
    }
}

fn traceless3(m: &Matrix3<f64>) -> Matrix3<f64> {
    m - Matrix3::identity() * (m.trace() / 3.0)
}

/// Split a curvature tensor into its blocks on `Λ⁺ ⊕ Λ⁻` by sandwiching the
/// curvature operator between the normalized ω-bases.
pub fn decompose_curvature(
    riem: &Riemann4,
    orientation: Orientation,
) -> Result<CurvBlocks, FrameError> {
    // Symmetry tolerance scales with the curvature magnitude.
    let scale = riem.norm().max(1.0);
    let anti = riem.max_antisymmetry_violation();
    if anti > PAIR_SYMMETRY_TOL * scale {
        return Err(FrameError::IndexAntisymmetry(anti));
    }
    let pair = riem.max_pair_symmetry_violation();
    if pair > PAIR_SYMMETRY_TOL * scale {
        return Err(FrameError::PairSymmetry(pair));
    }
    let (sd, asd) = match orientation {
        Orientation::Plus => (omega_basis(Orientation::Plus), omega_basis(Orientation::Minus)),
        Orientation::Minus => (omega_basis(Orientation::Minus), omega_basis(Orientation::Plus)),
    };
    let mut rplus = Matrix3::zeros();
    let mut rminus = Matrix3::zeros();
    let mut mixed = Matrix3::zeros();
    for i in 0..3 {
        let rsd = riem.act(&sd[i]);
        let rasd = riem.act(&asd[i]);
        for j in 0..3 {
            // Division by |ω|² = 2 normalizes the sandwich.
            rplus[(i, j)] = rsd.inner(&sd[j]) / 2.0;
            rminus[(i, j)] = rasd.inner(&asd[j]) / 2.0;
            mixed[(i, j)] = rsd.inner(&asd[j]) / 2.0;
        }
    }
    Ok(CurvBlocks {
        rplus,
        rminus,
        ric_mixed: mixed,
        scal: riem.scalar(),
        wplus: traceless3(&rplus),
        wminus: traceless3(&rminus),
    })
}

/// Rebuild the curvature tensor from its blocks:
/// `R_{ijkl} = ½ Σ_ab M_ab (ω_a)_{ij} (ω_b)_{kl}` over the six basis forms.
/// Inverse of [`decompose_curvature`] on tensors with the algebraic symmetries.
pub fn reassemble_curvature(blocks: &CurvBlocks, orientation: Orientation) -> Riemann4 {
    let (sd, asd) = match orientation {
        Orientation::Plus => (omega_basis(Orientation::Plus), omega_basis(Orientation::Minus)),
        Orientation::Minus => (omega_basis(Orientation::Minus), omega_basis(Orientation::Plus)),
    };
    let mut six: Vec<&TwoForm> = Vec::with_capacity(6);
    six.extend(sd.iter());
    six.extend(asd.iter());
    let mut m6 = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            m6[i][j] = blocks.rplus[(i, j)];
            m6[3 + i][3 + j] = blocks.rminus[(i, j)];
            m6[i][3 + j] = blocks.ric_mixed[(i, j)];
            m6[3 + j][i] = blocks.ric_mixed[(i, j)];
        }
    }
    let mut r = Riemann4::zero();
    for a in 0..6 {
        for b in 0..6 {
            let c = 0.5 * m6[a][b];
            if c == 0.0 {
                continue;
            }
            let wa = six[a].matrix();
            let wb = six[b].matrix();
            for i in 0..4 {
                for j in 0..4 {
                    let waij = wa[(i, j)];
                    if waij == 0.0 {
                        continue;
                    }
                    for k in 0..4 {
                        for l in 0..4 {
                            r.comps[i][j][k][l] += c * waij * wb[(k, l)];
                        }
                    }
                }
            }
        }
    }
    r
}

/// The rotation `ρ_x` mapping selfdual to anti-selfdual forms,
/// `ωᵢ⁺ = r dr∧αᵢ + r²αⱼ∧αₖ ↦ θᵢ⁻ = r dr∧αᵢ − r²αⱼ∧αₖ` at the point x.
///
/// Closed form: `ρ_x(W) = 2(x xᵀ W + W x xᵀ)/|x|² − W`. The map is an isometry
/// of the form norm and is invariant under `x ↦ λx`.
#[derive(Debug, Clone)]
pub struct RhoRotation {
    x: Vector4<f64>,
}

impl RhoRotation {
    pub fn new(x: Vector4<f64>) -> Result<Self, FrameError> {
        if x.norm() == 0.0 {
            return Err(FrameError::ZeroVector);
        }
        Ok(Self { x })
    }

    pub fn apply(&self, w: &TwoForm) -> TwoForm {
        let xxt = self.x * self.x.transpose();
        let m = (xxt * w.matrix + w.matrix * xxt) * (2.0 / self.x.norm_squared()) - w.matrix;
        TwoForm { matrix: m }
    }

    /// Coefficients `B_ij` with `ρ_x(ωᵢ⁺) = Σ_j B_ij ωⱼ⁻`.
    pub fn coefficients(&self) -> Matrix3<f64> {
        let plus = omega_basis(Orientation::Plus);
        let minus = omega_basis(Orientation::Minus);
        let mut b = Matrix3::zeros();
        for i in 0..3 {
            let img = self.apply(&plus[i]);
            for j in 0..3 {
                b[(i, j)] = img.inner(&minus[j]) / 2.0;
            }
        }
        b
    }
}

/// `ρ_x` applied to the selfdual form `ζ⁺ = Σ ζᵢ ωᵢ⁺` of a parameter `ζ ∈ ℝ³`.
pub fn rho_of_zeta(x: Vector4<f64>, zeta: [f64; 3]) -> Result<TwoForm, FrameError> {
    let rho = RhoRotation::new(x)?;
    let plus = omega_basis(Orientation::Plus);
    let mut z = TwoForm::zero();
    for i in 0..3 {
        z = z.add(&plus[i].scale(zeta[i]));
    }
    Ok(rho.apply(&z))
}

/// The selfdual form `ζ⁺ = Σ ζᵢ ωᵢ⁺` of `ζ ∈ ℝ³`; `|ζ⁺|² = 2|ζ|²`.
pub fn zeta_plus(zeta: [f64; 3]) -> TwoForm {
    let plus = omega_basis(Orientation::Plus);
    let mut z = TwoForm::zero();
    for i in 0..3 {
        z = z.add(&plus[i].scale(zeta[i]));
    }
    z
}
