//! The `verify` subcommand: deterministic invariant suites per module.
//! Output lines depend only on the seed and suite, so repeated runs are
//! byte-identical; the exit code is nonzero iff any check fails.

use crate::{cfg_str, cfg_u64};
use anyhow::{bail, Result};
use clap::Args;
use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use orbiflow_core::cohom1::{fd_oracle, flat_cone, hyperbolic_suspension, round_suspension};
use orbiflow_core::eh_deform::{
    eh_metric, kernel_gauge_residual, l2_pairing, lichnerowicz_residual, o_pointwise_norm,
    o_tensors, potential_hessian, potential_u, suspension_eigenfunction, ZetaParam,
};
use orbiflow_core::flow::{
    bk_degenerate_ode, sandwich_constants, validate_params, zeta_duhamel, zeta_exact, Direction,
    EtaPerturbation, FlowParams,
};
use orbiflow_core::frame4::{
    compose, decompose_curvature, omega_basis, zeta_plus, Orientation, RhoRotation,
};
use orbiflow_core::glue::{build_glued, curvature_scan, gram_matrix, GlueConfig, OrbifoldModel};
use orbiflow_core::moduli::{
    desingularization_topology, dynkin, is_degenerate, l2_project, oij_gram,
    pairings_of_coefficients, AdeType, OrbifoldTopology, PeriodPoint, SingOrientation,
    Singularity,
};
use orbiflow_core::stability::{
    builtin_models, classify, obstruction_pairing, pairing_generator,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

#[derive(Args)]
pub struct VerifyArgs {
    /// Suite name: frame4|cohom1|eh|stability|flow|glue|moduli|all.
    #[arg(long)]
    suite: Option<String>,
    /// Seed of the randomized checks.
    #[arg(long)]
    seed: Option<u64>,
}

struct Runner {
    failures: usize,
    checks: usize,
}

impl Runner {
    fn check(&mut self, name: &str, result: std::result::Result<(), String>) {
        self.checks += 1;
        match result {
            Ok(()) => println!("ok - {name}"),
            Err(msg) => {
                println!("FAIL - {name}: {msg}");
                self.failures += 1;
            }
        }
    }
}

fn assert_close(label: &str, got: f64, want: f64, tol: f64) -> std::result::Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{label}: {got} vs {want} (tol {tol})"))
    }
}

fn assert_le(label: &str, got: f64, bound: f64) -> std::result::Result<(), String> {
    if got <= bound {
        Ok(())
    } else {
        Err(format!("{label}: {got} > {bound}"))
    }
}

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

fn suite_frame4(r: &mut Runner, seed: u64) {
    let p = omega_basis(Orientation::Plus);
    let m = omega_basis(Orientation::Minus);
    r.check("basis norms |ω|² = 2", {
        let mut res = Ok(());
        for w in p.iter().chain(m.iter()) {
            res = res.and(assert_close("norm", w.norm_sq(), 2.0, 1e-14));
        }
        res
    });
    r.check("Λ⁺ ⊥ Λ⁻ and Hodge eigenvectors", {
        let mut res = Ok(());
        for i in 0..3 {
            for j in 0..3 {
                res = res.and(assert_le("pairing", p[i].inner(&m[j]).abs(), 1e-14));
            }
            res = res.and(assert_le(
                "star",
                (p[i].hodge_star().matrix() - p[i].matrix()).abs().max(),
                1e-14,
            ));
        }
        res
    });
    r.check("compose diagonal pattern", {
        let c = compose(&p[0], &m[0]).map_err(|e| e.to_string());
        c.and_then(|c| {
            let expect = Matrix4::from_diagonal(&Vector4::new(-1.0, -1.0, 1.0, 1.0));
            assert_le("deviation", (c.matrix() - expect).abs().max(), 1e-14)
        })
    });
    r.check("decompose/reassemble on random curvature operators", {
        let mut rng = StdRng::seed_from_u64(seed ^ 0xf4);
        let mut res = Ok(());
        for _ in 0..200 {
            let rp = random_symmetric(&mut rng, 1.0);
            let mut rm = random_symmetric(&mut rng, 1.0);
            rm += Matrix3::identity() * ((rp.trace() - rm.trace()) / 3.0);
            let mixed = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let blocks = orbiflow_core::frame4::CurvBlocks {
                rplus: rp,
                rminus: rm,
                ric_mixed: mixed,
                scal: 4.0 * rp.trace(),
                wplus: rp - Matrix3::identity() * (rp.trace() / 3.0),
                wminus: rm - Matrix3::identity() * (rm.trace() / 3.0),
            };
            let riem = orbiflow_core::frame4::reassemble_curvature(&blocks, Orientation::Plus);
            let back = decompose_curvature(&riem, Orientation::Plus).map_err(|e| e.to_string());
            res = res.and(back.and_then(|b| {
                assert_le("rplus", (b.rplus - rp).abs().max(), 1e-12)
                    .and(assert_le("mixed", (b.ric_mixed - mixed).abs().max(), 1e-12))
            }));
        }
        res
    });
    r.check("rho isometry and scale invariance", {
        let mut rng = StdRng::seed_from_u64(seed ^ 0x9e);
        let mut res = Ok(());
        for _ in 0..50 {
            let x = Vector4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            if x.norm() < 1e-3 {
                continue;
            }
            let rho = RhoRotation::new(x).map_err(|e| e.to_string());
            res = res.and(rho.and_then(|rho| {
                let z = zeta_plus([rng.gen_range(-1.0..1.0), 0.3, -0.8]);
                let img = rho.apply(&z);
                assert_close("isometry", img.norm_sq(), z.norm_sq(), 1e-12)
            }));
        }
        res
    });
}

fn suite_cohom1(r: &mut Runner, seed: u64) {
    r.check("flat cone is flat", {
        let m = flat_cone(2, 10.0);
        let c = m.curvature_at(1.7).map_err(|e| e.to_string());
        c.and_then(|c| assert_le("|Rm|", c.riem.norm(), 1e-12))
    });
    r.check("unit suspension has scal 12 and rplus = Id", {
        let m = round_suspension(2);
        m.curvature_at(0.9)
            .map_err(|e| e.to_string())
            .and_then(|c| {
                assert_close("scal", c.scal, 12.0, 1e-10)?;
                let b = decompose_curvature(&c.riem, Orientation::Plus).map_err(|e| e.to_string())?;
                assert_le("rplus − Id", (b.rplus - Matrix3::identity()).abs().max(), 1e-10)
            })
    });
    r.check("structure equations vs finite-difference oracle", {
        let mut rng = StdRng::seed_from_u64(seed ^ 0xc1);
        let mut res = Ok(());
        for _ in 0..10 {
            let fam = rng.gen_range(0..3);
            let (metric, rr) = match fam {
                0 => (flat_cone(2, 10.0), rng.gen_range(0.5..5.0)),
                1 => (hyperbolic_suspension(2, 6.0), rng.gen_range(0.4..2.5)),
                _ => {
                    let z = ZetaParam::new([1.0, 0.0, 0.0]).unwrap();
                    (eh_metric(&z).unwrap(), rng.gen_range(0.4..2.5))
                }
            };
            let a = metric.curvature_at(rr).map_err(|e| e.to_string());
            let b = fd_oracle(&metric, rr).map_err(|e| e.to_string());
            res = res.and(a.and_then(|a| {
                b.and_then(|b| {
                    let mut dev = 0.0f64;
                    for i in 0..4 {
                        for j in 0..4 {
                            for k in 0..4 {
                                for l in 0..4 {
                                    dev = dev.max(
                                        (a.riem.comps[i][j][k][l] - b.riem.comps[i][j][k][l]).abs(),
                                    );
                                }
                            }
                        }
                    }
                    assert_le("componentwise", dev, 1e-5)
                })
            }));
        }
        res
    });
    r.check("first Bianchi identity", {
        let m = hyperbolic_suspension(2, 6.0);
        m.curvature_at(1.2)
            .map_err(|e| e.to_string())
            .and_then(|c| assert_le("violation", c.riem.max_first_bianchi_violation(), 1e-10))
    });
}

fn suite_eh(r: &mut Runner, seed: u64) {
    let mut rng = StdRng::seed_from_u64(seed ^ 0xe4);
    let z = ZetaParam::new([
        rng.gen_range(0.3..1.2),
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.5..0.5),
    ])
    .unwrap();
    r.check("Ricci-flat at 20 radii", {
        let m = eh_metric(&z).unwrap();
        let mut res = Ok(());
        for k in 0..20 {
            let rr = 0.05 + 0.4 * k as f64;
            res = res.and(
                m.curvature_at(rr)
                    .map_err(|e| e.to_string())
                    .and_then(|c| assert_le("|Ric|", c.ricci.abs().max(), 1e-8)),
            );
        }
        res
    });
    r.check("pointwise norm 2ε⁴/(ε⁴+r⁴)", {
        let e4 = z.eps().powi(4);
        let mut res = Ok(());
        for k in 1..50 {
            let rr = 0.1 * k as f64;
            let o = o_tensors(&z, rr).unwrap();
            let expect = 2.0 * e4 / (e4 + rr.powi(4));
            for t in &o {
                res = res.and(assert_close("norm", t.norm(), expect, 1e-10));
            }
            res = res.and(assert_close("formula", o_pointwise_norm(&z, rr), expect, 1e-14));
        }
        res
    });
    r.check("L² norms 2π²|ζ|² and orthogonality", {
        let n2 = z.norm() * z.norm();
        let expect = 2.0 * PI * PI * n2;
        let mut res = Ok(());
        for i in 1..=3 {
            let v = l2_pairing(&z, i, i).map_err(|e| e.to_string());
            res = res.and(v.and_then(|v| assert_close("diag", v, expect, 1e-4 * expect)));
        }
        res = res.and(
            l2_pairing(&z, 1, 2)
                .map_err(|e| e.to_string())
                .and_then(|v| assert_le("offdiag", v.abs(), 1e-6 * n2)),
        );
        res
    });
    r.check("potential: Δu = 4, o₁ = g − Hess u", {
        let m = eh_metric(&z).unwrap();
        let mut res = Ok(());
        for k in 1..20 {
            let rr = 0.15 * k as f64;
            let (_, du, ddu) = potential_u(&z, rr);
            res = res.and(
                m.radial_laplacian(rr, du, ddu)
                    .map_err(|e| e.to_string())
                    .and_then(|lap| assert_close("Δu", lap, 4.0, 1e-8)),
            );
            let hess = potential_hessian(&z, rr).unwrap();
            let o1 = o_tensors(&z, rr).unwrap()[0];
            res = res.and(assert_le(
                "o₁ identity",
                (Matrix4::identity() - hess - o1).abs().max(),
                1e-8,
            ));
        }
        res
    });
    r.check("Lichnerowicz kernel: O(h²) residual, trace/div ≤ 1e-10", {
        let unit = ZetaParam::new([1.0, 0.0, 0.0]).unwrap();
        let mut res = Ok(());
        for i in 1..=3 {
            let r1 = lichnerowicz_residual(&unit, i, 1.0, 3.0, 129).unwrap();
            let r2 = lichnerowicz_residual(&unit, i, 1.0, 3.0, 257).unwrap();
            let ratio = r1 / r2;
            if !(3.5..=4.5).contains(&ratio) {
                res = res.and(Err(format!("o_{i} ratio {ratio}")));
            }
            let radii: Vec<f64> = (1..40).map(|k| 0.12 * k as f64).collect();
            let (tr, div) = kernel_gauge_residual(&unit, i, &radii).unwrap();
            res = res
                .and(assert_le("trace", tr, 1e-10))
                .and(assert_le("divergence", div, 1e-10));
        }
        res
    });
    r.check("suspension eigenfunction identities", {
        let mut res = Ok(());
        for theta in [0.3, 1.1, 2.7] {
            let s = suspension_eigenfunction(theta).unwrap();
            res = res
                .and(assert_le("Δv + 4v", s.laplace_residual, 1e-8))
                .and(assert_le("Hess v + v g", s.hessian_residual, 1e-8));
        }
        res
    });
}

fn suite_stability(r: &mut Runner, seed: u64) {
    r.check("builtin registry matches expected verdicts", {
        let mut res = Ok(());
        for (name, data, expect) in builtin_models() {
            let v = classify(&data);
            if v.kind != expect {
                res = res.and(Err(format!("{name}: {:?}", v.kind)));
            }
        }
        res
    });
    r.check("pairing reads off −R⁺₁ᵢ (5 random)", {
        let mut rng = StdRng::seed_from_u64(seed ^ 0x5a);
        let mut res = Ok(());
        for _ in 0..5 {
            let rp = random_symmetric(&mut rng, 1.5);
            let z = ZetaParam::new([0.8, -0.3, 0.4]).unwrap();
            let lam = obstruction_pairing(&rp, &z);
            let f = z.frame();
            let adapted = f.transpose() * rp * f;
            for i in 0..3 {
                res = res.and(assert_close(
                    "λ",
                    lam[i],
                    -adapted[(0, i)],
                    1e-3,
                ));
            }
            let gen = pairing_generator(&rp, &z);
            let expect = 2.0 * rp * z.zeta();
            res = res.and(assert_le("generator", (gen - expect).norm(), 1e-3 * expect.norm().max(1.0)));
        }
        res
    });
    r.check("classification is conjugation invariant", {
        let mut rng = StdRng::seed_from_u64(seed ^ 0x5b);
        let mut res = Ok(());
        for _ in 0..50 {
            let d = orbiflow_core::stability::SolitonPointData {
                lambda: rng.gen_range(-2.0..2.0),
                scal: rng.gen_range(-8.0..8.0),
                rplus: random_symmetric(&mut rng, 2.0),
                f_hess_coeffs: None,
            };
            let axis = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let rot = nalgebra::Rotation3::new(axis).matrix().clone_owned();
            let mut dr = d.clone();
            dr.rplus = rot * d.rplus * rot.transpose();
            if classify(&d).kind != classify(&dr).kind {
                res = res.and(Err("verdict changed under rotation".to_string()));
            }
        }
        res
    });
}

fn suite_flow(r: &mut Runner, seed: u64) {
    r.check("semigroup property of the exact flow", {
        let m = Matrix3::new(0.3, 0.1, -0.2, 0.1, -0.5, 0.4, -0.2, 0.4, 0.8);
        let z0 = Vector3::new(1.0, 2.0, -1.0);
        let a = zeta_exact(0.7, &m, &zeta_exact(0.4, &m, &z0));
        let b = zeta_exact(1.1, &m, &z0);
        assert_le("deviation", (a - b).norm(), 1e-12)
    });
    r.check("Duhamel sandwich trials", {
        let lam0 = 2.0;
        let eta0 = 2.6;
        let m = Matrix3::identity() * (lam0 / 2.0);
        let z0 = Vector3::new(4.0, 1.0, -2.0);
        let (c1, c2) = sandwich_constants(z0.norm(), eta0, lam0, 1.0);
        let mut rng = StdRng::seed_from_u64(seed ^ 0xf1);
        let mut res = Ok(());
        for _ in 0..100 {
            let a: [f64; 3] = core::array::from_fn(|_| rng.gen_range(0.5..4.0));
            let b: [f64; 3] = core::array::from_fn(|_| rng.gen_range(0.0..6.28));
            let f = move |s: f64| {
                Vector3::new(
                    (a[0] * s + b[0]).sin(),
                    (a[1] * s + b[1]).sin(),
                    (a[2] * s + b[2]).sin(),
                ) * ((eta0 * s).exp() / 3f64.sqrt())
            };
            let eta = EtaPerturbation { f: &f, eta0, bound: 1.0 };
            for t in [-3.0, -1.0] {
                let z = zeta_duhamel(t, &m, &z0, &eta, 0.0, Direction::Ancient)
                    .map_err(|e| e.to_string());
                res = res.and(z.and_then(|z| {
                    let ratio = z.norm() * (-lam0 * t).exp();
                    if ratio >= c1 - 1e-9 && ratio <= c2 + 1e-9 {
                        Ok(())
                    } else {
                        Err(format!("ratio {ratio} outside [{c1}, {c2}]"))
                    }
                }));
            }
        }
        res
    });
    r.check("parameter validation suite", {
        let pass = FlowParams {
            lambda0: 2.0,
            sigma: 0.1,
            delta_exp: 0.57,
            iota: 0.5,
            eta0: 2.08,
            direction: Direction::Ancient,
        };
        let v = validate_params(&pass);
        let mut res = if v.ok { Ok(()) } else { Err(format!("{:?}", v.violations)) };
        let mut fail = pass;
        fail.delta_exp = 0.7;
        if validate_params(&fail).ok {
            res = res.and(Err("δ = 0.7 accepted".to_string()));
        }
        let mut boundary = pass;
        boundary.delta_exp = 5.0 / 9.0;
        if validate_params(&boundary).ok {
            res = res.and(Err("boundary δ accepted".to_string()));
        }
        res
    });
    r.check("degenerate cubic flow vs closed form", {
        let c = 0.3;
        let z0 = Vector3::new(0.6, 0.0, 0.0);
        bk_degenerate_ode(c, &z0, 0.0, 1.5, 2000)
            .map_err(|e| e.to_string())
            .and_then(|path| {
                let mut res = Ok(());
                for (k, &t) in path.times.iter().enumerate() {
                    let expect = (z0.norm().sqrt().powi(-4) - 4.0 * c * t).powf(-0.25);
                    res = res.and(assert_close("ε(t)", path.eps[k], expect, 1e-7 * expect));
                }
                res
            })
    });
}

fn suite_glue(r: &mut Runner, _seed: u64) {
    let cfg = GlueConfig::for_eps(OrbifoldModel::SphericalSuspension, 1.0 / 16.0, 0.6);
    let gm = match build_glued(&cfg) {
        Ok(gm) => gm,
        Err(e) => {
            r.check("build glued metric", Err(e.to_string()));
            return;
        }
    };
    r.check("build glued metric", Ok(()));
    r.check("region identities bit-exact", {
        let mut res = Ok(());
        for slot in 0..4 {
            for rr in [gm.delta / 4.0, 2.5 * gm.delta] {
                if gm.assembled_profile_sq(slot, rr).to_bits()
                    != gm.branch_profile_sq(slot, rr).to_bits()
                {
                    res = res.and(Err(format!("slot {slot} at {rr}")));
                }
            }
        }
        res
    });
    r.check("scan: sup|Rm| in the bubble region", {
        curvature_scan(&gm.metric, gm.lambda, &gm.grid, gm.delta)
            .map_err(|e| e.to_string())
            .and_then(|scan| assert_le("argmax radius", scan.argmax_rm_radius, 3.0 * gm.eps))
    });
    r.check("gram diagonal and conformal orthogonality", {
        gram_matrix(&gm).map_err(|e| e.to_string()).and_then(|g| {
            let norm = 2.0 * PI * PI * gm.eps.powi(4);
            let mut res = Ok(());
            for i in 0..3 {
                let ratio = g.get(i, i) / norm;
                if !(0.9..=1.1).contains(&ratio) {
                    res = res.and(Err(format!("diag {i} ratio {ratio}")));
                }
            }
            let gc = g.get(3, 4) / (g.get(3, 3).sqrt() * g.get(4, 4).sqrt());
            res.and(assert_le("⟨g,c⟩ normalized", gc.abs(), 1e-6))
        })
    });
}

fn suite_moduli(r: &mut Runner, seed: u64) {
    r.check("root system cardinalities", {
        let mut res = Ok(());
        for (ade, count) in [
            (AdeType::A(4), 20usize),
            (AdeType::D(4), 24),
            (AdeType::E6, 72),
            (AdeType::E7, 126),
            (AdeType::E8, 240),
        ] {
            let d = dynkin(ade).unwrap();
            if d.roots.len() != count {
                res = res.and(Err(format!("{ade:?}: {} roots", d.roots.len())));
            }
        }
        res
    });
    r.check("gram identity −2(I₃⊗A) and projection idempotence", {
        let d = dynkin(AdeType::D(5)).unwrap();
        let g = oij_gram(&d);
        let mut res = Ok(());
        for idx in 0..3 * d.k {
            if g[(idx, idx)] != 4.0 {
                res = res.and(Err("diagonal ≠ 4".to_string()));
            }
        }
        let mut rng = StdRng::seed_from_u64(seed ^ 0x30);
        let h = nalgebra::DMatrix::<f64>::from_fn(3, d.k, |_, _| rng.gen_range(-2.0..2.0));
        let c = l2_project(&d, &h);
        let h2 = pairings_of_coefficients(&d, &c);
        res.and(assert_le("idempotence", (&h2 - &h).abs().max(), 1e-12))
    });
    r.check("degeneracy detection and generic avoidance", {
        let d = dynkin(AdeType::A(2)).unwrap();
        let deg = PeriodPoint::new(vec![Vector3::new(1.0, 0.0, 0.0), Vector3::new(-1.0, 0.0, 0.0)]);
        let mut res = if is_degenerate(&d, &deg).0 {
            Ok(())
        } else {
            Err("root collision missed".to_string())
        };
        let mut rng = StdRng::seed_from_u64(seed ^ 0x31);
        for _ in 0..200 {
            let p = PeriodPoint::new(
                (0..2).map(|_| Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0))).collect(),
            );
            if is_degenerate(&d, &p).0 {
                res = res.and(Err("generic point flagged degenerate".to_string()));
            }
        }
        res
    });
    r.check("desingularization topology cases", {
        let a1 = |orientation| Singularity { ade: AdeType::A(1), orientation };
        let r1 = desingularization_topology(&OrbifoldTopology {
            chi_orb: 2,
            sigma_orb: 0,
            singularities: vec![a1(SingOrientation::Plus), a1(SingOrientation::Plus)],
        })
        .map_err(|e| e.to_string());
        r1.and_then(|t| {
            if (t.b_plus, t.b_minus) == (0, 2) {
                Ok(())
            } else {
                Err(format!("({}, {})", t.b_plus, t.b_minus))
            }
        })
    });
}

pub fn cmd_verify(mut a: VerifyArgs, cfg: &toml::Table) -> Result<i32> {
    cfg_str(&mut a.suite, cfg, "suite");
    cfg_u64(&mut a.seed, cfg, "seed");
    let suite = a.suite.unwrap_or_else(|| "all".into());
    let seed = a.seed.unwrap_or(0);
    let mut runner = Runner { failures: 0, checks: 0 };
    let known = ["frame4", "cohom1", "eh", "stability", "flow", "glue", "moduli"];
    if suite != "all" && !known.contains(&suite.as_str()) {
        bail!("unknown suite `{suite}` ({}|all)", known.join("|"));
    }
    let want = |name: &str| suite == "all" || suite == name;
    if want("frame4") {
        suite_frame4(&mut runner, seed);
    }
    if want("cohom1") {
        suite_cohom1(&mut runner, seed);
    }
    if want("eh") {
        suite_eh(&mut runner, seed);
    }
    if want("stability") {
        suite_stability(&mut runner, seed);
    }
    if want("flow") {
        suite_flow(&mut runner, seed);
    }
    if want("glue") {
        suite_glue(&mut runner, seed);
    }
    if want("moduli") {
        suite_moduli(&mut runner, seed);
    }
    println!(
        "{} checks, {} failures (suite {suite}, seed {seed})",
        runner.checks, runner.failures
    );
    Ok(if runner.failures == 0 { 0 } else { 1 })
}
