//! Microbenchmarks of the numerical kernels: pointwise curvature evaluation,
//! the finite-difference oracle, deformation pairings, the obstruction
//! quadrature, Duhamel integration, glued-metric assembly and the E8 root
//! enumeration.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use nalgebra::{Matrix3, Vector3};
use orbiflow_core::cohom1::fd_oracle;
use orbiflow_core::eh_deform::{eh_metric, l2_pairing, ZetaParam};
use orbiflow_core::flow::{zeta_duhamel, Direction, EtaPerturbation};
use orbiflow_core::frame4::{decompose_curvature, Orientation};
use orbiflow_core::glue::{build_glued, curvature_scan, gram_matrix, GlueConfig, OrbifoldModel};
use orbiflow_core::moduli::{dynkin, AdeType};
use orbiflow_core::stability::obstruction_pairing;

fn bench_curvature(c: &mut Criterion) {
    let z = ZetaParam::new([1.0, 0.0, 0.0]).unwrap();
    let m = eh_metric(&z).unwrap();
    c.bench_function("eh_curvature_at", |b| {
        b.iter(|| m.curvature_at(black_box(1.3)).unwrap())
    });
    c.bench_function("eh_curvature_decompose", |b| {
        b.iter(|| {
            let p = m.curvature_at(black_box(1.3)).unwrap();
            decompose_curvature(&p.riem, Orientation::Plus).unwrap()
        })
    });
    c.bench_function("fd_oracle", |b| b.iter(|| fd_oracle(&m, black_box(1.3)).unwrap()));
}

fn bench_pairings(c: &mut Criterion) {
    let z = ZetaParam::new([0.7, -0.2, 0.4]).unwrap();
    c.bench_function("l2_pairing_diag", |b| b.iter(|| l2_pairing(&z, 1, 1).unwrap()));
    let rp = Matrix3::new(0.4, 0.2, -0.1, 0.2, -0.6, 0.3, -0.1, 0.3, 0.9);
    c.bench_function("obstruction_pairing", |b| {
        b.iter(|| obstruction_pairing(black_box(&rp), &z))
    });
}

fn bench_flow(c: &mut Criterion) {
    let m = Matrix3::identity();
    let z0 = Vector3::new(3.0, -1.0, 0.5);
    let f = |s: f64| Vector3::new((3.0 * s).exp(), 0.0, 0.0) * 0.5;
    c.bench_function("zeta_duhamel", |b| {
        b.iter(|| {
            let eta = EtaPerturbation { f: &f, eta0: 3.0, bound: 1.0 };
            zeta_duhamel(black_box(-3.0), &m, &z0, &eta, 0.0, Direction::Ancient).unwrap()
        })
    });
}

fn bench_glue(c: &mut Criterion) {
    let cfg = GlueConfig::for_eps(OrbifoldModel::SphericalSuspension, 1.0 / 16.0, 0.6);
    c.bench_function("build_glued", |b| b.iter(|| build_glued(black_box(&cfg)).unwrap()));
    let gm = build_glued(&cfg).unwrap();
    c.bench_function("curvature_scan_1200", |b| {
        b.iter(|| curvature_scan(&gm.metric, gm.lambda, &gm.grid, gm.delta).unwrap())
    });
    c.bench_function("gram_matrix", |b| b.iter(|| gram_matrix(&gm).unwrap()));
}

fn bench_moduli(c: &mut Criterion) {
    c.bench_function("dynkin_e8_roots", |b| b.iter(|| dynkin(black_box(AdeType::E8)).unwrap()));
}

criterion_group!(
    benches,
    bench_curvature,
    bench_pairings,
    bench_flow,
    bench_glue,
    bench_moduli
);
criterion_main!(benches);
