//! The `glue-scan` subcommand: per-ε curvature scans of the glued background
//! metric, TSV exports, and a JSON summary with slope fits, Gram data and
//! pass/fail fields against the release thresholds.
//!
//! Scans over the ε list run in parallel; `ORBIFLOW_THREADS` caps the worker
//! count. Results are assembled in list order, so output is deterministic.

use crate::{cfg_f64, cfg_str, cfg_u64, parse};
use anyhow::{bail, Context, Result};
use clap::Args;
use orbiflow_core::glue::{
    build_glued, curvature_scan, gram_matrix, scaling_fit, CurvatureScan, GlueConfig, GramMatrix,
    OrbifoldModel,
};
use orbiflow_core::ZetaParam;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Args)]
pub struct GlueScanArgs {
    /// Orbifold model: `spherical` or `hyperbolic`.
    #[arg(long)]
    pub orbifold: Option<String>,
    /// Bubble direction `x,y,z` (scaled to |ζ| = ε² per sample).
    #[arg(long, allow_hyphen_values = true)]
    pub zeta: Option<String>,
    /// Gluing-radius exponent δ in δ(ε) = ε^δ.
    #[arg(long)]
    pub delta_exp: Option<f64>,
    /// Comma-separated bubble sizes, e.g. `0.125,0.0625,0.03125,0.015625`.
    #[arg(long)]
    pub eps_list: Option<String>,
    /// Radial grid resolution per scan.
    #[arg(long)]
    pub grid_n: Option<u64>,
    /// Output prefix: writes `<prefix>-eps<k>.tsv` and `<prefix>-summary.json`.
    #[arg(long)]
    pub out_prefix: Option<String>,
}

#[derive(Serialize)]
struct PerEps {
    eps: f64,
    delta: f64,
    sup_rm: f64,
    sup_rm_times_eps2: f64,
    sup_wplus: f64,
    sup_wplus_outer: f64,
    sup_scal_dev_outer: f64,
    sup_ric_dev_outer: f64,
    sup_rplus_dev_outer: f64,
    argmax_rm_radius: f64,
    gram_diag_over_2pi2eps4: Vec<f64>,
    gram_offdiag_max: f64,
    gram_g_c_normalized: Option<f64>,
    gram: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct Summary {
    orbifold: OrbifoldModel,
    delta_exp: f64,
    per_eps: Vec<PerEps>,
    /// Slope fits need ≥ 5 samples spanning a factor ≥ 8; absent otherwise.
    fits_valid: bool,
    rm_ratio: Option<f64>,
    rm_slope: Option<f64>,
    scal_slope: Option<f64>,
    wplus_slope: Option<f64>,
    gram_offdiag_exponent: Option<f64>,
    pass: Passes,
}

#[derive(Serialize)]
struct Passes {
    rm_ratio_le_3: bool,
    scal_slope_ge_03: bool,
    wplus_slope_ge_03: bool,
    gram_diag_within_10pct: bool,
    gram_offdiag_decays: bool,
    gram_g_c_orthogonal: bool,
}

fn scan_one(
    model: OrbifoldModel,
    dir: [f64; 3],
    eps: f64,
    delta_exp: f64,
    grid_n: usize,
) -> Result<(PerEps, CurvatureScan, GramMatrix)> {
    let norm = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    if norm == 0.0 {
        bail!("zeta direction must be nonzero");
    }
    let e2 = eps * eps / norm;
    let mut cfg = GlueConfig::for_eps(model, eps, delta_exp);
    cfg.zeta = ZetaParam::new([dir[0] * e2, dir[1] * e2, dir[2] * e2])?;
    cfg.grid.n = grid_n;
    let gm = build_glued(&cfg)?;
    let scan = curvature_scan(&gm.metric, gm.lambda, &gm.grid, gm.delta)?;
    let gram = gram_matrix(&gm)?;
    let norm4 = 2.0 * PI * PI * eps.powi(4);
    let mut diag = Vec::new();
    let mut off: f64 = 0.0;
    for i in 0..3 {
        diag.push(gram.get(i, i) / norm4);
        for j in 0..3 {
            if i != j {
                off = off.max(gram.get(i, j).abs());
            }
        }
    }
    let gc = if gram.dim() == 5 {
        Some(gram.get(3, 4) / (gram.get(3, 3).sqrt() * gram.get(4, 4).sqrt()))
    } else {
        None
    };
    let per = PerEps {
        eps,
        delta: gm.delta,
        sup_rm: scan.sup_rm,
        sup_rm_times_eps2: scan.sup_rm * eps * eps,
        sup_wplus: scan.sup_wplus,
        sup_wplus_outer: scan.sup_wplus_outer,
        sup_scal_dev_outer: scan.sup_scal_dev_outer,
        sup_ric_dev_outer: scan.sup_ric_dev_outer,
        sup_rplus_dev_outer: scan.sup_rplus_dev_outer,
        argmax_rm_radius: scan.argmax_rm_radius,
        gram_diag_over_2pi2eps4: diag,
        gram_offdiag_max: off,
        gram_g_c_normalized: gc,
        gram: gram.entries.clone(),
    };
    Ok((per, scan, gram))
}

fn thread_cap(n_jobs: usize) -> usize {
    let hw = std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1);
    let cap = std::env::var("ORBIFLOW_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(hw);
    cap.clamp(1, n_jobs.max(1))
}

pub fn cmd_glue_scan(mut a: GlueScanArgs, cfg: &toml::Table) -> Result<i32> {
    cfg_str(&mut a.orbifold, cfg, "orbifold");
    cfg_str(&mut a.zeta, cfg, "zeta");
    cfg_f64(&mut a.delta_exp, cfg, "delta_exp");
    cfg_str(&mut a.eps_list, cfg, "eps_list");
    cfg_u64(&mut a.grid_n, cfg, "grid_n");
    cfg_str(&mut a.out_prefix, cfg, "out_prefix");

    let model = match a.orbifold.as_deref().unwrap_or("spherical") {
        "spherical" => OrbifoldModel::SphericalSuspension,
        "hyperbolic" => OrbifoldModel::Hyperbolic,
        other => bail!("unknown orbifold `{other}` (spherical|hyperbolic)"),
    };
    let delta_exp = a.delta_exp.unwrap_or(0.6);
    // Schedule-compatible gluing exponents: the admissible window
    // (5/9, (3−σ)/(5−σ)) closes up to (5/9, 3/5] as σ → 0; the scan accepts
    // the closure so the limiting exponent 3/5 itself is usable.
    if !(delta_exp > 5.0 / 9.0 && delta_exp <= 0.6) {
        bail!("delta-exp = {delta_exp} outside the admissible window (5/9, 3/5]");
    }
    let dirv = parse::vec3(a.zeta.as_deref().unwrap_or("1,0,0"))?;
    let dir = [dirv[0], dirv[1], dirv[2]];
    let eps_list = parse::floats(
        a.eps_list
            .as_deref()
            .unwrap_or("0.125,0.0883883476483184,0.0625,0.0441941738241592,0.03125,0.015625"),
    )?;
    if eps_list.is_empty() {
        bail!("empty eps list");
    }
    let grid_n = a.grid_n.unwrap_or(1200) as usize;
    let prefix = a.out_prefix.clone().unwrap_or_else(|| "glue-scan".into());

    // Parallel scans over the ε list, capped by ORBIFLOW_THREADS, results by
    // index.
    let workers = thread_cap(eps_list.len());
    let mut results: Vec<Option<Result<(PerEps, CurvatureScan, GramMatrix)>>> =
        (0..eps_list.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks: Vec<Vec<usize>> = (0..workers)
            .map(|w| (0..eps_list.len()).filter(|k| k % workers == w).collect())
            .collect();
        let mut handles = Vec::new();
        for chunk in chunks {
            let eps_list = &eps_list;
            handles.push(scope.spawn(move || {
                chunk
                    .into_iter()
                    .map(|k| (k, scan_one(model, dir, eps_list[k], delta_exp, grid_n)))
                    .collect::<Vec<_>>()
            }));
        }
        for h in handles {
            for (k, r) in h.join().expect("scan worker") {
                results[k] = Some(r);
            }
        }
    });

    let mut per_eps = Vec::new();
    let mut scans = Vec::new();
    for r in results.into_iter() {
        let (per, scan, _gram) = r.expect("all scans scheduled")?;
        per_eps.push(per);
        scans.push(scan);
    }

    // TSV per ε: r, |Rm|, |Ric−Λg|, |R−4Λ|, |W⁺|.
    for (k, scan) in scans.iter().enumerate() {
        let mut tsv = String::from("r\trm\tric_dev\tscal_dev\twplus\n");
        for i in 0..scan.radii.len() {
            tsv.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                scan.radii[i], scan.rm[i], scan.ric_dev[i], scan.scal_dev[i], scan.wplus[i]
            ));
        }
        let path = format!("{prefix}-eps{k}.tsv");
        std::fs::write(&path, tsv).with_context(|| format!("writing {path}"))?;
    }

    let eps: Vec<f64> = per_eps.iter().map(|p| p.eps).collect();
    let rm: Vec<f64> = per_eps.iter().map(|p| p.sup_rm).collect();
    let scal: Vec<f64> = per_eps.iter().map(|p| p.sup_scal_dev_outer).collect();
    let wplus: Vec<f64> = per_eps.iter().map(|p| p.sup_wplus_outer).collect();
    let off: Vec<f64> = per_eps.iter().map(|p| p.gram_offdiag_max).collect();
    let fit_rm = scaling_fit(&eps, &rm, 2.0).ok();
    let fit_scal = scaling_fit(&eps, &scal, 0.0).ok();
    let fit_wp = scaling_fit(&eps, &wplus, 0.0).ok();
    let fits_valid = fit_rm.is_some();
    let floor = 1e-12 * 2.0 * PI * PI * eps.iter().fold(f64::MAX, |m, &e| m.min(e)).powi(4);
    let off_on_floor = off.iter().all(|&v| v <= floor);
    let fit_off = if off_on_floor {
        None
    } else {
        scaling_fit(&eps, &off, 0.0).ok().map(|f| f.slope)
    };
    let diag_ok = per_eps
        .iter()
        .flat_map(|p| p.gram_diag_over_2pi2eps4.iter())
        .all(|r| (0.9..=1.1).contains(r));
    let gc_ok = per_eps
        .iter()
        .filter_map(|p| p.gram_g_c_normalized)
        .all(|v| v.abs() < 1e-6);
    let pass = Passes {
        rm_ratio_le_3: fit_rm.as_ref().map(|f| f.max_over_min <= 3.0).unwrap_or(false),
        scal_slope_ge_03: fit_scal.as_ref().map(|f| f.slope >= 0.3).unwrap_or(false),
        wplus_slope_ge_03: fit_wp.as_ref().map(|f| f.slope >= 0.3).unwrap_or(false),
        gram_diag_within_10pct: diag_ok,
        gram_offdiag_decays: off_on_floor || fit_off.map(|s| s >= 5.3).unwrap_or(false),
        gram_g_c_orthogonal: gc_ok,
    };
    let summary = Summary {
        orbifold: model,
        delta_exp,
        per_eps,
        fits_valid,
        rm_ratio: fit_rm.as_ref().map(|f| f.max_over_min),
        rm_slope: fit_rm.as_ref().map(|f| f.slope),
        scal_slope: fit_scal.as_ref().map(|f| f.slope),
        wplus_slope: fit_wp.as_ref().map(|f| f.slope),
        gram_offdiag_exponent: fit_off,
        pass,
    };
    let path = format!("{prefix}-summary.json");
    std::fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n")
        .with_context(|| format!("writing {path}"))?;
    println!("wrote {} scans and {path}", eps.len());
    Ok(0)
}
