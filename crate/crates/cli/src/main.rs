//! `orbiflow` — command-line surface of the toolkit: stability
//! classification, bubble-parameter flows, glued-metric curvature scans,
//! desingularization topology, invariant verification suites and time-scale
//! conversions. Every command is deterministic for a fixed seed and flag set.

mod glue_cmd;
mod parse;
mod verify;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nalgebra::{Matrix3, Vector3};
use orbiflow_core::flow::{
    tbar_from_that, unnormalized_scales, zeta_duhamel, Direction, EtaPerturbation, ZetaPath,
};
use orbiflow_core::moduli::{desingularization_topology, OrbifoldTopology};
use orbiflow_core::stability::{builtin_models, classify, SolitonPointData};
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "orbiflow", version, about = "Numerical toolkit for Ricci-flow bubble dynamics on 4-orbifolds")]
struct Cli {
    /// TOML configuration file whose sections mirror the subcommand flags;
    /// command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify orbifold-point stability from the weighted selfdual curvature.
    Classify(ClassifyArgs),
    /// Integrate the bubble-parameter flow and export the path as CSV.
    Flow(FlowArgs),
    /// Scan glued background metrics over a list of bubble sizes.
    GlueScan(glue_cmd::GlueScanArgs),
    /// Characteristic numbers of a desingularization from a JSON descriptor.
    Topology(TopologyArgs),
    /// Run a module's invariant suite; exit nonzero on any failure.
    Verify(verify::VerifyArgs),
    /// Convert between renormalized and unnormalized flow time scales.
    ConvertTime(ConvertArgs),
}

/// Per-command section of the optional TOML configuration.
#[derive(Deserialize, Default)]
#[serde(default)]
struct ConfigFile {
    classify: toml::Table,
    flow: toml::Table,
    glue_scan: toml::Table,
    topology: toml::Table,
    verify: toml::Table,
    convert_time: toml::Table,
}

fn load_config(path: &Option<PathBuf>) -> Result<ConfigFile> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            Ok(toml::from_str(&text).context("parsing config")?)
        }
    }
}

/// Fill an unset option from the config table.
fn cfg_str(slot: &mut Option<String>, table: &toml::Table, key: &str) {
    if slot.is_none() {
        if let Some(v) = table.get(key).and_then(|v| v.as_str()) {
            *slot = Some(v.to_string());
        }
    }
}

fn cfg_f64(slot: &mut Option<f64>, table: &toml::Table, key: &str) {
    if slot.is_none() {
        if let Some(v) = table.get(key) {
            *slot = v.as_float().or_else(|| v.as_integer().map(|i| i as f64));
        }
    }
}

fn cfg_u64(slot: &mut Option<u64>, table: &toml::Table, key: &str) {
    if slot.is_none() {
        if let Some(v) = table.get(key).and_then(|v| v.as_integer()) {
            *slot = Some(v as u64);
        }
    }
}

fn cfg_bool(slot: &mut bool, table: &toml::Table, key: &str) {
    if !*slot {
        if let Some(v) = table.get(key).and_then(|v| v.as_bool()) {
            *slot = v;
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    let config = load_config(&cli.config)?;
    match cli.command {
        Command::Classify(a) => cmd_classify(a, &config.classify),
        Command::Flow(a) => cmd_flow(a, &config.flow),
        Command::GlueScan(a) => glue_cmd::cmd_glue_scan(a, &config.glue_scan),
        Command::Topology(a) => cmd_topology(a, &config.topology),
        Command::Verify(a) => verify::cmd_verify(a, &config.verify),
        Command::ConvertTime(a) => cmd_convert_time(a, &config.convert_time),
    }
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, content).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

#[derive(Args)]
struct ClassifyArgs {
    /// Builtin model name (see --all-builtin for the list).
    #[arg(long, conflicts_with_all = ["file", "all_builtin"])]
    model: Option<String>,
    /// JSON file with point data {lambda, scal, rplus, f_hess_coeffs?}.
    #[arg(long, conflicts_with = "all_builtin")]
    file: Option<PathBuf>,
    /// Classify the whole builtin registry; exit nonzero on any mismatch
    /// with the expected verdicts.
    #[arg(long)]
    all_builtin: bool,
    /// Write the table to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct PointDataFile {
    lambda: f64,
    scal: f64,
    rplus: [[f64; 3]; 3],
    #[serde(default)]
    f_hess_coeffs: Option<[[f64; 3]; 3]>,
}

fn mat3(rows: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| rows[i][j])
}

fn classify_line(name: &str, d: &SolitonPointData) -> String {
    let v = classify(d);
    format!(
        "{name}  eigs: {},{},{}  verdict: {}",
        v.eigenvalues[0], v.eigenvalues[1], v.eigenvalues[2], v.kind
    )
}

fn cmd_classify(mut a: ClassifyArgs, cfg: &toml::Table) -> Result<i32> {
    cfg_str(&mut a.model, cfg, "model");
    cfg_bool(&mut a.all_builtin, cfg, "all_builtin");
    let mut out = String::new();
    let mut code = 0;
    if a.all_builtin {
        for (name, data, expect) in builtin_models() {
            let v = classify(&data);
            out.push_str(&classify_line(name, &data));
            if v.kind != expect {
                out.push_str(&format!("  MISMATCH(expected {expect:?})"));
                code = 1;
            }
            out.push('\n');
        }
    } else if let Some(name) = &a.model {
        let data = orbiflow_core::stability::lookup_model(name)?;
        out.push_str(&classify_line(name, &data));
        out.push('\n');
    } else if let Some(path) = &a.file {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let pd: PointDataFile = serde_json::from_str(&text).context("parsing point data")?;
        let data = SolitonPointData {
            lambda: pd.lambda,
            scal: pd.scal,
            rplus: mat3(&pd.rplus),
            f_hess_coeffs: pd.f_hess_coeffs.as_ref().map(mat3),
        };
        out.push_str(&classify_line(&path.display().to_string(), &data));
        out.push('\n');
    } else {
        bail!("one of --model, --file, --all-builtin is required");
    }
    write_or_print(&a.out, &out)?;
    Ok(code)
}

// ---------------------------------------------------------------------------
// flow
// ---------------------------------------------------------------------------

#[derive(Args)]
struct FlowArgs {
    /// Symmetric R⁺ as `a,b,c` (diagonal) or `a,b,c,d,e,f` (diagonal then
    /// upper off-diagonal (12),(13),(23)).
    #[arg(long, allow_hyphen_values = true)]
    rplus: Option<String>,
    /// Initial parameter `x,y,z`.
    #[arg(long, allow_hyphen_values = true)]
    zeta0: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    /// CSV file of an inhomogeneity η with header `t,eta_x,eta_y,eta_z`
    /// (linear interpolation); switches to the Duhamel integral.
    #[arg(long)]
    eta_file: Option<PathBuf>,
    /// Declared envelope rate η₀ of the inhomogeneity.
    #[arg(long)]
    eta0: Option<f64>,
    /// Declared envelope bound of the inhomogeneity.
    #[arg(long)]
    eta_bound: Option<f64>,
    /// Integrate an immortal (forward) flow instead of an ancient one.
    #[arg(long)]
    immortal: bool,
    /// Gluing-radius exponent for the δ(t) column.
    #[arg(long)]
    delta_exp: Option<f64>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON sidecar with the perturbed-flow sandwich constants (only written
    /// when an η file is supplied).
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

struct EtaTable {
    times: Vec<f64>,
    values: Vec<Vector3<f64>>,
}

impl EtaTable {
    fn load(path: &PathBuf) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (k, line) in text.lines().enumerate() {
            if k == 0 {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .with_context(|| format!("line {} of {}", k + 1, path.display()))?;
            if cols.len() != 4 {
                bail!("eta file needs 4 columns, line {} has {}", k + 1, cols.len());
            }
            times.push(cols[0]);
            values.push(Vector3::new(cols[1], cols[2], cols[3]));
        }
        if times.len() < 2 {
            bail!("eta file needs at least two samples");
        }
        Ok(Self { times, values })
    }

    fn eval(&self, t: f64) -> Vector3<f64> {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (hi + lo) / 2;
            if self.times[mid] > t {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let w = (t - self.times[lo]) / (self.times[hi] - self.times[lo]);
        self.values[lo] * (1.0 - w) + self.values[hi] * w
    }
}

fn cmd_flow(mut a: FlowArgs, cfg: &toml::Table) -> Result<i32> {
    cfg_str(&mut a.rplus, cfg, "rplus");
    cfg_str(&mut a.zeta0, cfg, "zeta0");
    cfg_f64(&mut a.t0, cfg, "t0");
    cfg_f64(&mut a.t1, cfg, "t1");
    cfg_u64(&mut a.steps, cfg, "steps");
    cfg_f64(&mut a.eta0, cfg, "eta0");
    cfg_f64(&mut a.eta_bound, cfg, "eta_bound");
    cfg_f64(&mut a.delta_exp, cfg, "delta_exp");
    cfg_bool(&mut a.immortal, cfg, "immortal");

    let direction = if a.immortal { Direction::Immortal } else { Direction::Ancient };
    let rplus = parse::sym3(a.rplus.as_deref().unwrap_or("1,1,1"))?;
    let zeta0 = parse::vec3(a.zeta0.as_deref().unwrap_or("1,0,0"))?;
    let (t0, t1) = match direction {
        Direction::Ancient => (a.t0.unwrap_or(-10.0), a.t1.unwrap_or(0.0)),
        Direction::Immortal => (a.t0.unwrap_or(0.0), a.t1.unwrap_or(10.0)),
    };
    let steps = a.steps.unwrap_or(200) as usize;
    let delta_exp = a.delta_exp.unwrap_or(0.6);
    // Relevant eigenvalue of 2R⁺: smallest for ancient, largest for immortal
    // (both carry the direction's sign).
    let eig = (rplus * 2.0).symmetric_eigen().eigenvalues;
    let lambda0 = match direction {
        Direction::Ancient => eig.iter().cloned().fold(f64::MAX, f64::min),
        Direction::Immortal => eig.iter().cloned().fold(f64::MIN, f64::max),
    };

    let csv;
    let mut sidecar_json = None;
    match &a.eta_file {
        None => {
            let path = ZetaPath::sample_exact(&rplus, &zeta0, lambda0, delta_exp, t0, t1, steps);
            csv = path.to_csv();
        }
        Some(p) => {
            let table = EtaTable::load(p)?;
            let eta0 = a.eta0.unwrap_or(lambda0.abs() * 1.3);
            let bound = a.eta_bound.unwrap_or(1.0);
            let horizon = match direction {
                Direction::Ancient => t1,
                Direction::Immortal => t0,
            };
            let f = |s: f64| table.eval(s);
            let eta = EtaPerturbation { f: &f, eta0, bound };
            let mut obs_min = f64::MAX;
            let mut obs_max = f64::MIN;
            let mut path =
                ZetaPath { times: vec![], zetas: vec![], eps0: vec![], eps: vec![], delta: vec![] };
            for k in 0..=steps {
                let t = t0 + (t1 - t0) * k as f64 / steps as f64;
                let z = zeta_duhamel(t, &rplus, &zeta0, &eta, horizon, direction)?;
                if z.norm() < 1e-12 * zeta0.norm() {
                    bail!("parameter crossed zero near t = {t}");
                }
                let ratio = z.norm() * (-lambda0 * t).exp();
                obs_min = obs_min.min(ratio);
                obs_max = obs_max.max(ratio);
                path.push(t, z, lambda0, delta_exp);
            }
            csv = path.to_csv();
            let (c1, c2) =
                orbiflow_core::flow::sandwich_constants(zeta0.norm(), eta0, lambda0, bound);
            sidecar_json = Some(serde_json::json!({
                "lambda0": lambda0,
                "eta0": eta0,
                "bound": bound,
                "c1": c1,
                "c2": c2,
                "observed_min": obs_min,
                "observed_max": obs_max,
                "within_sandwich": obs_min >= c1 - 1e-9 && obs_max <= c2 + 1e-9,
            }));
        }
    }
    write_or_print(&a.out, &csv)?;
    if let Some(json) = sidecar_json {
        if let Some(p) = &a.sidecar {
            std::fs::write(p, serde_json::to_string_pretty(&json)? + "\n")?;
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// topology
// ---------------------------------------------------------------------------

#[derive(Args)]
struct TopologyArgs {
    /// JSON descriptor {chi_orb, sigma_orb, singularities:[{type,k,orientation}]}.
    /// Orientation labels follow the aggregate signature convention
    /// σ = S⁻ − S⁺; "+" is the hyperkähler (anti-selfdual) gluing.
    #[arg(long)]
    orbifold: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_topology(mut a: TopologyArgs, cfg: &toml::Table) -> Result<i32> {
    if a.orbifold.is_none() {
        if let Some(v) = cfg.get("orbifold").and_then(|v| v.as_str()) {
            a.orbifold = Some(PathBuf::from(v));
        }
    }
    let path = a.orbifold.as_ref().context("--orbifold <json> is required")?;
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let desc: OrbifoldTopology = serde_json::from_str(&text).context("parsing descriptor")?;
    let result = desingularization_topology(&desc)?;
    let json = serde_json::to_string_pretty(&result)? + "\n";
    write_or_print(&a.out, &json)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// convert-time
// ---------------------------------------------------------------------------

#[derive(Args)]
struct ConvertArgs {
    /// Einstein constant Λ ≠ 0.
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Renormalized time t̄ (forward conversion).
    #[arg(long, conflicts_with = "that", allow_negative_numbers = true)]
    tbar: Option<f64>,
    /// Unnormalized time t̂ (inverse conversion).
    #[arg(long, allow_negative_numbers = true)]
    that: Option<f64>,
    /// Selfdual curvature for the parameter scaling (default identity).
    #[arg(long, allow_hyphen_values = true)]
    rplus: Option<String>,
    /// Initial parameter for the scaling (default 1,0,0).
    #[arg(long, allow_hyphen_values = true)]
    zeta0: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_convert_time(mut a: ConvertArgs, cfg: &toml::Table) -> Result<i32> {
    cfg_f64(&mut a.lambda, cfg, "lambda");
    cfg_f64(&mut a.tbar, cfg, "tbar");
    cfg_f64(&mut a.that, cfg, "that");
    cfg_str(&mut a.rplus, cfg, "rplus");
    cfg_str(&mut a.zeta0, cfg, "zeta0");
    let lambda = a.lambda.context("--lambda is required")?;
    let rplus = parse::sym3(a.rplus.as_deref().unwrap_or("1,1,1"))?;
    let zeta0 = parse::vec3(a.zeta0.as_deref().unwrap_or("1,0,0"))?;
    let tbar = match (a.tbar, a.that) {
        (Some(t), None) => t,
        (None, Some(th)) => tbar_from_that(lambda, th)?,
        _ => bail!("exactly one of --tbar, --that is required"),
    };
    let s = unnormalized_scales(lambda, tbar, &rplus, &zeta0)?;
    let json = serde_json::json!({
        "lambda": lambda,
        "tbar": tbar,
        "that": s.that,
        "metric_scale": s.metric_scale,
        "zeta_hat": [s.zeta_hat[0], s.zeta_hat[1], s.zeta_hat[2]],
    });
    write_or_print(&a.out, &(serde_json::to_string_pretty(&json)? + "\n"))?;
    Ok(0)
}
