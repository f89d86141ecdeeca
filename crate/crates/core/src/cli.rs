//! `spt` command-line front end.
//!
//! Exit codes: 0 success, 1 other failure, 2 invalid input (violations as JSON lines on stderr),
//! 3 numerical non-convergence.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{verify_bounds, Quadrature};
use crate::critical::{
    critical_line_dqr, critical_line_multimode, critical_line_twophoton, critical_scan_all, order_parameter_curve, phase_diagram,
    xyz_discriminant_scan, xyz_isotropic_closed_form, Axis, Order, Ray, ScanOptions, TransitionRecord,
};
use crate::ed::{default_n_max, solve_lowest, solve_sector, write_matrix_dump, HilbertSpec};
use crate::error::{Result, SptError};
use crate::landau::{minimize_global, ScanBudget};
use crate::model::{Beta, Family, ModelSpec};
use crate::numerics::fmt_sig12;
use crate::spinblock::{photon_distribution_variational, variational_state};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "SPT_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "spt", version, about = "Landau-potential toolkit for superradiant phase transitions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form critical lines swept over one parameter (`min:max:count`).
    CriticalLine(Job),
    /// Locate transitions along a coupling ray (`--gamma min:max:step`).
    Scan(Job),
    /// Label phases on a grid spanned by two range flags (`min:max:count`).
    PhaseDiagram(Job),
    /// Order parameter along a coupling ray (`--gamma min:max:step`).
    OrderParameter(Job),
    /// Exact diagonalization of the finite model.
    Ed(Job),
    /// Variational and exact photon-number distributions of the single-spin cat state.
    PhotonDist(Job),
    /// Check the partition-function sandwich bounds.
    BoundsCheck(Job),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScanMethod {
    Scan,
    Discriminant,
}

#[derive(Args, Debug, Clone)]
pub struct Job {
    /// dqr, rabi, aniso, tavis-cummings, biased, two-photon, xyz, multimode.
    #[arg(long)]
    pub model: Option<String>,
    /// JSON model specification (replaces the model flags).
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub n_spins: usize,
    /// Common dipolar coupling: a value or a range.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    /// Per-spin couplings (per-mode for multimode), comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub gammas: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_prime: Option<String>,
    /// βΔ: a value, `inf`, or a range.
    #[arg(long, allow_hyphen_values = true)]
    pub beta_delta: Option<String>,
    /// Spin energies δ_i: comma list, or a single value or range applied to all spins.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Biases ε_i (biased), or exchange ε (one value or range) / (ε_x,ε_y,ε_z) (xyz).
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<String>,
    /// Scan direction in coupling space, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub direction: Option<String>,
    /// Δ/ω; sets the macroscopicity `C = NΔ/ω` (`Δ/ω` for xyz).
    #[arg(long)]
    pub delta_over_omega: Option<f64>,
    /// βω for bounds-check.
    #[arg(long)]
    pub beta_omega: Option<f64>,
    #[arg(long)]
    pub nmax: Option<usize>,
    /// photon, parity, energy, dist.
    #[arg(long, default_value = "photon")]
    pub observables: String,
    #[arg(long, default_value_t = 2)]
    pub states: usize,
    #[arg(long)]
    pub dump_matrix: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ScanMethod::Scan)]
    pub method: ScanMethod,
    #[arg(long, default_value_t = 2001)]
    pub points: usize,
    #[arg(long, default_value_t = 80)]
    pub quadrature_nodes: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: available parallelism, or the SPT_WORKERS variable).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Value1 {
    Scalar(f64),
    /// `min:max:x` with `x` a step or a count depending on the command.
    Range(f64, f64, f64),
}

impl Value1 {
    fn scalar(self) -> f64 {
        match self {
            Value1::Scalar(v) => v,
            Value1::Range(a, _, _) => a,
        }
    }
}

fn parse_number(s: &str) -> Result<f64> {
    let t = s.trim();
    match t {
        "inf" | "Inf" | "infinity" => Ok(f64::INFINITY),
        _ => t.parse::<f64>().map_err(|_| SptError::InvalidParams(format!("cannot parse number {t:?}"))),
    }
}

fn parse_value(s: &str) -> Result<Value1> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(Value1::Scalar(parse_number(v)?)),
        [a, b, c] => Ok(Value1::Range(parse_number(a)?, parse_number(b)?, parse_number(c)?)),
        _ => Err(SptError::InvalidParams(format!("expected a value or min:max:x, got {s:?}"))),
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_number).collect()
}

fn opt_value(s: &Option<String>) -> Result<Option<Value1>> {
    s.as_deref().map(parse_value).transpose()
}

fn family_from_name(name: &str) -> Result<Family> {
    Ok(match name.to_ascii_lowercase().as_str() {
        "dqr" | "dicke" | "rabi" => Family::Dqr,
        "aniso" | "anisotropic" => Family::AnisoInhomogeneous,
        "tc" | "tavis-cummings" => Family::TavisCummings,
        "biased" => Family::Biased,
        "two-photon" | "twophoton" => Family::TwoPhoton,
        "xyz" => Family::TwoQubitXyz,
        "multimode" => Family::Multimode,
        other => return Err(SptError::InvalidParams(format!("unknown model {other:?}"))),
    })
}

fn beta_of(v: f64) -> Beta {
    Beta::from_f64(v)
}

/// Broadcast a list flag (or a single value/range) to `n` entries.
fn per_spin(flag: &Option<String>, n: usize, default: f64) -> Result<Vec<f64>> {
    let Some(s) = flag else { return Ok(vec![default; n]) };
    if s.contains(':') {
        return Ok(vec![parse_value(s)?.scalar(); n]);
    }
    let v = parse_list(s)?;
    match v.len() {
        1 => Ok(vec![v[0]; n]),
        k if k == n => Ok(v),
        k => Err(SptError::InvalidParams(format!("expected 1 or {n} values, got {k}"))),
    }
}

/// Base model from the flags; ranges contribute their lower end.
fn build_spec(job: &Job) -> Result<ModelSpec> {
    let mut spec = match &job.model_file {
        Some(path) => ModelSpec::from_json(&std::fs::read_to_string(path)?)?,
        None => spec_from_flags(job)?,
    };
    if let Some(d) = job.delta_over_omega {
        let n = if spec.family == Family::TwoQubitXyz { 1.0 } else { spec.n_spins() as f64 };
        spec = spec.with_c(n * d);
    }
    Ok(spec)
}

fn spec_from_flags(job: &Job) -> Result<ModelSpec> {
    let name = job.model.as_deref().ok_or_else(|| SptError::InvalidParams("either --model or --model-file is required".into()))?;
    let family = family_from_name(name)?;
    let beta = beta_of(opt_value(&job.beta_delta)?.map_or(f64::INFINITY, Value1::scalar));
    let gamma = opt_value(&job.gamma)?.map_or(0.0, Value1::scalar);
    let gp = opt_value(&job.gamma_prime)?.map_or(0.0, Value1::scalar);
    let n = if name.eq_ignore_ascii_case("rabi") { 1 } else { job.n_spins };
    let spin_gammas = |n: usize| -> Result<Vec<f64>> {
        match &job.gammas {
            Some(s) => {
                let v = parse_list(s)?;
                if v.len() != n {
                    return Err(SptError::InvalidParams(format!("--gammas needs {n} values, got {}", v.len())));
                }
                Ok(v)
            }
            None => Ok(vec![gamma; n]),
        }
    };
    let deltas = per_spin(&job.delta, n, 1.0)?;
    let spec = match family {
        Family::Dqr => ModelSpec::dqr_inhomogeneous(&spin_gammas(n)?, &deltas, beta),
        Family::AnisoInhomogeneous => ModelSpec::aniso(&spin_gammas(n)?, &deltas, &per_spin(&job.lambda, n, 1.0)?, beta),
        Family::TavisCummings => ModelSpec::tavis_cummings(&spin_gammas(n)?, &deltas, beta),
        Family::Biased => ModelSpec::biased(&spin_gammas(n)?, &deltas, &per_spin(&job.epsilon, n, 0.0)?, beta),
        Family::TwoPhoton => {
            let mut s = ModelSpec::two_photon(gamma, gp, n, beta);
            s = s.with_couplings(&spin_gammas(n)?);
            s.params.delta_i = deltas;
            s
        }
        Family::TwoQubitXyz => {
            let mut g = match &job.gammas {
                Some(s) => {
                    let v = parse_list(s)?;
                    if v.len() != 2 {
                        return Err(SptError::InvalidParams("xyz takes two couplings".into()));
                    }
                    [v[0], v[1]]
                }
                None => [gamma; 2],
            };
            if let Some(v) = opt_value(&job.gamma1)? {
                g[0] = v.scalar();
            }
            if let Some(v) = opt_value(&job.gamma2)? {
                g[1] = v.scalar();
            }
            let d = per_spin(&job.delta, 2, 1.0)?;
            let eps = match &job.epsilon {
                None => [0.0; 3],
                Some(s) if s.contains(':') => [parse_value(s)?.scalar(); 3],
                Some(s) => match parse_list(s)?.as_slice() {
                    [e] => [*e; 3],
                    [x, y, z] => [*x, *y, *z],
                    _ => return Err(SptError::InvalidParams("--epsilon takes 1 or 3 values for xyz".into())),
                },
            };
            ModelSpec::xyz(g, [d[0], d[1]], eps, beta)
        }
        Family::Multimode => {
            let g = match &job.gammas {
                Some(s) => parse_list(s)?,
                None => vec![gamma; 2],
            };
            ModelSpec::multimode(&g, &deltas, beta)
        }
    };
    Ok(spec)
}

/// Range-valued flags in axis order, with the parameter names [`set_parameter`] understands.
fn range_flags(job: &Job, family: Family) -> Result<Vec<(String, (f64, f64, f64))>> {
    let eps_name = if family == Family::Biased { "bias" } else { "epsilon" };
    let flags: [(&str, &Option<String>); 8] = [
        ("gamma", &job.gamma),
        ("gamma1", &job.gamma1),
        ("gamma2", &job.gamma2),
        ("gamma_prime", &job.gamma_prime),
        ("beta_delta", &job.beta_delta),
        (eps_name, &job.epsilon),
        ("delta", &job.delta),
        ("lambda", &job.lambda),
    ];
    let mut out = Vec::new();
    for (name, flag) in flags {
        // comma lists are never ranges
        if let Some(s) = flag.as_deref().filter(|s| s.contains(':')) {
            if let Value1::Range(a, b, c) = parse_value(s)? {
                out.push((name.to_string(), (a, b, c)));
            }
        }
    }
    Ok(out)
}

fn count_of(x: f64) -> Result<usize> {
    if !(x >= 1.0 && x.fract() == 0.0) {
        return Err(SptError::InvalidParams(format!("grid count must be a positive integer, got {x}")));
    }
    Ok(x as usize)
}

fn step_grid(a: f64, b: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && b >= a) {
        return Err(SptError::InvalidParams("range needs min ≤ max and a positive step".into()));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| a + step * k as f64).collect())
}

fn ray_for(job: &Job, spec: &ModelSpec) -> Result<Ray> {
    let n = spec.couplings().len();
    let dir = match (&job.direction, &job.gammas) {
        (Some(d), _) => parse_list(d)?,
        (None, Some(_)) => spec.couplings(),
        (None, None) => vec![1.0; n],
    };
    if dir.len() != n {
        return Err(SptError::ArityMismatch { expected: n, got: dir.len() });
    }
    Ok(Ray::radial(dir))
}

/// The ray parameter range from `--gamma min:max:step`.
fn ray_range(job: &Job) -> Result<(f64, f64, f64)> {
    match opt_value(&job.gamma)? {
        Some(Value1::Range(a, b, s)) => Ok((a, b, s)),
        _ => Err(SptError::InvalidParams("--gamma min:max:step is required".into())),
    }
}

/// A rendered result: CSV table and/or JSON document, plus metadata for the sidecar.
struct Output {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    json: Option<Value>,
    meta: Value,
}

fn num(x: f64) -> String {
    fmt_sig12(x)
}

fn transition_rows(records: &[TransitionRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .map(|r| vec![r.t_c.map(num).unwrap_or_default(), r.order.as_str().into(), num(r.jump), r.method.as_str().into()])
        .collect()
}

fn run_critical_line(job: &Job, spec: &ModelSpec) -> Result<Output> {
    let ranges = range_flags(job, spec.family)?;
    let sweep = |name: &str, default: f64| -> Result<Vec<f64>> {
        match ranges.iter().find(|(n, _)| n == name) {
            Some((_, (a, b, c))) => Ok(Axis::new(name, *a, *b, count_of(*c)?).values()),
            None => Ok(vec![default]),
        }
    };
    let mut rows = Vec::new();
    let param = match spec.family {
        Family::Dqr => {
            for b in sweep("beta_delta", spec.beta().value())? {
                rows.push(vec![num(b), num(critical_line_dqr(Beta::from_f64(b))), num(0.0)]);
            }
            "beta_delta"
        }
        Family::Multimode => {
            for b in sweep("beta_delta", spec.beta().value())? {
                rows.push(vec![num(b), num(critical_line_multimode(&spec.clone().with_beta(Beta::from_f64(b)))), num(0.0)]);
            }
            "beta_delta"
        }
        Family::TwoPhoton => {
            for gp in sweep("gamma_prime", spec.params.gamma_prime)? {
                let (g, j) = critical_line_twophoton(gp)?;
                rows.push(vec![num(gp), num(g), num(j)]);
            }
            "gamma_prime"
        }
        Family::TwoQubitXyz => {
            let d = spec.params.delta_i[0];
            for e in sweep("epsilon", spec.params.epsilon_alpha[0])? {
                let r = xyz_isotropic_closed_form(e, d)?;
                rows.push(vec![num(e), r.t_c.map(num).unwrap_or_default(), num(r.jump)]);
            }
            "epsilon"
        }
        f => return Err(SptError::Unsupported(format!("no closed-form critical line for {f:?}"))),
    };
    let json = json!(rows.iter().map(|r| json!({"param": r[0], "gamma_c": r[1], "jump": r[2]})).collect::<Vec<_>>());
    Ok(Output { header: vec!["param", "gamma_c", "jump"], rows, json: Some(json), meta: json!({"param": param}) })
}

fn run_scan(job: &Job, spec: &ModelSpec, opts: &ScanOptions) -> Result<Output> {
    let ray = ray_for(job, spec)?;
    let (a, b, step) = ray_range(job)?;
    let opts = ScanOptions { resolution: step_grid(a, b, step)?.len(), ..*opts };
    let mut records = match job.method {
        ScanMethod::Scan => critical_scan_all(spec, &ray, (a, b), &opts)?,
        ScanMethod::Discriminant => xyz_discriminant_scan(spec, &ray, (a, b), &opts)?,
    };
    if records.is_empty() {
        records.push(TransitionRecord { ray: ray.clone(), t_c: None, order: Order::None, jump: 0.0, method: crate::critical::Method::Scan });
    }
    Ok(Output {
        header: vec!["t_c", "order", "jump", "method"],
        rows: transition_rows(&records),
        json: Some(serde_json::to_value(&records)?),
        meta: json!({"ray": ray, "t_range": [a, b], "scan": opts}),
    })
}

fn run_phase_diagram(job: &Job, spec: &ModelSpec, budget: &ScanBudget) -> Result<Output> {
    let ranges = range_flags(job, spec.family)?;
    if ranges.len() != 2 {
        return Err(SptError::InvalidParams(format!("phase-diagram needs exactly two range flags, got {}", ranges.len())));
    }
    let axes = [
        Axis::new(&ranges[0].0, ranges[0].1 .0, ranges[0].1 .1, count_of(ranges[0].1 .2)?),
        Axis::new(&ranges[1].0, ranges[1].1 .0, ranges[1].1 .1, count_of(ranges[1].1 .2)?),
    ];
    let grid = phase_diagram(spec, axes, budget)?;
    let rows = grid
        .cells
        .iter()
        .map(|c| vec![num(c.param1), num(c.param2), num(c.order_parameter), c.phase.as_str().into(), num(c.phi_min)])
        .collect();
    Ok(Output {
        header: vec!["param1", "param2", "order_parameter", "phase", "phi_min"],
        rows,
        json: Some(serde_json::to_value(&grid)?),
        meta: json!({"axes": grid.axes, "budget": budget}),
    })
}

fn run_order_parameter(job: &Job, spec: &ModelSpec, budget: &ScanBudget) -> Result<Output> {
    let ray = ray_for(job, spec)?;
    let (a, b, step) = ray_range(job)?;
    let ts = step_grid(a, b, step)?;
    let curve = order_parameter_curve(spec, &ray, &ts, budget)?;
    let rows = curve
        .iter()
        .map(|(t, m)| vec![num(*t), num(m.u2()), num(m.phi_min), num(m.location().first().copied().unwrap_or(0.0))])
        .collect();
    let json = json!(curve.iter().map(|(t, m)| json!({"t": t, "minimum": m})).collect::<Vec<_>>());
    Ok(Output { header: vec!["t", "order_parameter", "phi_min", "u"], rows, json: Some(json), meta: json!({"ray": ray, "budget": budget}) })
}

fn require_c(spec: &ModelSpec) -> Result<f64> {
    spec.macroscopicity().ok_or_else(|| SptError::InvalidParams("--delta-over-omega (or C in the model file) is required".into()))
}

fn auto_n_max(spec: &ModelSpec, budget: &ScanBudget) -> Result<usize> {
    let c = require_c(spec)?;
    Ok(default_n_max(c, minimize_global(spec, budget)?.u2()))
}

fn run_ed(job: &Job, spec: &ModelSpec, budget: &ScanBudget) -> Result<Output> {
    let p = spec.to_physical(1.0)?;
    let n_max = match job.nmax {
        Some(n) => n,
        None => auto_n_max(spec, budget)?,
    };
    let h = HilbertSpec::for_params(&p, n_max);
    if let Some(path) = &job.dump_matrix {
        write_matrix_dump(path, &crate::ed::build_hamiltonian(&p, spec.family, &h)?, spec.family, &h)?;
    }
    let r = solve_lowest(&p, spec.family, &h, job.states.max(1))?;
    let wanted: Vec<&str> = job.observables.split(',').map(str::trim).collect();
    let mut doc = serde_json::Map::new();
    doc.insert("n_max".into(), json!(n_max));
    doc.insert("dim".into(), json!(h.dim()));
    for w in &wanted {
        match *w {
            "photon" => doc.insert("photon_number".into(), json!(r.photon_number)),
            "parity" => doc.insert("parity".into(), json!(r.parity)),
            "energy" => doc.insert("energies".into(), json!(r.energies)),
            "dist" => doc.insert("distribution".into(), json!(r.distribution)),
            other => return Err(SptError::InvalidParams(format!("unknown observable {other:?}"))),
        };
    }
    let rows = (0..r.energies.len())
        .map(|k| vec![k.to_string(), num(r.energies[k]), num(r.photon_number[k].iter().sum()), num(r.parity[k])])
        .collect();
    Ok(Output {
        header: vec!["state", "energy", "photon_number", "parity"],
        rows,
        json: Some(Value::Object(doc)),
        meta: json!({"n_max": n_max, "n_max_rule": "max(40, ceil(C u^2 + 12 sqrt(C u^2)))", "budget": budget}),
    })
}

fn run_photon_dist(job: &Job, spec: &ModelSpec, budget: &ScanBudget) -> Result<Output> {
    let c = require_c(spec)?;
    let min = minimize_global(spec, budget)?;
    let vs = variational_state(spec, &min, c)?;
    let n_max = match job.nmax {
        Some(n) => n,
        None => default_n_max(c, min.u2()),
    };
    let var = photon_distribution_variational(&vs, Some(n_max))?;
    let p = spec.to_physical(1.0)?;
    let h = HilbertSpec::for_params(&p, n_max);
    let ed = solve_sector(&p, spec.family, &h, vs.parity_sector, 1)?;
    // spin configuration 0 is ↑
    let ed_up = |n: usize| ed.distribution[n][0];
    let ed_down = |n: usize| ed.distribution[n][1];
    let tv = 0.5 * (0..=n_max).map(|n| (var.excited[n] - ed_up(n)).abs() + (var.ground[n] - ed_down(n)).abs()).sum::<f64>();
    let rows: Vec<Vec<String>> = (0..=n_max)
        .map(|n| vec![n.to_string(), num(var.excited[n]), num(var.ground[n]), num(ed_up(n)), num(ed_down(n))])
        .collect();
    let json = json!({
        "variational": var,
        "ed": {"excited": (0..=n_max).map(ed_up).collect::<Vec<_>>(), "ground": (0..=n_max).map(ed_down).collect::<Vec<_>>()},
        "total_variation": tv,
        "photon_number_ed": ed.photon_number[0],
        "alpha_min_squared": vs.alpha_min * vs.alpha_min,
    });
    Ok(Output {
        header: vec!["n", "variational_excited", "variational_ground", "ed_excited", "ed_ground"],
        rows,
        json: Some(json),
        meta: json!({"n_max": n_max, "parity_sector": vs.parity_sector, "total_variation": tv}),
    })
}

fn run_bounds(job: &Job, spec: &ModelSpec, budget: &ScanBudget) -> Result<Output> {
    let beta_omega = job.beta_omega.ok_or_else(|| SptError::InvalidParams("--beta-omega is required".into()))?;
    let p = spec.to_physical(1.0)?;
    let n_max = match job.nmax {
        Some(n) => n,
        None => {
            let soft = 1.0 - 2.0 * p.g_prime.abs();
            let thermal = (30.0 / (beta_omega * soft)).ceil() as usize;
            auto_n_max(spec, budget)?.max(thermal)
        }
    };
    let q = Quadrature { nodes: job.quadrature_nodes, ..Quadrature::default() };
    let r = verify_bounds(&p, spec.family, beta_omega, &HilbertSpec::for_params(&p, n_max), &q)?;
    let holds = r.holds(1e-7);
    let mut doc = serde_json::to_value(&r)?;
    doc["holds"] = json!(holds);
    let rows = vec![vec![num(r.z_tilde), num(r.z), num(r.upper), num(r.margins.0), num(r.margins.1), holds.to_string()]];
    Ok(Output {
        header: vec!["Z_tilde", "Z", "upper", "lower_margin", "upper_margin", "holds"],
        rows,
        json: Some(doc),
        meta: json!({"n_max": n_max, "quadrature": q, "tolerance": 1e-7}),
    })
}

fn render_csv(out: &Output) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&out.header).map_err(csv_err)?;
    for r in &out.rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| SptError::Io(std::io::Error::other(e.to_string())))
}

fn csv_err(e: csv::Error) -> SptError {
    SptError::Io(std::io::Error::other(e.to_string()))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| SptError::Io(e.error))?;
    Ok(())
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Serialize)]
struct Meta<'a> {
    command: &'a str,
    model: &'a ModelSpec,
    defaults: Value,
    details: Value,
}

fn execute(command: &Command) -> Result<()> {
    let (name, job) = match command {
        Command::CriticalLine(j) => ("critical-line", j),
        Command::Scan(j) => ("scan", j),
        Command::PhaseDiagram(j) => ("phase-diagram", j),
        Command::OrderParameter(j) => ("order-parameter", j),
        Command::Ed(j) => ("ed", j),
        Command::PhotonDist(j) => ("photon-dist", j),
        Command::BoundsCheck(j) => ("bounds-check", j),
    };
    let json_only = matches!(command, Command::Ed(_) | Command::BoundsCheck(_));
    let format = job.format.unwrap_or(if json_only { Format::Json } else { Format::Csv });
    let spec = build_spec(job)?;
    spec.ensure_valid()?;
    let budget = ScanBudget { points: job.points, ..ScanBudget::default() };
    let opts = ScanOptions { budget, ..ScanOptions::default() };
    let out = match command {
        Command::CriticalLine(_) => run_critical_line(job, &spec)?,
        Command::Scan(_) => run_scan(job, &spec, &opts)?,
        Command::PhaseDiagram(_) => run_phase_diagram(job, &spec, &budget)?,
        Command::OrderParameter(_) => run_order_parameter(job, &spec, &budget)?,
        Command::Ed(_) => run_ed(job, &spec, &budget)?,
        Command::PhotonDist(_) => run_photon_dist(job, &spec, &budget)?,
        Command::BoundsCheck(_) => run_bounds(job, &spec, &budget)?,
    };
    let bytes = match format {
        Format::Csv => render_csv(&out)?,
        Format::Json => {
            let mut s = serde_json::to_string_pretty(out.json.as_ref().unwrap_or(&Value::Null))?;
            s.push('\n');
            s.into_bytes()
        }
    };
    match &job.output {
        Some(path) => {
            write_atomic(path, &bytes)?;
            let meta = Meta {
                command: name,
                model: &spec,
                defaults: json!({
                    "scan_points": ScanBudget::default().points,
                    "jump_threshold": ScanOptions::default().jump_threshold,
                    "n_max_rule": "max(40, ceil(C u^2 + 12 sqrt(C u^2)))",
                    "quadrature_nodes": Quadrature::default().nodes,
                }),
                details: out.meta,
            };
            let mut m = serde_json::to_string_pretty(&meta)?;
            m.push('\n');
            write_atomic(&sidecar_path(path), m.as_bytes())?;
        }
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

fn workers(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| std::env::var(WORKERS_ENV).ok()?.parse().ok()).filter(|n| *n > 0)
}

/// Map an error to its exit code, reporting it on stderr.
pub fn report(err: &SptError) -> i32 {
    match err {
        SptError::Validation(v) => {
            for violation in v {
                eprintln!("{}", serde_json::to_string(violation).expect("violation serializes"));
            }
            2
        }
        SptError::InvalidParams(_) | SptError::ArityMismatch { .. } | SptError::NonFinite(_) => {
            eprintln!("{}", json!({"code": "InvalidInput", "message": err.to_string()}));
            2
        }
        e if e.is_numerical() => {
            eprintln!("error: {e}");
            3
        }
        e => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Parse `argv` and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let job = match &cli.command {
        Command::CriticalLine(j)
        | Command::Scan(j)
        | Command::PhaseDiagram(j)
        | Command::OrderParameter(j)
        | Command::Ed(j)
        | Command::PhotonDist(j)
        | Command::BoundsCheck(j) => j,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers(job.workers) {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match pool.install(|| execute(&cli.command)) {
        Ok(()) => 0,
        Err(e) => report(&e),
    }
}
