//! Critical lines: closed forms, scans along coupling rays, the XYZ discriminant route and phase grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SptError};
use crate::landau::{minimize_global, MinResult, ScanBudget};
use crate::model::{Beta, Family, ModelSpec};
use crate::numerics::{bisect_root, thermal_slope_over_r};
use crate::spinblock::{build_h_xyz, criticality_cubic, cubic_discriminant, cubic_double_root, smallest_eigenvalue, XyzParams};

/// Order parameters above this count as superradiant.
pub const SUPERRADIANT_U2: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    None,
    First,
    Second,
}

impl Order {
    pub fn as_str(self) -> &'static str {
        match self {
            Order::None => "none",
            Order::First => "first",
            Order::Second => "second",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Scan,
    Discriminant,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Scan => "scan",
            Method::Discriminant => "discriminant",
        }
    }
}

/// Path `origin + t · direction` in coupling space.
///
/// Couplings are per spin for the single-mode families, `(γ₁, γ₂)` for XYZ and per mode
/// for the multimode family. The two-photon coupling stays fixed along the path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: Vec<f64>,
    pub direction: Vec<f64>,
}

impl Ray {
    /// A ray through the coupling origin.
    pub fn radial(direction: Vec<f64>) -> Ray {
        Ray { origin: vec![0.0; direction.len()], direction }
    }

    /// Homogeneous couplings equal to `t` for all `n` entries.
    pub fn homogeneous(n: usize) -> Ray {
        Ray::radial(vec![1.0; n])
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        self.origin.iter().zip(&self.direction).map(|(o, d)| o + t * d).collect()
    }

    fn check(&self, spec: &ModelSpec) -> Result<()> {
        let n = spec.couplings().len();
        if self.origin.len() != n || self.direction.len() != n {
            return Err(SptError::ArityMismatch { expected: n, got: self.direction.len() });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub ray: Ray,
    /// Critical coupling along the ray; `None` when no transition was found.
    pub t_c: Option<f64>,
    pub order: Order,
    /// `u²` just past the transition on the superradiant side, extrapolated to `t_c`.
    pub jump: f64,
    pub method: Method,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub budget: ScanBudget,
    /// Coarse points along the coupling range before bisection.
    pub resolution: usize,
    /// Bisection stops once the bracket is narrower than this.
    pub t_tol: f64,
    /// Offset used for the one-sided jump measurement.
    pub jump_step: f64,
    /// Jumps at or above this are first order.
    pub jump_threshold: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { budget: ScanBudget::default(), resolution: 121, t_tol: 1e-6, jump_step: 1e-4, jump_threshold: 1e-4 }
    }
}

/// `γ_c = 1/√(2 tanh βΔ)`; infinite when `tanh βΔ` underflows.
pub fn critical_line_dqr(beta_delta: Beta) -> f64 {
    let t = match beta_delta {
        Beta::Infinite => 1.0,
        Beta::Finite(b) => b.tanh(),
    };
    if t <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / (2.0 * t).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    U,
    V,
}

/// `(1/N) Σ_i tanh(βΔ|δ_i|) γ_i²(1±λ_i)² / |δ_i| − 2`; superradiant in the branch iff `≥ 0`.
pub fn critical_condition_aniso(spec: &ModelSpec, branch: Branch) -> f64 {
    let n = spec.n_spins();
    let beta = spec.beta();
    let sign = match branch {
        Branch::U => 1.0,
        Branch::V => -1.0,
    };
    let sum: f64 = (0..n)
        .map(|i| {
            let c = (spec.gamma(i) * (1.0 + sign * spec.lambda(i))).powi(2);
            if c == 0.0 {
                0.0
            } else {
                c * thermal_slope_over_r(beta, spec.params.delta_i[i])
            }
        })
        .sum();
    sum / n as f64 - 2.0
}

/// Zero-temperature one-plus-two-photon line `2γ_c² + 4γ'² = 1` and jump `(2γ'/γ_c)²`.
pub fn critical_line_twophoton(gamma_prime: f64) -> Result<(f64, f64)> {
    if !(gamma_prime.abs() < 0.5) {
        return Err(SptError::Domain(format!("|gamma_prime| = {} must be below 1/2", gamma_prime.abs())));
    }
    let gc = ((1.0 - 4.0 * gamma_prime * gamma_prime) / 2.0).sqrt();
    Ok((gc, (2.0 * gamma_prime / gc).powi(2)))
}

/// Critical Euclidean norm `‖γ‖_c` from `1/‖γ‖_c² = (2/N) Σ tanh(βΔ|δ_i|)/|δ_i|`.
pub fn critical_line_multimode(spec: &ModelSpec) -> f64 {
    let beta = spec.beta();
    let n = spec.n_spins();
    let s: f64 = spec.params.delta_i.iter().map(|d| thermal_slope_over_r(beta, *d)).sum::<f64>() / n as f64;
    if s.is_infinite() {
        return 0.0;
    }
    if s <= 0.0 {
        return f64::INFINITY;
    }
    1.0 / (2.0 * s).sqrt()
}

/// The multimode potential restricted to the line through `γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultimodeReduction {
    /// Single-mode potential with coupling `‖γ‖` in the collinear coordinate.
    pub effective: ModelSpec,
    /// `γ / ‖γ‖`.
    pub unit: Vec<f64>,
}

impl MultimodeReduction {
    /// `u_ν = (γ_ν/‖γ‖) u_eff`.
    pub fn lift(&self, u_eff: f64) -> Vec<f64> {
        self.unit.iter().map(|e| e * u_eff).collect()
    }
}

pub fn multimode_reduce(spec: &ModelSpec) -> Result<MultimodeReduction> {
    if spec.family != Family::Multimode {
        return Err(SptError::Unsupported(format!("{:?} is not multimode", spec.family)));
    }
    let gammas = &spec.params.gamma_i_nu[0];
    let norm = gammas.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(SptError::Domain("multimode reduction needs a nonzero coupling vector".into()));
    }
    let n = spec.n_spins();
    let effective = ModelSpec::dqr_inhomogeneous(&vec![norm; n], &spec.params.delta_i, spec.beta());
    Ok(MultimodeReduction { effective, unit: gammas.iter().map(|g| g / norm).collect() })
}

/// Closed-form second-order coupling along a ray through the origin, from `φ''(0) = 0`.
///
/// Available for the DQR, anisotropic, Tavis–Cummings and multimode families; `None` elsewhere
/// or when the curvature never changes sign along the ray.
pub fn analytic_critical_t(spec: &ModelSpec, ray: &Ray) -> Option<f64> {
    if ray.origin.iter().any(|o| *o != 0.0) {
        return None;
    }
    let beta = spec.beta();
    let n = spec.n_spins() as f64;
    let d = &spec.params.delta_i;
    let weight = |c2: f64, i: usize| if c2 == 0.0 { 0.0 } else { c2 * thermal_slope_over_r(beta, d[i]) };
    // curvature(t) = 2 − t² k
    let k = match spec.family {
        Family::Dqr => (0..spec.n_spins()).map(|i| weight(4.0 * ray.direction[i].powi(2), i)).sum::<f64>() / n,
        Family::AnisoInhomogeneous | Family::TavisCummings => {
            let branch = |s: f64| {
                (0..spec.n_spins())
                    .map(|i| weight((ray.direction[i] * (1.0 + s * spec.lambda(i))).powi(2), i))
                    .sum::<f64>()
                    / n
            };
            branch(1.0).max(branch(-1.0))
        }
        Family::Multimode => {
            let g2: f64 = ray.direction.iter().map(|g| g * g).sum();
            (0..spec.n_spins()).map(|i| weight(4.0 * g2, i)).sum::<f64>() / n
        }
        _ => return None,
    };
    if k <= 0.0 {
        None
    } else if k.is_infinite() {
        Some(0.0)
    } else {
        Some((2.0 / k).sqrt())
    }
}

/// Corrected closed form for identical spins with isotropic exchange `ε`.
///
/// For `ε > |δ|/2` the lowest branch first touches `φ(0)` at `4γ² + δ²/(4γ²) = 4ε`, i.e.
/// `γ_c² = (2ε + √(4ε² − δ²))/4`, with jump `u² = 2√(4ε² − δ²)`. For `ε ≤ |δ|/2` the
/// transition is continuous at `γ_c² = |δ|/4`. Both coincide with `γ² = ε/2 = |δ|/4` on the line
/// `ε = |δ|/2`.
pub fn xyz_isotropic_closed_form(epsilon: f64, delta: f64) -> Result<TransitionRecord> {
    if !(epsilon >= 0.0 && delta != 0.0 && epsilon.is_finite() && delta.is_finite()) {
        return Err(SptError::Domain("isotropic closed form needs ε ≥ 0 and δ ≠ 0".into()));
    }
    let ad = delta.abs();
    let (t_c, order, jump) = if epsilon > ad / 2.0 {
        let root = (4.0 * epsilon * epsilon - delta * delta).sqrt();
        (((2.0 * epsilon + root) / 4.0).sqrt(), Order::First, 2.0 * root)
    } else {
        (ad.sqrt() / 2.0, Order::Second, 0.0)
    };
    Ok(TransitionRecord { ray: Ray::homogeneous(2), t_c: Some(t_c), order, jump, method: Method::Analytic })
}

/// Coupling `γ = √(ε/2)` where a metastable superradiant minimum first appears (isotropic, `ε > |δ|/2`).
pub fn xyz_isotropic_metastable_onset(epsilon: f64) -> f64 {
    (epsilon / 2.0).sqrt()
}

fn spec_on_ray(spec: &ModelSpec, ray: &Ray, t: f64) -> ModelSpec {
    spec.with_couplings(&ray.at(t))
}

fn order_parameter_at(spec: &ModelSpec, ray: &Ray, t: f64, budget: &ScanBudget) -> Result<MinResult> {
    minimize_global(&spec_on_ray(spec, ray, t), budget)
}

/// Order-parameter curve `(t, minimum)` along a ray.
pub fn order_parameter_curve(spec: &ModelSpec, ray: &Ray, ts: &[f64], budget: &ScanBudget) -> Result<Vec<(f64, MinResult)>> {
    ray.check(spec)?;
    ts.par_iter().map(|t| order_parameter_at(spec, ray, *t, budget).map(|m| (*t, m))).collect()
}

fn grid(t_range: (f64, f64), n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|k| t_range.0 + (t_range.1 - t_range.0) * k as f64 / (n - 1) as f64).collect()
}

/// Every normal/superradiant switch along the ray inside `t_range`, in increasing `t`.
pub fn critical_scan_all(spec: &ModelSpec, ray: &Ray, t_range: (f64, f64), opts: &ScanOptions) -> Result<Vec<TransitionRecord>> {
    spec.ensure_valid()?;
    ray.check(spec)?;
    if !spec.origin_is_extremum() {
        return Ok(Vec::new());
    }
    let ts = grid(t_range, opts.resolution);
    let sr: Vec<bool> = ts
        .par_iter()
        .map(|t| order_parameter_at(spec, ray, *t, &opts.budget).map(|m| m.u2() > SUPERRADIANT_U2))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for k in 0..ts.len() - 1 {
        if sr[k] == sr[k + 1] {
            continue;
        }
        let (mut a, mut b) = (ts[k], ts[k + 1]);
        let sr_at_b = sr[k + 1];
        while (b - a).abs() > opts.t_tol {
            let m = 0.5 * (a + b);
            let is_sr = order_parameter_at(spec, ray, m, &opts.budget)?.u2() > SUPERRADIANT_U2;
            if is_sr == sr_at_b {
                b = m;
            } else {
                a = m;
            }
        }
        let t_c = 0.5 * (a + b);
        let h = if sr_at_b { opts.jump_step } else { -opts.jump_step };
        let u1 = order_parameter_at(spec, ray, t_c + h, &opts.budget)?.u2();
        let u2 = order_parameter_at(spec, ray, t_c + 2.0 * h, &opts.budget)?.u2();
        let jump = (2.0 * u1 - u2).max(0.0);
        let order = if jump >= opts.jump_threshold { Order::First } else { Order::Second };
        out.push(TransitionRecord { ray: ray.clone(), t_c: Some(t_c), order, jump, method: Method::Scan });
    }
    Ok(out)
}

/// First transition along the ray; `order = none` when the range holds none (or the family has no origin extremum).
pub fn critical_scan(spec: &ModelSpec, ray: &Ray, t_range: (f64, f64), opts: &ScanOptions) -> Result<TransitionRecord> {
    let all = critical_scan_all(spec, ray, t_range, opts)?;
    Ok(all.into_iter().next().unwrap_or(TransitionRecord {
        ray: ray.clone(),
        t_c: None,
        order: Order::None,
        jump: 0.0,
        method: Method::Scan,
    }))
}

/// XYZ phase classification from the criticality cubic alone.
#[derive(Clone, Copy, Debug, PartialEq)]
struct CubicPhase {
    /// `P(0)`, carrying the sign of `φ''(0)`.
    p0: f64,
    superradiant: bool,
    discriminant: f64,
}

fn cubic_phase(p: &XyzParams) -> CubicPhase {
    let cubic = criticality_cubic(p);
    let w_max = {
        let r = 1.0 + 2.0 * (p.gamma[0].abs() + p.gamma[1].abs());
        r * r
    };
    // a positive root is physical when λ(0) − w is the lowest eigenvalue of h(√w): φ(√w) = φ(0)
    let crossing = cubic.positive_roots(w_max).into_iter().any(|w| {
        let lmin = smallest_eigenvalue(&build_h_xyz(w.sqrt(), p));
        let target = cubic.lambda0 - w;
        let valid = (lmin - target).abs() <= 1e-7 * (1.0 + cubic.lambda0.abs() + w);
        // a sign change (not a touching root) means φ dips below φ(0)
        let dw = 1e-6 * (1.0 + w);
        valid && (cubic.eval(w - dw) > 0.0) != (cubic.eval(w + dw) > 0.0)
    });
    let p0 = cubic.coeffs[3];
    CubicPhase { p0, superradiant: p0 < 0.0 || crossing, discriminant: cubic_discriminant(&cubic.coeffs).value }
}

/// Transitions of the zero-temperature XYZ model located from `P(0)` sign changes (second order)
/// and discriminant zeros with a physical double root (first order).
pub fn xyz_discriminant_scan(spec: &ModelSpec, ray: &Ray, t_range: (f64, f64), opts: &ScanOptions) -> Result<Vec<TransitionRecord>> {
    spec.ensure_valid()?;
    ray.check(spec)?;
    if spec.family != Family::TwoQubitXyz || !spec.beta().is_infinite() {
        return Err(SptError::Unsupported("discriminant method needs the zero-temperature XYZ model".into()));
    }
    let base = XyzParams::from_spec(spec)?;
    let at = |t: f64| {
        let g = ray.at(t);
        base.with_gamma([g[0], g[1]])
    };
    let ts = grid(t_range, opts.resolution.max(400));
    let phases: Vec<CubicPhase> = ts.iter().map(|t| cubic_phase(&at(*t))).collect();
    let mut out = Vec::new();
    for k in 0..ts.len() - 1 {
        if phases[k].superradiant == phases[k + 1].superradiant {
            continue;
        }
        let (a0, b0) = (ts[k], ts[k + 1]);
        let sr_at_b = phases[k + 1].superradiant;
        let second = (phases[k].p0 > 0.0) != (phases[k + 1].p0 > 0.0);
        let (t_c, order, jump) = if second {
            let t = bisect_root(|t| criticality_cubic(&at(t)).coeffs[3], a0, b0, 1e-13);
            (t, Order::Second, 0.0)
        } else {
            // narrow with the phase predicate, then locate the discriminant zero inside
            let (mut a, mut b) = (a0, b0);
            while b - a > 1e-9 {
                let m = 0.5 * (a + b);
                if cubic_phase(&at(m)).superradiant == sr_at_b {
                    b = m;
                } else {
                    a = m;
                }
            }
            let (da, db) = (cubic_phase(&at(a)).discriminant, cubic_phase(&at(b)).discriminant);
            let t = if (da > 0.0) != (db > 0.0) {
                bisect_root(|t| cubic_phase(&at(t)).discriminant, a, b, 1e-14)
            } else {
                0.5 * (a + b)
            };
            let w = cubic_double_root(&criticality_cubic(&at(t)).coeffs);
            (t, Order::First, w)
        };
        out.push(TransitionRecord { ray: ray.clone(), t_c: Some(t_c), order, jump, method: Method::Discriminant });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    /// Parameter name understood by [`set_parameter`].
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(name: &str, min: f64, max: f64, count: usize) -> Axis {
        Axis { name: name.to_string(), min, max, count }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n).map(|k| self.min + (self.max - self.min) * k as f64 / (n - 1) as f64).collect(),
        }
    }

    pub fn pitch(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.max - self.min) / (self.count - 1) as f64
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "normal")]
    Normal,
    #[serde(rename = "superradiant")]
    Superradiant,
    #[serde(rename = "edge-first")]
    EdgeFirst,
    #[serde(rename = "edge-second")]
    EdgeSecond,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Normal => "normal",
            Phase::Superradiant => "superradiant",
            Phase::EdgeFirst => "edge-first",
            Phase::EdgeSecond => "edge-second",
        }
    }

    pub fn is_superradiant(self) -> bool {
        self != Phase::Normal
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub param1: f64,
    pub param2: f64,
    pub order_parameter: f64,
    pub phase: Phase,
    pub phi_min: f64,
}

/// Rectangular grid, `param1` varying slowest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub axes: [Axis; 2],
    pub cells: Vec<PhaseCell>,
}

impl PhaseGrid {
    pub fn cell(&self, i: usize, j: usize) -> &PhaseCell {
        &self.cells[i * self.axes[1].count + j]
    }
}

/// Set a named scalar parameter on a copy of `spec`.
///
/// Names: `gamma` (every dipolar coupling), `gamma1`, `gamma2`, … (one coupling), `gamma_prime`,
/// `beta_delta`, `epsilon` (isotropic exchange), `epsilon_x|y|z`, `delta` (every δ_i),
/// `lambda` (every λ_i), `bias` (every ε_i).
pub fn set_parameter(spec: &ModelSpec, name: &str, value: f64) -> Result<ModelSpec> {
    let mut s = spec.clone();
    let p = &mut s.params;
    match name {
        "gamma" => {
            let n = spec.couplings().len();
            s = s.with_couplings(&vec![value; n]);
        }
        "gamma_prime" => p.gamma_prime = value,
        "beta_delta" => p.beta_delta = Beta::from_f64(value),
        "epsilon" => p.epsilon_alpha = [value; 3],
        "epsilon_x" => p.epsilon_alpha[0] = value,
        "epsilon_y" => p.epsilon_alpha[1] = value,
        "epsilon_z" => p.epsilon_alpha[2] = value,
        "delta" => p.delta_i.iter_mut().for_each(|d| *d = value),
        "lambda" => p.lambda_i = vec![value; p.delta_i.len()],
        "bias" => p.epsilon_bias_i = vec![value; p.delta_i.len()],
        other => {
            let idx = other
                .strip_prefix("gamma")
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|k| *k >= 1 && *k <= spec.couplings().len())
                .ok_or_else(|| SptError::InvalidParams(format!("unknown grid parameter {other:?}")))?;
            let mut g = spec.couplings();
            g[idx - 1] = value;
            s = s.with_couplings(&g);
        }
    }
    Ok(s)
}

/// Minimize on every grid cell and label phases; edge cells get a first/second-order guess from a
/// one-cell linear extrapolation of `u²` toward the neighbouring normal cell.
pub fn phase_diagram(spec: &ModelSpec, axes: [Axis; 2], budget: &ScanBudget) -> Result<PhaseGrid> {
    let xs = axes[0].values();
    let ys = axes[1].values();
    let ny = ys.len();
    // validate every cell spec up front so errors are deterministic
    let specs: Vec<ModelSpec> = xs
        .iter()
        .flat_map(|x| ys.iter().map(move |y| (*x, *y)))
        .map(|(x, y)| set_parameter(spec, &axes[0].name, x).and_then(|s| set_parameter(&s, &axes[1].name, y)))
        .collect::<Result<_>>()?;
    let mins: Vec<MinResult> = specs.par_iter().map(|s| minimize_global(s, budget)).collect::<Result<_>>()?;
    let u2: Vec<f64> = mins.iter().map(|m| m.u2()).collect();
    let sr = |i: usize, j: usize| u2[i * ny + j] > SUPERRADIANT_U2;
    let mut cells = Vec::with_capacity(mins.len());
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            let k = i * ny + j;
            let mut phase = if sr(i, j) { Phase::Superradiant } else { Phase::Normal };
            if phase == Phase::Superradiant {
                let dirs: [(i64, i64); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
                let mut edge = None;
                for (di, dj) in dirs {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= xs.len() as i64 || nj >= ny as i64 || sr(ni as usize, nj as usize) {
                        continue;
                    }
                    // the next cell on the far side, if it is superradiant too
                    let (fi, fj) = (i as i64 - di, j as i64 - dj);
                    let far = (fi >= 0 && fj >= 0 && fi < xs.len() as i64 && fj < ny as i64 && sr(fi as usize, fj as usize))
                        .then(|| u2[fi as usize * ny + fj as usize]);
                    let first = match far {
                        Some(uf) => {
                            let step = uf - u2[k];
                            let extrapolated = u2[k] - 0.5 * step;
                            extrapolated >= 1e-4 && extrapolated > step.abs()
                        }
                        None => u2[k] >= 1e-4,
                    };
                    edge = Some(if first { Phase::EdgeFirst } else { Phase::EdgeSecond });
                    if first {
                        break;
                    }
                }
                if let Some(e) = edge {
                    phase = e;
                }
            }
            cells.push(PhaseCell { param1: *x, param2: *y, order_parameter: u2[k], phase, phi_min: mins[k].phi_min });
        }
    }
    Ok(PhaseGrid { axes, cells })
}
