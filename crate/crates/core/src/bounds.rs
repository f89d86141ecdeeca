//! Coherent-state sandwich `Z̃ ≤ Z ≤ e^{βΣω_ν} Z̃` checked against truncated exact traces.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ed::{build_hamiltonian, eigenvalues, ln_partition_from_spectrum, HilbertSpec};
use crate::error::{Result, SptError};
use crate::model::{Family, PhysicalParams};
use crate::numerics::{gauss_hermite, ln_2cosh, log_sum_exp};
use crate::spinblock::{build_h_xyz, jacobi_eigen, XyzParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    /// Gauss–Hermite nodes per active axis.
    pub nodes: usize,
    /// Relative change of `Z̃` under node doubling above which the quadrature is rejected.
    pub doubling_tol: f64,
    /// Largest tensor dimension attempted.
    pub max_active_axes: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { nodes: 80, doubling_tol: 1e-6, max_active_axes: 3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Quad {
    X,
    Y,
}

#[derive(Clone, Copy, Debug)]
struct Axis {
    mode: usize,
    quad: Quad,
    /// Gaussian exponent extracted into the Hermite weight.
    a: f64,
    /// Full exponent `βω_ν` of `|α_ν|²`.
    full: f64,
}

fn check_inputs(p: &PhysicalParams, family: Family, beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(SptError::Domain("bounds need a finite positive β".into()));
    }
    if p.omega.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(SptError::InvalidParams("mode frequencies must be positive".into()));
    }
    if 2.0 * p.g_prime.abs() >= p.omega[0] {
        return Err(SptError::Domain("two-photon coupling violates |g'| < ω/2".into()));
    }
    if family == Family::TwoQubitXyz && p.n_spins() != 2 {
        return Err(SptError::InvalidParams("XYZ model needs two spins".into()));
    }
    Ok(())
}

fn active_axes(p: &PhysicalParams, family: Family, beta: f64) -> Vec<Axis> {
    let n = p.n_spins();
    let mut axes = Vec::new();
    for (nu, w) in p.omega.iter().enumerate() {
        let coupled = (0..n).any(|i| p.g_at(i, nu) != 0.0);
        let two_photon = nu == 0 && p.g_prime != 0.0;
        let full = beta * w;
        let a = if two_photon { beta * (w - 2.0 * p.g_prime.abs()) } else { full };
        if coupled || two_photon {
            axes.push(Axis { mode: nu, quad: Quad::X, a, full });
        }
        let y_coupled = family != Family::TwoQubitXyz && (0..n).any(|i| p.g_at(i, nu) != 0.0 && p.lambda_at(i) != 1.0);
        if y_coupled || two_photon {
            axes.push(Axis { mode: nu, quad: Quad::Y, a, full });
        }
    }
    axes
}

/// `ln Tr_spin exp(−β h(α))` with `a → α` in the spin Hamiltonian.
fn ln_spin_trace(p: &PhysicalParams, family: Family, beta: f64, x: &[f64], y: &[f64]) -> f64 {
    let n = p.n_spins();
    if family == Family::TwoQubitXyz {
        let xp = XyzParams { gamma: [p.g_at(0, 0), p.g_at(1, 0)], delta: [p.delta[0], p.delta[1]], epsilon: p.j_alpha };
        // build_h_xyz couples 2γu σ_x; with γ = g and u = Re α this is the a → α symbol
        let e = jacobi_eigen(&build_h_xyz(x[0], &xp)).values;
        let terms: Vec<f64> = e.iter().map(|l| -beta * l).collect();
        return log_sum_exp(&terms);
    }
    let norm = 1.0 / (n as f64).sqrt();
    let quad2 = x[0] * x[0] - y[0] * y[0];
    (0..n)
        .map(|i| {
            let lam = p.lambda_at(i);
            let mut bx = p.bias_at(i) + 2.0 * p.g_prime * quad2 / n as f64;
            let mut by = 0.0;
            for nu in 0..p.n_modes() {
                let g = p.g_at(i, nu) * norm;
                bx += g * (1.0 + lam) * x[nu];
                by -= g * (1.0 - lam) * y[nu];
            }
            let r = (p.delta[i] * p.delta[i] + bx * bx + by * by).sqrt();
            ln_2cosh(beta * r)
        })
        .sum()
}

fn ln_z_tilde_at(p: &PhysicalParams, family: Family, beta: f64, axes: &[Axis], nodes: usize) -> f64 {
    let m = p.n_modes();
    let (gx, gw) = gauss_hermite(nodes);
    let ln_w: Vec<f64> = gw.iter().map(|w| w.ln()).collect();
    let total = nodes.pow(axes.len() as u32);
    // d²α/π per mode; inactive axes integrate to √(π/(βω_ν)), active ones carry 1/√a after scaling
    let mut prefactor = -(m as f64) * std::f64::consts::PI.ln();
    for (nu, w) in p.omega.iter().enumerate() {
        for quad in [Quad::X, Quad::Y] {
            match axes.iter().find(|ax| ax.mode == nu && ax.quad == quad) {
                Some(ax) => prefactor -= 0.5 * ax.a.ln(),
                None => prefactor += 0.5 * (std::f64::consts::PI / (beta * w)).ln(),
            }
        }
    }
    let terms: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|mut flat| {
            let mut x = vec![0.0; m];
            let mut y = vec![0.0; m];
            let mut acc = 0.0;
            for ax in axes.iter().rev() {
                let k = flat % nodes;
                flat /= nodes;
                let v = gx[k] / ax.a.sqrt();
                acc += ln_w[k] - (ax.full - ax.a) * v * v;
                match ax.quad {
                    Quad::X => x[ax.mode] = v,
                    Quad::Y => y[ax.mode] = v,
                }
            }
            acc + ln_spin_trace(p, family, beta, &x, &y)
        })
        .collect();
    prefactor + log_sum_exp(&terms)
}

/// `ln Z̃` and the relative change of `Z̃` when the node count is doubled.
///
/// `Z̃ = Π_ν ∫ d²α_ν/π e^{−βω_ν|α_ν|²} Tr_spin e^{−βh(α)}`, by tensor Gauss–Hermite over the
/// quadratures the spin Hamiltonian depends on; the rest integrate in closed form.
pub fn mean_field_ln_partition(p: &PhysicalParams, family: Family, beta: f64, q: &Quadrature) -> Result<(f64, f64)> {
    check_inputs(p, family, beta)?;
    let axes = active_axes(p, family, beta);
    if axes.len() > q.max_active_axes {
        return Err(SptError::Unsupported(format!("{}-dimensional quadrature exceeds the limit {}", axes.len(), q.max_active_axes)));
    }
    let coarse = ln_z_tilde_at(p, family, beta, &axes, q.nodes);
    let fine = if axes.is_empty() { coarse } else { ln_z_tilde_at(p, family, beta, &axes, 2 * q.nodes) };
    let rel = (fine - coarse).exp_m1().abs();
    if !fine.is_finite() || rel > q.doubling_tol {
        return Err(SptError::NonConvergence(format!("quadrature doubling changed Z̃ by {rel:e} relative")));
    }
    Ok((fine, rel))
}

pub fn mean_field_partition(p: &PhysicalParams, family: Family, beta: f64, q: &Quadrature) -> Result<f64> {
    Ok(mean_field_ln_partition(p, family, beta, q)?.0.exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    #[serde(rename = "Z_tilde")]
    pub z_tilde: f64,
    #[serde(rename = "Z")]
    pub z: f64,
    /// `e^{βΣω_ν} Z̃`.
    pub upper: f64,
    /// `(Z − Z̃, upper − Z)`.
    pub margins: (f64, f64),
    pub ln_z_tilde: f64,
    pub ln_z: f64,
    pub quadrature_error_estimate: f64,
    /// `|Z(n_max) − Z(n_max')|` for the reference cutoff and a smaller one.
    pub truncation_error_estimate: f64,
    pub beta: f64,
    pub n_max: usize,
}

impl BoundsReport {
    /// Both margins non-negative up to `rel_tol·Z` plus the numerical error estimates.
    pub fn holds(&self, rel_tol: f64) -> bool {
        let slack = rel_tol * self.z + self.quadrature_error_estimate + self.truncation_error_estimate;
        self.margins.0 >= -slack && self.margins.1 >= -slack
    }
}

fn ln_z_exact(p: &PhysicalParams, family: Family, beta: f64, h: &HilbertSpec) -> Result<f64> {
    Ok(ln_partition_from_spectrum(&eigenvalues(&build_hamiltonian(p, family, h)?)?, beta))
}

/// Compare `Z̃` with the truncated trace at `h.n_max`; a cutoff `4/5` as large estimates the truncation error.
pub fn verify_bounds(p: &PhysicalParams, family: Family, beta: f64, h: &HilbertSpec, q: &Quadrature) -> Result<BoundsReport> {
    let (ln_zt, rel_q) = mean_field_ln_partition(p, family, beta, q)?;
    let ln_z = ln_z_exact(p, family, beta, h)?;
    let smaller = HilbertSpec { n_max: (h.n_max * 4 / 5).max(1), ..*h };
    let ln_z_small = ln_z_exact(p, family, beta, &smaller)?;
    let z = ln_z.exp();
    let z_tilde = ln_zt.exp();
    let sum_omega: f64 = p.omega.iter().sum();
    let upper = (ln_zt + beta * sum_omega).exp();
    if !(z > 0.0 && z_tilde > 0.0 && z.is_finite() && upper.is_finite()) {
        return Err(SptError::Domain("partition functions out of floating-point range".into()));
    }
    Ok(BoundsReport {
        z_tilde,
        z,
        upper,
        margins: (z - z_tilde, upper - z),
        ln_z_tilde: ln_zt,
        ln_z,
        quadrature_error_estimate: rel_q * upper,
        truncation_error_estimate: (z - ln_z_small.exp()).abs(),
        beta,
        n_max: h.n_max,
    })
}
