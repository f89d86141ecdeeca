use serde::{Deserialize, Serialize};

use crate::error::{Result, SptError};
use crate::landau::MinResult;
use crate::model::{Family, ModelSpec};

/// Product coherent-state ansatz `|α_min⟩ ⊗_i (sin θ_i, −cos θ_i)` and its cat projection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalState {
    /// `√C · u_min`.
    pub alpha_min: f64,
    pub thetas: Vec<f64>,
    /// Eigenvalue of `exp{iπ[a†a + Σ(1+σ_z)/2]}` carried by the cat superposition.
    pub parity_sector: i32,
    /// `(1/N) ⟨Σ σ_iz⟩` in the symmetry-broken product state.
    pub spin_z: f64,
}

fn theta(u: f64, gamma: f64, delta: f64) -> f64 {
    let x = 2.0 * u * gamma;
    let r = delta.hypot(x);
    // tan θ = x / (δ + r) = (r − δ) / x; pick the form without cancellation
    if delta >= 0.0 {
        x.atan2(delta + r)
    } else {
        (r - delta).atan2(x)
    }
}

/// Mean spin polarization `−(1/N) Σ δ_i / √(δ_i² + 4γ_i²u²)`.
pub fn spin_z_expectation(spec: &ModelSpec, u: f64) -> f64 {
    let n = spec.n_spins();
    let s: f64 = (0..n)
        .map(|i| {
            let d = spec.params.delta_i[i];
            let r = d.hypot(2.0 * spec.gamma(i) * u);
            if r == 0.0 {
                0.0
            } else {
                d / r
            }
        })
        .sum();
    -s / n as f64
}

pub fn variational_state(spec: &ModelSpec, min: &MinResult, c: f64) -> Result<VariationalState> {
    let product_form = match spec.family {
        Family::Dqr => true,
        Family::AnisoInhomogeneous => (0..spec.n_spins()).all(|i| spec.lambda(i) == 1.0),
        _ => false,
    };
    if !product_form {
        return Err(SptError::Unsupported(format!(
            "{:?} has no product-form variational ground state",
            spec.family
        )));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(SptError::Domain("macroscopicity C must be positive".into()));
    }
    let u = min.minima.first().and_then(|m| m.first()).copied().unwrap_or(0.0);
    let n = spec.n_spins();
    Ok(VariationalState {
        alpha_min: c.sqrt() * u,
        thetas: (0..n).map(|i| theta(u, spec.gamma(i), spec.params.delta_i[i])).collect(),
        parity_sector: if n % 2 == 1 { 1 } else { -1 },
        spin_z: spin_z_expectation(spec, u),
    })
}

/// Joint photon-number / spin distribution of a single-spin cat state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution {
    /// `P(n, ↑)` for `n = 0..len`.
    pub excited: Vec<f64>,
    /// `P(n, ↓)`.
    pub ground: Vec<f64>,
}

impl PhotonDistribution {
    pub fn total(&self, n: usize) -> f64 {
        self.excited.get(n).copied().unwrap_or(0.0) + self.ground.get(n).copied().unwrap_or(0.0)
    }

    pub fn mass(&self) -> f64 {
        self.excited.iter().chain(&self.ground).sum()
    }
}

/// `P_{2m+1,e} = 2 sin²θ Pois(2m+1)`, `P_{2m,g} = 2 cos²θ Pois(2m)` with mean `|α_min|²`.
///
/// `n_max` defaults to a cutoff twelve standard deviations above the mean.
pub fn photon_distribution_variational(vs: &VariationalState, n_max: Option<usize>) -> Result<PhotonDistribution> {
    if vs.thetas.len() != 1 {
        return Err(SptError::Unsupported("photon distribution requires a single spin".into()));
    }
    let mean = vs.alpha_min * vs.alpha_min;
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(SptError::Domain("cat state needs u_min > 0".into()));
    }
    let n_max = n_max.unwrap_or_else(|| (mean + 12.0 * mean.sqrt() + 30.0).ceil() as usize);
    let (s, c) = vs.thetas[0].sin_cos();
    let pois = poisson_weights(mean, n_max);
    let mut excited = vec![0.0; n_max + 1];
    let mut ground = vec![0.0; n_max + 1];
    for (n, p) in pois.into_iter().enumerate() {
        if n % 2 == 1 {
            excited[n] = 2.0 * s * s * p;
        } else {
            ground[n] = 2.0 * c * c * p;
        }
    }
    Ok(PhotonDistribution { excited, ground })
}

/// Poisson weights `0..=n_max` by ratio recurrence outward from the mode.
///
/// Summing `n ln μ − ln n!` directly loses about `1e-12` relative at `μ ~ 300` to cancellation.
fn poisson_weights(mean: f64, n_max: usize) -> Vec<f64> {
    let k = (mean.floor() as usize).min(n_max);
    let kf = k as f64;
    let ln_pk = if k < 40 {
        -mean + kf * mean.ln() - (1..=k).map(|j| (j as f64).ln()).sum::<f64>()
    } else {
        // Stirling with the 1/(12k) series; the large terms cancel analytically
        let corr = 1.0 / (12.0 * kf) - 1.0 / (360.0 * kf.powi(3)) + 1.0 / (1260.0 * kf.powi(5));
        kf * (mean / kf).ln() + (kf - mean) - 0.5 * (std::f64::consts::TAU * kf).ln() - corr
    };
    let mut w = vec![0.0; n_max + 1];
    w[k] = ln_pk.exp();
    for n in k + 1..=n_max {
        w[n] = w[n - 1] * mean / n as f64;
    }
    for n in (0..k).rev() {
        w[n] = w[n + 1] * (n + 1) as f64 / mean;
    }
    w
}
