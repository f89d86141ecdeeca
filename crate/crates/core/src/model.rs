//! Model families, dimensionless parameter reduction and validation.
//!
//! Every evaluator in the crate consumes a [`ModelSpec`]: a family tag plus the
//! reduced parameter set. Physical parameters only appear on the way in
//! ([`reduce`]) and on the way out to exact diagonalization
//! ([`ModelSpec::to_physical`]).

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SptError};

/// An inverse temperature, possibly infinite (ground-state limit).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl Beta {
    pub fn is_infinite(self) -> bool {
        matches!(self, Beta::Infinite)
    }

    pub fn value(self) -> f64 {
        match self {
            Beta::Finite(b) => b,
            Beta::Infinite => f64::INFINITY,
        }
    }

    /// Maps `f64::INFINITY` onto [`Beta::Infinite`].
    pub fn from_f64(b: f64) -> Beta {
        if b == f64::INFINITY {
            Beta::Infinite
        } else {
            Beta::Finite(b)
        }
    }

    pub fn scaled(self, s: f64) -> Beta {
        match self {
            Beta::Finite(b) => Beta::Finite(b * s),
            Beta::Infinite => Beta::Infinite,
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Beta {
    type Err = SptError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Infinity" => Ok(Beta::Infinite),
            t => t
                .parse::<f64>()
                .map(Beta::from_f64)
                .map_err(|_| SptError::InvalidParams(format!("cannot parse inverse temperature {t:?}"))),
        }
    }
}

impl Serialize for Beta {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Beta::Finite(b) => s.serialize_f64(*b),
            Beta::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct BetaVisitor;
        impl Visitor<'_> for BetaVisitor {
            type Value = Beta;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive number or the string \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Beta, E> {
                Ok(Beta::from_f64(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Beta, E> {
                Ok(Beta::Finite(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Beta, E> {
                Ok(Beta::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Beta, E> {
                v.parse().map_err(|_| E::invalid_value(de::Unexpected::Str(v), &self))
            }
        }
        d.deserialize_any(BetaVisitor)
    }
}

/// How the reference spin energy Δ is averaged from the individual `|Δ_i|`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanRule {
    #[default]
    ArithmeticAbs,
    Rms,
}

impl MeanRule {
    pub fn mean(self, values: &[f64]) -> f64 {
        let n = values.len() as f64;
        match self {
            MeanRule::ArithmeticAbs => values.iter().map(|v| v.abs()).sum::<f64>() / n,
            MeanRule::Rms => (values.iter().map(|v| v * v).sum::<f64>() / n).sqrt(),
        }
    }
}

/// Hamiltonian parameters in physical units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Boson energy per mode.
    pub omega: Vec<f64>,
    #[serde(rename = "Delta_i")]
    pub delta: Vec<f64>,
    /// Dipole couplings, one row per spin and one column per mode.
    #[serde(rename = "g_i_nu")]
    pub g: Vec<Vec<f64>>,
    #[serde(rename = "lambda_i", default)]
    pub lambda: Vec<f64>,
    #[serde(rename = "e_i", default)]
    pub bias: Vec<f64>,
    #[serde(default)]
    pub g_prime: f64,
    #[serde(rename = "J_alpha", default)]
    pub j_alpha: [f64; 3],
    pub beta: Beta,
}

impl PhysicalParams {
    pub fn n_spins(&self) -> usize {
        self.delta.len()
    }

    pub fn n_modes(&self) -> usize {
        self.omega.len()
    }

    /// Rotating/counter-rotating weight for spin `i` (1 when unspecified).
    pub fn lambda_at(&self, i: usize) -> f64 {
        self.lambda.get(i).copied().unwrap_or(1.0)
    }

    pub fn bias_at(&self, i: usize) -> f64 {
        self.bias.get(i).copied().unwrap_or(0.0)
    }

    pub fn g_at(&self, i: usize, nu: usize) -> f64 {
        self.g.get(i).and_then(|row| row.get(nu)).copied().unwrap_or(0.0)
    }
}

/// Dimensionless parameters consumed by every evaluator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    /// `γ_iν = g_iν / sqrt(Δ ω_ν)`.
    pub gamma_i_nu: Vec<Vec<f64>>,
    /// `δ_i = Δ_i / Δ`, sign preserved.
    pub delta_i: Vec<f64>,
    #[serde(default)]
    pub lambda_i: Vec<f64>,
    #[serde(default)]
    pub epsilon_bias_i: Vec<f64>,
    #[serde(default)]
    pub gamma_prime: f64,
    #[serde(default)]
    pub epsilon_alpha: [f64; 3],
    #[serde(rename = "beta_Delta")]
    pub beta_delta: Beta,
    /// Macroscopicity; only needed when comparing against finite-size diagonalization.
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(rename = "Delta_ref", default = "one")]
    pub delta_ref: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_rule: Option<MeanRule>,
}

fn one() -> f64 {
    1.0
}

/// Reduce physical parameters to dimensionless form.
pub fn reduce(p: &PhysicalParams, rule: MeanRule) -> Result<ReducedParams> {
    let n = p.n_spins();
    let m = p.n_modes();
    if m == 0 {
        return Err(SptError::InvalidParams("at least one boson mode is required".into()));
    }
    if n == 0 {
        return Err(SptError::InvalidParams("at least one spin is required".into()));
    }
    if p.omega.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(SptError::InvalidParams("boson energies must be positive and finite".into()));
    }
    if !p.g.is_empty() && (p.g.len() != n || p.g.iter().any(|row| row.len() != m)) {
        return Err(SptError::InvalidParams(format!("couplings must form a {n}x{m} table")));
    }
    let delta_ref = rule.mean(&p.delta);
    if !(delta_ref.is_finite() && delta_ref > 0.0) {
        return Err(SptError::InvalidParams("mean spin energy vanishes".into()));
    }
    if p.g_prime != 0.0 && p.g_prime.abs() / p.omega[0] >= 0.5 {
        return Err(SptError::InvalidParams(format!(
            "two-photon coupling |g'|/omega = {} violates the stability bound 1/2",
            p.g_prime.abs() / p.omega[0]
        )));
    }
    let gamma_i_nu = (0..n)
        .map(|i| (0..m).map(|nu| p.g_at(i, nu) / (delta_ref * p.omega[nu]).sqrt()).collect())
        .collect();
    Ok(ReducedParams {
        gamma_i_nu,
        delta_i: p.delta.iter().map(|d| d / delta_ref).collect(),
        lambda_i: p.lambda.clone(),
        epsilon_bias_i: p.bias.iter().map(|e| e / delta_ref).collect(),
        gamma_prime: p.g_prime / p.omega[0],
        epsilon_alpha: p.j_alpha.map(|j| j / delta_ref),
        beta_delta: p.beta.scaled(delta_ref),
        c: Some(n as f64 * delta_ref / p.omega[0]),
        delta_ref,
        mean_rule: Some(rule),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "DQR")]
    Dqr,
    AnisoInhomogeneous,
    TavisCummings,
    Biased,
    TwoPhoton,
    #[serde(rename = "TwoQubitXYZ")]
    TwoQubitXyz,
    Multimode,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Dqr,
        Family::AnisoInhomogeneous,
        Family::TavisCummings,
        Family::Biased,
        Family::TwoPhoton,
        Family::TwoQubitXyz,
        Family::Multimode,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationCode {
    NonFiniteParameter,
    EmptySpinSet,
    ShapeMismatch,
    FamilyShapeMismatch,
    StabilityViolation,
    NonPositiveBeta,
    NonPositiveDeltaRef,
    NonPositiveMacroscopicity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

impl Violation {
    fn new(code: ViolationCode, message: impl Into<String>) -> Self {
        Violation { code, message: message.into() }
    }
}

/// A model family together with its reduced parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub params: ReducedParams,
}

impl ModelSpec {
    fn base(family: Family, gamma_i_nu: Vec<Vec<f64>>, delta_i: Vec<f64>, beta_delta: Beta) -> Self {
        ModelSpec {
            family,
            params: ReducedParams {
                gamma_i_nu,
                delta_i,
                lambda_i: Vec::new(),
                epsilon_bias_i: Vec::new(),
                gamma_prime: 0.0,
                epsilon_alpha: [0.0; 3],
                beta_delta,
                c: None,
                delta_ref: 1.0,
                mean_rule: None,
            },
        }
    }

    /// Homogeneous Dicke / quantum Rabi model with `n` identical spins (`δ = 1`).
    pub fn dqr(gamma: f64, n: usize, beta_delta: Beta) -> Self {
        Self::base(Family::Dqr, vec![vec![gamma]; n], vec![1.0; n], beta_delta)
    }

    /// Inhomogeneous Dicke model: per-spin couplings and spin energies.
    pub fn dqr_inhomogeneous(gammas: &[f64], deltas: &[f64], beta_delta: Beta) -> Self {
        Self::base(Family::Dqr, gammas.iter().map(|g| vec![*g]).collect(), deltas.to_vec(), beta_delta)
    }

    pub fn aniso(gammas: &[f64], deltas: &[f64], lambdas: &[f64], beta_delta: Beta) -> Self {
        let mut s = Self::base(
            Family::AnisoInhomogeneous,
            gammas.iter().map(|g| vec![*g]).collect(),
            deltas.to_vec(),
            beta_delta,
        );
        s.params.lambda_i = lambdas.to_vec();
        s
    }

    pub fn tavis_cummings(gammas: &[f64], deltas: &[f64], beta_delta: Beta) -> Self {
        Self::base(
            Family::TavisCummings,
            gammas.iter().map(|g| vec![*g]).collect(),
            deltas.to_vec(),
            beta_delta,
        )
    }

    pub fn biased(gammas: &[f64], deltas: &[f64], biases: &[f64], beta_delta: Beta) -> Self {
        let mut s = Self::base(Family::Biased, gammas.iter().map(|g| vec![*g]).collect(), deltas.to_vec(), beta_delta);
        s.params.epsilon_bias_i = biases.to_vec();
        s
    }

    /// One- plus two-photon Dicke model with `n` identical spins.
    pub fn two_photon(gamma: f64, gamma_prime: f64, n: usize, beta_delta: Beta) -> Self {
        let mut s = Self::base(Family::TwoPhoton, vec![vec![gamma]; n], vec![1.0; n], beta_delta);
        s.params.gamma_prime = gamma_prime;
        s
    }

    pub fn xyz(gammas: [f64; 2], deltas: [f64; 2], epsilon: [f64; 3], beta_delta: Beta) -> Self {
        let mut s = Self::base(
            Family::TwoQubitXyz,
            vec![vec![gammas[0]], vec![gammas[1]]],
            deltas.to_vec(),
            beta_delta,
        );
        s.params.epsilon_alpha = epsilon;
        s
    }

    /// Multimode model with couplings `γ_ν` shared by all spins.
    pub fn multimode(gammas: &[f64], deltas: &[f64], beta_delta: Beta) -> Self {
        Self::base(Family::Multimode, vec![gammas.to_vec(); deltas.len()], deltas.to_vec(), beta_delta)
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.params.c = Some(c);
        self
    }

    pub fn with_beta(mut self, beta_delta: Beta) -> Self {
        self.params.beta_delta = beta_delta;
        self
    }

    pub fn n_spins(&self) -> usize {
        self.params.delta_i.len()
    }

    pub fn n_modes(&self) -> usize {
        self.params.gamma_i_nu.first().map_or(1, |r| r.len().max(1))
    }

    pub fn beta(&self) -> Beta {
        self.params.beta_delta
    }

    /// Coupling of spin `i` to the first mode.
    pub fn gamma(&self, i: usize) -> f64 {
        self.params.gamma_i_nu[i].first().copied().unwrap_or(0.0)
    }

    pub fn lambda(&self, i: usize) -> f64 {
        match self.family {
            Family::TavisCummings => 0.0,
            _ => self.params.lambda_i.get(i).copied().unwrap_or(1.0),
        }
    }

    pub fn bias(&self, i: usize) -> f64 {
        self.params.epsilon_bias_i.get(i).copied().unwrap_or(0.0)
    }

    /// Natural number of order-parameter coordinates.
    pub fn arity(&self) -> usize {
        match self.family {
            Family::Dqr | Family::Biased | Family::TwoQubitXyz | Family::TwoPhoton => 1,
            Family::AnisoInhomogeneous | Family::TavisCummings => 2,
            Family::Multimode => self.n_modes(),
        }
    }

    pub fn accepts_arity(&self, len: usize) -> bool {
        len == self.arity() || (self.family == Family::TwoPhoton && len == 2)
    }

    /// Whether `u = 0` is a stationary point for every parameter value.
    pub fn origin_is_extremum(&self) -> bool {
        self.family != Family::Biased || self.params.epsilon_bias_i.iter().all(|e| *e == 0.0)
    }

    /// The dipolar coupling vector that radial scans move along.
    pub fn couplings(&self) -> Vec<f64> {
        match self.family {
            Family::Multimode => self.params.gamma_i_nu[0].clone(),
            _ => (0..self.n_spins()).map(|i| self.gamma(i)).collect(),
        }
    }

    pub fn with_couplings(&self, gammas: &[f64]) -> ModelSpec {
        let mut s = self.clone();
        match self.family {
            Family::Multimode => {
                for row in &mut s.params.gamma_i_nu {
                    row.copy_from_slice(gammas);
                }
            }
            _ => {
                for (row, g) in s.params.gamma_i_nu.iter_mut().zip(gammas) {
                    row[0] = *g;
                }
            }
        }
        s
    }

    /// Scale all dipolar couplings by `s`; the two-photon coupling counts as `(√γ')²`.
    pub fn scale_dipolar(&self, s: f64) -> ModelSpec {
        let mut out = self.clone();
        for row in &mut out.params.gamma_i_nu {
            for g in row.iter_mut() {
                *g *= s;
            }
        }
        out.params.gamma_prime *= s * s;
        out
    }

    /// Lipschitz bound of the spin part of the potential in `|u|`.
    pub fn coupling_lipschitz(&self) -> f64 {
        let n = self.n_spins() as f64;
        match self.family {
            Family::TwoQubitXyz => 2.0 * (self.gamma(0).abs() + self.gamma(1).abs()),
            Family::Multimode => 2.0 * self.couplings().iter().map(|g| g.abs()).sum::<f64>(),
            Family::AnisoInhomogeneous | Family::TavisCummings => {
                (0..self.n_spins())
                    .map(|i| {
                        let l = self.lambda(i);
                        self.gamma(i).abs() * (1.0 + l).abs().max((1.0 - l).abs())
                    })
                    .sum::<f64>()
                    / n
            }
            _ => (0..self.n_spins()).map(|i| 2.0 * self.gamma(i).abs()).sum::<f64>() / n,
        }
    }

    /// Half-width of the scan box that provably contains every global minimum.
    pub fn scan_radius(&self) -> f64 {
        let c = self.coupling_lipschitz();
        match self.family {
            Family::TwoPhoton => 1.0 + c / (1.0 - 2.0 * self.params.gamma_prime.abs()),
            _ => 1.0 + c,
        }
    }

    /// Every violated invariant; empty iff the evaluators accept the model.
    pub fn validate(&self) -> Vec<Violation> {
        use ViolationCode::*;
        let p = &self.params;
        let mut out = Vec::new();
        let n = p.delta_i.len();

        let all_numbers = p
            .gamma_i_nu
            .iter()
            .flatten()
            .chain(&p.delta_i)
            .chain(&p.lambda_i)
            .chain(&p.epsilon_bias_i)
            .chain(&p.epsilon_alpha)
            .chain(std::iter::once(&p.gamma_prime))
            .chain(std::iter::once(&p.delta_ref));
        if all_numbers.clone().any(|x| !x.is_finite()) {
            out.push(Violation::new(NonFiniteParameter, "all reduced parameters must be finite"));
        }
        if n == 0 {
            out.push(Violation::new(EmptySpinSet, "at least one spin is required"));
        }
        if p.gamma_i_nu.len() != n {
            out.push(Violation::new(
                ShapeMismatch,
                format!("gamma_i_nu has {} rows for {n} spins", p.gamma_i_nu.len()),
            ));
        }
        let m = p.gamma_i_nu.first().map_or(0, |r| r.len());
        if m == 0 || p.gamma_i_nu.iter().any(|r| r.len() != m) {
            out.push(Violation::new(ShapeMismatch, "gamma_i_nu rows must share one nonzero mode count"));
        }
        if !(p.delta_ref > 0.0) {
            out.push(Violation::new(NonPositiveDeltaRef, "Delta_ref must be positive"));
        }
        if let Beta::Finite(b) = p.beta_delta {
            if !(b > 0.0) {
                out.push(Violation::new(NonPositiveBeta, "beta_Delta must be positive or \"inf\""));
            }
        }
        if let Some(c) = p.c {
            if !(c.is_finite() && c > 0.0) {
                out.push(Violation::new(NonPositiveMacroscopicity, "C must be positive and finite"));
            }
        }
        if p.gamma_prime.abs() >= 0.5 {
            out.push(Violation::new(
                StabilityViolation,
                format!("|gamma_prime| = {} must stay below 1/2", p.gamma_prime.abs()),
            ));
        }

        let family = self.family;
        let mismatch = |out: &mut Vec<Violation>, msg: String| out.push(Violation::new(FamilyShapeMismatch, msg));
        if family != Family::Multimode && m > 1 {
            mismatch(&mut out, format!("{family:?} is single-mode but gamma_i_nu has {m} modes"));
        }
        if !p.lambda_i.is_empty() && p.lambda_i.len() != n {
            out.push(Violation::new(ShapeMismatch, "lambda_i must have one entry per spin"));
        }
        if !p.epsilon_bias_i.is_empty() && p.epsilon_bias_i.len() != n {
            out.push(Violation::new(ShapeMismatch, "epsilon_bias_i must have one entry per spin"));
        }
        match family {
            Family::AnisoInhomogeneous if p.lambda_i.len() != n => {
                mismatch(&mut out, "AnisoInhomogeneous needs one anisotropy per spin".into())
            }
            Family::TavisCummings if p.lambda_i.iter().any(|l| *l != 0.0) => {
                mismatch(&mut out, "TavisCummings has all anisotropies equal to zero".into())
            }
            Family::Biased if p.epsilon_bias_i.len() != n => {
                mismatch(&mut out, "Biased needs one static bias per spin".into())
            }
            Family::TwoQubitXyz if n != 2 => mismatch(&mut out, format!("TwoQubitXYZ needs exactly 2 spins, got {n}")),
            Family::Multimode => {
                if m < 2 {
                    mismatch(&mut out, "Multimode needs at least two modes".into());
                }
                if p.gamma_i_nu.windows(2).any(|w| w[0] != w[1]) {
                    mismatch(&mut out, "Multimode couplings must be identical for every spin".into());
                }
            }
            _ => {}
        }
        if family != Family::Biased && p.epsilon_bias_i.iter().any(|e| *e != 0.0) {
            mismatch(&mut out, format!("{family:?} carries no static bias"));
        }
        if family != Family::TwoPhoton && p.gamma_prime != 0.0 {
            mismatch(&mut out, format!("{family:?} carries no two-photon coupling"));
        }
        if family != Family::TwoQubitXyz && p.epsilon_alpha.iter().any(|e| *e != 0.0) {
            mismatch(&mut out, format!("{family:?} carries no spin-spin coupling"));
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(SptError::Validation(v))
        }
    }

    /// Macroscopicity: `NΔ/ω` for the 1/√N-normalized families, `Δ/ω` for the XYZ pair.
    pub fn macroscopicity(&self) -> Option<f64> {
        self.params.c
    }

    /// Physical parameters realizing this spec at boson energy `omega` and macroscopicity `C`.
    pub fn to_physical(&self, omega: f64) -> Result<PhysicalParams> {
        let c = self
            .params
            .c
            .ok_or_else(|| SptError::InvalidParams("macroscopicity C is required for a finite-size model".into()))?;
        let n = self.n_spins() as f64;
        let delta = match self.family {
            Family::TwoQubitXyz => c * omega,
            _ => c * omega / n,
        };
        let p = &self.params;
        Ok(PhysicalParams {
            omega: vec![omega; self.n_modes()],
            delta: p.delta_i.iter().map(|d| d * delta).collect(),
            g: p.gamma_i_nu
                .iter()
                .map(|row| row.iter().map(|g| g * (delta * omega).sqrt()).collect())
                .collect(),
            lambda: (0..self.n_spins()).map(|i| self.lambda(i)).collect(),
            bias: p.epsilon_bias_i.iter().map(|e| e * delta).collect(),
            g_prime: p.gamma_prime * omega,
            j_alpha: p.epsilon_alpha.map(|e| e * delta),
            beta: p.beta_delta.scaled(1.0 / delta),
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ModelSpec serializes")
    }
}

/// Reduce physical parameters for `family`, fixing up the XYZ macroscopicity (no 1/√N there).
pub fn spec_from_physical(family: Family, p: &PhysicalParams, rule: MeanRule) -> Result<ModelSpec> {
    let mut params = reduce(p, rule)?;
    if family == Family::TwoQubitXyz {
        params.c = Some(params.delta_ref / p.omega[0]);
    }
    Ok(ModelSpec { family, params })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phys(omega: f64, delta: &[f64], g: &[f64]) -> PhysicalParams {
        PhysicalParams {
            omega: vec![omega],
            delta: delta.to_vec(),
            g: g.iter().map(|g| vec![*g]).collect(),
            lambda: vec![],
            bias: vec![],
            g_prime: 0.0,
            j_alpha: [0.0; 3],
            beta: Beta::Infinite,
        }
    }

    #[test]
    fn reduce_rabi_reference_parameters() {
        let r = reduce(&phys(1.0 / 16.0, &[16.0], &[1.0]), MeanRule::ArithmeticAbs).unwrap();
        assert!((r.gamma_i_nu[0][0] - 1.0).abs() < 1e-15);
        assert_eq!(r.delta_i, vec![1.0]);
        assert!((r.c.unwrap() - 256.0).abs() < 1e-12);
    }

    #[test]
    fn reduce_zero_coupling() {
        let r = reduce(&phys(1.0, &[1.0, 1.0], &[0.0, 0.0]), MeanRule::ArithmeticAbs).unwrap();
        assert!(r.gamma_i_nu.iter().flatten().all(|g| *g == 0.0));
        assert_eq!(r.delta_i, vec![1.0, 1.0]);
    }

    #[test]
    fn reduce_two_photon() {
        let mut p = phys(1.0, &[1.0], &[0.6124]);
        p.g_prime = 0.25;
        let r = reduce(&p, MeanRule::ArithmeticAbs).unwrap();
        assert_eq!(r.gamma_prime, 0.25);
        assert!((r.gamma_i_nu[0][0] - 0.6124).abs() < 1e-15);
    }

    #[test]
    fn reduce_errors() {
        assert!(reduce(&phys(0.0, &[1.0], &[1.0]), MeanRule::ArithmeticAbs).is_err());
        assert!(reduce(&phys(1.0, &[0.0, 0.0], &[1.0, 1.0]), MeanRule::Rms).is_err());
        let mut p = phys(1.0, &[1.0], &[0.1]);
        p.g_prime = 0.5;
        assert!(reduce(&p, MeanRule::ArithmeticAbs).is_err());
    }

    #[test]
    fn single_spin_delta_is_one_for_both_rules() {
        for rule in [MeanRule::ArithmeticAbs, MeanRule::Rms] {
            let r = reduce(&phys(0.3, &[2.7], &[0.4]), rule).unwrap();
            assert_eq!(r.delta_i, vec![1.0]);
        }
        let r = reduce(&phys(0.3, &[-2.7], &[0.4]), MeanRule::Rms).unwrap();
        assert_eq!(r.delta_i, vec![-1.0]);
    }

    #[test]
    fn validate_examples() {
        assert!(ModelSpec::dqr(0.5, 1, Beta::Infinite).validate().is_empty());
        let v = ModelSpec::two_photon(0.3, 0.5, 1, Beta::Infinite).validate();
        assert_eq!(v.iter().map(|v| v.code).collect::<Vec<_>>(), vec![ViolationCode::StabilityViolation]);
        let mut xyz = ModelSpec::xyz([0.5, 0.5], [1.0, 1.0], [1.0, 0.0, 0.0], Beta::Infinite);
        xyz.params.gamma_i_nu.push(vec![0.5]);
        xyz.params.delta_i.push(1.0);
        let v = xyz.validate();
        assert_eq!(v.iter().map(|v| v.code).collect::<Vec<_>>(), vec![ViolationCode::FamilyShapeMismatch]);
    }

    #[test]
    fn validate_family_specific_fields() {
        let mut mm = ModelSpec::multimode(&[0.3, 0.4], &[1.0, 1.0], Beta::Infinite);
        assert!(mm.validate().is_empty());
        mm.params.gamma_i_nu[1][0] = 0.1;
        assert_eq!(mm.validate()[0].code, ViolationCode::FamilyShapeMismatch);

        let single = ModelSpec::multimode(&[0.3], &[1.0], Beta::Infinite);
        assert!(!single.validate().is_empty());

        let tc = ModelSpec::tavis_cummings(&[1.0], &[1.0], Beta::Finite(-1.0));
        assert_eq!(tc.validate()[0].code, ViolationCode::NonPositiveBeta);
    }

    #[test]
    fn beta_json_encoding() {
        let s = ModelSpec::dqr(0.5, 1, Beta::Infinite);
        let j = s.to_json();
        assert!(j.contains("\"beta_Delta\": \"inf\""));
        assert!(j.contains("\"family\": \"DQR\""));
        assert_eq!(ModelSpec::from_json(&j).unwrap(), s);
        let t = ModelSpec::dqr(0.5, 1, Beta::Finite(2.0));
        assert_eq!(ModelSpec::from_json(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn physical_round_trip_through_reduce() {
        let s = ModelSpec::xyz([0.4, 1.5], [3.0, 2.0], [3.0, 2.0, 1.0], Beta::Infinite).with_c(100.0);
        let p = s.to_physical(1.0).unwrap();
        let back = spec_from_physical(Family::TwoQubitXyz, &p, MeanRule::ArithmeticAbs).unwrap();
        // arithmetic mean of (3, 2)·Δ is 2.5Δ, so couplings rescale accordingly
        let scale = 2.5f64;
        assert!((back.params.delta_i[0] - 3.0 / scale).abs() < 1e-12);
        assert!((back.gamma(1) - 1.5 / scale.sqrt()).abs() < 1e-12);
        assert!((back.params.c.unwrap() - 250.0).abs() < 1e-9);
    }
}
