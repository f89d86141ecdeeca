//! Truncated-Fock exact diagonalization of the finite spin–boson Hamiltonians.
//!
//! Basis order: boson occupations slow (mode 0 slowest), spin configuration fast. In a spin
//! configuration index the first spin is the most significant bit and bit value 0 means `↑`.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SptError};
use crate::model::{Family, PhysicalParams};
use crate::numerics::log_sum_exp;

/// Dense storage cap: `dim ≤ 2000` keeps a matrix under four million entries.
pub const DEFAULT_DIM_CAP: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertSpec {
    /// Fock cutoff per mode: occupations `0..=n_max`.
    pub n_max: usize,
    pub n_spins: usize,
    pub n_modes: usize,
    pub dim_cap: usize,
}

impl HilbertSpec {
    pub fn new(n_max: usize, n_spins: usize, n_modes: usize) -> Self {
        HilbertSpec { n_max, n_spins, n_modes, dim_cap: DEFAULT_DIM_CAP }
    }

    pub fn for_params(p: &PhysicalParams, n_max: usize) -> Self {
        Self::new(n_max, p.n_spins(), p.n_modes())
    }

    pub fn spin_dim(&self) -> usize {
        1 << self.n_spins
    }

    pub fn boson_dim(&self) -> usize {
        (self.n_max + 1).pow(self.n_modes as u32)
    }

    pub fn dim(&self) -> usize {
        self.boson_dim() * self.spin_dim()
    }

    fn check(&self) -> Result<()> {
        let dim = self.boson_dim().checked_mul(self.spin_dim()).unwrap_or(usize::MAX);
        if dim > self.dim_cap {
            return Err(SptError::DimensionCap { dim, cap: self.dim_cap });
        }
        Ok(())
    }

    /// Boson occupations of a boson index.
    pub fn occupations(&self, mut b: usize) -> Vec<usize> {
        let base = self.n_max + 1;
        let mut occ = vec![0; self.n_modes];
        for k in (0..self.n_modes).rev() {
            occ[k] = b % base;
            b /= base;
        }
        occ
    }

    fn boson_index(&self, occ: &[usize]) -> usize {
        occ.iter().fold(0, |acc, n| acc * (self.n_max + 1) + n)
    }

    /// `(boson index, spin configuration)` of a basis index.
    pub fn split(&self, idx: usize) -> (usize, usize) {
        (idx / self.spin_dim(), idx % self.spin_dim())
    }

    /// Whether spin `i` is up in configuration `s`.
    pub fn is_up(&self, s: usize, i: usize) -> bool {
        (s >> (self.n_spins - 1 - i)) & 1 == 0
    }

    fn flip(&self, s: usize, i: usize) -> usize {
        s ^ (1 << (self.n_spins - 1 - i))
    }

    /// Eigenvalue of `exp{iπ[Σ a†a + Σ(1+σ_z)/2]}` on a basis state.
    pub fn parity_of(&self, idx: usize) -> i32 {
        let (b, s) = self.split(idx);
        let n: usize = self.occupations(b).iter().sum();
        let up = (0..self.n_spins).filter(|i| self.is_up(s, *i)).count();
        if (n + up) % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// `max(40, ⌈C u² + 12 √(C u²)⌉)`: a twelve-sigma Poisson margin above the predicted photon number.
pub fn default_n_max(c: f64, u2: f64) -> usize {
    let mean = (c * u2).max(0.0);
    40usize.max((mean + 12.0 * mean.sqrt()).ceil() as usize)
}

/// Dense real symmetric Hamiltonian.
///
/// `H = Σ_ν ω_ν a_ν†a_ν + Σ_i [Δ_i σ_iz + e_i σ_ix + Σ_ν (g_iν/√N)((a_ν†σ_i⁻ + a_νσ_i⁺) + λ_i(a_νσ_i⁻ + a_ν†σ_i⁺))]
///   + (g'/N) Σ_i σ_ix (a² + a†²)`; for the two-qubit XYZ family the dipole couplings carry no `1/√N`
/// and `Σ_α J_α σ_1α σ_2α` is added.
pub fn build_hamiltonian(p: &PhysicalParams, family: Family, h: &HilbertSpec) -> Result<DMatrix<f64>> {
    h.check()?;
    if p.n_spins() != h.n_spins || p.n_modes() != h.n_modes {
        return Err(SptError::InvalidParams("Hilbert space shape does not match the parameters".into()));
    }
    if family == Family::TwoQubitXyz && h.n_spins != 2 {
        return Err(SptError::InvalidParams("XYZ model needs two spins".into()));
    }
    let dim = h.dim();
    let ns = h.spin_dim();
    let n = h.n_spins as f64;
    let dip_norm = if family == Family::TwoQubitXyz { 1.0 } else { 1.0 / n.sqrt() };
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for col in 0..dim {
        let (b, s) = h.split(col);
        let occ = h.occupations(b);
        // diagonal
        let mut diag: f64 = occ.iter().zip(&p.omega).map(|(k, w)| *k as f64 * w).sum();
        for i in 0..h.n_spins {
            diag += if h.is_up(s, i) { p.delta[i] } else { -p.delta[i] };
        }
        if family == Family::TwoQubitXyz {
            let same = h.is_up(s, 0) == h.is_up(s, 1);
            diag += if same { p.j_alpha[2] } else { -p.j_alpha[2] };
        }
        m[(col, col)] += diag;

        for i in 0..h.n_spins {
            let up = h.is_up(s, i);
            let s_flip = h.flip(s, i);
            let bias = p.bias_at(i);
            if bias != 0.0 {
                m[(b * ns + s_flip, col)] += bias;
            }
            let lam = p.lambda_at(i);
            for nu in 0..h.n_modes {
                let g = p.g_at(i, nu) * dip_norm;
                if g == 0.0 {
                    continue;
                }
                let k = occ[nu];
                let (rot, counter) = (g, g * lam);
                if up {
                    // a†σ⁻ (rotating) and λ aσ⁻ (counter-rotating)
                    if k < h.n_max {
                        let row = shifted(h, &occ, nu, 1) * ns + s_flip;
                        m[(row, col)] += rot * ((k + 1) as f64).sqrt();
                    }
                    if k > 0 {
                        let row = shifted(h, &occ, nu, -1) * ns + s_flip;
                        m[(row, col)] += counter * (k as f64).sqrt();
                    }
                } else {
                    // aσ⁺ (rotating) and λ a†σ⁺ (counter-rotating)
                    if k > 0 {
                        let row = shifted(h, &occ, nu, -1) * ns + s_flip;
                        m[(row, col)] += rot * (k as f64).sqrt();
                    }
                    if k < h.n_max {
                        let row = shifted(h, &occ, nu, 1) * ns + s_flip;
                        m[(row, col)] += counter * ((k + 1) as f64).sqrt();
                    }
                }
            }
            if p.g_prime != 0.0 {
                let gp = p.g_prime / n;
                let k = occ[0];
                if k + 2 <= h.n_max {
                    let row = shifted(h, &occ, 0, 2) * ns + s_flip;
                    m[(row, col)] += gp * (((k + 1) * (k + 2)) as f64).sqrt();
                }
                if k >= 2 {
                    let row = shifted(h, &occ, 0, -2) * ns + s_flip;
                    m[(row, col)] += gp * ((k * (k - 1)) as f64).sqrt();
                }
            }
        }
        if family == Family::TwoQubitXyz {
            let both = h.flip(h.flip(s, 0), 1);
            let same = h.is_up(s, 0) == h.is_up(s, 1);
            // σxσx flips both; σyσy flips both with sign −1 on equal spins, +1 otherwise
            let yy = if same { -p.j_alpha[1] } else { p.j_alpha[1] };
            m[(b * ns + both, col)] += p.j_alpha[0] + yy;
        }
    }
    Ok(m)
}

fn shifted(h: &HilbertSpec, occ: &[usize], nu: usize, d: i64) -> usize {
    let mut o = occ.to_vec();
    o[nu] = (o[nu] as i64 + d) as usize;
    h.boson_index(&o)
}

/// Diagonal of the parity operator in the product basis.
pub fn parity_diagonal(h: &HilbertSpec) -> Vec<i32> {
    (0..h.dim()).map(|i| h.parity_of(i)).collect()
}

/// `max |[H, Π]_ij|`; zero iff `H` never couples opposite parity sectors.
pub fn parity_commutator_norm(m: &DMatrix<f64>, h: &HilbertSpec) -> f64 {
    let par = parity_diagonal(h);
    let mut worst: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if par[i] != par[j] {
                worst = worst.max((2.0 * m[(i, j)]).abs());
            }
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpairs {
    /// Ascending.
    pub energies: Vec<f64>,
    /// Unit eigenvectors, one per energy.
    pub states: Vec<Vec<f64>>,
}

/// Lowest `k` eigenpairs by Householder tridiagonalization and implicit QR; every pair is residual-checked.
pub fn eigensolve_lowest(m: &DMatrix<f64>, k: usize) -> Result<Eigenpairs> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(SptError::InvalidParams("matrix must be square".into()));
    }
    let norm = m.norm().max(f64::MIN_POSITIVE);
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| SptError::NonConvergence("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut out = Eigenpairs { energies: Vec::new(), states: Vec::new() };
    for &j in order.iter().take(k.min(n)) {
        let e = eig.eigenvalues[j];
        let v = eig.eigenvectors.column(j).into_owned();
        let r = (m * &v - &v * e).norm();
        if r > 1e-8 * norm {
            return Err(SptError::NonConvergence(format!("eigenpair residual {r:e} exceeds 1e-8·‖H‖")));
        }
        out.energies.push(e);
        out.states.push(v.iter().copied().collect());
    }
    Ok(out)
}

/// All eigenvalues, ascending.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let mut e: Vec<f64> = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| SptError::NonConvergence("symmetric eigensolver did not converge".into()))?
        .eigenvalues
        .iter()
        .copied()
        .collect();
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// Photon numbers, parity and joint distribution of a state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    /// `⟨a_ν†a_ν⟩` per mode.
    pub photon_number: Vec<f64>,
    pub parity: f64,
    /// `P(boson index, spin configuration)`.
    pub distribution: Vec<Vec<f64>>,
}

pub fn observables(state: &[f64], h: &HilbertSpec) -> Result<Observables> {
    if state.len() != h.dim() {
        return Err(SptError::InvalidParams(format!("state has {} entries, space has {}", state.len(), h.dim())));
    }
    let norm2: f64 = state.iter().map(|x| x * x).sum();
    if (norm2.sqrt() - 1.0).abs() > 1e-8 {
        return Err(SptError::Domain(format!("state norm {} deviates from 1", norm2.sqrt())));
    }
    let ns = h.spin_dim();
    let mut photon = vec![0.0; h.n_modes];
    let mut parity = 0.0;
    let mut dist = vec![vec![0.0; ns]; h.boson_dim()];
    for (idx, amp) in state.iter().enumerate() {
        let p = amp * amp;
        let (b, s) = h.split(idx);
        for (ph, k) in photon.iter_mut().zip(h.occupations(b)) {
            *ph += k as f64 * p;
        }
        parity += h.parity_of(idx) as f64 * p;
        dist[b][s] = p;
    }
    Ok(Observables { photon_number: photon, parity, distribution: dist })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub energies: Vec<f64>,
    #[serde(skip)]
    pub states: Vec<Vec<f64>>,
    /// `⟨a_ν†a_ν⟩` per state per mode.
    pub photon_number: Vec<Vec<f64>>,
    pub parity: Vec<f64>,
    /// Ground-state `P(boson index, spin configuration)`.
    pub distribution: Vec<Vec<f64>>,
    /// Parity sector the states were taken from, when the solve was restricted to one.
    pub sector: Option<i32>,
    /// `ln Z` at the requested inverse temperature, when computed.
    pub ln_z: Option<f64>,
}

fn sector_indices(h: &HilbertSpec, sector: i32) -> Vec<usize> {
    (0..h.dim()).filter(|i| h.parity_of(*i) == sector).collect()
}

fn restrict(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

fn embed(v: &[f64], idx: &[usize], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for (x, i) in v.iter().zip(idx) {
        out[*i] = *x;
    }
    out
}

fn assemble(h: &HilbertSpec, pairs: Eigenpairs, sector: Option<i32>) -> Result<SpectrumResult> {
    let obs: Vec<Observables> = pairs.states.iter().map(|s| observables(s, h)).collect::<Result<_>>()?;
    Ok(SpectrumResult {
        energies: pairs.energies,
        photon_number: obs.iter().map(|o| o.photon_number.clone()).collect(),
        parity: obs.iter().map(|o| o.parity).collect(),
        distribution: obs.first().map(|o| o.distribution.clone()).unwrap_or_default(),
        states: pairs.states,
        sector,
        ln_z: None,
    })
}

/// Lowest `k` states of the full Hamiltonian.
///
/// When `H` commutes with parity, each sector is diagonalized separately and the results are
/// merged, so near-degenerate cat pairs come out as parity eigenstates.
pub fn solve_lowest(p: &PhysicalParams, family: Family, h: &HilbertSpec, k: usize) -> Result<SpectrumResult> {
    let m = build_hamiltonian(p, family, h)?;
    if parity_commutator_norm(&m, h) != 0.0 {
        return assemble(h, eigensolve_lowest(&m, k)?, None);
    }
    let mut merged: Vec<(f64, Vec<f64>)> = Vec::new();
    for sector in [1, -1] {
        let idx = sector_indices(h, sector);
        if idx.is_empty() {
            continue;
        }
        let pairs = eigensolve_lowest(&restrict(&m, &idx), k)?;
        for (e, v) in pairs.energies.into_iter().zip(pairs.states) {
            merged.push((e, embed(&v, &idx, h.dim())));
        }
    }
    merged.sort_by(|a, b| a.0.total_cmp(&b.0));
    merged.truncate(k);
    let (energies, states) = merged.into_iter().unzip();
    assemble(h, Eigenpairs { energies, states }, None)
}

/// Lowest `k` states inside one parity sector (`+1` holds the vacuum with all spins down).
pub fn solve_sector(p: &PhysicalParams, family: Family, h: &HilbertSpec, sector: i32, k: usize) -> Result<SpectrumResult> {
    let m = build_hamiltonian(p, family, h)?;
    if parity_commutator_norm(&m, h) != 0.0 {
        return Err(SptError::Unsupported("Hamiltonian does not conserve parity".into()));
    }
    let idx = sector_indices(h, sector);
    let pairs = eigensolve_lowest(&restrict(&m, &idx), k)?;
    let states = pairs.states.iter().map(|v| embed(v, &idx, h.dim())).collect();
    assemble(h, Eigenpairs { energies: pairs.energies, states }, Some(sector))
}

/// `ln Tr e^{−βH}` from a spectrum, factoring out the ground energy.
pub fn ln_partition_from_spectrum(energies: &[f64], beta: f64) -> f64 {
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = energies.iter().map(|e| -beta * (e - e0)).collect();
    -beta * e0 + log_sum_exp(&shifted)
}

/// `Z = Σ_k e^{−β(E_k − E_0)} · e^{−βE_0}`; may overflow where [`ln_partition_from_spectrum`] does not.
pub fn partition_function(m: &DMatrix<f64>, beta: f64) -> Result<f64> {
    Ok(ln_partition_from_spectrum(&eigenvalues(m)?, beta).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncatedObservable {
    /// Ground-state `⟨a†a⟩` summed over modes.
    PhotonNumber,
    GroundEnergy,
    /// `ln Z` at the given inverse temperature.
    LnZ(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub n_max: Vec<usize>,
    pub values: Vec<f64>,
    /// First cutoff whose value the next cutoff reproduces to `1e-6` relative.
    pub converged_n_max: usize,
}

/// Evaluate an observable along an increasing cutoff schedule until two successive values agree.
pub fn truncation_study(p: &PhysicalParams, family: Family, observable: TruncatedObservable, schedule: &[usize]) -> Result<TruncationReport> {
    let mut report = TruncationReport { n_max: Vec::new(), values: Vec::new(), converged_n_max: 0 };
    for &n_max in schedule {
        let h = HilbertSpec::for_params(p, n_max);
        let value = match observable {
            TruncatedObservable::PhotonNumber => solve_lowest(p, family, &h, 1)?.photon_number[0].iter().sum(),
            TruncatedObservable::GroundEnergy => solve_lowest(p, family, &h, 1)?.energies[0],
            TruncatedObservable::LnZ(beta) => ln_partition_from_spectrum(&eigenvalues(&build_hamiltonian(p, family, &h)?)?, beta),
        };
        if let Some(prev) = report.values.last() {
            let prev: f64 = *prev;
            if (value - prev).abs() <= 1e-6 * value.abs().max(prev.abs()) + 1e-12 {
                report.converged_n_max = *report.n_max.last().expect("nonempty");
                report.n_max.push(n_max);
                report.values.push(value);
                return Ok(report);
            }
        }
        report.n_max.push(n_max);
        report.values.push(value);
    }
    Err(SptError::NonConvergence(format!(
        "truncation schedule exhausted at n_max = {:?} with values {:?}",
        report.n_max.last(),
        report.values
    )))
}

/// Magic bytes opening a matrix dump.
pub const DUMP_MAGIC: u64 = u64::from_le_bytes(*b"SPTHMAT1");

/// Numeric tag of a family in matrix dumps.
pub fn family_tag(family: Family) -> u64 {
    Family::ALL.iter().position(|f| *f == family).expect("listed") as u64
}

/// Write `m` as a little-endian dump: eight `u64` header fields
/// `(magic, rows, cols, family tag, n_max, N, M, reserved = 0)` followed by row-major `f64` entries.
pub fn write_matrix_dump(path: &Path, m: &DMatrix<f64>, family: Family, h: &HilbertSpec) -> Result<()> {
    let mut bytes = Vec::with_capacity(64 + 8 * m.len());
    for field in [DUMP_MAGIC, m.nrows() as u64, m.ncols() as u64, family_tag(family), h.n_max as u64, h.n_spins as u64, h.n_modes as u64, 0] {
        bytes.extend_from_slice(&field.to_le_bytes());
    }
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            bytes.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(&bytes)?;
    tmp.persist(path).map_err(|e| SptError::Io(e.error))?;
    Ok(())
}
