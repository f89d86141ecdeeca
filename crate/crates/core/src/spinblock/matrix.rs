use serde::{Deserialize, Serialize};

use crate::error::{Result, SptError};
use crate::model::{Family, ModelSpec};

/// Real symmetric 4×4 matrix in the basis `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymMatrix4 {
    a: [[f64; 4]; 4],
}

impl SymMatrix4 {
    /// Symmetrizes from the upper triangle, so `a_ij = a_ji` holds bit for bit.
    pub fn from_upper(m: [[f64; 4]; 4]) -> Self {
        let mut a = m;
        for i in 0..4 {
            for j in 0..i {
                a[i][j] = a[j][i];
            }
        }
        SymMatrix4 { a }
    }

    pub fn diag(d: [f64; 4]) -> Self {
        let mut a = [[0.0; 4]; 4];
        for i in 0..4 {
            a[i][i] = d[i];
        }
        SymMatrix4 { a }
    }

    pub fn identity() -> Self {
        Self::diag([1.0; 4])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    pub fn rows(&self) -> &[[f64; 4]; 4] {
        &self.a
    }

    pub fn frobenius(&self) -> f64 {
        self.a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (o, row) in out.iter_mut().zip(&self.a) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }
}

/// Parameters of the two-qubit XYZ effective Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XyzParams {
    pub gamma: [f64; 2],
    pub delta: [f64; 2],
    pub epsilon: [f64; 3],
}

impl XyzParams {
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        if spec.family != Family::TwoQubitXyz || spec.n_spins() != 2 {
            return Err(SptError::Unsupported(format!("{:?} is not a two-qubit XYZ model", spec.family)));
        }
        Ok(XyzParams {
            gamma: [spec.gamma(0), spec.gamma(1)],
            delta: [spec.params.delta_i[0], spec.params.delta_i[1]],
            epsilon: spec.params.epsilon_alpha,
        })
    }

    pub fn with_gamma(self, gamma: [f64; 2]) -> Self {
        XyzParams { gamma, ..self }
    }
}

/// `h(u) = Σ_j (2γ_j u σ_jx + δ_j σ_jz) + Σ_α ε_α σ_1α σ_2α`.
pub fn build_h_xyz(u: f64, p: &XyzParams) -> SymMatrix4 {
    let [d1, d2] = p.delta;
    let [ex, ey, ez] = p.epsilon;
    let x1 = 2.0 * p.gamma[0] * u;
    let x2 = 2.0 * p.gamma[1] * u;
    // σ_1y σ_2y is real: -1 on ↑↑↔↓↓, +1 on ↑↓↔↓↑
    SymMatrix4::from_upper([
        [d1 + d2 + ez, x2, x1, ex - ey],
        [0.0, d1 - d2 - ez, ex + ey, x1],
        [0.0, 0.0, -d1 + d2 - ez, x2],
        [0.0, 0.0, 0.0, -d1 - d2 + ez],
    ])
}

/// Derivative `∂h/∂u = 2γ₁σ_1x + 2γ₂σ_2x`.
fn dh_du(p: &XyzParams) -> SymMatrix4 {
    let x1 = 2.0 * p.gamma[0];
    let x2 = 2.0 * p.gamma[1];
    SymMatrix4::from_upper([
        [0.0, x2, x1, 0.0],
        [0.0, 0.0, 0.0, x1],
        [0.0, 0.0, 0.0, x2],
        [0.0, 0.0, 0.0, 0.0],
    ])
}

/// Eigenvalues ascending with matching unit eigenvectors (`vectors[k]` belongs to `values[k]`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigen4 {
    pub values: [f64; 4],
    pub vectors: [[f64; 4]; 4],
    pub sweeps: usize,
}

/// Cyclic Jacobi, row-cyclic order; stops when the off-diagonal norm drops below `1e-14‖m‖`.
pub fn jacobi_eigen(m: &SymMatrix4) -> Eigen4 {
    let mut a = m.a;
    let mut v = [[0.0; 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = m.frobenius();
    let mut sweeps = 0;
    while sweeps < 64 {
        let off: f64 = (0..4)
            .flat_map(|i| (0..4).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-14 * scale {
            break;
        }
        sweeps += 1;
        for p in 0..3 {
            for q in p + 1..4 {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..4 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let mut values = [0.0; 4];
    let mut vectors = [[0.0; 4]; 4];
    for (k, &i) in order.iter().enumerate() {
        values[k] = a[i][i];
        for r in 0..4 {
            vectors[k][r] = v[r][i];
        }
    }
    Eigen4 { values, vectors, sweeps }
}

/// Eigenvalues of `h(u)` ascending, with their Hellmann–Feynman slopes `⟨k|∂h/∂u|k⟩`.
pub fn eigenvalue_slopes(u: f64, p: &XyzParams) -> ([f64; 4], [f64; 4]) {
    let e = jacobi_eigen(&build_h_xyz(u, p));
    let dh = dh_du(p);
    let slopes = e.vectors.map(|v| {
        let dv = dh.mul_vec(&v);
        v.iter().zip(&dv).map(|(a, b)| a * b).sum()
    });
    (e.values, slopes)
}

pub fn smallest_eigenvalue(m: &SymMatrix4) -> f64 {
    jacobi_eigen(m).values[0]
}

/// Hellmann–Feynman slope `⟨gs|∂h/∂u|gs⟩` of the lowest eigenvalue (nondegenerate ground state).
pub fn lowest_eigenvalue_slope(u: f64, p: &XyzParams) -> f64 {
    let e = jacobi_eigen(&build_h_xyz(u, p));
    let gs = e.vectors[0];
    let dv = dh_du(p).mul_vec(&gs);
    gs.iter().zip(&dv).map(|(a, b)| a * b).sum()
}

/// Curvature `φ''(0) = 2 + λ''(0)` of the zero-temperature XYZ potential at the origin.
///
/// Second-order perturbation theory in `u`; falls back to a second difference when the
/// ground state of `h(0)` is degenerate.
pub fn xyz_origin_curvature(p: &XyzParams) -> f64 {
    let e = jacobi_eigen(&build_h_xyz(0.0, p));
    let gap = e.values[1] - e.values[0];
    if gap <= 1e-9 * (1.0 + e.values[0].abs()) {
        let h = 1e-4;
        let lp = smallest_eigenvalue(&build_h_xyz(h, p));
        let lm = smallest_eigenvalue(&build_h_xyz(-h, p));
        return 2.0 + (lp + lm - 2.0 * e.values[0]) / (h * h);
    }
    let v = dh_du(p);
    let gs = e.vectors[0];
    let vg = v.mul_vec(&gs);
    let mut second = 0.0;
    for k in 1..4 {
        let amp: f64 = e.vectors[k].iter().zip(&vg).map(|(a, b)| a * b).sum();
        second += amp * amp / (e.values[0] - e.values[k]);
    }
    2.0 + 2.0 * second
}
