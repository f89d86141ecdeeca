//! Mean-field Landau potentials, their gradients and global minimization.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SptError};
use crate::model::{Beta, Family, ModelSpec};
use crate::numerics::{bisect_root, golden_section, log_sum_exp, thermal_abs, thermal_slope, thermal_slope_over_r};
use crate::spinblock::{build_h_xyz, eigenvalue_slopes, jacobi_eigen, lowest_eigenvalue_slope, smallest_eigenvalue, xyz_origin_curvature, XyzParams};

/// Order-parameter coordinates `u`, `(u, v)` or `u_ν`.
pub type OrderVector = Vec<f64>;

/// Two minima count as degenerate when their potentials differ by less than this.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// A nonzero minimum must beat the origin by this much before it is preferred.
pub const ORIGIN_PREFERENCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanBudget {
    /// Grid points per axis over the full box.
    pub points: usize,
    /// Refinement tolerance on each coordinate.
    pub tol: f64,
    /// Cap on golden-section iterations per line search.
    pub max_iter: usize,
    /// Number of grid local minima that are refined.
    pub candidates: usize,
}

impl Default for ScanBudget {
    fn default() -> Self {
        ScanBudget { points: 2001, tol: 1e-10, max_iter: 400, candidates: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinResult {
    /// Every global minimum up to degeneracy; the nonnegative representative comes first.
    pub minima: Vec<OrderVector>,
    pub phi_min: f64,
    /// Per-mode `u²` (for `(u, v)` families, `u² + v²`).
    pub order_parameter: Vec<f64>,
    /// More than one global minimum, or a continuous family of them.
    pub degenerate: bool,
    /// The minimum is a circle in the `(u, v)` plane; only the `v = 0` point is listed.
    pub rotational: bool,
    /// False when a refinement hit its iteration cap; the result is then the best point found.
    pub converged: bool,
}

impl MinResult {
    /// A single single-mode minimum.
    pub fn single(u: OrderVector, phi_min: f64) -> Self {
        let op = vec![u.iter().map(|x| x * x).sum()];
        MinResult { minima: vec![u], phi_min, order_parameter: op, degenerate: false, rotational: false, converged: true }
    }

    /// Total `Σ u²` over modes.
    pub fn u2(&self) -> f64 {
        self.order_parameter.iter().sum()
    }

    pub fn location(&self) -> &[f64] {
        &self.minima[0]
    }
}

fn check_input(spec: &ModelSpec, u: &[f64]) -> Result<()> {
    if !spec.accepts_arity(u.len()) {
        return Err(SptError::ArityMismatch { expected: spec.arity(), got: u.len() });
    }
    if u.iter().any(|x| !x.is_finite()) {
        return Err(SptError::NonFinite("order vector"));
    }
    Ok(())
}

/// Landau potential `φ(u)` in units of `NΔ`.
pub fn phi(spec: &ModelSpec, u: &[f64]) -> Result<f64> {
    check_input(spec, u)?;
    Ok(phi_unchecked(spec, u))
}

/// Per-spin field component `x_i(u)` entering `√(δ_i² + x_i²)` for the one-axis product families.
fn field(spec: &ModelSpec, i: usize, u: f64, v: f64) -> f64 {
    match spec.family {
        Family::Biased => spec.bias(i) + 2.0 * spec.gamma(i) * u,
        Family::TwoPhoton => 2.0 * spec.gamma(i) * u + 2.0 * spec.params.gamma_prime * (u * u - v * v),
        _ => 2.0 * spec.gamma(i) * u,
    }
}

fn spin_mean<F: Fn(usize) -> f64>(spec: &ModelSpec, f: F) -> f64 {
    let n = spec.n_spins();
    (0..n).map(f).sum::<f64>() / n as f64
}

pub(crate) fn phi_unchecked(spec: &ModelSpec, u: &[f64]) -> f64 {
    let beta = spec.beta();
    let d = &spec.params.delta_i;
    match spec.family {
        Family::Dqr | Family::Biased => {
            u[0] * u[0] - spin_mean(spec, |i| thermal_abs(beta, d[i].hypot(field(spec, i, u[0], 0.0))))
        }
        Family::TwoPhoton => {
            let v = u.get(1).copied().unwrap_or(0.0);
            u[0] * u[0] + v * v - spin_mean(spec, |i| thermal_abs(beta, d[i].hypot(field(spec, i, u[0], v))))
        }
        Family::AnisoInhomogeneous | Family::TavisCummings => {
            let (x, y) = (u[0], u[1]);
            x * x + y * y
                - spin_mean(spec, |i| {
                    let g = spec.gamma(i);
                    let l = spec.lambda(i);
                    let a = g * (1.0 + l) * x;
                    let b = g * (1.0 - l) * y;
                    thermal_abs(beta, (d[i] * d[i] + a * a + b * b).sqrt())
                })
        }
        Family::Multimode => {
            let gammas = &spec.params.gamma_i_nu[0];
            let s: f64 = gammas.iter().zip(u).map(|(g, x)| g * x).sum();
            u.iter().map(|x| x * x).sum::<f64>() - spin_mean(spec, |i| thermal_abs(beta, d[i].hypot(2.0 * s)))
        }
        Family::TwoQubitXyz => {
            let p = xyz_params(spec);
            let h = build_h_xyz(u[0], &p);
            match beta {
                Beta::Infinite => u[0] * u[0] + smallest_eigenvalue(&h),
                Beta::Finite(b) => {
                    let e = jacobi_eigen(&h).values;
                    u[0] * u[0] - log_sum_exp(&e.map(|l| -b * l)) / b
                }
            }
        }
    }
}

fn xyz_params(spec: &ModelSpec) -> XyzParams {
    XyzParams {
        gamma: [spec.gamma(0), spec.gamma(1)],
        delta: [spec.params.delta_i[0], spec.params.delta_i[1]],
        epsilon: spec.params.epsilon_alpha,
    }
}

/// `x / r`, with the right-sided limit `1` at a cusp where both vanish.
fn ratio(x: f64, r: f64) -> f64 {
    if r == 0.0 {
        1.0
    } else {
        x / r
    }
}

/// Gradient of [`phi`]: analytic for product families, central difference for XYZ.
pub fn grad_phi(spec: &ModelSpec, u: &[f64]) -> Result<OrderVector> {
    check_input(spec, u)?;
    Ok(grad_unchecked(spec, u))
}

fn grad_unchecked(spec: &ModelSpec, u: &[f64]) -> OrderVector {
    let beta = spec.beta();
    let d = &spec.params.delta_i;
    let g = match spec.family {
        Family::Dqr | Family::Biased => {
            let x = u[0];
            vec![
                2.0 * x
                    - spin_mean(spec, |i| {
                        let f = field(spec, i, x, 0.0);
                        let r = d[i].hypot(f);
                        thermal_slope(beta, r) * ratio(f, r) * 2.0 * spec.gamma(i)
                    }),
            ]
        }
        Family::TwoPhoton => {
            let (x, v) = (u[0], u.get(1).copied().unwrap_or(0.0));
            let gp = spec.params.gamma_prime;
            let du = 2.0 * x
                - spin_mean(spec, |i| {
                    let f = field(spec, i, x, v);
                    let r = d[i].hypot(f);
                    thermal_slope(beta, r) * ratio(f, r) * (2.0 * spec.gamma(i) + 4.0 * gp * x)
                });
            if u.len() == 1 {
                vec![du]
            } else {
                let dv = 2.0 * v
                    + spin_mean(spec, |i| {
                        let f = field(spec, i, x, v);
                        let r = d[i].hypot(f);
                        thermal_slope(beta, r) * ratio(f, r) * 4.0 * gp * v
                    });
                vec![du, dv]
            }
        }
        Family::AnisoInhomogeneous | Family::TavisCummings => {
            let (x, y) = (u[0], u[1]);
            let mut du = 2.0 * x;
            let mut dv = 2.0 * y;
            let n = spec.n_spins() as f64;
            for i in 0..spec.n_spins() {
                let gi = spec.gamma(i);
                let l = spec.lambda(i);
                let a2 = (gi * (1.0 + l)).powi(2);
                let b2 = (gi * (1.0 - l)).powi(2);
                let r = (d[i] * d[i] + a2 * x * x + b2 * y * y).sqrt();
                let t = thermal_slope(beta, r);
                du -= t * ratio(a2 * x, r) / n;
                dv -= t * ratio(b2 * y, r) / n;
            }
            vec![du, dv]
        }
        Family::Multimode => {
            let gammas = &spec.params.gamma_i_nu[0];
            let s: f64 = gammas.iter().zip(u).map(|(g, x)| g * x).sum();
            let k = spin_mean(spec, |i| {
                let r = d[i].hypot(2.0 * s);
                thermal_slope(beta, r) * ratio(2.0 * s, r) * 2.0
            });
            u.iter().zip(gammas).map(|(x, g)| 2.0 * x - k * g).collect()
        }
        Family::TwoQubitXyz => {
            let x = u[0];
            let (values, slopes) = eigenvalue_slopes(x, &xyz_params(spec));
            let slope = match beta {
                Beta::Infinite => slopes[0],
                Beta::Finite(b) => {
                    let w = values.map(|l| (-b * (l - values[0])).exp());
                    w.iter().zip(&slopes).map(|(a, s)| a * s).sum::<f64>() / w.iter().sum::<f64>()
                }
            };
            vec![2.0 * x + slope]
        }
    };
    g
}

/// Hellmann–Feynman derivative `2u + ⟨gs|∂h/∂u|gs⟩` of the zero-temperature XYZ potential.
pub fn xyz_grad_hellmann_feynman(spec: &ModelSpec, u: f64) -> Result<f64> {
    let p = XyzParams::from_spec(spec)?;
    Ok(2.0 * u + lowest_eigenvalue_slope(u, &p))
}

/// Smallest Hessian eigenvalue of `φ` at the origin (meaningful when the origin is an extremum).
pub fn origin_curvature(spec: &ModelSpec) -> f64 {
    let beta = spec.beta();
    let d = &spec.params.delta_i;
    let along = |coupling2: &dyn Fn(usize) -> f64| {
        2.0 - spin_mean(spec, |i| {
            let c = coupling2(i);
            if c == 0.0 {
                0.0
            } else {
                c * thermal_slope_over_r(beta, d[i])
            }
        })
    };
    match spec.family {
        Family::Dqr | Family::Biased | Family::TwoPhoton => along(&|i| 4.0 * spec.gamma(i).powi(2)),
        Family::AnisoInhomogeneous | Family::TavisCummings => {
            let cu = along(&|i| (spec.gamma(i) * (1.0 + spec.lambda(i))).powi(2));
            let cv = along(&|i| (spec.gamma(i) * (1.0 - spec.lambda(i))).powi(2));
            cu.min(cv)
        }
        Family::Multimode => {
            let g2: f64 = spec.params.gamma_i_nu[0].iter().map(|g| g * g).sum();
            along(&|_| 4.0 * g2).min(2.0)
        }
        Family::TwoQubitXyz => match beta {
            Beta::Infinite => xyz_origin_curvature(&xyz_params(spec)),
            Beta::Finite(_) => {
                let h = 1e-4;
                2.0 * (phi_unchecked(spec, &[h]) - phi_unchecked(spec, &[0.0])) / (h * h)
            }
        },
    }
}

struct Candidate {
    x: Vec<f64>,
    f: f64,
    converged: bool,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Grid scan plus golden-section refinement of the best local minima on an interval.
///
/// Golden section resolves a smooth minimum only to about `√ε` relative; when a derivative is
/// supplied, the result is polished by bisecting its sign change.
fn minimize_1d<F: Fn(f64) -> f64>(f: &F, df: Option<&dyn Fn(f64) -> f64>, lo: f64, hi: f64, n: usize, budget: &ScanBudget) -> Vec<Candidate> {
    let xs = linspace(lo, hi, n.max(3));
    let fs: Vec<f64> = xs.iter().map(|x| f(*x)).collect();
    let pitch = (hi - lo) / (xs.len() - 1) as f64;
    let mut locals: Vec<usize> = (0..xs.len())
        .filter(|&i| (i == 0 || fs[i] <= fs[i - 1]) && (i + 1 == xs.len() || fs[i] <= fs[i + 1]))
        .collect();
    locals.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]));
    locals.truncate(budget.candidates.max(1));
    locals
        .into_iter()
        .map(|i| {
            let a = (xs[i] - pitch).max(lo);
            let b = (xs[i] + pitch).min(hi);
            let (mut x, mut fx, ok) = golden_section(f, a, b, budget.tol, budget.max_iter);
            if fs[i] < fx {
                (x, fx) = (xs[i], fs[i]);
            }
            if let Some(df) = df {
                // flat minima leave golden section further out, so widen the bracket up to the cell
                let mut w = 1e-6 * (1.0 + x.abs());
                let (mut pa, mut pb) = ((x - w).max(a), (x + w).min(b));
                while !(df(pa) < 0.0 && df(pb) > 0.0) && (pa > a || pb < b) {
                    w *= 8.0;
                    (pa, pb) = ((x - w).max(a), (x + w).min(b));
                }
                if df(pa) < 0.0 && df(pb) > 0.0 {
                    let xp = bisect_root(df, pa, pb, 0.0);
                    let fp = f(xp);
                    // values agree to eigensolver round-off here; the derivative root is the sharper location
                    if fp <= fx + 1e-12 * (1.0 + fx.abs()) {
                        (x, fx) = (xp, fp);
                    }
                }
            }
            Candidate { x: vec![x], f: fx, converged: ok }
        })
        .collect()
}

/// Grid scan on a rectangle, then cyclic coordinate golden-section descent from the best local minima.
fn minimize_2d<F: Fn(&[f64]) -> f64>(f: &F, lo: [f64; 2], hi: [f64; 2], n: [usize; 2], budget: &ScanBudget) -> Vec<Candidate> {
    let xs = linspace(lo[0], hi[0], n[0].max(3));
    let ys = linspace(lo[1], hi[1], n[1].max(3));
    let (nx, ny) = (xs.len(), ys.len());
    let mut fs = vec![0.0; nx * ny];
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            fs[i * ny + j] = f(&[*x, *y]);
        }
    }
    let pitch = [(hi[0] - lo[0]) / (nx - 1) as f64, (hi[1] - lo[1]) / (ny - 1) as f64];
    let mut locals = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let v = fs[i * ny + j];
            let mut is_min = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= nx as i64 || b >= ny as i64 {
                        continue;
                    }
                    if fs[a as usize * ny + b as usize] < v {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                locals.push((i, j));
            }
        }
    }
    locals.sort_by(|a, b| fs[a.0 * ny + a.1].total_cmp(&fs[b.0 * ny + b.1]));
    locals.truncate(budget.candidates.max(1));
    locals
        .into_iter()
        .map(|(i, j)| {
            let mut p = [xs[i], ys[j]];
            let mut fp = fs[i * ny + j];
            let mut h = pitch;
            let mut converged = false;
            for _ in 0..200 {
                let mut moved: f64 = 0.0;
                for k in 0..2 {
                    let a = (p[k] - h[k]).max(lo[k]);
                    let b = (p[k] + h[k]).min(hi[k]);
                    let line = |t: f64| {
                        let mut q = p;
                        q[k] = t;
                        f(&q)
                    };
                    let (t, ft, _) = golden_section(line, a, b, budget.tol, budget.max_iter);
                    if ft <= fp {
                        let step = (t - p[k]).abs();
                        moved = moved.max(step);
                        // widen when the line minimum sits on the bracket edge
                        h[k] = if step > 0.9 * h[k] { 2.0 * h[k] } else { (4.0 * step).max(10.0 * budget.tol) };
                        p[k] = t;
                        fp = ft;
                    }
                }
                if moved < budget.tol {
                    converged = true;
                    break;
                }
            }
            Candidate { x: p.to_vec(), f: fp, converged }
        })
        .collect()
}

/// Merge refined candidates into a [`MinResult`], adding symmetry images and snapping to the origin.
fn assemble<F: Fn(&[f64]) -> f64>(
    spec: &ModelSpec,
    f: &F,
    origin: Vec<f64>,
    mut cands: Vec<Candidate>,
    mirrors: &dyn Fn(&[f64]) -> Vec<Vec<f64>>,
) -> (Vec<Vec<f64>>, f64, bool) {
    cands.sort_by(|a, b| a.f.total_cmp(&b.f));
    let converged = cands.iter().all(|c| c.converged);
    let best = cands[0].f;
    let f0 = f(&origin);
    if spec.origin_is_extremum() && f0 <= best + ORIGIN_PREFERENCE && origin_curvature(spec) >= 0.0 {
        return (vec![origin], f0, converged);
    }
    let mut minima: Vec<Vec<f64>> = Vec::new();
    let push = |x: Vec<f64>, minima: &mut Vec<Vec<f64>>| {
        let dup = minima.iter().any(|m| m.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-6 * (1.0 + a.abs())));
        if !dup {
            minima.push(x);
        }
    };
    for c in cands.iter().filter(|c| c.f <= best + DEGENERACY_TOL) {
        push(c.x.clone(), &mut minima);
        for m in mirrors(&c.x) {
            if f(&m) <= best + DEGENERACY_TOL {
                push(m, &mut minima);
            }
        }
    }
    minima.sort_by(|a, b| {
        let neg = |v: &Vec<f64>| v.iter().filter(|x| **x < 0.0).count();
        neg(a).cmp(&neg(b)).then_with(|| b.iter().zip(a.iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal))
    });
    (minima, best, converged)
}

fn odd_mirror(x: &[f64]) -> Vec<Vec<f64>> {
    vec![x.iter().map(|v| -v).collect()]
}

/// Global minimum of [`phi`] over the scan box `[−R, R]^arity`.
pub fn minimize_global(spec: &ModelSpec, budget: &ScanBudget) -> Result<MinResult> {
    spec.ensure_valid()?;
    let r = spec.scan_radius();
    let symmetric = spec.origin_is_extremum() && !(spec.family == Family::TwoPhoton && spec.params.gamma_prime != 0.0);
    match spec.family {
        Family::Dqr | Family::Biased | Family::TwoQubitXyz | Family::TwoPhoton => {
            let f = |x: f64| phi_unchecked(spec, &[x]);
            let df = |x: f64| grad_unchecked(spec, &[x])[0];
            let cands = minimize_1d(&f, Some(&df), -r, r, budget.points, budget);
            let fv = |x: &[f64]| phi_unchecked(spec, x);
            let no_mirror = |_: &[f64]| Vec::new();
            let mirrors: &dyn Fn(&[f64]) -> Vec<Vec<f64>> = if symmetric { &odd_mirror } else { &no_mirror };
            let (minima, phi_min, converged) = assemble(spec, &fv, vec![0.0], cands, mirrors);
            Ok(finish(minima, phi_min, false, converged, |m| vec![m[0] * m[0]]))
        }
        Family::TavisCummings => {
            let f = |x: f64| phi_unchecked(spec, &[x, 0.0]);
            let df = |x: f64| grad_unchecked(spec, &[x, 0.0])[0];
            let cands = minimize_1d(&f, Some(&df), 0.0, r, budget.points.div_ceil(2), budget);
            let cands = cands.into_iter().map(|c| Candidate { x: vec![c.x[0], 0.0], ..c }).collect();
            let fv = |x: &[f64]| phi_unchecked(spec, x);
            let (minima, phi_min, converged) = assemble(spec, &fv, vec![0.0, 0.0], cands, &|_| Vec::new());
            let rotational = minima[0][0] != 0.0;
            Ok(finish(minima, phi_min, rotational, converged, |m| vec![m[0] * m[0] + m[1] * m[1]]))
        }
        Family::AnisoInhomogeneous => {
            let fv = |x: &[f64]| phi_unchecked(spec, x);
            let half = budget.points.div_ceil(2);
            let cands = minimize_2d(&fv, [0.0, 0.0], [r, r], [half, half], budget);
            let mirrors = |x: &[f64]| vec![vec![-x[0], x[1]], vec![x[0], -x[1]], vec![-x[0], -x[1]]];
            let (minima, phi_min, converged) = assemble(spec, &fv, vec![0.0, 0.0], cands, &mirrors);
            Ok(finish(minima, phi_min, false, converged, |m| vec![m[0] * m[0] + m[1] * m[1]]))
        }
        Family::Multimode => {
            let gammas = spec.params.gamma_i_nu[0].clone();
            let norm = gammas.iter().map(|g| g * g).sum::<f64>().sqrt();
            let m = gammas.len();
            if norm == 0.0 {
                let origin = vec![0.0; m];
                let phi0 = phi_unchecked(spec, &origin);
                return Ok(finish(vec![origin], phi0, false, true, |x| x.iter().map(|v| v * v).collect()));
            }
            let unit: Vec<f64> = gammas.iter().map(|g| g / norm).collect();
            let embed = |s: f64| unit.iter().map(|e| e * s).collect::<Vec<_>>();
            let f = |s: f64| phi_unchecked(spec, &embed(s));
            let df = |s: f64| grad_unchecked(spec, &embed(s)).iter().zip(&unit).map(|(g, e)| g * e).sum::<f64>();
            let cands = minimize_1d(&f, Some(&df), -r, r, budget.points, budget);
            let cands = cands.into_iter().map(|c| Candidate { x: embed(c.x[0]), ..c }).collect();
            let fv = |x: &[f64]| phi_unchecked(spec, x);
            let (minima, phi_min, converged) = assemble(spec, &fv, vec![0.0; m], cands, &odd_mirror);
            Ok(finish(minima, phi_min, false, converged, |x| x.iter().map(|v| v * v).collect()))
        }
    }
}

fn finish(minima: Vec<Vec<f64>>, phi_min: f64, rotational: bool, converged: bool, op: impl Fn(&[f64]) -> Vec<f64>) -> MinResult {
    let order_parameter = op(&minima[0]);
    MinResult { degenerate: minima.len() > 1 || rotational, minima, phi_min, order_parameter, rotational, converged }
}

/// Minimization without family-specific reductions: the full two-variable two-photon potential,
/// or a full-plane scan of a two-mode multimode potential. Other families defer to [`minimize_global`].
pub fn minimize_dense(spec: &ModelSpec, budget: &ScanBudget) -> Result<MinResult> {
    spec.ensure_valid()?;
    let r = spec.scan_radius();
    let fv = |x: &[f64]| phi_unchecked(spec, x);
    match spec.family {
        Family::TwoPhoton => {
            let half = budget.points.div_ceil(2);
            let cands = minimize_2d(&fv, [-r, 0.0], [r, r], [budget.points, half], budget);
            let mirrors = |x: &[f64]| vec![vec![x[0], -x[1]]];
            let (minima, phi_min, converged) = assemble(spec, &fv, vec![0.0, 0.0], cands, &mirrors);
            Ok(finish(minima, phi_min, false, converged, |m| vec![m[0] * m[0] + m[1] * m[1]]))
        }
        Family::Multimode if spec.n_modes() == 2 => {
            let cands = minimize_2d(&fv, [-r, -r], [r, r], [budget.points, budget.points], budget);
            let (minima, phi_min, converged) = assemble(spec, &fv, vec![0.0, 0.0], cands, &odd_mirror);
            Ok(finish(minima, phi_min, false, converged, |x| x.iter().map(|v| v * v).collect()))
        }
        _ => minimize_global(spec, budget),
    }
}
