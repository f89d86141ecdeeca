//! Acceptance criteria, one PASS/FAIL line each. Runs sequentially so the runtime limits are
//! measured without competing criteria.

use std::time::{Duration, Instant};

use nalgebra::{Matrix2, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spt_core::bounds::{verify_bounds, Quadrature};
use spt_core::critical::{
    critical_line_multimode, critical_scan, critical_scan_all, order_parameter_curve, phase_diagram, xyz_discriminant_scan, Axis,
    Order, Ray, ScanOptions,
};
use spt_core::ed::{solve_lowest, solve_sector, HilbertSpec};
use spt_core::landau::minimize_dense;
use spt_core::spinblock::{photon_distribution_variational, variational_state};
use spt_core::{grad_phi, minimize_global, phi, Beta, Family, ModelSpec, PhysicalParams, ScanBudget};

struct Criterion {
    checks: Vec<(bool, String)>,
}

impl Criterion {
    fn new() -> Self {
        Criterion { checks: Vec::new() }
    }

    fn near(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        let ok = (got - want).abs() <= tol;
        self.checks.push((ok, format!("{what} = {got:.7} (want {want} ± {tol:e})")));
    }

    fn that(&mut self, what: &str, ok: bool) {
        self.checks.push((ok, what.to_string()));
    }

    fn runtime(&mut self, t: Duration, limit_s: f64) {
        let s = t.as_secs_f64();
        self.checks.push((s < limit_s, format!("runtime {s:.2} s (< {limit_s} s)")));
    }

    fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.0)
    }

    fn line(&self) -> String {
        self.checks
            .iter()
            .map(|(ok, s)| if *ok { s.clone() } else { format!("!! {s}") })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

fn c1() -> Criterion {
    let mut c = Criterion::new();
    let t = Instant::now();
    let spec = ModelSpec::dqr(0.0, 1, Beta::Infinite);
    let r = critical_scan(&spec, &Ray::homogeneous(1), (0.0, 1.2), &ScanOptions::default()).unwrap();
    let u2 = minimize_global(&ModelSpec::dqr(1.0, 1, Beta::Infinite), &ScanBudget::default()).unwrap().u2();
    c.runtime(t.elapsed(), 1.0);
    c.near("gamma_c", r.t_c.unwrap_or(f64::NAN), 0.707107, 1e-4);
    c.that(&format!("order {}", r.order.as_str()), r.order == Order::Second);
    c.near("u^2(gamma=1)", u2, 0.75, 1e-6);
    c
}

fn c2() -> Criterion {
    let mut c = Criterion::new();
    let t = Instant::now();
    for bd in [0.5, 1.0, 2.0, 5.0f64] {
        let spec = ModelSpec::dqr(0.0, 1, Beta::Finite(bd));
        let r = critical_scan(&spec, &Ray::homogeneous(1), (0.0, 1.5), &ScanOptions::default()).unwrap();
        let want = 1.0 / (2.0 * bd.tanh()).sqrt();
        c.near(&format!("gamma_c(bD={bd})"), r.t_c.unwrap_or(f64::NAN), want, 1e-5);
    }
    c.runtime(t.elapsed(), 5.0);
    c
}

fn c3() -> Criterion {
    let mut c = Criterion::new();
    let t = Instant::now();
    let spec = ModelSpec::two_photon(0.0, 0.25, 1, Beta::Infinite);
    let r = critical_scan(&spec, &Ray::homogeneous(1), (0.0, 1.2), &ScanOptions::default()).unwrap();
    c.near("gamma_c", r.t_c.unwrap_or(f64::NAN), 0.612372, 1e-4);
    c.near("jump", r.jump, 0.6667, 1e-3);
    c.that(&format!("order {}", r.order.as_str()), r.order == Order::First);
    let axes = [Axis::new("gamma_prime", 0.0, 0.45, 46), Axis::new("gamma", 0.0, 1.2, 241)];
    let pitch = axes[1].pitch();
    let grid = phase_diagram(&spec, axes.clone(), &ScanBudget::default()).unwrap();
    let mut worst: f64 = 0.0;
    for (i, gp) in axes[0].values().iter().enumerate() {
        let line = ((1.0 - 4.0 * gp * gp) / 2.0).sqrt();
        let first_sr = (0..axes[1].count).map(|j| grid.cell(i, j)).find(|cell| cell.phase.is_superradiant());
        let d = first_sr.map_or(f64::INFINITY, |cell| (cell.param2 - line).abs());
        worst = worst.max(d);
    }
    c.that(&format!("grid boundary within {worst:.2e} of 2g^2+4g'^2=1 (cell {pitch:.2e})"), worst <= pitch);
    c.runtime(t.elapsed(), 30.0);
    c
}

fn rabi_like(delta_over_omega: f64, gamma: f64, gp: f64) -> PhysicalParams {
    PhysicalParams {
        omega: vec![1.0],
        delta: vec![delta_over_omega],
        g: vec![vec![gamma * delta_over_omega.sqrt()]],
        lambda: vec![],
        bias: vec![],
        g_prime: gp,
        j_alpha: [0.0; 3],
        beta: Beta::Infinite,
    }
}

fn c4() -> Criterion {
    let mut c = Criterion::new();
    let t = Instant::now();
    let (d, gp, n_max) = (200.0, 0.25, 600);
    // 0.866 in the √2-rescaled coupling convention
    let converted = 0.866 * 0.5f64.sqrt();
    let gamma_c = (0.375f64).sqrt();
    c.near("0.866/sqrt2 vs gamma_c", converted, gamma_c, 1e-3);
    let photons = |g: f64| {
        let p = rabi_like(d, g, gp);
        let h = HilbertSpec::for_params(&p, n_max);
        solve_lowest(&p, Family::TwoPhoton, &h, 1).unwrap().photon_number[0][0]
    };
    let dim = HilbertSpec::new(n_max, 1, 1).dim();
    let (mut lo, mut hi) = (gamma_c - 0.01, gamma_c + 0.01);
    let (n_lo, n_hi) = (photons(lo), photons(hi));
    let predicted = d * (2.0 * gp / gamma_c).powi(2);
    let mut below = n_lo;
    let mut above = n_hi;
    while hi - lo > 1e-4 {
        let m = 0.5 * (lo + hi);
        let n = photons(m);
        if n > 0.5 * predicted {
            hi = m;
            above = n;
        } else {
            lo = m;
            below = n;
        }
    }
    c.that(&format!("dim {dim}, window [{:.4}, {:.4}] endpoints <n> = {n_lo:.3}, {n_hi:.1}", gamma_c - 0.01, gamma_c + 0.01), n_lo < 1.0);
    c.that(&format!("<n> just below the ED jump at {lo:.5}: {below:.3} < 1"), below < 1.0);
    c.near("<n> just above the ED jump", above, 400.0 / 3.0, 7.0);
    c.runtime(t.elapsed(), 300.0);
    c
}

fn c5() -> Criterion {
    let mut c = Criterion::new();
    let t = Instant::now();
    let spec = ModelSpec::dqr(1.0, 1, Beta::Infinite).with_c(256.0);
    let p = spec.to_physical(1.0).unwrap();
    let n_max = 512;
    let min = minimize_global(&spec, &ScanBudget::default()).unwrap();
    let vs = variational_state(&spec, &min, 256.0).unwrap();
    let ed = solve_sector(&p, Family::Dqr, &HilbertSpec::for_params(&p, n_max), vs.parity_sector, 1).unwrap();
    let var = photon_distribution_variational(&vs, Some(n_max)).unwrap();
    let tv: f64 = 0.5
        * (0..=n_max)
            .map(|n| (var.excited[n] - ed.distribution[n][0]).abs() + (var.ground[n] - ed.distribution[n][1]).abs())
            .sum::<f64>();
    c.near("<a+a>_ED", ed.photon_number[0][0], 192.0, 2.0);
    c.that(&format!("total variation {tv:.4} < 0.05"), tv < 0.05);
    c.runtime(t.elapsed(), 180.0);
    c
}

/// Ground energy of `u² + λ_min(h(u))` built from Kronecker products, independent of the package.
fn xyz_phi_oracle(gamma: f64, delta: f64, eps: [f64; 3], u: f64) -> f64 {
    let i2 = Matrix2::<f64>::identity();
    let sx = Matrix2::new(0.0, 1.0, 1.0, 0.0);
    let sz = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    // σ_y ⊗ σ_y is real: −(iσ_y)⊗(iσ_y)
    let isy = Matrix2::new(0.0, 1.0, -1.0, 0.0);
    let h: Matrix4<f64> = (sz.kronecker(&i2) + i2.kronecker(&sz)) * delta
        + (sx.kronecker(&i2) + i2.kronecker(&sx)) * (2.0 * gamma * u)
        + sx.kronecker(&sx) * eps[0]
        - isy.kronecker(&isy) * eps[1]
        + sz.kronecker(&sz) * eps[2];
    u * u + h.symmetric_eigenvalues().min()
}

fn xyz_oracle_transition(delta: f64, eps: [f64; 3]) -> (f64, f64) {
    let best = |g: f64| {
        let f0 = xyz_phi_oracle(g, delta, eps, 0.0);
        let (mut bu, mut bf) = (0.0, f0);
        for k in 1..=3000 {
            let u = 4.0 * k as f64 / 3000.0;
            let f = xyz_phi_oracle(g, delta, eps, u);
            if f < bf {
                bu = u;
                bf = f;
            }
        }
        (bu, bf < f0 - 1e-12)
    };
    let (mut lo, mut hi) = (0.3, 1.5);
    for _ in 0..40 {
        let m = 0.5 * (lo + hi);
        if best(m).1 {
            hi = m;
        } else {
            lo = m;
        }
    }
    (hi, best(hi).0.powi(2))
}

fn c6() -> Criterion {
    let mut c = Criterion::new();
    let t = Instant::now();
    let opts = ScanOptions::default();
    let iso = ModelSpec::xyz([0.0, 0.0], [1.0, 1.0], [1.0; 3], Beta::Infinite);
    let r = critical_scan(&iso, &Ray::homogeneous(2), (0.0, 1.5), &opts).unwrap();
    c.near("isotropic eps=1 gamma_c", r.t_c.unwrap_or(f64::NAN), 0.70711, 1e-4);
    c.near("isotropic eps=1 jump", r.jump, 1.75, 1e-3);
    c.that(&format!("isotropic eps=1 order {}", r.order.as_str()), r.order == Order::First);
    let (g_oracle, jump_oracle) = xyz_oracle_transition(1.0, [1.0; 3]);
    c.that(&format!("[info] Kronecker-product oracle: gamma_c = {g_oracle:.6}, u^2 = {jump_oracle:.4}"), true);
    let weak = ModelSpec::xyz([0.0, 0.0], [1.0, 1.0], [0.2; 3], Beta::Infinite);
    let r = critical_scan(&weak, &Ray::homogeneous(2), (0.0, 1.5), &opts).unwrap();
    c.near("isotropic eps=0.2 gamma_c", r.t_c.unwrap_or(f64::NAN), 0.5, 1e-4);
    c.that(&format!("isotropic eps=0.2 order {}", r.order.as_str()), r.order == Order::Second);
    c.runtime(t.elapsed(), 10.0);
    c
}

fn c7() -> Criterion {
    let mut c = Criterion::new();
    let t = Instant::now();
    let opts = ScanOptions::default();
    let cases: [(&str, ModelSpec, Ray, (f64, f64)); 3] = [
        ("x-only", ModelSpec::xyz([0.0, 0.0], [1.0, 1.0], [1.0, 0.0, 0.0], Beta::Infinite), Ray::homogeneous(2), (0.0, 1.5)),
        ("eps=(1.1,0.3,0.5)", ModelSpec::xyz([0.0, 0.0], [1.0, 1.0], [1.1, 0.3, 0.5], Beta::Infinite), Ray::homogeneous(2), (0.0, 1.5)),
        (
            "nonidentical",
            ModelSpec::xyz([0.0, 1.5], [3.0, 2.0], [3.0, 2.0, 1.0], Beta::Infinite),
            Ray { origin: vec![0.0, 1.5], direction: vec![1.0, 0.0] },
            (0.0, 2.0),
        ),
    ];
    let mut found = Vec::new();
    for (name, spec, ray, range) in &cases {
        let scan = critical_scan_all(spec, ray, *range, &opts).unwrap();
        let disc = xyz_discriminant_scan(spec, ray, *range, &opts).unwrap();
        let agree = scan.len() == disc.len()
            && scan.iter().zip(&disc).all(|(a, b)| a.order == b.order && (a.t_c.unwrap() - b.t_c.unwrap()).abs() <= 1e-5);
        let dt = scan.iter().zip(&disc).map(|(a, b)| (a.t_c.unwrap() - b.t_c.unwrap()).abs()).fold(0.0, f64::max);
        c.that(&format!("{name}: scan and discriminant agree ({} transitions, max |dt| {dt:.1e})", scan.len()), agree);
        found.push(scan);
    }
    let first = |k: usize, i: usize| found[k].get(i).cloned();
    if let Some(r) = first(0, 0) {
        c.near("x-only gamma_c", r.t_c.unwrap(), 0.803, 3e-3);
        c.near("x-only jump", r.jump, 1.308, 1e-2);
    } else {
        c.that("x-only transition found", false);
    }
    if let Some(r) = first(1, 0) {
        c.near("eps=(1.1,0.3,0.5) gamma_c", r.t_c.unwrap(), 0.781063, 1e-3);
        c.near("eps=(1.1,0.3,0.5) u_c^2", r.jump, 1.65378, 2e-3);
    } else {
        c.that("eps=(1.1,0.3,0.5) transition found", false);
    }
    match (first(2, 0), first(2, 1)) {
        (Some(a), Some(b)) => {
            c.near("nonidentical second-order gamma_1", a.t_c.unwrap(), 0.778, 5e-3);
            c.that(&format!("order {}", a.order.as_str()), a.order == Order::Second);
            c.near("nonidentical first-order gamma_1", b.t_c.unwrap(), 1.31, 1e-2);
            c.that(&format!("order {}", b.order.as_str()), b.order == Order::First);
            c.near("nonidentical jump", b.jump, 6.21, 5e-2);
        }
        _ => c.that("nonidentical: two transitions found", false),
    }
    c.runtime(t.elapsed(), 60.0);
    c
}

fn c8() -> Criterion {
    let mut c = Criterion::new();
    let t = Instant::now();
    let spec = ModelSpec::multimode(&[0.6, 0.6], &[1.0, 1.0], Beta::Infinite);
    c.near("critical norm (closed form)", critical_line_multimode(&spec), 0.70711, 1e-4);
    let unit = 0.5f64.sqrt();
    let r = critical_scan(&spec, &Ray::radial(vec![unit, unit]), (0.0, 1.2), &ScanOptions::default()).unwrap();
    c.near("critical norm (scan)", r.t_c.unwrap_or(f64::NAN), 0.70711, 1e-4);
    // per-mode u_ν² = u_eff²/2 with u_eff² = |γ|² − 1/(4|γ|²)
    let g2: f64 = 0.72;
    let oracle = (g2 - 1.0 / (4.0 * g2)) / 2.0;
    let m = minimize_global(&spec, &ScanBudget::default()).unwrap();
    c.near("per-mode order parameter", m.location()[0].powi(2), 0.186389, 1e-5);
    c.near("closed-form oracle", oracle, 0.186389, 1e-5);
    let dense = minimize_dense(&spec, &ScanBudget::default()).unwrap();
    let u = dense.location();
    let angle = ((u[0] * 0.6 + u[1] * 0.6) / ((u[0] * u[0] + u[1] * u[1]).sqrt() * 0.72f64.sqrt())).clamp(-1.0, 1.0).acos();
    let angle = angle.min(std::f64::consts::PI - angle);
    c.that(&format!("2-D minimizer angle to gamma vector {angle:.1e} < 1e-6"), angle < 1e-6);
    c.runtime(t.elapsed(), 10.0);
    c
}

fn c9() -> Criterion {
    let mut c = Criterion::new();
    let t = Instant::now();
    let spec = ModelSpec::biased(&[0.0], &[1.0], &[0.05], Beta::Infinite);
    let ts: Vec<f64> = (0..=300).map(|k| 1.5 * k as f64 / 300.0).collect();
    let curve = order_parameter_curve(&spec, &Ray::homogeneous(1), &ts, &ScanBudget::default()).unwrap();
    let u2: Vec<f64> = curve.iter().map(|(_, m)| m.u2()).collect();
    // γ = 0 decouples the spin, so only t > 0 can carry photons
    let min_pos = u2[1..].iter().copied().fold(f64::INFINITY, f64::min);
    c.that(&format!("min u^2 over gamma in (0, 1.5] = {min_pos:.3e} > 0"), min_pos > 0.0);
    let steps: Vec<f64> = u2.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let mut worst: f64 = 0.0;
    for k in 0..steps.len() {
        let left = if k > 0 { steps[k - 1] } else { steps[k + 1] };
        let right = if k + 1 < steps.len() { steps[k + 1] } else { steps[k - 1] };
        let local = left.max(right).max(f64::MIN_POSITIVE);
        worst = worst.max(steps[k] / local);
    }
    c.that(&format!("max step / local step {worst:.2} < 10"), worst < 10.0);
    let r = critical_scan(&spec, &Ray::homogeneous(1), (0.0, 1.5), &ScanOptions::default()).unwrap();
    c.that(&format!("order {}", r.order.as_str()), r.order == Order::None);
    c.runtime(t.elapsed(), 5.0);
    c
}

fn random_physical(rng: &mut ChaCha8Rng, family: Family) -> (PhysicalParams, usize) {
    let n = match family {
        Family::TwoQubitXyz => 2,
        _ => rng.gen_range(1..=2),
    };
    let delta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..2.0)).collect();
    let g: Vec<Vec<f64>> = delta.iter().map(|d: &f64| vec![rng.gen_range(0.0..1.5) * d.sqrt()]).collect();
    let mut p = PhysicalParams {
        omega: vec![1.0],
        delta,
        g,
        lambda: vec![],
        bias: vec![],
        g_prime: 0.0,
        j_alpha: [0.0; 3],
        beta: Beta::Infinite,
    };
    let mut n_max = 70;
    match family {
        Family::TavisCummings => p.lambda = vec![0.0; n],
        Family::TwoPhoton => {
            p.g_prime = rng.gen_range(-0.3..0.3);
            n_max = 170;
        }
        Family::TwoQubitXyz => p.j_alpha = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
        _ => {}
    }
    (p, n_max)
}

fn c10() -> Criterion {
    let mut c = Criterion::new();
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for family in [Family::Dqr, Family::TavisCummings, Family::TwoPhoton, Family::TwoQubitXyz] {
        let (mut held, mut total, mut worst_ratio) = (0, 0, f64::INFINITY);
        for _ in 0..20 {
            let (p, n_max) = random_physical(&mut rng, family);
            for beta in [0.5, 1.0] {
                let r = verify_bounds(&p, family, beta, &HilbertSpec::for_params(&p, n_max), &Quadrature::default()).unwrap();
                total += 1;
                let gap = r.ln_z - r.ln_z_tilde;
                let ok = r.holds(1e-7) && gap >= -1e-7 && gap <= beta + 1e-7;
                held += ok as usize;
                worst_ratio = worst_ratio.min(gap.min(beta - gap));
            }
        }
        c.that(&format!("{family:?}: {held}/{total} sandwiches hold (min slack in ln Z {worst_ratio:.2e})"), held == total);
    }
    c.runtime(t.elapsed(), 600.0);
    c
}

fn random_spec(rng: &mut ChaCha8Rng, family: Family) -> ModelSpec {
    let beta = Beta::Infinite;
    let n = rng.gen_range(1..=3);
    let gammas: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
    let deltas: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
    match family {
        Family::Dqr => ModelSpec::dqr_inhomogeneous(&gammas, &deltas, beta),
        Family::AnisoInhomogeneous => {
            let l: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            ModelSpec::aniso(&gammas, &deltas, &l, beta)
        }
        Family::TavisCummings => ModelSpec::tavis_cummings(&gammas, &deltas, beta),
        Family::Biased => {
            let e: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
            ModelSpec::biased(&gammas, &deltas, &e, beta)
        }
        Family::TwoPhoton => {
            let mut s = ModelSpec::two_photon(0.0, rng.gen_range(-0.45..0.45), n, beta).with_couplings(&gammas);
            s.params.delta_i = deltas;
            s
        }
        Family::TwoQubitXyz => ModelSpec::xyz(
            [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)],
            [rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0)],
            [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
            beta,
        ),
        Family::Multimode => ModelSpec::multimode(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], &deltas, beta),
    }
}

fn c11() -> Criterion {
    let mut c = Criterion::new();
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let families = [Family::Dqr, Family::AnisoInhomogeneous, Family::TavisCummings, Family::TwoPhoton, Family::TwoQubitXyz, Family::Multimode];

    // parity: u → −u (two-photon: v → −v, the symmetry its u-odd terms leave)
    let mut parity_bad = 0;
    for family in families {
        for k in 0..1000 {
            let spec = random_spec(&mut rng, family);
            let u: Vec<f64> = (0..spec.arity().max(if family == Family::TwoPhoton { 2 } else { 0 })).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let mirrored: Vec<f64> = match family {
                Family::TwoPhoton => vec![u[0], -u[1]],
                _ => u.iter().map(|x| -x).collect(),
            };
            let (a, b) = (phi(&spec, &u).unwrap(), phi(&spec, &mirrored).unwrap());
            let tol = if family == Family::TwoQubitXyz { 1e-12 * (1.0 + a.abs()) } else { 0.0 };
            if (a - b).abs() > tol {
                parity_bad += 1;
                if parity_bad < 3 {
                    eprintln!("parity mismatch {family:?} #{k}: {a} vs {b}");
                }
            }
        }
    }
    c.that(&format!("parity invariance on 6000 points ({parity_bad} mismatches)"), parity_bad == 0);

    let mut rot_worst: f64 = 0.0;
    for _ in 0..1000 {
        let spec = random_spec(&mut rng, Family::TavisCummings);
        let (u, v, th) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(0.0..std::f64::consts::TAU));
        let (s, co) = th.sin_cos();
        let a = phi(&spec, &[u, v]).unwrap();
        let b = phi(&spec, &[co * u - s * v, s * u + co * v]).unwrap();
        rot_worst = rot_worst.max((a - b).abs());
    }
    c.that(&format!("TC rotation invariance max |dphi| {rot_worst:.1e} < 1e-12"), rot_worst < 1e-12);

    let mut grad_worst: f64 = 0.0;
    for family in families {
        for _ in 0..100 {
            let spec = random_spec(&mut rng, family).with_beta(Beta::Finite(rng.gen_range(0.5..5.0)));
            let u: Vec<f64> = (0..spec.arity()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let g = grad_phi(&spec, &u).unwrap();
            for k in 0..u.len() {
                let h = 1e-5 * (1.0 + u[k].abs());
                let mut up = u.clone();
                let mut dn = u.clone();
                up[k] += h;
                dn[k] -= h;
                let fd = (phi(&spec, &up).unwrap() - phi(&spec, &dn).unwrap()) / (2.0 * h);
                grad_worst = grad_worst.max((g[k] - fd).abs() / g[k].abs().max(1.0));
            }
        }
    }
    c.that(&format!("gradient vs central differences max rel err {grad_worst:.1e} < 1e-5"), grad_worst < 1e-5);

    let mut var_bad = Vec::new();
    for k in 0..10 {
        let family = families[k % families.len()];
        let mut spec = random_spec(&mut rng, family).with_c(rng.gen_range(2.0..8.0));
        if family != Family::TwoQubitXyz && spec.n_spins() > 2 {
            spec = random_spec(&mut rng, family).with_c(3.0);
        }
        let c_val = spec.macroscopicity().unwrap();
        let e_mf = c_val * minimize_global(&spec, &ScanBudget::default()).unwrap().phi_min;
        let p = spec.to_physical(1.0).unwrap();
        let n_max = if spec.n_modes() > 1 { 20 } else { 80 };
        match solve_lowest(&p, family, &HilbertSpec::for_params(&p, n_max), 1) {
            Ok(r) => {
                if e_mf < r.energies[0] - 1e-9 * (1.0 + e_mf.abs()) {
                    var_bad.push(format!("{family:?}: {e_mf} < {}", r.energies[0]));
                }
            }
            Err(e) => var_bad.push(format!("{family:?}: {e}")),
        }
    }
    c.that(&format!("variational energy >= ED ground energy on 10 specs ({} violations)", var_bad.len()), var_bad.is_empty());
    for v in &var_bad {
        eprintln!("variational bound: {v}");
    }

    let mut flow_worst: f64 = 0.0;
    let mut located = 0;
    for family in [Family::Dqr, Family::AnisoInhomogeneous, Family::Biased, Family::TwoPhoton, Family::TwoQubitXyz, Family::Multimode] {
        let mut tries = 0;
        while tries < 20 {
            tries += 1;
            let base = random_spec(&mut rng, family);
            let spec = base.with_couplings(&base.couplings().iter().map(|g| 2.0 * g).collect::<Vec<_>>());
            let m = minimize_global(&spec, &ScanBudget::default()).unwrap();
            let u = m.location().to_vec();
            if m.u2() < 1e-3 {
                continue;
            }
            located += 1;
            let h = 1e-5;
            let fp = phi(&spec.scale_dipolar(1.0 + h), &u).unwrap();
            let fm = phi(&spec.scale_dipolar(1.0 - h), &u).unwrap();
            let d = (fp - fm) / (2.0 * h);
            flow_worst = flow_worst.max((d + 2.0 * m.u2()).abs());
        }
    }
    c.that(&format!("radial-flow identity at {located} minima, max |dphi/ds + 2u^2| {flow_worst:.1e} < 1e-6"), flow_worst < 1e-6);
    c.runtime(t.elapsed(), 120.0);
    c
}

fn main() {
    let criteria: [(&str, fn() -> Criterion); 11] = [
        ("DQR zero-temperature critical point", c1),
        ("DQR thermal critical line", c2),
        ("two-photon first-order transition", c3),
        ("two-photon exact diagonalization", c4),
        ("Rabi variational state vs exact diagonalization", c5),
        ("XYZ isotropic closed forms", c6),
        ("XYZ transitions, scan vs discriminant", c7),
        ("multimode assisted transition", c8),
        ("bias removes the transition", c9),
        ("partition-function sandwich bounds", c10),
        ("property suites", c11),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for (k, (title, run)) in criteria.iter().enumerate() {
        let id = format!("C{}", k + 1);
        if !filter.is_empty() && !filter.iter().any(|f| f.eq_ignore_ascii_case(&id)) {
            continue;
        }
        let c = run();
        let verdict = if c.pass() { "PASS" } else { "FAIL" };
        println!("{verdict} {id:<3} {title} | {}", c.line());
        if !c.pass() {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: failed {}", failed.join(", "));
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
