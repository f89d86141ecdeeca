use serde::{Deserialize, Serialize};

use super::matrix::{build_h_xyz, smallest_eigenvalue, SymMatrix4, XyzParams};
use super::poly::{char_poly, Poly};

/// The cubic `P(w)` obtained from the secular equation with `λ = λ(0) − w` and `u² = w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalityCubic {
    /// Descending coefficients `[a, b, c, d]` of `a w³ + b w² + c w + d`.
    pub coeffs: [f64; 4],
    /// Lowest eigenvalue of `h(0)`.
    pub lambda0: f64,
    /// Constant term of the undivided quartic, zero up to round-off since `w = 0` is always a root.
    pub dropped_constant: f64,
    /// Largest odd-power coefficient of the secular polynomial in `u`; zero up to round-off by parity.
    pub odd_residue: f64,
}

impl CriticalityCubic {
    pub fn eval(&self, w: f64) -> f64 {
        let [a, b, c, d] = self.coeffs;
        ((a * w + b) * w + c) * w + d
    }

    pub fn poly(&self) -> Poly {
        let [a, b, c, d] = self.coeffs;
        Poly(vec![d, c, b, a])
    }

    /// Positive roots `w ≤ w_max`, ascending, double roots included once.
    pub fn positive_roots(&self, w_max: f64) -> Vec<f64> {
        self.poly().real_roots(0.0, w_max).into_iter().filter(|w| *w > 0.0).collect()
    }
}

/// Collect `P(w) = det(h(√w) − (λ(0) − w)·1) / w` by polynomial arithmetic.
///
/// `det(h − μ)` is expanded with Faddeev–LeVerrier over polynomial entries in `u`, then
/// `μ = λ(0) − w` and `u² = w` are substituted. The quartic in `w` vanishes at `w = 0`
/// because `λ(0)` is an eigenvalue of `h(0)`, so it is divided by `w`.
pub fn criticality_cubic(p: &XyzParams) -> CriticalityCubic {
    let h0 = build_h_xyz(0.0, p);
    let h1 = build_h_xyz(1.0, p);
    let lambda0 = smallest_eigenvalue(&h0);
    let entries: [[Poly; 4]; 4] = std::array::from_fn(|i| {
        std::array::from_fn(|j| Poly::linear(h0.get(i, j), h1.get(i, j) - h0.get(i, j)))
    });
    // det(μI − h) = det(h − μI) for a 4×4 matrix
    let c = char_poly(&entries);
    let mu = Poly::linear(lambda0, -1.0);
    let mut quartic = Poly::constant(0.0);
    let mut odd: f64 = 0.0;
    for (k, ck) in c.iter().enumerate() {
        let power = 4 - k;
        odd = odd.max(ck.odd_residue());
        quartic = quartic + ck.even_part_in_square() * mu.powi(power);
    }
    let q: Vec<f64> = (0..5).map(|k| quartic.coeff(k)).collect();
    CriticalityCubic {
        coeffs: [q[4], q[3], q[2], q[1]],
        lambda0,
        dropped_constant: q[0],
        odd_residue: odd,
    }
}

/// Determinant of a symmetric 4×4 by cofactor expansion along the first row.
pub fn det4(m: &SymMatrix4) -> f64 {
    let a = m.rows();
    let minor = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|c| *c != skip).collect();
        let r = |i: usize, j: usize| a[i][cols[j]];
        r(1, 0) * (r(2, 1) * r(3, 2) - r(2, 2) * r(3, 1)) - r(1, 1) * (r(2, 0) * r(3, 2) - r(2, 2) * r(3, 0))
            + r(1, 2) * (r(2, 0) * r(3, 1) - r(2, 1) * r(3, 0))
    };
    (0..4).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } * a[0][j] * minor(j)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discriminant {
    pub value: f64,
    /// Leading coefficient negligible: `value` is the quadratic discriminant of the remainder.
    pub quadratic_fallback: bool,
}

/// Discriminant of `a w³ + b w² + c w + d` (descending coefficients).
pub fn cubic_discriminant(coeffs: &[f64; 4]) -> Discriminant {
    let [a, b, c, d] = *coeffs;
    let scale = coeffs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if a.abs() <= 1e-14 * scale {
        return Discriminant { value: c * c - 4.0 * b * d, quadratic_fallback: true };
    }
    let value = 18.0 * a * b * c * d - 4.0 * b.powi(3) * d + b * b * c * c - 4.0 * a * c.powi(3) - 27.0 * a * a * d * d;
    Discriminant { value, quadratic_fallback: false }
}

/// The repeated root of a cubic with vanishing discriminant.
pub fn cubic_double_root(coeffs: &[f64; 4]) -> f64 {
    let [a, b, c, d] = *coeffs;
    (9.0 * a * d - b * c) / (2.0 * (b * b - 3.0 * a * c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn discriminant_signs() {
        // (w-1)^2 (w-2)
        let d = cubic_discriminant(&[1.0, -4.0, 5.0, -2.0]);
        assert!(d.value.abs() < 1e-12 && !d.quadratic_fallback);
        assert!((cubic_double_root(&[1.0, -4.0, 5.0, -2.0]) - 1.0).abs() < 1e-12);
        assert!(cubic_discriminant(&[1.0, -6.0, 11.0, -6.0]).value > 0.0);
        assert!(cubic_discriminant(&[1.0, 0.0, 1.0, 1.0]).value < 0.0);
        assert!(cubic_discriminant(&[0.0, 1.0, -3.0, 2.0]).quadratic_fallback);
    }

    #[test]
    fn cubic_matches_sampled_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let p = XyzParams {
                gamma: [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
                delta: [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
                epsilon: [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
            };
            let cubic = criticality_cubic(&p);
            assert!(cubic.odd_residue < 1e-10);
            for _ in 0..50 {
                let w: f64 = rng.gen_range(0.01..10.0);
                let h = build_h_xyz(w.sqrt(), &p);
                let shifted = SymMatrix4::from_upper(std::array::from_fn(|i| {
                    std::array::from_fn(|j| h.get(i, j) - if i == j { cubic.lambda0 - w } else { 0.0 })
                }));
                let direct = det4(&shifted);
                let via = w * cubic.eval(w);
                assert!((direct - via).abs() <= 1e-8 * direct.abs().max(1.0), "{direct} vs {via}");
            }
        }
    }

    #[test]
    fn decoupled_pair_crosses_zero_at_second_order_point() {
        // ε = 0, δ = 1: P(w) = (2 + w)^2 (w + 4 − 16γ²)
        for g in [0.3, 0.5, 0.8] {
            let p = XyzParams { gamma: [g, g], delta: [1.0, 1.0], epsilon: [0.0; 3] };
            let c = criticality_cubic(&p);
            let expect = [1.0, 8.0 - 16.0 * g * g, 20.0 - 64.0 * g * g, 16.0 - 64.0 * g * g];
            for k in 0..4 {
                assert!((c.coeffs[k] - expect[k]).abs() < 1e-12, "{:?}", c.coeffs);
            }
        }
    }
}
