use std::ops::{Add, Mul, Neg, Sub};

/// Minimal commutative ring used by the characteristic-polynomial recurrence.
pub trait Scalar: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn from_f64(x: f64) -> Self;
    fn scale(&self, s: f64) -> Self;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
}

/// Real polynomial, coefficients in ascending powers.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn constant(c: f64) -> Poly {
        Poly(vec![c])
    }

    /// `c0 + c1 x`.
    pub fn linear(c0: f64, c1: f64) -> Poly {
        Poly(vec![c0, c1])
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.0.get(k).copied().unwrap_or(0.0)
    }

    /// Degree after dropping exact-zero leading terms (`0` for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|c| *c != 0.0).unwrap_or(0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly::constant(0.0);
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect())
    }

    pub fn powi(&self, n: usize) -> Poly {
        (0..n).fold(Poly::constant(1.0), |acc, _| acc * self.clone())
    }

    /// Substitute `x² → w`, keeping only even powers of `x`.
    pub fn even_part_in_square(&self) -> Poly {
        Poly(self.0.iter().step_by(2).copied().collect())
    }

    /// Largest odd-power coefficient magnitude.
    pub fn odd_residue(&self) -> f64 {
        self.0.iter().skip(1).step_by(2).fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Descending coefficient list, `len = degree + 1`.
    pub fn descending(&self) -> Vec<f64> {
        self.0[..=self.degree()].iter().rev().copied().collect()
    }

    /// Real roots in `[lo, hi]`, ascending, including touching (even-multiplicity) roots.
    ///
    /// Derivative roots split the interval into monotone pieces; sign changes on each piece are
    /// bisected, and critical points where `|p|` is at round-off level count as double roots.
    pub fn real_roots(&self, lo: f64, hi: f64) -> Vec<f64> {
        let deg = self.degree();
        if deg == 0 || lo > hi {
            return Vec::new();
        }
        let crit = self.derivative().real_roots(lo, hi);
        let mut knots = vec![lo];
        knots.extend(crit.iter().copied().filter(|c| *c > lo && *c < hi));
        knots.push(hi);
        let sign = |x: f64| {
            let v = self.eval(x);
            // round-off bound of Horner evaluation at x
            let bound = self.0.iter().rev().fold(0.0, |acc, c| acc * x.abs() + c.abs());
            if v.abs() <= 1e-12 * bound {
                0
            } else if v > 0.0 {
                1
            } else {
                -1
            }
        };
        let signs: Vec<i32> = knots.iter().map(|x| sign(*x)).collect();
        let mut roots = Vec::new();
        for k in 0..knots.len() {
            if signs[k] == 0 {
                roots.push(knots[k]);
            }
            if k + 1 < knots.len() && signs[k] * signs[k + 1] < 0 {
                roots.push(crate::numerics::bisect_root(|x| self.eval(x), knots[k], knots[k + 1], 0.0));
            }
        }
        roots.dedup_by(|b, a| (*b - *a).abs() <= 1e-12 * (1.0 + a.abs()));
        roots
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        Poly((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        Poly((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly(self.0.into_iter().map(|c| -c).collect())
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        if self.0.is_empty() || rhs.0.is_empty() {
            return Poly::constant(0.0);
        }
        let mut out = vec![0.0; self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }
}

impl Scalar for Poly {
    fn from_f64(x: f64) -> Self {
        Poly::constant(x)
    }
    fn scale(&self, s: f64) -> Self {
        Poly(self.0.iter().map(|c| c * s).collect())
    }
}

/// Characteristic polynomial `det(λI − A)` by the Faddeev–LeVerrier recurrence.
///
/// Returns `n + 1` coefficients in descending powers of `λ`, leading `1`.
pub fn char_poly<T: Scalar, const N: usize>(a: &[[T; N]; N]) -> Vec<T> {
    let zero = T::from_f64(0.0);
    let mut coeffs = vec![T::from_f64(1.0)];
    // M_0 = 0, M_k = A M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(A M_k)/k
    let mut m: Vec<Vec<T>> = vec![vec![zero.clone(); N]; N];
    for k in 1..=N {
        let c_prev = coeffs[k - 1].clone();
        let mut next = vec![vec![zero.clone(); N]; N];
        for i in 0..N {
            for j in 0..N {
                let mut acc = zero.clone();
                for l in 0..N {
                    acc = acc + a[i][l].clone() * m[l][j].clone();
                }
                if i == j {
                    acc = acc + c_prev.clone();
                }
                next[i][j] = acc;
            }
        }
        m = next;
        let mut tr = zero.clone();
        for i in 0..N {
            for l in 0..N {
                tr = tr + a[i][l].clone() * m[l][i].clone();
            }
        }
        coeffs.push(tr.scale(-1.0 / k as f64));
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_char_poly() {
        let mut a = [[0.0; 4]; 4];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        assert_eq!(char_poly(&a), vec![1.0, -4.0, 6.0, -4.0, 1.0]);
    }

    #[test]
    fn diagonal_char_poly_is_elementary_symmetric() {
        let d = [2.0, -1.0, 0.5, 3.0];
        let mut a = [[0.0; 4]; 4];
        for i in 0..4 {
            a[i][i] = d[i];
        }
        let e1: f64 = d.iter().sum();
        let e4: f64 = d.iter().product();
        let c = char_poly(&a);
        assert!((c[1] + e1).abs() < 1e-14);
        assert!((c[4] - e4).abs() < 1e-14);
    }

    #[test]
    fn roots_of_products() {
        // (x-1)^2 (x-2)
        let p = Poly(vec![-2.0, 5.0, -4.0, 1.0]);
        let r = p.real_roots(-10.0, 10.0);
        assert_eq!(r.len(), 2, "{r:?}");
        assert!((r[0] - 1.0).abs() < 1e-7);
        assert!((r[1] - 2.0).abs() < 1e-12);
        let q = Poly(vec![-6.0, 11.0, -6.0, 1.0]);
        let r = q.real_roots(0.0, 10.0);
        assert_eq!(r.len(), 3);
        for (x, e) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - e).abs() < 1e-12);
        }
        assert!(Poly(vec![1.0, 0.0, 1.0]).real_roots(-5.0, 5.0).is_empty());
    }

    #[test]
    fn polynomial_entries() {
        // [[x, 1], [1, -x]]: det(λI - A) = λ² - x² - 1
        let a = [[Poly::linear(0.0, 1.0), Poly::constant(1.0)], [Poly::constant(1.0), Poly::linear(0.0, -1.0)]];
        let c = char_poly(&a);
        assert_eq!(c[1].eval(0.7), 0.0);
        assert!((c[2].eval(0.7) + 1.49).abs() < 1e-15);
    }
}
