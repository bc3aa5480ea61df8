//! Conversions between complex n-vectors and real 2n-vectors, plus the
//! standard symplectic data on flat space.
//!
//! Real coordinates are interleaved: `(x1, y1, ..., xn, yn)` with
//! `z_j = x_j + i y_j`. The complex structure acts blockwise as
//! `J (x, y) = (-y, x)`.

use nalgebra::DVector;
use num_complex::Complex64;

pub type C64 = Complex64;

/// A point of `C^n` (or of the log-cylinder cover of `(C*)^n`), stored as
/// complex coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPoint {
    pub coords: Vec<C64>,
}

impl ComplexPoint {
    pub fn new(coords: Vec<C64>) -> Self {
        ComplexPoint { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Interleaved real coordinates `(x1, y1, ..., xn, yn)`.
    pub fn to_real(&self) -> DVector<f64> {
        let mut v = DVector::zeros(2 * self.coords.len());
        for (j, z) in self.coords.iter().enumerate() {
            v[2 * j] = z.re;
            v[2 * j + 1] = z.im;
        }
        v
    }

    pub fn from_real(v: &DVector<f64>) -> Self {
        assert!(v.len() % 2 == 0, "real vector length must be even");
        let coords = (0..v.len() / 2)
            .map(|j| C64::new(v[2 * j], v[2 * j + 1]))
            .collect();
        ComplexPoint { coords }
    }

    pub fn dist(&self, other: &ComplexPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl std::fmt::Display for ComplexPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (j, z) in self.coords.iter().enumerate() {
            if j > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}{:+}i", z.re, z.im)?;
        }
        write!(f, ")")
    }
}

/// Apply the complex structure `J` in interleaved real coordinates.
pub fn apply_j(v: &DVector<f64>) -> DVector<f64> {
    let mut w = DVector::zeros(v.len());
    for j in 0..v.len() / 2 {
        w[2 * j] = -v[2 * j + 1];
        w[2 * j + 1] = v[2 * j];
    }
    w
}

/// Standard flat symplectic form `omega(u, v) = <J u, v>`.
pub fn omega_flat(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    apply_j(u).dot(v)
}

/// The fixed primitive `lambda = 1/2 sum_i (x_i dy_i - y_i dx_i)` of the flat
/// form, evaluated on a tangent vector at `p`.
pub fn lambda_flat(p: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..p.len() / 2 {
        let (x, y) = (p[2 * j], p[2 * j + 1]);
        let (dx, dy) = (v[2 * j], v[2 * j + 1]);
        acc += 0.5 * (x * dy - y * dx);
    }
    acc
}

/// View an interleaved real vector as complex components.
pub fn real_to_complex(v: &DVector<f64>) -> Vec<C64> {
    (0..v.len() / 2)
        .map(|j| C64::new(v[2 * j], v[2 * j + 1]))
        .collect()
}

/// Pack complex components into the interleaved real layout.
pub fn complex_to_real(z: &[C64]) -> DVector<f64> {
    let mut v = DVector::zeros(2 * z.len());
    for (j, c) in z.iter().enumerate() {
        v[2 * j] = c.re;
        v[2 * j + 1] = c.im;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn j_squares_to_minus_one() {
        let v = DVector::from_vec(vec![1.0, 2.0, -0.5, 3.0]);
        let jj = apply_j(&apply_j(&v));
        for i in 0..4 {
            assert_abs_diff_eq!(jj[i], -v[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn omega_is_antisymmetric_and_lambda_primitive_matches_on_linear_paths() {
        let u = DVector::from_vec(vec![1.0, 0.0, 0.0, 2.0]);
        let v = DVector::from_vec(vec![0.0, 1.0, 1.0, 0.0]);
        assert_abs_diff_eq!(omega_flat(&u, &v), -omega_flat(&v, &u), epsilon = 1e-15);
        // omega(e_x, e_y) = 1 per coordinate pair
        let ex = DVector::from_vec(vec![1.0, 0.0]);
        let ey = DVector::from_vec(vec![0.0, 1.0]);
        assert_abs_diff_eq!(omega_flat(&ex, &ey), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn real_complex_round_trip() {
        let p = ComplexPoint::new(vec![C64::new(1.0, -2.0), C64::new(0.25, 3.5)]);
        let q = ComplexPoint::from_real(&p.to_real());
        assert_eq!(p, q);
    }
}
