//! Metric contexts: flat on `C^n`, the log-cylinder model of `(C*)^n`, and
//! flat metrics perturbed by compactly supported Kahler-potential bumps.

use crate::error::{LgError, Result};
use crate::geometry::{apply_j, C64};
use nalgebra::{DMatrix, DVector};

/// A compactly supported radial Kahler-potential bump
/// `phi(z) = amplitude * psi(|z - center|^2 / radius^2)` with
/// `psi(q) = exp(-1/(1-q))` on `[0, 1)` and zero outside.
#[derive(Debug, Clone)]
pub struct Bump {
    pub center: Vec<C64>,
    pub radius: f64,
    pub amplitude: f64,
}

fn psi(q: f64) -> (f64, f64, f64) {
    // value, first and second derivative in q
    if q >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let d = 1.0 - q;
    let v = (-1.0 / d).exp();
    let dv = -v / (d * d);
    let ddv = v * (1.0 / (d * d * d * d) - 2.0 / (d * d * d));
    (v, dv, ddv)
}

impl Bump {
    fn q(&self, z: &[C64]) -> f64 {
        z.iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c).norm_sqr())
            .sum::<f64>()
            / (self.radius * self.radius)
    }

    /// Complex Hessian `d^2 phi / dz_i dzbar_j` at `z`.
    fn complex_hessian(&self, z: &[C64]) -> DMatrix<C64> {
        let n = z.len();
        let q = self.q(z);
        let (_, dpsi, ddpsi) = psi(q);
        let r2 = self.radius * self.radius;
        let mut h = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        if q >= 1.0 {
            return h;
        }
        for i in 0..n {
            for j in 0..n {
                let zi = (z[i] - self.center[i]).conj();
                let zj = z[j] - self.center[j];
                let mut v = self.amplitude * ddpsi * zi * zj / (r2 * r2);
                if i == j {
                    v += C64::new(self.amplitude * dpsi / r2, 0.0);
                }
                h[(i, j)] = v;
            }
        }
        h
    }

    /// Euclidean gradient of `phi` in interleaved real coordinates.
    fn real_gradient(&self, z: &[C64]) -> DVector<f64> {
        let n = z.len();
        let q = self.q(z);
        let (_, dpsi, _) = psi(q);
        let mut g = DVector::zeros(2 * n);
        if q >= 1.0 {
            return g;
        }
        let r2 = self.radius * self.radius;
        for j in 0..n {
            // d phi / d z_j = amp * psi' * conj(z_j - c_j) / r^2
            let dz = self.amplitude * dpsi * (z[j] - self.center[j]).conj() / r2;
            g[2 * j] = 2.0 * dz.re;
            g[2 * j + 1] = -2.0 * dz.im;
        }
        g
    }
}

/// Metric kind. The log-cylinder realizes `(C*)^n` with the metric
/// `sum |dz_i|^2 / |z_i|^2` as the flat model in `t = log z` coordinates.
#[derive(Debug, Clone)]
pub enum Metric {
    Flat,
    LogCylinder,
    FlatBump(Vec<Bump>),
}

impl Metric {
    pub fn is_log(&self) -> bool {
        matches!(self, Metric::LogCylinder)
    }

    pub fn bumps(&self) -> &[Bump] {
        match self {
            Metric::FlatBump(b) => b,
            _ => &[],
        }
    }

    /// Real metric matrix `G(u)` in interleaved work coordinates, or `None`
    /// when it is the identity.
    pub fn matrix(&self, z: &[C64]) -> Option<DMatrix<f64>> {
        let bumps = self.bumps();
        if bumps.is_empty() {
            return None;
        }
        let n = z.len();
        let mut h = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for i in 0..n {
            h[(i, i)] = C64::new(1.0, 0.0);
        }
        for b in bumps {
            h += b.complex_hessian(z);
        }
        // real symmetric block form of the Hermitian matrix h
        let mut g = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let v = h[(i, j)];
                g[(2 * i, 2 * j)] = v.re;
                g[(2 * i, 2 * j + 1)] = v.im;
                g[(2 * i + 1, 2 * j)] = -v.im;
                g[(2 * i + 1, 2 * j + 1)] = v.re;
            }
        }
        Some(g)
    }

    /// Sup of `|dd^c phi|` over the bump supports, sampled; the smallness
    /// certificate against a configured `mu`.
    pub fn bump_c0_norm(&self, samples_per_bump: usize) -> f64 {
        let bumps = self.bumps();
        let mut worst: f64 = 0.0;
        for b in bumps {
            let n = b.center.len();
            for k in 0..samples_per_bump {
                // deterministic radial/angular sweep inside the support
                let f = (k as f64 + 0.5) / samples_per_bump as f64;
                let r = b.radius * f.sqrt();
                let ang = 2.399963229728653 * k as f64; // golden angle
                let mut z = b.center.clone();
                z[k % n] += C64::from_polar(r, ang);
                let h = b.complex_hessian(&z);
                let norm = h.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                worst = worst.max(norm);
            }
        }
        worst
    }

    /// Check positivity of `G` at sampled points (bump metrics only; the
    /// flat families are positive by construction).
    pub fn check_positivity(&self, samples_per_bump: usize) -> Result<()> {
        let bumps = self.bumps();
        for b in bumps {
            let n = b.center.len();
            for k in 0..samples_per_bump {
                let f = (k as f64 + 0.5) / samples_per_bump as f64;
                let r = b.radius * f.sqrt();
                let ang = 2.399963229728653 * (k as f64 + 1.0);
                let mut z = b.center.clone();
                z[k % n] += C64::from_polar(r, ang);
                if let Some(g) = self.matrix(&z) {
                    let eig = g.symmetric_eigenvalues();
                    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
                    if min <= 0.0 {
                        return Err(LgError::InvalidInput(format!(
                            "bump metric loses positivity (min eigenvalue {min:.3e} at sample {k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Primitive `lambda` of the Kahler form, evaluated at `p` on `v` (work
    /// coordinates). For flat families this is
    /// `1/2 sum (x dy - y dx)`; bumps add `1/2 d^c phi = -1/2 dphi(J v)`.
    pub fn lambda(&self, p: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let mut acc = crate::geometry::lambda_flat(p, v);
        let bumps = self.bumps();
        if !bumps.is_empty() {
            let z = crate::geometry::real_to_complex(p);
            let jv = apply_j(v);
            for b in bumps {
                acc -= 0.5 * b.real_gradient(&z).dot(&jv);
            }
        }
        acc
    }

    /// Symplectic pairing `omega(u, v) = g(J u, v)` at `p`.
    pub fn omega(&self, p: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let ju = apply_j(u);
        match self.matrix(&crate::geometry::real_to_complex(p)) {
            None => ju.dot(v),
            Some(g) => (g * ju).dot(v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bump_is_smooth_and_compactly_supported() {
        let b = Bump {
            center: vec![C64::new(0.0, 0.0)],
            radius: 1.0,
            amplitude: 0.05,
        };
        let far = [C64::new(2.0, 0.0)];
        assert_eq!(b.real_gradient(&far).norm(), 0.0);
        assert_eq!(b.complex_hessian(&far)[(0, 0)].norm(), 0.0);
        let near = [C64::new(0.3, 0.1)];
        assert!(b.complex_hessian(&near)[(0, 0)].norm() > 0.0);
    }

    #[test]
    fn bump_hessian_matches_finite_differences_of_gradient() {
        let b = Bump {
            center: vec![C64::new(0.1, -0.2)],
            radius: 1.5,
            amplitude: 0.03,
        };
        let z0 = [C64::new(0.4, 0.2)];
        let h = 1e-6;
        // d/dx of dphi/dz = d2phi/dz dzbar + d2phi/dz dz; check the metric
        // block against a real-coordinate finite difference of the gradient.
        let gp = b.real_gradient(&[z0[0] + C64::new(h, 0.0)]);
        let gm = b.real_gradient(&[z0[0] - C64::new(h, 0.0)]);
        let fd_xx = (gp[0] - gm[0]) / (2.0 * h);
        // real Hessian xx entry equals 2 Re(phi_zz + phi_zzbar); for the
        // radial bump phi_zz = psi'' conj(dz)^2 A / r^4, compute directly.
        let q = b.q(&z0);
        let (_, dpsi, ddpsi) = psi(q);
        let r2 = b.radius * b.radius;
        let dzc = (z0[0] - b.center[0]).conj();
        let phi_zz = b.amplitude * ddpsi * dzc * dzc / (r2 * r2);
        let phi_zzb = b.complex_hessian(&z0)[(0, 0)];
        let _ = dpsi;
        let analytic = 2.0 * (phi_zz.re + phi_zzb.re);
        assert_abs_diff_eq!(fd_xx, analytic, epsilon = 1e-6);
    }

    #[test]
    fn metric_matrix_reduces_to_identity_without_bumps() {
        assert!(Metric::Flat.matrix(&[C64::new(1.0, 2.0)]).is_none());
        assert!(Metric::LogCylinder.matrix(&[C64::new(1.0, 2.0)]).is_none());
    }

    #[test]
    fn small_bump_keeps_positivity() {
        let m = Metric::FlatBump(vec![Bump {
            center: vec![C64::new(0.0, 0.0)],
            radius: 1.0,
            amplitude: 0.05,
        }]);
        m.check_positivity(64).unwrap();
        assert!(m.bump_c0_norm(64) < 0.5);
    }
}
