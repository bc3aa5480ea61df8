//! The model context: a potential plus a metric, exposed in "work
//! coordinates" where the metric is flat or a flat perturbation.
//!
//! For affine potentials the work coordinates are the ambient `z`; for
//! Laurent potentials on the log-cylinder they are `t = log z`, where the
//! cylinder metric becomes the flat one. Every flow, chord and PDE module
//! consumes this interface only.

use crate::error::{LgError, Result};
use crate::geometry::{apply_j, complex_to_real, real_to_complex, ComplexPoint, C64};
use crate::metric::Metric;
use crate::potential::{Domain, Potential};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

#[derive(Clone)]
pub struct LgModel {
    potential: Arc<Potential>,
    metric: Arc<Metric>,
    /// Base point in work coordinates (tame condition distances).
    q0: DVector<f64>,
}

impl std::fmt::Debug for LgModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LgModel(n={}, domain={})", self.n(), self.potential.domain())
    }
}

impl LgModel {
    pub fn new(potential: Potential, metric: Metric) -> Result<Self> {
        match (&metric, potential.domain()) {
            (Metric::LogCylinder, Domain::Affine) => {
                return Err(LgError::InvalidInput(
                    "log-cylinder metric requires a Laurent potential".into(),
                ))
            }
            (Metric::Flat | Metric::FlatBump(_), Domain::Torus) => {
                return Err(LgError::InvalidInput(
                    "Laurent potentials are carried on the log-cylinder".into(),
                ))
            }
            _ => {}
        }
        if let Metric::FlatBump(_) = &metric {
            metric.check_positivity(64)?;
        }
        let q0 = DVector::zeros(2 * potential.n());
        Ok(LgModel {
            potential: Arc::new(potential),
            metric: Arc::new(metric),
            q0,
        })
    }

    pub fn flat(potential: Potential) -> Result<Self> {
        LgModel::new(potential, Metric::Flat)
    }

    pub fn n(&self) -> usize {
        self.potential.n()
    }

    /// Real dimension of the work space.
    pub fn dim(&self) -> usize {
        2 * self.potential.n()
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn q0(&self) -> &DVector<f64> {
        &self.q0
    }

    pub fn is_log(&self) -> bool {
        self.metric.is_log()
    }

    /// Same metric, potential multiplied by `e^{i theta}`.
    pub fn rotated(&self, theta: f64) -> LgModel {
        LgModel {
            potential: Arc::new(self.potential.rotated(theta)),
            metric: self.metric.clone(),
            q0: self.q0.clone(),
        }
    }

    // ---- coordinate plumbing -------------------------------------------

    /// Ambient point for a work-coordinate vector (identity, or `exp` on the
    /// log-cylinder).
    pub fn to_ambient(&self, u: &DVector<f64>) -> ComplexPoint {
        let z = real_to_complex(u);
        if self.is_log() {
            ComplexPoint::new(z.iter().map(|t| t.exp()).collect())
        } else {
            ComplexPoint::new(z)
        }
    }

    /// Work coordinates of an ambient point (principal log branch on the
    /// cylinder).
    pub fn from_ambient(&self, p: &ComplexPoint) -> Result<DVector<f64>> {
        if p.dim() != self.n() {
            return Err(LgError::InvalidInput("dimension mismatch".into()));
        }
        if self.is_log() {
            for (j, z) in p.coords.iter().enumerate() {
                if z.norm_sqr() == 0.0 {
                    return Err(LgError::Domain(format!("z_{} = 0 on the torus", j + 1)));
                }
            }
            let t: Vec<C64> = p.coords.iter().map(|z| z.ln()).collect();
            Ok(complex_to_real(&t))
        } else {
            Ok(p.to_real())
        }
    }

    // ---- potential data in work coordinates ----------------------------

    pub fn value(&self, u: &DVector<f64>) -> C64 {
        let z = real_to_complex(u);
        if self.is_log() {
            self.potential.evaluate_log(&ComplexPoint::new(z))
        } else {
            self.potential
                .evaluate(&ComplexPoint::new(z))
                .expect("affine evaluation cannot fail")
        }
    }

    /// Holomorphic gradient with respect to the work complex coordinates.
    pub fn holo_grad(&self, u: &DVector<f64>) -> Vec<C64> {
        let z = ComplexPoint::new(real_to_complex(u));
        if self.is_log() {
            self.potential.log_gradient(&z)
        } else {
            self.potential
                .holo_gradient(&z)
                .expect("affine gradient cannot fail")
        }
    }

    /// Holomorphic Hessian in work complex coordinates.
    pub fn holo_hess(&self, u: &DVector<f64>) -> Vec<Vec<C64>> {
        let z = ComplexPoint::new(real_to_complex(u));
        if self.is_log() {
            self.potential.log_hessian(&z)
        } else {
            self.potential
                .holo_hessian(&z)
                .expect("affine hessian cannot fail")
        }
    }

    /// Metric norm `|d_M W|` of the holomorphic gradient.
    pub fn grad_norm(&self, u: &DVector<f64>) -> f64 {
        let g = self.holo_grad(u);
        match self.metric_matrix(u) {
            None => g.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            Some(_) => {
                // |dW|_g^2 = <grad_g Re W, grad_g Re W>_g; use the real form.
                let gr = self.grad_re(u);
                match self.metric_matrix(u) {
                    Some(gm) => (&gm * &gr).dot(&gr).sqrt(),
                    None => unreachable!(),
                }
            }
        }
    }

    /// Frobenius norm of the holomorphic Hessian (the `|nabla^2 W|` entering
    /// the tame inequalities; flat and log-cylinder families only).
    pub fn hess_norm(&self, u: &DVector<f64>) -> f64 {
        self.holo_hess(u)
            .iter()
            .flatten()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn metric_matrix(&self, u: &DVector<f64>) -> Option<DMatrix<f64>> {
        self.metric.matrix(&real_to_complex(u))
    }

    /// Euclidean (coordinate) gradient of `Re W` in work coordinates; the
    /// complex pairs are the conjugate of the holomorphic gradient.
    pub fn euclid_grad_re(&self, u: &DVector<f64>) -> DVector<f64> {
        let g = self.holo_grad(u);
        let conj: Vec<C64> = g.iter().map(|c| c.conj()).collect();
        complex_to_real(&conj)
    }

    /// `grad_g Re W` (metric gradient) in work coordinates.
    pub fn grad_re(&self, u: &DVector<f64>) -> DVector<f64> {
        let e = self.euclid_grad_re(u);
        match self.metric_matrix(u) {
            None => e,
            Some(g) => g
                .clone()
                .cholesky()
                .map(|ch| ch.solve(&e))
                .unwrap_or_else(|| g.lu().solve(&e).expect("metric must be invertible")),
        }
    }

    /// `grad_g Im W = J grad_g Re W` (Kahler identity; holds for every
    /// compatible metric since `J` is constant in these models).
    pub fn grad_im(&self, u: &DVector<f64>) -> DVector<f64> {
        let e = apply_j(&self.euclid_grad_re(u));
        match self.metric_matrix(u) {
            None => e,
            Some(g) => g
                .clone()
                .cholesky()
                .map(|ch| ch.solve(&e))
                .unwrap_or_else(|| g.lu().solve(&e).expect("metric must be invertible")),
        }
    }

    /// The pair `(grad_g Re W, grad_g Im W)`.
    pub fn metric_gradients(&self, u: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        (self.grad_re(u), self.grad_im(u))
    }

    /// Push a work-coordinate tangent vector to the ambient `z` chart
    /// (identity for flat; multiplication by `z_j` on the log-cylinder).
    pub fn push_to_ambient(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        if !self.is_log() {
            return v.clone();
        }
        let t = real_to_complex(u);
        let vc = real_to_complex(v);
        let pushed: Vec<C64> = t.iter().zip(vc).map(|(tj, vj)| tj.exp() * vj).collect();
        complex_to_real(&pushed)
    }

    /// Euclidean real Hessian of `Re W` in work coordinates (2n x 2n,
    /// symmetric; built from the holomorphic Hessian blocks).
    pub fn real_hessian_re(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n();
        let h = self.holo_hess(u);
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let v = h[i][j];
                out[(2 * i, 2 * j)] = v.re;
                out[(2 * i, 2 * j + 1)] = -v.im;
                out[(2 * i + 1, 2 * j)] = -v.im;
                out[(2 * i + 1, 2 * j + 1)] = -v.re;
            }
        }
        out
    }

    /// Euclidean real Hessian of `Im W`.
    pub fn real_hessian_im(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n();
        let h = self.holo_hess(u);
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let v = h[i][j];
                out[(2 * i, 2 * j)] = v.im;
                out[(2 * i, 2 * j + 1)] = v.re;
                out[(2 * i + 1, 2 * j)] = v.re;
                out[(2 * i + 1, 2 * j + 1)] = -v.im;
            }
        }
        out
    }

    // ---- geometry -------------------------------------------------------

    /// Distance in the work chart. On the log-cylinder the imaginary parts
    /// live on circles, so their differences are wrapped to `[-pi, pi]`.
    pub fn dist(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        if !self.is_log() {
            return (u - v).norm();
        }
        let mut acc = 0.0;
        for j in 0..u.len() / 2 {
            let dr = u[2 * j] - v[2 * j];
            let mut di = u[2 * j + 1] - v[2 * j + 1];
            di = wrap_pi(di);
            acc += dr * dr + di * di;
        }
        acc.sqrt()
    }

    pub fn dist_q0(&self, u: &DVector<f64>) -> f64 {
        self.dist(u, &self.q0)
    }

    pub fn lambda(&self, p: &DVector<f64>, v: &DVector<f64>) -> f64 {
        self.metric.lambda(p, v)
    }

    pub fn omega(&self, p: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.metric.omega(p, a, b)
    }
}

pub(crate) fn wrap_pi(x: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut y = x % two_pi;
    if y > std::f64::consts::PI {
        y -= two_pi;
    } else if y < -std::f64::consts::PI {
        y += two_pi;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{Domain, Potential};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn z2_model() -> LgModel {
        LgModel::flat(Potential::univariate(Domain::Affine, &[(2, c(0.5, 0.0))]).unwrap()).unwrap()
    }

    #[test]
    fn flat_gradients_of_z_squared() {
        // W = z^2/2: Re W = (x^2 - y^2)/2, Im W = xy.
        let m = z2_model();
        let u = DVector::from_vec(vec![1.3, -0.7]);
        let (gr, gi) = m.metric_gradients(&u);
        assert_abs_diff_eq!(gr[0], 1.3, epsilon = 1e-14);
        assert_abs_diff_eq!(gr[1], 0.7, epsilon = 1e-14);
        assert_abs_diff_eq!(gi[0], -0.7, epsilon = 1e-14);
        assert_abs_diff_eq!(gi[1], 1.3, epsilon = 1e-14);
    }

    #[test]
    fn cauchy_riemann_sweep_orthogonality_and_norms() {
        // |<grad Re W, grad Im W>| < 1e-10 and |grad Re W| = |grad Im W|
        // at 1000 sampled points for a generic holomorphic W (flat metric).
        let w = Potential::new(
            2,
            Domain::Affine,
            vec![
                (vec![3, 0], c(0.2, 0.1)),
                (vec![1, 2], c(-0.4, 0.3)),
                (vec![0, 1], c(1.0, -0.5)),
            ],
        )
        .unwrap();
        let m = LgModel::flat(w).unwrap();
        for k in 0..1000 {
            let t = k as f64 * 0.618033988749895;
            let u = DVector::from_vec(vec![
                (t * 7.1).sin() * 1.5,
                (t * 3.3).cos() * 1.2,
                (t * 5.7).sin() * 0.8,
                (t * 2.9).cos() * 1.7,
            ]);
            let (gr, gi) = m.metric_gradients(&u);
            assert!(gr.dot(&gi).abs() < 1e-10 * gr.norm().max(1.0) * gi.norm().max(1.0));
            assert!((gr.norm() - gi.norm()).abs() < 1e-10 * gr.norm().max(1.0));
        }
    }

    #[test]
    fn log_cylinder_gradients_push_forward() {
        let f = Potential::univariate(Domain::Torus, &[(1, c(1.0, 0.0)), (-1, c(1.0, 0.0))])
            .unwrap();
        let m = LgModel::new(f, Metric::LogCylinder).unwrap();
        // at t = 0 (z = 1): W = z + 1/z, dW/dt = z dW/dz = z(1 - 1/z^2) -> 0
        let t0 = DVector::zeros(2);
        let g = m.holo_grad(&t0);
        assert!(g[0].norm() < 1e-15);
        // push a unit vector to ambient at t = (ln 2, 0): z = 2
        let t = DVector::from_vec(vec![2f64.ln(), 0.0]);
        let v = DVector::from_vec(vec![1.0, 0.0]);
        let pushed = m.push_to_ambient(&t, &v);
        assert_abs_diff_eq!(pushed[0], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn cylinder_distance_wraps() {
        let f = Potential::univariate(Domain::Torus, &[(1, c(1.0, 0.0)), (-1, c(1.0, 0.0))])
            .unwrap();
        let m = LgModel::new(f, Metric::LogCylinder).unwrap();
        let a = DVector::from_vec(vec![0.0, 0.1]);
        let b = DVector::from_vec(vec![0.0, std::f64::consts::TAU - 0.1]);
        assert_abs_diff_eq!(m.dist(&a, &b), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn real_hessian_blocks() {
        let m = z2_model();
        let h = m.real_hessian_re(&DVector::zeros(2));
        assert_abs_diff_eq!(h[(0, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(1, 1)], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(0, 1)], 0.0, epsilon = 1e-15);
    }
}
