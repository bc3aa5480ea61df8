//! Embedded Dormand-Prince 5(4) integrator with adaptive steps, dense
//! trajectory recording and an optional variational (linearized) flow.

use crate::error::{LgError, Result};
use nalgebra::{DMatrix, DVector};

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One recorded sample of a flow trajectory.
#[derive(Debug, Clone)]
pub struct Sample {
    pub t: f64,
    pub y: DVector<f64>,
    /// Vector field at the sample (for Hermite interpolation).
    pub dy: DVector<f64>,
}

/// A recorded trajectory with monotone sample times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Tolerance the integrator ran at.
    pub tol: f64,
}

impl Trajectory {
    pub fn start(&self) -> &Sample {
        self.samples.first().expect("trajectory is nonempty")
    }

    pub fn end(&self) -> &Sample {
        self.samples.last().expect("trajectory is nonempty")
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.start().t, self.end().t)
    }

    /// Cubic Hermite interpolation at time `t` (clamped to the range).
    pub fn at(&self, t: f64) -> DVector<f64> {
        let ss = &self.samples;
        if ss.len() == 1 || t <= ss[0].t {
            return ss[0].y.clone();
        }
        if t >= ss[ss.len() - 1].t {
            return ss[ss.len() - 1].y.clone();
        }
        let mut lo = 0;
        let mut hi = ss.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if ss[mid].t <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (a, b) = (&ss[lo], &ss[hi]);
        let h = b.t - a.t;
        let u = (t - a.t) / h;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        &a.y * h00 + &a.dy * (h10 * h) + &b.y * h01 + &b.dy * (h11 * h)
    }

    /// Polyline arclength of the recorded samples.
    pub fn arclength(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| (&w[1].y - &w[0].y).norm())
            .sum()
    }
}

/// Options for an adaptive run.
#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub tol: f64,
    pub h_init: f64,
    pub h_max: f64,
    /// Abort when the state norm exceeds this radius.
    pub escape_radius: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            tol: 1e-10,
            h_init: 1e-4,
            h_max: 0.25,
            escape_radius: 1e6,
            max_steps: 200_000,
        }
    }
}

/// Integrate `y' = f(y)` from `y0` over `[0, t_end]` (use negative `t_end`
/// for backward time), recording every accepted step. `stop` may end the
/// run early; it sees the current time and state.
pub fn integrate<F, S>(
    f: F,
    y0: DVector<f64>,
    t_end: f64,
    opts: &OdeOptions,
    mut stop: S,
) -> Result<Trajectory>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
    S: FnMut(f64, &DVector<f64>) -> bool,
{
    let dir = if t_end < 0.0 { -1.0 } else { 1.0 };
    let t_abs = t_end.abs();
    let mut t = 0.0f64;
    let mut y = y0;
    let mut dy = f(&y);
    let mut h = opts.h_init.min(opts.h_max).min(t_abs.max(1e-12));
    let mut samples = vec![Sample {
        t: 0.0,
        y: y.clone(),
        dy: dy.clone(),
    }];
    let mut k = vec![DVector::zeros(y.len()); 7];

    for _ in 0..opts.max_steps {
        if t >= t_abs || stop(dir * t, &y) {
            break;
        }
        h = h.min(t_abs - t);
        k[0] = dy.clone();
        for j in 0..6 {
            let mut yj = y.clone();
            for (l, kl) in k.iter().take(j + 1).enumerate() {
                if A[j][l] != 0.0 {
                    yj += kl * (dir * h * A[j][l]);
                }
            }
            k[j + 1] = f(&yj);
            let _ = C[j];
        }
        // 5th order solution is the j = 5 row (FSAL: k[6] = f(y_new))
        let mut ynew = y.clone();
        for (l, kl) in k.iter().take(6).enumerate() {
            if A[5][l] != 0.0 {
                ynew += kl * (dir * h * A[5][l]);
            }
        }
        let mut err_vec = DVector::zeros(y.len());
        for (l, kl) in k.iter().enumerate() {
            if E[l] != 0.0 {
                err_vec += kl * (h * E[l]);
            }
        }
        let scale = opts.tol * (1.0 + y.norm().max(ynew.norm()));
        let err = err_vec.norm() / scale;
        if err <= 1.0 {
            t += h;
            y = ynew;
            dy = k[6].clone();
            samples.push(Sample {
                t: dir * t,
                y: y.clone(),
                dy: &dy * dir,
            });
            if y.norm() > opts.escape_radius {
                return Err(LgError::Escaped {
                    escape_time: dir * t,
                });
            }
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h = (h * factor).min(opts.h_max);
        if h < 1e-14 {
            return Err(LgError::Integrator(format!(
                "step size underflow at t = {:.6e}",
                dir * t
            )));
        }
    }
    if t < t_abs && samples.len() >= opts.max_steps {
        return Err(LgError::Integrator("step budget exhausted".into()));
    }
    Ok(Trajectory {
        samples,
        tol: opts.tol,
    })
}

/// Integrate the flow together with its variational matrix `M' = Df(y) M`,
/// `M(0) = I`. Returns the endpoint state and matrix.
pub fn integrate_variational<F, DF>(
    f: F,
    df: DF,
    y0: DVector<f64>,
    t_end: f64,
    opts: &OdeOptions,
) -> Result<(DVector<f64>, DMatrix<f64>, Trajectory)>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
    DF: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    let n = y0.len();
    let mut z0 = DVector::zeros(n + n * n);
    z0.rows_mut(0, n).copy_from(&y0);
    for i in 0..n {
        z0[n + i * n + i] = 1.0;
    }
    let g = |z: &DVector<f64>| -> DVector<f64> {
        let y = z.rows(0, n).into_owned();
        let m = DMatrix::from_column_slice(n, n, &z.as_slice()[n..]);
        let dy = f(&y);
        let dm = df(&y) * m;
        let mut out = DVector::zeros(n + n * n);
        out.rows_mut(0, n).copy_from(&dy);
        out.rows_mut(n, n * n).copy_from_slice(dm.as_slice());
        out
    };
    let traj = integrate(g, z0, t_end, opts, |_, _| false)?;
    let zf = &traj.end().y;
    let yf = zf.rows(0, n).into_owned();
    let mf = DMatrix::from_column_slice(n, n, &zf.as_slice()[n..]);
    // strip the variational block from the recorded samples
    let state_traj = Trajectory {
        samples: traj
            .samples
            .iter()
            .map(|s| Sample {
                t: s.t,
                y: s.y.rows(0, n).into_owned(),
                dy: s.dy.rows(0, n).into_owned(),
            })
            .collect(),
        tol: traj.tol,
    };
    Ok((yf, mf, state_traj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exponential_growth_is_exact_to_tolerance() {
        let f = |y: &DVector<f64>| y.clone();
        let traj = integrate(
            f,
            DVector::from_vec(vec![1.0]),
            2.0,
            &OdeOptions::default(),
            |_, _| false,
        )
        .unwrap();
        assert_abs_diff_eq!(traj.end().y[0], 2f64.exp(), epsilon = 1e-8);
    }

    #[test]
    fn rotation_preserves_radius_and_interpolates() {
        let f = |y: &DVector<f64>| DVector::from_vec(vec![-y[1], y[0]]);
        let traj = integrate(
            f,
            DVector::from_vec(vec![1.0, 0.0]),
            std::f64::consts::TAU,
            &OdeOptions::default(),
            |_, _| false,
        )
        .unwrap();
        assert_abs_diff_eq!(traj.end().y[0], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(traj.end().y[1], 0.0, epsilon = 1e-8);
        let mid = traj.at(std::f64::consts::PI / 2.0);
        assert_abs_diff_eq!(mid[0], 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(mid[1], 1.0, epsilon = 1e-7);
    }

    #[test]
    fn backward_integration_runs_in_negative_time() {
        let f = |y: &DVector<f64>| y.clone();
        let traj = integrate(
            f,
            DVector::from_vec(vec![1.0]),
            -1.0,
            &OdeOptions::default(),
            |_, _| false,
        )
        .unwrap();
        assert!(traj.end().t < 0.0);
        assert_abs_diff_eq!(traj.end().y[0], (-1f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn variational_matrix_of_linear_system_is_matrix_exponential() {
        // y' = A y with A = [[0,1],[1,0]]: M(t) = [[cosh t, sinh t], [sinh t, cosh t]]
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let af = a.clone();
        let (yf, m, _) = integrate_variational(
            move |y| &a * y,
            move |_| af.clone(),
            DVector::from_vec(vec![0.3, -0.2]),
            1.0,
            &OdeOptions::default(),
        )
        .unwrap();
        let (ch, sh) = (1f64.cosh(), 1f64.sinh());
        assert_abs_diff_eq!(m[(0, 0)], ch, epsilon = 1e-8);
        assert_abs_diff_eq!(m[(0, 1)], sh, epsilon = 1e-8);
        assert_abs_diff_eq!(yf[0], ch * 0.3 - sh * 0.2, epsilon = 1e-8);
    }

    #[test]
    fn escape_is_reported() {
        let f = |y: &DVector<f64>| y.clone() * 3.0;
        let mut opts = OdeOptions::default();
        opts.escape_radius = 10.0;
        let err = integrate(f, DVector::from_vec(vec![1.0]), 10.0, &opts, |_, _| false);
        assert!(matches!(err, Err(LgError::Escaped { .. })));
    }
}
