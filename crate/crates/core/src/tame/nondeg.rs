//! Sampled face non-degeneracy: multi-start descent on the Kouchnirenko
//! face system. A reported "no violation" is evidence, not a proof.

use super::polytope::Face;
use crate::geometry::{complex_to_real, real_to_complex, C64};
use crate::potential::Potential;
use crate::rng::halton;
use nalgebra::{DMatrix, DVector};

/// Verdict of the sampled search for common zeros of the face system.
#[derive(Debug, Clone)]
pub enum FaceVerdict {
    /// Best residual found stayed above the threshold.
    NoViolationFound { min_residual: f64 },
    /// A torus point where the full face system vanishes numerically.
    Violation { point: Vec<C64>, residual: f64 },
}

/// Restrict `f` to the face: keep the terms whose exponents lie on it.
fn face_restriction(f: &Potential, face: &Face) -> Vec<(Vec<i64>, C64)> {
    f.terms()
        .iter()
        .filter(|(a, _)| face.points.contains(a))
        .map(|(a, c)| (a.clone(), *c))
        .collect()
}

/// Residual vector of the face system at log coordinates `t`:
/// `(f^face, f^face_1, ..., f^face_n)` with `g_i = z_i d g / d z_i`.
fn residual(terms: &[(Vec<i64>, C64)], t: &[C64]) -> Vec<C64> {
    let n = t.len();
    let mut r = vec![C64::new(0.0, 0.0); n + 1];
    for (alpha, c) in terms {
        let e: C64 = alpha
            .iter()
            .zip(t)
            .map(|(&a, tj)| (a as f64) * tj)
            .sum::<C64>()
            .exp();
        let v = c * e;
        r[0] += v;
        for i in 0..n {
            r[i + 1] += (alpha[i] as f64) * v;
        }
    }
    r
}

/// Jacobian of the residual with respect to `t` (complex entries).
fn jacobian(terms: &[(Vec<i64>, C64)], t: &[C64]) -> Vec<Vec<C64>> {
    let n = t.len();
    let mut j = vec![vec![C64::new(0.0, 0.0); n]; n + 1];
    for (alpha, c) in terms {
        let e: C64 = alpha
            .iter()
            .zip(t)
            .map(|(&a, tj)| (a as f64) * tj)
            .sum::<C64>()
            .exp();
        let v = c * e;
        for col in 0..n {
            j[0][col] += (alpha[col] as f64) * v;
            for row in 0..n {
                j[row + 1][col] += ((alpha[row] * alpha[col]) as f64) * v;
            }
        }
    }
    j
}

fn sum_sq(r: &[C64]) -> f64 {
    r.iter().map(|c| c.norm_sqr()).sum()
}

/// Independent direction basis of the face's affine span (the gauge slice:
/// the face system is covariant under the complementary torus directions,
/// so zeros can be sought with `t` restricted to this span).
fn face_directions(face: &Face, n: usize) -> Vec<DVector<f64>> {
    if face.points.len() <= 1 {
        return Vec::new();
    }
    let base = &face.points[0];
    let mut dirs: Vec<DVector<f64>> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for p in &face.points[1..] {
        let d: Vec<f64> = (0..n).map(|j| (p[j] - base[j]) as f64).collect();
        // keep if it increases the rank (Gram-Schmidt residual test)
        let mut v = DVector::from_vec(d.clone());
        for r in &rows {
            let rr = DVector::from_vec(r.clone());
            let proj = v.dot(&rr) / rr.norm_squared();
            v -= rr * proj;
        }
        if v.norm() > 1e-9 {
            rows.push(d.clone());
            dirs.push(DVector::from_vec(d));
        }
    }
    dirs
}

/// Levenberg-Marquardt descent on `|residual|^2` over the gauge slice
/// `t = sum_j w_j dirs_j`, `w` complex.
fn descend(
    terms: &[(Vec<i64>, C64)],
    dirs: &[DVector<f64>],
    w0: Vec<C64>,
    n: usize,
    iters: usize,
) -> (Vec<C64>, f64) {
    let to_t = |w: &[C64]| -> Vec<C64> {
        let mut t = vec![C64::new(0.0, 0.0); n];
        for (wj, d) in w.iter().zip(dirs) {
            for k in 0..n {
                t[k] += wj * d[k];
            }
        }
        t
    };
    let m = dirs.len();
    let mut w = w0;
    if m == 0 {
        let t = to_t(&w);
        return (t.clone(), sum_sq(&residual(terms, &t)));
    }
    let mut lm = 1e-3;
    let mut best = sum_sq(&residual(terms, &to_t(&w)));
    for _ in 0..iters {
        let t = to_t(&w);
        let r = residual(terms, &t);
        let jt = jacobian(terms, &t);
        // chain rule onto the slice coordinates
        let mut jw = vec![vec![C64::new(0.0, 0.0); m]; n + 1];
        for i in 0..n + 1 {
            for (j, d) in dirs.iter().enumerate() {
                for k in 0..n {
                    jw[i][j] += jt[i][k] * d[k];
                }
            }
        }
        // real least-squares system: stack Re/Im rows
        let rows = 2 * (n + 1);
        let mut jr = DMatrix::zeros(rows, 2 * m);
        let mut rv = DVector::zeros(rows);
        for i in 0..n + 1 {
            rv[2 * i] = r[i].re;
            rv[2 * i + 1] = r[i].im;
            for col in 0..m {
                // complex derivative c: d(Re r)/d(Re w) = Re c, etc.
                let cder = jw[i][col];
                jr[(2 * i, 2 * col)] = cder.re;
                jr[(2 * i, 2 * col + 1)] = -cder.im;
                jr[(2 * i + 1, 2 * col)] = cder.im;
                jr[(2 * i + 1, 2 * col + 1)] = cder.re;
            }
        }
        let jtj = jr.transpose() * &jr;
        let jtr = jr.transpose() * &rv;
        let mut a = jtj.clone();
        for d in 0..2 * m {
            a[(d, d)] += lm * (1.0 + jtj[(d, d)]);
        }
        let Some(step) = a.lu().solve(&jtr) else {
            break;
        };
        let wr = complex_to_real(&w);
        let cand = real_to_complex(&(wr - step));
        let cval = sum_sq(&residual(terms, &to_t(&cand)));
        if cval < best {
            best = cval;
            w = cand;
            lm = (lm * 0.3).max(1e-12);
        } else {
            lm *= 8.0;
            if lm > 1e10 {
                break;
            }
        }
        if best < 1e-24 {
            break;
        }
    }
    let t = to_t(&w);
    (t, best)
}

/// Search for common torus zeros of the face system by descent from
/// `starts` quasi-random points. A minimum below `nd_tol` is reported as a
/// violation (the face is degenerate there); otherwise the verdict is
/// explicitly "no violation found".
pub fn face_nondegeneracy_sample(
    f: &Potential,
    face: &Face,
    starts: usize,
    nd_tol: f64,
) -> FaceVerdict {
    let n = f.n();
    let terms = face_restriction(f, face);
    let dirs = face_directions(face, n);
    let m = dirs.len();
    let mut best = f64::INFINITY;
    let mut best_t = vec![C64::new(0.0, 0.0); n];
    let start_count = if m == 0 { 1 } else { starts };
    for s in 0..start_count {
        let w0: Vec<C64> = (0..m)
            .map(|k| {
                C64::new(
                    4.0 * halton(s, 2 * k) - 2.0,
                    std::f64::consts::TAU * halton(s, 2 * k + 1),
                )
            })
            .collect();
        let (t, val) = descend(&terms, &dirs, w0, n, 120);
        if val < best {
            best = val;
            best_t = t;
            if best < nd_tol * nd_tol * 1e-4 {
                break;
            }
        }
    }
    let resid = best.sqrt();
    if resid < nd_tol {
        FaceVerdict::Violation {
            point: best_t.iter().map(|t| t.exp()).collect(),
            residual: resid,
        }
    } else {
        FaceVerdict::NoViolationFound { min_residual: resid }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Domain;
    use crate::tame::polytope::newton_polyhedron;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn vertex_face_of_z_plus_inverse_has_no_torus_zero() {
        let f = Potential::univariate(Domain::Torus, &[(1, c(1.0)), (-1, c(1.0))]).unwrap();
        let face = Face {
            points: vec![vec![1]],
            dim: 0,
        };
        match face_nondegeneracy_sample(&f, &face, 32, 1e-8) {
            FaceVerdict::NoViolationFound { min_residual } => assert!(min_residual > 1e-4),
            FaceVerdict::Violation { .. } => panic!("z has no zero on the torus"),
        }
    }

    #[test]
    fn standard_triangle_is_nondegenerate_on_all_faces() {
        let f = Potential::new(
            2,
            Domain::Torus,
            vec![
                (vec![1, 0], c(1.0)),
                (vec![0, 1], c(1.0)),
                (vec![-1, -1], c(1.0)),
            ],
        )
        .unwrap();
        let poly = newton_polyhedron(&f).unwrap();
        for face in poly.proper_faces() {
            match face_nondegeneracy_sample(&f, &face, 1000, 1e-8) {
                FaceVerdict::NoViolationFound { .. } => {}
                FaceVerdict::Violation { point, residual } => {
                    panic!("unexpected violation at {:?} (residual {residual:.2e})", point)
                }
            }
        }
    }

    #[test]
    fn partial_system_zero_is_not_a_violation() {
        // face {(1,0),(0,1)} of (z1 + z2) + 1/(z1 z2): f^face = z1 + z2
        // vanishes at z1 = -z2, but f^face_1 = z1 is nonzero on the torus,
        // so the full system has no common zero.
        let f = Potential::new(
            2,
            Domain::Torus,
            vec![
                (vec![1, 0], c(1.0)),
                (vec![0, 1], c(1.0)),
                (vec![-1, -1], c(1.0)),
            ],
        )
        .unwrap();
        let face = Face {
            points: vec![vec![1, 0], vec![0, 1]],
            dim: 1,
        };
        match face_nondegeneracy_sample(&f, &face, 1000, 1e-8) {
            FaceVerdict::NoViolationFound { min_residual } => {
                assert!(min_residual > 1e-4, "full system must stay bounded away from 0");
            }
            FaceVerdict::Violation { .. } => panic!("the full face system must not vanish"),
        }
    }

    #[test]
    fn genuinely_degenerate_face_is_detected() {
        // f = z1 + z2 + z1 z2^2 ... use a face with a double zero:
        // (z1 - z2)^2-type face: terms z1^2 - 2 z1 z2 + z2^2 on one edge.
        let f = Potential::new(
            2,
            Domain::Torus,
            vec![
                (vec![2, 0], c(1.0)),
                (vec![1, 1], c(-2.0)),
                (vec![0, 2], c(1.0)),
                (vec![-1, -1], c(1.0)),
            ],
        )
        .unwrap();
        let face = Face {
            points: vec![vec![2, 0], vec![1, 1], vec![0, 2]],
            dim: 1,
        };
        match face_nondegeneracy_sample(&f, &face, 400, 1e-8) {
            FaceVerdict::Violation { point, residual } => {
                assert!(residual < 1e-8);
                // common zero at z1 = z2
                assert!((point[0] - point[1]).norm() < 1e-5);
            }
            FaceVerdict::NoViolationFound { min_residual } => {
                panic!("expected a violation, best residual {min_residual:.2e}")
            }
        }
    }
}
