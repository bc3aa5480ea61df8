//! Lefschetz thimbles as discretized stable/unstable manifolds of the
//! `Re(e^{i theta} W)` gradient flow: ray fans, charts, projection,
//! invariant monitoring and refinement.

use crate::error::{LgError, Result};
use crate::geometry::C64;
use crate::model::LgModel;
use crate::ode::{integrate, OdeOptions};
use crate::Tolerances;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::io::{Read, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThimbleSign {
    /// Stable manifold `L^+` (Re W decreases outward along rays).
    Plus,
    /// Unstable manifold `L^-`.
    Minus,
}

/// Stable/unstable eigen-splitting of the real Hessian of `Re(e^{i theta} W)`.
#[derive(Debug, Clone)]
pub struct HessianSplitting {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal basis of the negative eigenspace (n vectors).
    pub stable: Vec<DVector<f64>>,
    /// Orthonormal basis of the positive eigenspace.
    pub unstable: Vec<DVector<f64>>,
}

/// Eigendecomposition of the flow linearization at a Morse point. With a
/// bump metric the problem is the generalized pencil `(H, G)`.
pub fn hessian_splitting(
    model: &LgModel,
    p: &DVector<f64>,
    tols: &Tolerances,
) -> Result<HessianSplitting> {
    let h = model.real_hessian_re(p);
    let dim = h.nrows();
    let (vals, vecs) = match model.metric_matrix(p) {
        None => {
            let se = nalgebra::SymmetricEigen::new(h);
            (se.eigenvalues, se.eigenvectors)
        }
        Some(g) => {
            // G^{-1} H v = lambda v  <=>  L^{-1} H L^{-T} w = lambda w
            let chol = g
                .cholesky()
                .ok_or_else(|| LgError::InvalidInput("metric not positive definite".into()))?;
            let l: DMatrix<f64> = chol.l();
            let linv = l
                .try_inverse()
                .ok_or_else(|| LgError::InvalidInput("metric factor not invertible".into()))?;
            let m = &linv * h * linv.transpose();
            let se = nalgebra::SymmetricEigen::new(m);
            let vecs = linv.transpose() * se.eigenvectors;
            (se.eigenvalues, vecs)
        }
    };
    let max_abs = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut pairs: Vec<(f64, DVector<f64>)> = (0..dim)
        .map(|i| (vals[i], vecs.column(i).into_owned()))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if pairs
        .iter()
        .any(|(v, _)| v.abs() < tols.eig_tol * max_abs.max(1.0))
    {
        return Err(LgError::NonMorse(format!(
            "eigenvalue within {:.1e} of zero at the critical point",
            tols.eig_tol
        )));
    }
    let stable: Vec<DVector<f64>> = pairs
        .iter()
        .filter(|(v, _)| *v < 0.0)
        .map(|(_, v)| v.clone())
        .collect();
    let unstable: Vec<DVector<f64>> = pairs
        .iter()
        .filter(|(v, _)| *v > 0.0)
        .map(|(_, v)| v.clone())
        .collect();
    if stable.len() != dim / 2 {
        return Err(LgError::NonMorse(format!(
            "signature is ({}, {}), expected ({}, {})",
            stable.len(),
            unstable.len(),
            dim / 2,
            dim / 2
        )));
    }
    Ok(HessianSplitting {
        eigenvalues: pairs.iter().map(|(v, _)| *v).collect(),
        stable: orthonormalize(stable),
        unstable: orthonormalize(unstable),
    })
}

fn orthonormalize(mut vs: Vec<DVector<f64>>) -> Vec<DVector<f64>> {
    for i in 0..vs.len() {
        for j in 0..i {
            let proj = vs[i].dot(&vs[j]);
            let prev = vs[j].clone();
            vs[i] -= prev * proj;
        }
        let n = vs[i].norm();
        vs[i] /= n;
    }
    vs
}

/// One discretized flow line of the thimble fan, traced outward from the
/// critical point.
#[derive(Debug, Clone)]
pub struct Ray {
    /// Unit direction in the seed subspace.
    pub direction: DVector<f64>,
    /// Trajectory with parameter `s >= 0` (outward).
    pub traj: crate::ode::Trajectory,
}

/// Build parameters for a thimble atlas.
#[derive(Debug, Clone)]
pub struct ThimbleOptions {
    /// Rays in the fan (forced to 2 when n = 1).
    pub ray_count: usize,
    /// Scale of the linearized seed offset.
    pub eps_base: f64,
    /// Trace each ray until `|Re W - Re W(p)|` spans this much.
    pub re_span: f64,
    /// Hard cap on the distance from the base point.
    pub dist_cap: f64,
    pub ode_tol: f64,
    pub max_level: u32,
}

impl Default for ThimbleOptions {
    fn default() -> Self {
        ThimbleOptions {
            ray_count: 32,
            eps_base: 1e-4,
            re_span: 8.0,
            dist_cap: 40.0,
            ode_tol: 1e-10,
            max_level: 6,
        }
    }
}

/// Discretized Lefschetz thimble `L^{sign}_p(theta)`: a fan of flow
/// trajectories with an intrinsic `(direction, s)` chart.
#[derive(Debug, Clone)]
pub struct ThimbleAtlas {
    model: LgModel,
    pub theta: f64,
    pub sign: ThimbleSign,
    pub critical_point: DVector<f64>,
    /// Value of the rotated potential at the critical point.
    pub critical_value: C64,
    pub splitting: HessianSplitting,
    pub rays: Vec<Ray>,
    pub seed_eps: f64,
    pub opts: ThimbleOptions,
    pub level: u32,
}

/// Intrinsic chart coordinates on the atlas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    /// Ray index (n = 1) or the base ray of the interpolation cell (n = 2).
    pub ray: usize,
    /// Direction interpolation weight in `[0, 1)` toward ray + 1 (n = 2 only).
    pub dir_frac: f64,
    /// Flow parameter along the ray; negative values reach into the
    /// linearized cap between the seed and the critical point.
    pub s: f64,
}

/// Build `L^{sign}_p(theta)` for the critical point `p` (work coordinates)
/// of `model`. The rotation is applied internally.
pub fn build_thimble(
    model: &LgModel,
    p: &DVector<f64>,
    theta: f64,
    sign: ThimbleSign,
    opts: &ThimbleOptions,
    tols: &Tolerances,
) -> Result<ThimbleAtlas> {
    let rot = model.rotated(theta);
    let n = rot.n();
    if n > 2 {
        return Err(LgError::Unsupported(
            "thimble atlases are built for n <= 2".into(),
        ));
    }
    let splitting = hessian_splitting(&rot, p, tols)?;
    let frame = match sign {
        ThimbleSign::Plus => &splitting.stable,
        ThimbleSign::Minus => &splitting.unstable,
    };
    let min_eig = splitting
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b.abs()));
    let seed_eps = opts.eps_base * min_eig.sqrt().max(1e-3);
    let directions: Vec<DVector<f64>> = if n == 1 {
        vec![frame[0].clone(), -&frame[0]]
    } else {
        (0..opts.ray_count)
            .map(|k| {
                let phi = std::f64::consts::TAU * k as f64 / opts.ray_count as f64;
                &frame[0] * phi.cos() + &frame[1] * phi.sin()
            })
            .collect()
    };
    // outward tracing: L^+ runs against the gradient flow, L^- with it
    let flow_sign = match sign {
        ThimbleSign::Plus => -1.0,
        ThimbleSign::Minus => 1.0,
    };
    let re_p = rot.value(p).re;
    let rays: Vec<Result<Ray>> = directions
        .into_par_iter()
        .map(|dir| {
            let seed = p + &dir * seed_eps;
            let rot_f = rot.clone();
            let field = move |u: &DVector<f64>| rot_f.grad_re(u) * flow_sign;
            let ode = OdeOptions {
                tol: opts.ode_tol,
                h_init: 1e-6,
                h_max: 0.5,
                escape_radius: 1e7,
                max_steps: 400_000,
            };
            let span = opts.re_span;
            let cap = opts.dist_cap;
            let rot_s = rot.clone();
            let p_own = p.clone();
            let stall = 10.0 * seed_eps;
            let traj = integrate(field, seed, 1e6, &ode, move |_, u| {
                (rot_s.value(u).re - re_p).abs() >= span
                    || rot_s.dist_q0(u) >= cap
                    // a vanishing field away from the seed means the ray has
                    // run into another critical point (degenerate ordering);
                    // truncate there instead of crawling forever
                    || (rot_s.grad_norm(u) < 1e-7 && rot_s.dist(u, &p_own) > stall)
            })?;
            Ok(Ray { direction: dir, traj })
        })
        .collect();
    let rays = rays.into_iter().collect::<Result<Vec<Ray>>>()?;
    Ok(ThimbleAtlas {
        critical_value: rot.value(p),
        model: rot,
        theta,
        sign,
        critical_point: p.clone(),
        splitting,
        rays,
        seed_eps,
        opts: opts.clone(),
        level: 0,
    })
}

impl ThimbleAtlas {
    /// The model carrying the rotated potential `e^{i theta} W`.
    pub fn rotated_model(&self) -> &LgModel {
        &self.model
    }

    pub fn n(&self) -> usize {
        self.model.n()
    }

    /// Ambient point (work coordinates) of a chart coordinate.
    pub fn point_at(&self, c: ChartPoint) -> DVector<f64> {
        if c.s < 0.0 {
            // linearized cap between p and the seed of the ray
            let dir = self.interp_direction(c);
            let cap = self.seed_eps;
            let f = ((c.s + cap) / cap).max(0.0);
            return &self.critical_point + dir * (self.seed_eps * f);
        }
        if self.n() == 1 || c.dir_frac == 0.0 {
            self.rays[c.ray].traj.at(c.s)
        } else {
            let a = self.rays[c.ray].traj.at(c.s);
            let b = self.rays[(c.ray + 1) % self.rays.len()].traj.at(c.s);
            a * (1.0 - c.dir_frac) + b * c.dir_frac
        }
    }

    fn interp_direction(&self, c: ChartPoint) -> DVector<f64> {
        if self.n() == 1 || c.dir_frac == 0.0 {
            self.rays[c.ray].direction.clone()
        } else {
            let a = &self.rays[c.ray].direction;
            let b = &self.rays[(c.ray + 1) % self.rays.len()].direction;
            let v = a * (1.0 - c.dir_frac) + b * c.dir_frac;
            let n = v.norm();
            v / n
        }
    }

    /// Flow velocity (d/ds of the outward trace) at a chart point.
    fn velocity_at(&self, c: ChartPoint) -> DVector<f64> {
        let u = self.point_at(c);
        let g = self.model.grad_re(&u);
        match self.sign {
            ThimbleSign::Plus => -g,
            ThimbleSign::Minus => g,
        }
    }

    /// Globally oriented unit tangent along the n = 1 thimble curve (the
    /// direction of increasing global parameter: ray 0 runs backward, ray 1
    /// forward). Continuous across the tip, unlike the raw flow velocity.
    pub fn oriented_tangent_n1(&self, c: ChartPoint) -> DVector<f64> {
        assert_eq!(self.n(), 1, "global orientation applies to curves");
        let sgn = if c.ray == 1 { 1.0 } else { -1.0 };
        let v = self.velocity_at(c);
        let v = if v.norm() > 1e-12 {
            v
        } else {
            self.interp_direction(c)
        };
        v.normalize() * sgn
    }

    /// All recorded sample points (work coordinates).
    pub fn sample_points(&self) -> impl Iterator<Item = &DVector<f64>> {
        self.rays
            .iter()
            .flat_map(|r| r.traj.samples.iter().map(|s| &s.y))
    }

    /// Project a work-coordinate point onto the atlas: nearest recorded
    /// sample refined by Gauss-Newton in the intrinsic chart. Returns the
    /// chart coordinates and the residual distance.
    pub fn project(&self, q: &DVector<f64>, projection_radius: f64) -> Result<(ChartPoint, f64)> {
        let mut best = (
            ChartPoint {
                ray: 0,
                dir_frac: 0.0,
                s: 0.0,
            },
            f64::INFINITY,
        );
        for (ri, ray) in self.rays.iter().enumerate() {
            for s in &ray.traj.samples {
                let d = (&s.y - q).norm();
                if d < best.1 {
                    best = (
                        ChartPoint {
                            ray: ri,
                            dir_frac: 0.0,
                            s: s.t,
                        },
                        d,
                    );
                }
            }
        }
        let dp = (q - &self.critical_point).norm();
        if dp < best.1 {
            best = (
                ChartPoint {
                    ray: 0,
                    dir_frac: 0.0,
                    s: -self.seed_eps,
                },
                dp,
            );
        }
        if best.1 > projection_radius {
            return Err(LgError::OutOfChart {
                distance: best.1,
                radius: projection_radius,
            });
        }
        let mut c = best.0;
        let mut dist = best.1;
        let fd = 1e-7;
        for _ in 0..80 {
            let r0 = self.point_at(c) - q;
            let mut cols: Vec<DVector<f64>> = Vec::new();
            let mut kinds: Vec<u8> = Vec::new(); // 0 = s, 1 = dir_frac
            let cs = ChartPoint { s: c.s + fd, ..c };
            cols.push((self.point_at(cs) - q - &r0) / fd);
            kinds.push(0);
            if self.n() == 2 {
                let cd = ChartPoint {
                    dir_frac: c.dir_frac + fd,
                    ..c
                };
                cols.push((self.point_at(cd) - q - &r0) / fd);
                kinds.push(1);
            }
            let m = cols.len();
            let mut jt_j = DMatrix::zeros(m, m);
            let mut jt_r = DVector::zeros(m);
            for i in 0..m {
                for j in 0..m {
                    jt_j[(i, j)] = cols[i].dot(&cols[j]);
                }
                jt_r[i] = cols[i].dot(&r0);
            }
            for i in 0..m {
                jt_j[(i, i)] += 1e-12;
            }
            let Some(step) = jt_j.lu().solve(&jt_r) else { break };
            let mut cand = c;
            for (i, kind) in kinds.iter().enumerate() {
                match kind {
                    0 => cand.s -= step[i],
                    _ => cand.dir_frac -= step[i],
                }
            }
            let end = self.rays[cand.ray].traj.end().t;
            cand.s = cand.s.clamp(-self.seed_eps, end);
            if self.n() == 2 {
                while cand.dir_frac < 0.0 {
                    cand.dir_frac += 1.0;
                    cand.ray = (cand.ray + self.rays.len() - 1) % self.rays.len();
                }
                while cand.dir_frac >= 1.0 {
                    cand.dir_frac -= 1.0;
                    cand.ray = (cand.ray + 1) % self.rays.len();
                }
            }
            let nd = (self.point_at(cand) - q).norm();
            if nd < dist {
                dist = nd;
                c = cand;
            } else {
                break;
            }
            if step.amax() < 1e-14 {
                break;
            }
        }
        Ok((c, dist))
    }

    /// Orthonormal tangent frame (n vectors) and normal frame (n vectors)
    /// at a chart point, in work coordinates.
    pub fn frames_at(&self, c: ChartPoint) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
        let dim = self.model.dim();
        let mut tangent: Vec<DVector<f64>> = Vec::new();
        let v = self.velocity_at(c);
        if c.s >= 0.0 && v.norm() > 1e-12 {
            tangent.push(v.normalize());
        } else {
            tangent.push(self.interp_direction(c));
        }
        if self.n() == 2 {
            let fd = 1e-4;
            let c2 = ChartPoint {
                dir_frac: c.dir_frac + fd,
                ..c
            };
            let dv = (self.point_at(c2) - self.point_at(c)) / fd;
            let mut w = dv;
            for t in &tangent {
                let p = w.dot(t);
                w -= t * p;
            }
            if w.norm() > 1e-10 {
                tangent.push(w.normalize());
            } else {
                let alt = self.interp_direction(ChartPoint {
                    dir_frac: (c.dir_frac + 0.25) % 1.0,
                    ..c
                });
                let mut w = alt;
                for t in &tangent {
                    let p = w.dot(t);
                    w -= t * p;
                }
                tangent.push(w.normalize());
            }
        }
        let mut normals = Vec::new();
        let mut basis = tangent.clone();
        for k in 0..dim {
            let mut e = DVector::zeros(dim);
            e[k] = 1.0;
            for b in &basis {
                let p = e.dot(b);
                e -= b * p;
            }
            if e.norm() > 1e-8 {
                let e = e.normalize();
                basis.push(e.clone());
                normals.push(e);
            }
            if normals.len() == dim - tangent.len() {
                break;
            }
        }
        (tangent, normals)
    }

    /// Refined copy: tighter integrator tolerance, denser fan (n = 2) and a
    /// smaller seed offset. Identity at the maximum level.
    pub fn refine(&self, tols: &Tolerances) -> Result<ThimbleAtlas> {
        if self.level >= self.opts.max_level {
            return Ok(self.clone());
        }
        let mut opts = self.opts.clone();
        opts.ode_tol /= 8.0;
        opts.eps_base /= 2.0;
        if self.n() == 2 {
            opts.ray_count *= 2;
        }
        // the atlas model already carries the rotation
        let mut atlas = build_thimble(
            &self.model,
            &self.critical_point,
            0.0,
            self.sign,
            &opts,
            tols,
        )?;
        atlas.theta = self.theta;
        atlas.level = self.level + 1;
        Ok(atlas)
    }
}

/// Invariant diagnostics for a built atlas.
#[derive(Debug, Clone)]
pub struct InvariantReport {
    /// max over samples of `|Im W_theta - Im W_theta(p)|`.
    pub im_residual_max: f64,
    /// Monotonicity violations of `Re W_theta` along rays (count).
    pub re_monotonicity_violations: usize,
    /// Total recorded arclength (tolerance scaling).
    pub arclength: f64,
    /// max relative error of `d Wbar / ds = |psi'|^2` checked by quadrature.
    pub wbar_identity_rel_err: f64,
    /// n = 2 only: max `|omega(X, Y)| / (|X| |Y|)` over sampled tangent pairs.
    pub omega_isotropy_max: Option<f64>,
    /// Minimal per-ray fraction of co-monotone `(distance, |Re W|)` steps.
    pub distance_growth_correlation: f64,
}

pub fn thimble_invariant_report(atlas: &ThimbleAtlas) -> InvariantReport {
    let model = atlas.rotated_model();
    let im_p = atlas.critical_value.im;
    let re_p = atlas.critical_value.re;
    let mut im_max: f64 = 0.0;
    let mut viol = 0usize;
    let mut arclength = 0.0;
    let mut wbar_err: f64 = 0.0;
    let mut corr_min: f64 = 1.0;
    for ray in &atlas.rays {
        let mut prev_re: Option<f64> = None;
        let mut co = 0usize;
        let mut steps = 0usize;
        let mut prev_d = 0.0f64;
        let mut prev_absre = 0.0f64;
        let mut quad = 0.0;
        for (k, s) in ray.traj.samples.iter().enumerate() {
            let w = model.value(&s.y);
            im_max = im_max.max((w.im - im_p).abs());
            let re = w.re;
            if let Some(p) = prev_re {
                // outward tracing: L^+ must not increase, L^- must not decrease
                let bad = match atlas.sign {
                    ThimbleSign::Plus => re > p + 1e-12 * (1.0 + p.abs()),
                    ThimbleSign::Minus => re < p - 1e-12 * (1.0 + p.abs()),
                };
                if bad {
                    viol += 1;
                }
            }
            prev_re = Some(re);
            let d = model.dist(&s.y, &atlas.critical_point);
            let absre = (re - re_p).abs();
            if k > 0 {
                steps += 1;
                if (d - prev_d) * (absre - prev_absre) >= 0.0 {
                    co += 1;
                }
            }
            prev_d = d;
            prev_absre = absre;
            if k + 1 < ray.traj.samples.len() {
                let nxt = &ray.traj.samples[k + 1];
                let h = nxt.t - s.t;
                // corrected trapezoid: f = |psi'|^2, f' = 2 <psi', psi''>
                // with psi'' from a centered difference of the field
                let fprime = |smp: &crate::ode::Sample| -> f64 {
                    let nv = smp.dy.norm();
                    if nv < 1e-14 {
                        return 0.0;
                    }
                    let dir = &smp.dy / nv;
                    let d = 1e-6;
                    let gp = model.grad_re(&(&smp.y + &dir * d));
                    let gm = model.grad_re(&(&smp.y - &dir * d));
                    let psi2 = (gp - gm) * (nv / (2.0 * d))
                        * match atlas.sign {
                            ThimbleSign::Plus => -1.0,
                            ThimbleSign::Minus => 1.0,
                        };
                    2.0 * smp.dy.dot(&psi2)
                };
                quad += 0.5 * h * (s.dy.norm_squared() + nxt.dy.norm_squared())
                    + h * h / 12.0 * (fprime(s) - fprime(nxt));
                arclength += (&nxt.y - &s.y).norm();
            }
        }
        if steps > 0 {
            corr_min = corr_min.min(co as f64 / steps as f64);
        }
        // d Wbar / ds = |psi'|^2 along the flow; the outward trace of L^+
        // runs the reversed field, flipping the increment sign
        let w0 = model.value(&ray.traj.start().y).conj();
        let w1 = model.value(&ray.traj.end().y).conj();
        let inc = match atlas.sign {
            ThimbleSign::Plus => (w0 - w1).re,
            ThimbleSign::Minus => (w1 - w0).re,
        };
        let rel = (quad - inc).abs() / inc.abs().max(1e-12);
        wbar_err = wbar_err.max(rel);
    }
    let omega_isotropy_max = (atlas.n() == 2).then(|| {
        let mut worst: f64 = 0.0;
        let rc = atlas.rays.len();
        for ri in 0..rc {
            let ray = &atlas.rays[ri];
            let nxt = &atlas.rays[(ri + 1) % rc];
            for s in ray.traj.samples.iter().step_by(4) {
                if s.t <= 0.0 {
                    continue;
                }
                let x = &s.dy;
                let y = nxt.traj.at(s.t) - &s.y;
                let (nx, ny) = (x.norm(), y.norm());
                if nx < 1e-12 || ny < 1e-12 {
                    continue;
                }
                let om = model.omega(&s.y, x, &y).abs() / (nx * ny);
                worst = worst.max(om);
            }
        }
        worst
    });
    InvariantReport {
        im_residual_max: im_max,
        re_monotonicity_violations: viol,
        arclength,
        wbar_identity_rel_err: wbar_err,
        omega_isotropy_max,
        distance_growth_correlation: corr_min,
    }
}

/// Hausdorff distance between the sample clouds of two atlases.
pub fn hausdorff(a: &ThimbleAtlas, b: &ThimbleAtlas) -> f64 {
    let pa: Vec<&DVector<f64>> = a.sample_points().collect();
    let pb: Vec<&DVector<f64>> = b.sample_points().collect();
    let one_sided = |from: &[&DVector<f64>], to: &[&DVector<f64>]| -> f64 {
        from.par_iter()
            .map(|p| {
                to.iter()
                    .map(|q| (*p - *q).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| 0.0, f64::max)
    };
    one_sided(&pa, &pb).max(one_sided(&pb, &pa))
}

// ---- cache file ----------------------------------------------------------

const MAGIC: &[u8; 4] = b"LGF1";
const VERSION: u16 = 1;

impl ThimbleAtlas {
    /// Binary cache: magic "LGF1", version u16, then little-endian f64
    /// records `(ray index, s, 2n coords)`.
    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        let dim = self.model.dim() as u32;
        w.write_all(&dim.to_le_bytes())?;
        let count: u64 = self.rays.iter().map(|r| r.traj.samples.len() as u64).sum();
        w.write_all(&count.to_le_bytes())?;
        for (ri, ray) in self.rays.iter().enumerate() {
            for s in &ray.traj.samples {
                w.write_all(&(ri as f64).to_le_bytes())?;
                w.write_all(&s.t.to_le_bytes())?;
                for v in s.y.iter() {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    /// Raw records of a cache file: `(ray, s, coords)`.
    pub fn read_cache<R: Read>(mut r: R) -> Result<Vec<(usize, f64, Vec<f64>)>> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(LgError::Parse("bad atlas cache magic".into()));
        }
        let mut v16 = [0u8; 2];
        r.read_exact(&mut v16)?;
        if u16::from_le_bytes(v16) != VERSION {
            return Err(LgError::Parse("unsupported atlas cache version".into()));
        }
        let mut v32 = [0u8; 4];
        r.read_exact(&mut v32)?;
        let dim = u32::from_le_bytes(v32) as usize;
        let mut v64 = [0u8; 8];
        r.read_exact(&mut v64)?;
        let count = u64::from_le_bytes(v64) as usize;
        let mut out = Vec::with_capacity(count);
        let mut f = [0u8; 8];
        for _ in 0..count {
            r.read_exact(&mut f)?;
            let ray = f64::from_le_bytes(f) as usize;
            r.read_exact(&mut f)?;
            let s = f64::from_le_bytes(f);
            let mut coords = Vec::with_capacity(dim);
            for _ in 0..dim {
                r.read_exact(&mut f)?;
                coords.push(f64::from_le_bytes(f));
            }
            out.push((ray, s, coords));
        }
        Ok(out)
    }

    /// SVG plot of the ray curves in the z-plane (n = 1 only).
    pub fn to_svg(&self) -> Result<String> {
        if self.n() != 1 {
            return Err(LgError::Unsupported("SVG plots cover n = 1".into()));
        }
        let mut curves = Vec::new();
        for ray in &self.rays {
            let pts: Vec<(f64, f64)> = ray
                .traj
                .samples
                .iter()
                .map(|s| {
                    let amb = self.model.to_ambient(&s.y);
                    (amb.coords[0].re, amb.coords[0].im)
                })
                .collect();
            curves.push(pts);
        }
        Ok(crate::svg::curves_svg(&curves, 480, 480))
    }
}
