//! Speed-k Hamiltonian chords between ordered thimbles: shooting, signed
//! distance sweeps, transversality, exact actions and the integer grading.

use crate::error::{LgError, Result};
use crate::geometry::{apply_j, C64};
use crate::metric::Bump;
use crate::model::LgModel;
use crate::ode::{integrate, OdeOptions};
use crate::thimble::{ChartPoint, ThimbleAtlas, ThimbleSign};
use crate::Tolerances;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// A separable perturbation `varpi(t, x) = rho(t) * sum_m bump_m(x)` with
/// the norms of the admissibility test.
#[derive(Debug, Clone, Default)]
pub struct PerturbationField {
    pub bumps: Vec<Bump>,
}

fn rho_t(t: f64) -> f64 {
    // smooth bump in t on (0, 1), peak value 1 at t = 1/2
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let q = (2.0 * t - 1.0) * (2.0 * t - 1.0);
    (-1.0 / (1.0 - q)).exp() * std::f64::consts::E
}

impl PerturbationField {
    pub fn is_zero(&self) -> bool {
        self.bumps.is_empty() || self.bumps.iter().all(|b| b.amplitude == 0.0)
    }

    pub fn value(&self, t: f64, u: &DVector<f64>) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let z = crate::geometry::real_to_complex(u);
        let r = rho_t(t);
        let mut acc = 0.0;
        for b in &self.bumps {
            let q: f64 = z
                .iter()
                .zip(&b.center)
                .map(|(a, c)| (a - c).norm_sqr())
                .sum::<f64>()
                / (b.radius * b.radius);
            if q < 1.0 {
                acc += b.amplitude * (-1.0 / (1.0 - q)).exp();
            }
        }
        r * acc
    }

    /// Euclidean gradient in `x` (centered differences; the bumps are
    /// smooth and the evaluation cheap).
    pub fn grad(&self, t: f64, u: &DVector<f64>) -> DVector<f64> {
        let dim = u.len();
        let mut g = DVector::zeros(dim);
        if self.is_zero() {
            return g;
        }
        let h = 1e-6;
        for j in 0..dim {
            let mut up = u.clone();
            let mut um = u.clone();
            up[j] += h;
            um[j] -= h;
            g[j] = (self.value(t, &up) - self.value(t, &um)) / (2.0 * h);
        }
        g
    }

    fn support_samples(&self, b: &Bump, k: usize, samples: usize) -> (f64, DVector<f64>) {
        let dim = 2 * b.center.len();
        let t = (k as f64 + 0.5) / samples as f64;
        let f = crate::rng::halton(k, 5).sqrt();
        let mut u = DVector::zeros(dim);
        for j in 0..b.center.len() {
            u[2 * j] = b.center[j].re;
            u[2 * j + 1] = b.center[j].im;
        }
        let ang = 2.399963229728653 * (k as f64 + 1.0);
        u[k % dim] += b.radius * f * ang.cos();
        u[(k + 1) % dim] += b.radius * f * ang.sin();
        (t, u)
    }

    /// `sup |grad varpi| + sup |grad^2 varpi|`, sampled over the supports.
    pub fn norm_2(&self, samples: usize) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let mut worst_g: f64 = 0.0;
        let mut worst_h: f64 = 0.0;
        for b in &self.bumps {
            let dim = 2 * b.center.len();
            for k in 0..samples {
                let (t, u) = self.support_samples(b, k, samples);
                let g = self.grad(t, &u);
                worst_g = worst_g.max(g.norm());
                let h = 1e-4;
                for j in 0..dim {
                    let mut up = u.clone();
                    let mut um = u.clone();
                    up[j] += h;
                    um[j] -= h;
                    let col = (self.grad(t, &up) - self.grad(t, &um)) / (2.0 * h);
                    worst_h = worst_h.max(col.norm());
                }
            }
        }
        worst_g + worst_h
    }

    /// `sup |grad varpi| / |grad Re W|`, sampled over the supports.
    pub fn norm_ratio(&self, model: &LgModel, samples: usize) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for b in &self.bumps {
            for k in 0..samples {
                let (t, u) = self.support_samples(b, k, samples);
                let g = self.grad(t, &u).norm();
                let gw = model.grad_re(&u).norm();
                if gw > 1e-12 {
                    worst = worst.max(g / gw);
                }
            }
        }
        worst
    }

    /// Admissibility: both norms below `delta0` and the supports clear of a
    /// tube around every listed chord image.
    pub fn admissible(&self, model: &LgModel, delta0: f64, chords: &[Chord], tube: f64) -> bool {
        if self.is_zero() {
            return true;
        }
        if self.norm_2(64) >= delta0 || self.norm_ratio(model, 64) >= delta0 {
            return false;
        }
        for b in &self.bumps {
            let mut c = DVector::zeros(2 * b.center.len());
            for j in 0..b.center.len() {
                c[2 * j] = b.center[j].re;
                c[2 * j + 1] = b.center[j].im;
            }
            for chord in chords {
                for (_, y) in &chord.samples {
                    if model.dist(&c, y) < b.radius + tube {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// A validated speed-k chord between two thimbles.
#[derive(Debug, Clone)]
pub struct Chord {
    pub speed: u32,
    /// Dense samples `(t, point)` with `t` in `[0, 1]`.
    pub samples: Vec<(f64, DVector<f64>)>,
    pub start_chart: ChartPoint,
    pub end_chart: ChartPoint,
    /// Residual distance of `phi(1)` to the target thimble.
    pub end_distance: f64,
    pub action: f64,
    pub action_quad_err: f64,
    /// Integer Maslov component of the grading (n = 1).
    pub grading: Option<i64>,
    /// Smallest singular value of the transversality system.
    pub tv_sigma_min: f64,
    pub transverse: bool,
    /// `Im W(p0) > Im W(p1)` held for the thimble pair.
    pub ordered: bool,
}

impl Chord {
    pub fn start(&self) -> &DVector<f64> {
        &self.samples.first().expect("chord has samples").1
    }
    pub fn end(&self) -> &DVector<f64> {
        &self.samples.last().expect("chord has samples").1
    }
    /// Value at parameter `t` by linear interpolation of the dense samples.
    pub fn at(&self, t: f64) -> DVector<f64> {
        let ss = &self.samples;
        if t <= ss[0].0 {
            return ss[0].1.clone();
        }
        if t >= ss[ss.len() - 1].0 {
            return ss[ss.len() - 1].1.clone();
        }
        let mut lo = 0;
        let mut hi = ss.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if ss[mid].0 <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = (t - ss[lo].0) / (ss[hi].0 - ss[lo].0);
        &ss[lo].1 * (1.0 - w) + &ss[hi].1 * w
    }
}

/// Integrate the speed-k chord flow `dphi/dt = -k grad_g Im W + X_varpi`
/// over `[0, t_end]`. `with_matrix` also integrates the linearized flow.
pub fn flow_map(
    model: &LgModel,
    x: &DVector<f64>,
    t_end: f64,
    k: u32,
    varpi: &PerturbationField,
    with_matrix: bool,
    ode_tol: f64,
) -> Result<(DVector<f64>, Option<DMatrix<f64>>, Vec<(f64, DVector<f64>)>)> {
    let dim = model.dim();
    let kf = k as f64;
    let m = model.clone();
    let vp = varpi.clone();
    // time rides along as a state so the perturbation may depend on t
    let field = move |z: &DVector<f64>| -> DVector<f64> {
        let u = z.rows(0, dim).into_owned();
        let t = z[dim];
        let mut v = -m.grad_im(&u) * kf;
        if !vp.is_zero() {
            // X_varpi = -J grad_g varpi
            let gp = vp.grad(t, &u);
            let gp = match m.metric_matrix(&u) {
                None => gp,
                Some(g) => g.lu().solve(&gp).expect("metric invertible"),
            };
            v -= apply_j(&gp);
        }
        let mut out = DVector::zeros(dim + 1);
        out.rows_mut(0, dim).copy_from(&v);
        out[dim] = 1.0;
        out
    };
    let opts = OdeOptions {
        tol: ode_tol,
        h_init: 1e-4,
        h_max: 0.05,
        escape_radius: 1e5,
        max_steps: 400_000,
    };
    let mut z0 = DVector::zeros(dim + 1);
    z0.rows_mut(0, dim).copy_from(x);
    if !with_matrix {
        let traj = integrate(field, z0, t_end, &opts, |_, _| false)?;
        let samples = traj
            .samples
            .iter()
            .map(|s| (s.t, s.y.rows(0, dim).into_owned()))
            .collect();
        return Ok((traj.end().y.rows(0, dim).into_owned(), None, samples));
    }
    // augmented system with the variational matrix; the field Jacobian is
    // differenced so bump metrics and perturbations need no special cases
    let m2 = model.clone();
    let vp2 = varpi.clone();
    let fd_jac = move |z: &DVector<f64>| -> DMatrix<f64> {
        let u = z.rows(0, dim).into_owned();
        let t = z[dim];
        let mut j = DMatrix::zeros(dim, dim);
        let h = 1e-6;
        for c in 0..dim {
            let mut up = u.clone();
            let mut um = u.clone();
            up[c] += h;
            um[c] -= h;
            let mut fp = -m2.grad_im(&up) * kf;
            let mut fm = -m2.grad_im(&um) * kf;
            if !vp2.is_zero() {
                fp -= apply_j(&vp2.grad(t, &up));
                fm -= apply_j(&vp2.grad(t, &um));
            }
            j.set_column(c, &((fp - fm) / (2.0 * h)));
        }
        j
    };
    let big = dim + 1 + dim * dim;
    let mut w0 = DVector::zeros(big);
    w0.rows_mut(0, dim + 1).copy_from(&z0);
    for i in 0..dim {
        w0[dim + 1 + i * dim + i] = 1.0;
    }
    let gfield = move |w: &DVector<f64>| -> DVector<f64> {
        let z = w.rows(0, dim + 1).into_owned();
        let mat = DMatrix::from_column_slice(dim, dim, &w.as_slice()[dim + 1..]);
        let dz = field(&z);
        let dm = fd_jac(&z) * mat;
        let mut out = DVector::zeros(big);
        out.rows_mut(0, dim + 1).copy_from(&dz);
        out.rows_mut(dim + 1, dim * dim)
            .copy_from_slice(dm.as_slice());
        out
    };
    let traj = integrate(gfield, w0, t_end, &opts, |_, _| false)?;
    let zf = &traj.end().y;
    let endpoint = zf.rows(0, dim).into_owned();
    let mat = DMatrix::from_column_slice(dim, dim, &zf.as_slice()[dim + 1..]);
    let samples = traj
        .samples
        .iter()
        .map(|s| (s.t, s.y.rows(0, dim).into_owned()))
        .collect();
    Ok((endpoint, Some(mat), samples))
}

/// Options for the chord search.
#[derive(Debug, Clone)]
pub struct ChordOptions {
    pub projection_radius: f64,
    pub ode_tol: f64,
    /// Extra sweep seeds between recorded ray samples.
    pub sweep_refine: usize,
    pub dedup_radius: f64,
}

impl Default for ChordOptions {
    fn default() -> Self {
        ChordOptions {
            projection_radius: 1.0,
            ode_tol: 1e-11,
            sweep_refine: 2,
            dedup_radius: 1e-6,
        }
    }
}

/// Signed-distance value of one sweep seed on `L0`.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub tau: f64,
    pub r: f64,
}

fn n1_point(atlas: &ThimbleAtlas, tau: f64) -> DVector<f64> {
    let (ray, s) = if tau >= 0.0 { (1usize, tau) } else { (0usize, -tau) };
    atlas.point_at(ChartPoint { ray, dir_frac: 0.0, s })
}

fn n1_chart(tau: f64) -> ChartPoint {
    if tau >= 0.0 {
        ChartPoint { ray: 1, dir_frac: 0.0, s: tau }
    } else {
        ChartPoint { ray: 0, dir_frac: 0.0, s: -tau }
    }
}

/// Signed distance of a point to `L1`: the component of the projection
/// residual along `J` of the globally oriented tangent, which varies
/// continuously along the whole thimble curve (n = 1).
fn signed_distance(
    l1: &ThimbleAtlas,
    endpoint: &DVector<f64>,
    projection_radius: f64,
) -> Option<f64> {
    let (chart, _) = l1.project(endpoint, projection_radius).ok()?;
    let foot = l1.point_at(chart);
    let normal = apply_j(&l1.oriented_tangent_n1(chart));
    Some((endpoint - foot).dot(&normal))
}

/// Sweep the signed distance `r(tau)` over the `L0` chart (n = 1); sign
/// changes bracket the chords. This is the brute-force oracle route.
pub fn sweep_signed_distance(
    l0: &ThimbleAtlas,
    l1: &ThimbleAtlas,
    k: u32,
    opts: &ChordOptions,
    seeds: usize,
) -> Vec<SweepPoint> {
    let model = l0.rotated_model();
    let end0 = l0.rays[0].traj.end().t;
    let end1 = l0.rays[1].traj.end().t;
    (0..seeds)
        .into_par_iter()
        .filter_map(|i| {
            let f = i as f64 / (seeds - 1) as f64;
            let tau = -end0 + f * (end0 + end1);
            let x = n1_point(l0, tau);
            let (endpoint, _, _) = flow_map(
                model,
                &x,
                1.0,
                k,
                &PerturbationField::default(),
                false,
                opts.ode_tol,
            )
            .ok()?;
            let r = signed_distance(l1, &endpoint, opts.projection_radius)?;
            Some(SweepPoint { tau, r })
        })
        .collect()
}

/// Newton-polished chord search between two distinct thimbles at speed `k`
/// (n = 1). Seeds come from the recorded ray samples of `L0`; bracketed
/// roots of the signed distance are bisected, densely re-integrated,
/// validated and deduplicated.
pub fn find_chords(
    l0: &ThimbleAtlas,
    l1: &ThimbleAtlas,
    k: u32,
    varpi: &PerturbationField,
    opts: &ChordOptions,
    tols: &Tolerances,
) -> Result<Vec<Chord>> {
    if l0.n() != 1 {
        return Err(LgError::Unsupported(
            "chord shooting is implemented for n = 1".into(),
        ));
    }
    if (l0.critical_point.clone() - &l1.critical_point).norm() < tols.cluster_tol
        && l0.sign == l1.sign
        && (l0.theta - l1.theta).abs() < 1e-12
    {
        return Err(LgError::InvalidInput(
            "chords require two distinct thimbles".into(),
        ));
    }
    let model = l0.rotated_model();
    let im0 = l0.critical_value.im;
    let im1 = l1.critical_value.im;
    let ordered = im0 > im1 + tols.im_sep_tol;
    let delta01 = im0 - im1;

    // seed taus from the recorded samples plus midpoints
    let mut taus: Vec<f64> = Vec::new();
    for (ri, ray) in l0.rays.iter().enumerate() {
        let sgn = if ri == 0 { -1.0 } else { 1.0 };
        for w in ray.traj.samples.windows(2) {
            for j in 0..=opts.sweep_refine {
                let f = j as f64 / (opts.sweep_refine + 1) as f64;
                taus.push(sgn * (w[0].t + f * (w[1].t - w[0].t)));
            }
        }
        taus.push(sgn * ray.traj.end().t);
    }
    taus.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let eval = |tau: f64| -> Option<f64> {
        let x = n1_point(l0, tau);
        let (endpoint, _, _) = flow_map(model, &x, 1.0, k, varpi, false, opts.ode_tol).ok()?;
        signed_distance(l1, &endpoint, opts.projection_radius)
    };
    let rs: Vec<Option<f64>> = taus.par_iter().map(|&t| eval(t)).collect();

    let mut roots: Vec<f64> = Vec::new();
    for i in 0..taus.len() - 1 {
        let (Some(ra), Some(rb)) = (rs[i], rs[i + 1]) else {
            continue;
        };
        if ra == 0.0 {
            roots.push(taus[i]);
            continue;
        }
        if ra * rb < 0.0 {
            let (mut a, mut b, mut fa) = (taus[i], taus[i + 1], ra);
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                let Some(fm) = eval(mid) else { break };
                if fa * fm <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
                if (b - a).abs() < 1e-14 * (1.0 + a.abs()) {
                    break;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }

    let candidates: Vec<Result<Chord>> = roots
        .into_par_iter()
        .map(|tau| build_chord(l0, l1, k, tau, varpi, opts, tols, ordered, delta01))
        .collect();
    let mut chords: Vec<Chord> = Vec::new();
    for c in candidates {
        match c {
            Ok(c) => {
                if !chords.iter().any(|o| {
                    (o.start().clone() - c.start()).norm() < opts.dedup_radius
                        && (o.end().clone() - c.end()).norm() < opts.dedup_radius
                }) {
                    chords.push(c);
                }
            }
            Err(LgError::OutOfChart { .. }) | Err(LgError::Escaped { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    // deterministic order: by action, then start coordinate
    chords.sort_by(|a, b| {
        a.action
            .partial_cmp(&b.action)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                a.samples[0].1[0]
                    .partial_cmp(&b.samples[0].1[0])
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
    });
    Ok(chords)
}

#[allow(clippy::too_many_arguments)]
fn build_chord(
    l0: &ThimbleAtlas,
    l1: &ThimbleAtlas,
    k: u32,
    tau: f64,
    varpi: &PerturbationField,
    opts: &ChordOptions,
    tols: &Tolerances,
    ordered: bool,
    delta01: f64,
) -> Result<Chord> {
    let model = l0.rotated_model();
    let x0 = n1_point(l0, tau);
    let (endpoint, mat, samples) =
        flow_map(model, &x0, 1.0, k, varpi, true, (opts.ode_tol * 0.1).max(1e-13))?;
    let (end_chart, end_distance) = l1.project(&endpoint, opts.projection_radius)?;
    if end_distance > tols.chord_tol.max(1e-7) {
        return Err(LgError::OutOfChart {
            distance: end_distance,
            radius: tols.chord_tol,
        });
    }
    if varpi.is_zero() {
        // Im W decreases monotonically along unperturbed chords
        let mut prev = f64::INFINITY;
        for (_, y) in &samples {
            let im = model.value(y).im;
            if im > prev + 1e-9 * (1.0 + prev.abs()) {
                return Err(LgError::InvalidInput(
                    "Im W increased along a candidate chord".into(),
                ));
            }
            prev = im;
        }
        // energy-length bound d(phi(t), phi(t0)) <= sqrt(k T Delta01): the
        // Cauchy-Schwarz chain with |dphi/dt| = k |grad Im W| and
        // int |grad Im W|^2 dt = Delta01 / k
        if ordered {
            let bound = (k as f64 * delta01).sqrt() * (1.0 + 1e-6) + 1e-9;
            for (i, (_, a)) in samples.iter().enumerate() {
                for (_, b) in samples.iter().skip(i + 1) {
                    if model.dist(a, b) > bound {
                        return Err(LgError::InvalidInput(format!(
                            "chord violates the energy-length bound ({} > {bound})",
                            model.dist(a, b)
                        )));
                    }
                }
            }
        }
    }
    let start_chart = n1_chart(tau);
    let mat = mat.expect("variational matrix requested");
    // transversality: normal component (on L1) of the transported L0 tangent
    let (tan0, _) = l0.frames_at(start_chart);
    let (tan1, _) = l1.frames_at(end_chart);
    let n = model.n();
    let mut sys = DMatrix::zeros(n, n);
    for (j, t0) in tan0.iter().enumerate() {
        let v = &mat * t0;
        let nrm = apply_j(&tan1[0]);
        sys[(0, j)] = v.dot(&nrm);
    }
    let svd = sys.svd(false, false);
    let tv_sigma_min = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let transverse = tv_sigma_min > tols.tv_tol;

    let (action, action_quad_err) =
        chord_action_from_samples(l0, l1, k, varpi, &samples, start_chart, end_chart)?;
    let grading = maslov_grading(l0, l1, k, &samples, end_chart).ok();

    Ok(Chord {
        speed: k,
        samples,
        start_chart,
        end_chart,
        end_distance,
        action,
        action_quad_err,
        grading,
        tv_sigma_min,
        transverse,
        ordered,
    })
}

/// Potential `gamma` of the primitive `lambda` on a thimble: the line
/// integral of `lambda` from the critical point to the chart point along
/// the ray flow, normalized by `gamma(p) = 0`.
pub fn thimble_gamma(atlas: &ThimbleAtlas, chart: ChartPoint, ode_tol: f64) -> Result<f64> {
    let model = atlas.rotated_model();
    let dir = atlas.rays[chart.ray % atlas.rays.len()].direction.clone();
    let p = &atlas.critical_point;
    let eps = atlas.seed_eps;
    // tip cap: straight segment from p to the seed (2-point Gauss)
    let seed = p + &dir * eps;
    let mut gamma = 0.0;
    for w in [0.5 - 0.5 / 3f64.sqrt(), 0.5 + 0.5 / 3f64.sqrt()] {
        let q = p + &dir * (eps * w);
        gamma += 0.5 * model.lambda(&q, &(&dir * eps));
    }
    if chart.s <= 0.0 {
        // inside the cap: the integrand is ~constant near p
        let f = ((chart.s + eps) / eps).max(0.0);
        return Ok(gamma * f);
    }
    let flow_sign = match atlas.sign {
        ThimbleSign::Plus => -1.0,
        ThimbleSign::Minus => 1.0,
    };
    let dim = model.dim();
    let m = model.clone();
    let field = move |z: &DVector<f64>| -> DVector<f64> {
        let u = z.rows(0, dim).into_owned();
        let v = m.grad_re(&u) * flow_sign;
        let mut out = DVector::zeros(dim + 1);
        let lam = m.lambda(&u, &v);
        out.rows_mut(0, dim).copy_from(&v);
        out[dim] = lam;
        out
    };
    let mut z0 = DVector::zeros(dim + 1);
    z0.rows_mut(0, dim).copy_from(&seed);
    let ode = OdeOptions {
        tol: ode_tol,
        h_init: 1e-6,
        h_max: 0.25,
        escape_radius: 1e7,
        max_steps: 400_000,
    };
    let traj = integrate(field, z0, chart.s, &ode, |_, _| false)?;
    Ok(gamma + traj.end().y[dim])
}

/// `gamma` by an independent route: composite Simpson over the stored ray
/// samples with Hermite sub-points (reparametrizes the same in-thimble
/// path; used by the two-path invariance check).
pub fn thimble_gamma_quadrature(atlas: &ThimbleAtlas, chart: ChartPoint) -> Result<f64> {
    let model = atlas.rotated_model();
    let dir = atlas.rays[chart.ray % atlas.rays.len()].direction.clone();
    let p = &atlas.critical_point;
    let eps = atlas.seed_eps;
    // tip cap by 4-point composite midpoint
    let mut gamma = 0.0;
    for i in 0..4 {
        let w = (i as f64 + 0.5) / 4.0;
        let q = p + &dir * (eps * w);
        gamma += 0.25 * model.lambda(&q, &(&dir * eps));
    }
    if chart.s <= 0.0 {
        let f = ((chart.s + eps) / eps).max(0.0);
        return Ok(gamma * f);
    }
    let flow_sign = match atlas.sign {
        ThimbleSign::Plus => -1.0,
        ThimbleSign::Minus => 1.0,
    };
    let ray = &atlas.rays[chart.ray];
    let integrand = |u: &DVector<f64>| -> f64 {
        let v = model.grad_re(u) * flow_sign;
        model.lambda(u, &v)
    };
    // Simpson over each recorded interval, subdivided via Hermite points
    let mut s_prev = 0.0f64;
    for w in ray.traj.samples.windows(2) {
        let (a, b) = (w[0].t, w[1].t.min(chart.s));
        if b <= a {
            break;
        }
        let sub = 8usize;
        for j in 0..sub {
            let lo = a + (b - a) * j as f64 / sub as f64;
            let hi = a + (b - a) * (j + 1) as f64 / sub as f64;
            let mid = 0.5 * (lo + hi);
            let f_lo = integrand(&ray.traj.at(lo));
            let f_mid = integrand(&ray.traj.at(mid));
            let f_hi = integrand(&ray.traj.at(hi));
            gamma += (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
        }
        s_prev = b;
        if b >= chart.s {
            break;
        }
    }
    let _ = s_prev;
    Ok(gamma)
}

/// Exact action
/// `A(l) = -[gamma0(l(0)) - gamma1(l(1)) + int l* lambda] - int H dt`
/// with `H = k Re W + varpi`, evaluated by re-integrating the chord with
/// quadrature states attached. The error estimate compares two integrator
/// tolerances.
pub fn chord_action_from_samples(
    l0: &ThimbleAtlas,
    l1: &ThimbleAtlas,
    k: u32,
    varpi: &PerturbationField,
    samples: &[(f64, DVector<f64>)],
    start_chart: ChartPoint,
    end_chart: ChartPoint,
) -> Result<(f64, f64)> {
    let a_fine = chord_action_at_tol(l0, l1, k, varpi, samples, start_chart, end_chart, 1e-12)?;
    let a_coarse = chord_action_at_tol(l0, l1, k, varpi, samples, start_chart, end_chart, 1e-9)?;
    Ok((a_fine, (a_fine - a_coarse).abs().max(1e-14)))
}

/// The action at one integrator tolerance (refinement studies use this
/// directly).
#[allow(clippy::too_many_arguments)]
pub fn chord_action_at_tol(
    l0: &ThimbleAtlas,
    l1: &ThimbleAtlas,
    k: u32,
    varpi: &PerturbationField,
    samples: &[(f64, DVector<f64>)],
    start_chart: ChartPoint,
    end_chart: ChartPoint,
    tol: f64,
) -> Result<f64> {
    let model = l0.rotated_model();
    let x0 = samples[0].1.clone();
    let constant = (samples.last().expect("samples").1.clone() - &x0).norm() < 1e-13;
    let run = |tol: f64| -> Result<f64> {
        let dim = model.dim();
        let kf = k as f64;
        let (int_lambda, int_h) = if constant {
            // degenerate (constant) chord: the line integrals collapse
            (0.0, kf * model.value(&x0).re)
        } else {
            let m = model.clone();
            let vp = varpi.clone();
            let field = move |z: &DVector<f64>| -> DVector<f64> {
                let u = z.rows(0, dim).into_owned();
                let t = z[dim];
                let mut v = -m.grad_im(&u) * kf;
                if !vp.is_zero() {
                    v -= apply_j(&vp.grad(t, &u));
                }
                let mut out = DVector::zeros(dim + 3);
                let lam = m.lambda(&u, &v);
                let ham = kf * m.value(&u).re + vp.value(t, &u);
                out.rows_mut(0, dim).copy_from(&v);
                out[dim] = 1.0;
                out[dim + 1] = lam;
                out[dim + 2] = ham;
                out
            };
            let mut z0 = DVector::zeros(dim + 3);
            z0.rows_mut(0, dim).copy_from(&x0);
            let ode = OdeOptions {
                tol,
                h_init: 1e-4,
                h_max: 0.05,
                escape_radius: 1e5,
                max_steps: 400_000,
            };
            let traj = integrate(field, z0, 1.0, &ode, |_, _| false)?;
            let zf = &traj.end().y;
            (zf[dim + 1], zf[dim + 2])
        };
        let g0 = thimble_gamma(l0, start_chart, tol)?;
        let g1 = thimble_gamma(l1, end_chart, tol)?;
        Ok(-(g0 - g1 + int_lambda) - int_h)
    };
    run(tol)
}

/// Continuous angle lift of the thimble tangent line at a chart point,
/// anchored at the seed-direction angle at the critical point (n = 1).
pub fn brane_angle(atlas: &ThimbleAtlas, chart: ChartPoint) -> f64 {
    let tip_dir = &atlas.rays[0].direction;
    let mut angle = tip_dir[1].atan2(tip_dir[0]).rem_euclid(std::f64::consts::PI);
    if chart.s <= 0.0 {
        return angle;
    }
    let ray = &atlas.rays[chart.ray];
    let model = atlas.rotated_model();
    let flow_sign = match atlas.sign {
        ThimbleSign::Plus => -1.0,
        ThimbleSign::Minus => 1.0,
    };
    for s in &ray.traj.samples {
        if s.t > chart.s {
            break;
        }
        let v = model.grad_re(&s.y) * flow_sign;
        if v.norm() > 1e-14 {
            angle = unwrap_line_angle(angle, v[1].atan2(v[0]));
        }
    }
    let u = atlas.point_at(chart);
    let v = model.grad_re(&u) * flow_sign;
    if v.norm() > 1e-14 {
        angle = unwrap_line_angle(angle, v[1].atan2(v[0]));
    }
    angle
}

/// Continue `target` (an angle of a line, defined mod pi) to the branch
/// nearest `prev`.
fn unwrap_line_angle(prev: f64, target: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let k = ((prev - target) / pi).round();
    target + k * pi
}

/// Integer Maslov component of the chord grading (n = 1): the winding of
/// the backward-transported `L1` tangent line closed up against the
/// clockwise short-path convention, measured between the brane angle lifts.
pub fn maslov_grading(
    l0: &ThimbleAtlas,
    l1: &ThimbleAtlas,
    k: u32,
    samples: &[(f64, DVector<f64>)],
    end_chart: ChartPoint,
) -> Result<i64> {
    let model = l0.rotated_model();
    if model.n() != 1 {
        return Err(LgError::Unsupported(
            "the integer grading is computed for n = 1".into(),
        ));
    }
    let pi = std::f64::consts::PI;
    let dim = 2;
    let kf = k as f64;
    let m = model.clone();
    let jac = move |u: &DVector<f64>| -> DMatrix<f64> { m.real_hessian_im(u) * (-kf) };
    // variational flow along the chord on the recorded grid (RK4)
    let mut mats: Vec<DMatrix<f64>> = Vec::with_capacity(samples.len());
    let mut mcur = DMatrix::identity(dim, dim);
    mats.push(mcur.clone());
    for w in samples.windows(2) {
        let (t0, y0) = (&w[0].0, &w[0].1);
        let (t1, y1) = (&w[1].0, &w[1].1);
        let h = t1 - t0;
        let ymid = (y0 + y1) * 0.5;
        let k1 = jac(y0) * &mcur;
        let k2 = jac(&ymid) * (&mcur + &k1 * (h / 2.0));
        let k3 = jac(&ymid) * (&mcur + &k2 * (h / 2.0));
        let k4 = jac(y1) * (&mcur + &k3 * h);
        mcur += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        mats.push(mcur.clone());
    }
    let m1 = mats.last().expect("chord samples").clone();
    let m1_inv = m1
        .try_inverse()
        .ok_or_else(|| LgError::InvalidInput("variational matrix singular".into()))?;
    let (tan1, _) = l1.frames_at(end_chart);
    let w0 = &m1_inv * &tan1[0];
    // path V(t) = M(t) M(1)^{-1} t1 from T L1-tilde (t = 0) to T L1 (t = 1)
    let mut theta = {
        let v = &mats[0] * &w0;
        v[1].atan2(v[0]).rem_euclid(pi)
    };
    let theta_path_start = theta;
    for mt in mats.iter().skip(1) {
        let v = mt * &w0;
        theta = unwrap_line_angle(theta, v[1].atan2(v[0]));
    }
    let delta_v = theta - theta_path_start;

    let start_chart = {
        // the first sample sits on L0 by construction
        let (c, _) = l0.project(&samples[0].1, f64::INFINITY)?;
        c
    };
    let a0 = brane_angle(l0, start_chart);
    let a1 = brane_angle(l1, end_chart);
    // short path: clockwise rotation of angle < pi from line(a0) to V(0)
    let delta_short = -((a0 - theta_path_start).rem_euclid(pi));
    let total = a0 + delta_short + delta_v;
    let y = (total - a1) / pi;
    let yi = y.round();
    if (y - yi).abs() > 0.05 {
        return Err(LgError::InvalidInput(format!(
            "grading winding {y:.4} is not close to an integer"
        )));
    }
    // sign convention calibrated against the strip linearization index:
    // rigid (index-1) strips run from y+1 down to y, matching the energy
    // direction A(l^-) > A(l^+)
    Ok(-(yi as i64))
}

/// Rerun the chord search with a perturbed Hamiltonian and compare chord
/// sets. `None` means the perturbation failed the admissibility
/// preconditions and the check was skipped.
pub fn chord_invariance_under_perturbation(
    l0: &ThimbleAtlas,
    l1: &ThimbleAtlas,
    k: u32,
    varpi: &PerturbationField,
    delta0: f64,
    tube: f64,
    opts: &ChordOptions,
    tols: &Tolerances,
) -> Result<Option<bool>> {
    let base = find_chords(l0, l1, k, &PerturbationField::default(), opts, tols)?;
    if !varpi.admissible(l0.rotated_model(), delta0, &base, tube) {
        return Ok(None);
    }
    let pert = find_chords(l0, l1, k, varpi, opts, tols)?;
    if base.len() != pert.len() {
        return Ok(Some(false));
    }
    let matched = base.iter().all(|b| {
        pert.iter().any(|p| {
            (b.start().clone() - p.start()).norm() < tols.cluster_tol.max(1e-6)
                && (b.end().clone() - p.end()).norm() < tols.cluster_tol.max(1e-6)
        })
    });
    Ok(Some(matched))
}

/// The rotated-cubic test model `e^{i theta}(z^3/3 - z)`.
pub fn rotated_cubic_model(theta: f64) -> LgModel {
    let w = crate::potential::Potential::univariate(
        crate::potential::Domain::Affine,
        &[(3, C64::new(1.0 / 3.0, 0.0)), (1, C64::new(-1.0, 0.0))],
    )
    .expect("valid cubic");
    LgModel::flat(w).expect("flat model").rotated(theta)
}

/// The rotated-quartic sibling `e^{i theta}(z^4/4 - z)`: three critical
/// points, the smallest model with a strictly ordered brane triple.
pub fn rotated_quartic_model(theta: f64) -> LgModel {
    let w = crate::potential::Potential::univariate(
        crate::potential::Domain::Affine,
        &[(4, C64::new(0.25, 0.0)), (1, C64::new(-1.0, 0.0))],
    )
    .expect("valid quartic");
    LgModel::flat(w).expect("flat model").rotated(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::critical::find_critical_points;
    use crate::thimble::{build_thimble, ThimbleOptions};
    use approx::assert_abs_diff_eq;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    pub(crate) fn cubic_atlases(theta: f64, span: f64) -> (ThimbleAtlas, ThimbleAtlas) {
        let m = rotated_cubic_model(theta);
        let crits = find_critical_points(&m, 2.0, 128, &tols());
        assert_eq!(crits.len(), 2);
        let to = ThimbleOptions {
            re_span: span,
            ..Default::default()
        };
        let a =
            build_thimble(&m, &crits[0].location, 0.0, ThimbleSign::Plus, &to, &tols()).unwrap();
        let b =
            build_thimble(&m, &crits[1].location, 0.0, ThimbleSign::Plus, &to, &tols()).unwrap();
        // L0 carries the larger Im W
        if a.critical_value.im > b.critical_value.im {
            (a, b)
        } else {
            (b, a)
        }
    }

    #[test]
    fn flow_fixes_critical_points() {
        // p is known to crit_tol; the saddle flow amplifies that seed error
        // by at most e^{k |lambda|} over unit time
        let m = rotated_cubic_model(std::f64::consts::PI / 6.0);
        let crits = find_critical_points(&m, 2.0, 128, &tols());
        for c in &crits {
            let (end, _, _) =
                flow_map(&m, &c.location, 1.0, 2, &PerturbationField::default(), false, 1e-11)
                    .unwrap();
            assert!((end - &c.location).norm() < 1e-7);
        }
    }

    #[test]
    fn im_w_decreases_along_flows_and_blowup_is_reported() {
        let m = rotated_cubic_model(0.3);
        let x = DVector::from_vec(vec![0.4, 0.3]);
        let (end, _, samples) =
            flow_map(&m, &x, 0.25, 1, &PerturbationField::default(), false, 1e-11).unwrap();
        assert!(m.value(&end).im <= m.value(&x).im + 1e-12);
        let mut prev = f64::INFINITY;
        for (_, y) in &samples {
            let im = m.value(y).im;
            assert!(im <= prev + 1e-10);
            prev = im;
        }
        // far out the |z|^4 growth of |grad Im W|^2 blows up in finite time
        let wild = DVector::from_vec(vec![6.0, 9.0]);
        let err = flow_map(&m, &wild, 5.0, 3, &PerturbationField::default(), false, 1e-9);
        assert!(matches!(err, Err(LgError::Escaped { .. })));
    }

    #[test]
    fn z_squared_flow_matches_matrix_exponential() {
        // W = z^2/2: Im W = xy, flow (x, y)' = -k (y, x), so
        // phi(t) = exp(-kAt) x with A = [[0, 1], [1, 0]].
        let w = crate::potential::Potential::univariate(
            crate::potential::Domain::Affine,
            &[(2, C64::new(0.5, 0.0))],
        )
        .unwrap();
        let m = LgModel::flat(w).unwrap();
        let x = DVector::from_vec(vec![0.8, -0.3]);
        for k in [1u32, 2] {
            let (end, mat, _) =
                flow_map(&m, &x, 1.0, k, &PerturbationField::default(), true, 1e-12).unwrap();
            let kt = k as f64;
            let (ch, sh) = (kt.cosh(), kt.sinh());
            let ex = DMatrix::from_row_slice(2, 2, &[ch, -sh, -sh, ch]);
            let expect = &ex * &x;
            assert!(
                (end.clone() - &expect).norm() < 1e-9,
                "endpoint {end:?} vs {expect:?}"
            );
            let mat = mat.unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert_abs_diff_eq!(mat[(i, j)], ex[(i, j)], epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn rotated_cubic_chords_exist_and_validate() {
        let (l0, l1) = cubic_atlases(std::f64::consts::PI / 6.0, 4.0);
        let chords = find_chords(
            &l0,
            &l1,
            1,
            &PerturbationField::default(),
            &ChordOptions::default(),
            &tols(),
        )
        .unwrap();
        assert!(!chords.is_empty(), "the rotated cubic has speed-1 chords");
        for c in &chords {
            assert!(c.ordered);
            assert!(c.end_distance < 1e-7);
            assert!(c.transverse, "sigma_min = {}", c.tv_sigma_min);
            assert!(c.grading.is_some());
        }
    }

    #[test]
    fn chord_count_matches_dense_sweep_oracle() {
        // oracle: sign changes of the signed distance over a dense seed
        // sweep, cross-checked at two densities
        let (l0, l1) = cubic_atlases(std::f64::consts::PI / 6.0, 4.0);
        let opts = ChordOptions::default();
        for k in [1u32, 2] {
            let chords =
                find_chords(&l0, &l1, k, &PerturbationField::default(), &opts, &tols()).unwrap();
            for seeds in [5_000usize, 10_000] {
                let mut sweep = sweep_signed_distance(&l0, &l1, k, &opts, seeds);
                sweep.sort_by(|a, b| a.tau.partial_cmp(&b.tau).unwrap());
                let mut crossings = 0;
                for w in sweep.windows(2) {
                    if w[0].r * w[1].r < 0.0 {
                        crossings += 1;
                    }
                }
                assert_eq!(
                    crossings,
                    chords.len(),
                    "k = {k}, seeds = {seeds}: oracle {crossings} vs newton {}",
                    chords.len()
                );
            }
        }
    }

    #[test]
    fn constant_chord_action_is_minus_k_re_w() {
        // degenerate test object: the L^+/L^- pair at one critical point
        // shares the constant chord at p, whose action is -k Re W(p)
        let m = rotated_cubic_model(std::f64::consts::PI / 6.0);
        let crits = find_critical_points(&m, 2.0, 128, &tols());
        let to = ThimbleOptions {
            re_span: 2.0,
            ..Default::default()
        };
        let p = &crits[0].location;
        let lp = build_thimble(&m, p, 0.0, ThimbleSign::Plus, &to, &tols()).unwrap();
        let lm = build_thimble(&m, p, 0.0, ThimbleSign::Minus, &to, &tols()).unwrap();
        let k = 2u32;
        let samples: Vec<(f64, DVector<f64>)> =
            (0..=10).map(|i| (i as f64 / 10.0, p.clone())).collect();
        let c0 = ChartPoint {
            ray: 0,
            dir_frac: 0.0,
            s: -lp.seed_eps,
        };
        let (a, err) = chord_action_from_samples(
            &lp,
            &lm,
            k,
            &PerturbationField::default(),
            &samples,
            c0,
            c0,
        )
        .unwrap();
        let expect = -(k as f64) * m.value(p).re;
        assert!(
            (a - expect).abs() < 1e-9 + err,
            "constant-chord action {a} vs -k Re W = {expect}"
        );
    }

    #[test]
    fn action_is_path_independent_and_quadrature_stable() {
        // tight-tolerance atlases: the check certifies exactness at the
        // 1e-8 level, so the stored paths must be cleaner than that
        let m = rotated_cubic_model(std::f64::consts::PI / 6.0);
        let crits = find_critical_points(&m, 2.0, 128, &tols());
        let to = ThimbleOptions {
            re_span: 4.0,
            ode_tol: 1e-12,
            ..Default::default()
        };
        let a =
            build_thimble(&m, &crits[0].location, 0.0, ThimbleSign::Plus, &to, &tols()).unwrap();
        let b =
            build_thimble(&m, &crits[1].location, 0.0, ThimbleSign::Plus, &to, &tols()).unwrap();
        let (l0, l1) = if a.critical_value.im > b.critical_value.im {
            (a, b)
        } else {
            (b, a)
        };
        let chords = find_chords(
            &l0,
            &l1,
            1,
            &PerturbationField::default(),
            &ChordOptions::default(),
            &tols(),
        )
        .unwrap();
        let c = &chords[0];
        // two-path comparison for gamma: the fresh flow integration vs the
        // Simpson quadrature over the stored ray parametrization
        for (atlas, chart) in [(&l0, c.start_chart), (&l1, c.end_chart)] {
            let g_ode = thimble_gamma(atlas, chart, 1e-12).unwrap();
            let g_quad = thimble_gamma_quadrature(atlas, chart).unwrap();
            assert!(
                (g_ode - g_quad).abs() < 1e-8,
                "gamma changed {:.3e} under path reparametrization",
                (g_ode - g_quad).abs()
            );
        }
        // Richardson semantics: a finer run moves the action by less than
        // the reported estimate
        let a_finer = chord_action_at_tol(
            &l0,
            &l1,
            1,
            &PerturbationField::default(),
            &c.samples,
            c.start_chart,
            c.end_chart,
            1e-13,
        )
        .unwrap();
        assert!(
            (a_finer - c.action).abs() <= c.action_quad_err,
            "finer-tolerance change {:.3e} exceeds the estimate {:.3e}",
            (a_finer - c.action).abs(),
            c.action_quad_err
        );
    }

    #[test]
    fn gradings_shift_by_two_under_full_rotation() {
        // a full 2 pi rotation of the test line adds 2 to the winding count
        // (the Maslov index of the RP^1 generator)
        let pi = std::f64::consts::PI;
        let base = 0.3f64;
        let mut theta = base;
        for k in 1..=64 {
            let target = base + 2.0 * pi * k as f64 / 64.0;
            theta = super::unwrap_line_angle(theta, target);
        }
        assert!((theta - base - 2.0 * pi).abs() < 1e-9);
        assert_eq!(((theta - base) / pi).round() as i64, 2);
    }

    #[test]
    fn perturbation_invariance_of_the_chord_set() {
        let (l0, l1) = cubic_atlases(std::f64::consts::PI / 6.0, 4.0);
        let opts = ChordOptions::default();
        let same = chord_invariance_under_perturbation(
            &l0,
            &l1,
            1,
            &PerturbationField::default(),
            0.5,
            0.1,
            &opts,
            &tols(),
        )
        .unwrap();
        assert_eq!(same, Some(true));
        // a small bump far from every chord image
        let far_bump = PerturbationField {
            bumps: vec![Bump {
                center: vec![C64::new(6.0, 6.0)],
                radius: 0.5,
                amplitude: 1e-3,
            }],
        };
        let ok =
            chord_invariance_under_perturbation(&l0, &l1, 1, &far_bump, 0.5, 0.1, &opts, &tols())
                .unwrap();
        assert_eq!(ok, Some(true));
        // an oversized perturbation is skipped with a warning, not failed
        let big_bump = PerturbationField {
            bumps: vec![Bump {
                center: vec![C64::new(6.0, 6.0)],
                radius: 0.5,
                amplitude: 50.0,
            }],
        };
        let skipped =
            chord_invariance_under_perturbation(&l0, &l1, 1, &big_bump, 0.5, 0.1, &opts, &tols())
                .unwrap();
        assert_eq!(skipped, None);
    }

    #[test]
    fn chord_endpoints_stable_under_atlas_refinement() {
        let (l0, l1) = cubic_atlases(std::f64::consts::PI / 6.0, 4.0);
        let opts = ChordOptions::default();
        let base =
            find_chords(&l0, &l1, 1, &PerturbationField::default(), &opts, &tols()).unwrap();
        let l0r = l0.refine(&tols()).unwrap();
        let l1r = l1.refine(&tols()).unwrap();
        let refined =
            find_chords(&l0r, &l1r, 1, &PerturbationField::default(), &opts, &tols()).unwrap();
        assert_eq!(base.len(), refined.len());
        for b in &base {
            let drift = refined
                .iter()
                .map(|r| {
                    (b.start().clone() - r.start()).norm() + (b.end().clone() - r.end()).norm()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(drift < 1e-6, "endpoint drift {drift:.2e}");
        }
    }

    /// Spectral-flow oracle for the grading: discretize the asymptotic
    /// operator family `A_lambda = -J d/dt + Hess H` with thimble-tangent
    /// boundary conditions along an interpolation between two chords and
    /// count signed eigenvalue crossings. The count must equal the grading
    /// difference (the Fredholm index of the connecting strip operator).
    fn spectral_flow(
        l0: &ThimbleAtlas,
        l1: &ThimbleAtlas,
        k: u32,
        a: &Chord,
        b: &Chord,
        nt: usize,
        steps: usize,
    ) -> i64 {
        use nalgebra::SymmetricEigen;
        let model = l0.rotated_model();
        let kf = k as f64;
        let ht = 1.0 / nt as f64;
        let eig_at = |lam: f64| -> Vec<f64> {
            // interpolated path and boundary tangent lines
            let pts: Vec<DVector<f64>> = (0..=nt)
                .map(|j| {
                    let t = j as f64 * ht;
                    a.at(t) * (1.0 - lam) + b.at(t) * lam
                })
                .collect();
            let tau0 = {
                let (c, _) = l0.project(&pts[0], 2.0).unwrap();
                l0.oriented_tangent_n1(c)
            };
            let tau1 = {
                let (c, _) = l1.project(&pts[nt], 2.0).unwrap();
                l1.oriented_tangent_n1(c)
            };
            // reduced basis: boundary nodes restricted to the tangent lines
            let red = 2 * (nt - 1) + 2;
            let mut basis = DMatrix::zeros(2 * (nt + 1), red);
            basis.view_mut((0, 0), (2, 1)).copy_from(&tau0);
            for j in 1..nt {
                basis[(2 * j, 1 + 2 * (j - 1))] = 1.0;
                basis[(2 * j + 1, 2 + 2 * (j - 1))] = 1.0;
            }
            basis
                .view_mut((2 * nt, red - 1), (2, 1))
                .copy_from(&tau1);
            // quadratic form: segment-midpoint first-order part + trapezoid
            // zero-order part; symmetric on the constrained space
            let mut q = DMatrix::zeros(2 * (nt + 1), 2 * (nt + 1));
            for j in 0..nt {
                // -J (xi_{j+1} - xi_j) . (eta_j + eta_{j+1}) / 2
                for (r, c, sgn) in [
                    (j, j, -1.0f64),
                    (j, j + 1, 1.0),
                    (j + 1, j, -1.0),
                    (j + 1, j + 1, 1.0),
                ] {
                    // block eta_r . (-J) xi_c * sgn/2
                    let (br, bc) = (2 * r, 2 * c);
                    // -J = [[0, 1], [-1, 0]]
                    q[(br, bc + 1)] += 0.5 * sgn;
                    q[(br + 1, bc)] -= 0.5 * sgn;
                }
            }
            for (j, p) in pts.iter().enumerate() {
                let w = if j == 0 || j == nt { 0.5 } else { 1.0 } * ht;
                let hess = model.real_hessian_re(p) * kf;
                for r in 0..2 {
                    for c in 0..2 {
                        q[(2 * j + r, 2 * j + c)] += w * hess[(r, c)];
                    }
                }
            }
            // mass matrix: trapezoid weights
            let mut g = DMatrix::zeros(2 * (nt + 1), 2 * (nt + 1));
            for j in 0..=nt {
                let w = if j == 0 || j == nt { 0.5 } else { 1.0 } * ht;
                g[(2 * j, 2 * j)] = w;
                g[(2 * j + 1, 2 * j + 1)] = w;
            }
            let qr = basis.transpose() * (&q + q.transpose()) * 0.5 * &basis;
            let gr = basis.transpose() * g * &basis;
            let chol = gr.cholesky().expect("mass matrix spd");
            let li = chol.l().try_inverse().expect("invertible");
            let sym = &li * qr * li.transpose();
            let se = SymmetricEigen::new((sym.clone() + sym.transpose()) * 0.5);
            let mut ev: Vec<f64> = se.eigenvalues.iter().cloned().collect();
            ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
            ev
        };
        // count signed crossings of the low spectrum through zero
        let mut flow = 0i64;
        let mut prev_neg = eig_at(0.0).iter().filter(|&&e| e < 0.0).count() as i64;
        for s in 1..=steps {
            let lam = s as f64 / steps as f64;
            let neg = eig_at(lam).iter().filter(|&&e| e < 0.0).count() as i64;
            flow += prev_neg - neg;
            prev_neg = neg;
        }
        flow
    }

    #[test]
    fn grading_difference_matches_spectral_flow_index() {
        // quartic (L0, L2) pair at k = 2 carries two chords of adjacent
        // grading; the index of the connecting-strip linearization is the
        // spectral flow of the asymptotic operators, which must equal the
        // grading difference
        let m = rotated_quartic_model(0.3);
        let crits = find_critical_points(&m, 2.5, 256, &tols());
        assert_eq!(crits.len(), 3);
        let to = ThimbleOptions {
            re_span: 5.0,
            ..Default::default()
        };
        let mut atlases: Vec<ThimbleAtlas> = crits
            .iter()
            .map(|c| build_thimble(&m, &c.location, 0.0, ThimbleSign::Plus, &to, &tols()).unwrap())
            .collect();
        atlases.sort_by(|x, y| {
            y.critical_value
                .im
                .partial_cmp(&x.critical_value.im)
                .unwrap()
        });
        let (l0, l2) = (&atlases[0], &atlases[2]);
        let chords = find_chords(
            l0,
            l2,
            2,
            &PerturbationField::default(),
            &ChordOptions::default(),
            &tols(),
        )
        .unwrap();
        assert_eq!(chords.len(), 2, "expected two k=2 chords on (L0, L2)");
        let y0 = chords[0].grading.unwrap();
        let y1 = chords[1].grading.unwrap();
        // sorted by action: chords[0] has the smaller action
        assert!(chords[0].action < chords[1].action);
        let dy = y1 - y0;
        assert_eq!(dy, 1, "actions {:.4} < {:.4} must carry gradings y, y+1",
            chords[0].action, chords[1].action);
        // spectral flow from the lower-action chord to the higher one
        let flow = spectral_flow(l0, l2, 2, &chords[0], &chords[1], 96, 60);
        assert_eq!(flow, dy, "spectral flow {flow} vs grading difference {dy}");
    }

    #[test]
    fn identical_thimbles_are_rejected() {
        let (l0, _) = cubic_atlases(std::f64::consts::PI / 6.0, 3.0);
        let err = find_chords(
            &l0,
            &l0,
            1,
            &PerturbationField::default(),
            &ChordOptions::default(),
            &tols(),
        );
        assert!(matches!(err, Err(LgError::InvalidInput(_))));
    }
}
