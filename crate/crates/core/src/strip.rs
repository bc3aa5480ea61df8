//! Finite-difference solver for the perturbed Floer/Witten equation on the
//! truncated strip `[-S, S] x [0, 1]`:
//!
//!   `d phi/ds + J d phi/dt - grad_g (k Re W + varpi)(t, phi) = 0`
//!
//! with thimble boundary rows at `t = 0, 1` (normal components pinned via
//! the projection linearization, tangential one-sided PDE rows) and the end
//! columns clamped to the asymptotic chords. Damped Newton over a banded
//! Jacobian; energies, the energy identity, exponential-decay fits and the
//! translation-mode singular values live here too.

use crate::band::{two_smallest_singular_values, BandMatrix};
use crate::chords::{Chord, PerturbationField};
use crate::error::{LgError, Result};
use crate::geometry::apply_j;
use crate::model::LgModel;
use crate::thimble::ThimbleAtlas;
use crate::Tolerances;
use nalgebra::{DMatrix, DVector};

/// Discretized strip field with its grid geometry.
#[derive(Debug, Clone)]
pub struct StripGrid {
    pub s_max: f64,
    pub ns: usize,
    pub nt: usize,
    pub k: u32,
    /// `(ns + 1) * (nt + 1)` nodes, index `i * (nt + 1) + j`, each `2n` reals.
    pub field: Vec<DVector<f64>>,
}

impl StripGrid {
    pub fn hs(&self) -> f64 {
        2.0 * self.s_max / self.ns as f64
    }
    pub fn ht(&self) -> f64 {
        1.0 / self.nt as f64
    }
    pub fn s_of(&self, i: usize) -> f64 {
        -self.s_max + i as f64 * self.hs()
    }
    pub fn t_of(&self, j: usize) -> f64 {
        j as f64 * self.ht()
    }
    #[inline]
    pub fn node(&self, i: usize, j: usize) -> &DVector<f64> {
        &self.field[i * (self.nt + 1) + j]
    }
    #[inline]
    pub fn node_mut(&mut self, i: usize, j: usize) -> &mut DVector<f64> {
        &mut self.field[i * (self.nt + 1) + j]
    }

    /// Discrete `d phi/ds` at a node (central inside, one-sided at ends).
    pub fn ds_at(&self, i: usize, j: usize) -> DVector<f64> {
        let hs = self.hs();
        if i == 0 {
            (self.node(1, j) - self.node(0, j)) / hs
        } else if i == self.ns {
            (self.node(self.ns, j) - self.node(self.ns - 1, j)) / hs
        } else {
            (self.node(i + 1, j) - self.node(i - 1, j)) / (2.0 * hs)
        }
    }

    /// Discrete `d phi/dt` (second-order one-sided at the boundary rows).
    pub fn dt_at(&self, i: usize, j: usize) -> DVector<f64> {
        let ht = self.ht();
        if j == 0 {
            (self.node(i, 0) * -3.0 + self.node(i, 1) * 4.0 - self.node(i, 2)) / (2.0 * ht)
        } else if j == self.nt {
            (self.node(i, self.nt) * 3.0 - self.node(i, self.nt - 1) * 4.0
                + self.node(i, self.nt - 2))
                / (2.0 * ht)
        } else {
            (self.node(i, j + 1) - self.node(i, j - 1)) / (2.0 * ht)
        }
    }
}

/// Hamiltonian data for a strip solve: `H(t, x) = k Re W(x) + varpi(t, x)`.
#[derive(Clone)]
pub struct StripProblem {
    pub model: LgModel,
    pub k: u32,
    pub varpi: PerturbationField,
}

impl StripProblem {
    pub fn grad_h(&self, t: f64, u: &DVector<f64>) -> DVector<f64> {
        let mut g = self.model.grad_re(u) * self.k as f64;
        if !self.varpi.is_zero() {
            let gp = self.varpi.grad(t, u);
            let gp = match self.model.metric_matrix(u) {
                None => gp,
                Some(m) => m.lu().solve(&gp).expect("metric invertible"),
            };
            g += gp;
        }
        g
    }

    /// Real Hessian of `H` (flat families analytically, bumps by fd).
    pub fn hess_h(&self, t: f64, u: &DVector<f64>) -> DMatrix<f64> {
        let mut h = self.model.real_hessian_re(u) * self.k as f64;
        if !self.varpi.is_zero() {
            let dim = u.len();
            let fd = 1e-5;
            for c in 0..dim {
                let mut up = u.clone();
                let mut um = u.clone();
                up[c] += fd;
                um[c] -= fd;
                let col = (self.varpi.grad(t, &up) - self.varpi.grad(t, &um)) / (2.0 * fd);
                for r in 0..dim {
                    h[(r, c)] += col[r];
                }
            }
        }
        h
    }

    /// PDE residual at interior-style stencils.
    pub fn residual_at(&self, grid: &StripGrid, i: usize, j: usize) -> DVector<f64> {
        let ds = grid.ds_at(i, j);
        let dt = grid.dt_at(i, j);
        ds + apply_j(&dt) - self.grad_h(grid.t_of(j), grid.node(i, j))
    }
}

/// Residual field over the grid, excluding the constraint rows (the end
/// columns and the normal components of the `t`-boundary rows).
pub fn strip_residual(problem: &StripProblem, grid: &StripGrid) -> Vec<Vec<DVector<f64>>> {
    let mut out = Vec::with_capacity(grid.ns + 1);
    for i in 0..=grid.ns {
        let mut row = Vec::with_capacity(grid.nt + 1);
        for j in 0..=grid.nt {
            if i == 0 || i == grid.ns {
                row.push(DVector::zeros(grid.node(i, j).len()));
            } else {
                row.push(problem.residual_at(grid, i, j));
            }
        }
        out.push(row);
    }
    out
}

/// Infinity norm of the PDE residual over non-constraint rows: full PDE at
/// interior nodes, tangential components only at the thimble boundary rows
/// (their normal components are replaced by the manifold constraint).
pub fn residual_inf_norm_constrained(
    problem: &StripProblem,
    grid: &StripGrid,
    l0: &ThimbleAtlas,
    l1: &ThimbleAtlas,
    projection_radius: f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 1..grid.ns {
        for j in 0..=grid.nt {
            let r = problem.residual_at(grid, i, j);
            if j == 0 || j == grid.nt {
                let atlas = if j == 0 { l0 } else { l1 };
                if let Ok(fr) = boundary_frames(atlas, grid.node(i, j), projection_radius) {
                    for tan in &fr.tangents {
                        worst = worst.max(tan.dot(&r).abs());
                    }
                }
            } else {
                worst = worst.max(r.amax());
            }
        }
    }
    worst
}

/// Infinity norm of the raw PDE residual over interior nodes.
pub fn residual_inf_norm(problem: &StripProblem, grid: &StripGrid) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 1..grid.ns {
        for j in 1..grid.nt {
            worst = worst.max(problem.residual_at(grid, i, j).amax());
        }
    }
    worst
}

/// Solver options.
#[derive(Debug, Clone)]
pub struct StripOptions {
    pub s_max: f64,
    pub ns: usize,
    pub nt: usize,
    pub max_newton: usize,
    pub max_halvings: usize,
    pub projection_radius: f64,
}

impl Default for StripOptions {
    fn default() -> Self {
        StripOptions {
            s_max: 8.0,
            ns: 256,
            nt: 16,
            max_newton: 60,
            max_halvings: 30,
            projection_radius: 2.0,
        }
    }
}

/// Pick the truncation from the decay estimate `exp(-delta_est * S) < 1e-8`
/// with `delta_est` from the smallest Hessian eigenvalue magnitude at the
/// two critical points.
pub fn default_s_max(l0: &ThimbleAtlas, l1: &ThimbleAtlas, k: u32) -> f64 {
    let min_eig = l0
        .splitting
        .eigenvalues
        .iter()
        .chain(l1.splitting.eigenvalues.iter())
        .fold(f64::INFINITY, |a, &b| a.min(b.abs()));
    let delta_est = (min_eig * k as f64).max(0.25);
    (8.0 * std::f64::consts::LN_10 / delta_est).max(4.0)
}

/// A converged strip solution with its diagnostics.
#[derive(Debug, Clone)]
pub struct WittenSolution {
    pub grid: StripGrid,
    pub residual_inf: f64,
    pub energy: f64,
    /// The `int |phi_s|^2` form of the energy (agrees on solutions).
    pub energy_dual: f64,
    pub newton_log: Vec<(f64, u32)>,
    pub converged: bool,
}

/// Exponential-decay fit of `max_t |d phi/ds|` on the outer windows.
#[derive(Debug, Clone)]
pub struct DecayFit {
    pub delta_fit: f64,
    pub c_fit: f64,
    pub r_squared: f64,
    /// Identically-zero fields carry no rate.
    pub identically_zero: bool,
}

struct BoundaryFrames {
    /// Per (boundary-relevant) node: foot, tangent frame, normal frame.
    foot: DVector<f64>,
    tangents: Vec<DVector<f64>>,
    normals: Vec<DVector<f64>>,
}

/// Solve the chord equation on the t-grid with the strip's own stencils
/// (central differences inside, one-sided second order at the thimble
/// rows, normal components pinned). The resulting profile is exactly
/// compatible with the interior scheme, so s-independent extensions of it
/// are discrete strip solutions; the end columns are clamped to these.
pub fn discrete_chord_profile(
    problem: &StripProblem,
    l0: &ThimbleAtlas,
    l1: &ThimbleAtlas,
    chord: &Chord,
    nt: usize,
    projection_radius: f64,
    tols: &Tolerances,
) -> Result<Vec<DVector<f64>>> {
    let dim = problem.model.dim();
    let ht = 1.0 / nt as f64;
    let mut nodes: Vec<DVector<f64>> = (0..=nt)
        .map(|j| chord.at(j as f64 * ht))
        .collect();
    let dt_at = |nodes: &[DVector<f64>], j: usize| -> DVector<f64> {
        if j == 0 {
            (&nodes[0] * -3.0 + &nodes[1] * 4.0 - &nodes[2]) / (2.0 * ht)
        } else if j == nt {
            (&nodes[nt] * 3.0 - &nodes[nt - 1] * 4.0 + &nodes[nt - 2]) / (2.0 * ht)
        } else {
            (&nodes[j + 1] - &nodes[j - 1]) / (2.0 * ht)
        }
    };
    let residual = |nodes: &[DVector<f64>]| -> Result<DVector<f64>> {
        let mut r = DVector::zeros((nt + 1) * dim);
        for j in 0..=nt {
            let t = j as f64 * ht;
            let pde = apply_j(&dt_at(nodes, j)) - problem.grad_h(t, &nodes[j]);
            if j == 0 || j == nt {
                let atlas = if j == 0 { l0 } else { l1 };
                let fr = boundary_frames(atlas, &nodes[j], projection_radius)?;
                let off = &nodes[j] - &fr.foot;
                let half = dim / 2;
                for (c, tan) in fr.tangents.iter().enumerate() {
                    r[j * dim + c] = tan.dot(&pde);
                }
                for (c, nor) in fr.normals.iter().enumerate() {
                    r[j * dim + half + c] = nor.dot(&off);
                }
            } else {
                for d in 0..dim {
                    r[j * dim + d] = pde[d];
                }
            }
        }
        Ok(r)
    };
    let n_all = (nt + 1) * dim;
    let mut res = residual(&nodes)?;
    for _ in 0..60 {
        if res.amax() < tols.solve_tol * 0.1 {
            return Ok(nodes);
        }
        // dense Jacobian by finite differences: the system is small
        let mut jac = DMatrix::zeros(n_all, n_all);
        let fd = 1e-7;
        for col in 0..n_all {
            let (node, comp) = (col / dim, col % dim);
            let mut plus = nodes.clone();
            plus[node][comp] += fd;
            let rp = residual(&plus)?;
            let mut minus = nodes.clone();
            minus[node][comp] -= fd;
            let rm = residual(&minus)?;
            for row in 0..n_all {
                jac[(row, col)] = (rp[row] - rm[row]) / (2.0 * fd);
            }
        }
        let step = jac
            .lu()
            .solve(&(-&res))
            .ok_or_else(|| LgError::InvalidInput("chord-profile Jacobian singular".into()))?;
        let mut alpha = 1.0;
        let merit = res.norm_squared();
        let mut accepted = false;
        for _ in 0..30 {
            let mut cand = nodes.clone();
            for col in 0..n_all {
                cand[col / dim][col % dim] += alpha * step[col];
            }
            if let Ok(cres) = residual(&cand) {
                if cres.norm_squared() < merit {
                    nodes = cand;
                    res = cres;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res.amax() < tols.solve_tol {
        Ok(nodes)
    } else {
        Err(LgError::NewtonStagnation(format!(
            "discrete chord profile stalled at {:.3e}",
            res.amax()
        )))
    }
}

fn boundary_frames(
    atlas: &ThimbleAtlas,
    u: &DVector<f64>,
    projection_radius: f64,
) -> Result<BoundaryFrames> {
    let (chart, _) = atlas.project(u, projection_radius)?;
    let foot = atlas.point_at(chart);
    let (tangents, normals) = atlas.frames_at(chart);
    Ok(BoundaryFrames {
        foot,
        tangents,
        normals,
    })
}

/// Damped Newton solve of the strip problem between `l_minus` (clamped at
/// `s = -S`) and `l_plus` (at `s = +S`), boundary rows constrained to the
/// thimbles. Non-convergence is an error carrying the Newton log.
#[allow(clippy::too_many_arguments)]
pub fn newton_solve_strip(
    problem: &StripProblem,
    l0: &ThimbleAtlas,
    l1: &ThimbleAtlas,
    l_minus: &Chord,
    l_plus: &Chord,
    opts: &StripOptions,
    tols: &Tolerances,
    init: Option<StripGrid>,
) -> Result<WittenSolution> {
    let sol = newton_iterate(problem, l0, l1, l_minus, l_plus, opts, tols, init)?;
    if !sol.converged {
        let res = sol.newton_log.last().map(|x| x.0).unwrap_or(f64::NAN);
        return Err(LgError::NewtonStagnation(format!(
            "residual {res:.3e} above solve_tol after {} iterations",
            sol.newton_log.len()
        )));
    }
    Ok(sol)
}

/// The iteration itself; returns the final iterate with the `converged`
/// flag instead of failing (multi-start sweeps and diagnostics use this).
#[allow(clippy::too_many_arguments)]
pub fn newton_iterate(
    problem: &StripProblem,
    l0: &ThimbleAtlas,
    l1: &ThimbleAtlas,
    l_minus: &Chord,
    l_plus: &Chord,
    opts: &StripOptions,
    tols: &Tolerances,
    init: Option<StripGrid>,
) -> Result<WittenSolution> {
    if l_minus.speed != problem.k || l_plus.speed != problem.k {
        return Err(LgError::InvalidInput(
            "both chords must share the problem speed".into(),
        ));
    }
    let dim = problem.model.dim();
    let (ns, nt) = (opts.ns, opts.nt);
    let mut grid = match init {
        Some(g) => {
            if g.ns != ns || g.nt != nt {
                return Err(LgError::InvalidInput("initial grid shape mismatch".into()));
            }
            g
        }
        None => {
            // ramped interpolation l^- -> l^+, boundary rows snapped onto
            // their thimbles so the constraint rows start near zero
            let mut field = Vec::with_capacity((ns + 1) * (nt + 1));
            for i in 0..=ns {
                let s = -opts.s_max + 2.0 * opts.s_max * i as f64 / ns as f64;
                let w = 0.5 * (1.0 + (1.2 * s).tanh());
                for j in 0..=nt {
                    let t = j as f64 / nt as f64;
                    let a = l_minus.at(t);
                    let b = l_plus.at(t);
                    let mut u = &a * (1.0 - w) + &b * w;
                    if j == 0 || j == nt {
                        let atlas = if j == 0 { l0 } else { l1 };
                        if let Ok((c, _)) = atlas.project(&u, opts.projection_radius) {
                            u = atlas.point_at(c);
                        }
                    }
                    field.push(u);
                }
            }
            StripGrid {
                s_max: opts.s_max,
                ns,
                nt,
                k: problem.k,
                field,
            }
        }
    };
    // clamp the end columns exactly
    for j in 0..=nt {
        let t = j as f64 / nt as f64;
        *grid.node_mut(0, j) = l_minus.at(t);
        *grid.node_mut(ns, j) = l_plus.at(t);
    }

    let nun = (ns + 1) * (nt + 1) * dim;
    let band_width = dim * (nt + 1) + 2 * dim;
    let mut log: Vec<(f64, u32)> = Vec::new();
    let mut res = assemble_residual(problem, &grid, l0, l1, opts, tols)?;
    let mut res_norm = res.amax();
    let mut merit = res.norm_squared();
    // pseudo-transient regularization: mu shrinks as the iteration makes
    // progress and vanishes in the Newton limit, guarding the folds where
    // the bare Jacobian turns singular
    let mut mu = 0.0f64;
    let mut mu_next = 1e-2f64;
    for _ in 0..opts.max_newton {
        if res_norm < tols.solve_tol {
            break;
        }
        let mut jac = assemble_jacobian(problem, &grid, l0, l1, opts, tols, nun, band_width)?;
        if mu > 0.0 {
            for r in 0..nun {
                jac.add(r, r, mu);
            }
        }
        let lu = jac.factor()?;
        let step = lu.solve(&(-&res));
        // backtracking on the 2-norm merit; convergence judged in inf-norm
        let mut accepted = false;
        let mut halvings = 0u32;
        let mut alpha = 1.0;
        while halvings <= opts.max_halvings as u32 {
            let mut cand = grid.clone();
            for i in 0..=ns {
                for j in 0..=nt {
                    let base = (i * (nt + 1) + j) * dim;
                    let node = cand.node_mut(i, j);
                    for d in 0..dim {
                        node[d] += alpha * step[base + d];
                    }
                }
            }
            // a candidate that wanders off the charts is simply rejected
            match assemble_residual(problem, &cand, l0, l1, opts, tols) {
                Ok(cres) => {
                    let cmerit = cres.norm_squared();
                    if cmerit < merit * (1.0 - 1e-4 * alpha) || cres.amax() < tols.solve_tol {
                        grid = cand;
                        res_norm = cres.amax();
                        merit = cmerit;
                        res = cres;
                        accepted = true;
                        break;
                    }
                }
                Err(LgError::OutOfChart { .. }) => {}
                Err(e) => return Err(e),
            }
            alpha *= 0.5;
            halvings += 1;
        }
        log.push((res_norm, halvings));
        if accepted {
            // relax the regularization on smooth progress
            mu = if halvings == 0 { mu * 0.25 } else { mu };
            if mu < 1e-14 {
                mu = 0.0;
            }
        } else if mu < mu_next {
            // the bare (or weakly regularized) step failed: re-arm
            mu = mu_next;
            mu_next *= 10.0;
            if mu_next > 1e6 {
                break; // stalled
            }
        } else {
            mu *= 10.0;
            if mu > 1e6 {
                break; // stalled
            }
        }
    }
    let converged = res_norm < tols.solve_tol;
    let energy = energy(problem, &grid);
    let energy_dual = energy_dual(problem, &grid);
    let sol = WittenSolution {
        residual_inf: residual_inf_norm_constrained(
            problem,
            &grid,
            l0,
            l1,
            opts.projection_radius,
        ),
        grid,
        energy,
        energy_dual,
        newton_log: log,
        converged,
    };
    Ok(sol)
}

/// Full constrained residual vector (clamp rows, boundary rows, interior
/// PDE rows), in the unknown ordering `(i, j, component)`.
fn assemble_residual(
    problem: &StripProblem,
    grid: &StripGrid,
    l0: &ThimbleAtlas,
    l1: &ThimbleAtlas,
    opts: &StripOptions,
    tols: &Tolerances,
) -> Result<DVector<f64>> {
    let _ = tols;
    let dim = problem.model.dim();
    let (ns, nt) = (grid.ns, grid.nt);
    let mut r = DVector::zeros((ns + 1) * (nt + 1) * dim);
    for i in 0..=ns {
        for j in 0..=nt {
            let base = (i * (nt + 1) + j) * dim;
            if i == 0 || i == ns {
                // clamped end columns: the identity Jacobian rows with zero
                // residual keep these nodes exactly at the chord values set
                // during startup (delta = 0 per Newton step)
                continue;
            }
            if j == 0 || j == nt {
                let atlas = if j == 0 { l0 } else { l1 };
                let u = grid.node(i, j);
                let fr = boundary_frames(atlas, u, opts.projection_radius)?;
                let pde = problem.residual_at(grid, i, j);
                let off = u - &fr.foot;
                let half = dim / 2;
                for (c, tan) in fr.tangents.iter().enumerate() {
                    r[base + c] = tan.dot(&pde);
                }
                for (c, nor) in fr.normals.iter().enumerate() {
                    r[base + half + c] = nor.dot(&off);
                }
            } else {
                let pde = problem.residual_at(grid, i, j);
                for d in 0..dim {
                    r[base + d] = pde[d];
                }
            }
        }
    }
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn assemble_jacobian(
    problem: &StripProblem,
    grid: &StripGrid,
    l0: &ThimbleAtlas,
    l1: &ThimbleAtlas,
    opts: &StripOptions,
    tols: &Tolerances,
    nun: usize,
    band_width: usize,
) -> Result<BandMatrix> {
    let _ = tols;
    let dim = problem.model.dim();
    let (ns, nt) = (grid.ns, grid.nt);
    let hs = grid.hs();
    let ht = grid.ht();
    let mut a = BandMatrix::zeros(nun, band_width, band_width);
    let id = |i: usize, j: usize| (i * (nt + 1) + j) * dim;
    for i in 0..=ns {
        for j in 0..=nt {
            let row = id(i, j);
            if i == 0 || i == ns {
                for d in 0..dim {
                    a.set(row + d, row + d, 1.0);
                }
                continue;
            }
            let t = grid.t_of(j);
            let u = grid.node(i, j);
            let hess = problem.hess_h(t, u);
            if j == 0 || j == nt {
                let atlas = if j == 0 { l0 } else { l1 };
                let fr = boundary_frames(atlas, u, opts.projection_radius)?;
                let half = dim / 2;
                // tangential PDE rows with the one-sided t-stencil
                let (w0, w1, w2, j0, j1, j2) = if j == 0 {
                    (-3.0, 4.0, -1.0, 0usize, 1usize, 2usize)
                } else {
                    (3.0, -4.0, 1.0, nt, nt - 1, nt - 2)
                };
                // neighbor couplings: frames depend only on the node's own
                // value, so these blocks are exact with the current frames
                for (c, tan) in fr.tangents.iter().enumerate() {
                    for d in 0..dim {
                        a.add(row + c, id(i + 1, j) + d, tan[d] / (2.0 * hs));
                        a.add(row + c, id(i - 1, j) + d, -tan[d] / (2.0 * hs));
                    }
                    // (tan^T J) as a row vector: J^T tan = -J tan
                    let tj = {
                        let mut v = apply_j(tan);
                        v.neg_mut();
                        v
                    };
                    for (jj, w) in [(j0, w0), (j1, w1), (j2, w2)] {
                        if jj != j {
                            for d in 0..dim {
                                a.add(row + c, id(i, jj) + d, tj[d] * w / (2.0 * ht));
                            }
                        }
                    }
                }
                // the node's own block carries the frame and foot
                // derivatives too: difference the constrained residual in
                // the node value with neighbors held fixed
                let local = |un: &DVector<f64>| -> Result<DVector<f64>> {
                    let frl = boundary_frames(atlas, un, opts.projection_radius)?;
                    // PDE at the node with un substituted
                    let ds = (grid.node(i + 1, j) - grid.node(i - 1, j)) / (2.0 * hs);
                    let mut dt = DVector::zeros(dim);
                    for (jj, w) in [(j0, w0), (j1, w1), (j2, w2)] {
                        let v = if jj == j { un } else { grid.node(i, jj) };
                        dt += v * (w / (2.0 * ht));
                    }
                    let pde = ds + apply_j(&dt) - problem.grad_h(t, un);
                    let off = un - &frl.foot;
                    let mut out = DVector::zeros(dim);
                    for (c, tan) in frl.tangents.iter().enumerate() {
                        out[c] = tan.dot(&pde);
                    }
                    for (c, nor) in frl.normals.iter().enumerate() {
                        out[half + c] = nor.dot(&off);
                    }
                    Ok(out)
                };
                let fd = 1e-7;
                for d in 0..dim {
                    let mut up = u.clone();
                    let mut um = u.clone();
                    up[d] += fd;
                    um[d] -= fd;
                    let col = (local(&up)? - local(&um)?) / (2.0 * fd);
                    for r in 0..dim {
                        a.add(row + r, row + d, col[r]);
                    }
                }
            } else {
                for d in 0..dim {
                    a.add(row + d, id(i + 1, j) + d, 1.0 / (2.0 * hs));
                    a.add(row + d, id(i - 1, j) + d, -1.0 / (2.0 * hs));
                }
                // J times central t-difference: block J/(2 ht)
                for d in 0..dim / 2 {
                    let (x, y) = (2 * d, 2 * d + 1);
                    // J e_x = e_y, J e_y = -e_x
                    a.add(row + x, id(i, j + 1) + y, -1.0 / (2.0 * ht));
                    a.add(row + y, id(i, j + 1) + x, 1.0 / (2.0 * ht));
                    a.add(row + x, id(i, j - 1) + y, 1.0 / (2.0 * ht));
                    a.add(row + y, id(i, j - 1) + x, -1.0 / (2.0 * ht));
                }
                for rr in 0..dim {
                    for cc in 0..dim {
                        let v = -hess[(rr, cc)];
                        if v != 0.0 {
                            a.add(row + rr, row + cc, v);
                        }
                    }
                }
            }
        }
    }
    Ok(a)
}

/// Like `newton_solve_strip` but returning the final iterate even when the
/// iteration stalls (diagnostics; `converged` is false then).


/// Linear prolongation of a strip grid to a finer resolution.
pub fn prolong(grid: &StripGrid, ns: usize, nt: usize) -> StripGrid {
    let mut field = Vec::with_capacity((ns + 1) * (nt + 1));
    for i in 0..=ns {
        let s = -grid.s_max + 2.0 * grid.s_max * i as f64 / ns as f64;
        let fi = (s + grid.s_max) / grid.hs();
        let i0 = (fi.floor() as usize).min(grid.ns - 1);
        let wi = (fi - i0 as f64).clamp(0.0, 1.0);
        for j in 0..=nt {
            let t = j as f64 / nt as f64;
            let fj = t / grid.ht();
            let j0 = (fj.floor() as usize).min(grid.nt - 1);
            let wj = (fj - j0 as f64).clamp(0.0, 1.0);
            let v = grid.node(i0, j0) * (1.0 - wi) * (1.0 - wj)
                + grid.node(i0 + 1, j0) * wi * (1.0 - wj)
                + grid.node(i0, j0 + 1) * (1.0 - wi) * wj
                + grid.node(i0 + 1, j0 + 1) * wi * wj;
            field.push(v);
        }
    }
    StripGrid {
        s_max: grid.s_max,
        ns,
        nt,
        k: grid.k,
        field,
    }
}

/// Newton solve with coarse-to-fine grid continuation: the target grid is
/// reached through two coarser levels, each solved and prolonged.
#[allow(clippy::too_many_arguments)]
pub fn solve_with_continuation(
    problem: &StripProblem,
    l0: &ThimbleAtlas,
    l1: &ThimbleAtlas,
    l_minus: &Chord,
    l_plus: &Chord,
    opts: &StripOptions,
    tols: &Tolerances,
    init: Option<StripGrid>,
) -> Result<WittenSolution> {
    if init.is_some() {
        return newton_solve_strip(problem, l0, l1, l_minus, l_plus, opts, tols, init);
    }
    let mut state: Option<StripGrid> = None;
    for level in (0..3).rev() {
        let f = 1usize << level;
        let lopts = StripOptions {
            ns: (opts.ns / f).max(16),
            nt: (opts.nt / f).max(4),
            ..opts.clone()
        };
        let coarse_tols = if level > 0 {
            // intermediate levels only need a rough landing
            Tolerances {
                solve_tol: (tols.solve_tol * 1e3).min(1e-6),
                ..tols.clone()
            }
        } else {
            tols.clone()
        };
        let init_grid = state.map(|g| prolong(&g, lopts.ns, lopts.nt));
        let sol = newton_solve_strip(
            problem, l0, l1, l_minus, l_plus, &lopts, &coarse_tols, init_grid,
        )?;
        if level == 0 {
            return Ok(sol);
        }
        state = Some(sol.grid);
    }
    unreachable!("level 0 returns")
}

/// Finite-difference validation of the assembled Jacobian on a perturbed
/// ramp grid (test support).
#[doc(hidden)]
pub fn debug_jacobian_fd(
    problem: &StripProblem,
    l0: &ThimbleAtlas,
    l1: &ThimbleAtlas,
    l_minus: &Chord,
    l_plus: &Chord,
    opts: &StripOptions,
    tols: &Tolerances,
) -> Result<(f64, (usize, usize))> {
    let dim = problem.model.dim();
    let (ns, nt) = (opts.ns, opts.nt);
    let mut field = Vec::with_capacity((ns + 1) * (nt + 1));
    for i in 0..=ns {
        let s = -opts.s_max + 2.0 * opts.s_max * i as f64 / ns as f64;
        let w = 0.5 * (1.0 + (1.2 * s).tanh());
        for j in 0..=nt {
            let t = j as f64 / nt as f64;
            let mut u = l_minus.at(t) * (1.0 - w) + l_plus.at(t) * w;
            u[0] += 1e-3 * ((i * 3 + j * 7) as f64).sin();
            u[1] += 1e-3 * ((i * 5 + j * 2) as f64).cos();
            field.push(u);
        }
    }
    let grid = StripGrid {
        s_max: opts.s_max,
        ns,
        nt,
        k: problem.k,
        field,
    };
    let nun = (ns + 1) * (nt + 1) * dim;
    let bw = dim * (nt + 1) + 2 * dim;
    let r0 = assemble_residual(problem, &grid, l0, l1, opts, tols)?;
    let jac = assemble_jacobian(problem, &grid, l0, l1, opts, tols, nun, bw)?;
    let eps = 1e-7;
    let mut worst = 0.0f64;
    let mut at = (0usize, 0usize);
    for col in 0..nun {
        let mut g2 = grid.clone();
        let (node, comp) = (col / dim, col % dim);
        g2.field[node][comp] += eps;
        let r1 = assemble_residual(problem, &g2, l0, l1, opts, tols)?;
        for row in 0..nun {
            // clamp rows are structurally fixed variables; skip them
            let node = row / dim;
            let i = node / (nt + 1);
            if i == 0 || i == ns {
                continue;
            }
            let fd = (r1[row] - r0[row]) / eps;
            let an = jac.get(row, col);
            let d = (fd - an).abs();
            if d > worst {
                worst = d;
                at = (row, col);
            }
        }
    }
    Ok((worst, at))
}

/// Energy `1/2 int (|phi_s|^2 + |phi_t - X_H|^2)` by trapezoid quadrature.
pub fn energy(problem: &StripProblem, grid: &StripGrid) -> f64 {
    let mut acc = 0.0;
    for i in 0..=grid.ns {
        for j in 0..=grid.nt {
            let ds = grid.ds_at(i, j);
            let dt = grid.dt_at(i, j);
            let xh = -apply_j(&problem.grad_h(grid.t_of(j), grid.node(i, j)));
            let integrand = 0.5 * (ds.norm_squared() + (dt - xh).norm_squared());
            let ws = if i == 0 || i == grid.ns { 0.5 } else { 1.0 };
            let wt = if j == 0 || j == grid.nt { 0.5 } else { 1.0 };
            acc += ws * wt * integrand;
        }
    }
    acc * grid.hs() * grid.ht()
}

/// The `int |phi_s|^2` form (equal to `energy` on solutions).
pub fn energy_dual(problem: &StripProblem, grid: &StripGrid) -> f64 {
    let _ = problem;
    let mut acc = 0.0;
    for i in 0..=grid.ns {
        for j in 0..=grid.nt {
            let ds = grid.ds_at(i, j);
            let ws = if i == 0 || i == grid.ns { 0.5 } else { 1.0 };
            let wt = if j == 0 || j == grid.nt { 0.5 } else { 1.0 };
            acc += ws * wt * ds.norm_squared();
        }
    }
    acc * grid.hs() * grid.ht()
}

/// Energy-identity slack `|E - (A(l^-) - A(l^+))|` and the tolerance
/// `c_ei (h^2 + exp(-delta_fit S))` it is measured against.
pub fn energy_identity_check(
    sol: &WittenSolution,
    action_minus: f64,
    action_plus: f64,
    delta_fit: f64,
    tols: &Tolerances,
) -> (f64, f64) {
    let slack = (sol.energy - (action_minus - action_plus)).abs();
    let h = sol.grid.hs().max(sol.grid.ht());
    let tol = tols.c_ei * (h * h + (-delta_fit * sol.grid.s_max).exp());
    (slack, tol)
}

/// Least-squares fit of `log max_t |phi_s|` against `|s|` on the outer
/// windows (25% of columns per side, clamped ends excluded).
pub fn decay_fit(sol: &WittenSolution) -> DecayFit {
    let grid = &sol.grid;
    let ns = grid.ns;
    let mut profile = Vec::with_capacity(ns + 1);
    for i in 0..=ns {
        let mut m: f64 = 0.0;
        for j in 0..=grid.nt {
            m = m.max(grid.ds_at(i, j).norm());
        }
        profile.push(m);
    }
    let peak = profile.iter().cloned().fold(0.0f64, f64::max);
    if peak < 1e-12 {
        return DecayFit {
            delta_fit: 0.0,
            c_fit: 0.0,
            r_squared: 1.0,
            identically_zero: true,
        };
    }
    // collect (|s|, log max) on both outer windows, skipping the clamped
    // columns and anything at the numerical floor
    let floor = (peak * 1e-12).max(1e-14);
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let win = (ns / 4).max(4);
    for i in 2..win {
        if profile[i] > floor {
            pts.push((grid.s_of(i).abs(), profile[i].ln()));
        }
        let ir = ns - i;
        if profile[ir] > floor {
            pts.push((grid.s_of(ir).abs(), profile[ir].ln()));
        }
    }
    if pts.len() < 6 {
        return DecayFit {
            delta_fit: 0.0,
            c_fit: 0.0,
            r_squared: 0.0,
            identically_zero: false,
        };
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let ybar = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - ybar) * (p.1 - ybar)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| {
            let f = intercept + slope * p.0;
            (p.1 - f) * (p.1 - f)
        })
        .sum();
    DecayFit {
        delta_fit: -slope,
        c_fit: intercept.exp(),
        r_squared: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 },
        identically_zero: false,
    }
}

/// Compactness monitor: `sup d(phi, q0)`, `sup |d phi|`, `sup |d_M W(phi)|`.
#[derive(Debug, Clone, Copy)]
pub struct C0C1Report {
    pub sup_dist: f64,
    pub sup_dphi: f64,
    pub sup_grad_w: f64,
}

pub fn c0_c1_monitor(problem: &StripProblem, grid: &StripGrid) -> C0C1Report {
    let model = &problem.model;
    let mut sup_dist: f64 = 0.0;
    let mut sup_dphi: f64 = 0.0;
    let mut sup_grad: f64 = 0.0;
    for i in 0..=grid.ns {
        for j in 0..=grid.nt {
            let u = grid.node(i, j);
            sup_dist = sup_dist.max(model.dist_q0(u));
            let d =
                (grid.ds_at(i, j).norm_squared() + grid.dt_at(i, j).norm_squared()).sqrt();
            sup_dphi = sup_dphi.max(d);
            sup_grad = sup_grad.max(model.grad_norm(u));
        }
    }
    C0C1Report {
        sup_dist,
        sup_dphi,
        sup_grad_w: sup_grad,
    }
}

/// Smallest two singular values of the Jacobian at a converged solution
/// (the discrete shadow of the 1-dim translation kernel).
pub fn translation_mode_sigmas(
    problem: &StripProblem,
    sol: &WittenSolution,
    l0: &ThimbleAtlas,
    l1: &ThimbleAtlas,
    opts: &StripOptions,
    tols: &Tolerances,
) -> Result<(f64, f64)> {
    let dim = problem.model.dim();
    let nun = (sol.grid.ns + 1) * (sol.grid.nt + 1) * dim;
    let band_width = dim * (sol.grid.nt + 1) + 2 * dim;
    let jac = assemble_jacobian(problem, &sol.grid, l0, l1, opts, tols, nun, band_width)?;
    let lu = jac.clone().factor()?;
    Ok(two_smallest_singular_values(&jac, &lu, 200, 17))
}

/// CSV dump `(s, t, coords...)` plus a summary block, and the `|phi_s|`
/// heatmap as SVG.
pub fn dump_solution_csv<W: std::io::Write>(sol: &WittenSolution, mut w: W) -> Result<()> {
    let dim = sol.grid.field[0].len();
    write!(w, "s,t")?;
    for d in 0..dim {
        write!(w, ",c{d}")?;
    }
    writeln!(w)?;
    for i in 0..=sol.grid.ns {
        for j in 0..=sol.grid.nt {
            write!(w, "{},{}", sol.grid.s_of(i), sol.grid.t_of(j))?;
            for d in 0..dim {
                write!(w, ",{}", sol.grid.node(i, j)[d])?;
            }
            writeln!(w)?;
        }
    }
    writeln!(w, "# residual_inf = {}", sol.residual_inf)?;
    writeln!(w, "# energy = {}", sol.energy)?;
    writeln!(w, "# energy_dual = {}", sol.energy_dual)?;
    Ok(())
}

pub fn heatmap_ds(sol: &WittenSolution) -> String {
    let mut rows = Vec::with_capacity(sol.grid.nt + 1);
    for j in 0..=sol.grid.nt {
        let mut row = Vec::with_capacity(sol.grid.ns + 1);
        for i in 0..=sol.grid.ns {
            row.push(sol.grid.ds_at(i, j).norm());
        }
        rows.push(row);
    }
    crate::svg::heatmap_svg(&rows, 640, 160)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chords::{find_chords, rotated_cubic_model, ChordOptions};
    use crate::critical::find_critical_points;
    use crate::thimble::{build_thimble, ThimbleOptions, ThimbleSign};

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn cubic_setup() -> (StripProblem, ThimbleAtlas, ThimbleAtlas, Vec<Chord>) {
        let m = rotated_cubic_model(std::f64::consts::PI / 6.0);
        let crits = find_critical_points(&m, 2.0, 128, &tols());
        let to = ThimbleOptions {
            re_span: 4.0,
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
        let problem = StripProblem {
            model: m,
            k: 1,
            varpi: PerturbationField::default(),
        };
        (problem, l0, l1, chords)
    }

    #[test]
    fn s_independent_fields_reduce_to_the_chord_equation() {
        // residual equivalence: for an s-independent field the strip
        // residual equals J applied to the discrete chord residual, so the
        // field solves the strip equation iff its profile solves the chord
        // equation (same stencil, identical up to rounding)
        let (problem, _l0, _l1, chords) = cubic_setup();
        assert!(!chords.is_empty());
        let c = &chords[0];
        let (ns, nt) = (24usize, 16usize);
        let mut field = Vec::new();
        for _i in 0..=ns {
            for j in 0..=nt {
                field.push(c.at(j as f64 / nt as f64));
            }
        }
        let grid = StripGrid {
            s_max: 3.0,
            ns,
            nt,
            k: 1,
            field,
        };
        let mut equivalence: f64 = 0.0;
        let mut res: f64 = 0.0;
        for i in 1..ns {
            for j in 1..nt {
                let strip_r = problem.residual_at(&grid, i, j);
                // discrete chord residual: d_t phi - X_H with the same stencil
                let dt = grid.dt_at(i, j);
                let xh = -apply_j(&problem.grad_h(grid.t_of(j), grid.node(i, j)));
                let chord_r = dt - xh;
                equivalence = equivalence.max((strip_r.clone() - apply_j(&chord_r)).amax());
                res = res.max(strip_r.amax());
            }
        }
        assert!(equivalence < 1e-12, "equivalence defect {equivalence:.3e}");
        // the remaining residual is pure O(ht^2) discretization of d_t
        let nt2 = 2 * nt;
        let mut field2 = Vec::new();
        for _i in 0..=ns {
            for j in 0..=nt2 {
                field2.push(c.at(j as f64 / nt2 as f64));
            }
        }
        let grid2 = StripGrid {
            s_max: 3.0,
            ns,
            nt: nt2,
            k: 1,
            field: field2,
        };
        let res2 = residual_inf_norm(&problem, &grid2);
        assert!(res2 < 0.35 * res, "second order in ht: {res:.2e} -> {res2:.2e}");
    }

    #[test]
    fn truly_constant_solution_has_exactly_zero_energy() {
        // all three data constant at a critical point: the field phi = p
        // solves the equation exactly with E = 0 and no decay rate
        let (problem, l0, l1, _) = cubic_setup();
        let p = l0.critical_point.clone();
        let samples: Vec<(f64, DVector<f64>)> =
            (0..=8).map(|i| (i as f64 / 8.0, p.clone())).collect();
        let (ns, nt) = (32usize, 8usize);
        let field = vec![p.clone(); (ns + 1) * (nt + 1)];
        let grid = StripGrid {
            s_max: 4.0,
            ns,
            nt,
            k: 1,
            field,
        };
        assert!(residual_inf_norm(&problem, &grid) < 1e-9); // p verified to crit_tol
        let sol = WittenSolution {
            residual_inf: residual_inf_norm(&problem, &grid),
            energy: energy(&problem, &grid),
            energy_dual: energy_dual(&problem, &grid),
            grid,
            newton_log: Vec::new(),
            converged: true,
        };
        assert!(sol.energy < 1e-18, "constant energy {}", sol.energy);
        let fit = decay_fit(&sol);
        assert!(fit.identically_zero);
        let _ = (l1, samples);
    }

    #[test]
    fn chord_to_itself_converges_fast_with_tiny_energy() {
        // l^- = l^+ = l with the ramp initial guess collapses to the
        // s-independent discrete solution in a few damped-Newton steps
        let (problem, l0, l1, chords) = cubic_setup();
        let c = &chords[0];
        let opts = StripOptions {
            s_max: 4.0,
            ns: 64,
            nt: 16,
            ..Default::default()
        };
        let sol = newton_solve_strip(&problem, &l0, &l1, c, c, &opts, &tols(), None).unwrap();
        assert!(sol.converged);
        assert!(
            sol.newton_log.len() <= 8,
            "took {} iterations",
            sol.newton_log.len()
        );
        assert!(sol.residual_inf < tols().solve_tol * 10.0);
        // the solution is s-independent up to discretization error
        assert!(
            sol.energy_dual < 1e-4,
            "int |phi_s|^2 = {} for an s-independent target",
            sol.energy_dual
        );
        // c0/c1 monitor tracks the chord values
        let rep = c0_c1_monitor(&problem, &sol.grid);
        let chord_sup: f64 = (0..=16)
            .map(|j| problem.model.dist_q0(&c.at(j as f64 / 16.0)))
            .fold(0.0, f64::max);
        assert!((rep.sup_dist - chord_sup).abs() < 1e-2);
    }

    #[test]
    fn manufactured_solution_second_order_convergence() {
        // phi*(s, t) with hand-coded derivatives; the defect is added as a
        // source and phi* recovered at O(h^2)
        let (problem, _l0, _l1, _) = cubic_setup();
        let star = |s: f64, t: f64| -> (DVector<f64>, DVector<f64>, DVector<f64>) {
            let x = 0.3 * s.tanh() + 0.1 * (std::f64::consts::PI * t).sin();
            let y = 0.2 / (1.0 + s * s) + 0.05 * (std::f64::consts::PI * t).cos();
            let dx_ds = 0.3 * (1.0 - s.tanh() * s.tanh());
            let dy_ds = -0.4 * s / ((1.0 + s * s) * (1.0 + s * s));
            let dx_dt = 0.1 * std::f64::consts::PI * (std::f64::consts::PI * t).cos();
            let dy_dt = -0.05 * std::f64::consts::PI * (std::f64::consts::PI * t).sin();
            (
                DVector::from_vec(vec![x, y]),
                DVector::from_vec(vec![dx_ds, dy_ds]),
                DVector::from_vec(vec![dx_dt, dy_dt]),
            )
        };
        let source = |s: f64, t: f64| -> DVector<f64> {
            let (u, us, ut) = star(s, t);
            us + apply_j(&ut) - problem.grad_h(t, &u)
        };
        let s_max = 2.0;
        let mut errs = Vec::new();
        for lvl in 0..3 {
            let nt = 8 << lvl;
            let ns = 4 * nt;
            let dim = 2;
            // Dirichlet MMS solve: unknowns interior, boundary = phi*
            let mut field = Vec::new();
            for i in 0..=ns {
                let s = -s_max + 2.0 * s_max * i as f64 / ns as f64;
                for j in 0..=nt {
                    let t = j as f64 / nt as f64;
                    let (u, _, _) = star(s, t);
                    field.push(u);
                }
            }
            let mut grid = StripGrid {
                s_max,
                ns,
                nt,
                k: 1,
                field,
            };
            // perturb the interior so Newton has work to do
            for i in 1..ns {
                for j in 1..nt {
                    let node = grid.node_mut(i, j);
                    node[0] += 0.01 * ((i * 7 + j * 3) as f64).sin();
                    node[1] += 0.01 * ((i * 5 + j * 11) as f64).cos();
                }
            }
            // Newton on R(phi) - F = 0 with Dirichlet boundaries
            let nun = (ns + 1) * (nt + 1) * dim;
            let bw = dim * (nt + 1) + 2 * dim;
            for _ in 0..30 {
                let mut r = DVector::zeros(nun);
                let mut a = BandMatrix::zeros(nun, bw, bw);
                let id = |i: usize, j: usize| (i * (nt + 1) + j) * dim;
                let hs = grid.hs();
                let ht = grid.ht();
                for i in 0..=ns {
                    let s = grid.s_of(i);
                    for j in 0..=nt {
                        let t = grid.t_of(j);
                        let row = id(i, j);
                        if i == 0 || i == ns || j == 0 || j == nt {
                            for d in 0..dim {
                                a.set(row + d, row + d, 1.0);
                            }
                            continue;
                        }
                        let pde = problem.residual_at(&grid, i, j) - source(s, t);
                        for d in 0..dim {
                            r[row + d] = pde[d];
                        }
                        for d in 0..dim {
                            a.add(row + d, id(i + 1, j) + d, 1.0 / (2.0 * hs));
                            a.add(row + d, id(i - 1, j) + d, -1.0 / (2.0 * hs));
                        }
                        a.add(row, id(i, j + 1) + 1, -1.0 / (2.0 * ht));
                        a.add(row + 1, id(i, j + 1), 1.0 / (2.0 * ht));
                        a.add(row, id(i, j - 1) + 1, 1.0 / (2.0 * ht));
                        a.add(row + 1, id(i, j - 1), -1.0 / (2.0 * ht));
                        let hess = problem.hess_h(t, grid.node(i, j));
                        for rr in 0..dim {
                            for cc in 0..dim {
                                a.add(row + rr, row + cc, -hess[(rr, cc)]);
                            }
                        }
                    }
                }
                let norm = r.amax();
                if norm < 1e-12 {
                    break;
                }
                let step = a.factor().unwrap().solve(&(-&r));
                for i in 0..=ns {
                    for j in 0..=nt {
                        let base = id(i, j);
                        let node = grid.node_mut(i, j);
                        for d in 0..dim {
                            node[d] += step[base + d];
                        }
                    }
                }
            }
            // error against phi*
            let mut err: f64 = 0.0;
            for i in 0..=ns {
                for j in 0..=nt {
                    let (u, _, _) = star(grid.s_of(i), grid.t_of(j));
                    err = err.max((grid.node(i, j) - u).amax());
                }
            }
            errs.push(err);
        }
        let slope1 = (errs[0] / errs[1]).log2();
        let slope2 = (errs[1] / errs[2]).log2();
        assert!(
            (slope1 - 2.0).abs() < 0.4 && (slope2 - 2.0).abs() < 0.4,
            "MMS slopes {slope1:.2}, {slope2:.2} (errors {errs:?})"
        );
    }
}
