//! Critical-point search: Newton on `dW = 0` from low-discrepancy seeds,
//! deduplication, Morse classification and the regular-Morse ordering.

use crate::error::{LgError, Result};
use crate::geometry::{complex_to_real, ComplexPoint, C64};
use crate::model::LgModel;
use crate::rng::halton_box;
use crate::Tolerances;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// A verified critical point of the potential, in work coordinates.
#[derive(Debug, Clone)]
pub struct CriticalPoint {
    /// Location in work coordinates (interleaved real).
    pub location: DVector<f64>,
    /// `W` at the point.
    pub value: C64,
    /// Holomorphic Hessian at the point.
    pub hessian: Vec<Vec<C64>>,
    /// Nondegenerate Hessian?
    pub morse: bool,
    /// Milnor number; 1 for Morse points (the only supported kind).
    pub milnor: usize,
}

impl CriticalPoint {
    pub fn ambient(&self, model: &LgModel) -> ComplexPoint {
        model.to_ambient(&self.location)
    }
}

/// Outcome of the regular-Morse test; `order` lists critical-point indices
/// sorted by increasing `Im W` when the test passes.
#[derive(Debug, Clone)]
pub struct MorseReport {
    pub regular_morse: bool,
    pub all_morse: bool,
    pub min_im_separation: f64,
    /// Indices into the input list, ordered by increasing `Im W`.
    pub order: Vec<usize>,
}

/// Newton iteration on the holomorphic system `dW(u) = 0` in work
/// coordinates. Returns the limit point when converged.
fn newton_polish(model: &LgModel, start: &DVector<f64>, tol: f64, max_iter: usize) -> Option<DVector<f64>> {
    let n = model.n();
    let mut u = start.clone();
    for _ in 0..max_iter {
        let g = model.holo_grad(&u);
        let gnorm = g.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if gnorm < tol {
            return Some(u);
        }
        let h = model.holo_hess(&u);
        // complex n x n solve H du = -g
        let hm = DMatrix::from_fn(n, n, |i, j| h[i][j]);
        let gv = nalgebra::DVector::from_vec(g.clone());
        let du = hm.lu().solve(&(-gv))?;
        let du_real = complex_to_real(du.as_slice());
        if !du_real.iter().all(|x| x.is_finite()) {
            return None;
        }
        let step = du_real.norm();
        u += &du_real;
        if step > 1e6 {
            return None; // diverging seed, drop it
        }
        if step < 1e-16 {
            break;
        }
    }
    let g = model.holo_grad(&u);
    let gnorm = g.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    (gnorm < tol).then_some(u)
}

fn classify(model: &LgModel, u: &DVector<f64>, tol: &Tolerances) -> CriticalPoint {
    let n = model.n();
    let hessian = model.holo_hess(u);
    let hm = DMatrix::from_fn(n, n, |i, j| hessian[i][j]);
    // singular values of the complex Hessian decide nondegeneracy
    let svd = hm.svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let morse = smin > tol.eig_tol * smax.max(1.0);
    CriticalPoint {
        location: u.clone(),
        value: model.value(u),
        hessian,
        morse,
        milnor: 1,
    }
}

/// Estimate a search-box radius by radial probing: grow the radius until the
/// minimal `|dW|` over sampled directions has increased for three
/// consecutive shells (the critical set is compact under the tame condition).
pub fn probe_box_radius(model: &LgModel) -> f64 {
    let dim = model.dim();
    let dirs: Vec<DVector<f64>> = (0..64)
        .map(|i| {
            let v = DVector::from_vec(halton_box(i, dim, 1.0));
            let n = v.norm();
            if n > 0.0 {
                v / n
            } else {
                DVector::from_element(dim, 1.0 / (dim as f64).sqrt())
            }
        })
        .collect();
    let min_grad = |r: f64| -> f64 {
        dirs.iter()
            .map(|d| model.grad_norm(&(d * r)))
            .fold(f64::INFINITY, f64::min)
    };
    let mut r = 0.5;
    let mut prev = min_grad(r);
    let mut rising = 0;
    while r < 64.0 {
        r *= 1.5;
        let cur = min_grad(r);
        if cur > prev * 1.2 && cur > 1e-3 {
            rising += 1;
            if rising >= 3 {
                return r;
            }
        } else {
            rising = 0;
        }
        prev = cur;
    }
    r
}

/// Find the critical points of the model inside `[-box_radius, box_radius]^{2n}`
/// (work coordinates) from `seed_count` Halton seeds.
pub fn find_critical_points(
    model: &LgModel,
    box_radius: f64,
    seed_count: usize,
    tol: &Tolerances,
) -> Vec<CriticalPoint> {
    let dim = model.dim();
    let mut found: Vec<DVector<f64>> = Vec::new();
    let limits: Vec<DVector<f64>> = (0..seed_count)
        .into_par_iter()
        .filter_map(|i| {
            let seed = DVector::from_vec(halton_box(i, dim, box_radius));
            newton_polish(model, &seed, tol.crit_tol, 60)
        })
        .collect();
    let mut limits = limits;
    // deterministic merge order regardless of thread scheduling
    limits.sort_by(|a, b| lex_cmp(a, b));
    for u in limits {
        if u.amax() > 4.0 * box_radius.max(1.0) {
            continue; // escaped the trust region
        }
        if model.is_log() {
            // keep a canonical representative: wrap Im t into (-pi, pi]
            let mut w = u.clone();
            for j in 0..dim / 2 {
                w[2 * j + 1] = crate::model::wrap_pi(w[2 * j + 1]);
            }
            if !found.iter().any(|v| model.dist(v, &w) < tol.cluster_tol) {
                found.push(w);
            }
        } else if !found.iter().any(|v| (v - &u).norm() < tol.cluster_tol) {
            found.push(u);
        }
    }
    found.sort_by(|a, b| lex_cmp(a, b));
    found
        .into_iter()
        .map(|u| classify(model, &u, tol))
        .collect()
}

fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Regular-Morse test: every Hessian nondegenerate and the `Im W` values
/// pairwise separated. The returned order lists points by increasing `Im W`
/// (the brane order: smaller `Im W` comes first).
pub fn is_regular_morse(crits: &[CriticalPoint], tol: &Tolerances) -> MorseReport {
    let all_morse = crits.iter().all(|c| c.morse);
    let mut order: Vec<usize> = (0..crits.len()).collect();
    order.sort_by(|&i, &j| {
        crits[i]
            .value
            .im
            .partial_cmp(&crits[j].value.im)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut min_sep = f64::INFINITY;
    for w in order.windows(2) {
        let sep = (crits[w[1]].value.im - crits[w[0]].value.im).abs();
        min_sep = min_sep.min(sep);
    }
    let separated = crits.len() < 2 || min_sep > tol.im_sep_tol;
    MorseReport {
        regular_morse: all_morse && separated,
        all_morse,
        min_im_separation: if crits.len() < 2 { f64::INFINITY } else { min_sep },
        order,
    }
}

/// Multiplicity of the model: the number of critical points when all are
/// Morse. Non-Morse inputs are unsupported (Milnor numbers of degenerate
/// singularities are a non-goal).
pub fn multiplicity(crits: &[CriticalPoint]) -> Result<usize> {
    if let Some(bad) = crits.iter().position(|c| !c.morse) {
        return Err(LgError::Unsupported(format!(
            "critical point #{bad} is non-Morse; general Milnor numbers are not computed"
        )));
    }
    Ok(crits.iter().map(|c| c.milnor).sum())
}

/// Rerun the search seeded at previously found points (idempotence check).
pub fn repolish(model: &LgModel, crits: &[CriticalPoint], tol: &Tolerances) -> Vec<CriticalPoint> {
    let mut found: Vec<DVector<f64>> = Vec::new();
    for c in crits {
        if let Some(u) = newton_polish(model, &c.location, tol.crit_tol, 60) {
            if !found.iter().any(|v| model.dist(v, &u) < tol.cluster_tol) {
                found.push(u);
            }
        }
    }
    found.sort_by(|a, b| lex_cmp(a, b));
    found.into_iter().map(|u| classify(model, &u, tol)).collect()
}
