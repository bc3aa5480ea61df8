//! Exact integer Newton polyhedra: convex hulls of support exponents,
//! facet inequalities, the convenience test and the Laurent growth exponent.

use crate::error::{LgError, Result};
use crate::potential::Potential;
use num_rational::Ratio;

type Q = Ratio<i128>;

/// Convex hull of the support of a Laurent polynomial. Facets use the outer
/// representation `<normal, x> <= offset` with gcd-normalized integer data.
#[derive(Debug, Clone)]
pub struct NewtonPolyhedron {
    pub n: usize,
    pub support: Vec<Vec<i64>>,
    /// True when the hull has full dimension `n`.
    pub full_dim: bool,
    /// Hull vertices (subset of the support points).
    pub vertices: Vec<Vec<i64>>,
    /// Facet inequalities `(normal, offset)`; empty for degenerate hulls.
    pub facets: Vec<(Vec<i64>, i64)>,
}

/// A face of the polyhedron: the support points lying on it and its
/// affine dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub points: Vec<Vec<i64>>,
    pub dim: usize,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn normalize_facet(normal: &mut [i64], offset: &mut i64) {
    let mut g = 0;
    for &x in normal.iter() {
        g = gcd(g, x);
    }
    g = gcd(g, *offset);
    if g > 1 {
        for x in normal.iter_mut() {
            *x /= g;
        }
        *offset /= g;
    }
}

/// Affine dimension of a point set, by exact rank of the difference vectors.
fn affine_dim(points: &[Vec<i64>]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let n = points[0].len();
    let base = &points[0];
    let mut rows: Vec<Vec<Q>> = points[1..]
        .iter()
        .map(|p| {
            (0..n)
                .map(|j| Q::from_integer((p[j] - base[j]) as i128))
                .collect()
        })
        .collect();
    let mut rank = 0usize;
    for col in 0..n {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != Q::from_integer(0)) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = rows[rank][col];
        for x in rows[rank].iter_mut() {
            *x /= inv;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != Q::from_integer(0) {
                let f = rows[r][col];
                for c in 0..n {
                    let sub = f * rows[rank][c];
                    rows[r][c] -= sub;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn cross2(o: &[i64], a: &[i64], b: &[i64]) -> i128 {
    (a[0] - o[0]) as i128 * (b[1] - o[1]) as i128 - (a[1] - o[1]) as i128 * (b[0] - o[0]) as i128
}

/// Andrew monotone chain, exact. Returns CCW hull vertices.
fn hull_2d(points: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Vec<i64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2
            && cross2(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<i64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && cross2(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Generalized cross product: the integer normal of the hyperplane spanned
/// by `d - 1` difference vectors in `Z^d` (cofactor expansion).
fn generalized_cross(diffs: &[Vec<i128>]) -> Vec<i128> {
    let d = diffs[0].len();
    assert_eq!(diffs.len(), d - 1);
    let mut normal = vec![0i128; d];
    for j in 0..d {
        // minor: drop column j
        let mut m: Vec<Vec<i128>> = diffs
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, &v)| v)
                    .collect()
            })
            .collect();
        let det = det_small(&mut m);
        normal[j] = if j % 2 == 0 { det } else { -det };
    }
    normal
}

fn det_small(m: &mut [Vec<i128>]) -> i128 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => unreachable!("determinants needed up to 3x3 only"),
    }
}

/// Exact supporting-hyperplane enumeration for full-dimensional hulls in
/// dimension 3 or 4 (support sets are small at desk scale).
fn facets_by_enumeration(points: &[Vec<i64>], n: usize) -> Vec<(Vec<i64>, i64)> {
    let k = points.len();
    let mut facets: Vec<(Vec<i64>, i64)> = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        // candidate hyperplane through points[idx]
        let base: Vec<i128> = points[idx[0]].iter().map(|&x| x as i128).collect();
        let diffs: Vec<Vec<i128>> = idx[1..]
            .iter()
            .map(|&i| {
                points[i]
                    .iter()
                    .zip(&base)
                    .map(|(&x, &b)| x as i128 - b)
                    .collect()
            })
            .collect();
        let normal = generalized_cross(&diffs);
        if normal.iter().any(|&x| x != 0) {
            let offset: i128 = normal.iter().zip(&base).map(|(&a, &b)| a * b).sum();
            let mut lo = false;
            let mut hi = false;
            for p in points {
                let v: i128 = normal.iter().zip(p).map(|(&a, &x)| a * x as i128).sum();
                if v > offset {
                    hi = true;
                } else if v < offset {
                    lo = true;
                }
                if lo && hi {
                    break;
                }
            }
            if !(lo && hi) {
                let sign = if hi { -1 } else { 1 };
                let mut nrm: Vec<i64> = normal.iter().map(|&x| (sign * x) as i64).collect();
                let mut off = (sign as i128 * offset) as i64;
                normalize_facet(&mut nrm, &mut off);
                if !facets.iter().any(|(a, b)| *a == nrm && *b == off) {
                    facets.push((nrm, off));
                }
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return facets;
            }
            i -= 1;
            if idx[i] != i + k - n {
                idx[i] += 1;
                for j in i + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Build the Newton polyhedron of a Laurent polynomial (`n <= 4`).
pub fn newton_polyhedron(f: &Potential) -> Result<NewtonPolyhedron> {
    let n = f.n();
    if n > 4 {
        return Err(LgError::Unsupported(format!(
            "Newton polyhedra support n <= 4, got {n}"
        )));
    }
    let mut support: Vec<Vec<i64>> = f.terms().iter().map(|(a, _)| a.clone()).collect();
    support.sort();
    support.dedup();
    let adim = affine_dim(&support);
    if adim < n {
        // degenerate hull: no facet description; convenience is decided
        // directly (the origin cannot be interior).
        let vertices = if adim == 0 {
            support.clone()
        } else if n == 1 || adim == 1 {
            // segment: extremes along the span direction
            let mut v = support.clone();
            v.sort();
            vec![v[0].clone(), v[v.len() - 1].clone()]
        } else {
            hull_2d_in_plane(&support)
        };
        return Ok(NewtonPolyhedron {
            n,
            support,
            full_dim: false,
            vertices,
            facets: Vec::new(),
        });
    }
    let (vertices, facets) = match n {
        1 => {
            let mut v = support.clone();
            v.sort();
            let (lo, hi) = (v[0][0], v[v.len() - 1][0]);
            (
                vec![vec![lo], vec![hi]],
                vec![(vec![1], hi), (vec![-1], -lo)],
            )
        }
        2 => {
            let verts = hull_2d(&support);
            let m = verts.len();
            let mut facets = Vec::new();
            for i in 0..m {
                let p = &verts[i];
                let q = &verts[(i + 1) % m];
                let d = [q[0] - p[0], q[1] - p[1]];
                let mut nrm = vec![d[1], -d[0]];
                let mut off = nrm[0] * p[0] + nrm[1] * p[1];
                normalize_facet(&mut nrm, &mut off);
                facets.push((nrm, off));
            }
            (verts, facets)
        }
        _ => {
            let facets = facets_by_enumeration(&support, n);
            let verts = vertices_from_facets(&support, &facets, n);
            (verts, facets)
        }
    };
    Ok(NewtonPolyhedron {
        n,
        support,
        full_dim: true,
        vertices,
        facets,
    })
}

/// 2D hull of points lying in a line-degenerate higher-dim set is not
/// needed; for planar subsets inside `Z^n` we only report extremes of the
/// set (used for degenerate polyhedra where convenience already failed).
fn hull_2d_in_plane(support: &[Vec<i64>]) -> Vec<Vec<i64>> {
    support.to_vec()
}

fn vertices_from_facets(
    support: &[Vec<i64>],
    facets: &[(Vec<i64>, i64)],
    n: usize,
) -> Vec<Vec<i64>> {
    support
        .iter()
        .filter(|p| {
            let incident: Vec<Vec<i64>> = facets
                .iter()
                .filter(|(a, b)| {
                    a.iter().zip(*p).map(|(&x, &y)| x as i128 * y as i128).sum::<i128>()
                        == *b as i128
                })
                .map(|(a, _)| a.clone())
                .collect();
            incident.len() >= n && affine_dim_with_origin(&incident) == n
        })
        .cloned()
        .collect()
}

fn affine_dim_with_origin(vectors: &[Vec<i64>]) -> usize {
    let mut pts = vec![vec![0i64; vectors[0].len()]];
    pts.extend(vectors.iter().cloned());
    affine_dim(&pts)
}

impl NewtonPolyhedron {
    /// Is the origin strictly interior? (The "convenient" condition.)
    pub fn is_convenient(&self) -> bool {
        self.full_dim && self.facets.iter().all(|(_, b)| *b > 0)
    }

    /// Membership test for the closed polyhedron.
    pub fn contains(&self, x: &[i64]) -> bool {
        if !self.full_dim {
            return self.support.iter().any(|p| p == x);
        }
        self.facets.iter().all(|(a, b)| {
            a.iter().zip(x).map(|(&u, &v)| u as i128 * v as i128).sum::<i128>() <= *b as i128
        })
    }

    /// Enumerate the proper faces as supports of facet intersections
    /// (closure of the facet point-sets under intersection). Vertices are
    /// dim-0 faces; the polyhedron itself is not included.
    pub fn proper_faces(&self) -> Vec<Face> {
        if !self.full_dim {
            return Vec::new();
        }
        let facet_sets: Vec<Vec<Vec<i64>>> = self
            .facets
            .iter()
            .map(|(a, b)| {
                self.support
                    .iter()
                    .filter(|p| {
                        a.iter().zip(*p).map(|(&x, &y)| x as i128 * y as i128).sum::<i128>()
                            == *b as i128
                    })
                    .cloned()
                    .collect()
            })
            .collect();
        let mut sets: Vec<Vec<Vec<i64>>> = facet_sets.clone();
        loop {
            let mut new_sets = Vec::new();
            for s in &sets {
                for f in &facet_sets {
                    let inter: Vec<Vec<i64>> =
                        s.iter().filter(|p| f.contains(p)).cloned().collect();
                    if !inter.is_empty() && !sets.contains(&inter) && !new_sets.contains(&inter) {
                        new_sets.push(inter);
                    }
                }
            }
            if new_sets.is_empty() {
                break;
            }
            sets.extend(new_sets);
        }
        sets.into_iter()
            .map(|points| {
                let dim = affine_dim(&points);
                Face { points, dim }
            })
            .collect()
    }

    /// Growth exponent `delta = max_beta M(beta)`: the maximum of the
    /// support function over unit directions, which is the largest
    /// Euclidean norm among support points (attained at a vertex).
    pub fn growth_exponent(&self) -> f64 {
        self.support
            .iter()
            .map(|p| p.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}
