//! Exact quasi-homogeneous weight inference over the rationals.

use crate::error::{LgError, Result};
use crate::potential::{Domain, Potential};
use num_rational::Ratio;

pub type Q = Ratio<i128>;

/// Weights `q_1, ..., q_n` with total weight normalized to 1. Each monomial
/// exponent `alpha` of the potential satisfies `<alpha, q> = 1` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSystem {
    pub weights: Vec<Q>,
    /// Total weight; always 1 after normalization.
    pub gamma: Q,
}

impl WeightSystem {
    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights
            .iter()
            .map(|q| *q.numer() as f64 / *q.denom() as f64)
            .collect()
    }

    /// Exponents of the Fan-Jarvis-Ruan bound: `delta_i = q_i / min_j(1 - q_j)`.
    pub fn fjr_exponents(&self) -> Vec<Q> {
        let min_comp = self
            .weights
            .iter()
            .map(|q| Q::from_integer(1) - q)
            .min()
            .expect("nonempty weights");
        self.weights.iter().map(|q| q / min_comp).collect()
    }
}

/// Solve `<alpha, q> = 1` over all exponent vectors of `w` by exact rational
/// elimination. Fails when the system is inconsistent (not
/// quasi-homogeneous) or underdetermined (weights not unique, violating
/// non-degeneracy).
pub fn infer_weights(w: &Potential) -> Result<WeightSystem> {
    if w.domain() != Domain::Affine {
        return Err(LgError::Unsupported(
            "weight inference applies to polynomial (non-Laurent) potentials".into(),
        ));
    }
    let n = w.n();
    // rows: [alpha | 1]
    let mut rows: Vec<Vec<Q>> = w
        .terms()
        .iter()
        .map(|(alpha, _)| {
            let mut r: Vec<Q> = alpha.iter().map(|&a| Q::from_integer(a as i128)).collect();
            r.push(Q::from_integer(1));
            r
        })
        .collect();

    // Gauss-Jordan over Q
    let mut pivot_cols = Vec::new();
    let mut rank = 0usize;
    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][col] != Q::from_integer(0)) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = rows[rank][col];
        for x in rows[rank].iter_mut() {
            *x /= inv;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != Q::from_integer(0) {
                let f = rows[r][col];
                for c in 0..=n {
                    let sub = f * rows[rank][c];
                    rows[r][c] -= sub;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    // consistency: any zero row with nonzero rhs?
    for r in rank..rows.len() {
        if rows[r][..n].iter().all(|x| *x == Q::from_integer(0))
            && rows[r][n] != Q::from_integer(0)
        {
            return Err(LgError::InvalidInput(
                "exponents admit no common weight system (not quasi-homogeneous)".into(),
            ));
        }
    }
    if rank < n {
        return Err(LgError::InvalidInput(format!(
            "weight system underdetermined (rank {rank} < {n}); weights are not unique"
        )));
    }
    let mut q = vec![Q::from_integer(0); n];
    for (r, &col) in pivot_cols.iter().enumerate() {
        q[col] = rows[r][n];
    }
    for (i, qi) in q.iter().enumerate() {
        if *qi <= Q::from_integer(0) || *qi >= Q::from_integer(1) {
            return Err(LgError::InvalidInput(format!(
                "weight q_{} = {} outside (0, 1)",
                i + 1,
                qi
            )));
        }
    }
    // exact residual check (the invariant: <alpha, q> - 1 = 0 identically)
    for (alpha, _) in w.terms() {
        let s: Q = alpha
            .iter()
            .zip(&q)
            .map(|(&a, qi)| Q::from_integer(a as i128) * qi)
            .sum();
        assert_eq!(s, Q::from_integer(1), "rational elimination must be exact");
    }
    Ok(WeightSystem {
        weights: q,
        gamma: Q::from_integer(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::C64;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn fermat_quintic_weights_are_one_fifth() {
        let mut terms = Vec::new();
        for i in 0..5 {
            let mut e = vec![0i64; 5];
            e[i] = 5;
            terms.push((e, c(1.0)));
        }
        let w = Potential::new(5, Domain::Affine, terms).unwrap();
        let ws = infer_weights(&w).unwrap();
        assert!(ws.weights.iter().all(|q| *q == Q::new(1, 5)));
        // delta_i = (1/5) / (4/5) = 1/4
        assert!(ws.fjr_exponents().iter().all(|d| *d == Q::new(1, 4)));
    }

    #[test]
    fn z_squared_weight_is_one_half() {
        let w = Potential::univariate(Domain::Affine, &[(2, c(1.0))]).unwrap();
        let ws = infer_weights(&w).unwrap();
        assert_eq!(ws.weights, vec![Q::new(1, 2)]);
    }

    #[test]
    fn coupled_cubic_weights() {
        // z1^2 z2 + z2^2 z1: 2 q1 + q2 = 1, q1 + 2 q2 = 1 -> q = (1/3, 1/3)
        let w = Potential::new(
            2,
            Domain::Affine,
            vec![(vec![2, 1], c(1.0)), (vec![1, 2], c(1.0))],
        )
        .unwrap();
        let ws = infer_weights(&w).unwrap();
        assert_eq!(ws.weights, vec![Q::new(1, 3), Q::new(1, 3)]);
    }

    #[test]
    fn inconsistent_and_underdetermined_systems_fail() {
        // z^2 + z^3 cannot be quasi-homogeneous
        let w = Potential::univariate(Domain::Affine, &[(2, c(1.0)), (3, c(1.0))]).unwrap();
        assert!(infer_weights(&w).is_err());
        // single monomial z1 z2 in n = 2: underdetermined
        let w = Potential::new(2, Domain::Affine, vec![(vec![1, 1], c(1.0))]).unwrap();
        assert!(infer_weights(&w).is_err());
    }
}
