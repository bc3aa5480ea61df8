//! Banded LU with partial pivoting (the dgbtrf/dgbtrs layout): the Newton
//! systems of the strip and disc solvers are block-banded when unknowns are
//! ordered column-by-column.

use crate::error::{LgError, Result};
use nalgebra::DVector;

/// Band storage with `kl` sub- and `ku` superdiagonals plus `kl` fill rows
/// for pivoting. Entry `(i, j)` lives at row `kl + ku + i - j` of column `j`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    ldab: usize,
    /// column-major `(ldab, n)`
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            ldab,
            data: vec![0.0; ldab * n],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(
            i + self.ku >= j && j + self.kl >= i,
            "({i},{j}) outside the band"
        );
        self.ldab * j + (self.kl + self.ku + i - j)
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i + self.ku >= j && j + self.kl >= i
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let id = self.idx(i, j);
        self.data[id] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let id = self.idx(i, j);
        self.data[id] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.ldab * j + (self.kl + self.ku + i - j)]
        } else {
            0.0
        }
    }

    /// `A x`.
    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.n);
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            let xj = x[j];
            if xj != 0.0 {
                for i in lo..=hi {
                    y[i] += self.get(i, j) * xj;
                }
            }
        }
        y
    }

    /// `A^T x`.
    pub fn matvec_transpose(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.n);
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            let mut acc = 0.0;
            for i in lo..=hi {
                acc += self.get(i, j) * x[i];
            }
            y[j] += acc;
        }
        y
    }

    /// In-place factorization `A = P L U` with row pivoting in the band.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let (kl, ldab) = (self.kl, self.ldab);
        let kv = self.kl + self.ku;
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            let last = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = -1.0f64;
            for i in j..=last {
                let v = self.data[ldab * j + (kv + i - j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 0.0 {
                return Err(LgError::InvalidInput(format!(
                    "banded matrix is singular at column {j}"
                )));
            }
            ipiv[j] = p;
            if p != j {
                let cmax = (j + kv).min(n - 1);
                for c in j..=cmax {
                    let a = ldab * c + (kv + j - c);
                    let b = ldab * c + (kv + p - c);
                    self.data.swap(a, b);
                }
            }
            let piv = self.data[ldab * j + kv];
            for i in j + 1..=last {
                let id = ldab * j + (kv + i - j);
                let m = self.data[id] / piv;
                self.data[id] = m;
                if m != 0.0 {
                    let cmax = (j + kv).min(n - 1);
                    for c in j + 1..=cmax {
                        let uj = self.data[ldab * c + (kv + j - c)];
                        if uj != 0.0 {
                            let tid = ldab * c + (kv + i - c);
                            self.data[tid] -= m * uj;
                        }
                    }
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            ldab,
            kv,
            data: self.data,
            ipiv,
        })
    }
}

/// Factored form; solves `A x = b` and `A^T x = b`.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ldab: usize,
    kv: usize,
    data: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[self.ldab * j + (self.kv + i - j)]
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let mut x = b.clone();
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap_rows(j, p);
            }
            let last = (j + self.kl).min(n - 1);
            let xj = x[j];
            if xj != 0.0 {
                for i in j + 1..=last {
                    x[i] -= self.at(i, j) * xj;
                }
            }
        }
        for j in (0..n).rev() {
            let lo = j.saturating_sub(self.kv);
            x[j] /= self.at(j, j);
            let xj = x[j];
            if xj != 0.0 {
                for i in lo..j {
                    x[i] -= self.at(i, j) * xj;
                }
            }
        }
        x
    }

    /// Solve `A^T x = b` from the same factors (`U^T y = b`, then `L^T`,
    /// then the pivots in reverse).
    pub fn solve_transpose(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let mut x = b.clone();
        for j in 0..n {
            let lo = j.saturating_sub(self.kv);
            let mut acc = x[j];
            for i in lo..j {
                acc -= self.at(i, j) * x[i];
            }
            x[j] = acc / self.at(j, j);
        }
        for j in (0..n).rev() {
            let last = (j + self.kl).min(n - 1);
            let mut acc = x[j];
            for i in j + 1..=last {
                acc -= self.at(i, j) * x[i];
            }
            x[j] = acc;
            let p = self.ipiv[j];
            if p != j {
                x.swap_rows(j, p);
            }
        }
        x
    }
}

/// Two smallest singular values of a factored square band matrix, by
/// inverse iteration on `A^T A` with deflation. Returns
/// `(sigma_min, sigma_next)`.
pub fn two_smallest_singular_values(
    a: &BandMatrix,
    lu: &BandLu,
    iters: usize,
    seed: u64,
) -> (f64, f64) {
    use rand::Rng;
    let n = a.n;
    let mut rng = crate::rng::stream(seed, "sigma-min");
    let mut vecs: Vec<DVector<f64>> = Vec::new();
    let mut sigmas = Vec::new();
    for _ in 0..2 {
        let mut v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0f64));
        for w in &vecs {
            let p = v.dot(w);
            v -= w * p;
        }
        v /= v.norm();
        let mut sigma = f64::INFINITY;
        for _ in 0..iters {
            let mut w = lu.solve(&lu.solve_transpose(&v));
            for d in &vecs {
                let p = w.dot(d);
                w -= d * p;
            }
            let nw = w.norm();
            if nw == 0.0 {
                break;
            }
            v = w / nw;
            let s = a.matvec(&v).norm();
            if (s - sigma).abs() < 1e-12 * sigma.max(1e-300) {
                sigma = s;
                break;
            }
            sigma = s;
        }
        sigmas.push(sigma);
        vecs.push(v);
    }
    sigmas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (sigmas[0], sigmas[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};

    fn random_banded(
        n: usize,
        kl: usize,
        ku: usize,
        rng: &mut rand_chacha::ChaCha8Rng,
    ) -> (BandMatrix, DMatrix<f64>) {
        let mut band = BandMatrix::zeros(n, kl, ku);
        let mut dense = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i + ku >= j && j + kl >= i {
                    let v: f64 = rng.random_range(-1.0..1.0);
                    band.set(i, j, v);
                    dense[(i, j)] = v;
                }
            }
        }
        for i in 0..n {
            band.add(i, i, 3.0);
            dense[(i, i)] += 3.0;
        }
        (band, dense)
    }

    #[test]
    fn band_solve_matches_dense_lu() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for &(n, kl, ku) in &[(12usize, 2usize, 3usize), (40, 5, 5), (65, 7, 3)] {
            let (band, dense) = random_banded(n, kl, ku, &mut rng);
            let b = DVector::from_fn(n, |i, _| (i as f64 * 0.37).sin());
            let x_band = band.clone().factor().unwrap().solve(&b);
            let x_dense = dense.clone().lu().solve(&b).unwrap();
            assert!(
                (x_band.clone() - &x_dense).amax() < 1e-10,
                "n={n} kl={kl} ku={ku}: band vs dense diff {}",
                (x_band - x_dense).amax()
            );
        }
    }

    #[test]
    fn transpose_solve_and_matvecs_match_dense() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let (band, dense) = random_banded(30, 4, 6, &mut rng);
        let b = DVector::from_fn(30, |i, _| (i as f64 * 0.61).cos());
        let lu = band.clone().factor().unwrap();
        let xt = lu.solve_transpose(&b);
        let xd = dense.transpose().lu().solve(&b).unwrap();
        assert!((xt - xd).amax() < 1e-10);
        let v = DVector::from_fn(30, |i, _| 1.0 / (1.0 + i as f64));
        assert!((band.matvec(&v) - &dense * &v).amax() < 1e-12);
        assert!((band.matvec_transpose(&v) - dense.transpose() * &v).amax() < 1e-12);
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0, 1], [1, 0]] needs a swap
        let mut band = BandMatrix::zeros(2, 1, 1);
        band.set(0, 1, 1.0);
        band.set(1, 0, 1.0);
        let lu = band.factor().unwrap();
        let x = lu.solve(&DVector::from_vec(vec![2.0, 3.0]));
        assert!((x[0] - 3.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn smallest_singular_values_match_dense_svd() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let (band, dense) = random_banded(50, 6, 6, &mut rng);
        let lu = band.clone().factor().unwrap();
        let (s0, s1) = two_smallest_singular_values(&band, &lu, 400, 1);
        let svd = dense.svd(false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
        sv.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((s0 - sv[0]).abs() < 1e-7 * sv[0].max(1.0), "{s0} vs {}", sv[0]);
        assert!((s1 - sv[1]).abs() < 1e-5 * sv[1].max(1.0), "{s1} vs {}", sv[1]);
    }
}
