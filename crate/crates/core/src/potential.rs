//! Polynomial and Laurent potentials with exact evaluation, holomorphic
//! gradients and Hessians, and a lossless text serialization.

use crate::error::{LgError, Result};
use crate::geometry::{ComplexPoint, C64};
use std::collections::BTreeMap;

/// Where the potential lives: affine `C^n` (exponents >= 0) or the torus
/// `(C*)^n` (negative exponents allowed).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Affine,
    Torus,
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Domain::Affine => write!(f, "affine"),
            Domain::Torus => write!(f, "torus"),
        }
    }
}

/// A (Laurent) polynomial `W(z) = sum_a c_a z^a` together with its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    n: usize,
    domain: Domain,
    /// Term list sorted by exponent vector; no duplicates, no zero terms.
    terms: Vec<(Vec<i64>, C64)>,
}

impl Potential {
    pub fn new(n: usize, domain: Domain, terms: Vec<(Vec<i64>, C64)>) -> Result<Self> {
        if n == 0 {
            return Err(LgError::InvalidInput("dimension must be >= 1".into()));
        }
        let mut map: BTreeMap<Vec<i64>, C64> = BTreeMap::new();
        for (alpha, c) in terms {
            if alpha.len() != n {
                return Err(LgError::InvalidInput(format!(
                    "exponent vector {:?} has length {} != n = {}",
                    alpha,
                    alpha.len(),
                    n
                )));
            }
            if domain == Domain::Affine && alpha.iter().any(|&a| a < 0) {
                return Err(LgError::Domain(format!(
                    "negative exponent {:?} on the affine domain",
                    alpha
                )));
            }
            if map.contains_key(&alpha) {
                return Err(LgError::InvalidInput(format!(
                    "duplicate exponent vector {:?}",
                    alpha
                )));
            }
            if c != C64::new(0.0, 0.0) {
                map.insert(alpha, c);
            }
        }
        let terms: Vec<_> = map.into_iter().collect();
        if terms.is_empty() || terms.iter().all(|(a, _)| a.iter().all(|&e| e == 0)) {
            return Err(LgError::InvalidInput(
                "potential must have a nonconstant term".into(),
            ));
        }
        Ok(Potential { n, domain, terms })
    }

    /// Convenience constructor for one-variable potentials.
    pub fn univariate(domain: Domain, terms: &[(i64, C64)]) -> Result<Self> {
        Potential::new(
            1,
            domain,
            terms.iter().map(|&(e, c)| (vec![e], c)).collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn terms(&self) -> &[(Vec<i64>, C64)] {
        &self.terms
    }

    /// `e^{i theta} W`, exact on the coefficient list.
    pub fn rotated(&self, theta: f64) -> Potential {
        let phase = C64::from_polar(1.0, theta);
        Potential {
            n: self.n,
            domain: self.domain,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.clone(), phase * c))
                .collect(),
        }
    }

    fn check_point(&self, u: &ComplexPoint) -> Result<()> {
        if u.dim() != self.n {
            return Err(LgError::InvalidInput(format!(
                "point dimension {} != potential dimension {}",
                u.dim(),
                self.n
            )));
        }
        if self.domain == Domain::Torus {
            for (j, z) in u.coords.iter().enumerate() {
                if z.norm_sqr() == 0.0 {
                    return Err(LgError::Domain(format!(
                        "coordinate z_{} = 0 with Laurent exponents present",
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Evaluate `W(u)`. Horner per variable on the grouped exponent table.
    pub fn evaluate(&self, u: &ComplexPoint) -> Result<C64> {
        self.check_point(u)?;
        Ok(self
            .terms
            .iter()
            .map(|(alpha, c)| c * monomial(alpha, &u.coords))
            .sum())
    }

    /// Holomorphic gradient `(dW/dz_1, ..., dW/dz_n)`.
    pub fn holo_gradient(&self, u: &ComplexPoint) -> Result<Vec<C64>> {
        self.check_point(u)?;
        let mut grad = vec![C64::new(0.0, 0.0); self.n];
        for (alpha, c) in &self.terms {
            for j in 0..self.n {
                if alpha[j] == 0 {
                    continue;
                }
                let mut da = alpha.clone();
                da[j] -= 1;
                grad[j] += c * (alpha[j] as f64) * monomial(&da, &u.coords);
            }
        }
        Ok(grad)
    }

    /// Holomorphic Hessian `d^2 W / dz_i dz_j`.
    pub fn holo_hessian(&self, u: &ComplexPoint) -> Result<Vec<Vec<C64>>> {
        self.check_point(u)?;
        let mut h = vec![vec![C64::new(0.0, 0.0); self.n]; self.n];
        for (alpha, c) in &self.terms {
            for i in 0..self.n {
                for j in 0..self.n {
                    let factor = if i == j {
                        (alpha[i] * (alpha[i] - 1)) as f64
                    } else {
                        (alpha[i] * alpha[j]) as f64
                    };
                    if factor == 0.0 {
                        continue;
                    }
                    let mut da = alpha.clone();
                    da[i] -= 1;
                    da[j] -= 1;
                    h[i][j] += c * factor * monomial(&da, &u.coords);
                }
            }
        }
        Ok(h)
    }

    /// Evaluate at `z = exp(t)` given log coordinates `t` (torus models).
    pub fn evaluate_log(&self, t: &ComplexPoint) -> C64 {
        self.terms
            .iter()
            .map(|(alpha, c)| c * exp_pairing(alpha, &t.coords))
            .sum()
    }

    /// Gradient with respect to the log coordinates: `dW/dt_j = sum alpha_j c e^{<alpha,t>}`.
    pub fn log_gradient(&self, t: &ComplexPoint) -> Vec<C64> {
        let mut grad = vec![C64::new(0.0, 0.0); self.n];
        for (alpha, c) in &self.terms {
            let e = c * exp_pairing(alpha, &t.coords);
            for j in 0..self.n {
                grad[j] += (alpha[j] as f64) * e;
            }
        }
        grad
    }

    /// Hessian in the log coordinates: entries `alpha_i alpha_j c e^{<alpha,t>}`.
    pub fn log_hessian(&self, t: &ComplexPoint) -> Vec<Vec<C64>> {
        let mut h = vec![vec![C64::new(0.0, 0.0); self.n]; self.n];
        for (alpha, c) in &self.terms {
            let e = c * exp_pairing(alpha, &t.coords);
            for i in 0..self.n {
                for j in 0..self.n {
                    h[i][j] += ((alpha[i] * alpha[j]) as f64) * e;
                }
            }
        }
        h
    }

    /// Lossless one-line serialization of the term list, e.g.
    /// `[[3],-0.3333333333333333,0];[[1],1,0]`.
    pub fn terms_to_string(&self) -> String {
        self.terms
            .iter()
            .map(|(alpha, c)| {
                let idx = alpha
                    .iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                format!("[[{}],{},{}]", idx, fmt_f64(c.re), fmt_f64(c.im))
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Full structured-text serialization (fields n, domain, terms).
    pub fn to_text(&self) -> String {
        format!(
            "n = {}\ndomain = {}\nterms = {}\n",
            self.n,
            self.domain,
            self.terms_to_string()
        )
    }

    pub fn from_text(text: &str) -> Result<Potential> {
        let mut n: Option<usize> = None;
        let mut domain: Option<Domain> = None;
        let mut terms: Option<Vec<(Vec<i64>, C64)>> = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| LgError::Parse(format!("expected key = value, got '{line}'")))?;
            match key.trim() {
                "n" => {
                    n = Some(value.trim().parse().map_err(|e| {
                        LgError::Parse(format!("bad dimension '{}': {e}", value.trim()))
                    })?)
                }
                "domain" => domain = Some(parse_domain(value.trim())?),
                "terms" => terms = Some(parse_terms(value.trim())?),
                other => return Err(LgError::Parse(format!("unknown potential key '{other}'"))),
            }
        }
        let n = n.ok_or_else(|| LgError::Parse("missing field n".into()))?;
        let domain = domain.ok_or_else(|| LgError::Parse("missing field domain".into()))?;
        let terms = terms.ok_or_else(|| LgError::Parse("missing field terms".into()))?;
        Potential::new(n, domain, terms)
    }
}

pub(crate) fn parse_domain(s: &str) -> Result<Domain> {
    match s {
        "affine" => Ok(Domain::Affine),
        "torus" | "laurent" => Ok(Domain::Torus),
        other => Err(LgError::Parse(format!("unknown domain '{other}'"))),
    }
}

pub(crate) fn parse_terms(s: &str) -> Result<Vec<(Vec<i64>, C64)>> {
    let mut out = Vec::new();
    for part in s.split(';') {
        let part = part.trim();
        let inner = part
            .strip_prefix("[[")
            .and_then(|p| p.strip_suffix(']'))
            .ok_or_else(|| LgError::Parse(format!("malformed term '{part}'")))?;
        let (alpha_str, coeff_str) = inner
            .split_once(']')
            .ok_or_else(|| LgError::Parse(format!("malformed term '{part}'")))?;
        let alpha = alpha_str
            .split(',')
            .map(|e| {
                e.trim()
                    .parse::<i64>()
                    .map_err(|err| LgError::Parse(format!("bad exponent '{e}': {err}")))
            })
            .collect::<Result<Vec<i64>>>()?;
        let coeffs: Vec<&str> = coeff_str
            .trim_start_matches(',')
            .split(',')
            .map(str::trim)
            .collect();
        if coeffs.len() != 2 {
            return Err(LgError::Parse(format!(
                "term '{part}' must carry re and im parts"
            )));
        }
        let re = coeffs[0]
            .parse::<f64>()
            .map_err(|e| LgError::Parse(format!("bad coefficient '{}': {e}", coeffs[0])))?;
        let im = coeffs[1]
            .parse::<f64>()
            .map_err(|e| LgError::Parse(format!("bad coefficient '{}': {e}", coeffs[1])))?;
        out.push((alpha, C64::new(re, im)));
    }
    Ok(out)
}

/// Shortest representation that round-trips through `f64` parsing.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn monomial(alpha: &[i64], z: &[C64]) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    for (e, zj) in alpha.iter().zip(z) {
        acc *= powi_c(*zj, *e);
    }
    acc
}

fn powi_c(z: C64, e: i64) -> C64 {
    match e.cmp(&0) {
        std::cmp::Ordering::Equal => C64::new(1.0, 0.0),
        std::cmp::Ordering::Greater => z.powu(e as u32),
        std::cmp::Ordering::Less => z.powu((-e) as u32).inv(),
    }
}

fn exp_pairing(alpha: &[i64], t: &[C64]) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for (a, tj) in alpha.iter().zip(t) {
        s += (*a as f64) * tj;
    }
    s.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cubic() -> Potential {
        // z^3/3 - z
        Potential::univariate(
            Domain::Affine,
            &[(3, c(1.0 / 3.0, 0.0)), (1, c(-1.0, 0.0))],
        )
        .unwrap()
    }

    #[test]
    fn evaluate_zero_and_forced_values() {
        let w = Potential::univariate(Domain::Affine, &[(2, c(0.5, 0.0))]).unwrap();
        let v = w.evaluate(&ComplexPoint::new(vec![c(0.0, 0.0)])).unwrap();
        assert_eq!(v, c(0.0, 0.0));

        let v = cubic().evaluate(&ComplexPoint::new(vec![c(1.0, 0.0)])).unwrap();
        assert_abs_diff_eq!(v.re, -2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn quintic_matches_naive_summation_oracle() {
        // W = z1^5 + ... + z5^5 + sum a_i z_i, compared against direct
        // term-by-term summation at a sampled point.
        let mut terms = Vec::new();
        for i in 0..5 {
            let mut e5 = vec![0i64; 5];
            e5[i] = 5;
            terms.push((e5, c(1.0, 0.0)));
            let mut e1 = vec![0i64; 5];
            e1[i] = 1;
            terms.push((e1, C64::from_polar(0.1, 0.7 * (i as f64 + 1.0))));
        }
        let w = Potential::new(5, Domain::Affine, terms.clone()).unwrap();
        let u = ComplexPoint::new(
            (0..5)
                .map(|i| c(0.3 + 0.1 * i as f64, -0.2 + 0.07 * i as f64))
                .collect(),
        );
        // independent naive oracle
        let mut expect = c(0.0, 0.0);
        for (alpha, coeff) in &terms {
            let mut m = c(1.0, 0.0);
            for (j, &e) in alpha.iter().enumerate() {
                for _ in 0..e {
                    m *= u.coords[j];
                }
            }
            expect += coeff * m;
        }
        let got = w.evaluate(&u).unwrap();
        assert!((got - expect).norm() <= 1e-14 * expect.norm().max(1.0));
    }

    #[test]
    fn gradient_trivial_values() {
        let w = Potential::univariate(Domain::Affine, &[(2, c(0.5, 0.0))]).unwrap();
        let g = w.holo_gradient(&ComplexPoint::new(vec![c(3.0, 0.0)])).unwrap();
        assert_abs_diff_eq!(g[0].re, 3.0, epsilon = 1e-15);
        for z in [c(1.0, 0.0), c(-1.0, 0.0)] {
            let g = cubic().holo_gradient(&ComplexPoint::new(vec![z])).unwrap();
            assert!(g[0].norm() < 1e-15);
        }
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        // 100 random cubic instances in n = 2, finite-difference oracle.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let h = 1e-5;
        for _ in 0..100 {
            let mut terms = Vec::new();
            for e0 in 0..=3i64 {
                for e1 in 0..=(3 - e0) {
                    if e0 + e1 == 0 {
                        continue;
                    }
                    terms.push((
                        vec![e0, e1],
                        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                    ));
                }
            }
            let w = Potential::new(2, Domain::Affine, terms).unwrap();
            let u = ComplexPoint::new(vec![
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            ]);
            let grad = w.holo_gradient(&u).unwrap();
            for j in 0..2 {
                let mut up = u.clone();
                let mut um = u.clone();
                up.coords[j] += c(h, 0.0);
                um.coords[j] -= c(h, 0.0);
                let fd = (w.evaluate(&up).unwrap() - w.evaluate(&um).unwrap()) / (2.0 * h);
                let scale = grad[j].norm().max(1.0);
                assert!(
                    (fd - grad[j]).norm() / scale < 1e-6,
                    "fd {:?} vs analytic {:?}",
                    fd,
                    grad[j]
                );
            }
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let w = cubic();
        let u = ComplexPoint::new(vec![c(0.7, -0.3)]);
        let hess = w.holo_hessian(&u).unwrap();
        // d^2/dz^2 (z^3/3 - z) = 2z
        assert!((hess[0][0] - c(1.4, -0.6)).norm() < 1e-14);
    }

    #[test]
    fn laurent_needs_nonzero_coordinates() {
        let f = Potential::univariate(Domain::Torus, &[(1, c(1.0, 0.0)), (-1, c(1.0, 0.0))])
            .unwrap();
        let err = f.evaluate(&ComplexPoint::new(vec![c(0.0, 0.0)]));
        assert!(matches!(err, Err(LgError::Domain(_))));
        let v = f.evaluate(&ComplexPoint::new(vec![c(2.0, 0.0)])).unwrap();
        assert_abs_diff_eq!(v.re, 2.5, epsilon = 1e-15);
    }

    #[test]
    fn log_evaluation_agrees_with_direct() {
        let f = Potential::new(
            2,
            Domain::Torus,
            vec![
                (vec![1, 0], c(1.0, 0.0)),
                (vec![0, 1], c(1.0, 0.0)),
                (vec![-1, -1], c(1.0, 0.0)),
            ],
        )
        .unwrap();
        let t = ComplexPoint::new(vec![c(0.3, 0.9), c(-0.2, 0.4)]);
        let z = ComplexPoint::new(vec![t.coords[0].exp(), t.coords[1].exp()]);
        let a = f.evaluate(&z).unwrap();
        let b = f.evaluate_log(&t);
        assert!((a - b).norm() < 1e-13);
        // log gradient = z_i dW/dz_i
        let lg = f.log_gradient(&t);
        let hg = f.holo_gradient(&z).unwrap();
        for j in 0..2 {
            assert!((lg[j] - z.coords[j] * hg[j]).norm() < 1e-13);
        }
    }

    #[test]
    fn serialization_round_trip_is_exact() {
        let w = Potential::new(
            2,
            Domain::Torus,
            vec![
                (vec![3, -1], c(0.1 + 0.2, -1.0 / 3.0)),
                (vec![0, 1], c(std::f64::consts::PI, 1e-17)),
            ],
        )
        .unwrap();
        let text = w.to_text();
        let back = Potential::from_text(&text).unwrap();
        assert_eq!(w, back);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Potential::new(2, Domain::Affine, vec![(vec![1, 0], c(1.0, 0.0)), (vec![1, 0], c(2.0, 0.0))]).is_err());
        assert!(Potential::new(1, Domain::Affine, vec![(vec![-1], c(1.0, 0.0))]).is_err());
        assert!(Potential::new(1, Domain::Affine, vec![(vec![0], c(1.0, 0.0))]).is_err());
    }
}
