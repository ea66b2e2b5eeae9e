//! Univariate polynomials with complex coefficients, stored lowest degree first.
//!
//! Real polynomials are represented with zero imaginary parts; [`Poly::max_imag`]
//! reports how far a computed polynomial is from being real.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold below which a leading coefficient counts as zero.
pub const TRIM_TOL: f64 = 1e-12;

/// Iteration cap for the complex Schur decomposition.
pub const SCHUR_MAX_ITER: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Poly { coeffs };
        p.strip_exact_zeros();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `c * x^k`.
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    fn strip_exact_zeros(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if *c == Complex64::new(0.0, 0.0)) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `x^k`, zero beyond the stored length.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn real_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.re).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// Length of the stored coefficient list minus one; `None` for the zero polynomial.
    pub fn storage_degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree after discarding leading coefficients smaller than `rel_tol * max|c|`.
    pub fn degree(&self, rel_tol: f64) -> Option<usize> {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return None;
        }
        self.coeffs.iter().rposition(|c| c.norm() > rel_tol * scale)
    }

    /// Copy with negligible leading coefficients removed.
    pub fn trimmed(&self, rel_tol: f64) -> Poly {
        match self.degree(rel_tol) {
            Some(d) => Poly::new(self.coeffs[..=d].to_vec()),
            None => Poly::zero(),
        }
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn eval_real(&self, x: f64) -> Complex64 {
        self.eval(Complex64::new(x, 0.0))
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn scale_real(&self, s: f64) -> Poly {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Largest coefficientwise distance to `other`.
    pub fn max_coeff_diff(&self, other: &Poly) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }

    /// Polynomial long division, returning `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = match divisor.storage_degree() {
            Some(d) => d,
            None => panic!("polynomial division by zero"),
        };
        let lead = divisor.coeffs[dd];
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![Complex64::new(0.0, 0.0); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * dc;
            }
            rem[k + dd] = Complex64::new(0.0, 0.0);
        }
        rem.truncate(dd);
        (Poly::new(quot), Poly::new(rem))
    }

    fn normalized(&self) -> Poly {
        let s = self.max_abs_coeff();
        if s == 0.0 {
            self.clone()
        } else {
            self.scale_real(1.0 / s)
        }
    }

    /// Numerical greatest common divisor by Euclidean remainders.
    ///
    /// Operands are rescaled to unit max-coefficient at every step; a remainder whose
    /// coefficients all fall below `rel_tol` is treated as zero. The result is normalized
    /// to unit max-coefficient, so only its degree is meaningful.
    pub fn gcd(&self, other: &Poly, rel_tol: f64) -> Poly {
        let mut a = self.trimmed(rel_tol).normalized();
        let mut b = other.trimmed(rel_tol).normalized();
        if a.storage_degree() < b.storage_degree() {
            std::mem::swap(&mut a, &mut b);
        }
        loop {
            if b.is_zero() {
                return a;
            }
            if b.storage_degree() == Some(0) {
                return Poly::constant(Complex64::new(1.0, 0.0));
            }
            let (_, r) = a.div_rem(&b);
            let r = r.trimmed(TRIM_TOL);
            if r.max_abs_coeff() <= rel_tol {
                return b;
            }
            a = b;
            b = r.normalized();
        }
    }

    /// True when `gcd(p, p')` is a constant at the given relative tolerance.
    pub fn is_squarefree(&self, rel_tol: f64) -> bool {
        let p = self.trimmed(TRIM_TOL);
        if p.storage_degree().unwrap_or(0) == 0 {
            return true;
        }
        p.gcd(&p.derivative(), rel_tol).storage_degree() == Some(0)
    }

    /// Roots as eigenvalues of the companion matrix, each polished by Newton steps
    /// on the original polynomial.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let p = self.trimmed(TRIM_TOL);
        let n = match p.storage_degree() {
            None => return Err(Error::Degenerate("roots of the zero polynomial".into())),
            Some(0) => return Ok(Vec::new()),
            Some(n) => n,
        };
        if p.coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("polynomial coefficient".into()));
        }
        // exact zeros at the origin are split off; QR iteration stalls on nilpotent blocks
        let zeros = p.coeffs.iter().take_while(|c| c.norm() == 0.0).count();
        if zeros > 0 {
            let mut out = vec![Complex64::new(0.0, 0.0); zeros];
            out.extend(Poly::new(p.coeffs[zeros..].to_vec()).roots()?);
            return Ok(out);
        }
        // QR can stall when all roots share a modulus (x^n + c); a shifted variable
        // breaks the symmetry
        let radius = 1.0 + p.coeffs.iter().map(|c| (c / p.coeffs[n]).norm()).fold(0.0, f64::max);
        let eig = [0.0, 0.1, 0.23]
            .iter()
            .find_map(|&t| {
                let shift = Complex64::from_polar(t * radius, 0.7);
                let eig = companion_eigenvalues(&p.taylor_shift(shift))?;
                Some(eig.into_iter().map(|z| z + shift).collect::<Vec<_>>())
            })
            .ok_or(Error::NonConvergence {
                iterations: SCHUR_MAX_ITER,
                last_update: f64::NAN,
            })?;
        let dp = p.derivative();
        let roots = eig
            .iter()
            .map(|&z0| {
                let mut z = z0;
                for _ in 0..3 {
                    let d = dp.eval(z);
                    if d.norm() == 0.0 {
                        break;
                    }
                    let step = p.eval(z) / d;
                    if !step.re.is_finite() || !step.im.is_finite() {
                        break;
                    }
                    z -= step;
                }
                // keep the polished value only if it is at least as good
                if p.eval(z).norm() <= p.eval(z0).norm() {
                    z
                } else {
                    z0
                }
            })
            .collect();
        Ok(roots)
    }

    /// `p(x + c)`.
    pub fn taylor_shift(&self, c: Complex64) -> Poly {
        let lin = Poly::new(vec![c, Complex64::new(1.0, 0.0)]);
        self.coeffs
            .iter()
            .rev()
            .fold(Poly::zero(), |acc, &k| &(&acc * &lin) + &Poly::constant(k))
    }

    /// Interpolating polynomial of degree `< nodes.len()` through `(nodes[k], values[k])`.
    pub fn interpolate(nodes: &[Complex64], values: &[Complex64]) -> Result<Poly> {
        if nodes.len() != values.len() || nodes.is_empty() {
            return Err(Error::Precondition(
                "interpolation needs matching, nonempty node and value lists".into(),
            ));
        }
        let n = nodes.len();
        let vander = DMatrix::from_fn(n, n, |i, j| nodes[i].powu(j as u32));
        let rhs = DVector::from_column_slice(values);
        let sol = vander
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Degenerate("singular interpolation system".into()))?;
        Ok(Poly::new(sol.iter().copied().collect()))
    }
}

/// `n` Chebyshev points of the first kind on `[-1, 1]`.
fn companion_eigenvalues(p: &Poly) -> Option<Vec<Complex64>> {
    let n = p.storage_degree()?;
    let lead = p.coeffs[n];
    let mut companion = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        companion[(i, n - 1)] = -p.coeffs[i] / lead;
    }
    let eig = companion.try_schur(f64::EPSILON, SCHUR_MAX_ITER)?.eigenvalues()?;
    Some(eig.iter().copied().collect())
}

pub fn chebyshev_nodes(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos())
        .collect()
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale_real(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
