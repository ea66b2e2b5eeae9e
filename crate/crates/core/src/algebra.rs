//! so(4) matrix algebra: skew-symmetric 4x4 matrices, the (M+, M-) vector
//! correspondence, the so(3)+so(3) split and the constant basis change that
//! diagonalizes the leading coefficient of the Lax matrix.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use nalgebra::{Matrix4, Vector3, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{BodyState, Params};
use crate::poly::Poly;

pub type Vec3 = Vector3<f64>;
pub type CMat4 = Matrix4<Complex64>;
pub type CVec4 = Vector4<Complex64>;

/// Real skew-symmetric 4x4 matrix stored by its upper triangle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Skew4 {
    pub m12: f64,
    pub m13: f64,
    pub m14: f64,
    pub m23: f64,
    pub m24: f64,
    pub m34: f64,
}

impl Skew4 {
    pub const ZERO: Skew4 = Skew4 {
        m12: 0.0,
        m13: 0.0,
        m14: 0.0,
        m23: 0.0,
        m24: 0.0,
        m34: 0.0,
    };

    pub fn new(m12: f64, m13: f64, m14: f64, m23: f64, m24: f64, m34: f64) -> Self {
        Skew4 {
            m12,
            m13,
            m14,
            m23,
            m24,
            m34,
        }
    }

    /// Entries in the order `m12, m13, m14, m23, m24, m34`.
    pub fn to_array(&self) -> [f64; 6] {
        [self.m12, self.m13, self.m14, self.m23, self.m24, self.m34]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Skew4::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    /// Entry `(i, j)` with zero-based indices, honoring skew symmetry.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => 0.0,
            Greater => -self.get(j, i),
            Less => match (i, j) {
                (0, 1) => self.m12,
                (0, 2) => self.m13,
                (0, 3) => self.m14,
                (1, 2) => self.m23,
                (1, 3) => self.m24,
                (2, 3) => self.m34,
                _ => panic!("index ({i}, {j}) out of range for a 4x4 matrix"),
            },
        }
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.get(i, j))
    }

    /// Reads the strict upper triangle; the lower triangle is ignored.
    pub fn from_matrix(m: &Matrix4<f64>) -> Self {
        Skew4::new(m[(0, 1)], m[(0, 2)], m[(0, 3)], m[(1, 2)], m[(1, 3)], m[(2, 3)])
    }

    pub fn to_complex(&self) -> CMat4 {
        self.to_matrix().map(|x| Complex64::new(x, 0.0))
    }

    /// Invariant pairing `-1/2 tr(XY)`, equal to the sum of products of upper entries.
    pub fn inner(&self, other: &Skew4) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(x, y)| x * y)
            .sum()
    }

    /// Frobenius norm of the full matrix.
    pub fn norm(&self) -> f64 {
        (2.0 * self.inner(self)).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn pfaffian(&self) -> f64 {
        self.m12 * self.m34 - self.m13 * self.m24 + self.m14 * self.m23
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    /// The off-diagonal-block entries (13, 14, 23, 24); the complement of the
    /// centralizer of any matrix supported on the (1,2) and (3,4) slots.
    pub fn off_block(&self) -> Skew4 {
        Skew4::new(0.0, self.m13, self.m14, self.m23, self.m24, 0.0)
    }
}

impl Add for Skew4 {
    type Output = Skew4;
    fn add(self, o: Skew4) -> Skew4 {
        let (a, b) = (self.to_array(), o.to_array());
        Skew4::from_array(std::array::from_fn(|k| a[k] + b[k]))
    }
}

impl Sub for Skew4 {
    type Output = Skew4;
    fn sub(self, o: Skew4) -> Skew4 {
        self + (-o)
    }
}

impl Neg for Skew4 {
    type Output = Skew4;
    fn neg(self) -> Skew4 {
        self * -1.0
    }
}

impl Mul<f64> for Skew4 {
    type Output = Skew4;
    fn mul(self, s: f64) -> Skew4 {
        Skew4::from_array(self.to_array().map(|x| x * s))
    }
}

/// Matrix commutator `xy - yx`.
pub trait Commutator {
    fn commutator(&self, other: &Self) -> Self;
}

impl Commutator for Skew4 {
    fn commutator(&self, other: &Skew4) -> Skew4 {
        let (x, y) = (self.to_matrix(), other.to_matrix());
        Skew4::from_matrix(&(x * y - y * x))
    }
}

impl Commutator for CMat4 {
    fn commutator(&self, other: &CMat4) -> CMat4 {
        self * other - other * self
    }
}

/// Assembles the skew matrix from the pair `(M+, M-)`:
///
/// ```text
///  0     -M+3   M+2  -M-1
///  M+3    0    -M+1  -M-2
/// -M+2    M+1   0    -M-3
///  M-1    M-2   M-3   0
/// ```
pub fn pack(mplus: &Vec3, mminus: &Vec3) -> Skew4 {
    Skew4::new(
        -mplus[2],
        mplus[1],
        -mminus[0],
        -mplus[0],
        -mminus[1],
        -mminus[2],
    )
}

/// Inverse of [`pack`].
pub fn unpack(m: &Skew4) -> (Vec3, Vec3) {
    (
        Vec3::new(-m.m23, m.m13, -m.m12),
        Vec3::new(-m.m14, -m.m24, -m.m34),
    )
}

/// so(3)+so(3) components `((M+ + M-)/2, (M+ - M-)/2)`.
pub fn split(m: &Skew4) -> (Vec3, Vec3) {
    let (p, q) = unpack(m);
    ((p + q) * 0.5, (p - q) * 0.5)
}

/// Inverse of [`split`].
pub fn merge(first: &Vec3, second: &Vec3) -> Skew4 {
    pack(&(first + second), &(first - second))
}

/// Polynomial in the spectral parameter with 4x4 complex coefficients,
/// lowest degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct MatPoly {
    pub coeffs: Vec<CMat4>,
}

impl MatPoly {
    pub fn new(coeffs: Vec<CMat4>) -> Self {
        MatPoly { coeffs }
    }

    pub fn from_skew(coeffs: &[Skew4]) -> Self {
        MatPoly::new(coeffs.iter().map(Skew4::to_complex).collect())
    }

    pub fn identity() -> Self {
        MatPoly::new(vec![CMat4::identity()])
    }

    pub fn eval(&self, lambda: Complex64) -> CMat4 {
        self.coeffs
            .iter()
            .rev()
            .fold(CMat4::zeros(), |acc, c| acc * lambda + c)
    }
}

fn basis_change() -> &'static (CMat4, CMat4) {
    static CACHE: OnceLock<(CMat4, CMat4)> = OnceLock::new();
    CACHE.get_or_init(|| {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        let r = Complex64::new(h, 0.0);
        let i = Complex64::new(0.0, h);
        #[rustfmt::skip]
        let u = CMat4::new(
            z, z, i, r,
            z, z, r, i,
            i, r, z, z,
            r, i, z, z,
        );
        let inv = u.try_inverse().expect("basis change matrix is invertible");
        (u, inv)
    })
}

/// The constant basis change `U`.
pub fn basis_u() -> CMat4 {
    basis_change().0
}

/// `U^-1 X U` for a single matrix.
pub fn conjugate_tilde(x: &CMat4) -> CMat4 {
    let (u, inv) = basis_change();
    inv * x * u
}

/// Conjugates every coefficient of `l` by the basis change.
pub fn to_tilde(l: &MatPoly) -> MatPoly {
    MatPoly::new(l.coeffs.iter().map(conjugate_tilde).collect())
}

/// Complex coordinates of the conjugated Lax matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaCoords {
    pub x3: Complex64,
    pub x4: Complex64,
    pub y3: Complex64,
    pub y4: Complex64,
    /// `lambda^2 C12 + lambda M12 + G12`
    pub delta12: Poly,
    /// `lambda^2 C34 + lambda M34 + G34`
    pub delta34: Poly,
}

/// Values of the eight beta-type quantities and both deltas at a fixed `lambda`.
#[derive(Clone, Copy, Debug)]
pub struct BetaValues {
    pub beta3: Complex64,
    pub beta4: Complex64,
    pub beta3_star: Complex64,
    pub beta4_star: Complex64,
    pub delta12: Complex64,
    pub delta34: Complex64,
}

impl BetaCoords {
    pub fn beta3(&self) -> Poly {
        Poly::new(vec![self.x3, self.y3])
    }

    pub fn beta4(&self) -> Poly {
        Poly::new(vec![self.x4, self.y4])
    }

    /// Conjugates taken on the coefficients only: `conj(x3) + lambda conj(y3)`.
    pub fn beta3_star(&self) -> Poly {
        Poly::new(vec![self.x3.conj(), self.y3.conj()])
    }

    pub fn beta4_star(&self) -> Poly {
        Poly::new(vec![self.x4.conj(), self.y4.conj()])
    }

    pub fn at(&self, lambda: Complex64) -> BetaValues {
        BetaValues {
            beta3: self.x3 + lambda * self.y3,
            beta4: self.x4 + lambda * self.y4,
            beta3_star: self.x3.conj() + lambda * self.y3.conj(),
            beta4_star: self.x4.conj() + lambda * self.y4.conj(),
            delta12: self.delta12.eval(lambda),
            delta34: self.delta34.eval(lambda),
        }
    }

    /// The conjugated Lax matrix assembled entry by entry from the beta coordinates.
    pub fn tilde_matrix(&self, lambda: Complex64) -> CMat4 {
        let v = self.at(lambda);
        let i = Complex64::i();
        let z = Complex64::new(0.0, 0.0);
        let (b3, b4, b3s, b4s) = (v.beta3, v.beta4, v.beta3_star, v.beta4_star);
        #[rustfmt::skip]
        let m = CMat4::new(
            -i * v.delta34,   z,               -b3s - i * b4s,  i * b3 - b4,
            z,                i * v.delta34,   -i * b3s - b4s,  -b3 + i * b4,
            b3 - i * b4,      -i * b3 + b4,    -i * v.delta12,  z,
            i * b3s + b4s,    b3s + i * b4s,   z,               i * v.delta12,
        );
        m
    }
}

pub fn beta_coords(state: &BodyState, p: &Params) -> BetaCoords {
    let (m, g) = (&state.m, &state.g);
    let c = p.c_matrix();
    let half = |re: f64, im: f64| Complex64::new(re / 2.0, im / 2.0);
    BetaCoords {
        x3: half(g.m13, g.m23),
        x4: half(g.m14, g.m24),
        y3: half(m.m13, m.m23),
        y4: half(m.m14, m.m24),
        delta12: Poly::from_real(&[g.m12, m.m12, c.m12]),
        delta34: Poly::from_real(&[g.m34, m.m34, c.m34]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn skew_strategy() -> impl Strategy<Value = Skew4> {
        proptest::array::uniform6(-3.0f64..3.0).prop_map(Skew4::from_array)
    }

    fn vec3_strategy() -> impl Strategy<Value = Vec3> {
        proptest::array::uniform3(-3.0f64..3.0).prop_map(|a| Vec3::new(a[0], a[1], a[2]))
    }

    #[test]
    fn pack_zero_is_zero() {
        assert_eq!(pack(&Vec3::zeros(), &Vec3::zeros()), Skew4::ZERO);
        let (p, m) = unpack(&Skew4::ZERO);
        assert_eq!((p, m), (Vec3::zeros(), Vec3::zeros()));
    }

    #[test]
    fn pack_template_entries() {
        // first M+ coordinate sits at (2,3) with a minus sign
        let m = pack(&Vec3::new(1.0, 0.0, 0.0), &Vec3::zeros());
        assert_eq!(m, Skew4::new(0.0, 0.0, 0.0, -1.0, 0.0, 0.0));
        // (1,4) holds -M-1
        let (p, q) = unpack(&Skew4::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0));
        assert_eq!(p, Vec3::zeros());
        assert_eq!(q, Vec3::new(-1.0, 0.0, 0.0));
    }

    #[test]
    fn split_of_equal_halves() {
        let v = Vec3::new(0.3, -1.2, 2.0);
        let (a, b) = split(&pack(&v, &v));
        assert_eq!(a, v);
        assert_eq!(b, Vec3::zeros());
    }

    #[test]
    fn lambda_squared_coefficient_is_diagonal_after_basis_change() {
        let p = Params::new(1.0, 2.0, 0.3, 0.1).unwrap();
        let l = MatPoly::from_skew(&[Skew4::ZERO, Skew4::ZERO, p.c_matrix()]);
        let lt = to_tilde(&l);
        let want = [
            Complex64::new(0.0, -0.3),
            Complex64::new(0.0, 0.3),
            Complex64::new(0.0, -0.9),
            Complex64::new(0.0, 0.9),
        ];
        for i in 0..4 {
            for j in 0..4 {
                let w = if i == j { want[i] } else { Complex64::new(0.0, 0.0) };
                assert!((lt.coeffs[2][(i, j)] - w).norm() < 1e-15, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn identity_unchanged_by_basis_change() {
        let t = to_tilde(&MatPoly::identity());
        assert!((t.coeffs[0] - CMat4::identity()).norm() < 1e-15);
        let (u, inv) = basis_change();
        assert!((u * inv - CMat4::identity()).norm() < 1e-15);
    }

    #[test]
    fn zero_state_beta_coords() {
        let p = Params::new(1.0, 2.0, 0.3, 0.1).unwrap();
        let bc = beta_coords(&BodyState::ZERO, &p);
        assert_eq!(bc.x3, Complex64::new(0.0, 0.0));
        assert_eq!(bc.y4, Complex64::new(0.0, 0.0));
        assert!(bc.delta12.max_coeff_diff(&Poly::from_real(&[0.0, 0.0, 0.9])) < 1e-15);
        let g = Skew4::new(0.0, 2.0, 0.0, 0.0, 0.0, 0.0);
        let bc = beta_coords(&BodyState::new(Skew4::ZERO, g), &p);
        assert_eq!(bc.x3, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn tilde_lax_matrix_matches_beta_assembly() {
        use crate::dynamics::lax_pair;
        use crate::sampling::{random_params, random_state};
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for k in 0..50 {
            let p = random_params(&mut rng);
            let s = random_state(&mut rng);
            let lam = Complex64::new(0.1 * k as f64 - 2.0, 0.3 - 0.02 * k as f64);
            let l = MatPoly::from_skew(&[s.g, s.m, p.c_matrix()]);
            let lt = to_tilde(&l).eval(lam);
            let (direct, _) = lax_pair(&s, &p, lam);
            assert!((conjugate_tilde(&direct) - lt).norm() < 1e-12);
            let assembled = beta_coords(&s, &p).tilde_matrix(lam);
            assert!((assembled - lt).norm() < 1e-12, "residual {}", (assembled - lt).norm());
            for (i, j) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
                assert!(lt[(i, j)].norm() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn pack_unpack_roundtrip(u in vec3_strategy(), v in vec3_strategy()) {
            let (a, b) = unpack(&pack(&u, &v));
            prop_assert!((a - u).norm() < 1e-15 && (b - v).norm() < 1e-15);
        }

        #[test]
        fn split_merge_roundtrip(m in skew_strategy()) {
            let (first, second) = split(&m);
            prop_assert!((merge(&first, &second) - m).max_abs() < 1e-15);
            let (p, q) = unpack(&m);
            prop_assert!((first + second - p).norm() < 1e-15);
            prop_assert!((first - second - q).norm() < 1e-15);
        }

        #[test]
        fn matrix_roundtrip(m in skew_strategy()) {
            let full = m.to_matrix();
            prop_assert!((full + full.transpose()).norm() == 0.0);
            prop_assert_eq!(Skew4::from_matrix(&full), m);
        }

        #[test]
        fn commutator_identities(x in skew_strategy(), y in skew_strategy(), z in skew_strategy(), s in -2.0f64..2.0) {
            prop_assert!(x.commutator(&x).max_abs() == 0.0);
            // skew-symmetry of the full commutator matrix
            let full = x.to_matrix() * y.to_matrix() - y.to_matrix() * x.to_matrix();
            prop_assert!((full + full.transpose()).norm() < 1e-13);
            // bilinearity
            let lhs = (x * s + z).commutator(&y);
            let rhs = x.commutator(&y) * s + z.commutator(&y);
            prop_assert!((lhs - rhs).max_abs() < 1e-13);
            let jacobi = x.commutator(&y.commutator(&z))
                + y.commutator(&z.commutator(&x))
                + z.commutator(&x.commutator(&y));
            prop_assert!(jacobi.max_abs() < 1e-13);
            // a multiple of the identity commutes with everything
            let cx = x.to_complex();
            let scalar = CMat4::identity() * Complex64::new(s, 0.7);
            prop_assert!(cx.commutator(&scalar).norm() < 1e-15);
        }

        #[test]
        fn basis_change_preserves_characteristic_polynomial(m in skew_strategy()) {
            let x = m.to_complex();
            let t = conjugate_tilde(&x);
            prop_assert!((x.trace() - t.trace()).norm() < 1e-10);
            prop_assert!((x.determinant() - t.determinant()).norm() < 1e-10);
            prop_assert!(((x * x).trace() - (t * t).trace()).norm() < 1e-10);
            prop_assert!(((x * x * x).trace() - (t * t * t).trace()).norm() < 1e-10);
        }
    }
}
