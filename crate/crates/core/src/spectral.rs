//! Spectral curve `det(L~(l) - mu) = mu^4 + P(l) mu^2 + Q(l)^2` of the Lax matrix:
//! the two routes to `P` and `Q`, genus bookkeeping for the quotient by
//! `mu -> -mu`, the double points over the zeros of `Q`, the closed-form
//! eigenvector and the elliptic covering curves `v^2 = s (P/2 ± Q)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{beta_coords, conjugate_tilde, CMat4, CVec4};
use crate::dynamics::{lax_pair, BodyState, Params, Trajectory};
use crate::error::{Error, Result};
use crate::invariants::integral_set;
use crate::poly::{Poly, SCHUR_MAX_ITER, TRIM_TOL};
use crate::reduction::{cubic_data, elliptic_curves, reduction_constants, to_twisted};

/// Relative tolerance of the numerical gcd used for squarefreeness.
pub const SQUAREFREE_TOL: f64 = 1e-9;

/// `(P, Q)` from the delta/beta coordinates of the conjugated Lax matrix.
pub fn pq_from_state(s: &BodyState, p: &Params) -> (Poly, Poly) {
    let bc = beta_coords(s, p);
    let (b3, b4, b3s, b4s) = (bc.beta3(), bc.beta4(), bc.beta3_star(), bc.beta4_star());
    let four = Complex64::new(4.0, 0.0);
    let two_i = Complex64::new(0.0, 2.0);
    let pp = &(&(&bc.delta12 * &bc.delta12) + &(&bc.delta34 * &bc.delta34))
        + &(&(&b3 * &b3s) + &(&b4 * &b4s)).scale(four);
    let qq = &(&bc.delta12 * &bc.delta34) + &(&(&b3s * &b4) - &(&b3 * &b4s)).scale(two_i);
    (pp, qq)
}

/// `(P, Q)` assembled from the ten integral coefficients.
pub fn pq_from_integrals(s: &BodyState, p: &Params) -> (Poly, Poly) {
    let set = integral_set(s, p);
    (set.p_poly(), set.q_poly())
}

/// Monic characteristic polynomial `det(mu - X)`, lowest degree first, by the
/// Faddeev–LeVerrier recursion.
pub fn char_poly(x: &CMat4) -> [Complex64; 5] {
    let mut c = [Complex64::new(0.0, 0.0); 5];
    c[4] = Complex64::new(1.0, 0.0);
    let mut m = CMat4::zeros();
    for k in 1..=4 {
        m = x * m + CMat4::identity() * c[5 - k];
        c[4 - k] = -(x * m).trace() / k as f64;
    }
    c
}

/// Largest coefficient mismatch between `det(L~(l) - mu)` and `mu^4 + P mu^2 + Q^2`
/// at one value of `l`. Odd powers of `mu` must vanish.
pub fn char_poly_check(s: &BodyState, p: &Params, lambda: Complex64) -> f64 {
    let lt = conjugate_tilde(&lax_pair(s, p, lambda).0);
    // det(X - mu) = det(mu - X) for a 4x4 matrix
    let c = char_poly(&lt);
    let (pp, qq) = pq_from_state(s, p);
    let (pv, qv) = (pp.eval(lambda), qq.eval(lambda));
    [c[3].norm(), c[1].norm(), (c[2] - pv).norm(), (c[0] - qv * qv).norm()]
        .into_iter()
        .fold(0.0, f64::max)
}

/// Odd-in-`mu` coefficients of the characteristic polynomial alone.
pub fn odd_coefficient_residual(s: &BodyState, p: &Params, lambda: Complex64) -> f64 {
    let lt = conjugate_tilde(&lax_pair(s, p, lambda).0);
    let c = char_poly(&lt);
    c[3].norm().max(c[1].norm())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveSummary {
    /// `P^2/4 - Q^2`, the branch polynomial of the quotient curve.
    pub disc8: Poly,
    pub disc_degree: Option<usize>,
    pub qroots: Vec<Complex64>,
    pub squarefree: bool,
    pub q_roots_simple: bool,
    pub genus_gamma1: Option<u32>,
    pub arith_genus_gamma: Option<u32>,
    pub genus_normalized: Option<u32>,
    pub degeneracy: Option<String>,
}

/// Genus data of the spectral curve and its quotient. Genus fields stay unset and
/// `degeneracy` explains why when the branch polynomial is not squarefree or `Q`
/// has repeated roots.
pub fn curve_summary(pp: &Poly, qq: &Poly) -> Result<CurveSummary> {
    let quarter = Complex64::new(0.25, 0.0);
    let disc8 = &(pp * pp).scale(quarter) - &(qq * qq);
    let disc_degree = disc8.degree(TRIM_TOL);
    let q = qq.trimmed(TRIM_TOL);
    let qroots = q.roots()?;
    let squarefree = disc8.is_squarefree(SQUAREFREE_TOL);
    let q_roots_simple = q.is_squarefree(SQUAREFREE_TOL);

    let mut summary = CurveSummary {
        disc8,
        disc_degree,
        qroots,
        squarefree,
        q_roots_simple,
        genus_gamma1: None,
        arith_genus_gamma: None,
        genus_normalized: None,
        degeneracy: None,
    };
    let deg = match disc_degree {
        Some(d) if d >= 3 => d,
        other => {
            summary.degeneracy = Some(format!("branch polynomial degree {other:?}"));
            return Ok(summary);
        }
    };
    if !squarefree {
        summary.degeneracy = Some("branch polynomial has a repeated root".into());
        return Ok(summary);
    }
    if !q_roots_simple {
        summary.degeneracy = Some("Q has a repeated root".into());
        return Ok(summary);
    }
    // hyperelliptic genus from the number of branch points (a point at infinity
    // is added when the degree is odd)
    let g1 = ((deg + deg % 2) / 2 - 1) as u32;
    // mu^2 = u is branched over the zeros of u, i.e. over the 2 deg Q zeros of Q^2
    let ramification = 2 * summary.qroots.len() as u32;
    let ga = 2 * g1 - 1 + ramification / 2;
    let double_points = summary.qroots.len() as u32;
    summary.genus_gamma1 = Some(g1);
    summary.arith_genus_gamma = Some(ga);
    summary.genus_normalized = Some(ga - double_points);
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublePointReport {
    pub points: Vec<Complex64>,
    /// max over points of `|p|`, `|dp/dl|`, `|dp/dmu|` at `(l_k, 0)`, divided by `scale`.
    pub residual: f64,
    /// max over points of `|det L~(l_k)|` from the matrix itself, divided by `scale`.
    pub matrix_det_residual: f64,
    /// Hessian determinants `4 P(l_k) Q'(l_k)^2`; nonzero means the node is ordinary.
    pub hessian_dets: Vec<Complex64>,
    pub scale: f64,
}

fn curve_scale(pp: &Poly, qq: &Poly) -> f64 {
    let m = pp.max_abs_coeff().max(qq.max_abs_coeff());
    1.0 + m * m
}

/// Checks that `(l_k, 0)` is a singular point of the spectral curve at every root
/// `l_k` of `Q`.
pub fn double_point_check(s: &BodyState, p: &Params) -> Result<DoublePointReport> {
    let (pp, qq) = pq_from_state(s, p);
    let q = qq.trimmed(TRIM_TOL);
    if !q.is_squarefree(SQUAREFREE_TOL) {
        return Err(Error::Degenerate("Q has a repeated root".into()));
    }
    let scale = curve_scale(&pp, &qq);
    let roots = q.roots()?;
    let dq = qq.derivative();
    let mut residual: f64 = 0.0;
    let mut det_res: f64 = 0.0;
    let mut hess = Vec::with_capacity(roots.len());
    for &lam in &roots {
        let qv = qq.eval(lam);
        // p = mu^4 + P mu^2 + Q^2 at mu = 0
        let value = qv * qv;
        let d_lambda = Complex64::new(2.0, 0.0) * qv * dq.eval(lam);
        let d_mu = Complex64::new(0.0, 0.0);
        residual = residual.max(value.norm()).max(d_lambda.norm()).max(d_mu.norm());
        let lt = conjugate_tilde(&lax_pair(s, p, lam).0);
        det_res = det_res.max(lt.determinant().norm());
        let dqv = dq.eval(lam);
        hess.push(Complex64::new(4.0, 0.0) * pp.eval(lam) * dqv * dqv);
    }
    Ok(DoublePointReport {
        points: roots,
        residual: residual / scale,
        matrix_det_residual: det_res / scale,
        hessian_dets: hess,
        scale,
    })
}

/// `p(l, mu)` from the scalar polynomials.
pub fn spectral_polynomial(pp: &Poly, qq: &Poly, lambda: Complex64, mu: Complex64) -> Complex64 {
    let (pv, qv) = (pp.eval(lambda), qq.eval(lambda));
    let mu2 = mu * mu;
    mu2 * mu2 + pv * mu2 + qv * qv
}

/// Closed-form (unnormalized) eigenvector of `L~(l)` for the eigenvalue `mu`.
pub fn eigenvector(s: &BodyState, p: &Params, lambda: Complex64, mu: Complex64) -> Result<CVec4> {
    let (pp, qq) = pq_from_state(s, p);
    let scale = curve_scale(&pp, &qq) * (1.0 + mu.norm()).powi(4);
    let on_curve = spectral_polynomial(&pp, &qq, lambda, mu).norm();
    if on_curve > 1e-8 * scale {
        return Err(Error::Precondition(format!(
            "(lambda, mu) is off the spectral curve: |p| = {on_curve:e}"
        )));
    }
    let v = beta_coords(s, p).at(lambda);
    let i = Complex64::i();
    let two = Complex64::new(2.0, 0.0);
    let (b3, b4, b3s, b4s) = (v.beta3, v.beta4, v.beta3_star, v.beta4_star);
    let (d12, d34) = (v.delta12, v.delta34);
    let cross = b3 * b4s - b3s * b4;
    let f1 = (d12 * d12 + mu * mu) * (i * d34 - mu) - two * mu * (b3 * b3s + b4 * b4s)
        + two * d12 * (b3 * b4s - b4 * b3s);
    let f2 = two * mu * (b3 - i * b4) * (i * b3s + b4s);
    let f3 = (-b3 + i * b4) * ((i * d12 - mu) * (i * d34 - mu) + two * i * cross);
    let f4 = (i * b3s + b4s) * ((i * d12 + mu) * (i * d34 - mu) + two * i * cross);
    let f = CVec4::new(f1, f2, f3, f4);
    let fscale = (1.0 + d12.norm() + d34.norm() + b3.norm() + b4.norm() + mu.norm()).powi(3);
    if f.norm() <= 1e-10 * fscale {
        return Err(Error::Degenerate(format!(
            "eigenvector formula vanishes at lambda = {lambda}, mu = {mu}"
        )));
    }
    Ok(f)
}

/// `|L~ f - mu f| / |f|`.
pub fn eigen_residual(s: &BodyState, p: &Params, lambda: Complex64, mu: Complex64, f: &CVec4) -> f64 {
    let lt = conjugate_tilde(&lax_pair(s, p, lambda).0);
    (lt * f - f * mu).norm() / f.norm()
}

/// Eigenvalues from a complex Schur decomposition and unit eigenvectors from the
/// right singular vector of `X - mu` with the smallest singular value.
pub fn dense_eigenpairs(x: &CMat4) -> Result<Vec<(Complex64, CVec4)>> {
    let dyn_x = DMatrix::from_fn(4, 4, |i, j| x[(i, j)]);
    let eig = dyn_x
        .try_schur(f64::EPSILON, SCHUR_MAX_ITER)
        .and_then(|s| s.eigenvalues())
        .ok_or(Error::NonConvergence {
            iterations: SCHUR_MAX_ITER,
            last_update: f64::NAN,
        })?;
    let mut out = Vec::with_capacity(4);
    for &mu in eig.iter() {
        let shifted = x - CMat4::identity() * mu;
        let svd = shifted.svd(false, true);
        let v_t = svd
            .v_t
            .ok_or_else(|| Error::Degenerate("SVD did not return V".into()))?;
        let (k, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("four singular values");
        let row = v_t.row(k);
        let v = CVec4::new(row[0].conj(), row[1].conj(), row[2].conj(), row[3].conj());
        out.push((mu, v));
    }
    Ok(out)
}

/// Sine of the angle between two complex vectors.
pub fn sine_angle(u: &CVec4, v: &CVec4) -> f64 {
    let cos = u.dotc(v).norm() / (u.norm() * v.norm());
    (1.0 - cos.min(1.0).powi(2)).max(0.0).sqrt()
}

/// Largest drift of `P(l)` and `Q(l)` over the trajectory at the given sample
/// points, relative to the initial values.
pub fn isospectral_drift(t: &Trajectory, lambdas: &[Complex64]) -> f64 {
    let p = &t.params;
    let (p0, q0) = pq_from_state(&t.states[0], p);
    let base: Vec<(Complex64, Complex64)> = lambdas.iter().map(|&l| (p0.eval(l), q0.eval(l))).collect();
    let mut drift: f64 = 0.0;
    for s in &t.states {
        let (pp, qq) = pq_from_state(s, p);
        for (&l, &(pv, qv)) in lambdas.iter().zip(&base) {
            drift = drift
                .max((pp.eval(l) - pv).norm() / (1.0 + pv.norm()))
                .max((qq.eval(l) - qv).norm() / (1.0 + qv.norm()));
        }
    }
    drift
}

/// The two elliptic curves `v^2 = s (P/2 + Q)` and `v^2 = s (P/2 - Q)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringCurves {
    pub s: f64,
    pub plus: Poly,
    pub minus: Poly,
}

pub fn covering_scale(p: &Params) -> f64 {
    2.0 / (p.a() + p.b()).powi(2)
}

pub fn covering_curves(pp: &Poly, qq: &Poly, p: &Params) -> CoveringCurves {
    let s = covering_scale(p);
    let half = pp.scale_real(0.5);
    CoveringCurves {
        s,
        plus: (&half + qq).scale_real(s),
        minus: (&half - qq).scale_real(s),
    }
}

/// Sign pattern of the `Gamma13, Gamma24` pair in the cubic coefficient of the
/// covering quartics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CubicTermForm {
    /// `(M13 ∓ M24)(Gamma13 ∓ Gamma24)`
    #[default]
    Corrected,
    /// `(M13 ∓ M24)(Gamma13 ± Gamma24)`
    AsPrinted,
}

/// Closed-form coefficients of `P/2 ± Q` (before scaling by `s`), lowest degree
/// first, as `(plus, minus)`. The constant term is the literal 2 valid for unit
/// so(3) halves of `Gamma`.
pub fn covering_coefficients(s: &BodyState, p: &Params, form: CubicTermForm) -> ([f64; 5], [f64; 5]) {
    let (m, g) = (&s.m, &s.g);
    let c = p.c_matrix();
    let coeffs = |sg: f64| -> [f64; 5] {
        let cs = c.m12 + sg * c.m34;
        let m_a = m.m12 + sg * m.m34;
        let m_b = m.m23 + sg * m.m14;
        let m_c = m.m13 - sg * m.m24;
        let g_a = g.m12 + sg * g.m34;
        let g_b = g.m23 + sg * g.m14;
        let g_c = match form {
            CubicTermForm::Corrected => g.m13 - sg * g.m24,
            CubicTermForm::AsPrinted => g.m13 + sg * g.m24,
        };
        let a0 = 0.5 * cs * cs;
        let a1 = cs * m_a;
        let a2 = 0.5 * (m_a * m_a + m_b * m_b + m_c * m_c) + cs * g_a;
        let a3 = m_a * g_a + m_b * g_b + m_c * g_c;
        [2.0, a3, a2, a1, a0]
    };
    (coeffs(1.0), coeffs(-1.0))
}

/// Weierstrass invariants of an elliptic curve `y^2 = 4x^3 - g2 x - g3`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct QuarticInvariants {
    pub g2: f64,
    pub g3: f64,
    /// `g2^3 - 27 g3^2`
    pub discriminant: f64,
}

impl QuarticInvariants {
    pub fn new(g2: f64, g3: f64) -> Self {
        QuarticInvariants {
            g2,
            g3,
            discriminant: g2.powi(3) - 27.0 * g3 * g3,
        }
    }
}

/// Invariants of `y^2 = a x^4 + 4b x^3 + 6c x^2 + 4d x + e`:
/// `g2 = ae - 4bd + 3c^2`, `g3 = ace + 2bcd - ad^2 - eb^2 - c^3`.
pub fn weierstrass_from_quartic(q: &Poly) -> Result<QuarticInvariants> {
    if q.degree(TRIM_TOL) != Some(4) || q.storage_degree() != Some(4) {
        return Err(Error::Precondition(format!(
            "expected a quartic, got degree {:?}",
            q.degree(TRIM_TOL)
        )));
    }
    let r = q.real_coeffs();
    let (e, d, c, b, a) = (r[0], r[1] / 4.0, r[2] / 6.0, r[3] / 4.0, r[4]);
    Ok(QuarticInvariants::new(
        a * e - 4.0 * b * d + 3.0 * c * c,
        a * c * e + 2.0 * b * c * d - a * d * d - e * b * b - c * c * c,
    ))
}

/// Invariants of `y^2 = -4u^3 - 4B u^2 + 4C u + D` after `u = -(w + B/3)`.
pub fn weierstrass_from_cubic(b: f64, c: f64, d: f64) -> QuarticInvariants {
    QuarticInvariants::new(
        4.0 * (b * b / 3.0 + c),
        4.0 * (2.0 * b.powi(3) / 27.0 + b * c / 3.0 - d / 4.0),
    )
}

/// Distance between two invariant pairs modulo the isomorphisms `(g2, g3) -> (g2, -g3)`
/// (the substitution `x -> -x`, `y -> i y`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InvariantMatch {
    pub g2_rel: f64,
    pub g3_rel: f64,
    /// `+1` when `g3` agrees as is, `-1` when it agrees after the sign flip.
    pub g3_sign: i8,
}

impl InvariantMatch {
    pub fn max_rel(&self) -> f64 {
        self.g2_rel.max(self.g3_rel)
    }
}

pub fn match_invariants(x: &QuarticInvariants, y: &QuarticInvariants) -> InvariantMatch {
    // weights: g2 scales like t^4 and g3 like t^6
    let unit = x.g2.abs().max(y.g2.abs()).sqrt().max((x.g3.abs().max(y.g3.abs())).cbrt());
    let unit = if unit > 0.0 { unit } else { 1.0 };
    let g2_rel = (x.g2 - y.g2).abs() / unit.powi(2);
    let same = (x.g3 - y.g3).abs() / unit.powi(3);
    let flipped = (x.g3 + y.g3).abs() / unit.powi(3);
    let (g3_rel, g3_sign) = if same <= flipped { (same, 1) } else { (flipped, -1) };
    InvariantMatch {
        g2_rel,
        g3_rel,
        g3_sign,
    }
}

/// Comparison of the covering-curve invariants with those of the two reduced
/// elliptic curves, under both possible pairings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringMatch {
    pub plus: QuarticInvariants,
    pub minus: QuarticInvariants,
    pub first: QuarticInvariants,
    pub second: QuarticInvariants,
    /// `plus <-> first`, `minus <-> second`
    pub direct: [InvariantMatch; 2],
    /// `plus <-> second`, `minus <-> first`
    pub swapped: [InvariantMatch; 2],
    /// `"plus-first"` or `"plus-second"`, whichever matches better.
    pub pairing: &'static str,
    pub max_rel: f64,
}

pub fn covering_match(s: &BodyState, p: &Params) -> Result<CoveringMatch> {
    let (pp, qq) = pq_from_state(s, p);
    let curves = covering_curves(&pp, &qq, p);
    let plus = weierstrass_from_quartic(&curves.plus)?;
    let minus = weierstrass_from_quartic(&curves.minus)?;
    let ts = to_twisted(s, p)?;
    let rc = reduction_constants(&ts, p);
    let (first, second) = elliptic_curves(&cubic_data(&rc));
    let direct = [match_invariants(&plus, &first), match_invariants(&minus, &second)];
    let swapped = [match_invariants(&plus, &second), match_invariants(&minus, &first)];
    let worst = |m: &[InvariantMatch; 2]| m[0].max_rel().max(m[1].max_rel());
    let (pairing, max_rel) = if worst(&direct) <= worst(&swapped) {
        ("plus-first", worst(&direct))
    } else {
        ("plus-second", worst(&swapped))
    };
    Ok(CoveringMatch {
        plus,
        minus,
        first,
        second,
        direct,
        swapped,
        pairing,
        max_rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Skew4;
    use crate::dynamics::{integrate, Method};
    use crate::sampling::{random_params, random_state};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_lambda(r: &mut ChaCha8Rng) -> Complex64 {
        Complex64::new(r.random_range(-2.0..2.0), r.random_range(-1.0..1.0))
    }

    #[test]
    fn zero_state_polynomials() {
        let p = Params::new(1.0, 2.0, 0.3, 0.1).unwrap();
        let (pp, qq) = pq_from_state(&BodyState::ZERO, &p);
        assert!(pp.max_coeff_diff(&Poly::from_real(&[0.0, 0.0, 0.0, 0.0, 0.9])) < 1e-15);
        assert!(qq.max_coeff_diff(&Poly::from_real(&[0.0, 0.0, 0.0, 0.0, 0.27])) < 1e-15);
        assert!(char_poly_check(&BodyState::ZERO, &p, Complex64::new(1.0, 0.0)) < 1e-12);
    }

    #[test]
    fn two_routes_to_p_and_q_agree() {
        let mut r = rng(101);
        for _ in 0..100 {
            let p = random_params(&mut r);
            let s = random_state(&mut r);
            let (p9, q9) = pq_from_state(&s, &p);
            let (p11, q11) = pq_from_integrals(&s, &p);
            assert!(p9.max_coeff_diff(&p11) < 1e-11);
            assert!(q9.max_coeff_diff(&q11) < 1e-11);
            assert!(p9.max_imag() < 1e-12 && q9.max_imag() < 1e-12);
        }
    }

    #[test]
    fn characteristic_polynomial_has_even_form() {
        let mut r = rng(103);
        for _ in 0..50 {
            let p = random_params(&mut r);
            let s = random_state(&mut r);
            let lam = random_lambda(&mut r);
            assert!(char_poly_check(&s, &p, lam) < 1e-10);
            assert!(odd_coefficient_residual(&s, &p, lam) < 1e-12);
        }
    }

    #[test]
    fn faddeev_leverrier_matches_determinant() {
        let mut r = rng(107);
        let x = CMat4::from_fn(|_, _| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
        let c = char_poly(&x);
        assert!((c[0] - x.determinant()).norm() < 1e-13);
        assert!((c[3] + x.trace()).norm() < 1e-14);
    }

    #[test]
    fn generic_curve_genus_triple() {
        let mut r = rng(109);
        for _ in 0..20 {
            let p = random_params(&mut r);
            let s = random_state(&mut r);
            let (pp, qq) = pq_from_state(&s, &p);
            let cs = curve_summary(&pp, &qq).unwrap();
            assert_eq!(cs.disc_degree, Some(8));
            assert_eq!(cs.qroots.len(), 4);
            assert_eq!(
                (cs.genus_gamma1, cs.arith_genus_gamma, cs.genus_normalized),
                (Some(3), Some(9), Some(5)),
                "{:?}",
                cs.degeneracy
            );
        }
    }

    #[test]
    fn repeated_branch_point_is_reported() {
        // P = 2 (l^4 + 1) and Q = l^4 + 1 give P^2/4 - Q^2 = 0 identically
        let pp = Poly::from_real(&[2.0, 0.0, 0.0, 0.0, 2.0]);
        let qq = Poly::from_real(&[1.0, 0.0, 0.0, 0.0, 1.0]);
        let cs = curve_summary(&pp, &qq).unwrap();
        assert!(cs.degeneracy.is_some());
        assert_eq!(cs.genus_gamma1, None);
        // a perfect square branch polynomial
        let pp = Poly::from_real(&[2.0, 0.0, 4.0, 0.0, 2.0]);
        let qq = Poly::from_real(&[0.0, 0.0, 1.0]);
        let cs = curve_summary(&pp, &qq).unwrap();
        assert!(!cs.squarefree || !cs.q_roots_simple);
        assert_eq!(cs.genus_normalized, None);
    }

    #[test]
    fn double_points_over_zeros_of_q() {
        let mut r = rng(113);
        for _ in 0..20 {
            let p = random_params(&mut r);
            let s = random_state(&mut r);
            let dp = double_point_check(&s, &p).unwrap();
            assert_eq!(dp.points.len(), 4);
            assert!(dp.residual < 1e-8, "{dp:?}");
            assert!(dp.matrix_det_residual < 1e-8, "{dp:?}");
            assert!(dp.hessian_dets.iter().all(|h| h.norm() > 1e-10));
        }
    }

    #[test]
    fn eigenvector_formula_against_dense_solver() {
        let mut r = rng(127);
        let mut checked = 0;
        while checked < 50 {
            let p = random_params(&mut r);
            let s = random_state(&mut r);
            let lam = random_lambda(&mut r);
            let lt = conjugate_tilde(&lax_pair(&s, &p, lam).0);
            for (mu, v) in dense_eigenpairs(&lt).unwrap() {
                let f = eigenvector(&s, &p, lam, mu).unwrap();
                assert!(eigen_residual(&s, &p, lam, mu, &f) < 1e-7);
                assert!(sine_angle(&f, &v) < 1e-6);
                checked += 1;
            }
        }
    }

    #[test]
    fn eigenvector_rejects_points_off_the_curve() {
        let mut r = rng(131);
        let p = random_params(&mut r);
        let s = random_state(&mut r);
        let err = eigenvector(&s, &p, Complex64::new(0.3, 0.0), Complex64::new(5.0, 1.0));
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn eigenvector_at_double_point_is_reported() {
        let mut r = rng(137);
        let p = random_params(&mut r);
        let s = random_state(&mut r);
        let dp = double_point_check(&s, &p).unwrap();
        // mu = 0 is a double eigenvalue there: the formula either degenerates or
        // still returns a genuine eigenvector
        for &lam in &dp.points {
            match eigenvector(&s, &p, lam, Complex64::new(0.0, 0.0)) {
                Ok(f) => assert!(eigen_residual(&s, &p, lam, Complex64::new(0.0, 0.0), &f) < 1e-7),
                Err(e) => assert!(matches!(e, Error::Degenerate(_)), "{e}"),
            }
        }
    }

    #[test]
    fn isospectral_drift_is_small_and_fourth_order() {
        let mut r = rng(139);
        let p = random_params(&mut r);
        let s = random_state(&mut r);
        let lams: Vec<Complex64> = (0..5).map(|_| random_lambda(&mut r)).collect();
        let fixed = BodyState::new(Skew4::ZERO, p.chi());
        let still = integrate(&fixed, &p, 1e-2, 20, Method::Rk4).unwrap();
        assert_eq!(isospectral_drift(&still, &lams), 0.0);
        let t = integrate(&s, &p, 1e-3, 10_000, Method::Rk4).unwrap();
        assert!(isospectral_drift(&t, &lams) < 1e-6);
        let coarse = isospectral_drift(&integrate(&s, &p, 1e-2, 1000, Method::Rk4).unwrap(), &lams);
        let fine = isospectral_drift(&integrate(&s, &p, 5e-3, 2000, Method::Rk4).unwrap(), &lams);
        let ratio = coarse / fine;
        assert!((11.0..23.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn covering_scale_value() {
        let p = Params::new(1.0, 2.0, 0.3, 0.1).unwrap();
        assert!((covering_scale(&p) - 2.0 / 9.0).abs() < 1e-16);
    }

    #[test]
    fn covering_quartics_factor_the_branch_polynomial() {
        let mut r = rng(149);
        for _ in 0..20 {
            let p = random_params(&mut r);
            let s = random_state(&mut r);
            let (pp, qq) = pq_from_state(&s, &p);
            let cc = covering_curves(&pp, &qq, &p);
            let prod = (&cc.plus * &cc.minus).scale_real(1.0 / (cc.s * cc.s));
            let disc = &(&pp * &pp).scale_real(0.25) - &(&qq * &qq);
            assert!(prod.max_coeff_diff(&disc) < 1e-10);
            // unit so(3) halves of Gamma make the unscaled constant terms equal 2
            assert!((cc.plus.coeff(0).re / cc.s - 2.0).abs() < 1e-9);
            assert!((cc.minus.coeff(0).re / cc.s - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn closed_form_covering_coefficients() {
        let mut r = rng(151);
        for _ in 0..20 {
            let p = random_params(&mut r);
            let s = random_state(&mut r);
            let (pp, qq) = pq_from_state(&s, &p);
            let cc = covering_curves(&pp, &qq, &p);
            let (plus, minus) = covering_coefficients(&s, &p, CubicTermForm::Corrected);
            let unscaled = |q: &Poly| q.scale_real(1.0 / cc.s);
            assert!(unscaled(&cc.plus).max_coeff_diff(&Poly::from_real(&plus)) < 1e-10);
            assert!(unscaled(&cc.minus).max_coeff_diff(&Poly::from_real(&minus)) < 1e-10);
            let (pp_printed, _) = covering_coefficients(&s, &p, CubicTermForm::AsPrinted);
            let off = (pp_printed[1] - plus[1]).abs();
            assert!((off - (2.0 * (s.m.m13 - s.m.m24) * s.g.m24).abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn quartic_invariants_examples() {
        let q = Poly::from_real(&[1.0, 0.0, 0.0, 0.0, 1.0]);
        let inv = weierstrass_from_quartic(&q).unwrap();
        assert_eq!((inv.g2, inv.g3), (1.0, 0.0));
        let cubic = Poly::from_real(&[1.0, 0.0, 0.0, 4.0]);
        assert!(weierstrass_from_quartic(&cubic).is_err());
        let z = weierstrass_from_cubic(0.0, 0.0, 0.0);
        assert_eq!((z.g2, z.g3), (0.0, 0.0));
    }

    #[test]
    fn cubic_invariants_by_substitution() {
        // expand -4u^3 - 4B u^2 + 4C u + D at u = -(w + B/3) and read off 4w^3 - g2 w - g3
        let mut r = rng(157);
        for _ in 0..20 {
            let (b, c, d) = (r.random_range(-2.0..2.0), r.random_range(-2.0..2.0), r.random_range(-2.0..0.0));
            let cubic = Poly::from_real(&[d, 4.0 * c, -4.0 * b, -4.0]);
            let u = Poly::from_real(&[-b / 3.0, -1.0]);
            let mut composed = Poly::zero();
            let mut power = Poly::from_real(&[1.0]);
            for k in 0..4 {
                composed = &composed + &power.scale(cubic.coeff(k));
                power = &power * &u;
            }
            assert!((composed.coeff(3).re - 4.0).abs() < 1e-13);
            assert!(composed.coeff(2).norm() < 1e-13);
            let inv = weierstrass_from_cubic(b, c, d);
            assert!((-composed.coeff(1).re - inv.g2).abs() < 1e-12);
            assert!((-composed.coeff(0).re - inv.g3).abs() < 1e-12);
        }
    }

    #[test]
    fn covering_curves_are_the_reduced_elliptic_curves() {
        let mut r = rng(163);
        for _ in 0..20 {
            let p = random_params(&mut r);
            let s = random_state(&mut r);
            let m = covering_match(&s, &p).unwrap();
            assert_eq!(m.pairing, "plus-first");
            assert!(m.max_rel < 1e-7, "{m:?}");
            assert!(m.direct.iter().all(|x| x.g3_sign == -1));
        }
    }
}
