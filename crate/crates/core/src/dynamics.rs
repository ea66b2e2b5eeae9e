//! The Euler–Poisson vector field for I = diag(a, a, b, b) with the center-of-mass
//! matrix supported on the (1,2) and (3,4) slots, its Lax pair, the energy, a
//! finite-difference Lie–Poisson bracket and fixed-step integrators.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{CMat4, Commutator, Skew4};
use crate::error::{Error, Result};

/// Inertia and center-of-mass data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    a: f64,
    b: f64,
    chi12: f64,
    chi34: f64,
}

/// Two magnitudes closer than this count as equal for the degeneracy rule.
const DEGENERACY_TOL: f64 = 1e-12;

impl Params {
    /// Validated parameters; rejects `|chi12| == |chi34|`.
    pub fn new(a: f64, b: f64, chi12: f64, chi34: f64) -> Result<Self> {
        let p = Self::new_allow_degenerate(a, b, chi12, chi34)?;
        if p.is_degenerate() {
            return Err(Error::InvalidParams(format!(
                "|chi12| = |chi34| = {} needs the degeneracy flag",
                chi12.abs()
            )));
        }
        Ok(p)
    }

    /// Like [`Params::new`] but accepts `|chi12| == |chi34|`, where only three of the
    /// four nontrivial integrals are independent.
    pub fn new_allow_degenerate(a: f64, b: f64, chi12: f64, chi34: f64) -> Result<Self> {
        if ![a, b, chi12, chi34].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if a == 0.0 || b == 0.0 || a + b == 0.0 {
            return Err(Error::InvalidParams(format!(
                "degenerate inertia a = {a}, b = {b}"
            )));
        }
        if a == b {
            return Err(Error::InvalidParams(format!("a = b = {a}")));
        }
        if chi12 == 0.0 || chi34 == 0.0 {
            return Err(Error::InvalidParams("chi12 and chi34 must be nonzero".into()));
        }
        Ok(Params { a, b, chi12, chi34 })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn chi12(&self) -> f64 {
        self.chi12
    }

    pub fn chi34(&self) -> f64 {
        self.chi34
    }

    pub fn is_degenerate(&self) -> bool {
        (self.chi12.abs() - self.chi34.abs()).abs() <= DEGENERACY_TOL * self.chi12.abs().max(1.0)
    }

    pub fn inertia(&self) -> [f64; 4] {
        [self.a, self.a, self.b, self.b]
    }

    pub fn chi(&self) -> Skew4 {
        Skew4::new(self.chi12, 0.0, 0.0, 0.0, 0.0, self.chi34)
    }

    /// Leading Lax coefficient `C = (a + b) chi`.
    pub fn c_matrix(&self) -> Skew4 {
        self.chi() * (self.a + self.b)
    }

    fn moments(&self) -> [f64; 6] {
        let i = self.inertia();
        [
            i[0] + i[1],
            i[0] + i[2],
            i[0] + i[3],
            i[1] + i[2],
            i[1] + i[3],
            i[2] + i[3],
        ]
    }

    /// `Omega_ij = M_ij / (I_i + I_j)`.
    pub fn omega_from_m(&self, m: &Skew4) -> Skew4 {
        let k = self.moments();
        let a = m.to_array();
        Skew4::from_array(std::array::from_fn(|n| a[n] / k[n]))
    }

    /// `M_ij = (I_i + I_j) Omega_ij`.
    pub fn m_from_omega(&self, omega: &Skew4) -> Skew4 {
        let k = self.moments();
        let a = omega.to_array();
        Skew4::from_array(std::array::from_fn(|n| a[n] * k[n]))
    }
}

/// Free-function form of [`Params::omega_from_m`].
pub fn omega_from_m(m: &Skew4, p: &Params) -> Skew4 {
    p.omega_from_m(m)
}

/// Phase point `(M, Gamma)`; also used for tangent vectors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BodyState {
    pub m: Skew4,
    pub g: Skew4,
}

impl BodyState {
    pub const ZERO: BodyState = BodyState {
        m: Skew4::ZERO,
        g: Skew4::ZERO,
    };

    pub fn new(m: Skew4, g: Skew4) -> Self {
        BodyState { m, g }
    }

    /// `m12..m34` followed by `g12..g34`.
    pub fn to_array(&self) -> [f64; 12] {
        let (m, g) = (self.m.to_array(), self.g.to_array());
        std::array::from_fn(|k| if k < 6 { m[k] } else { g[k - 6] })
    }

    pub fn from_array(a: [f64; 12]) -> Self {
        BodyState {
            m: Skew4::from_array(std::array::from_fn(|k| a[k])),
            g: Skew4::from_array(std::array::from_fn(|k| a[k + 6])),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.m.max_abs().max(self.g.max_abs())
    }

    pub fn is_finite(&self) -> bool {
        self.m.is_finite() && self.g.is_finite()
    }
}

impl Add for BodyState {
    type Output = BodyState;
    fn add(self, o: BodyState) -> BodyState {
        BodyState::new(self.m + o.m, self.g + o.g)
    }
}

impl Sub for BodyState {
    type Output = BodyState;
    fn sub(self, o: BodyState) -> BodyState {
        BodyState::new(self.m - o.m, self.g - o.g)
    }
}

impl Mul<f64> for BodyState {
    type Output = BodyState;
    fn mul(self, s: f64) -> BodyState {
        BodyState::new(self.m * s, self.g * s)
    }
}

/// `(dM/dt, dGamma/dt) = ([M, Omega] + [Gamma, chi], [Gamma, Omega])`.
pub fn rhs(s: &BodyState, p: &Params) -> BodyState {
    let omega = p.omega_from_m(&s.m);
    BodyState::new(
        s.m.commutator(&omega) + s.g.commutator(&p.chi()),
        s.g.commutator(&omega),
    )
}

/// `L(lambda) = lambda^2 C + lambda M + Gamma` and `A(lambda) = lambda chi + Omega`.
pub fn lax_pair(s: &BodyState, p: &Params, lambda: Complex64) -> (CMat4, CMat4) {
    let l = p.c_matrix().to_complex() * (lambda * lambda) + s.m.to_complex() * lambda + s.g.to_complex();
    let a = p.chi().to_complex() * lambda + p.omega_from_m(&s.m).to_complex();
    (l, a)
}

/// Scaled Lax defect `|lambda dM + dGamma - [L, A]|_F / (1 + |L|_F |A|_F)`.
pub fn lax_residual(s: &BodyState, p: &Params, lambda: Complex64) -> f64 {
    let (l, a) = lax_pair(s, p, lambda);
    let d = rhs(s, p);
    let ldot = d.m.to_complex() * lambda + d.g.to_complex();
    (ldot - l.commutator(&a)).norm() / (1.0 + l.norm() * a.norm())
}

/// Which kinetic energy to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianForm {
    /// All six `M_ij Omega_ij` terms; conserved along the flow.
    #[default]
    Full,
    /// Five terms, without `M24 Omega24`.
    Printed,
}

pub fn hamiltonian(s: &BodyState, p: &Params, form: HamiltonianForm) -> f64 {
    let omega = p.omega_from_m(&s.m);
    let mut kinetic = s.m.inner(&omega);
    if form == HamiltonianForm::Printed {
        kinetic -= s.m.m24 * omega.m24;
    }
    0.5 * kinetic + p.chi12() * s.g.m12 + p.chi34() * s.g.m34
}

/// Gradient of a scalar observable with respect to `M` and `Gamma`, each as a skew matrix
/// paired with the state through [`Skew4::inner`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gradient {
    pub dm: Skew4,
    pub dg: Skew4,
}

impl Gradient {
    pub fn to_array(&self) -> [f64; 12] {
        BodyState::new(self.dm, self.dg).to_array()
    }
}

/// Central finite differences with step `1e-6 (1 + |x|)` per coordinate.
pub fn gradient<F>(f: F, s: &BodyState) -> Result<Gradient>
where
    F: Fn(&BodyState) -> f64,
{
    let x = s.to_array();
    let mut grad = [0.0; 12];
    for k in 0..12 {
        let h = 1e-6 * (1.0 + x[k].abs());
        let mut up = x;
        let mut down = x;
        up[k] += h;
        down[k] -= h;
        let d = (f(&BodyState::from_array(up)) - f(&BodyState::from_array(down))) / (2.0 * h);
        if !d.is_finite() {
            return Err(Error::NonFinite(format!("gradient component {k}")));
        }
        grad[k] = d;
    }
    let g = BodyState::from_array(grad);
    Ok(Gradient { dm: g.m, dg: g.g })
}

/// Lie–Poisson bracket on the semidirect product evaluated from two gradients:
/// `-<M, [df_M, dg_M]> - <Gamma, [df_M, dg_G] - [dg_M, df_G]>`.
pub fn bracket_from_gradients(s: &BodyState, f: &Gradient, g: &Gradient) -> f64 {
    -s.m.inner(&f.dm.commutator(&g.dm))
        - s.g.inner(&(f.dm.commutator(&g.dg) - g.dm.commutator(&f.dg)))
}

pub fn poisson_bracket<F, G>(f: F, g: G, s: &BodyState) -> Result<f64>
where
    F: Fn(&BodyState) -> f64,
    G: Fn(&BodyState) -> f64,
{
    let gf = gradient(f, s)?;
    let gg = gradient(g, s)?;
    Ok(bracket_from_gradients(s, &gf, &gg))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Rk4,
    Midpoint,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "midpoint" => Ok(Method::Midpoint),
            other => Err(Error::Precondition(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<BodyState>,
    pub params: Params,
    pub method: Method,
    pub dt: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &BodyState {
        self.states.last().expect("trajectory holds the initial state")
    }
}

const MIDPOINT_TOL: f64 = 1e-13;
const MIDPOINT_MAX_ITER: usize = 50;

pub fn rk4_step<F>(f: F, y: &BodyState, dt: f64) -> BodyState
where
    F: Fn(&BodyState) -> BodyState,
{
    let k1 = f(y);
    let k2 = f(&(*y + k1 * (0.5 * dt)));
    let k3 = f(&(*y + k2 * (0.5 * dt)));
    let k4 = f(&(*y + k3 * dt));
    *y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Implicit midpoint step solved by fixed-point iteration.
pub fn midpoint_step<F>(f: F, y: &BodyState, dt: f64) -> Result<BodyState>
where
    F: Fn(&BodyState) -> BodyState,
{
    let mut next = *y + f(y) * dt;
    let mut last_update = f64::INFINITY;
    for _ in 0..MIDPOINT_MAX_ITER {
        let mid = (*y + next) * 0.5;
        let candidate = *y + f(&mid) * dt;
        last_update = (candidate - next).max_abs();
        next = candidate;
        if last_update <= MIDPOINT_TOL * (1.0 + next.max_abs()) {
            return Ok(next);
        }
    }
    Err(Error::NonConvergence {
        iterations: MIDPOINT_MAX_ITER,
        last_update,
    })
}

/// Fixed-step integration of [`rhs`]; returns `n + 1` samples including the start.
pub fn integrate(s0: &BodyState, p: &Params, dt: f64, n: usize, method: Method) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Precondition(format!("dt must be positive, got {dt}")));
    }
    if n == 0 {
        return Err(Error::Precondition("at least one step is required".into()));
    }
    if !s0.is_finite() {
        return Err(Error::NonFinite("initial state".into()));
    }
    let field = |s: &BodyState| rhs(s, p);
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(0.0);
    states.push(*s0);
    let mut y = *s0;
    for k in 1..=n {
        y = match method {
            Method::Rk4 => rk4_step(field, &y, dt),
            Method::Midpoint => midpoint_step(field, &y, dt)?,
        };
        if !y.is_finite() {
            return Err(Error::NonFinite(format!("state at step {k}")));
        }
        times.push(k as f64 * dt);
        states.push(y);
    }
    Ok(Trajectory {
        times,
        states,
        params: *p,
        method,
        dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_params, random_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> Params {
        Params::new(1.0, 2.0, 0.3, 0.1).unwrap()
    }

    /// The vector field written out scalar by scalar, independent of the matrix code.
    fn rhs_expanded(s: &BodyState, p: &Params) -> [f64; 12] {
        let [m12, m13, m14, m23, m24, m34] = s.m.to_array();
        let [g12, g13, g14, g23, g24, g34] = s.g.to_array();
        let (a, b, x12, x34) = (p.a(), p.b(), p.chi12(), p.chi34());
        let (w12, w13, w14, w23, w24, w34) = (
            m12 / (2.0 * a),
            m13 / (a + b),
            m14 / (a + b),
            m23 / (a + b),
            m24 / (a + b),
            m34 / (2.0 * b),
        );
        // [X, Y]_ij = sum_k X_ik Y_kj - Y_ik X_kj for skew X, Y
        let comm = |x: [f64; 6], y: [f64; 6]| -> [f64; 6] {
            let e = |v: &[f64; 6], i: usize, j: usize| -> f64 {
                let idx = |i: usize, j: usize| match (i, j) {
                    (0, 1) => 0,
                    (0, 2) => 1,
                    (0, 3) => 2,
                    (1, 2) => 3,
                    (1, 3) => 4,
                    (2, 3) => 5,
                    _ => unreachable!(),
                };
                if i == j {
                    0.0
                } else if i < j {
                    v[idx(i, j)]
                } else {
                    -v[idx(j, i)]
                }
            };
            let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
            pairs.map(|(i, j)| (0..4).map(|k| e(&x, i, k) * e(&y, k, j) - e(&y, i, k) * e(&x, k, j)).sum())
        };
        let m = [m12, m13, m14, m23, m24, m34];
        let g = [g12, g13, g14, g23, g24, g34];
        let w = [w12, w13, w14, w23, w24, w34];
        let chi = [x12, 0.0, 0.0, 0.0, 0.0, x34];
        let mw = comm(m, w);
        let gc = comm(g, chi);
        let gw = comm(g, w);
        std::array::from_fn(|k| if k < 6 { mw[k] + gc[k] } else { gw[k - 6] })
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(1.0, 1.0, 0.3, 0.1).is_err());
        assert!(Params::new(1.0, -1.0, 0.3, 0.1).is_err());
        assert!(Params::new(0.0, 0.0, 0.3, 0.1).is_err());
        assert!(Params::new(1.0, 2.0, 0.0, 0.1).is_err());
        assert!(Params::new(1.0, 2.0, 0.3, -0.3).is_err());
        let p = Params::new_allow_degenerate(1.0, 2.0, 0.3, -0.3).unwrap();
        assert!(p.is_degenerate());
    }

    #[test]
    fn omega_examples() {
        let p = params();
        assert_eq!(p.omega_from_m(&Skew4::ZERO), Skew4::ZERO);
        let w = p.omega_from_m(&Skew4::new(4.0, 6.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(w.m12, 2.0);
        assert_eq!(w.m13, 2.0);
    }

    #[test]
    fn omega_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p = random_params(&mut rng);
            let w = random_state(&mut rng).m;
            assert!((p.omega_from_m(&p.m_from_omega(&w)) - w).max_abs() < 1e-15);
        }
    }

    #[test]
    fn equilibrium_with_gamma_along_chi() {
        let p = params();
        let s = BodyState::new(Skew4::ZERO, p.chi());
        assert_eq!(rhs(&s, &p), BodyState::ZERO);
    }

    #[test]
    fn rhs_matches_scalar_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p = random_params(&mut rng);
            let s = random_state(&mut rng);
            let want = rhs_expanded(&s, &p);
            let got = rhs(&s, &p).to_array();
            for k in 0..12 {
                assert!((want[k] - got[k]).abs() < 1e-12, "component {k}");
            }
        }
    }

    #[test]
    fn free_top_structure_when_gamma_vanishes() {
        // with Gamma = 0 the potential drops out: dM = [M, Omega], dGamma = 0
        let p = params();
        let m = Skew4::new(0.3, -0.2, 0.5, 0.1, 0.7, -0.4);
        let d = rhs(&BodyState::new(m, Skew4::ZERO), &p);
        assert_eq!(d.m, m.commutator(&p.omega_from_m(&m)));
        assert_eq!(d.g, Skew4::ZERO);
    }

    #[test]
    fn lax_pair_special_values() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_state(&mut rng);
        let (l, a) = lax_pair(&s, &p, Complex64::new(0.0, 0.0));
        assert_eq!(l, s.g.to_complex());
        assert_eq!(a, p.omega_from_m(&s.m).to_complex());
        let lam = Complex64::new(0.7, -0.2);
        let (l, a) = lax_pair(&BodyState::ZERO, &p, lam);
        assert!((l - p.c_matrix().to_complex() * (lam * lam)).norm() < 1e-15);
        assert!((a - p.chi().to_complex() * lam).norm() < 1e-15);
        let c = p.c_matrix();
        assert!((c.m12 - 0.9).abs() < 1e-15 && (c.m34 - 0.3).abs() < 1e-15);
    }

    #[test]
    fn lax_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        assert_eq!(lax_residual(&BodyState::ZERO, &params(), Complex64::new(1.3, 0.4)), 0.0);
        for k in 0..100 {
            let p = random_params(&mut rng);
            let s = random_state(&mut rng);
            let re = 2.0 * (k as f64 / 100.0) - 1.0;
            assert!(lax_residual(&s, &p, Complex64::new(re * 3.0, 0.0)) < 1e-10);
            assert!(lax_residual(&s, &p, Complex64::new(re, 1.5 - re)) < 1e-10);
        }
    }

    #[test]
    fn hamiltonian_values() {
        let p = params();
        assert_eq!(hamiltonian(&BodyState::ZERO, &p, HamiltonianForm::Full), 0.0);
        let s = BodyState::new(Skew4::ZERO, Skew4::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        assert!((hamiltonian(&s, &p, HamiltonianForm::Full) - 0.3).abs() < 1e-15);
        assert!((hamiltonian(&s, &p, HamiltonianForm::Printed) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn only_full_hamiltonian_is_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let p = random_params(&mut rng);
        let s0 = random_state(&mut rng);
        let t = integrate(&s0, &p, 1e-3, 5000, Method::Rk4).unwrap();
        let drift = |form| {
            let h0 = hamiltonian(&s0, &p, form);
            t.states
                .iter()
                .map(|s| (hamiltonian(s, &p, form) - h0).abs())
                .fold(0.0, f64::max)
        };
        assert!(drift(HamiltonianForm::Full) < 1e-10);
        assert!(drift(HamiltonianForm::Printed) > 1e-4);
    }

    #[test]
    fn bracket_reproduces_vector_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..5 {
            let p = random_params(&mut rng);
            let s = random_state(&mut rng);
            let gh = gradient(|x| hamiltonian(x, &p, HamiltonianForm::Full), &s).unwrap();
            let field = rhs(&s, &p).to_array();
            for k in 0..12 {
                let coord = gradient(|x: &BodyState| x.to_array()[k], &s).unwrap();
                let b = bracket_from_gradients(&s, &coord, &gh);
                assert!((b - field[k]).abs() < 1e-5, "coordinate {k}: {b} vs {}", field[k]);
            }
            let f = |x: &BodyState| x.m.m13 * x.g.m24 + x.g.m12.powi(2);
            assert!(poisson_bracket(f, f, &s).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn equilibrium_trajectory_is_constant() {
        let p = params();
        let s = BodyState::new(Skew4::ZERO, p.chi());
        for method in [Method::Rk4, Method::Midpoint] {
            let t = integrate(&s, &p, 1e-2, 100, method).unwrap();
            assert!(t.states.iter().all(|x| (*x - s).max_abs() < 1e-14));
        }
    }

    #[test]
    fn integrate_rejects_bad_steps() {
        let p = params();
        assert!(integrate(&BodyState::ZERO, &p, 0.0, 10, Method::Rk4).is_err());
        assert!(integrate(&BodyState::ZERO, &p, 1e-3, 0, Method::Rk4).is_err());
    }

    fn self_convergence_order(method: Method, dt: f64, horizon: f64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let p = random_params(&mut rng);
        let s0 = random_state(&mut rng);
        let end = |h: f64| {
            let n = (horizon / h).round() as usize;
            *integrate(&s0, &p, h, n, method).unwrap().last()
        };
        let (y1, y2, y3) = (end(dt), end(dt / 2.0), end(dt / 4.0));
        ((y1 - y2).max_abs() / (y2 - y3).max_abs()).log2()
    }

    #[test]
    fn rk4_is_fourth_order() {
        let order = self_convergence_order(Method::Rk4, 0.05, 2.0);
        assert!((order - 4.0).abs() < 0.3, "observed order {order}");
    }

    #[test]
    fn midpoint_is_second_order() {
        let order = self_convergence_order(Method::Midpoint, 0.05, 2.0);
        assert!((order - 2.0).abs() < 0.2, "observed order {order}");
    }
}
