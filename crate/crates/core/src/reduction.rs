//! The so(3)⊕so(3) picture: the two coupled "twisted" tops, their integrals,
//! the reduced quadratures `u' ^2 = P_i(u)` and the elliptic curves `y^2 = P_i(u)`.

use serde::Serialize;

use crate::algebra::{merge, split, Vec3};
use crate::dynamics::{rhs, BodyState, Params, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::{weierstrass_from_cubic, QuarticInvariants};

/// Unit-norm tolerance for the two halves of `Gamma`.
pub const UNIT_TOL: f64 = 1e-9;

/// `Omega_1 = (p1, q1, r1)`, `Omega_2 = (p2, q2, r2)` and the halves of `Gamma`.
/// Also used for tangent vectors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TwistedState {
    pub omega1: Vec3,
    pub omega2: Vec3,
    pub gamma1: Vec3,
    pub gamma2: Vec3,
}

impl TwistedState {
    pub fn max_abs(&self) -> f64 {
        [self.omega1, self.omega2, self.gamma1, self.gamma2]
            .iter()
            .map(|v| v.amax())
            .fold(0.0, f64::max)
    }

    pub fn max_diff(&self, other: &TwistedState) -> f64 {
        TwistedState {
            omega1: self.omega1 - other.omega1,
            omega2: self.omega2 - other.omega2,
            gamma1: self.gamma1 - other.gamma1,
            gamma2: self.gamma2 - other.gamma2,
        }
        .max_abs()
    }
}

/// Halves of `chi`: `chi_1 = (0, 0, -(chi12 + chi34)/2)`, `chi_2 = (0, 0, -(chi12 - chi34)/2)`.
pub fn chi_halves(p: &Params) -> (Vec3, Vec3) {
    split(&p.chi())
}

/// The linear change of variables without the unit-norm check.
pub fn to_twisted_raw(s: &BodyState, p: &Params) -> TwistedState {
    let (omega1, omega2) = split(&p.omega_from_m(&s.m));
    let (gamma1, gamma2) = split(&s.g);
    TwistedState {
        omega1,
        omega2,
        gamma1,
        gamma2,
    }
}

pub fn to_twisted(s: &BodyState, p: &Params) -> Result<TwistedState> {
    let ts = to_twisted_raw(s, p);
    for (k, g) in [ts.gamma1, ts.gamma2].iter().enumerate() {
        if (g.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::Precondition(format!(
                "|gamma{}| = {} is not 1",
                k + 1,
                g.norm()
            )));
        }
    }
    Ok(ts)
}

/// `M_1`, `M_2` from the angular velocities.
pub fn momenta(ts: &TwistedState, p: &Params) -> (Vec3, Vec3) {
    let (s, d) = (p.a() + p.b(), p.a() - p.b());
    let (o1, o2) = (&ts.omega1, &ts.omega2);
    (
        Vec3::new(s * o1.x, s * o1.y, s * o1.z + d * o2.z),
        Vec3::new(s * o2.x, s * o2.y, d * o1.z + s * o2.z),
    )
}

pub fn from_twisted(ts: &TwistedState, p: &Params) -> BodyState {
    let (m1, m2) = momenta(ts, p);
    BodyState::new(merge(&m1, &m2), merge(&ts.gamma1, &ts.gamma2))
}

/// Twisted-top vector field.
pub fn twisted_rhs(ts: &TwistedState, p: &Params) -> TwistedState {
    let rc = shape_constants(p);
    let (o1, o2) = (&ts.omega1, &ts.omega2);
    let (g1, g2) = (&ts.gamma1, &ts.gamma2);
    TwistedState {
        omega1: Vec3::new(
            rc.m * o1.y * o2.z - rc.n1 * g1.y,
            -rc.m * o1.x * o2.z + rc.n1 * g1.x,
            0.0,
        ),
        omega2: Vec3::new(
            rc.m * o2.y * o1.z - rc.n2 * g2.y,
            -rc.m * o2.x * o1.z + rc.n2 * g2.x,
            0.0,
        ),
        gamma1: g1.cross(o1) * 2.0,
        gamma2: g2.cross(o2) * 2.0,
    }
}

/// Sup-norm mismatch between `twisted_rhs` and the pushforward of the full vector field.
pub fn pushforward_residual(s: &BodyState, p: &Params) -> f64 {
    let pushed = to_twisted_raw(&rhs(s, p), p);
    twisted_rhs(&to_twisted_raw(s, p), p).max_diff(&pushed)
}

/// Leading coefficient of the second energy-type integral.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum F22Form {
    /// `(a+b)^2 (p2^2 + q2^2)`, mirroring the first top.
    #[default]
    Corrected,
    /// `(a-b)^2 (p2^2 + q2^2)`
    AsPrinted,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ReductionConstants {
    pub m: f64,
    pub n1: f64,
    pub n2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub a1: f64,
    pub a2: f64,
    pub f11: f64,
    pub f12: f64,
    pub f13: f64,
    pub f21: f64,
    pub f22: f64,
    pub f23: f64,
    /// `a + b`, carried along for the cubic coefficients.
    pub apb: f64,
}

impl ReductionConstants {
    pub fn f_array(&self) -> [f64; 6] {
        [self.f11, self.f12, self.f13, self.f21, self.f22, self.f23]
    }
}

pub const F_LABELS: [&str; 6] = ["f11", "f12", "f13", "f21", "f22", "f23"];

fn shape_constants(p: &Params) -> ReductionConstants {
    let apb = p.a() + p.b();
    let (c1, c2) = chi_halves(p);
    ReductionConstants {
        m: -2.0 * (p.a() - p.b()) / apb,
        n1: -2.0 * c1.z / apb,
        n2: -2.0 * c2.z / apb,
        apb,
        ..Default::default()
    }
}

pub fn reduction_constants(ts: &TwistedState, p: &Params) -> ReductionConstants {
    reduction_constants_with(ts, p, F22Form::Corrected)
}

pub fn reduction_constants_with(ts: &TwistedState, p: &Params, f22: F22Form) -> ReductionConstants {
    let (s, d) = (p.a() + p.b(), p.a() - p.b());
    let (c1, c2) = chi_halves(p);
    let (o1, o2) = (&ts.omega1, &ts.omega2);
    let (g1, g2) = (&ts.gamma1, &ts.gamma2);
    let w1 = s * o1.z + d * o2.z;
    let w2 = d * o1.z + s * o2.z;
    let lead2 = match f22 {
        F22Form::Corrected => s * s,
        F22Form::AsPrinted => d * d,
    };
    let f11 = w1 * c1.z;
    let f12 = s * s * (o1.x * o1.x + o1.y * o1.y) + w1 * w1 + 2.0 * s * c1.z * g1.z;
    let f13 = s * o1.x * g1.x + s * o1.y * g1.y + w1 * g1.z;
    let f21 = w2 * c2.z;
    let f22 = lead2 * (o2.x * o2.x + o2.y * o2.y) + w2 * w2 + 2.0 * s * c2.z * g2.z;
    let f23 = s * o2.x * g2.x + s * o2.y * g2.y + w2 * g2.z;
    let alpha1 = w1 / s;
    let alpha2 = w2 / s;
    ReductionConstants {
        alpha1,
        alpha2,
        a1: (alpha1 * alpha1 * s * s - f12) / (s * s),
        a2: (alpha2 * alpha2 * s * s - f22) / (s * s),
        f11,
        f12,
        f13,
        f21,
        f22,
        f23,
        ..shape_constants(p)
    }
}

/// Coefficients of `P_i(u) = -4u^3 - 4B_i u^2 + 4C_i u + D_i`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CubicData {
    pub b1: f64,
    pub c1: f64,
    pub d1: f64,
    pub b2: f64,
    pub c2: f64,
    pub d2: f64,
}

impl CubicData {
    pub fn eval(&self, i: usize, u: f64) -> f64 {
        let (b, c, d) = self.coeffs(i);
        -4.0 * u * u * u - 4.0 * b * u * u + 4.0 * c * u + d
    }

    pub fn coeffs(&self, i: usize) -> (f64, f64, f64) {
        match i {
            1 => (self.b1, self.c1, self.d1),
            2 => (self.b2, self.c2, self.d2),
            _ => panic!("top index must be 1 or 2"),
        }
    }
}

pub fn cubic_data(rc: &ReductionConstants) -> CubicData {
    let s2 = rc.apb * rc.apb;
    let one = |alpha: f64, a: f64, n: f64, f3: f64| {
        // chi_(i)3 = -n_i (a+b) / 2
        let chi = -n * rc.apb / 2.0;
        let b = 2.0 * a + alpha * alpha;
        let c = n * n - a * a - 4.0 * alpha * chi * f3 / s2 - 2.0 * alpha * alpha * a;
        let d = -4.0 * (2.0 * chi * f3 / s2 + alpha * a).powi(2);
        (b, c, d)
    };
    let (b1, c1, d1) = one(rc.alpha1, rc.a1, rc.n1, rc.f13);
    let (b2, c2, d2) = one(rc.alpha2, rc.a2, rc.n2, rc.f23);
    CubicData {
        b1,
        c1,
        d1,
        b2,
        c2,
        d2,
    }
}

/// Weierstrass invariants of the curves `y^2 = P_1(u)` and `y^2 = P_2(u)`.
pub fn elliptic_curves(cd: &CubicData) -> (QuarticInvariants, QuarticInvariants) {
    (
        weierstrass_from_cubic(cd.b1, cd.c1, cd.d1),
        weierstrass_from_cubic(cd.b2, cd.c2, cd.d2),
    )
}

/// Form of the `rho_i^2` equation used for the closure test.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoForm {
    /// `4 n^2 u [1 - (a_i+u)^2/n^2] - 4 n^2 (f/(a+b) - alpha_i a_i / n - alpha_i u / n)^2`
    #[default]
    Corrected,
    /// `alpha_i a_i` without the `1/n` and `alpha_1` in the second top's `u`-term.
    AsPrinted,
}

/// Right-hand side of `(u_i')^2 = ...` before expansion into the cubic.
pub fn rho_rhs(rc: &ReductionConstants, i: usize, u: f64, form: RhoForm) -> f64 {
    let (alpha, a, n, f3) = match i {
        1 => (rc.alpha1, rc.a1, rc.n1, rc.f13),
        2 => (rc.alpha2, rc.a2, rc.n2, rc.f23),
        _ => panic!("top index must be 1 or 2"),
    };
    let (lin, quad) = match form {
        RhoForm::Corrected => (alpha * a / n, alpha / n),
        RhoForm::AsPrinted => (alpha * a, if i == 2 { rc.alpha1 / n } else { alpha / n }),
    };
    4.0 * n * n * u * (1.0 - (a + u).powi(2) / (n * n)) - 4.0 * n * n * (f3 / rc.apb - lin - quad * u).powi(2)
}

/// `u_i = p_i^2 + q_i^2` along a trajectory.
pub fn u_series(t: &Trajectory) -> (Vec<f64>, Vec<f64>) {
    t.states
        .iter()
        .map(|s| {
            let ts = to_twisted_raw(s, &t.params);
            (
                ts.omega1.x.powi(2) + ts.omega1.y.powi(2),
                ts.omega2.x.powi(2) + ts.omega2.y.powi(2),
            )
        })
        .unzip()
}

/// Five-point central difference at the interior samples `2..n-2`.
pub fn central_derivative(u: &[f64], dt: f64) -> Result<Vec<f64>> {
    if u.len() < 5 {
        return Err(Error::Precondition(format!(
            "need at least 5 samples for the stencil, got {}",
            u.len()
        )));
    }
    Ok((2..u.len() - 2)
        .map(|k| (u[k - 2] - 8.0 * u[k - 1] + 8.0 * u[k + 1] - u[k + 2]) / (12.0 * dt))
        .collect())
}

/// max over interior samples of `|u_i'^2 - R(u_i)|` for `R` built from the initial constants.
fn closure_residual<F>(t: &Trajectory, r: F) -> Result<(f64, f64)>
where
    F: Fn(usize, f64) -> f64,
{
    let (u1, u2) = u_series(t);
    let mut out = [0.0f64; 2];
    for (i, u) in [(1usize, &u1), (2, &u2)] {
        let du = central_derivative(u, t.dt)?;
        for (k, d) in du.iter().enumerate() {
            let res = (d * d - r(i, u[k + 2])).abs();
            out[i - 1] = out[i - 1].max(res);
        }
    }
    Ok((out[0], out[1]))
}

/// `|u_i'^2 - P_i(u_i)|` along the trajectory, `u'` from finite differences.
pub fn cubic_residual(t: &Trajectory) -> Result<(f64, f64)> {
    let ts = to_twisted_raw(&t.states[0], &t.params);
    let cd = cubic_data(&reduction_constants(&ts, &t.params));
    closure_residual(t, |i, u| cd.eval(i, u))
}

pub fn rho_residual(t: &Trajectory, form: RhoForm) -> Result<(f64, f64)> {
    let ts = to_twisted_raw(&t.states[0], &t.params);
    let rc = reduction_constants(&ts, &t.params);
    closure_residual(t, |i, u| rho_rhs(&rc, i, u, form))
}

/// One printed-versus-adopted formula decision, with the metric that settled it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Adjudication {
    pub item: String,
    pub printed: String,
    pub adopted: String,
    pub printed_metric: f64,
    pub adopted_metric: f64,
    /// true when the printed form fails and the adopted one passes.
    pub typo: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionReport {
    pub pushforward_residual: f64,
    pub r_drift: f64,
    /// Drift of each f_ij (corrected forms) over the trajectory, in `F_LABELS` order.
    pub f_drift: [f64; 6],
    pub unit_norm_drift: f64,
    pub cubic_residual: (f64, f64),
    pub cubic_scale: f64,
    pub constants: ReductionConstants,
    pub cubic: CubicData,
    pub curves: (QuarticInvariants, QuarticInvariants),
    pub adjudications: Vec<Adjudication>,
}

fn f_drift(t: &Trajectory, form: F22Form) -> Result<[f64; 6]> {
    let first = reduction_constants_with(&to_twisted_raw(&t.states[0], &t.params), &t.params, form).f_array();
    let mut drift = [0.0f64; 6];
    for s in &t.states {
        let now = reduction_constants_with(&to_twisted_raw(s, &t.params), &t.params, form).f_array();
        for k in 0..6 {
            drift[k] = drift[k].max((now[k] - first[k]).abs() / (1.0 + first[k].abs()));
        }
    }
    if drift.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite("f_ij drift".into()));
    }
    Ok(drift)
}

/// Everything the reduction claims, measured along one trajectory.
pub fn reduction_report(t: &Trajectory, closure_tol: f64) -> Result<ReductionReport> {
    let p = &t.params;
    let ts0 = to_twisted(&t.states[0], p)?;
    let mut push: f64 = 0.0;
    let mut r_drift: f64 = 0.0;
    let mut unit: f64 = 0.0;
    for s in &t.states {
        push = push.max(pushforward_residual(s, p));
        let ts = to_twisted_raw(s, p);
        r_drift = r_drift
            .max((ts.omega1.z - ts0.omega1.z).abs())
            .max((ts.omega2.z - ts0.omega2.z).abs());
        unit = unit
            .max((ts.gamma1.norm() - 1.0).abs())
            .max((ts.gamma2.norm() - 1.0).abs());
    }
    let f_corr = f_drift(t, F22Form::Corrected)?;
    let f_print = f_drift(t, F22Form::AsPrinted)?;
    let constants = reduction_constants(&ts0, p);
    let cubic = cubic_data(&constants);
    let cres = cubic_residual(t)?;
    let rho_corr = rho_residual(t, RhoForm::Corrected)?;
    let rho_print = rho_residual(t, RhoForm::AsPrinted)?;
    let cubic_scale = 1.0
        + [cubic.b1, cubic.c1, cubic.d1, cubic.b2, cubic.c2, cubic.d2]
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()));

    let conserve_tol = 1e-6;
    let adjudications = vec![
        Adjudication {
            item: "f22 leading coefficient".into(),
            printed: "(a-b)^2 (p2^2+q2^2)".into(),
            adopted: "(a+b)^2 (p2^2+q2^2)".into(),
            printed_metric: f_print[4],
            adopted_metric: f_corr[4],
            typo: f_print[4] > conserve_tol && f_corr[4] <= conserve_tol,
        },
        Adjudication {
            item: "rho equation constant term".into(),
            printed: "alpha_i a_i; alpha_1/n_2 in the second top".into(),
            adopted: "alpha_i a_i / n_i; alpha_2/n_2 in the second top".into(),
            printed_metric: rho_print.0.max(rho_print.1),
            adopted_metric: rho_corr.0.max(rho_corr.1),
            typo: rho_print.0.max(rho_print.1) > closure_tol * cubic_scale
                && rho_corr.0.max(rho_corr.1) <= closure_tol * cubic_scale,
        },
    ];
    Ok(ReductionReport {
        pushforward_residual: push,
        r_drift,
        f_drift: f_corr,
        unit_norm_drift: unit,
        cubic_residual: cres,
        cubic_scale,
        curves: elliptic_curves(&cubic),
        constants,
        cubic,
        adjudications,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{pack, unpack, Skew4};
    use crate::dynamics::{integrate, Method};
    use crate::sampling::{random_params, random_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn chi_halves_example() {
        let p = Params::new(1.0, 2.0, 0.3, 0.1).unwrap();
        let (c1, c2) = chi_halves(&p);
        assert!((c1 - Vec3::new(0.0, 0.0, -0.2)).amax() < 1e-16);
        assert!((c2 - Vec3::new(0.0, 0.0, -0.1)).amax() < 1e-16);
    }

    #[test]
    fn zero_state_maps_to_zero() {
        let p = Params::new(1.0, 2.0, 0.3, 0.1).unwrap();
        let ts = to_twisted_raw(&BodyState::ZERO, &p);
        assert_eq!(ts, TwistedState::default());
        assert_eq!(twisted_rhs(&ts, &p).max_abs(), 0.0);
        assert!(to_twisted(&BodyState::ZERO, &p).is_err());
    }

    #[test]
    fn momenta_match_the_split_of_m() {
        let mut r = rng(201);
        for _ in 0..50 {
            let p = random_params(&mut r);
            let s = random_state(&mut r);
            let ts = to_twisted(&s, &p).unwrap();
            let (m1, m2) = momenta(&ts, &p);
            let (e1, e2) = split(&s.m);
            assert!((m1 - e1).amax() < 1e-13 && (m2 - e2).amax() < 1e-13);
            let back = from_twisted(&ts, &p);
            assert!((back - s).max_abs() < 1e-13);
            let (mp, mm) = unpack(&s.m);
            assert!((pack(&mp, &mm) - s.m).max_abs() < 1e-15);
        }
    }

    #[test]
    fn twisted_equations_are_the_pushforward() {
        let mut r = rng(203);
        for _ in 0..100 {
            let p = random_params(&mut r);
            let s = random_state(&mut r);
            assert!(pushforward_residual(&s, &p) < 1e-10);
        }
    }

    #[test]
    fn constants_example() {
        let p = Params::new(1.0, 2.0, 0.3, 0.1).unwrap();
        let ts = TwistedState {
            gamma1: Vec3::z(),
            gamma2: Vec3::z(),
            ..Default::default()
        };
        let rc = reduction_constants(&ts, &p);
        assert_eq!((rc.alpha1, rc.alpha2), (0.0, 0.0));
        assert!((rc.m - 2.0 / 3.0).abs() < 1e-15);
        assert!((rc.n1 - 0.4 / 3.0).abs() < 1e-15);
        assert!((rc.n2 - 0.2 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_constants_give_zero_cubic() {
        let cd = cubic_data(&ReductionConstants {
            apb: 1.0,
            ..Default::default()
        });
        assert_eq!(cd, CubicData::default());
        let (e1, e2) = elliptic_curves(&cd);
        assert_eq!((e1.g2, e1.g3, e2.g2, e2.g3), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn cubic_is_the_expanded_rho_equation() {
        let mut r = rng(205);
        for _ in 0..50 {
            let p = random_params(&mut r);
            let s = random_state(&mut r);
            let rc = reduction_constants(&to_twisted(&s, &p).unwrap(), &p);
            let cd = cubic_data(&rc);
            assert!(cd.d1 <= 0.0 && cd.d2 <= 0.0);
            for u in [0.0, 0.3, 1.1, 2.5] {
                for i in [1, 2] {
                    let want = rho_rhs(&rc, i, u, RhoForm::Corrected);
                    assert!((cd.eval(i, u) - want).abs() < 1e-10 * (1.0 + want.abs()));
                }
            }
            // real motion: the cubic is nonnegative at the initial u
            let ts = to_twisted_raw(&s, &p);
            let u1 = ts.omega1.x.powi(2) + ts.omega1.y.powi(2);
            let u2 = ts.omega2.x.powi(2) + ts.omega2.y.powi(2);
            assert!(cd.eval(1, u1) >= -1e-12 && cd.eval(2, u2) >= -1e-12);
        }
    }

    #[test]
    fn equilibrium_closes_exactly() {
        let p = Params::new(1.0, 2.0, 0.3, 0.1).unwrap();
        let s = BodyState::new(Skew4::ZERO, p.chi() * (1.0 / 0.3_f64.hypot(0.1)));
        let t = integrate(&s, &p, 1e-3, 10, Method::Rk4).unwrap();
        let (r1, r2) = cubic_residual(&t).unwrap();
        assert_eq!((r1, r2), (0.0, 0.0));
    }

    #[test]
    fn short_trajectory_is_rejected() {
        let mut r = rng(207);
        let p = random_params(&mut r);
        let s = random_state(&mut r);
        let t = integrate(&s, &p, 1e-3, 3, Method::Rk4).unwrap();
        assert!(matches!(cubic_residual(&t), Err(Error::Precondition(_))));
    }

    #[test]
    fn reduction_closes_along_the_flow() {
        let mut r = rng(209);
        let p = random_params(&mut r);
        let s = random_state(&mut r);
        let t = integrate(&s, &p, 1e-3, 5000, Method::Rk4).unwrap();
        let rep = reduction_report(&t, 1e-5).unwrap();
        assert!(rep.pushforward_residual < 1e-10);
        assert!(rep.r_drift < 1e-9);
        assert!(rep.f_drift.iter().all(|d| *d < 1e-6), "{:?}", rep.f_drift);
        assert!(rep.cubic_residual.0 < 1e-5 * rep.cubic_scale);
        assert!(rep.cubic_residual.1 < 1e-5 * rep.cubic_scale);
        assert!(rep.adjudications.iter().all(|a| a.typo), "{:#?}", rep.adjudications);
    }

    #[test]
    fn closure_residual_converges_with_the_stencil() {
        let mut r = rng(211);
        let p = random_params(&mut r);
        let s = random_state(&mut r);
        let coarse = cubic_residual(&integrate(&s, &p, 2e-2, 100, Method::Rk4).unwrap()).unwrap();
        let fine = cubic_residual(&integrate(&s, &p, 1e-2, 200, Method::Rk4).unwrap()).unwrap();
        let ratio = coarse.0.max(coarse.1) / fine.0.max(fine.1);
        assert!(ratio > 10.0, "ratio {ratio}");
    }

    #[test]
    fn generic_curves_are_nonsingular() {
        let mut r = rng(213);
        for _ in 0..20 {
            let p = random_params(&mut r);
            let s = random_state(&mut r);
            let cd = cubic_data(&reduction_constants(&to_twisted(&s, &p).unwrap(), &p));
            let (e1, e2) = elliptic_curves(&cd);
            assert!(e1.discriminant.abs() > 1e-12 && e2.discriminant.abs() > 1e-12);
        }
    }
}
