//! The ten coefficients of the spectral polynomials as functions of the state,
//! their Casimir/integral classification and numerical checks of conservation,
//! involution and independence.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{conjugate_tilde, unpack, Skew4};
use crate::dynamics::{
    bracket_from_gradients, gradient, hamiltonian, lax_pair, BodyState, Gradient, HamiltonianForm,
    Params, Trajectory,
};
use crate::error::Result;
use crate::poly::{chebyshev_nodes, Poly};

/// Coefficients of `P = A l^4 + B l^3 + D l^2 + E l + F` and
/// `Q = G l^4 + H l^3 + I l^2 + J l + K`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct IntegralSet {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub i: f64,
    pub j: f64,
    pub k: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum IntegralName {
    A,
    B,
    D,
    E,
    F,
    G,
    H,
    I,
    J,
    K,
}

impl IntegralName {
    pub const ALL: [IntegralName; 10] = [
        IntegralName::A,
        IntegralName::B,
        IntegralName::D,
        IntegralName::E,
        IntegralName::F,
        IntegralName::G,
        IntegralName::H,
        IntegralName::I,
        IntegralName::J,
        IntegralName::K,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            IntegralName::A => "A",
            IntegralName::B => "B",
            IntegralName::D => "D",
            IntegralName::E => "E",
            IntegralName::F => "F",
            IntegralName::G => "G",
            IntegralName::H => "H",
            IntegralName::I => "I",
            IntegralName::J => "J",
            IntegralName::K => "K",
        }
    }

    pub fn value(&self, set: &IntegralSet) -> f64 {
        match self {
            IntegralName::A => set.a,
            IntegralName::B => set.b,
            IntegralName::D => set.d,
            IntegralName::E => set.e,
            IntegralName::F => set.f,
            IntegralName::G => set.g,
            IntegralName::H => set.h,
            IntegralName::I => set.i,
            IntegralName::J => set.j,
            IntegralName::K => set.k,
        }
    }
}

impl IntegralSet {
    /// Values in the order of [`IntegralName::ALL`].
    pub fn to_array(&self) -> [f64; 10] {
        IntegralName::ALL.map(|n| n.value(self))
    }

    pub fn max_diff(&self, other: &IntegralSet) -> f64 {
        let (x, y) = (self.to_array(), other.to_array());
        x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `P` with real coefficients, lowest degree first.
    pub fn p_poly(&self) -> Poly {
        Poly::from_real(&[self.f, self.e, self.d, self.b, self.a])
    }

    pub fn q_poly(&self) -> Poly {
        Poly::from_real(&[self.k, self.j, self.i, self.h, self.g])
    }
}

/// Variant of the entry-by-entry formula for `D`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateForm {
    /// Sum of all six `M_ij^2`.
    #[default]
    Corrected,
    /// The five-square sum missing `M24^2`; kept for the typo report and fault injection.
    AsPrinted,
}

/// Coefficients from the matrix entries.
pub fn integral_set(s: &BodyState, p: &Params) -> IntegralSet {
    integral_set_coordinates(s, p, CoordinateForm::Corrected)
}

pub fn integral_set_coordinates(s: &BodyState, p: &Params, form: CoordinateForm) -> IntegralSet {
    let Skew4 {
        m12,
        m13,
        m14,
        m23,
        m24,
        m34,
    } = s.m;
    let Skew4 {
        m12: g12,
        m13: g13,
        m14: g14,
        m23: g23,
        m24: g24,
        m34: g34,
    } = s.g;
    let c = p.c_matrix();
    let (c12, c34) = (c.m12, c.m34);
    let m24_sq = match form {
        CoordinateForm::Corrected => m24 * m24,
        CoordinateForm::AsPrinted => 0.0,
    };
    IntegralSet {
        a: c12 * c12 + c34 * c34,
        b: 2.0 * c34 * m34 + 2.0 * c12 * m12,
        d: m13 * m13 + m14 * m14 + m23 * m23 + m12 * m12 + m34 * m34 + m24_sq
            + 2.0 * c12 * g12
            + 2.0 * c34 * g34,
        e: 2.0 * (g12 * m12 + g13 * m13 + g14 * m14 + g23 * m23 + g24 * m24 + g34 * m34),
        f: g12 * g12 + g13 * g13 + g14 * g14 + g23 * g23 + g24 * g24 + g34 * g34,
        g: c12 * c34,
        h: c34 * m12 + c12 * m34,
        i: c34 * g12 + g34 * c12 + m12 * m34 + m23 * m14 - m13 * m24,
        j: m34 * g12 + m12 * g34 + m14 * g23 + m23 * g14 - g13 * m24 - g24 * m13,
        k: g34 * g12 + g23 * g14 - g13 * g24,
    }
}

/// Coefficients from the `(X+, X-)` vector pairs.
pub fn integral_set_vectors(s: &BodyState, p: &Params) -> IntegralSet {
    let (mp, mm) = unpack(&s.m);
    let (gp, gm) = unpack(&s.g);
    let (cp, cm) = unpack(&p.c_matrix());
    IntegralSet {
        a: cp.dot(&cp) + cm.dot(&cm),
        b: 2.0 * (cp.dot(&mp) + cm.dot(&mm)),
        d: mp.dot(&mp) + mm.dot(&mm) + 2.0 * (cp.dot(&gp) + cm.dot(&gm)),
        e: 2.0 * (gp.dot(&mp) + gm.dot(&mm)),
        f: gp.dot(&gp) + gm.dot(&gm),
        g: cp.dot(&cm),
        h: cp.dot(&mm) + cm.dot(&mp),
        i: cp.dot(&gm) + cm.dot(&gp) + mp.dot(&mm),
        j: mp.dot(&gm) + mm.dot(&gp),
        k: gp.dot(&gm),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub casimirs: [IntegralName; 4],
    pub integrals: [IntegralName; 4],
}

/// Casimirs are the `l^0` and `l^1` coefficients of `P` and `Q`; the remaining
/// nonconstant coefficients are the nontrivial integrals. `A` and `G` depend on
/// the parameters only.
pub fn classify(_p: &Params) -> Classification {
    use IntegralName::*;
    Classification {
        casimirs: [E, F, J, K],
        integrals: [B, D, H, I],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationReport {
    /// `max_t |f(t) - f(0)| / (1 + |f(0)|)` in the order of [`IntegralName::ALL`].
    pub drift: [f64; 10],
}

impl ConservationReport {
    pub fn max_drift(&self) -> f64 {
        self.drift.iter().copied().fold(0.0, f64::max)
    }

    pub fn drift_of(&self, name: IntegralName) -> f64 {
        self.drift[IntegralName::ALL.iter().position(|n| *n == name).unwrap()]
    }
}

pub fn conservation_report(t: &Trajectory) -> ConservationReport {
    let p = &t.params;
    let f0 = integral_set(&t.states[0], p).to_array();
    let mut drift = [0.0; 10];
    for s in &t.states {
        let f = integral_set(s, p).to_array();
        for k in 0..10 {
            drift[k] = f64::max(drift[k], (f[k] - f0[k]).abs() / (1.0 + f0[k].abs()));
        }
    }
    ConservationReport { drift }
}

/// Labels of the rows and columns of [`involution_matrix`].
pub const INVOLUTION_LABELS: [&str; 5] = ["B", "D", "H", "I", "Ham"];

fn named(name: IntegralName, p: Params) -> impl Fn(&BodyState) -> f64 {
    move |s| name.value(&integral_set(s, &p))
}

fn integral_gradients(s: &BodyState, p: &Params) -> Result<Vec<Gradient>> {
    let p = *p;
    let mut grads = classify(&p)
        .integrals
        .iter()
        .map(|&n| gradient(named(n, p), s))
        .collect::<Result<Vec<_>>>()?;
    grads.push(gradient(|x| hamiltonian(x, &p, HamiltonianForm::Full), s)?);
    Ok(grads)
}

/// Pairwise brackets among `B, D, H, I` and the energy.
pub fn involution_matrix(s: &BodyState, p: &Params) -> Result<[[f64; 5]; 5]> {
    let grads = integral_gradients(s, p)?;
    let mut out = [[0.0; 5]; 5];
    for r in 0..5 {
        for c in (r + 1)..5 {
            let v = bracket_from_gradients(s, &grads[r], &grads[c]);
            out[r][c] = v;
            out[c][r] = -v;
        }
    }
    Ok(out)
}

pub fn max_offdiagonal(m: &[[f64; 5]; 5]) -> f64 {
    (0..5)
        .flat_map(|r| (0..5).filter(move |&c| c != r).map(move |c| (r, c)))
        .map(|(r, c)| m[r][c].abs())
        .fold(0.0, f64::max)
}

/// Largest bracket of a Casimir against the twelve coordinate functions and of the
/// nontrivial integrals against the Casimirs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CasimirReport {
    pub casimir_vs_coordinates: f64,
    pub integrals_vs_casimirs: f64,
    pub integrals_vs_energy: f64,
}

pub fn casimir_report(s: &BodyState, p: &Params) -> Result<CasimirReport> {
    let cls = classify(p);
    let cas = cls
        .casimirs
        .iter()
        .map(|&n| gradient(named(n, *p), s))
        .collect::<Result<Vec<_>>>()?;
    let ints = integral_gradients(s, p)?;
    let energy = ints[4];
    let mut vs_coord: f64 = 0.0;
    for k in 0..12 {
        let coord = gradient(|x: &BodyState| x.to_array()[k], s)?;
        for c in &cas {
            vs_coord = vs_coord.max(bracket_from_gradients(s, c, &coord).abs());
        }
    }
    let mut vs_cas: f64 = 0.0;
    let mut vs_energy: f64 = 0.0;
    for i in &ints[..4] {
        for c in &cas {
            vs_cas = vs_cas.max(bracket_from_gradients(s, i, c).abs());
        }
        vs_energy = vs_energy.max(bracket_from_gradients(s, i, &energy).abs());
    }
    Ok(CasimirReport {
        casimir_vs_coordinates: vs_coord,
        integrals_vs_casimirs: vs_cas,
        integrals_vs_energy: vs_energy,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Relative singular-value threshold for the numerical rank.
pub const RANK_TOL: f64 = 1e-8;

/// Numerical rank of the 4x12 Jacobian of `(B, D, H, I)`.
pub fn independence_rank(s: &BodyState, p: &Params) -> Result<RankReport> {
    let grads = integral_gradients(s, p)?;
    let jac = DMatrix::from_fn(4, 12, |r, c| grads[r].to_array()[c]);
    let mut sv: Vec<f64> = jac.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    let top = sv.first().copied().unwrap_or(0.0);
    let rank = if top == 0.0 {
        0
    } else {
        sv.iter().filter(|&&x| x > RANK_TOL * top).count()
    };
    Ok(RankReport {
        rank,
        singular_values: sv,
    })
}

/// The square root of `det L~` and `-1/2 tr L~^2` recovered by sampling and
/// interpolation, compared against the integral coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolynomialIdentityReport {
    /// Coefficientwise distance between the sampled determinant and `Q^2`.
    pub det_residual: f64,
    /// Distance on the `l^0`, `l^1`, `l^4` coefficients of `-1/2 tr L~^2` vs `F, E, A`.
    pub trace_residual: f64,
    /// All sampled coefficients of `-1/2 tr L~^2`, lowest first (reported, not asserted).
    pub trace_coefficients: Vec<f64>,
}

pub fn polynomial_identities(s: &BodyState, p: &Params) -> Result<PolynomialIdentityReport> {
    let nodes: Vec<Complex64> = chebyshev_nodes(9)
        .into_iter()
        .map(|x| Complex64::new(x, 0.0))
        .collect();
    let mut dets = Vec::with_capacity(9);
    let mut traces = Vec::with_capacity(9);
    for &lam in &nodes {
        let lt = conjugate_tilde(&lax_pair(s, p, lam).0);
        dets.push(lt.determinant());
        traces.push((lt * lt).trace() * -0.5);
    }
    let det_poly = Poly::interpolate(&nodes, &dets)?;
    let trace_poly = Poly::interpolate(&nodes, &traces)?;
    let set = integral_set(s, p);
    let q = set.q_poly();
    let det_residual = det_poly.max_coeff_diff(&(&q * &q));
    let listed = [(0, set.f), (1, set.e), (4, set.a)];
    let trace_residual = listed
        .iter()
        .map(|&(k, v)| (trace_poly.coeff(k) - Complex64::new(v, 0.0)).norm())
        .fold(0.0, f64::max);
    Ok(PolynomialIdentityReport {
        det_residual,
        trace_residual,
        trace_coefficients: (0..9).map(|k| trace_poly.coeff(k).re).collect(),
    })
}
