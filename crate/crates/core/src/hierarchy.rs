//! Degree-N Lax polynomials `L_N(l) = l^N B + l^{N-1} M_1 + ... + M_N` with
//! `B = d chi`, their flows, spectral curves and the equally split coverings.

use nalgebra::{Matrix6, SVD};
use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{conjugate_tilde, CMat4, Commutator, Skew4};
use crate::dynamics::{omega_from_m, BodyState, Params};
use crate::error::{Error, Result};
use crate::invariants::RANK_TOL;
use crate::poly::{chebyshev_nodes, Poly};
use crate::spectral::{char_poly, SQUAREFREE_TOL};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HierState {
    pub d: f64,
    /// `M_1 ... M_N`
    pub mats: Vec<Skew4>,
}

impl HierState {
    pub fn new(d: f64, mats: Vec<Skew4>) -> Result<Self> {
        if mats.len() < 2 {
            return Err(Error::InvalidParams(format!("need N >= 2, got {}", mats.len())));
        }
        if !d.is_finite() || mats.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("hierarchy state".into()));
        }
        Ok(HierState { d, mats })
    }

    /// The base system as the `N = 2` member: `B = (a+b) chi`, `M_1 = M`, `M_2 = Gamma`.
    pub fn from_body(s: &BodyState, p: &Params) -> Self {
        HierState {
            d: p.a() + p.b(),
            mats: vec![s.m, s.g],
        }
    }

    pub fn n(&self) -> usize {
        self.mats.len()
    }

    pub fn b(&self, p: &Params) -> Skew4 {
        p.chi() * self.d
    }

    pub fn max_abs(&self) -> f64 {
        self.mats.iter().map(Skew4::max_abs).fold(0.0, f64::max)
    }

    fn axpy(&self, k: f64, other: &HierState) -> HierState {
        HierState {
            d: self.d,
            mats: self.mats.iter().zip(&other.mats).map(|(a, b)| *a + *b * k).collect(),
        }
    }

    pub fn lax(&self, p: &Params, lambda: Complex64) -> CMat4 {
        let mut l = self.b(p).to_complex();
        for m in &self.mats {
            l = l * lambda + m.to_complex();
        }
        l
    }
}

/// Tangent of the hierarchy flow for a given `Omega`, and the constraint residual
/// `|[chi, M_1] - [B, Omega]|`.
pub fn hier_rhs(hs: &HierState, omega: &Skew4, p: &Params) -> (HierState, f64) {
    let chi = p.chi();
    let n = hs.n();
    let mats = (0..n)
        .map(|k| {
            let own = hs.mats[k].commutator(omega);
            if k + 1 < n {
                own - chi.commutator(&hs.mats[k + 1])
            } else {
                own
            }
        })
        .collect();
    let residual = (chi.commutator(&hs.mats[0]) - hs.b(p).commutator(omega)).norm();
    (HierState { d: hs.d, mats }, residual)
}

/// How `Omega` is tied to the hierarchy variables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaPolicy {
    /// Off-block part solves the constraint, `Omega_off = (M_1)_off / d`; the
    /// centralizer part of `chi` comes from `omega_from_m(M_{N-1})`.
    #[default]
    ConstraintSolve,
    /// `Omega = s omega_from_m(M_{N-1}) + t chi` with `s` fitted by least squares to
    /// the constraint; `t` does not enter the constraint and is set to zero.
    ScaledLeastSquares,
}

impl std::str::FromStr for OmegaPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constraint-solve" => Ok(OmegaPolicy::ConstraintSolve),
            "scaled-least-squares" => Ok(OmegaPolicy::ScaledLeastSquares),
            other => Err(Error::InvalidParams(format!("unknown omega policy {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OmegaChoice {
    pub omega: Skew4,
    pub residual: f64,
    pub centralizer_dim: usize,
}

/// Matrix of `X -> [chi, X]` on the six skew coordinates.
fn ad_matrix(chi: &Skew4) -> Matrix6<f64> {
    let mut m = Matrix6::zeros();
    for j in 0..6 {
        let mut e = [0.0; 6];
        e[j] = 1.0;
        let col = chi.commutator(&Skew4::from_array(e)).to_array();
        for i in 0..6 {
            m[(i, j)] = col[i];
        }
    }
    m
}

/// Dimension of the centralizer of `chi` in so(4).
pub fn centralizer_dim(chi: &Skew4) -> usize {
    let svd = SVD::new(ad_matrix(chi), false, false);
    let top = svd.singular_values.max();
    if top == 0.0 {
        return 6;
    }
    svd.singular_values.iter().filter(|s| **s <= RANK_TOL * top).count()
}

pub fn omega_policy(hs: &HierState, p: &Params, policy: OmegaPolicy) -> OmegaChoice {
    let omega = policy_omega(hs, p, policy);
    let (_, residual) = hier_rhs(hs, &omega, p);
    OmegaChoice {
        omega,
        residual,
        centralizer_dim: centralizer_dim(&p.chi()),
    }
}

fn policy_omega(hs: &HierState, p: &Params, policy: OmegaPolicy) -> Skew4 {
    let n = hs.n();
    let base = omega_from_m(&hs.mats[n - 2], p);
    match policy {
        OmegaPolicy::ConstraintSolve => {
            let off = hs.mats[0].off_block() * (1.0 / hs.d);
            off + (base - base.off_block())
        }
        OmegaPolicy::ScaledLeastSquares => {
            let chi = p.chi();
            let target = chi.commutator(&hs.mats[0]);
            let dir = hs.b(p).commutator(&base);
            let dd = dir.inner(&dir);
            let s = if dd > 0.0 { target.inner(&dir) / dd } else { 0.0 };
            base * s
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HierTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<HierState>,
    /// Constraint residual at each sample.
    pub residuals: Vec<f64>,
    pub policy: OmegaPolicy,
    pub dt: f64,
}

impl HierTrajectory {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

fn hier_field(hs: &HierState, p: &Params, policy: OmegaPolicy) -> HierState {
    hier_rhs(hs, &policy_omega(hs, p, policy), p).0
}

fn constraint_residual(hs: &HierState, p: &Params, policy: OmegaPolicy) -> f64 {
    hier_rhs(hs, &policy_omega(hs, p, policy), p).1
}

/// Classical RK4 with `Omega` re-evaluated at every stage.
pub fn hier_integrate(
    hs0: &HierState,
    p: &Params,
    policy: OmegaPolicy,
    dt: f64,
    steps: usize,
) -> Result<HierTrajectory> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParams(format!("dt must be positive, got {dt}")));
    }
    let mut states = Vec::with_capacity(steps + 1);
    let mut residuals = Vec::with_capacity(steps + 1);
    let mut y = hs0.clone();
    for _ in 0..steps {
        residuals.push(constraint_residual(&y, p, policy));
        let k1 = hier_field(&y, p, policy);
        let k2 = hier_field(&y.axpy(dt / 2.0, &k1), p, policy);
        let k3 = hier_field(&y.axpy(dt / 2.0, &k2), p, policy);
        let k4 = hier_field(&y.axpy(dt, &k3), p, policy);
        let next = y
            .axpy(dt / 6.0, &k1)
            .axpy(dt / 3.0, &k2)
            .axpy(dt / 3.0, &k3)
            .axpy(dt / 6.0, &k4);
        if !next.max_abs().is_finite() {
            return Err(Error::NonFinite("hierarchy state".into()));
        }
        states.push(std::mem::replace(&mut y, next));
    }
    residuals.push(constraint_residual(&y, p, policy));
    states.push(y);
    Ok(HierTrajectory {
        times: (0..=steps).map(|k| k as f64 * dt).collect(),
        states,
        residuals,
        policy,
        dt,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HierSpectral {
    pub p_n: Poly,
    pub q_n: Poly,
    pub deg_p: Option<usize>,
    pub deg_q: Option<usize>,
    pub genus: Option<usize>,
    pub degeneracy: Option<String>,
}

fn pfaffian_c(x: &CMat4) -> Complex64 {
    x[(0, 1)] * x[(2, 3)] - x[(0, 2)] * x[(1, 3)] + x[(0, 3)] * x[(1, 2)]
}

/// `P_N` and `Q_N` by interpolation at `4N + 1` Chebyshev nodes: `P_N` is the
/// `mu^2` coefficient of `det(L~_N - mu)`, `Q_N` the Pfaffian of `L_N`.
pub fn hier_pq(hs: &HierState, p: &Params) -> Result<(Poly, Poly)> {
    let nodes: Vec<Complex64> = chebyshev_nodes(4 * hs.n() + 1)
        .into_iter()
        .map(|x| Complex64::new(x, 0.0))
        .collect();
    let mut pv = Vec::with_capacity(nodes.len());
    let mut qv = Vec::with_capacity(nodes.len());
    for &lam in &nodes {
        let l = hs.lax(p, lam);
        pv.push(char_poly(&conjugate_tilde(&l))[2]);
        qv.push(pfaffian_c(&l));
    }
    Ok((
        Poly::interpolate(&nodes, &pv)?.trimmed(INTERP_TOL),
        Poly::interpolate(&nodes, &qv)?.trimmed(INTERP_TOL),
    ))
}

/// [`hier_pq`] plus the degree, genus and degeneracy bookkeeping.
pub fn hier_spectral(hs: &HierState, p: &Params) -> Result<HierSpectral> {
    let n = hs.n();
    let (p_n, q_n) = hier_pq(hs, p)?;
    let (deg_p, deg_q) = (p_n.degree(INTERP_TOL), q_n.degree(INTERP_TOL));
    let mut out = HierSpectral {
        p_n,
        q_n,
        deg_p,
        deg_q,
        genus: None,
        degeneracy: None,
    };
    if deg_p != Some(2 * n) || deg_q != Some(2 * n) {
        out.degeneracy = Some(format!("degrees ({deg_p:?}, {deg_q:?}), expected {}", 2 * n));
        return Ok(out);
    }
    let disc = branch_polynomial(&out.p_n, &out.q_n);
    if disc.degree(INTERP_TOL) != Some(4 * n) {
        out.degeneracy = Some(format!(
            "branch polynomial degree {:?}, expected {}",
            disc.degree(INTERP_TOL),
            4 * n
        ));
        return Ok(out);
    }
    if !disc.trimmed(INTERP_TOL).is_squarefree(SQUAREFREE_TOL) {
        out.degeneracy = Some("branch polynomial has a repeated root".into());
        return Ok(out);
    }
    out.genus = Some(2 * n - 1);
    Ok(out)
}

/// Relative size below which interpolated coefficients count as zero.
pub const INTERP_TOL: f64 = 1e-10;

/// `P^2/4 - Q^2`.
pub fn branch_polynomial(pp: &Poly, qq: &Poly) -> Poly {
    &(pp * pp).scale_real(0.25) - &(qq * qq)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// zero of `P/2 + Q`
    Plus,
    /// zero of `P/2 - Q`
    Minus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringPartition {
    pub roots: Vec<Complex64>,
    pub sides: Vec<Side>,
    pub plus_count: usize,
    pub minus_count: usize,
    /// Coefficientwise `|(P/2 - Q)(P/2 + Q) - (P^2/4 - Q^2)|`.
    pub factorization_residual: f64,
    /// Largest distance from a root of `P^2/4 - Q^2` to the nearest root of its factor.
    pub matching_residual: f64,
}

/// Labels the branch points by the factor of `P^2/4 - Q^2` that vanishes there.
pub fn equal_split(pp: &Poly, qq: &Poly) -> Result<CoveringPartition> {
    let half = pp.scale_real(0.5);
    let plus = (&half + qq).trimmed(INTERP_TOL);
    let minus = (&half - qq).trimmed(INTERP_TOL);
    let disc = branch_polynomial(pp, qq);
    let factorization_residual = (&plus * &minus).max_coeff_diff(&disc);
    let roots = disc.trimmed(INTERP_TOL).roots()?;
    let (plus_roots, minus_roots) = (plus.roots()?, minus.roots()?);
    let nearest = |z: Complex64, set: &[Complex64]| set.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min);

    let mut sides = Vec::with_capacity(roots.len());
    let mut matching: f64 = 0.0;
    for &z in &roots {
        let (dp, dm) = (nearest(z, &plus_roots), nearest(z, &minus_roots));
        let tol = 1e-7 * (1.0 + z.norm());
        if dp <= tol && dm <= tol {
            return Err(Error::Degenerate(format!("branch point {z} is a root of both factors")));
        }
        matching = matching.max(dp.min(dm));
        sides.push(if dp < dm { Side::Plus } else { Side::Minus });
    }
    let plus_count = sides.iter().filter(|s| **s == Side::Plus).count();
    Ok(CoveringPartition {
        plus_count,
        minus_count: sides.len() - plus_count,
        roots,
        sides,
        factorization_residual,
        matching_residual: matching,
    })
}

/// Whether a partition of the `2g + 2` branch points into two even nonempty
/// subsets splits them equally.
pub fn is_equally_split(labels: &[Side]) -> Result<bool> {
    let plus = labels.iter().filter(|s| **s == Side::Plus).count();
    let minus = labels.len() - plus;
    if plus == 0 || minus == 0 || plus % 2 == 1 || minus % 2 == 1 {
        return Err(Error::InvalidPartition(format!(
            "sides of sizes ({plus}, {minus}) must be nonempty and even"
        )));
    }
    Ok(plus == minus)
}

/// Largest relative drift of the `P_N`, `Q_N` coefficients along a hierarchy
/// trajectory, measured on at most `max_samples + 1` evenly spaced states.
pub fn hier_isospectral_drift(t: &HierTrajectory, p: &Params, max_samples: usize) -> Result<f64> {
    let (p0, q0) = hier_pq(&t.states[0], p)?;
    let scale = 1.0 + p0.max_abs_coeff().max(q0.max_abs_coeff());
    let last = t.states.len() - 1;
    let k = max_samples.clamp(1, last.max(1));
    let mut drift: f64 = 0.0;
    for j in 0..=k {
        let (pn, qn) = hier_pq(&t.states[j * last / k], p)?;
        drift = drift.max(pn.max_coeff_diff(&p0)).max(qn.max_coeff_diff(&q0));
    }
    Ok(drift / scale)
}

/// Summary used by the command-line report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HierarchyReport {
    pub n: usize,
    pub degrees: (Option<usize>, Option<usize>),
    pub genus: Option<usize>,
    pub split: Option<(usize, usize)>,
    pub equally_split: Option<bool>,
    pub factorization_residual: Option<f64>,
    pub constraint_residual: f64,
    pub centralizer_dim: usize,
    pub degeneracy: Option<String>,
}

pub fn hierarchy_report(hs: &HierState, p: &Params, policy: OmegaPolicy) -> Result<HierarchyReport> {
    let spec = hier_spectral(hs, p)?;
    let choice = omega_policy(hs, p, policy);
    let mut degeneracy = spec.degeneracy.clone();
    let (split, equally, fact) = if spec.degeneracy.is_none() {
        match equal_split(&spec.p_n, &spec.q_n) {
            Ok(part) => (
                Some((part.plus_count, part.minus_count)),
                is_equally_split(&part.sides).ok(),
                Some(part.factorization_residual),
            ),
            Err(e) => {
                degeneracy = Some(e.to_string());
                (None, None, None)
            }
        }
    } else {
        (None, None, None)
    };
    Ok(HierarchyReport {
        n: hs.n(),
        degrees: (spec.deg_p, spec.deg_q),
        genus: spec.genus,
        split,
        equally_split: equally,
        factorization_residual: fact,
        constraint_residual: choice.residual,
        centralizer_dim: choice.centralizer_dim,
        degeneracy,
    })
}

/// A generic degree-`n` state: `d` in `[0.5, 2]`, matrix entries uniform in `[-1, 1]`.
pub fn random_hier_state<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> HierState {
    HierState {
        d: rng.random_range(0.5..2.0),
        mats: (0..n).map(|_| crate::sampling::random_skew(rng)).collect(),
    }
}
