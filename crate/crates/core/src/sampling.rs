//! Random parameters and initial states for experiments and tests.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{merge, Skew4, Vec3};
use crate::dynamics::{BodyState, Params};

fn signed<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let mag = rng.random_range(lo..hi);
    if rng.random_bool(0.5) {
        mag
    } else {
        -mag
    }
}

/// Inertia in `[0.5, 2]` with `|a - b| > 0.2`; chi entries in `±[0.2, 1]` with
/// magnitudes at least 0.1 apart.
pub fn random_params<R: Rng + ?Sized>(rng: &mut R) -> Params {
    loop {
        let a: f64 = rng.random_range(0.5..2.0);
        let b = rng.random_range(0.5..2.0);
        let chi12: f64 = signed(rng, 0.2, 1.0);
        let chi34 = signed(rng, 0.2, 1.0);
        if (a - b).abs() > 0.2 && (chi12.abs() - chi34.abs()).abs() > 0.1 {
            return Params::new(a, b, chi12, chi34).expect("sampled parameters are valid");
        }
    }
}

/// Degenerate parameters with `chi34 = chi12`.
pub fn random_degenerate_params<R: Rng + ?Sized>(rng: &mut R) -> Params {
    loop {
        let a: f64 = rng.random_range(0.5..2.0);
        let b = rng.random_range(0.5..2.0);
        let chi = signed(rng, 0.2, 1.0);
        if (a - b).abs() > 0.2 {
            return Params::new_allow_degenerate(a, b, chi, chi).expect("valid up to degeneracy");
        }
    }
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

/// `M` entries uniform in `[-1, 1]`; `Gamma` built from two unit so(3) halves.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R) -> BodyState {
    let m = Skew4::from_array(std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
    let g = merge(&random_unit_vector(rng), &random_unit_vector(rng));
    BodyState::new(m, g)
}

pub fn random_skew<R: Rng + ?Sized>(rng: &mut R) -> Skew4 {
    Skew4::from_array(std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
}
