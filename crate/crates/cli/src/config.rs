//! Run configuration: a TOML file with dotted keys, command-line overrides and
//! the seeded draws that fill in anything left unspecified.

use std::collections::BTreeMap;
use std::path::Path;

use bitop_core::algebra::Skew4;
use bitop_core::dynamics::{BodyState, Method, Params};
use bitop_core::hierarchy::OmegaPolicy;
use bitop_core::sampling::{random_params, random_state};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checks::{default_tolerance, CHECK_NAMES};
use crate::CliError;

pub const RNG_NAME: &str = "ChaCha8Rng";

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub seed: Option<u64>,
    pub allow_degenerate: Option<bool>,
    pub params: Option<RawParams>,
    pub initial: Option<RawInitial>,
    #[serde(default)]
    pub integrate: RawIntegrate,
    #[serde(default)]
    pub spectral: RawSpectral,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub hierarchy: RawHierarchy,
    #[serde(default)]
    pub fault: RawFault,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub a: f64,
    pub b: f64,
    pub chi12: f64,
    pub chi34: f64,
}

/// Upper-triangle entries in the order 12, 13, 14, 23, 24, 34.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInitial {
    pub m: [f64; 6],
    pub g: [f64; 6],
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawIntegrate {
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub method: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpectral {
    pub lambda_samples: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawHierarchy {
    pub n: Option<usize>,
    pub d: Option<f64>,
    pub policy: Option<String>,
}

/// Test hooks that deliberately break one formula.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFault {
    /// Name of an integral whose coordinate formula is replaced by a broken one.
    /// Only `"D"` is supported.
    pub corrupt_integral: Option<String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub allow_degenerate: bool,
}

/// Fully resolved run: every random draw has been made.
#[derive(Clone, Debug, Serialize)]
pub struct RunSetup {
    pub rng: &'static str,
    pub seed: u64,
    pub allow_degenerate: bool,
    pub params: Params,
    pub initial: BodyState,
    pub dt: f64,
    pub steps: usize,
    pub method: Method,
    pub lambdas: Vec<Complex64>,
    pub tolerances: BTreeMap<String, f64>,
    pub hierarchy_n: usize,
    pub hierarchy_d: f64,
    pub hierarchy_policy: OmegaPolicy,
    pub hierarchy_mats: Vec<Skew4>,
    pub corrupt_integral: Option<String>,
}

impl RunSetup {
    pub fn tolerance(&self, check: &str) -> f64 {
        self.tolerances
            .get(check)
            .copied()
            .unwrap_or_else(|| default_tolerance(check))
    }

    pub fn is_degenerate(&self) -> bool {
        self.params.is_degenerate()
    }
}

pub fn resolve(raw: &RawConfig, ov: &Overrides) -> Result<RunSetup, CliError> {
    let seed = ov.seed.or(raw.seed).unwrap_or(0);
    let allow_degenerate = ov.allow_degenerate || raw.allow_degenerate.unwrap_or(false);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let params = match &raw.params {
        Some(p) if allow_degenerate => Params::new_allow_degenerate(p.a, p.b, p.chi12, p.chi34),
        Some(p) => Params::new(p.a, p.b, p.chi12, p.chi34),
        None => Ok(random_params(&mut rng)),
    }
    .map_err(|e| CliError::Config(format!("params: {e}")))?;

    let initial = match &raw.initial {
        Some(init) => {
            let s = BodyState::new(Skew4::from_array(init.m), Skew4::from_array(init.g));
            if !s.is_finite() {
                return Err(CliError::Config("initial: non-finite entry".into()));
            }
            s
        }
        None => random_state(&mut rng),
    };

    let dt = raw.integrate.dt.unwrap_or(1e-3);
    if !(dt.is_finite() && dt > 0.0) {
        return Err(CliError::Config(format!("integrate.dt must be positive, got {dt}")));
    }
    let steps = raw.integrate.steps.unwrap_or(10_000);
    if steps == 0 {
        return Err(CliError::Config("integrate.steps must be at least 1".into()));
    }
    let method = match raw.integrate.method.as_deref() {
        None => Method::Rk4,
        Some(m) => m.parse().map_err(|e| CliError::Config(format!("integrate.method: {e}")))?,
    };

    let n_lambda = raw.spectral.lambda_samples.unwrap_or(8);
    if n_lambda == 0 {
        return Err(CliError::Config("spectral.lambda_samples must be at least 1".into()));
    }
    let lambdas = (0..n_lambda)
        .map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0)))
        .collect();

    for (name, tol) in &raw.tolerances {
        if !CHECK_NAMES.contains(&name.as_str()) {
            return Err(CliError::Config(format!("tolerances: unknown check {name:?}")));
        }
        if !(tol.is_finite() && *tol > 0.0) {
            return Err(CliError::Config(format!("tolerances.{name} must be positive, got {tol}")));
        }
    }

    let hierarchy_n = raw.hierarchy.n.unwrap_or(3);
    if !(2..=8).contains(&hierarchy_n) {
        return Err(CliError::Config(format!("hierarchy.n must be in 2..=8, got {hierarchy_n}")));
    }
    let hierarchy_policy = match raw.hierarchy.policy.as_deref() {
        None => OmegaPolicy::default(),
        Some(s) => s.parse().map_err(|e| CliError::Config(format!("hierarchy.policy: {e}")))?,
    };
    let drawn = bitop_core::hierarchy::random_hier_state(&mut rng, hierarchy_n);
    let hierarchy_d = raw.hierarchy.d.unwrap_or(drawn.d);
    if !(hierarchy_d.is_finite() && hierarchy_d != 0.0) {
        return Err(CliError::Config(format!("hierarchy.d must be nonzero, got {hierarchy_d}")));
    }

    if let Some(name) = &raw.fault.corrupt_integral {
        if name != "D" {
            return Err(CliError::Config(format!(
                "fault.corrupt_integral: only \"D\" is supported, got {name:?}"
            )));
        }
    }

    Ok(RunSetup {
        rng: RNG_NAME,
        seed,
        allow_degenerate,
        params,
        initial,
        dt,
        steps,
        method,
        lambdas,
        tolerances: raw.tolerances.clone(),
        hierarchy_n,
        hierarchy_d,
        hierarchy_policy,
        hierarchy_mats: drawn.mats,
        corrupt_integral: raw.fault.corrupt_integral.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_keys_parse() {
        let raw = RawConfig::parse(
            "seed = 3\nparams.a = 1.0\nparams.b = 2.0\nparams.chi12 = 0.3\nparams.chi34 = 0.1\nintegrate.dt = 0.01\n",
        )
        .unwrap();
        let setup = resolve(&raw, &Overrides::default()).unwrap();
        assert_eq!(setup.seed, 3);
        assert_eq!(setup.params.a(), 1.0);
        assert_eq!(setup.dt, 0.01);
        assert_eq!(setup.steps, 10_000);
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(RawConfig::parse("sed = 3\n").is_err());
        assert!(RawConfig::parse("params.c = 3\n").is_err());
        let raw = RawConfig::parse("tolerances.nonsense = 1e-3\n").unwrap();
        assert!(resolve(&raw, &Overrides::default()).is_err());
    }

    #[test]
    fn degenerate_params_need_the_flag() {
        let raw = RawConfig::parse("params.a = 1.0\nparams.b = 2.0\nparams.chi12 = 0.3\nparams.chi34 = 0.3\n").unwrap();
        assert!(resolve(&raw, &Overrides::default()).is_err());
        let ov = Overrides {
            allow_degenerate: true,
            ..Default::default()
        };
        assert!(resolve(&raw, &ov).unwrap().is_degenerate());
    }

    #[test]
    fn command_line_seed_wins() {
        let raw = RawConfig::parse("seed = 3\n").unwrap();
        let ov = Overrides {
            seed: Some(9),
            ..Default::default()
        };
        assert_eq!(resolve(&raw, &ov).unwrap().seed, 9);
    }

    #[test]
    fn invalid_values_rejected() {
        for text in [
            "integrate.dt = -1.0\n",
            "integrate.steps = 0\n",
            "integrate.method = \"euler\"\n",
            "tolerances.conservation = 0.0\n",
            "hierarchy.n = 1\n",
            "fault.corrupt_integral = \"B\"\n",
        ] {
            let raw = RawConfig::parse(text).unwrap();
            assert!(resolve(&raw, &Overrides::default()).is_err(), "{text}");
        }
    }
}
