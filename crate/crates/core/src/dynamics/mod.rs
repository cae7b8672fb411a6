//! The four benchmark chaotic flows (Lorenz, Rössler, Chen, Qi) and their
//! integration into uniformly sampled trajectories.

mod integrate;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use integrate::{integrate, integrate_with, IntegrateOptions, Integrator, NoiseConfig};

/// Initial condition shared by every benchmark run.
pub const BENCHMARK_X0: [f64; 3] = [17.6771581, 12.9313791, 43.9140433];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemId {
    Lorenz,
    Rossler,
    Chen,
    Qi,
}

impl SystemId {
    pub const ALL: [SystemId; 4] = [SystemId::Lorenz, SystemId::Rossler, SystemId::Chen, SystemId::Qi];

    pub fn name(self) -> &'static str {
        match self {
            SystemId::Lorenz => "lorenz",
            SystemId::Rossler => "rossler",
            SystemId::Chen => "chen",
            SystemId::Qi => "qi",
        }
    }

    /// Parameter names in the order the vector field consumes them.
    pub fn param_names(self) -> [&'static str; 3] {
        match self {
            SystemId::Lorenz => ["sigma", "rho", "beta"],
            _ => ["a", "b", "c"],
        }
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lorenz" => Ok(SystemId::Lorenz),
            "rossler" | "rössler" => Ok(SystemId::Rossler),
            "chen" => Ok(SystemId::Chen),
            "qi" => Ok(SystemId::Qi),
            other => Err(Error::InvalidSpec(format!("unknown system '{other}'"))),
        }
    }
}

/// A chaotic system together with its named parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub system: SystemId,
    pub params: BTreeMap<String, f64>,
}

impl SystemSpec {
    pub fn new(system: SystemId, values: [f64; 3]) -> Self {
        let params = system
            .param_names()
            .iter()
            .zip(values)
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        Self { system, params }
    }

    pub fn dim(&self) -> usize {
        3
    }

    pub fn param(&self, name: &str) -> Result<f64> {
        match self.params.get(name) {
            Some(v) if v.is_finite() => Ok(*v),
            Some(_) => Err(Error::InvalidSpec(format!("parameter '{name}' of {} is not finite", self.system))),
            None => Err(Error::InvalidSpec(format!("{} is missing parameter '{name}'", self.system))),
        }
    }

    /// Resolves the named parameters once so the flow can be evaluated in a hot loop.
    pub fn vector_field(&self) -> Result<VectorField> {
        let [p0, p1, p2] = self.system.param_names();
        let (a, b, c) = (self.param(p0)?, self.param(p1)?, self.param(p2)?);
        if let Some(extra) = self.params.keys().find(|k| !self.system.param_names().contains(&k.as_str())) {
            return Err(Error::InvalidSpec(format!("{} has no parameter '{extra}'", self.system)));
        }
        Ok(VectorField { system: self.system, a, b, c })
    }
}

/// Benchmark preset: parameter set plus the shared initial condition.
///
/// Chen uses a=40, b=3, c=28. With b and c the other way round the flow
/// collapses onto the origin from the shared initial condition.
pub fn make_benchmark(system: SystemId) -> (SystemSpec, [f64; 3]) {
    let values = match system {
        SystemId::Lorenz => [10.0, 28.0, 8.0 / 3.0],
        SystemId::Rossler => [0.2, 0.2, 5.7],
        SystemId::Chen => [40.0, 3.0, 28.0],
        SystemId::Qi => [35.0, 7.0, 10.0],
    };
    (SystemSpec::new(system, values), BENCHMARK_X0)
}

/// Right-hand side f(x) of one of the benchmark flows with resolved parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorField {
    system: SystemId,
    a: f64,
    b: f64,
    c: f64,
}

impl VectorField {
    #[inline]
    pub fn eval(&self, s: &[f64; 3]) -> [f64; 3] {
        let [x, y, z] = *s;
        let (a, b, c) = (self.a, self.b, self.c);
        match self.system {
            // a=sigma, b=rho, c=beta
            SystemId::Lorenz => [a * (y - x), x * (b - z) - y, x * y - c * z],
            SystemId::Rossler => [-y - z, x + a * y, (x - c) * z + b],
            SystemId::Chen => [a * (y - x), (c - a) * x - x * z + c * y, x * y - b * z],
            SystemId::Qi => [a * (y - x) + y * z, (a - c) * x - y - x * z, x * y - b * z],
        }
    }
}

pub fn eval_rhs(spec: &SystemSpec, state: &[f64; 3]) -> Result<[f64; 3]> {
    if state.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("state must be finite".into()));
    }
    Ok(spec.vector_field()?.eval(state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use libm::sqrt;

    fn max_abs(v: [f64; 3]) -> f64 {
        v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    #[test]
    fn lorenz_equilibria() {
        let (spec, _) = make_benchmark(SystemId::Lorenz);
        assert_eq!(eval_rhs(&spec, &[0.0, 0.0, 0.0]).unwrap(), [0.0, 0.0, 0.0]);
        let q = sqrt(72.0);
        assert!(max_abs(eval_rhs(&spec, &[q, q, 27.0]).unwrap()) <= 1e-9);
        assert!(max_abs(eval_rhs(&spec, &[-q, -q, 27.0]).unwrap()) <= 1e-9);
    }

    #[test]
    fn rossler_origin_and_equilibria() {
        let (spec, _) = make_benchmark(SystemId::Rossler);
        let f = eval_rhs(&spec, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(f, [0.0, 0.0, 0.2]);
        // y solves a y^2 + c y + b = 0, x = -a y, z = -y
        let (a, b, c) = (0.2, 0.2, 5.7);
        for sign in [-1.0, 1.0] {
            let y = (-c + sign * sqrt(c * c - 4.0 * a * b)) / (2.0 * a);
            let f = eval_rhs(&spec, &[-a * y, y, -y]).unwrap();
            assert!(max_abs(f) <= 1e-9, "{f:?}");
        }
    }

    #[test]
    fn chen_rhs_matches_hand_substitution() {
        let spec = SystemSpec::new(SystemId::Chen, [40.0, 28.0, 3.0]);
        assert_eq!(eval_rhs(&spec, &[1.0, 1.0, 0.0]).unwrap(), [0.0, -34.0, 1.0]);
    }

    #[test]
    fn chen_preset_equilibria() {
        let (spec, _) = make_benchmark(SystemId::Chen);
        // z = 2c - a, x = y = ±sqrt(b z)
        let z = 2.0 * 28.0 - 40.0;
        let x = sqrt(3.0 * z);
        for s in [x, -x] {
            assert!(max_abs(eval_rhs(&spec, &[s, s, z]).unwrap()) <= 1e-9);
        }
    }

    #[test]
    fn qi_origin_is_fixed() {
        let (spec, _) = make_benchmark(SystemId::Qi);
        assert_eq!(eval_rhs(&spec, &[0.0, 0.0, 0.0]).unwrap(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn presets_carry_expected_values() {
        let (lorenz, x0) = make_benchmark(SystemId::Lorenz);
        assert_eq!(lorenz.param("sigma").unwrap(), 10.0);
        assert_eq!(lorenz.param("rho").unwrap(), 28.0);
        assert_eq!(lorenz.param("beta").unwrap(), 8.0 / 3.0);
        let (qi, _) = make_benchmark(SystemId::Qi);
        assert_eq!([qi.param("a").unwrap(), qi.param("b").unwrap(), qi.param("c").unwrap()], [35.0, 7.0, 10.0]);
        let (rossler, _) = make_benchmark(SystemId::Rossler);
        assert_eq!(rossler.param("c").unwrap(), 5.7);
        for id in SystemId::ALL {
            let (spec, x) = make_benchmark(id);
            assert_eq!(x, [17.6771581, 12.9313791, 43.9140433]);
            assert_eq!(x, x0);
            assert_eq!(spec.dim(), 3);
        }
    }

    #[test]
    fn missing_or_nan_params_are_rejected() {
        let (mut spec, _) = make_benchmark(SystemId::Lorenz);
        spec.params.remove("rho");
        assert!(matches!(eval_rhs(&spec, &[1.0, 1.0, 1.0]), Err(Error::InvalidSpec(_))));
        let (mut spec, _) = make_benchmark(SystemId::Qi);
        spec.params.insert("b".into(), f64::NAN);
        assert!(matches!(eval_rhs(&spec, &[1.0, 1.0, 1.0]), Err(Error::InvalidSpec(_))));
        let (mut spec, _) = make_benchmark(SystemId::Chen);
        spec.params.insert("rho".into(), 1.0);
        assert!(spec.vector_field().is_err());
    }

    #[test]
    fn system_names_parse() {
        for id in SystemId::ALL {
            assert_eq!(id.name().parse::<SystemId>().unwrap(), id);
        }
        assert!("duffing".parse::<SystemId>().is_err());
    }
}
