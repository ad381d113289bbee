//! The central-potential family `V(r) = -f(beta/r)/r` and its scaled form.
//!
//! Two concrete shape functions are provided:
//!
//! * screened Coulomb, `f(z) = exp(-z)`, giving `V(r) = -exp(-beta/r)/r`;
//! * truncated Coulomb, `f(z) = (1 + z^p)^(-1/p)`, giving
//!   `V(r) = -1/(r^p + beta^p)^(1/p)`.
//!
//! Pure Coulomb (`f = 1`) is carried as its own tag so the `beta = 0`
//! baseline is unambiguous.
//!
//! After the coordinate change `r -> beta r`, `beta^2 H(beta)` becomes
//! `-1/2 nabla^2 - beta f(1/r)/r`, which is linear in `beta`.
//! [`scaled_potential_value`] evaluates that potential.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `exp(-z)` is below `1/f64::MAX` past this point; the screened potential is
/// returned as `-0.0` there instead of forming `0 * inf`.
const SCREENED_EXPONENT_CUTOFF: f64 = 709.782_712_893_384;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Screened,
    Truncated,
    #[serde(rename = "coulomb")]
    PureCoulomb,
}

impl Family {
    pub fn token(self) -> &'static str {
        match self {
            Family::Screened => "screened",
            Family::Truncated => "truncated",
            Family::PureCoulomb => "coulomb",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "screened" => Ok(Family::Screened),
            "truncated" => Ok(Family::Truncated),
            "coulomb" | "pure-coulomb" => Ok(Family::PureCoulomb),
            other => Err(Error::Domain(format!(
                "unknown family `{other}` (expected screened, truncated or coulomb)"
            ))),
        }
    }
}

/// One member of the potential family: shape, `beta` and the truncation
/// exponent `p` (only meaningful for [`Family::Truncated`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    family: Family,
    beta: f64,
    p: f64,
}

impl PotentialSpec {
    pub fn new(family: Family, beta: f64, p: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::Domain(format!(
                "beta must be finite and >= 0, got {beta}"
            )));
        }
        if family == Family::Truncated && !(p.is_finite() && p > 0.0) {
            return Err(Error::Domain(format!(
                "truncation exponent p must be finite and > 0, got {p}"
            )));
        }
        Ok(Self { family, beta, p })
    }

    pub fn screened(beta: f64) -> Result<Self> {
        Self::new(Family::Screened, beta, 1.0)
    }

    pub fn truncated(beta: f64, p: f64) -> Result<Self> {
        Self::new(Family::Truncated, beta, p)
    }

    pub fn coulomb() -> Self {
        Self {
            family: Family::PureCoulomb,
            beta: 0.0,
            p: 1.0,
        }
    }

    /// Same shape, different `beta`.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.family, beta, self.p)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "radius must be finite and > 0, got {r}"
        )))
    }
}

/// Shape function `f(z)`; `0 < f(z) <= 1` and `f(0) = 1` for every family.
pub fn f_value(spec: &PotentialSpec, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("f(z) requires z >= 0, got {z}")));
    }
    Ok(shape(spec, z))
}

fn shape(spec: &PotentialSpec, z: f64) -> f64 {
    match spec.family {
        Family::PureCoulomb => 1.0,
        Family::Screened => (-z).exp(),
        Family::Truncated => {
            let p = spec.p;
            if z <= 1.0 {
                (-(z.powf(p)).ln_1p() / p).exp()
            } else {
                // z^p may overflow; factor out z.
                (-(z.powf(-p)).ln_1p() / p).exp() / z
            }
        }
    }
}

/// `V(r) = -f(beta/r)/r`.
pub fn potential_value(spec: &PotentialSpec, r: f64) -> Result<f64> {
    check_radius(r)?;
    let beta = spec.beta;
    let v = match spec.family {
        Family::PureCoulomb => -1.0 / r,
        Family::Screened => {
            let z = beta / r;
            if z > SCREENED_EXPONENT_CUTOFF {
                -0.0
            } else {
                -(-z).exp() / r
            }
        }
        Family::Truncated => {
            // (r^p + beta^p)^(1/p) = big * (1 + (small/big)^p)^(1/p)
            let (big, small) = if r >= beta { (r, beta) } else { (beta, r) };
            let ratio = small / big;
            let norm = big * ((ratio.powf(spec.p)).ln_1p() / spec.p).exp();
            -1.0 / norm
        }
    };
    Ok(v)
}

/// Potential of the scaled Hamiltonian, `-beta f(1/r)/r`.
pub fn scaled_potential_value(spec: &PotentialSpec, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(-spec.beta * shape(spec, 1.0 / r) / r)
}

/// Dimensionful model parameters: `hbar`, the (reduced) mass, the coupling
/// strength (`K` or `A`, energy times length) and the length parameter
/// (`r0` or `B`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionfulInputs {
    pub hbar: f64,
    pub mass: f64,
    pub strength: f64,
    pub length_param: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedUnits {
    pub beta: f64,
    pub length_unit: f64,
    pub energy_unit: f64,
}

/// Length unit `L = hbar^2/(m k)`, energy unit `eps = m k^2/hbar^2` and the
/// dimensionless `beta = length_param / L`.
pub fn reduce_units(inputs: &DimensionfulInputs) -> Result<ReducedUnits> {
    let named = [
        ("hbar", inputs.hbar),
        ("mass", inputs.mass),
        ("strength", inputs.strength),
        ("length_param", inputs.length_param),
    ];
    for (name, value) in named {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Domain(format!(
                "{name} must be finite and > 0, got {value}"
            )));
        }
    }
    let hbar2 = inputs.hbar * inputs.hbar;
    let length_unit = hbar2 / (inputs.mass * inputs.strength);
    let energy_unit = inputs.mass * inputs.strength * inputs.strength / hbar2;
    Ok(ReducedUnits {
        beta: inputs.length_param / length_unit,
        length_unit,
        energy_unit,
    })
}
