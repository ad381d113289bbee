//! The scaled Hamiltonian `beta^2 H(beta) = -1/2 nabla^2 - beta f(1/r)/r`
//! and a numerical check of the Hellmann-Feynman relation
//!
//! ```text
//! d/d beta [beta^2 E(beta)] = -<f(1/r)/r>
//! ```
//!
//! Both sides are computed independently: the left side by a central
//! difference of scaled eigenvalues, the right side as a quadrature over the
//! scaled problem's own eigenfunction. No analytic derivative of the solver
//! is used.
//!
//! Grids passed to this module are in scaled coordinates. A physical box of
//! radius `R` corresponds to a scaled box of radius `R/beta`.

use std::thread;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{f_value, PotentialSpec};
use crate::solver::{
    expectation_value, lowest_eigenpairs, lowest_energies, GridSpec, RadialProblem,
};

/// Relative residual accepted by [`HftReport::passes`].
pub const HFT_RELATIVE_TOLERANCE: f64 = 1e-3;

/// Scaled eigenvalues closer to zero than this are not used as a divisor.
pub const DIVISION_GUARD: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HftReport {
    pub beta: f64,
    pub k: usize,
    pub l: u32,
    /// Finite-difference estimate of `d(beta^2 E)/d beta`.
    pub lhs_fd: f64,
    /// `-<f(1/r)/r>` in the scaled eigenfunction at `beta`.
    pub rhs_expect: f64,
    pub residual: f64,
    pub delta_beta: f64,
    /// True when a one-sided (forward) difference had to be used.
    pub one_sided: bool,
}

impl HftReport {
    pub fn relative_residual(&self) -> f64 {
        self.residual / self.rhs_expect.abs()
    }

    pub fn passes(&self) -> bool {
        self.rhs_expect < 0.0 && self.residual <= HFT_RELATIVE_TOLERANCE * self.rhs_expect.abs()
    }
}

/// Maps a physical box onto scaled coordinates (`r_max -> r_max/beta`, same
/// node count).
pub fn scaled_grid_for(physical: &GridSpec, beta: f64) -> Result<GridSpec> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!(
            "scaled grid needs beta > 0, got {beta}"
        )));
    }
    physical.stretched(1.0 / beta)
}

/// Default step `1e-3 max(beta, 1)`, capped at `beta/10` so a central
/// difference stays admissible.
pub fn default_delta_beta(beta: f64) -> f64 {
    let d = 1e-3 * beta.max(1.0);
    if beta > 0.0 {
        d.min(beta / 10.0)
    } else {
        d
    }
}

fn check_level(k: usize, grid: &GridSpec) -> Result<()> {
    if k == 0 || k > grid.n_points() {
        return Err(Error::Precondition(format!(
            "level k = {k} outside 1..={}",
            grid.n_points()
        )));
    }
    Ok(())
}

/// k-th eigenvalue (1-based) of the scaled Hamiltonian.
pub fn scaled_eigenvalue(spec: &PotentialSpec, k: usize, l: u32, grid: &GridSpec) -> Result<f64> {
    check_level(k, grid)?;
    let energies = lowest_energies(&RadialProblem::scaled(*spec, l, *grid), k)?;
    Ok(energies[k - 1])
}

/// `beta^2 E_k(beta)` from the unscaled problem on the box `beta r_max`
/// (same node count), i.e. the same physical region as the scaled grid.
pub fn unscaled_times_beta_squared(
    spec: &PotentialSpec,
    k: usize,
    l: u32,
    grid: &GridSpec,
) -> Result<f64> {
    check_level(k, grid)?;
    let beta = spec.beta();
    let physical = grid.stretched(beta)?;
    let energies = lowest_energies(&RadialProblem::new(*spec, l, physical), k)?;
    Ok(beta * beta * energies[k - 1])
}

/// Relative mismatch `|beta^2 E_k - E~_k| / |E~_k|` between the two routes.
pub fn scaling_consistency(spec: &PotentialSpec, k: usize, l: u32, grid: &GridSpec) -> Result<f64> {
    if !(spec.beta() > 0.0) {
        return Err(Error::Precondition(
            "scaling consistency needs beta > 0".into(),
        ));
    }
    let scaled = scaled_eigenvalue(spec, k, l, grid)?;
    if scaled.abs() < DIVISION_GUARD {
        return Err(Error::DivisionGuard(scaled));
    }
    let unscaled = unscaled_times_beta_squared(spec, k, l, grid)?;
    Ok((unscaled - scaled).abs() / scaled.abs())
}

/// Compares a finite-difference derivative of the scaled eigenvalue with
/// `-<f(1/r)/r>`.
///
/// For `beta > 0` the step must satisfy `delta <= beta/10` and a central
/// difference is used. At `beta = 0` the second-order forward difference
/// `(-3 E(0) + 4 E(d) - E(2d)) / (2d)` is used and the report is flagged.
pub fn hft_check(
    spec: &PotentialSpec,
    k: usize,
    l: u32,
    grid: &GridSpec,
    delta_beta: f64,
) -> Result<HftReport> {
    check_level(k, grid)?;
    let beta = spec.beta();
    if !(delta_beta.is_finite() && delta_beta > 0.0) {
        return Err(Error::Domain(format!(
            "delta_beta must be > 0, got {delta_beta}"
        )));
    }
    let one_sided = beta == 0.0;
    if !one_sided && delta_beta > beta / 10.0 {
        return Err(Error::StepTooLarge {
            delta: delta_beta,
            limit: beta / 10.0,
        });
    }

    let shifted = |b: f64| -> Result<f64> { scaled_eigenvalue(&spec.with_beta(b)?, k, l, grid) };
    let centre = || -> Result<f64> {
        let result = lowest_eigenpairs(&RadialProblem::scaled(*spec, l, *grid), k)?;
        let u = &result.eigenfunctions[k - 1];
        let expect = expectation_value(u, grid, |r| {
            f_value(spec, 1.0 / r).map(|f| f / r).unwrap_or(f64::NAN)
        })?;
        Ok(-expect)
    };

    // The three solves are independent.
    let (lhs_fd, rhs_expect) = thread::scope(|s| -> Result<(f64, f64)> {
        let rhs = s.spawn(centre);
        let lhs = if one_sided {
            let e0 = s.spawn(|| shifted(beta));
            let e1 = s.spawn(|| shifted(beta + delta_beta));
            let e2 = shifted(beta + 2.0 * delta_beta)?;
            let (e0, e1) = (join(e0)?, join(e1)?);
            (-3.0 * e0 + 4.0 * e1 - e2) / (2.0 * delta_beta)
        } else {
            let plus = s.spawn(|| shifted(beta + delta_beta));
            let minus = shifted(beta - delta_beta)?;
            (join(plus)? - minus) / (2.0 * delta_beta)
        };
        Ok((lhs, join(rhs)?))
    })?;

    Ok(HftReport {
        beta,
        k,
        l,
        lhs_fd,
        rhs_expect,
        residual: (lhs_fd - rhs_expect).abs(),
        delta_beta,
        one_sided,
    })
}

fn join<T>(handle: thread::ScopedJoinHandle<'_, Result<T>>) -> Result<T> {
    match handle.join() {
        Ok(r) => r,
        Err(panic) => std::panic::resume_unwind(panic),
    }
}

/// Residuals of [`hft_check`] over the steps `delta * 2^j`, largest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HftLadder {
    pub deltas: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `log2(residual_j / residual_{j+1})` for consecutive halvings.
    pub orders: Vec<f64>,
}

impl HftLadder {
    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Runs [`hft_check`] at `delta * 2^(levels-1), ..., 2 delta, delta`.
pub fn hft_ladder(
    spec: &PotentialSpec,
    k: usize,
    l: u32,
    grid: &GridSpec,
    delta_beta: f64,
    levels: usize,
) -> Result<HftLadder> {
    if levels < 2 {
        return Err(Error::Precondition(
            "a step ladder needs at least two steps".into(),
        ));
    }
    let deltas: Vec<f64> = (0..levels)
        .rev()
        .map(|j| delta_beta * f64::from(1u32 << j))
        .collect();
    let residuals = deltas
        .iter()
        .map(|d| hft_check(spec, k, l, grid, *d).map(|r| r.residual))
        .collect::<Result<Vec<_>>>()?;
    let orders = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(HftLadder {
        deltas,
        residuals,
        orders,
    })
}
