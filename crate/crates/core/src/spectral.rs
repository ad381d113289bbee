//! Parameter scans over `beta` and the spectral properties checked on them:
//! strict decrease of `beta^2 E_k(beta)`, negativity of `E_k(beta)`, the
//! Coulomb lower bound `-1/(2 (k+l)^2) <= E_{k,l}(beta)`, and growth of the
//! bound-state count with the box radius.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{Family, PotentialSpec};
use crate::solver::{refine_by_extrapolation, GridSpec, RadialProblem};

/// Required gap between consecutive `beta^2 E_k` values.
pub const MONOTONE_MARGIN: f64 = 1e-10;

/// Absolute part of the sandwich tolerance; the per-level extrapolation
/// error estimate is added to it.
pub const SANDWICH_TOLERANCE: f64 = 1e-6;

/// Levels with `E_k > -BOX_LIMIT_FACTOR * (free-particle level spacing)` are
/// considered box-limited.
pub const BOX_LIMIT_FACTOR: f64 = 10.0;

/// Spacing between the two lowest free-particle levels of a Dirichlet box,
/// `3 pi^2 / (2 R^2)`.
pub fn free_particle_spacing(grid: &GridSpec) -> f64 {
    3.0 * std::f64::consts::PI.powi(2) / (2.0 * grid.r_max().powi(2))
}

pub fn box_limit_threshold(grid: &GridSpec) -> f64 {
    -BOX_LIMIT_FACTOR * free_particle_spacing(grid)
}

/// Exact Coulomb level with principal quantum number `k + l`.
pub fn coulomb_level(k: usize, l: u32) -> f64 {
    let n = k as f64 + f64::from(l);
    -0.5 / (n * n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub beta: f64,
    /// `E_1..E_kmax` on the scan grid.
    pub energies: Vec<f64>,
    /// `beta^2 E_k`.
    pub scaled_values: Vec<f64>,
    /// Two-grid extrapolated energies and their error estimates.
    pub extrapolated: Vec<f64>,
    pub error_estimates: Vec<f64>,
    pub box_limited: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaScan {
    pub family: Family,
    pub p: f64,
    pub l: u32,
    pub k_max: usize,
    pub grid: GridSpec,
    pub rows: Vec<ScanRow>,
    /// Set when a solver failure cut the scan short.
    #[serde(default)]
    pub partial: bool,
}

impl BetaScan {
    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_vec(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }

    pub fn betas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.beta).collect()
    }
}

/// Where a check failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub k: usize,
    pub row: usize,
    pub beta: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub passed: bool,
    pub checked: usize,
    pub first_violation: Option<Violation>,
}

impl Verdict {
    fn from_first(checked: usize, first_violation: Option<Violation>) -> Self {
        Self {
            passed: first_violation.is_none(),
            checked,
            first_violation,
        }
    }
}

/// Evenly spaced `beta` values `from, from + step, ...` up to `to`
/// (inclusive within a hundredth of a step).
pub fn beta_range(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Domain(format!("beta step must be > 0, got {step}")));
    }
    if !(from.is_finite() && to.is_finite() && from >= 0.0 && to >= from) {
        return Err(Error::Domain(format!(
            "empty or invalid beta range [{from}, {to}]"
        )));
    }
    let n = ((to - from) / step + 0.01).floor() as usize;
    Ok((0..=n).map(|j| from + j as f64 * step).collect())
}

fn solve_row(spec: &PotentialSpec, l: u32, k_max: usize, grid: &GridSpec) -> Result<ScanRow> {
    let beta = spec.beta();
    let ladder = [grid.coarsened()?, *grid];
    let problem = RadialProblem::new(*spec, l, *grid);
    let refined = refine_by_extrapolation(&problem, k_max, &ladder).map_err(|e| Error::AtBeta {
        beta,
        source: Box::new(e),
    })?;
    let threshold = box_limit_threshold(grid);
    Ok(ScanRow {
        beta,
        scaled_values: refined.finest.iter().map(|e| beta * beta * e).collect(),
        box_limited: refined.finest.iter().map(|e| *e > threshold).collect(),
        energies: refined.finest,
        extrapolated: refined.energies,
        error_estimates: refined.error_estimates,
    })
}

fn pool(parallelism: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Precondition(format!("cannot start worker pool: {e}")))
}

fn validate_scan_request(p: f64, k_max: usize, betas: &[f64]) -> Result<()> {
    if k_max == 0 {
        return Err(Error::Precondition("k_max must be at least 1".into()));
    }
    if betas.is_empty() {
        return Err(Error::Precondition("beta grid is empty".into()));
    }
    if betas.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
        return Err(Error::Domain("beta values must be finite and >= 0".into()));
    }
    if betas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "beta grid must be strictly increasing".into(),
        ));
    }
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::Domain(format!("p must be > 0, got {p}")));
    }
    Ok(())
}

/// Solves every `beta` of the grid, keeping the rows before the first
/// failure. Rows are independent and computed on up to `parallelism`
/// threads.
pub fn run_beta_scan_partial(
    family: Family,
    p: f64,
    l: u32,
    k_max: usize,
    betas: &[f64],
    grid: &GridSpec,
    parallelism: usize,
) -> Result<(BetaScan, Option<Error>)> {
    validate_scan_request(p, k_max, betas)?;
    let specs = betas
        .iter()
        .map(|b| PotentialSpec::new(family, *b, p))
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<Result<ScanRow>> = pool(parallelism)?.install(|| {
        specs
            .par_iter()
            .map(|s| solve_row(s, l, k_max, grid))
            .collect()
    });

    let mut rows = Vec::with_capacity(results.len());
    let mut failure = None;
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    let scan = BetaScan {
        family,
        p,
        l,
        k_max,
        grid: *grid,
        rows,
        partial: failure.is_some(),
    };
    Ok((scan, failure))
}

pub fn run_beta_scan(
    family: Family,
    p: f64,
    l: u32,
    k_max: usize,
    betas: &[f64],
    grid: &GridSpec,
    parallelism: usize,
) -> Result<BetaScan> {
    match run_beta_scan_partial(family, p, l, k_max, betas, grid, parallelism)? {
        (scan, None) => Ok(scan),
        (_, Some(e)) => Err(e),
    }
}

fn check_shape(scan: &BetaScan, min_rows: usize) -> Result<()> {
    if scan.rows.len() < min_rows {
        return Err(Error::Precondition(format!(
            "scan needs at least {min_rows} rows, has {}",
            scan.rows.len()
        )));
    }
    for row in &scan.rows {
        let k = scan.k_max;
        if row.energies.len() != k
            || row.scaled_values.len() != k
            || row.extrapolated.len() != k
            || row.error_estimates.len() != k
            || row.box_limited.len() != k
        {
            return Err(Error::Precondition(format!(
                "row at beta = {} does not carry {k} levels",
                row.beta
            )));
        }
    }
    Ok(())
}

/// Passes iff `beta_{j+1}^2 E_k(beta_{j+1}) < beta_j^2 E_k(beta_j) - margin`
/// for every level and every consecutive pair of rows.
pub fn assert_monotone_decrease(scan: &BetaScan) -> Result<Verdict> {
    check_shape(scan, 2)?;
    let mut checked = 0;
    for (j, pair) in scan.rows.windows(2).enumerate() {
        for k in 0..scan.k_max {
            checked += 1;
            let (before, after) = (pair[0].scaled_values[k], pair[1].scaled_values[k]);
            if !(after < before - MONOTONE_MARGIN) {
                let violation = Violation {
                    k: k + 1,
                    row: j + 1,
                    beta: pair[1].beta,
                    values: vec![before, after],
                };
                return Ok(Verdict::from_first(checked, Some(violation)));
            }
        }
    }
    Ok(Verdict::from_first(checked, None))
}

/// Passes iff every level that is not box-limited has `E_k < 0`.
pub fn assert_negativity(scan: &BetaScan) -> Result<Verdict> {
    check_shape(scan, 1)?;
    let mut checked = 0;
    for (j, row) in scan.rows.iter().enumerate() {
        for k in 0..scan.k_max {
            if row.box_limited[k] {
                continue;
            }
            checked += 1;
            if !(row.energies[k] < 0.0) {
                let violation = Violation {
                    k: k + 1,
                    row: j,
                    beta: row.beta,
                    values: vec![row.energies[k]],
                };
                return Ok(Verdict::from_first(checked, Some(violation)));
            }
        }
    }
    Ok(Verdict::from_first(checked, None))
}

/// Passes iff `-1/(2(k+l)^2) - tol <= E*_k < 0` on every row, with
/// `tol = 1e-6 + error estimate`. Box-limited levels are exempt from the
/// upper bound only.
pub fn assert_sandwich(scan: &BetaScan) -> Result<Verdict> {
    check_shape(scan, 1)?;
    let mut checked = 0;
    for (j, row) in scan.rows.iter().enumerate() {
        for k in 0..scan.k_max {
            checked += 1;
            let lower = coulomb_level(k + 1, scan.l);
            let e = row.extrapolated[k];
            let tol = SANDWICH_TOLERANCE + row.error_estimates[k];
            let above = e >= lower - tol;
            let below = row.box_limited[k] || e < 0.0;
            if !(above && below) {
                let violation = Violation {
                    k: k + 1,
                    row: j,
                    beta: row.beta,
                    values: vec![lower, e, tol],
                };
                return Ok(Verdict::from_first(checked, Some(violation)));
            }
        }
    }
    Ok(Verdict::from_first(checked, None))
}

/// Passes iff `E_k` is nondecreasing in `beta` at every level.
pub fn assert_energy_nondecreasing(scan: &BetaScan) -> Result<Verdict> {
    check_shape(scan, 2)?;
    let mut checked = 0;
    for (j, pair) in scan.rows.windows(2).enumerate() {
        for k in 0..scan.k_max {
            checked += 1;
            if pair[1].energies[k] < pair[0].energies[k] {
                let violation = Violation {
                    k: k + 1,
                    row: j + 1,
                    beta: pair[1].beta,
                    values: vec![pair[0].energies[k], pair[1].energies[k]],
                };
                return Ok(Verdict::from_first(checked, Some(violation)));
            }
        }
    }
    Ok(Verdict::from_first(checked, None))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichRow {
    pub k: usize,
    pub principal: u32,
    pub lower_bound: f64,
    pub energy: f64,
    pub error_estimate: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichTable {
    pub spec: PotentialSpec,
    pub l: u32,
    pub rows: Vec<SandwichRow>,
}

impl SandwichTable {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }
}

/// Checks `-1/(2(k+l)^2) - tol <= E*_{k,l}(beta) < 0` for `k = 1..=k_max`
/// using the extrapolation from `grid` and its coarsened partner.
pub fn coulomb_sandwich(
    spec: &PotentialSpec,
    l: u32,
    k_max: usize,
    grid: &GridSpec,
) -> Result<SandwichTable> {
    let ladder = [grid.coarsened()?, *grid];
    let refined = refine_by_extrapolation(&RadialProblem::new(*spec, l, *grid), k_max, &ladder)?;
    let rows = (0..k_max)
        .map(|i| {
            let k = i + 1;
            let lower_bound = coulomb_level(k, l);
            let energy = refined.energies[i];
            let error_estimate = refined.error_estimates[i];
            let tol = SANDWICH_TOLERANCE + error_estimate;
            SandwichRow {
                k,
                principal: k as u32 + l,
                lower_bound,
                energy,
                error_estimate,
                passed: energy >= lower_bound - tol && energy < 0.0,
            }
        })
        .collect();
    Ok(SandwichTable {
        spec: *spec,
        l,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountEntry {
    pub r_max: f64,
    pub n_points: usize,
    pub negative_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub spec: PotentialSpec,
    pub l: u32,
    pub entries: Vec<CountEntry>,
}

impl CountReport {
    pub fn nondecreasing(&self) -> bool {
        self.entries
            .windows(2)
            .all(|w| w[1].negative_count >= w[0].negative_count)
    }

    /// Largest box holds strictly more bound states than the smallest.
    pub fn grew(&self) -> bool {
        match (self.entries.first(), self.entries.last()) {
            (Some(a), Some(b)) => b.negative_count > a.negative_count,
            _ => false,
        }
    }

    /// Monotone, and strictly growing whenever there is more than one box.
    pub fn passes(&self) -> bool {
        self.nondecreasing() && (self.entries.len() < 2 || self.grew())
    }
}

/// Boxes of radii `radii`, all with spacing `step`.
pub fn fixed_step_ladder(radii: &[f64], step: f64) -> Result<Vec<GridSpec>> {
    radii
        .iter()
        .map(|r| GridSpec::with_step(*r, step))
        .collect()
}

/// Number of negative eigenvalues per box of a fixed-spacing ladder.
pub fn count_growth(spec: &PotentialSpec, l: u32, box_ladder: &[GridSpec]) -> Result<CountReport> {
    if box_ladder.is_empty() {
        return Err(Error::InconsistentLadder("empty box ladder".into()));
    }
    if box_ladder.windows(2).any(|w| w[1].r_max() <= w[0].r_max()) {
        return Err(Error::InconsistentLadder(
            "r_max must be strictly increasing".into(),
        ));
    }
    let h = box_ladder[0].step();
    if box_ladder.iter().any(|g| ((g.step() - h) / h).abs() > 1e-9) {
        return Err(Error::InconsistentLadder(
            "grid step differs across the ladder".into(),
        ));
    }
    let entries = box_ladder
        .iter()
        .map(|g| {
            Ok(CountEntry {
                r_max: g.r_max(),
                n_points: g.n_points(),
                negative_count: RadialProblem::new(*spec, l, *g).negative_eigenvalue_count()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CountReport {
        spec: *spec,
        l,
        entries,
    })
}
