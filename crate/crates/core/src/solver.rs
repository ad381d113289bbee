//! Radial eigensolver for `H = -1/2 nabla^2 + V(r)` at fixed angular
//! momentum.
//!
//! With `u(r) = r R(r)` the radial equation is
//! `-1/2 u'' + W(r) u = E u`, `W(r) = V(r) + l(l+1)/(2 r^2)`, with
//! `u(0) = u(r_max) = 0`. The 3-point stencil on the uniform interior grid
//! `r_i = i h`, `h = r_max/(n+1)`, gives a symmetric tridiagonal matrix with
//! `d_i = 1/h^2 + W(r_i)` and `e_i = -1/(2 h^2)`. Its error is `O(h^2)`,
//! which [`refine_by_extrapolation`] removes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{potential_value, scaled_potential_value, PotentialSpec};
use crate::tridiag::SymTridiagonal;

pub const MIN_GRID_POINTS: usize = 16;
pub const DEFAULT_R_MAX: f64 = 200.0;
pub const DEFAULT_N_POINTS: usize = 8000;

/// Eigenvalues closer than this are treated as a solver failure; the radial
/// operator at fixed `l` has a simple spectrum.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// Uniform interior grid on `(0, r_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    r_max: f64,
    n_points: usize,
}

impl GridSpec {
    pub fn new(r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::Domain(format!(
                "r_max must be finite and > 0, got {r_max}"
            )));
        }
        if n_points < MIN_GRID_POINTS {
            return Err(Error::Domain(format!(
                "n_points must be >= {MIN_GRID_POINTS}, got {n_points}"
            )));
        }
        Ok(Self { r_max, n_points })
    }

    /// Grid on `(0, r_max)` with spacing `step`; `r_max` must be an integer
    /// multiple of `step` (to 1e-9 relative).
    pub fn with_step(r_max: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::Domain(format!("grid step must be > 0, got {step}")));
        }
        let intervals = (r_max / step).round();
        if intervals < 1.0 || ((intervals * step - r_max) / r_max).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "r_max = {r_max} is not a multiple of the step {step}"
            )));
        }
        Self::new(r_max, intervals as usize - 1)
    }

    pub fn default_grid() -> Self {
        Self {
            r_max: DEFAULT_R_MAX,
            n_points: DEFAULT_N_POINTS,
        }
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn step(&self) -> f64 {
        self.r_max / (self.n_points as f64 + 1.0)
    }

    /// Node `r_i = i h` for `i = 1..=n_points`.
    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (1..=self.n_points).map(move |i| i as f64 * h)
    }

    /// Same box, half the number of nodes: the coarse partner for
    /// two-grid extrapolation.
    pub fn coarsened(&self) -> Result<Self> {
        Self::new(self.r_max, self.n_points / 2)
    }

    /// Box with radius multiplied by `factor`, same node count.
    pub fn stretched(&self, factor: f64) -> Result<Self> {
        Self::new(self.r_max * factor, self.n_points)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::default_grid()
    }
}

/// One radial eigenproblem: potential, angular momentum, grid, and whether
/// the scaled Hamiltonian `-1/2 nabla^2 - beta f(1/r)/r` is used instead of
/// `-1/2 nabla^2 - f(beta/r)/r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProblem {
    pub spec: PotentialSpec,
    pub l: u32,
    pub grid: GridSpec,
    pub use_scaled_form: bool,
}

impl RadialProblem {
    pub fn new(spec: PotentialSpec, l: u32, grid: GridSpec) -> Self {
        Self {
            spec,
            l,
            grid,
            use_scaled_form: false,
        }
    }

    pub fn scaled(spec: PotentialSpec, l: u32, grid: GridSpec) -> Self {
        Self {
            spec,
            l,
            grid,
            use_scaled_form: true,
        }
    }

    pub fn with_grid(&self, grid: GridSpec) -> Self {
        Self { grid, ..*self }
    }

    /// `W(r) = V(r) + l(l+1)/(2 r^2)`.
    pub fn effective_potential(&self, r: f64) -> Result<f64> {
        let v = if self.use_scaled_form {
            scaled_potential_value(&self.spec, r)?
        } else {
            potential_value(&self.spec, r)?
        };
        let l = f64::from(self.l);
        Ok(v + l * (l + 1.0) / (2.0 * r * r))
    }

    /// Number of eigenvalues of the discretized operator strictly below 0.
    pub fn negative_eigenvalue_count(&self) -> Result<usize> {
        Ok(build_tridiagonal(self)?.sturm_count(0.0))
    }
}

/// Assembles the finite-difference operator.
pub fn build_tridiagonal(problem: &RadialProblem) -> Result<SymTridiagonal> {
    let grid = &problem.grid;
    let h = grid.step();
    let kinetic = 1.0 / (h * h);
    let mut diagonal = Vec::with_capacity(grid.n_points());
    for (idx, r) in grid.nodes().enumerate() {
        let w = problem.effective_potential(r)?;
        let d = kinetic + w;
        if !d.is_finite() {
            return Err(Error::Overflow {
                index: idx + 1,
                r,
                value: w,
            });
        }
        diagonal.push(d);
    }
    let off_diagonal = vec![-0.5 * kinetic; grid.n_points() - 1];
    SymTridiagonal::new(diagonal, off_diagonal)
}

/// Lowest eigenpairs of one radial problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub energies: Vec<f64>,
    /// `u_k` at the grid nodes, normalized so that `sum u_i^2 h = 1`.
    pub eigenfunctions: Vec<Vec<f64>>,
    pub grid: GridSpec,
    pub negative_count: usize,
}

impl EigenResult {
    pub fn norm(&self, k: usize) -> f64 {
        let h = self.grid.step();
        self.eigenfunctions[k].iter().map(|u| u * u * h).sum()
    }
}

/// The `count` lowest eigenvalues and their eigenfunctions.
pub fn lowest_eigenpairs(problem: &RadialProblem, count: usize) -> Result<EigenResult> {
    if count == 0 {
        return Err(Error::Precondition(
            "at least one eigenpair must be requested".into(),
        ));
    }
    if count > problem.grid.n_points() {
        return Err(Error::Precondition(format!(
            "requested {count} eigenpairs on a grid of {} nodes",
            problem.grid.n_points()
        )));
    }
    let matrix = build_tridiagonal(problem)?;
    let energies = matrix.lowest_eigenvalues(count)?;
    check_simple_spectrum(&energies)?;

    let h = problem.grid.step();
    let cluster_width = 1e-3 * matrix.norm();
    let mut unit_vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
    for (k, &energy) in energies.iter().enumerate() {
        let neighbours: Vec<&[f64]> = unit_vectors
            .iter()
            .zip(&energies)
            .filter(|(_, e)| (energy - **e).abs() < cluster_width)
            .map(|(v, _)| v.as_slice())
            .collect();
        let v = matrix.inverse_iteration(energy, &neighbours, k + 1)?;
        unit_vectors.push(v);
    }
    let scale = 1.0 / h.sqrt();
    let eigenfunctions = unit_vectors
        .into_iter()
        .map(|v| v.into_iter().map(|x| x * scale).collect())
        .collect();
    let negative_count = energies.iter().filter(|e| **e < 0.0).count();
    Ok(EigenResult {
        energies,
        eigenfunctions,
        grid: problem.grid,
        negative_count,
    })
}

/// Eigenvalues only; skips the eigenvector work.
pub fn lowest_energies(problem: &RadialProblem, count: usize) -> Result<Vec<f64>> {
    if count == 0 || count > problem.grid.n_points() {
        return Err(Error::Precondition(format!(
            "requested {count} eigenvalues on a grid of {} nodes",
            problem.grid.n_points()
        )));
    }
    let energies = build_tridiagonal(problem)?.lowest_eigenvalues(count)?;
    check_simple_spectrum(&energies)?;
    Ok(energies)
}

fn check_simple_spectrum(energies: &[f64]) -> Result<()> {
    for (k, pair) in energies.windows(2).enumerate() {
        if pair[1] - pair[0] <= DEGENERACY_TOLERANCE {
            return Err(Error::Convergence {
                index: k + 2,
                reason: format!(
                    "eigenvalues {} and {} coincide within {DEGENERACY_TOLERANCE:e}",
                    pair[0], pair[1]
                ),
            });
        }
    }
    Ok(())
}

/// Richardson-extrapolated energies with their error estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolated {
    /// Energies on the finest grid of the ladder.
    pub finest: Vec<f64>,
    pub energies: Vec<f64>,
    /// `|E* - E(finest h)|` per level.
    pub error_estimates: Vec<f64>,
}

/// Fits `E(h) = E* + c h^2` through the two finest grids of the ladder.
pub fn refine_by_extrapolation(
    problem: &RadialProblem,
    count: usize,
    grid_ladder: &[GridSpec],
) -> Result<Extrapolated> {
    if grid_ladder.len() < 2 {
        return Err(Error::InconsistentLadder(format!(
            "need at least two grids, got {}",
            grid_ladder.len()
        )));
    }
    let r_max = grid_ladder[0].r_max();
    if grid_ladder.iter().any(|g| g.r_max() != r_max) {
        return Err(Error::InconsistentLadder(
            "r_max differs across the ladder".into(),
        ));
    }
    if grid_ladder.windows(2).any(|w| w[1].step() >= w[0].step()) {
        return Err(Error::InconsistentLadder(
            "grid steps must be strictly decreasing".into(),
        ));
    }
    let coarse = grid_ladder[grid_ladder.len() - 2];
    let fine = grid_ladder[grid_ladder.len() - 1];
    let e_coarse = lowest_energies(&problem.with_grid(coarse), count)?;
    let e_fine = lowest_energies(&problem.with_grid(fine), count)?;
    let (hc2, hf2) = (coarse.step().powi(2), fine.step().powi(2));
    let energies: Vec<f64> = e_coarse
        .iter()
        .zip(&e_fine)
        .map(|(c, f)| richardson(*c, *f, hc2, hf2))
        .collect();
    let error_estimates = energies
        .iter()
        .zip(&e_fine)
        .map(|(x, f)| (x - f).abs())
        .collect();
    Ok(Extrapolated {
        finest: e_fine,
        energies,
        error_estimates,
    })
}

/// Zero-spacing limit of `E(h) = E* + c h^2` through two samples.
pub fn richardson(e_coarse: f64, e_fine: f64, h_coarse_sq: f64, h_fine_sq: f64) -> f64 {
    (h_coarse_sq * e_fine - h_fine_sq * e_coarse) / (h_coarse_sq - h_fine_sq)
}

/// Quadrature `sum_i u_i^2 g(r_i) h`.
pub fn expectation_value<G>(u: &[f64], grid: &GridSpec, g: G) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if u.len() != grid.n_points() {
        return Err(Error::Precondition(format!(
            "eigenfunction has {} values for a grid of {} nodes",
            u.len(),
            grid.n_points()
        )));
    }
    let h = grid.step();
    let mut acc = 0.0;
    for (ui, r) in u.iter().zip(grid.nodes()) {
        let gi = g(r);
        if !gi.is_finite() {
            return Err(Error::Domain(format!(
                "observable is not finite at r = {r}"
            )));
        }
        acc += ui * ui * gi;
    }
    Ok(acc * h)
}

/// Sign changes of `u`, ignoring components below `1e-10` of its peak.
pub fn count_nodes(u: &[f64]) -> usize {
    let peak = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let threshold = 1e-10 * peak;
    let mut last_sign = 0.0;
    let mut changes = 0;
    for v in u.iter().filter(|v| v.abs() > threshold) {
        let s = v.signum();
        if last_sign != 0.0 && s != last_sign {
            changes += 1;
        }
        last_sign = s;
    }
    changes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hydrogen(l: u32, grid: GridSpec) -> RadialProblem {
        RadialProblem::new(PotentialSpec::coulomb(), l, grid)
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(10.0, 15).is_err());
        assert!(GridSpec::new(0.0, 100).is_err());
        assert!(GridSpec::new(f64::INFINITY, 100).is_err());
        let g = GridSpec::with_step(50.0, 0.025).unwrap();
        assert_eq!(g.n_points(), 1999);
        assert!((g.step() - 0.025).abs() < 1e-15);
        assert!(GridSpec::with_step(50.0, 0.03).is_err());
    }

    #[test]
    fn diagonal_entries_by_hand() {
        // h = 0.5 and r_1 = 0.5: d_1 = 1/h^2 - 1/r_1 = 2.
        let grid = GridSpec::new(8.5, 16).unwrap();
        let t = build_tridiagonal(&hydrogen(0, grid)).unwrap();
        assert!((t.diagonal[0] - 2.0).abs() < 1e-14);
        assert!(t.off_diagonal.iter().all(|e| *e == -2.0));

        // h = 1, r_1 = 1, l = 1: d_1 = 1 + 1 - e^-1.
        let grid = GridSpec::new(17.0, 16).unwrap();
        let spec = PotentialSpec::screened(1.0).unwrap();
        let t = build_tridiagonal(&RadialProblem::new(spec, 1, grid)).unwrap();
        let expected = 1.0 + 1.0 - (-1.0_f64).exp();
        assert!((t.diagonal[0] - expected).abs() < 1e-14);
        assert!(t.off_diagonal.iter().all(|e| *e == -0.5));
    }

    #[test]
    fn kinetic_stencil_is_potential_independent() {
        let grid = GridSpec::new(20.0, 99).unwrap();
        let a = build_tridiagonal(&hydrogen(0, grid)).unwrap();
        let spec = PotentialSpec::truncated(0.7, 3.0).unwrap();
        let b = build_tridiagonal(&RadialProblem::scaled(spec, 2, grid)).unwrap();
        assert_eq!(a.off_diagonal, b.off_diagonal);
        let h = grid.step();
        assert!(a.off_diagonal.iter().all(|e| *e == -1.0 / (2.0 * h * h)));
    }

    #[test]
    fn hydrogen_levels_before_extrapolation() {
        let result = lowest_eigenpairs(&hydrogen(0, GridSpec::default()), 3).unwrap();
        let exact = [-0.5, -0.125, -1.0 / 18.0];
        for (e, x) in result.energies.iter().zip(exact) {
            assert!((e - x).abs() < 2e-3, "{e} vs {x}");
        }
        assert_eq!(result.negative_count, 3);
        for k in 0..3 {
            assert!((result.norm(k) - 1.0).abs() < 1e-10);
            assert_eq!(count_nodes(&result.eigenfunctions[k]), k);
        }
    }

    #[test]
    fn zero_count_rejected() {
        let problem = hydrogen(0, GridSpec::new(50.0, 100).unwrap());
        assert!(matches!(
            lowest_eigenpairs(&problem, 0),
            Err(Error::Precondition(_))
        ));
        assert!(lowest_eigenpairs(&problem, 101).is_err());
    }

    #[test]
    fn repeated_solves_are_identical() {
        let spec = PotentialSpec::screened(0.5).unwrap();
        let problem = RadialProblem::new(spec, 1, GridSpec::new(100.0, 2000).unwrap());
        let a = lowest_eigenpairs(&problem, 4).unwrap();
        let b = lowest_eigenpairs(&problem, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hydrogen_extrapolation() {
        let problem = hydrogen(0, GridSpec::default());
        let ladder = [
            GridSpec::new(200.0, 4000).unwrap(),
            GridSpec::new(200.0, 8000).unwrap(),
        ];
        let out = refine_by_extrapolation(&problem, 2, &ladder).unwrap();
        assert!((out.energies[0] + 0.5).abs() < 1e-5);
        assert!((out.energies[1] + 0.125).abs() < 1e-5);
        assert!(out.error_estimates.iter().all(|e| *e >= 0.0));
    }

    #[test]
    fn ladder_validation() {
        let problem = hydrogen(0, GridSpec::default());
        let mixed = [
            GridSpec::new(100.0, 400).unwrap(),
            GridSpec::new(200.0, 800).unwrap(),
        ];
        assert!(matches!(
            refine_by_extrapolation(&problem, 1, &mixed),
            Err(Error::InconsistentLadder(_))
        ));
        let reversed = [
            GridSpec::new(100.0, 800).unwrap(),
            GridSpec::new(100.0, 400).unwrap(),
        ];
        assert!(refine_by_extrapolation(&problem, 1, &reversed).is_err());
        assert!(refine_by_extrapolation(&problem, 1, &reversed[..1]).is_err());
    }

    #[test]
    fn hydrogen_expectations() {
        let result = lowest_eigenpairs(&hydrogen(0, GridSpec::default()), 1).unwrap();
        let u = &result.eigenfunctions[0];
        let grid = result.grid;
        let one = expectation_value(u, &grid, |_| 1.0).unwrap();
        assert!((one - 1.0).abs() < 1e-10);
        let inv_r = expectation_value(u, &grid, |r| 1.0 / r).unwrap();
        assert!((inv_r - 1.0).abs() < 1e-3, "<1/r> = {inv_r}");
        let r = expectation_value(u, &grid, |r| r).unwrap();
        assert!((r - 1.5).abs() < 1e-3, "<r> = {r}");
        assert!(expectation_value(u, &grid, |_| f64::NAN).is_err());
    }

    #[test]
    fn scaled_free_particle_at_zero_beta() {
        let spec = PotentialSpec::screened(0.0).unwrap();
        let grid = GridSpec::new(50.0, 4000).unwrap();
        let result = lowest_eigenpairs(&RadialProblem::scaled(spec, 0, grid), 3).unwrap();
        assert_eq!(result.negative_count, 0);
        let h = grid.step();
        for (k, e) in result.energies.iter().enumerate() {
            // Exact eigenvalues of the discrete free Laplacian.
            let theta = (k + 1) as f64 * std::f64::consts::PI / (grid.n_points() + 1) as f64;
            let exact = (1.0 - theta.cos()) / (h * h);
            assert!((e - exact).abs() < 1e-12, "{e} vs {exact}");
            assert!(*e > 0.0);
        }
        let lowest = std::f64::consts::PI.powi(2) / (2.0 * 50.0 * 50.0);
        assert!((result.energies[0] - lowest).abs() < 1e-8);
    }

    #[test]
    fn node_counting() {
        assert_eq!(count_nodes(&[1.0, 2.0, 1.0]), 0);
        assert_eq!(count_nodes(&[1.0, -2.0, 1.0]), 2);
        assert_eq!(count_nodes(&[1.0, 1e-14, -1e-14, 1.0]), 0);
        assert_eq!(count_nodes(&[1.0, 0.0, -1.0]), 1);
    }

    #[test]
    fn coulomb_domination() {
        let grid = GridSpec::new(150.0, 3000).unwrap();
        let specs = [
            PotentialSpec::screened(0.3).unwrap(),
            PotentialSpec::screened(1.5).unwrap(),
            PotentialSpec::truncated(0.3, 2.0).unwrap(),
            PotentialSpec::truncated(1.5, 1.0).unwrap(),
        ];
        for l in 0..=2 {
            let baseline = lowest_energies(&hydrogen(l, grid), 5).unwrap();
            for spec in &specs {
                let e = lowest_energies(&RadialProblem::new(*spec, l, grid), 5).unwrap();
                for (a, b) in e.iter().zip(&baseline) {
                    assert!(a >= b, "l={l} {spec:?}: {a} < {b}");
                }
            }
        }
    }

    #[test]
    fn box_size_monotonicity() {
        let spec = PotentialSpec::screened(0.5).unwrap();
        let h = 0.05;
        let mut previous: Option<Vec<f64>> = None;
        for r_max in [20.0, 40.0, 80.0, 160.0] {
            let grid = GridSpec::with_step(r_max, h).unwrap();
            let e = lowest_energies(&RadialProblem::new(spec, 0, grid), 4).unwrap();
            if let Some(prev) = &previous {
                for (small_box, big_box) in prev.iter().zip(&e) {
                    assert!(small_box >= big_box);
                }
            }
            previous = Some(e);
        }
    }

    #[test]
    fn second_order_convergence() {
        let spec = PotentialSpec::screened(0.5).unwrap();
        let problem = RadialProblem::new(spec, 0, GridSpec::default());
        let e: Vec<Vec<f64>> = [999, 1999, 3999]
            .iter()
            .map(|&n| {
                lowest_energies(&problem.with_grid(GridSpec::new(200.0, n).unwrap()), 3).unwrap()
            })
            .collect();
        for (k, ((a, b), c)) in e[0].iter().zip(&e[1]).zip(&e[2]).enumerate() {
            let ratio = (a - b) / (b - c);
            assert!((ratio - 4.0).abs() < 0.6, "level {k}: ratio {ratio}");
        }
    }

    #[test]
    fn overflow_reported() {
        // Tiny first node makes l(l+1)/(2 r^2) overflow.
        let grid = GridSpec::new(1e-160, 16).unwrap();
        let problem = hydrogen(3, grid);
        assert!(matches!(
            build_tridiagonal(&problem),
            Err(Error::Overflow { index: 1, .. })
        ));
    }
}
