//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 computation failure. Configuration problems are reported on a single
//! stderr line before any computation starts.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::hft::{default_delta_beta, hft_check, hft_ladder, scaled_grid_for};
use crate::potential::{reduce_units, DimensionfulInputs, Family, PotentialSpec};
use crate::report::{Artifact, Cell, Record};
use crate::solver::{refine_by_extrapolation, GridSpec, RadialProblem};
use crate::spectral::{
    assert_monotone_decrease, assert_negativity, beta_range, count_growth, fixed_step_ladder,
    run_beta_scan_partial, BetaScan, Verdict,
};
use crate::verify::{run_all, VerifyConfig, HFT_MIN_ORDER};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;

pub const PARALLELISM_ENV: &str = "HFT_SPECTRA_PARALLELISM";

#[derive(Debug, Parser)]
#[command(
    name = "hft-spectra",
    version,
    about = "Bound-state spectra of screened and truncated Coulomb potentials"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lowest levels of one potential, with two-grid extrapolation.
    Solve(SolveArgs),
    /// Levels over a range of beta, with monotonicity and negativity verdicts.
    Scan(ScanArgs),
    /// Finite-difference derivative of beta^2 E against -<f(1/r)/r>.
    HftCheck(HftArgs),
    /// Number of bound states in boxes of growing radius.
    Count(CountArgs),
    /// Dimensionless beta and the length and energy units.
    Units(UnitsArgs),
    /// Runs every verification check and reports a summary.
    VerifyAll(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse::<Family>().map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct Common {
    /// screened, truncated or coulomb.
    #[arg(long, default_value = "screened", value_parser = parse_family)]
    pub family: Family,
    /// Truncation exponent (truncated family only).
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Orbital angular momentum.
    #[arg(long, default_value_t = 0)]
    pub l: u32,
    /// Box radius.
    #[arg(long, default_value_t = crate::solver::DEFAULT_R_MAX)]
    pub r_max: f64,
    /// Interior grid nodes.
    #[arg(long, default_value_t = crate::solver::DEFAULT_N_POINTS)]
    pub n_points: usize,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads (capped at the available processors).
    #[arg(long, env = PARALLELISM_ENV)]
    pub parallelism: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 3)]
    pub k_max: usize,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0.0)]
    pub beta_from: f64,
    #[arg(long, default_value_t = 2.0)]
    pub beta_to: f64,
    #[arg(long, default_value_t = 0.1)]
    pub beta_step: f64,
    #[arg(long, default_value_t = 3)]
    pub k_max: usize,
    /// Scan cache: reused when it matches the request, written otherwise.
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HftArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Level index (1-based).
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Finite-difference step; defaults to 1e-3 max(beta, 1), at most beta/10.
    #[arg(long)]
    pub delta_beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Box radii, increasing.
    #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
    pub radii: Vec<f64>,
    /// Grid spacing shared by every box.
    #[arg(long, default_value_t = 0.025)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct UnitsArgs {
    #[arg(long)]
    pub hbar: f64,
    #[arg(long)]
    pub mass: f64,
    /// Coupling strength (K or A).
    #[arg(long)]
    pub strength: f64,
    /// Length parameter (r0 or B).
    #[arg(long)]
    pub length_param: f64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
}

enum Failure {
    Config(String),
    Compute(String),
}

impl Failure {
    fn config(e: impl ToString) -> Self {
        Failure::Config(e.to_string())
    }

    fn compute(e: impl ToString) -> Self {
        Failure::Compute(e.to_string())
    }
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let text = e.to_string();
            eprintln!(
                "{}",
                text.lines().next().unwrap_or("error: invalid arguments")
            );
            return EXIT_CONFIG;
        }
    };
    let outcome = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Scan(a) => cmd_scan(a),
        Command::HftCheck(a) => cmd_hft_check(a),
        Command::Count(a) => cmd_count(a),
        Command::Units(a) => cmd_units(a),
        Command::VerifyAll(a) => cmd_verify_all(a),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {}", one_line(&msg));
            EXIT_CONFIG
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: computation failed: {}", one_line(&msg));
            EXIT_COMPUTATION
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn effective_parallelism(requested: Option<usize>) -> Result<usize, Failure> {
    let available = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    match requested {
        Some(0) => Err(Failure::config("parallelism must be at least 1")),
        Some(n) => Ok(n.min(available)),
        None => Ok(available),
    }
}

impl Common {
    fn grid(&self) -> Result<GridSpec, Failure> {
        GridSpec::new(self.r_max, self.n_points).map_err(Failure::config)
    }

    fn spec(&self, beta: f64) -> Result<PotentialSpec, Failure> {
        PotentialSpec::new(self.family, beta, self.p).map_err(Failure::config)
    }

    fn echo(&self) -> Record {
        let mut r = Record::new()
            .with("family", self.family.token())
            .with("l", self.l)
            .with("r_max", self.r_max)
            .with("n_points", self.n_points);
        if self.family == Family::Truncated {
            r.push("p", self.p);
        }
        r
    }

    fn emit(&self, artifact: &Artifact, default: Format) -> Result<(), Failure> {
        emit(
            artifact,
            self.format.unwrap_or(default),
            self.output.as_deref(),
        )
    }
}

fn emit(artifact: &Artifact, format: Format, output: Option<&Path>) -> Result<(), Failure> {
    let write = |out: &mut dyn Write| -> crate::Result<()> {
        match format {
            Format::Csv => artifact.write_csv(&mut *out)?,
            Format::Json => artifact.write_json(&mut *out)?,
        }
        out.flush()?;
        Ok(())
    };
    let result = match output {
        Some(path) => File::create(path)
            .map_err(Error::from)
            .and_then(|f| write(&mut BufWriter::new(f))),
        None => write(&mut io::stdout().lock()),
    };
    result.map_err(|e| Failure::Compute(format!("cannot write output: {e}")))
}

fn verdict_text(v: &crate::Result<Verdict>) -> String {
    match v {
        Ok(v) if v.passed => "pass".into(),
        Ok(v) => match &v.first_violation {
            Some(x) => format!("fail (k={} beta={})", x.k, x.beta),
            None => "fail".into(),
        },
        Err(_) => "skipped".into(),
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<i32, Failure> {
    if a.k_max == 0 {
        return Err(Failure::config("--k-max must be at least 1"));
    }
    let grid = a.common.grid()?;
    let coarse = grid.coarsened().map_err(Failure::config)?;
    if a.k_max > coarse.n_points() {
        return Err(Failure::config("--k-max exceeds the number of grid nodes"));
    }
    let spec = a.common.spec(a.beta)?;
    let problem = RadialProblem::new(spec, a.common.l, grid);
    let refined =
        refine_by_extrapolation(&problem, a.k_max, &[coarse, grid]).map_err(Failure::compute)?;

    let mut artifact = Artifact::new(
        "solve",
        a.common.echo().with("beta", a.beta).with("k_max", a.k_max),
    );
    for k in 0..a.k_max {
        artifact.rows.push(
            Record::new()
                .with("k", k + 1)
                .with("energy", refined.finest[k])
                .with("extrapolated", refined.energies[k])
                .with("error_estimate", refined.error_estimates[k])
                .with("negative", refined.energies[k] < 0.0),
        );
    }
    let bound = refined.energies.iter().filter(|e| **e < 0.0).count();
    artifact.verdicts.push("negative_levels", bound);
    a.common.emit(&artifact, Format::Csv)?;
    Ok(EXIT_OK)
}

fn matches_request(scan: &BetaScan, a: &ScanArgs, grid: &GridSpec, betas: &[f64]) -> bool {
    !scan.partial
        && scan.family == a.common.family
        && scan.p == a.common.p
        && scan.l == a.common.l
        && scan.k_max == a.k_max
        && scan.grid == *grid
        && scan.betas() == betas
}

fn cmd_scan(a: &ScanArgs) -> Result<i32, Failure> {
    if a.k_max == 0 {
        return Err(Failure::config("--k-max must be at least 1"));
    }
    let grid = a.common.grid()?;
    if a.k_max > grid.coarsened().map_err(Failure::config)?.n_points() {
        return Err(Failure::config("--k-max exceeds the number of grid nodes"));
    }
    let betas = beta_range(a.beta_from, a.beta_to, a.beta_step).map_err(Failure::config)?;
    a.common.spec(betas[0])?;
    let parallelism = effective_parallelism(a.common.parallelism)?;

    let cached = a
        .cache
        .as_deref()
        .filter(|p| p.exists())
        .and_then(|p| BetaScan::load(p).ok())
        .filter(|s| matches_request(s, a, &grid, &betas));
    let (scan, failure) = match cached {
        Some(scan) => (scan, None),
        None => {
            let (scan, failure) = run_beta_scan_partial(
                a.common.family,
                a.common.p,
                a.common.l,
                a.k_max,
                &betas,
                &grid,
                parallelism,
            )
            .map_err(Failure::config)?;
            if let (Some(path), None) = (a.cache.as_deref(), &failure) {
                scan.save(path).map_err(Failure::compute)?;
            }
            (scan, failure)
        }
    };

    let echo = a
        .common
        .echo()
        .with("beta_from", a.beta_from)
        .with("beta_to", a.beta_to)
        .with("beta_step", a.beta_step)
        .with("k_max", a.k_max);
    let mut artifact = Artifact::new("scan", echo);
    for row in &scan.rows {
        let mut r = Record::new().with("beta", row.beta);
        for (k, e) in row.energies.iter().enumerate() {
            r.push(&format!("E_{}", k + 1), *e);
        }
        for (k, s) in row.scaled_values.iter().enumerate() {
            r.push(&format!("beta2E_{}", k + 1), *s);
        }
        artifact.rows.push(r);
    }
    artifact.partial = scan.partial;

    let monotone = assert_monotone_decrease(&scan);
    let negative = assert_negativity(&scan);
    artifact
        .verdicts
        .push("monotone_decrease", verdict_text(&monotone));
    artifact
        .verdicts
        .push("negativity", verdict_text(&negative));
    a.common.emit(&artifact, Format::Csv)?;

    if let Some(e) = failure {
        return Err(Failure::compute(e));
    }
    let failed = |v: &crate::Result<Verdict>| matches!(v, Ok(v) if !v.passed);
    if failed(&monotone) || failed(&negative) {
        Ok(EXIT_VERIFICATION)
    } else {
        Ok(EXIT_OK)
    }
}

fn cmd_hft_check(a: &HftArgs) -> Result<i32, Failure> {
    if !(a.beta.is_finite() && a.beta > 0.0) {
        return Err(Failure::config(
            "--beta must be > 0 for a central difference",
        ));
    }
    let spec = a.common.spec(a.beta)?;
    let grid = scaled_grid_for(&a.common.grid()?, a.beta).map_err(Failure::config)?;
    if a.k == 0 || a.k > grid.n_points() {
        return Err(Failure::config(
            "--k must be between 1 and the number of grid nodes",
        ));
    }
    let delta = a.delta_beta.unwrap_or_else(|| default_delta_beta(a.beta));
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Failure::config("--delta-beta must be > 0"));
    }
    if delta > a.beta / 10.0 {
        return Err(Failure::config(format!(
            "--delta-beta {delta} exceeds beta/10"
        )));
    }
    let report = hft_check(&spec, a.k, a.common.l, &grid, delta).map_err(Failure::compute)?;
    let ladder = hft_ladder(&spec, a.k, a.common.l, &grid, delta, 3).map_err(Failure::compute)?;
    let order = ladder.min_order();
    let passed = report.passes() && order >= HFT_MIN_ORDER;

    let echo = a
        .common
        .echo()
        .with("beta", a.beta)
        .with("k", a.k)
        .with("delta_beta", delta);
    let mut artifact = Artifact::new("hft-check", echo);
    artifact.rows.push(
        Record::new()
            .with("beta", report.beta)
            .with("k", report.k)
            .with("l", report.l)
            .with("delta_beta", report.delta_beta)
            .with("lhs_fd", report.lhs_fd)
            .with("rhs_expect", report.rhs_expect)
            .with("residual", report.residual)
            .with("relative_residual", report.relative_residual())
            .with("residual_order", order)
            .with("one_sided", report.one_sided),
    );
    artifact.verdicts.push(
        "residual_contract",
        if report.passes() { "pass" } else { "fail" },
    );
    artifact.verdicts.push(
        "residual_order",
        if order >= HFT_MIN_ORDER {
            "pass"
        } else {
            "fail"
        },
    );
    a.common.emit(&artifact, Format::Csv)?;
    Ok(if passed { EXIT_OK } else { EXIT_VERIFICATION })
}

fn cmd_count(a: &CountArgs) -> Result<i32, Failure> {
    let spec = a.common.spec(a.beta)?;
    let ladder = fixed_step_ladder(&a.radii, a.step).map_err(Failure::config)?;
    let report = count_growth(&spec, a.common.l, &ladder).map_err(|e| match e {
        Error::InconsistentLadder(_) => Failure::config(e),
        other => Failure::compute(other),
    })?;
    let echo = a.common.echo().with("beta", a.beta).with("step", a.step);
    let mut artifact = Artifact::new("count", echo);
    for e in &report.entries {
        artifact.rows.push(
            Record::new()
                .with("r_max", e.r_max)
                .with("n_points", e.n_points)
                .with("negative_count", e.negative_count),
        );
    }
    artifact
        .verdicts
        .push("nondecreasing", report.nondecreasing());
    artifact.verdicts.push("grew", report.grew());
    a.common.emit(&artifact, Format::Csv)?;
    Ok(if report.passes() {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    })
}

fn cmd_units(a: &UnitsArgs) -> Result<i32, Failure> {
    let inputs = DimensionfulInputs {
        hbar: a.hbar,
        mass: a.mass,
        strength: a.strength,
        length_param: a.length_param,
    };
    let out = reduce_units(&inputs).map_err(Failure::config)?;
    let echo = Record::new()
        .with("hbar", a.hbar)
        .with("mass", a.mass)
        .with("strength", a.strength)
        .with("length_param", a.length_param);
    let mut artifact = Artifact::new("units", echo);
    artifact.rows.push(
        Record::new()
            .with("beta", out.beta)
            .with("length_unit", out.length_unit)
            .with("energy_unit", out.energy_unit),
    );
    emit(
        &artifact,
        a.format.unwrap_or(Format::Csv),
        a.output.as_deref(),
    )?;
    Ok(EXIT_OK)
}

fn cmd_verify_all(a: &VerifyArgs) -> Result<i32, Failure> {
    let grid = a.common.grid()?;
    let parallelism = effective_parallelism(a.common.parallelism)?;
    let results = run_all(&VerifyConfig { grid, parallelism });

    let echo = Record::new()
        .with("r_max", a.common.r_max)
        .with("n_points", a.common.n_points);
    let mut artifact = Artifact::new("verify-all", echo);
    for c in &results {
        artifact.rows.push(
            Record::new()
                .with("id", c.id)
                .with("name", c.name.as_str())
                .with("passed", c.passed)
                .with("checks", c.checks)
                .with("worst", c.worst)
                .with("detail", c.detail.as_str()),
        );
    }
    let failed: Vec<&str> = results
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    artifact.verdicts.push("all_passed", failed.is_empty());
    artifact
        .verdicts
        .push("failed", Cell::Text(failed.join("; ")));
    a.common.emit(&artifact, Format::Json)?;
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        for c in results.iter().filter(|c| !c.passed) {
            eprintln!(
                "check {} ({}) failed: {}",
                c.id,
                c.name,
                one_line(&c.detail)
            );
        }
        Ok(EXIT_VERIFICATION)
    }
}
