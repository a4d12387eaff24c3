//! Command-line configuration, experiment orchestration, and CSV output.
//!
//! Modes: a single evolution (`evolve`), a nested-resolution convergence
//! triple (`converge`), a resolution ladder (`ladder`), critical-amplitude
//! bisection (`bisect`), and a run followed by a static-profile fit (`fit`).

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use crate::criticality::{bisect_critical, write_probe_log};
use crate::diagnostics::{
    convergence_factor, energy_density, fit_static, write_fit_record, write_q_csv,
    write_series_csv, DiagnosticSeries,
};
use crate::error::{Error, Result};
use crate::evolve::{
    evolve_with, resolvability_threshold, BoundaryMode, Evolution, EvolutionConfig,
    EvolutionStatus,
};
use crate::grid::make_grid;
use crate::state::{gaussian_ingoing, write_snapshot, FieldState, GaussianFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Evolve,
    Converge,
    Ladder,
    Bisect,
    Fit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundaryArg {
    Outgoing,
    FixedDirichlet,
}

impl From<BoundaryArg> for BoundaryMode {
    fn from(b: BoundaryArg) -> BoundaryMode {
        match b {
            BoundaryArg::Outgoing => BoundaryMode::Outgoing,
            BoundaryArg::FixedDirichlet => BoundaryMode::FixedDirichlet,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "wavemap",
    about = "Equivariant 2+1 wave-map evolutions: single runs, convergence \
             and resolution studies, and critical-amplitude bisection"
)]
struct RawArgs {
    /// Experiment to run
    #[arg(long, value_enum)]
    mode: Mode,
    /// Pulse amplitude A (ignored by bisect, which scans amplitudes)
    #[arg(long = "A")]
    amplitude: Option<f64>,
    /// Pulse center R0
    #[arg(long = "R0")]
    center: Option<f64>,
    /// Pulse width delta
    #[arg(long = "delta")]
    width: Option<f64>,
    /// Outer radius of the grid
    #[arg(long = "rmax", default_value_t = 30.0)]
    r_max: f64,
    /// Cell count; ladder mode accepts a comma-separated list
    #[arg(long = "n", value_delimiter = ',')]
    ns: Vec<usize>,
    /// Time step in units of the spacing (dt = cfl * h)
    #[arg(long, default_value_t = 0.5)]
    cfl: f64,
    /// Angular wrapping number
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Evolution horizon
    #[arg(long = "tmax", default_value_t = 30.0)]
    t_max: f64,
    /// Outer boundary condition
    #[arg(long, value_enum, default_value_t = BoundaryArg::Outgoing)]
    boundary: BoundaryArg,
    /// Blow-up threshold on max |chi'|; defaults to the grid resolvability
    /// scale pi/(2h) of each run
    #[arg(long = "blow-threshold")]
    blow_threshold: Option<f64>,
    /// Snapshot times, comma-separated
    #[arg(long = "snap", value_delimiter = ',')]
    snapshot_times: Vec<f64>,
    /// Output directory
    #[arg(long = "out", default_value = ".")]
    out_dir: PathBuf,
    /// Bisection bracket as lo,hi
    #[arg(long, value_delimiter = ',')]
    bracket: Vec<f64>,
    /// Bisection bracket tolerance
    #[arg(long)]
    tol: Option<f64>,
}

/// Fully validated run description: every module precondition is checked
/// here, before any simulation starts.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub mode: Mode,
    pub amplitude: Option<f64>,
    pub center: f64,
    pub width: f64,
    pub r_max: f64,
    /// Cell counts: one entry except in ladder mode.
    pub ns: Vec<usize>,
    /// Base configuration; the blow threshold is resolved per grid by
    /// [`RunSpec::config_for`].
    pub cfg: EvolutionConfig,
    /// Explicit `--blow-threshold`, if given.
    pub blow_threshold: Option<f64>,
    pub out_dir: PathBuf,
    pub bracket: Option<(f64, f64)>,
    pub tol: Option<f64>,
}

impl RunSpec {
    pub fn base_n(&self) -> usize {
        self.ns[0]
    }

    /// Evolution config for one grid: the blow threshold defaults to the
    /// resolvability scale `pi/(2h)` unless set explicitly.
    pub fn config_for(&self, grid: &crate::grid::RadialGrid) -> EvolutionConfig {
        let mut cfg = self.cfg.clone();
        cfg.blow_threshold = self
            .blow_threshold
            .unwrap_or_else(|| resolvability_threshold(grid));
        cfg
    }

    /// The pulse family; amplitude must be present (checked at parse time
    /// for the modes that need it).
    pub fn family(&self) -> Result<GaussianFamily> {
        let a = self
            .amplitude
            .ok_or_else(|| Error::InvalidArgument("--A is required for this mode".into()))?;
        GaussianFamily::new(a, self.center, self.width)
    }

    /// Family with the amplitude left to the caller (bisection probes).
    pub fn family_template(&self) -> Result<GaussianFamily> {
        GaussianFamily::new(0.0, self.center, self.width)
    }
}

/// Parse and validate command-line arguments into a [`RunSpec`].
pub fn parse_config<I, T>(args: I) -> Result<RunSpec>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let raw =
        RawArgs::try_parse_from(args).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    build_spec(raw)
}

fn build_spec(raw: RawArgs) -> Result<RunSpec> {
    let ns = if raw.ns.is_empty() {
        vec![4096]
    } else {
        raw.ns.clone()
    };
    if raw.mode != Mode::Ladder && ns.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "--n takes a single value in this mode, got {} values",
            ns.len()
        )));
    }
    for &n in &ns {
        // Also checks r_max.
        make_grid(raw.r_max, n).map_err(|e| {
            Error::InvalidArgument(format!("--n/--rmax: {e}"))
        })?;
    }
    if raw.mode == Mode::Converge && !ns[0].is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "--n must be a power of two in converge mode (nested grids), got {}",
            ns[0]
        )));
    }

    let mut cfg = EvolutionConfig::new(raw.t_max);
    cfg.k = raw.k;
    cfg.cfl = raw.cfl;
    cfg.boundary = raw.boundary.into();
    cfg.snapshot_times = raw.snapshot_times.clone();
    cfg.validate()
        .map_err(|e| Error::InvalidArgument(format!("--cfl/--tmax/--snap: {e}")))?;
    if let Some(bt) = raw.blow_threshold {
        if !(bt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "--blow-threshold must be positive, got {bt}"
            )));
        }
    }

    let needs_family = raw.mode != Mode::Bisect;
    let center = raw.center.ok_or_else(|| {
        Error::InvalidArgument("--R0 is required".into())
    })?;
    let width = raw.width.ok_or_else(|| {
        Error::InvalidArgument("--delta is required".into())
    })?;
    if needs_family && raw.amplitude.is_none() {
        return Err(Error::InvalidArgument(format!(
            "--A is required for mode {:?}",
            raw.mode
        )));
    }
    if let Some(a) = raw.amplitude {
        GaussianFamily::new(a, center, width)
            .map_err(|e| Error::InvalidArgument(format!("--A/--R0/--delta: {e}")))?;
    } else {
        GaussianFamily::new(0.0, center, width)
            .map_err(|e| Error::InvalidArgument(format!("--R0/--delta: {e}")))?;
    }
    if center >= raw.r_max {
        return Err(Error::InvalidArgument(format!(
            "--R0 must lie inside the domain: {center} >= rmax {}",
            raw.r_max
        )));
    }

    let bracket = match raw.mode {
        Mode::Bisect => {
            if raw.bracket.len() != 2 {
                return Err(Error::InvalidArgument(
                    "--bracket takes exactly two values lo,hi".into(),
                ));
            }
            let (lo, hi) = (raw.bracket[0], raw.bracket[1]);
            if !(lo < hi) {
                return Err(Error::InvalidArgument(format!(
                    "--bracket must satisfy lo < hi, got {lo},{hi}"
                )));
            }
            Some((lo, hi))
        }
        _ => None,
    };
    let tol = match raw.mode {
        Mode::Bisect => {
            let t = raw
                .tol
                .ok_or_else(|| Error::InvalidArgument("--tol is required for bisect".into()))?;
            if !(t > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "--tol must be positive, got {t}"
                )));
            }
            Some(t)
        }
        _ => raw.tol,
    };

    Ok(RunSpec {
        mode: raw.mode,
        amplitude: raw.amplitude,
        center,
        width,
        r_max: raw.r_max,
        ns,
        cfg,
        blow_threshold: raw.blow_threshold,
        out_dir: raw.out_dir,
        bracket,
        tol,
    })
}

/// Execute the spec. `Ok(true)` means every requested simulation reached a
/// defined outcome (completed or blew up); the process exit status is 0 in
/// exactly that case.
pub fn run(spec: &RunSpec) -> Result<bool> {
    fs::create_dir_all(&spec.out_dir)?;
    match spec.mode {
        Mode::Evolve => run_evolve(spec).map(|(status, _)| status_defined(status)),
        Mode::Converge => run_converge(spec),
        Mode::Ladder => run_ladder(spec),
        Mode::Bisect => run_bisect(spec),
        Mode::Fit => run_fit(spec),
    }
}

fn status_defined(status: EvolutionStatus) -> bool {
    !matches!(status, EvolutionStatus::NumericalFailure { .. })
}

/// Evolve the family once; emit `series.csv` and numbered snapshot files.
pub fn run_evolve(spec: &RunSpec) -> Result<(EvolutionStatus, FieldState)> {
    let fam = spec.family()?;
    let grid = make_grid(spec.r_max, spec.base_n())?;
    let cfg = spec.config_for(&grid);
    let initial = gaussian_ingoing(&fam, grid)?;
    let mut snap_index = 0usize;
    let mut snap_error: Option<Error> = None;
    let out_dir = spec.out_dir.clone();
    let k = cfg.k;
    let outcome = evolve_with(initial, &cfg, |state| {
        let path = out_dir.join(format!("snap_{snap_index:04}.txt"));
        snap_index += 1;
        let rho = energy_density(state, k);
        let result = File::create(&path).map_err(Error::from).and_then(|f| {
            let mut w = BufWriter::new(f);
            write_snapshot(&mut w, state, Some(&rho))
        });
        if let (Err(e), None) = (result, &snap_error) {
            snap_error = Some(e);
        }
    })?;
    if let Some(e) = snap_error {
        return Err(e);
    }
    write_series(&spec.out_dir.join("series.csv"), &outcome.series)?;
    Ok((outcome.status, outcome.final_state))
}

/// Run the family at `n`, `2n`, `4n` in lockstep (`dt` proportional to `h`,
/// so states coincide every 1, 2, 4 steps) and emit the `t,Q` series plus
/// the three per-resolution diagnostic series.
pub fn run_converge(spec: &RunSpec) -> Result<bool> {
    let fam = spec.family()?;
    let n = spec.base_n();
    let mut runs = Vec::new();
    for factor in [1usize, 2, 4] {
        let grid = make_grid(spec.r_max, n * factor)?;
        let initial = gaussian_ingoing(&fam, grid)?;
        runs.push(Evolution::new(initial, &spec.config_for(&grid))?);
    }
    let [mut coarse, mut mid, mut fine]: [Evolution; 3] =
        runs.try_into().ok().expect("three resolutions");

    let mut q_rows: Vec<(f64, Option<f64>)> = Vec::new();
    let record_q = |coarse: &Evolution, mid: &Evolution, fine: &Evolution,
                    q_rows: &mut Vec<(f64, Option<f64>)>| {
        let q = convergence_factor(coarse.state().chi(), mid.state().chi(), fine.state().chi());
        q_rows.push((coarse.state().time(), q.ok()));
    };

    // At t = 0 all three sample the same initial data, so the difference is
    // identically zero and Q is recorded as a gap.
    record_q(&coarse, &mid, &fine, &mut q_rows);
    'lockstep: loop {
        if coarse.step().is_some() {
            break;
        }
        for _ in 0..2 {
            if mid.step().is_some() {
                break 'lockstep;
            }
        }
        for _ in 0..4 {
            if fine.step().is_some() {
                break 'lockstep;
            }
        }
        record_q(&coarse, &mid, &fine, &mut q_rows);
    }
    // Let survivors reach their own terminal condition so every series is a
    // complete run.
    let s1 = coarse.run();
    let s2 = mid.run();
    let s4 = fine.run();

    let mut q_file = BufWriter::new(File::create(spec.out_dir.join("q.csv"))?);
    write_q_csv(&mut q_file, &q_rows)?;
    q_file.flush()?;
    for (ev, factor) in [(&coarse, 1usize), (&mid, 2), (&fine, 4)] {
        let path = spec.out_dir.join(format!("series_n{}.csv", n * factor));
        write_series(&path, ev.series())?;
    }
    Ok([s1, s2, s4].iter().all(|s| status_defined(*s)))
}

/// One evolution per requested resolution (concurrently), with per-run
/// series files and a `ladder.csv` summary.
///
/// Summary columns: `n`, blow-up time (empty when the run completed),
/// `max_t |chi'(0,t)|`, and `max_t |E(t)-E(0)|/|E(0)|` (empty for vacuum).
pub fn run_ladder(spec: &RunSpec) -> Result<bool> {
    let fam = spec.family()?;
    let results: Vec<Result<(EvolutionStatus, DiagnosticSeries)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = spec
            .ns
            .iter()
            .map(|&n| {
                let fam = fam;
                let r_max = spec.r_max;
                scope.spawn(move || -> Result<_> {
                    let grid = make_grid(r_max, n)?;
                    let cfg = spec.config_for(&grid);
                    let initial = gaussian_ingoing(&fam, grid)?;
                    let mut ev = Evolution::new(initial, &cfg)?;
                    let status = ev.run();
                    Ok((status, ev.into_outcome().series))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("ladder run panicked"))
            .collect()
    });

    let mut summary = BufWriter::new(File::create(spec.out_dir.join("ladder.csv"))?);
    writeln!(summary, "n,t_blow,max_chi_prime,max_abs_delta")?;
    let mut all_defined = true;
    for (&n, result) in spec.ns.iter().zip(results) {
        let (status, series) = result?;
        all_defined &= status_defined(status);
        write_series(&spec.out_dir.join(format!("series_n{n}.csv")), &series)?;
        let t_blow = match status.t_blow() {
            Some(t) => format!("{t:e}"),
            None => String::new(),
        };
        let max_grad = series
            .max_abs_chi_prime_origin()
            .map(|v| format!("{v:e}"))
            .unwrap_or_default();
        let max_drift = series
            .max_rel_energy_drift()
            .map(|v| format!("{v:e}"))
            .unwrap_or_default();
        writeln!(summary, "{n},{t_blow},{max_grad},{max_drift}")?;
    }
    summary.flush()?;
    Ok(all_defined)
}

/// Bisect the critical amplitude; emit `bisect.csv` and the probe log.
pub fn run_bisect(spec: &RunSpec) -> Result<bool> {
    let (lo, hi) = spec
        .bracket
        .ok_or_else(|| Error::InvalidArgument("bisect mode needs --bracket".into()))?;
    let tol = spec
        .tol
        .ok_or_else(|| Error::InvalidArgument("bisect mode needs --tol".into()))?;
    let fam = spec.family_template()?;
    let grid = make_grid(spec.r_max, spec.base_n())?;
    let result = bisect_critical(lo, hi, tol, &fam, &spec.config_for(&grid), grid)?;

    let mut summary = BufWriter::new(File::create(spec.out_dir.join("bisect.csv"))?);
    writeln!(summary, "a_lo,a_hi,iterations,resolved,n")?;
    writeln!(
        summary,
        "{:e},{:e},{},{},{}",
        result.bracket.0, result.bracket.1, result.iterations, result.resolved, result.grid_n
    )?;
    summary.flush()?;

    let mut log = BufWriter::new(File::create(spec.out_dir.join("probes.csv"))?);
    write_probe_log(&mut log, &result)?;
    log.flush()?;
    Ok(result.resolved)
}

/// Evolve the family, then fit the static profile to the final state and
/// emit the single-line `fit.txt` record alongside the usual run output.
pub fn run_fit(spec: &RunSpec) -> Result<bool> {
    let (status, final_state) = run_evolve(spec)?;
    let fit = fit_static(&final_state)?;
    let mut f = BufWriter::new(File::create(spec.out_dir.join("fit.txt"))?);
    write_fit_record(&mut f, &fit)?;
    f.flush()?;
    Ok(status_defined(status))
}

fn write_series(path: &Path, series: &DiagnosticSeries) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_series_csv(&mut w, series)?;
    w.flush()?;
    Ok(())
}

/// Binary entry point: exit status 0 only when every requested simulation
/// reached a defined outcome, 2 on usage errors, 1 otherwise.
pub fn main() -> ExitCode {
    let spec = match parse_config(std::env::args_os()) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    match run(&spec) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more runs ended without a defined outcome");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
