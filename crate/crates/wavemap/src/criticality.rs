//! Classify evolutions as subcritical or supercritical and bisect the
//! family amplitude to bracket the critical value.

use std::io::Write;

use crate::diagnostics::partial_energy;
use crate::error::{Error, Result};
use crate::evolve::{evolve, EvolutionConfig, EvolutionStatus};
use crate::grid::RadialGrid;
use crate::state::{gaussian_ingoing, GaussianFamily};

/// Outcome of one classification run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// Pulse bounces off the origin and disperses.
    Subcritical,
    /// Evolution terminates in blow-up.
    Supercritical,
    /// Neither signature: numerical failure, or energy still near the
    /// origin at `t_max`. Never silently coerced.
    Undetermined,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Subcritical => "subcritical",
            Classification::Supercritical => "supercritical",
            Classification::Undetermined => "undetermined",
        }
    }
}

/// One amplitude probe: its classification and the time the run ended
/// (blow-up time, or `t_max` for completed runs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub amplitude: f64,
    pub classification: Classification,
    pub t_end: f64,
}

/// Fraction of the initial energy allowed near the origin for a completed
/// run to count as dispersed.
const DISPERSAL_ENERGY_FRACTION: f64 = 0.1;

/// Run the family at amplitude `a` and classify the outcome.
///
/// Supercritical means blow-up. Subcritical means the run completed and the
/// energy left inside `r < R0/2` at the final time is below 10% of `E(0)` —
/// the dispersal signature. Anything else is `Undetermined`. `t_max` should
/// give the pulse time to reach the origin and disperse
/// (`t_max >= 2 R0 + 10` is a sound choice).
pub fn probe_amplitude(
    a: f64,
    fam_template: &GaussianFamily,
    cfg: &EvolutionConfig,
    grid: RadialGrid,
) -> Result<Probe> {
    let fam = fam_template.with_amplitude(a);
    let initial = gaussian_ingoing(&fam, grid)?;
    let outcome = evolve(initial, cfg)?;
    let classification = match outcome.status {
        EvolutionStatus::BlowUp { .. } => Classification::Supercritical,
        EvolutionStatus::NumericalFailure { .. } => Classification::Undetermined,
        EvolutionStatus::Completed => {
            let e0 = outcome.series.initial_energy().unwrap_or(0.0);
            if e0 == 0.0 {
                // Vacuum carries no energy to concentrate.
                Classification::Subcritical
            } else {
                let near_origin = partial_energy(&outcome.final_state, cfg.k, fam.center / 2.0);
                if near_origin < DISPERSAL_ENERGY_FRACTION * e0 {
                    Classification::Subcritical
                } else {
                    Classification::Undetermined
                }
            }
        }
    };
    let t_end = match outcome.status {
        EvolutionStatus::BlowUp { t_blow } => t_blow,
        EvolutionStatus::NumericalFailure { t_fail } => t_fail,
        EvolutionStatus::Completed => outcome.final_state.time(),
    };
    Ok(Probe {
        amplitude: a,
        classification,
        t_end,
    })
}

/// Classification only; see [`probe_amplitude`] for the full record.
pub fn classify(
    a: f64,
    fam_template: &GaussianFamily,
    cfg: &EvolutionConfig,
    grid: RadialGrid,
) -> Result<Classification> {
    Ok(probe_amplitude(a, fam_template, cfg, grid)?.classification)
}

/// Result of a critical-amplitude search.
#[derive(Debug, Clone)]
pub struct CriticalSearchResult {
    /// Final bracket: `bracket.0` classified subcritical, `bracket.1`
    /// supercritical.
    pub bracket: (f64, f64),
    /// Probes applied in bisection order, endpoints first. Speculative runs
    /// whose result was never needed are not part of the record.
    pub probes: Vec<Probe>,
    /// Bisection iterations performed (excludes the endpoint runs).
    pub iterations: usize,
    /// False when an `Undetermined` probe stopped the search before the
    /// bracket reached the requested tolerance.
    pub resolved: bool,
    /// Cell count of the grid every probe ran on; the bracket is
    /// resolution-dependent.
    pub grid_n: usize,
}

/// Write the probe log as CSV rows `A,classification,t_blow_or_tmax,n`.
pub fn write_probe_log(w: &mut impl Write, result: &CriticalSearchResult) -> Result<()> {
    writeln!(w, "A,classification,t_blow_or_tmax,n")?;
    for p in &result.probes {
        writeln!(
            w,
            "{:e},{},{:e},{}",
            p.amplitude,
            p.classification.as_str(),
            p.t_end,
            result.grid_n
        )?;
    }
    Ok(())
}

/// Bisect the family amplitude between a subcritical `a_lo` and a
/// supercritical `a_hi` until the bracket width is at most `tol`.
///
/// Each iteration must classify the midpoint; a second, speculative probe
/// (the midpoint of the lower half) runs concurrently and is consumed on the
/// next iteration when the bracket moved down. An `Undetermined` midpoint
/// stops the search with `resolved = false` rather than guessing.
pub fn bisect_critical(
    a_lo: f64,
    a_hi: f64,
    tol: f64,
    fam_template: &GaussianFamily,
    cfg: &EvolutionConfig,
    grid: RadialGrid,
) -> Result<CriticalSearchResult> {
    if !(a_lo < a_hi) {
        return Err(Error::InvalidArgument(format!(
            "bracket must satisfy a_lo < a_hi, got ({a_lo}, {a_hi})"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bracket tolerance must be positive, got {tol}"
        )));
    }
    cfg.validate()?;

    // Endpoint classifications, concurrently.
    let (lo_probe, hi_probe) = run_pair(
        (a_lo, fam_template, cfg, grid),
        Some((a_hi, fam_template, cfg, grid)),
    );
    let lo_probe = lo_probe?;
    let hi_probe = hi_probe.expect("second endpoint requested")?;
    if lo_probe.classification != Classification::Subcritical {
        return Err(Error::InvalidBracket(format!(
            "lower endpoint A={a_lo} classified {}",
            lo_probe.classification.as_str()
        )));
    }
    if hi_probe.classification != Classification::Supercritical {
        return Err(Error::InvalidBracket(format!(
            "upper endpoint A={a_hi} classified {}",
            hi_probe.classification.as_str()
        )));
    }

    let mut probes = vec![lo_probe, hi_probe];
    let mut lo = a_lo;
    let mut hi = a_hi;
    let mut iterations = 0;
    let mut resolved = true;
    let mut pending: Option<Probe> = None;

    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let mid_probe = match pending.take() {
            Some(p) if p.amplitude == mid => p,
            _ => {
                // Speculate on the lower half: if the midpoint turns out
                // supercritical, the next midpoint is exactly `spec_a`.
                let spec_a = 0.5 * (lo + mid);
                let speculate = hi - mid > tol;
                let (m, s) = run_pair(
                    (mid, fam_template, cfg, grid),
                    speculate.then_some((spec_a, fam_template, cfg, grid)),
                );
                if let Some(s) = s {
                    pending = Some(s?);
                }
                m?
            }
        };
        iterations += 1;
        probes.push(mid_probe);
        match mid_probe.classification {
            Classification::Supercritical => hi = mid,
            Classification::Subcritical => {
                lo = mid;
                pending = None; // speculation assumed the other branch
            }
            Classification::Undetermined => {
                resolved = false;
                break;
            }
        }
        debug_assert!(lo < hi);
    }

    Ok(CriticalSearchResult {
        bracket: (lo, hi),
        probes,
        iterations,
        resolved,
        grid_n: grid.n(),
    })
}

type ProbeArgs<'a> = (f64, &'a GaussianFamily, &'a EvolutionConfig, RadialGrid);

/// Run one probe, or two concurrently.
fn run_pair(
    first: ProbeArgs<'_>,
    second: Option<ProbeArgs<'_>>,
) -> (Result<Probe>, Option<Result<Probe>>) {
    match second {
        None => (probe_amplitude(first.0, first.1, first.2, first.3), None),
        Some(second) => std::thread::scope(|scope| {
            let handle =
                scope.spawn(move || probe_amplitude(second.0, second.1, second.2, second.3));
            let a = probe_amplitude(first.0, first.1, first.2, first.3);
            let b = handle.join().expect("probe thread panicked");
            (a, Some(b))
        }),
    }
}
