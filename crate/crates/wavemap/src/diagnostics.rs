//! Energy density and total energy, conservation drift, the three-resolution
//! convergence factor, origin gradient, and static-profile fitting.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::{l2_norm, restrict, GridFunction};
use crate::state::FieldState;

/// Clamp value for the energy-drift logarithm: `ln(1e-16)`. Keeps the drift
/// series finite when conservation is exact to rounding.
pub const DRIFT_FLOOR: f64 = -36.841361487904734;

/// Radial derivative of a grid function: centered second-order differences in
/// the interior, one-sided second-order stencils at both ends.
pub fn gradient(f: &GridFunction) -> GridFunction {
    let grid = f.grid();
    let n = grid.n();
    assert!(n >= 2, "gradient needs at least 3 nodes");
    let h = grid.h();
    let v = f.values();
    let mut out = vec![0.0; grid.num_nodes()];
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    for i in 1..n {
        out[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    out[n] = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
    GridFunction::new(grid, out).expect("length matches grid")
}

/// `chi'(0, t)` by the second-order one-sided stencil at the origin.
pub fn origin_gradient(state: &FieldState) -> f64 {
    let v = state.chi().values();
    let h = state.grid().h();
    (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
}

/// Energy density `rho = (pi^2 + chi'^2)/2 + k^2 sin^2(chi) / (2 r^2)`.
///
/// At the origin the potential term is replaced by its regular limit
/// `k^2 chi'(0)^2 / 2` (chi ~ chi'(0) r near the axis).
pub fn energy_density(state: &FieldState, k: u32) -> GridFunction {
    let grid = state.grid();
    let chi = state.chi().values();
    let pi = state.pi().values();
    let chi_prime = gradient(state.chi());
    let dp = chi_prime.values();
    let k2 = (k as f64) * (k as f64);
    let mut rho = vec![0.0; grid.num_nodes()];
    rho[0] = 0.5 * (pi[0] * pi[0] + dp[0] * dp[0]) + 0.5 * k2 * dp[0] * dp[0];
    for i in 1..grid.num_nodes() {
        let r = grid.node(i);
        let s = chi[i].sin();
        rho[i] = 0.5 * (pi[i] * pi[i] + dp[i] * dp[i]) + k2 * s * s / (2.0 * r * r);
    }
    GridFunction::new(grid, rho).expect("length matches grid")
}

/// Total energy: trapezoidal quadrature of `rho(r) * r` over the grid.
pub fn total_energy(state: &FieldState, k: u32) -> f64 {
    let rho = energy_density(state, k);
    trapezoid_rho_r(&rho, rho.grid().n())
}

/// Energy contained in `r <= r_cut`: the same quadrature truncated at the
/// last node not beyond `r_cut`.
pub fn partial_energy(state: &FieldState, k: u32, r_cut: f64) -> f64 {
    let grid = state.grid();
    let m = ((r_cut / grid.h()).floor().max(0.0) as usize).min(grid.n());
    let rho = energy_density(state, k);
    trapezoid_rho_r(&rho, m)
}

fn trapezoid_rho_r(rho: &GridFunction, last: usize) -> f64 {
    let grid = rho.grid();
    if last == 0 {
        return 0.0;
    }
    let f = |i: usize| rho.values()[i] * grid.node(i);
    let mut sum = 0.5 * (f(0) + f(last));
    for i in 1..last {
        sum += f(i);
    }
    sum * grid.h()
}

/// Energy drift `Delta(t) = ln |(E(t) - E(0)) / E(0)|`, clamped below at
/// [`DRIFT_FLOOR`] so exact conservation stays finite.
pub fn energy_drift(energy_t: f64, energy_0: f64) -> Result<f64> {
    if energy_0 == 0.0 {
        return Err(Error::UndefinedDrift);
    }
    let rel = ((energy_t - energy_0) / energy_0).abs();
    Ok(rel.ln().max(DRIFT_FLOOR))
}

/// Three-resolution convergence factor
/// `Q = |u_2h - u_4h|_2 / |u_h - u_2h|_2`, all differences evaluated on the
/// coarsest grid after pointwise restriction. `Q ~ 4` indicates second-order
/// convergence.
pub fn convergence_factor(
    u_4h: &GridFunction,
    u_2h: &GridFunction,
    u_h: &GridFunction,
) -> Result<f64> {
    let nc = u_4h.grid().n();
    if u_2h.grid().n() != 2 * nc || u_h.grid().n() != 4 * nc {
        return Err(Error::InvalidArgument(format!(
            "resolutions must nest by factors of 2: got {}, {}, {}",
            nc,
            u_2h.grid().n(),
            u_h.grid().n()
        )));
    }
    if u_2h.grid().r_max() != u_4h.grid().r_max() || u_h.grid().r_max() != u_4h.grid().r_max() {
        return Err(Error::InvalidArgument(
            "resolutions must share the same radial extent".into(),
        ));
    }
    let mid = restrict(u_2h, 1)?;
    let fine = restrict(u_h, 2)?;
    let numerator = l2_norm(&mid.checked_sub(u_4h)?)?;
    let denominator = l2_norm(&fine.checked_sub(&mid)?)?;
    if denominator == 0.0 {
        return Err(Error::IndeterminateQ);
    }
    Ok(numerator / denominator)
}

/// One recorded step of an evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub t: f64,
    pub chi_prime_origin: f64,
    pub energy: f64,
    /// `None` when the drift is undefined (vacuum runs with E(0) = 0).
    pub delta: Option<f64>,
}

/// Per-step records of `t`, `chi'(0,t)`, `E(t)` and `Delta(t)`.
#[derive(Debug, Clone, Default)]
pub struct DiagnosticSeries {
    rows: Vec<DiagnosticRow>,
}

impl DiagnosticSeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append a row; times must be strictly increasing.
    pub fn push(&mut self, row: DiagnosticRow) {
        if let Some(last) = self.rows.last() {
            assert!(
                row.t > last.t,
                "diagnostic times must increase: {} after {}",
                row.t,
                last.t
            );
        }
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[DiagnosticRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn initial_energy(&self) -> Option<f64> {
        self.rows.first().map(|r| r.energy)
    }

    /// Largest `|chi'(0,t)|` over the recorded steps.
    pub fn max_abs_chi_prime_origin(&self) -> Option<f64> {
        self.rows
            .iter()
            .map(|r| r.chi_prime_origin.abs())
            .fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
    }

    /// Largest relative energy drift `max_t |E(t) - E(0)| / |E(0)|`, or
    /// `None` when `E(0) = 0`.
    pub fn max_rel_energy_drift(&self) -> Option<f64> {
        let e0 = self.initial_energy()?;
        if e0 == 0.0 {
            return None;
        }
        self.rows
            .iter()
            .map(|r| ((r.energy - e0) / e0).abs())
            .fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
    }
}

/// Write a diagnostic series as CSV with the exact header
/// `t,chi_prime_origin,energy,delta`. Undefined drift leaves the field empty.
pub fn write_series_csv(w: &mut impl Write, series: &DiagnosticSeries) -> Result<()> {
    writeln!(w, "t,chi_prime_origin,energy,delta")?;
    for row in series.rows() {
        match row.delta {
            Some(d) => writeln!(
                w,
                "{:e},{:e},{:e},{:e}",
                row.t, row.chi_prime_origin, row.energy, d
            )?,
            None => writeln!(w, "{:e},{:e},{:e},", row.t, row.chi_prime_origin, row.energy)?,
        }
    }
    Ok(())
}

/// Write a convergence-factor series as `t,Q` rows; indeterminate entries
/// leave the `Q` field empty rather than fabricating a value.
pub fn write_q_csv(w: &mut impl Write, rows: &[(f64, Option<f64>)]) -> Result<()> {
    writeln!(w, "t,Q")?;
    for (t, q) in rows {
        match q {
            Some(q) => writeln!(w, "{:e},{:e}", t, q)?,
            None => writeln!(w, "{:e},", t)?,
        }
    }
    Ok(())
}

/// Result of fitting `sign * 2 arctan(lambda r)` to a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticFit {
    /// Fitted scale; larger means steeper at the origin.
    pub lambda: f64,
    /// `+1.0` or `-1.0`.
    pub sign: f64,
    /// Sup-norm of the mismatch over the fit window.
    pub residual: f64,
    /// Radial interval `[window_lo, window_hi]` used for the fit.
    pub window: (f64, f64),
}

/// Write a fit result as the single-line record
/// `lambda sign residual window_lo window_hi`.
pub fn write_fit_record(w: &mut impl Write, fit: &StaticFit) -> Result<()> {
    writeln!(
        w,
        "{:e} {} {:e} {:e} {:e}",
        fit.lambda, fit.sign as i32, fit.residual, fit.window.0, fit.window.1
    )?;
    Ok(())
}

/// Fit the static profile to a state over the inner window where
/// `|chi| <= pi/2`.
///
/// The sign comes from the origin gradient; the initial scale estimate
/// `|chi'(0)|/2` is refined by one-dimensional least squares. The window is
/// the contiguous run of nodes from the origin up to the first node where
/// `|chi|` exceeds `pi/2`: near blow-up only the inner region matches the
/// static solution.
pub fn fit_static(state: &FieldState) -> Result<StaticFit> {
    let g = origin_gradient(state);
    if g == 0.0 || !g.is_finite() {
        return Err(Error::FitFailure(format!(
            "origin gradient {g} gives no scale estimate"
        )));
    }
    let sign = if g < 0.0 { -1.0 } else { 1.0 };
    let lambda0 = g.abs() / 2.0;

    let grid = state.grid();
    let chi = state.chi().values();
    let mut end = 0;
    while end + 1 < chi.len() && chi[end + 1].abs() <= FRAC_PI_2 {
        end += 1;
    }
    // Node 0 carries no information (the model vanishes there); two more
    // nodes are the minimum for the scale to be determined.
    if end < 2 {
        return Err(Error::FitFailure(format!(
            "fit window [0, {:e}] has too few nodes",
            grid.node(end)
        )));
    }

    let objective = |lambda: f64| -> f64 {
        let mut s = 0.0;
        for i in 0..=end {
            let model = sign * 2.0 * (lambda * grid.node(i)).atan();
            let d = chi[i] - model;
            s += d * d;
        }
        s
    };
    let lambda = golden_minimize(objective, lambda0 / 8.0, lambda0 * 8.0, 1e-13 * lambda0);

    let mut residual = 0.0f64;
    for i in 0..=end {
        let model = sign * 2.0 * (lambda * grid.node(i)).atan();
        residual = residual.max((chi[i] - model).abs());
    }
    Ok(StaticFit {
        lambda,
        sign,
        residual,
        window: (0.0, grid.node(end)),
    })
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
fn golden_minimize(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.6180339887498949;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
