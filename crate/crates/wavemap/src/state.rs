//! Field state, the ingoing Gaussian initial-data family, and the static
//! profile, plus the plain-text snapshot format.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, RadialGrid};

/// Evolved field at one instant: the angle `chi` on the target sphere and its
/// time derivative `pi`.
///
/// Regularity at the origin requires `chi(0) = 0` for all time; `pi(0) = 0`
/// follows. Both are enforced at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    time: f64,
    chi: GridFunction,
    pi: GridFunction,
}

impl FieldState {
    pub fn new(time: f64, chi: GridFunction, pi: GridFunction) -> Result<Self> {
        if chi.grid() != pi.grid() {
            return Err(Error::InvalidArgument(
                "chi and pi must live on the same grid".into(),
            ));
        }
        if chi.values()[0] != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "chi(0) must be exactly 0 (origin regularity), got {}",
                chi.values()[0]
            )));
        }
        if pi.values()[0] != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "pi(0) must be exactly 0 (origin is pinned), got {}",
                pi.values()[0]
            )));
        }
        Ok(FieldState { time, chi, pi })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub(crate) fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn grid(&self) -> RadialGrid {
        self.chi.grid()
    }

    pub fn chi(&self) -> &GridFunction {
        &self.chi
    }

    pub fn pi(&self) -> &GridFunction {
        &self.pi
    }

    pub(crate) fn chi_mut(&mut self) -> &mut GridFunction {
        &mut self.chi
    }

    pub(crate) fn pi_mut(&mut self) -> &mut GridFunction {
        &mut self.pi
    }

    pub fn is_finite(&self) -> bool {
        self.chi.is_finite() && self.pi.is_finite()
    }

    /// Nodewise negation `(chi, pi) -> (-chi, -pi)`. The origin keeps a
    /// positive zero so the pin stays canonical.
    pub fn negated(&self) -> FieldState {
        let neg = |f: &GridFunction| {
            let mut values: Vec<f64> = f.values().iter().map(|v| -v).collect();
            values[0] = 0.0;
            GridFunction::new(f.grid(), values).expect("same size")
        };
        FieldState {
            time: self.time,
            chi: neg(&self.chi),
            pi: neg(&self.pi),
        }
    }
}

/// Parameters of the ingoing Gaussian pulse `A exp(-(r - R0)^2 / delta^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFamily {
    /// Amplitude; the family parameter varied by the critical search.
    pub amplitude: f64,
    /// Pulse center `R0`.
    pub center: f64,
    /// Pulse width `delta`.
    pub width: f64,
}

impl GaussianFamily {
    pub fn new(amplitude: f64, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gaussian width must be positive, got {width}"
            )));
        }
        if !(center > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gaussian center must be positive, got {center}"
            )));
        }
        if !amplitude.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "gaussian amplitude must be finite, got {amplitude}"
            )));
        }
        Ok(GaussianFamily {
            amplitude,
            center,
            width,
        })
    }

    /// Same center and width with a different amplitude.
    pub fn with_amplitude(self, amplitude: f64) -> GaussianFamily {
        GaussianFamily { amplitude, ..self }
    }

    fn profile(&self, r: f64) -> f64 {
        let u = (r - self.center) / self.width;
        self.amplitude * (-u * u).exp()
    }

    fn profile_derivative(&self, r: f64) -> f64 {
        -2.0 * (r - self.center) / (self.width * self.width) * self.profile(r)
    }
}

/// Ingoing Gaussian initial data at `t = 0`.
///
/// `chi` samples the pulse profile and `pi` its analytic radial derivative,
/// which makes the pulse move toward the origin and keeps outer-boundary
/// effects small. The origin node is pinned to zero; for sensible `R0`,
/// `delta` the overwritten tail value is far below truncation error.
pub fn gaussian_ingoing(fam: &GaussianFamily, grid: RadialGrid) -> Result<FieldState> {
    if fam.center >= grid.r_max() {
        return Err(Error::InvalidArgument(format!(
            "pulse center {} must lie inside the domain (r_max = {})",
            fam.center,
            grid.r_max()
        )));
    }
    let mut chi = GridFunction::from_fn(grid, |r| fam.profile(r));
    let mut pi = GridFunction::from_fn(grid, |r| fam.profile_derivative(r));
    chi.values_mut()[0] = 0.0;
    pi.values_mut()[0] = 0.0;
    FieldState::new(0.0, chi, pi)
}

/// Static solution profile `sign * 2 * arctan(lambda * r)`.
///
/// `sign` must be `+1.0` or `-1.0`.
pub fn static_profile(lambda: f64, sign: f64, grid: RadialGrid) -> Result<GridFunction> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "static profile scale must be positive, got {lambda}"
        )));
    }
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::InvalidArgument(format!(
            "sign must be +1 or -1, got {sign}"
        )));
    }
    Ok(GridFunction::from_fn(grid, |r| {
        sign * 2.0 * (lambda * r).atan()
    }))
}

/// Write a snapshot: a `# t=<t> n=<n> rmax=<rmax>` header, then one node per
/// line with columns `r chi pi` (and `rho` when an energy density is given),
/// full double precision in scientific notation.
pub fn write_snapshot(
    w: &mut impl Write,
    state: &FieldState,
    rho: Option<&GridFunction>,
) -> Result<()> {
    let grid = state.grid();
    if let Some(rho) = rho {
        if rho.grid() != grid {
            return Err(Error::InvalidArgument(
                "energy density grid does not match the state".into(),
            ));
        }
    }
    writeln!(
        w,
        "# t={:e} n={} rmax={:e}",
        state.time(),
        grid.n(),
        grid.r_max()
    )?;
    for i in 0..grid.num_nodes() {
        let r = grid.node(i);
        let chi = state.chi().values()[i];
        let pi = state.pi().values()[i];
        match rho {
            Some(rho) => writeln!(w, "{:e} {:e} {:e} {:e}", r, chi, pi, rho.values()[i])?,
            None => writeln!(w, "{:e} {:e} {:e}", r, chi, pi)?,
        }
    }
    Ok(())
}

/// Parsed snapshot contents.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub state: FieldState,
    pub rho: Option<GridFunction>,
}

/// Read a snapshot written by [`write_snapshot`].
pub fn read_snapshot(r: &mut impl BufRead) -> Result<Snapshot> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let mut time = None;
    let mut n = None;
    let mut rmax = None;
    for tok in header.trim_start_matches('#').split_whitespace() {
        if let Some(v) = tok.strip_prefix("t=") {
            time = v.parse::<f64>().ok();
        } else if let Some(v) = tok.strip_prefix("n=") {
            n = v.parse::<usize>().ok();
        } else if let Some(v) = tok.strip_prefix("rmax=") {
            rmax = v.parse::<f64>().ok();
        }
    }
    let (time, n, rmax) = match (time, n, rmax) {
        (Some(t), Some(n), Some(rm)) => (t, n, rm),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "malformed snapshot header: {header:?}"
            )))
        }
    };
    let grid = RadialGrid::from_parts(rmax, n);
    let mut chi = Vec::with_capacity(grid.num_nodes());
    let mut pi = Vec::with_capacity(grid.num_nodes());
    let mut rho = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split_whitespace()
            .map(|c| {
                c.parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad snapshot value {c:?}")))
            })
            .collect::<Result<_>>()?;
        if cols.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "snapshot row needs at least 3 columns, got {}",
                cols.len()
            )));
        }
        chi.push(cols[1]);
        pi.push(cols[2]);
        if cols.len() > 3 {
            rho.push(cols[3]);
        }
    }
    let rho = if rho.is_empty() {
        None
    } else {
        Some(GridFunction::new(grid, rho)?)
    };
    let state = FieldState::new(time, GridFunction::new(grid, chi)?, GridFunction::new(grid, pi)?)?;
    Ok(Snapshot { time, state, rho })
}
