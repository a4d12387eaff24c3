//! Uniform radial grids, nested-grid restriction, and discrete norms.
//!
//! Grids are node-centered on `[0, r_max]` with `n + 1` nodes at `r_i = i*h`,
//! `h = r_max / n`, so both the regularity condition at the origin and the
//! outer boundary condition are applied at nodes.

use crate::error::{Error, Result};

/// Uniform radial mesh on `[0, r_max]` with `n` cells (`n + 1` nodes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    r_max: f64,
    n: usize,
    h: f64,
}

impl RadialGrid {
    /// Inner constructor without the `n >= 8` floor; used by [`restrict`],
    /// which may produce coarser meshes than `make_grid` accepts.
    pub(crate) fn from_parts(r_max: f64, n: usize) -> Self {
        RadialGrid {
            r_max,
            n,
            h: r_max / n as f64,
        }
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Cell count; the node count is `n + 1`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid spacing `h = r_max / n`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_nodes(&self) -> usize {
        self.n + 1
    }

    /// Coordinate of node `i`. `node(0)` is exactly `0`; `node(n)` equals
    /// `r_max` to within one rounding unit.
    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// Iterator over node coordinates `r_0 .. r_n`.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.num_nodes()).map(move |i| self.node(i))
    }

    /// Index of the node closest to radius `r`.
    pub fn nearest_node(&self, r: f64) -> usize {
        let i = (r / self.h).round();
        (i.max(0.0) as usize).min(self.n)
    }
}

/// Real-valued grid function: one value per node of a [`RadialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl GridFunction {
    /// Build from per-node values. The length must be `grid.num_nodes()`.
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(Error::InvalidArgument(format!(
                "grid function needs {} values, got {}",
                grid.num_nodes(),
                values.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        GridFunction {
            values: vec![0.0; grid.num_nodes()],
            grid,
        }
    }

    /// Sample `f(r_i)` at every node.
    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> RadialGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Maximum of `|f_i|` over all nodes.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Nodewise difference `self - other`; grids must match.
    pub fn checked_sub(&self, other: &GridFunction) -> Result<GridFunction> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument(
                "grid mismatch in grid-function difference".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(GridFunction {
            grid: self.grid,
            values,
        })
    }
}

/// Build a uniform radial grid with `n` cells on `[0, r_max]`.
pub fn make_grid(r_max: f64, n: usize) -> Result<RadialGrid> {
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "r_max must be positive and finite, got {r_max}"
        )));
    }
    if n < 8 {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least 8 cells, got {n}"
        )));
    }
    Ok(RadialGrid::from_parts(r_max, n))
}

/// Restrict a fine-grid function to a grid coarsened by `2^levels` by
/// pointwise injection at coincident nodes. The radial extent is unchanged.
pub fn restrict(fine: &GridFunction, levels: u32) -> Result<GridFunction> {
    let factor = 1usize
        .checked_shl(levels)
        .ok_or_else(|| Error::InvalidArgument(format!("restriction level {levels} too large")))?;
    let n = fine.grid.n();
    if n % factor != 0 || n / factor == 0 {
        return Err(Error::InvalidArgument(format!(
            "cell count {n} is not divisible into 2^{levels} coarsening"
        )));
    }
    let coarse_grid = RadialGrid::from_parts(fine.grid.r_max(), n / factor);
    let values = (0..coarse_grid.num_nodes())
        .map(|j| fine.values[j * factor])
        .collect();
    Ok(GridFunction {
        grid: coarse_grid,
        values,
    })
}

/// Root-mean-square norm `sqrt( (1/(n+1)) * sum_i f_i^2 )`.
///
/// The per-grid normalization makes norms comparable across resolutions;
/// ratios of norms taken on a common grid are unaffected by it.
pub fn l2_norm(f: &GridFunction) -> Result<f64> {
    if !f.is_finite() {
        return Err(Error::NonFinite("l2 norm input".into()));
    }
    let sum_sq: f64 = f.values.iter().map(|v| v * v).sum();
    Ok((sum_sq / f.len() as f64).sqrt())
}
