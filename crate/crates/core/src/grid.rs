//! Scalar and vector fields on uniform 1D/2D grids.
//!
//! All discrete integrals are plain sums times `h^d` where `h` is the grid
//! spacing and `d` the spatial dimension; 2D data is row-major.

use std::fmt;

use crate::error::GridError;

/// Grid extent: a 1D line of `n` nodes or a 2D `rows x cols` raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dims {
    One(usize),
    Two { rows: usize, cols: usize },
}

impl Dims {
    /// Total number of grid nodes.
    pub fn len(&self) -> usize {
        match *self {
            Dims::One(n) => n,
            Dims::Two { rows, cols } => rows * cols,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Spatial dimension (1 or 2).
    pub fn ndim(&self) -> usize {
        match self {
            Dims::One(_) => 1,
            Dims::Two { .. } => 2,
        }
    }

    /// Number of nodes along `axis` (axis 0 is rows in 2D).
    pub fn axis_len(&self, axis: usize) -> usize {
        match (*self, axis) {
            (Dims::One(n), 0) => n,
            (Dims::Two { rows, .. }, 0) => rows,
            (Dims::Two { cols, .. }, 1) => cols,
            _ => panic!("axis {axis} out of range for {self}"),
        }
    }

    /// Flat-index stride along `axis`.
    pub fn axis_stride(&self, axis: usize) -> usize {
        match (*self, axis) {
            (Dims::One(_), 0) => 1,
            (Dims::Two { cols, .. }, 0) => cols,
            (Dims::Two { .. }, 1) => 1,
            _ => panic!("axis {axis} out of range for {self}"),
        }
    }

    /// Euclidean diagonal of the bounding box, `h * sqrt(sum (n_i - 1)^2)`.
    pub fn diameter(&self, h: f64) -> f64 {
        let sq: f64 = match *self {
            Dims::One(n) => ((n - 1) as f64).powi(2),
            Dims::Two { rows, cols } => {
                ((rows - 1) as f64).powi(2) + ((cols - 1) as f64).powi(2)
            }
        };
        h * sq.sqrt()
    }

    fn validate(self) -> Result<Self, GridError> {
        if self.len() == 0 {
            return Err(GridError::EmptyDims);
        }
        Ok(self)
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dims::One(n) => write!(f, "{n}"),
            Dims::Two { rows, cols } => write!(f, "{rows}x{cols}"),
        }
    }
}

fn check_spacing(h: f64) -> Result<f64, GridError> {
    if h.is_finite() && h > 0.0 {
        Ok(h)
    } else {
        Err(GridError::BadSpacing(h))
    }
}

fn check_finite(values: &[f64]) -> Result<(), GridError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(GridError::NonFinite)
    }
}

/// A scalar field sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dims: Dims,
    h: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(dims: Dims, h: f64, values: Vec<f64>) -> Result<Self, GridError> {
        let dims = dims.validate()?;
        let h = check_spacing(h)?;
        if values.len() != dims.len() {
            return Err(GridError::LengthMismatch {
                got: values.len(),
                want: dims.len(),
            });
        }
        check_finite(&values)?;
        Ok(Self { dims, h, values })
    }

    pub fn from_1d(values: Vec<f64>, h: f64) -> Result<Self, GridError> {
        let n = values.len();
        Self::new(Dims::One(n), h, values)
    }

    pub fn from_2d(rows: usize, cols: usize, h: f64, values: Vec<f64>) -> Result<Self, GridError> {
        Self::new(Dims::Two { rows, cols }, h, values)
    }

    pub fn constant(dims: Dims, h: f64, value: f64) -> Result<Self, GridError> {
        Self::new(dims, h, vec![value; dims.len()])
    }

    pub fn zeros(dims: Dims, h: f64) -> Result<Self, GridError> {
        Self::constant(dims, h, 0.0)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Volume of one grid cell, `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dims.ndim() as i32)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Replaces the values, keeping geometry. Lengths must match.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, GridError> {
        Self::new(self.dims, self.h, values)
    }

    pub fn same_shape(&self, other: &GridFunction) -> Result<(), GridError> {
        if self.dims == other.dims {
            Ok(())
        } else {
            Err(GridError::ShapeMismatch {
                left: self.dims,
                right: other.dims,
            })
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `h^d` times the sum of values (the discrete integral).
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    /// `h^d`-weighted L1 norm.
    pub fn norm_l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.cell_volume()
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Population standard deviation of the node values.
    pub fn std_dev(&self) -> f64 {
        let mean = self.mean();
        let var = self
            .values
            .iter()
            .map(|v| (v - mean).powi(2))
            .sum::<f64>()
            / self.values.len() as f64;
        var.sqrt()
    }

    /// Plain-sum inner product (no `h^d` weight).
    pub fn dot(&self, other: &GridFunction) -> f64 {
        debug_assert_eq!(self.dims, other.dims);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            dims: self.dims,
            h: self.h,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise difference `self - other`.
    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction, GridError> {
        self.same_shape(other)?;
        Ok(GridFunction {
            dims: self.dims,
            h: self.h,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }
}

/// A vector field on the grid: one component array per spatial axis,
/// stored node-aligned with the owning `GridFunction`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    dims: Dims,
    h: f64,
    /// Component-major: `comps[axis][node]`.
    comps: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(dims: Dims, h: f64, comps: Vec<Vec<f64>>) -> Result<Self, GridError> {
        let dims = dims.validate()?;
        let h = check_spacing(h)?;
        if comps.len() != dims.ndim() {
            return Err(GridError::LengthMismatch {
                got: comps.len(),
                want: dims.ndim(),
            });
        }
        for c in &comps {
            if c.len() != dims.len() {
                return Err(GridError::LengthMismatch {
                    got: c.len(),
                    want: dims.len(),
                });
            }
            check_finite(c)?;
        }
        Ok(Self { dims, h, comps })
    }

    pub fn zeros(dims: Dims, h: f64) -> Result<Self, GridError> {
        let comps = vec![vec![0.0; dims.len()]; dims.ndim()];
        Self::new(dims, h, comps)
    }

    /// Builds from a component-major flat slice of length `d * n`.
    pub fn from_flat(dims: Dims, h: f64, flat: &[f64]) -> Result<Self, GridError> {
        let n = dims.len();
        let d = dims.ndim();
        if flat.len() != d * n {
            return Err(GridError::LengthMismatch {
                got: flat.len(),
                want: d * n,
            });
        }
        let comps = (0..d).map(|a| flat[a * n..(a + 1) * n].to_vec()).collect();
        Self::new(dims, h, comps)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.comps[axis]
    }

    pub fn component_mut(&mut self, axis: usize) -> &mut [f64] {
        &mut self.comps[axis]
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dims.ndim() as i32)
    }

    /// Euclidean magnitude of the vector at `node`.
    pub fn node_magnitude(&self, node: usize) -> f64 {
        self.comps
            .iter()
            .map(|c| c[node] * c[node])
            .sum::<f64>()
            .sqrt()
    }

    /// Plain sum of node magnitudes (no `h^d` weight).
    pub fn sum_magnitudes(&self) -> f64 {
        (0..self.dims.len()).map(|i| self.node_magnitude(i)).sum()
    }

    /// `h^d`-weighted sum of node magnitudes: the discrete Radon norm.
    pub fn radon_norm(&self) -> f64 {
        self.sum_magnitudes() * self.cell_volume()
    }

    pub fn max_magnitude(&self) -> f64 {
        (0..self.dims.len()).fold(0.0_f64, |m, i| m.max(self.node_magnitude(i)))
    }

    /// Plain-sum inner product over all components.
    pub fn dot(&self, other: &VectorField) -> f64 {
        debug_assert_eq!(self.dims, other.dims);
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum()
    }

    /// Copies into a component-major flat vector of length `d * n`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.ncomp() * self.dims.len());
        for c in &self.comps {
            out.extend_from_slice(c);
        }
        out
    }

    pub fn same_shape(&self, other: &VectorField) -> Result<(), GridError> {
        if self.dims == other.dims {
            Ok(())
        } else {
            Err(GridError::ShapeMismatch {
                left: self.dims,
                right: other.dims,
            })
        }
    }

    pub fn matches_grid(&self, g: &GridFunction) -> Result<(), GridError> {
        if self.dims == g.dims() {
            Ok(())
        } else {
            Err(GridError::ShapeMismatch {
                left: self.dims,
                right: g.dims(),
            })
        }
    }
}
