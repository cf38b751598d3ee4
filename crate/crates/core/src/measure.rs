use crate::error::MeasureError;

/// A finite signed sum of point masses `sum_i w_i delta_{x_i}` with distinct
/// locations and nonzero weights. Input to the exact KR-norm oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    /// Flat coordinates, `dim` entries per point.
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self, MeasureError> {
        if dim == 0 || dim > 2 {
            return Err(MeasureError::BadDimension(dim));
        }
        if weights.is_empty() {
            return Err(MeasureError::Empty);
        }
        if coords.len() != dim * weights.len() {
            return Err(MeasureError::LengthMismatch {
                points: coords.len() / dim,
                weights: weights.len(),
            });
        }
        if !coords.iter().all(|c| c.is_finite()) {
            return Err(MeasureError::NonFinite);
        }
        for (i, w) in weights.iter().enumerate() {
            if *w == 0.0 || !w.is_finite() {
                return Err(MeasureError::BadWeight(i));
            }
        }
        let m = Self {
            dim,
            coords,
            weights,
        };
        for i in 0..m.len() {
            for j in i + 1..m.len() {
                if m.point(i) == m.point(j) {
                    return Err(MeasureError::DuplicatePoint(i, j));
                }
            }
        }
        Ok(m)
    }

    pub fn from_1d(points: &[f64], weights: &[f64]) -> Result<Self, MeasureError> {
        Self::new(1, points.to_vec(), weights.to_vec())
    }

    pub fn from_2d(points: &[(f64, f64)], weights: &[f64]) -> Result<Self, MeasureError> {
        let coords = points.iter().flat_map(|&(x, y)| [x, y]).collect();
        Self::new(2, coords, weights.to_vec())
    }

    /// A two-point measure `delta_a - delta_b` scaled by `mass`.
    pub fn dipole_1d(a: f64, b: f64, mass: f64) -> Result<Self, MeasureError> {
        Self::from_1d(&[a, b], &[mass, -mass])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Sum of weights (the total mass, sign included).
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Sum of absolute weights (the Radon norm of the measure).
    pub fn radon_norm(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    /// Largest pairwise distance between support points.
    pub fn support_diameter(&self) -> f64 {
        let mut d = 0.0_f64;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                d = d.max(self.distance(i, j));
            }
        }
        d
    }

    /// Scales all weights by `t` (must keep them nonzero).
    pub fn scaled(&self, t: f64) -> Result<Self, MeasureError> {
        Self::new(
            self.dim,
            self.coords.clone(),
            self.weights.iter().map(|w| w * t).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_zero_weights() {
        assert_eq!(
            DiscreteMeasure::from_1d(&[0.0, 0.0], &[1.0, 1.0]).unwrap_err(),
            MeasureError::DuplicatePoint(0, 1)
        );
        assert_eq!(
            DiscreteMeasure::from_1d(&[0.0, 1.0], &[1.0, 0.0]).unwrap_err(),
            MeasureError::BadWeight(1)
        );
    }

    #[test]
    fn dipole_geometry() {
        let m = DiscreteMeasure::dipole_1d(0.0, 2.5, 1.0).unwrap();
        assert_eq!(m.total_mass(), 0.0);
        assert_eq!(m.radon_norm(), 2.0);
        assert_eq!(m.support_diameter(), 2.5);
    }
}
