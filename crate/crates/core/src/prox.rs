//! Closed-form projections and proximal maps for the saddle-point terms.
//!
//! All maps act nodewise; a bound or threshold of `f64::INFINITY` degenerates
//! the map to the identity (for shrinkage, to zero), so dropped constraints
//! need no special-casing in the solvers.

use crate::error::GridError;
use crate::grid::{GridFunction, VectorField};

pub(crate) fn clamp_slice(x: &mut [f64], bound: f64) {
    if bound.is_infinite() {
        return;
    }
    for v in x.iter_mut() {
        *v = v.clamp(-bound, bound);
    }
}

/// Per-node Euclidean ball projection on a component-major field slice.
pub(crate) fn project_ball_nodes(x: &mut [f64], ncomp: usize, radius: f64) {
    if radius.is_infinite() {
        return;
    }
    let n = x.len() / ncomp;
    for i in 0..n {
        let mut sq = 0.0;
        for c in 0..ncomp {
            let v = x[c * n + i];
            sq += v * v;
        }
        let mag = sq.sqrt();
        if mag > radius {
            let s = radius / mag;
            for c in 0..ncomp {
                x[c * n + i] *= s;
            }
        }
    }
}

/// Per-node vectorial soft-thresholding on a component-major field slice.
pub(crate) fn shrink_nodes(x: &mut [f64], ncomp: usize, threshold: f64) {
    if threshold == 0.0 {
        return;
    }
    let n = x.len() / ncomp;
    for i in 0..n {
        let mut sq = 0.0;
        for c in 0..ncomp {
            let v = x[c * n + i];
            sq += v * v;
        }
        let mag = sq.sqrt();
        if mag <= threshold {
            for c in 0..ncomp {
                x[c * n + i] = 0.0;
            }
        } else {
            let s = 1.0 - threshold / mag;
            for c in 0..ncomp {
                x[c * n + i] *= s;
            }
        }
    }
}

/// Pointwise clamp of `f` to `[-bound, bound]`; identity for an infinite
/// bound.
pub fn project_box(f: &GridFunction, bound: f64) -> GridFunction {
    assert!(bound > 0.0, "bound must be positive");
    let mut out = f.clone();
    clamp_slice(out.values_mut(), bound);
    out
}

/// Per-node Euclidean-magnitude projection `w -> w * min(1, radius/|w|)`;
/// identity for an infinite radius. Zero nodes stay zero.
pub fn project_ball_field(v: &VectorField, radius: f64) -> VectorField {
    assert!(radius > 0.0, "radius must be positive");
    let mut flat = v.to_flat();
    project_ball_nodes(&mut flat, v.ncomp(), radius);
    VectorField::from_flat(v.dims(), v.spacing(), &flat).expect("projection keeps shape")
}

/// Per-node vectorial soft-thresholding `w -> w * max(0, 1 - t/|w|)`,
/// the prox of `t` times the sum of node magnitudes.
pub fn shrink_field(v: &VectorField, threshold: f64) -> VectorField {
    assert!(threshold >= 0.0, "threshold must be nonnegative");
    let mut flat = v.to_flat();
    shrink_nodes(&mut flat, v.ncomp(), threshold);
    VectorField::from_flat(v.dims(), v.spacing(), &flat).expect("shrinkage keeps shape")
}

/// Prox of the linear pairing `<f, u0>`: `f - step * u0`. Composed with
/// [`project_box`] inside the solvers.
pub fn prox_linear(
    f: &GridFunction,
    u0: &GridFunction,
    step: f64,
) -> Result<GridFunction, GridError> {
    f.same_shape(u0)?;
    let values = f
        .values()
        .iter()
        .zip(u0.values())
        .map(|(a, b)| a - step * b)
        .collect();
    f.with_values(values)
}
