//! Forward-difference gradient, its exact negative transpose as divergence,
//! and operator-norm bounds for step-size selection.
//!
//! The gradient uses Neumann boundaries (the difference along an axis is zero
//! at the last node of that axis) so that `<grad u, v> = -<u, div v>` holds
//! exactly under the plain-sum inner product.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grid::{Dims, GridFunction, VectorField};

/// Writes the forward-difference gradient of `u` into `out`
/// (component-major, `d * n` entries).
pub(crate) fn grad_into(dims: Dims, h: f64, u: &[f64], out: &mut [f64]) {
    let n = dims.len();
    debug_assert_eq!(u.len(), n);
    debug_assert_eq!(out.len(), dims.ndim() * n);
    let inv_h = 1.0 / h;
    for axis in 0..dims.ndim() {
        let stride = dims.axis_stride(axis);
        let extent = dims.axis_len(axis);
        let comp = &mut out[axis * n..(axis + 1) * n];
        for i in 0..n {
            let pos = (i / stride) % extent;
            comp[i] = if pos + 1 < extent {
                (u[i + stride] - u[i]) * inv_h
            } else {
                0.0
            };
        }
    }
}

/// Writes the divergence of the component-major field `v` into `out`
/// (`n` entries). Exact negative adjoint of [`grad_into`].
pub(crate) fn div_into(dims: Dims, h: f64, v: &[f64], out: &mut [f64]) {
    let n = dims.len();
    debug_assert_eq!(v.len(), dims.ndim() * n);
    debug_assert_eq!(out.len(), n);
    let inv_h = 1.0 / h;
    out.fill(0.0);
    for axis in 0..dims.ndim() {
        let stride = dims.axis_stride(axis);
        let extent = dims.axis_len(axis);
        let comp = &v[axis * n..(axis + 1) * n];
        for i in 0..n {
            let pos = (i / stride) % extent;
            let mut acc = 0.0;
            if pos + 1 < extent {
                acc += comp[i];
            }
            if pos > 0 {
                acc -= comp[i - stride];
            }
            out[i] += acc * inv_h;
        }
    }
}

/// Forward-difference gradient of a grid function.
pub fn grad(u: &GridFunction) -> VectorField {
    let dims = u.dims();
    let n = dims.len();
    let mut flat = vec![0.0; dims.ndim() * n];
    grad_into(dims, u.spacing(), u.values(), &mut flat);
    VectorField::from_flat(dims, u.spacing(), &flat).expect("gradient has matching shape")
}

/// Discrete divergence, the exact negative adjoint of [`grad`].
pub fn div(v: &VectorField) -> GridFunction {
    let dims = v.dims();
    let mut out = vec![0.0; dims.len()];
    div_into(dims, v.spacing(), &v.to_flat(), &mut out);
    GridFunction::new(dims, v.spacing(), out).expect("divergence has matching shape")
}

/// Upper bound on `||grad||^2`: `4 d / h^2`.
pub fn grad_norm_sq_bound(dims: Dims, h: f64) -> f64 {
    4.0 * dims.ndim() as f64 / (h * h)
}

/// Bound on the norm of the denoising saddle operator
/// `K = [[id, Div], [grad, 0]]`: `sqrt(||grad||^2 + 2)`.
pub fn op_norm_bound(dims: Dims, h: f64) -> f64 {
    (grad_norm_sq_bound(dims, h) + 2.0).sqrt()
}

/// Power-iteration estimate of `||K||` for the same operator, as a
/// diagnostic companion to [`op_norm_bound`]. Deterministic start vector.
pub fn op_norm_power_estimate(dims: Dims, h: f64, iters: usize) -> f64 {
    let n = dims.len();
    let d = dims.ndim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e3779b97f4a7c15);
    let mut x: Vec<f64> = (0..(1 + d) * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut y = vec![0.0; (1 + d) * n];
    let mut estimate = 0.0;
    for _ in 0..iters.max(1) {
        // y = K x = (u + div q, grad u)
        let (u, q) = x.split_at(n);
        div_into(dims, h, q, &mut y[..n]);
        for i in 0..n {
            y[i] += u[i];
        }
        let (yu, yq) = y.split_at_mut(n);
        grad_into(dims, h, u, yq);
        let _ = yu;
        // x = K^T y = (f - div phi, -grad f)
        let (f, phi) = y.split_at(n);
        div_into(dims, h, phi, &mut x[..n]);
        for i in 0..n {
            x[i] = f[i] - x[i];
        }
        let (xu, xq) = x.split_at_mut(n);
        grad_into(dims, h, f, xq);
        for v in xq.iter_mut() {
            *v = -*v;
        }
        let _ = xu;
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        estimate = norm.sqrt();
        for v in x.iter_mut() {
            *v /= norm;
        }
    }
    estimate
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Dims;

    fn random_grid(dims: Dims, h: f64, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..dims.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        GridFunction::new(dims, h, values).unwrap()
    }

    fn random_field(dims: Dims, h: f64, seed: u64) -> VectorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let flat: Vec<f64> = (0..dims.ndim() * dims.len())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        VectorField::from_flat(dims, h, &flat).unwrap()
    }

    #[test]
    fn grad_of_constant_is_zero() {
        let u = GridFunction::constant(Dims::Two { rows: 5, cols: 7 }, 0.5, 3.25).unwrap();
        let g = grad(&u);
        assert_eq!(g.max_magnitude(), 0.0);
    }

    #[test]
    fn grad_1d_forward_difference() {
        let u = GridFunction::from_1d(vec![0.0, 1.0, 2.0], 1.0).unwrap();
        let g = grad(&u);
        assert_eq!(g.component(0), &[1.0, 1.0, 0.0]);
    }

    #[test]
    fn div_1d_matches_hand_transpose() {
        let dims = Dims::One(3);
        let v = VectorField::from_flat(dims, 1.0, &[1.0, 1.0, 0.0]).unwrap();
        let d = div(&v);
        assert_eq!(d.values(), &[1.0, 0.0, -1.0]);
    }

    #[test]
    fn div_of_zero_field_is_zero() {
        let v = VectorField::zeros(Dims::Two { rows: 3, cols: 3 }, 1.0).unwrap();
        assert_eq!(div(&v).norm_inf(), 0.0);
    }

    #[test]
    fn div_grad_constant_is_exactly_zero() {
        let u = GridFunction::constant(Dims::Two { rows: 8, cols: 6 }, 0.25, -1.5).unwrap();
        let d = div(&grad(&u));
        assert_eq!(d.norm_inf(), 0.0);
    }

    #[test]
    fn adjointness_random_grids() {
        for (seed, dims, h) in [
            (1, Dims::One(17), 1.0),
            (2, Dims::One(64), 0.1),
            (3, Dims::Two { rows: 9, cols: 13 }, 1.0),
            (4, Dims::Two { rows: 32, cols: 32 }, 0.5),
        ] {
            let u = random_grid(dims, h, seed);
            let v = random_field(dims, h, seed + 100);
            let lhs = grad(&u).dot(&v);
            let rhs = -u.dot(&div(&v));
            let scale = u.values().iter().map(|x| x * x).sum::<f64>().sqrt()
                * v.to_flat().iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(
                (lhs - rhs).abs() <= 1e-12 * scale.max(1.0),
                "adjointness defect {} at dims {dims}",
                (lhs - rhs).abs()
            );
        }
    }

    #[test]
    fn divergence_sums_to_zero() {
        let v = random_field(Dims::Two { rows: 6, cols: 11 }, 0.3, 9);
        let total: f64 = div(&v).values().iter().sum();
        assert!(total.abs() < 1e-12);
    }

    #[test]
    fn op_norm_bound_values() {
        assert!((op_norm_bound(Dims::Two { rows: 16, cols: 16 }, 1.0) - 10.0_f64.sqrt()).abs() < 1e-15);
        assert!((op_norm_bound(Dims::One(16), 1.0) - 6.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn power_iteration_below_bound() {
        let dims = Dims::Two { rows: 16, cols: 16 };
        let bound = op_norm_bound(dims, 1.0);
        let est = op_norm_power_estimate(dims, 1.0, 200);
        assert!(est <= bound + 1e-12, "estimate {est} exceeds bound {bound}");
        assert!(est >= 0.95 * bound, "estimate {est} too far below {bound}");
    }
}
