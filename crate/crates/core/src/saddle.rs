//! First-order primal-dual solver for `min_x max_y G(x) + <Kx, y> - F(y)`
//! with optional constant inertia and gap-based stopping.
//!
//! One iteration performs, with extrapolation points
//! `xb = x + alpha (x - x_prev)` and `yb = y + alpha (y - y_prev)`:
//!
//! ```text
//! x+ = prox_{tau G} (xb - tau K^T yb)
//! y+ = prox_{sigma F}(yb + sigma K (x+ + theta (x+ - xb)))
//! ```
//!
//! `alpha = 0`, `theta = 1` reproduces the classic scheme. Convergence
//! requires `tau * sigma * ||K||^2 < 1` and `alpha < 1/3`.
//!
//! Problems report a certified objective pair at every checkpoint: `primal`
//! must upper-bound and `dual` lower-bound the saddle value, so the recorded
//! best-so-far gap is nonnegative and nonincreasing. The returned iterate is
//! the checkpoint with the best primal value.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::SolverError;

/// Largest admissible constant inertial parameter.
pub const ALPHA_MAX: f64 = 1.0 / 3.0;

const ADJOINT_PROBE_TOL: f64 = 1e-10;

/// A saddle-point problem: the coupling operator pair, the two prox maps,
/// and a certified primal/dual objective evaluator.
pub trait SaddleOps {
    fn primal_dim(&self) -> usize;
    fn dual_dim(&self) -> usize;

    /// A guaranteed upper bound on `||K||`, used for default step sizes and
    /// the step-size admissibility check.
    fn norm_bound(&self) -> f64;

    /// `y_out = K x`.
    fn apply(&self, x: &[f64], y_out: &mut [f64]);

    /// `x_out = K^T y`.
    fn apply_adjoint(&self, y: &[f64], x_out: &mut [f64]);

    /// In-place `x <- prox_{tau G}(x)`.
    fn prox_primal(&self, x: &mut [f64], tau: f64);

    /// In-place `y <- prox_{sigma F}(y)`.
    fn prox_dual(&self, y: &mut [f64], sigma: f64);

    /// Certified objective pair at the current iterates.
    fn objectives(&self, x: &[f64], y: &[f64]) -> Objectives;
}

/// A certified bound pair: `primal >= saddle value >= dual`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objectives {
    pub primal: f64,
    pub dual: f64,
}

/// Solver configuration. Step sizes default to `0.99 / ||K||` each.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Relative duality-gap tolerance: stop when
    /// `best_primal - best_dual <= gap_tol * (1 + |best_primal|)`.
    pub gap_tol: f64,
    pub tau: Option<f64>,
    pub sigma: Option<f64>,
    /// Constant inertial parameter in `[0, 1/3)`; `0` disables inertia.
    pub alpha: f64,
    /// Primal extrapolation weight.
    pub theta: f64,
    /// Objective evaluation cadence in iterations.
    pub check_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            gap_tol: 1e-5,
            tau: None,
            sigma: None,
            alpha: 0.2,
            theta: 1.0,
            check_every: 25,
        }
    }
}

impl SolverConfig {
    /// A copy with plain (non-inertial) primal-dual stepping.
    pub fn without_inertia(mut self) -> Self {
        self.alpha = 0.0;
        self
    }

    pub fn with_gap_tol(mut self, tol: f64) -> Self {
        self.gap_tol = tol;
        self
    }

    pub fn with_max_iters(mut self, iters: usize) -> Self {
        self.max_iters = iters;
        self
    }

    fn steps(&self, norm_bound: f64) -> Result<(f64, f64), SolverError> {
        let fallback = if norm_bound > 0.0 {
            0.99 / norm_bound
        } else {
            1.0
        };
        let tau = self.tau.unwrap_or(fallback);
        let sigma = self.sigma.unwrap_or(fallback);
        if !(tau > 0.0 && tau.is_finite() && sigma > 0.0 && sigma.is_finite()) {
            return Err(SolverError::InvalidConfig(format!(
                "step sizes must be positive and finite, got tau={tau}, sigma={sigma}"
            )));
        }
        if tau * sigma * norm_bound * norm_bound >= 1.0 {
            return Err(SolverError::InvalidConfig(format!(
                "tau*sigma*||K||^2 = {} must be < 1",
                tau * sigma * norm_bound * norm_bound
            )));
        }
        Ok((tau, sigma))
    }

    fn validate(&self) -> Result<(), SolverError> {
        if self.max_iters == 0 || self.check_every == 0 {
            return Err(SolverError::InvalidConfig(
                "max_iters and check_every must be positive".into(),
            ));
        }
        if !(0.0..ALPHA_MAX).contains(&self.alpha) {
            return Err(SolverError::InvalidConfig(format!(
                "alpha must lie in [0, 1/3), got {}",
                self.alpha
            )));
        }
        if !(0.0..=2.0).contains(&self.theta) {
            return Err(SolverError::InvalidConfig(format!(
                "theta must lie in [0, 2], got {}",
                self.theta
            )));
        }
        if !(self.gap_tol >= 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "gap_tol must be nonnegative, got {}",
                self.gap_tol
            )));
        }
        Ok(())
    }
}

/// One recorded checkpoint: instantaneous objective pair plus the
/// best-so-far relative gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSample {
    pub iter: usize,
    pub primal: f64,
    pub dual: f64,
    /// `(best_primal - best_dual) / (1 + |best_primal|)` up to this point.
    pub gap: f64,
}

/// Final solver state. `x`/`y` are the iterates of the checkpoint with the
/// best primal value; `x_prev`/`y_prev` the matching inertial history.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub x_prev: Vec<f64>,
    pub y_prev: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub primal_value: f64,
    pub dual_value: f64,
    /// Final best-so-far relative gap.
    pub gap: f64,
    pub gap_history: Vec<GapSample>,
    pub tau: f64,
    pub sigma: f64,
}

/// Scalar summary of a [`SolveResult`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    pub primal_value: f64,
    pub dual_value: f64,
    pub relative_gap: f64,
}

impl From<&SolveResult> for SolveReport {
    fn from(r: &SolveResult) -> Self {
        Self {
            iterations: r.iterations,
            converged: r.converged,
            primal_value: r.primal_value,
            dual_value: r.dual_value,
            relative_gap: r.gap,
        }
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn probe_adjointness<P: SaddleOps>(problem: &P) -> Result<(), SolverError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_ad01);
    let (np, nd) = (problem.primal_dim(), problem.dual_dim());
    let mut kx = vec![0.0; nd];
    let mut kty = vec![0.0; np];
    for _ in 0..2 {
        let x: Vec<f64> = (0..np).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..nd).map(|_| rng.gen_range(-1.0..1.0)).collect();
        problem.apply(&x, &mut kx);
        problem.apply_adjoint(&y, &mut kty);
        let lhs: f64 = kx.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&kty).map(|(a, b)| a * b).sum();
        let scale = kx
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
            .mul_add(y.iter().map(|v| v * v).sum::<f64>().sqrt(), 1.0);
        let defect = (lhs - rhs).abs();
        let tol = ADJOINT_PROBE_TOL * scale;
        if defect > tol {
            return Err(SolverError::NonAdjointOperator { defect, tol });
        }
    }
    Ok(())
}

/// Runs the solver from `(x0, y0)`.
pub fn solve<P: SaddleOps>(
    problem: &P,
    x0: &[f64],
    y0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    solve_with_callback(problem, x0, y0, cfg, |_| {})
}

/// Like [`solve`], invoking `callback` at every recorded checkpoint.
pub fn solve_with_callback<P: SaddleOps>(
    problem: &P,
    x0: &[f64],
    y0: &[f64],
    cfg: &SolverConfig,
    mut callback: impl FnMut(&GapSample),
) -> Result<SolveResult, SolverError> {
    cfg.validate()?;
    let (np, nd) = (problem.primal_dim(), problem.dual_dim());
    assert_eq!(x0.len(), np, "x0 length");
    assert_eq!(y0.len(), nd, "y0 length");
    let (tau, sigma) = cfg.steps(problem.norm_bound())?;
    probe_adjointness(problem)?;

    let mut x = x0.to_vec();
    let mut y = y0.to_vec();
    let mut x_prev = x.clone();
    let mut y_prev = y.clone();
    let mut xb = vec![0.0; np];
    let mut yb = vec![0.0; nd];
    let mut xe = vec![0.0; np];
    let mut kty = vec![0.0; np];
    let mut kx = vec![0.0; nd];

    let mut best_primal = f64::INFINITY;
    let mut best_dual = f64::NEG_INFINITY;
    let mut x_best = x.clone();
    let mut y_best = y.clone();
    let mut xp_best = x.clone();
    let mut yp_best = y.clone();
    let mut gap_history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    let mut record = |iter: usize,
                      x: &[f64],
                      y: &[f64],
                      x_prev: &[f64],
                      y_prev: &[f64],
                      best_primal: &mut f64,
                      best_dual: &mut f64,
                      x_best: &mut Vec<f64>,
                      y_best: &mut Vec<f64>,
                      xp_best: &mut Vec<f64>,
                      yp_best: &mut Vec<f64>,
                      gap_history: &mut Vec<GapSample>,
                      callback: &mut dyn FnMut(&GapSample)|
     -> Result<bool, SolverError> {
        if !all_finite(x) || !all_finite(y) {
            return Err(SolverError::Diverged { iter });
        }
        let obj = problem.objectives(x, y);
        if obj.primal.is_nan() || obj.dual.is_nan() {
            return Err(SolverError::Diverged { iter });
        }
        if obj.primal < *best_primal {
            *best_primal = obj.primal;
            x_best.copy_from_slice(x);
            y_best.copy_from_slice(y);
            xp_best.copy_from_slice(x_prev);
            yp_best.copy_from_slice(y_prev);
        }
        if obj.dual > *best_dual {
            *best_dual = obj.dual;
        }
        let gap = if best_primal.is_finite() {
            (*best_primal - *best_dual) / (1.0 + best_primal.abs())
        } else {
            f64::INFINITY
        };
        let sample = GapSample {
            iter,
            primal: obj.primal,
            dual: obj.dual,
            gap,
        };
        gap_history.push(sample);
        callback(&sample);
        Ok(gap <= cfg.gap_tol)
    };

    converged |= record(
        0,
        &x,
        &y,
        &x_prev,
        &y_prev,
        &mut best_primal,
        &mut best_dual,
        &mut x_best,
        &mut y_best,
        &mut xp_best,
        &mut yp_best,
        &mut gap_history,
        &mut callback,
    )?;

    if !converged {
        for iter in 1..=cfg.max_iters {
            iterations = iter;
            for i in 0..np {
                xb[i] = x[i] + cfg.alpha * (x[i] - x_prev[i]);
            }
            for i in 0..nd {
                yb[i] = y[i] + cfg.alpha * (y[i] - y_prev[i]);
            }
            x_prev.copy_from_slice(&x);
            y_prev.copy_from_slice(&y);

            problem.apply_adjoint(&yb, &mut kty);
            for i in 0..np {
                x[i] = xb[i] - tau * kty[i];
            }
            problem.prox_primal(&mut x, tau);

            for i in 0..np {
                xe[i] = x[i] + cfg.theta * (x[i] - xb[i]);
            }
            problem.apply(&xe, &mut kx);
            for i in 0..nd {
                y[i] = yb[i] + sigma * kx[i];
            }
            problem.prox_dual(&mut y, sigma);

            if iter % cfg.check_every == 0 || iter == cfg.max_iters {
                if record(
                    iter,
                    &x,
                    &y,
                    &x_prev,
                    &y_prev,
                    &mut best_primal,
                    &mut best_dual,
                    &mut x_best,
                    &mut y_best,
                    &mut xp_best,
                    &mut yp_best,
                    &mut gap_history,
                    &mut callback,
                )? {
                    converged = true;
                    break;
                }
            }
        }
    }

    let gap = gap_history.last().map(|s| s.gap).unwrap_or(f64::INFINITY);
    Ok(SolveResult {
        x: x_best,
        y: y_best,
        x_prev: xp_best,
        y_prev: yp_best,
        iterations,
        converged,
        primal_value: best_primal,
        dual_value: best_dual,
        gap,
        gap_history,
        tau,
        sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `min_x 0.5||x - a||^2` with `K = 0` and the dual pinned at zero.
    struct ProxOnly {
        a: Vec<f64>,
    }

    impl SaddleOps for ProxOnly {
        fn primal_dim(&self) -> usize {
            self.a.len()
        }
        fn dual_dim(&self) -> usize {
            1
        }
        fn norm_bound(&self) -> f64 {
            0.0
        }
        fn apply(&self, _x: &[f64], y_out: &mut [f64]) {
            y_out.fill(0.0);
        }
        fn apply_adjoint(&self, _y: &[f64], x_out: &mut [f64]) {
            x_out.fill(0.0);
        }
        fn prox_primal(&self, x: &mut [f64], tau: f64) {
            for (xi, ai) in x.iter_mut().zip(&self.a) {
                *xi = (*xi + tau * ai) / (1.0 + tau);
            }
        }
        fn prox_dual(&self, y: &mut [f64], _sigma: f64) {
            y.fill(0.0);
        }
        fn objectives(&self, x: &[f64], _y: &[f64]) -> Objectives {
            let primal = 0.5
                * x.iter()
                    .zip(&self.a)
                    .map(|(xi, ai)| (xi - ai).powi(2))
                    .sum::<f64>();
            Objectives { primal, dual: 0.0 }
        }
    }

    #[test]
    fn zero_operator_reaches_prox_fixed_point() {
        let problem = ProxOnly {
            a: vec![1.0, -2.0, 0.5],
        };
        let cfg = SolverConfig {
            gap_tol: 1e-14,
            check_every: 1,
            max_iters: 2000,
            ..Default::default()
        };
        let out = solve(&problem, &[0.0; 3], &[0.0], &cfg).unwrap();
        assert!(out.converged);
        for (xi, ai) in out.x.iter().zip(&problem.a) {
            assert!((xi - ai).abs() < 1e-6, "{xi} vs {ai}");
        }
    }

    #[test]
    fn best_gap_history_is_nonincreasing() {
        let problem = ProxOnly {
            a: vec![2.0, 3.0],
        };
        let cfg = SolverConfig {
            gap_tol: 0.0,
            check_every: 5,
            max_iters: 500,
            ..Default::default()
        };
        let out = solve(&problem, &[10.0, -10.0], &[0.0], &cfg).unwrap();
        for win in out.gap_history.windows(2) {
            assert!(win[1].gap <= win[0].gap + 1e-15);
        }
    }

    /// An intentionally wrong adjoint pair must be rejected at startup.
    struct BadAdjoint;

    impl SaddleOps for BadAdjoint {
        fn primal_dim(&self) -> usize {
            4
        }
        fn dual_dim(&self) -> usize {
            4
        }
        fn norm_bound(&self) -> f64 {
            2.0
        }
        fn apply(&self, x: &[f64], y_out: &mut [f64]) {
            y_out.copy_from_slice(x);
        }
        fn apply_adjoint(&self, y: &[f64], x_out: &mut [f64]) {
            for (o, v) in x_out.iter_mut().zip(y) {
                *o = 2.0 * v;
            }
        }
        fn prox_primal(&self, _x: &mut [f64], _tau: f64) {}
        fn prox_dual(&self, _y: &mut [f64], _sigma: f64) {}
        fn objectives(&self, _x: &[f64], _y: &[f64]) -> Objectives {
            Objectives {
                primal: 0.0,
                dual: 0.0,
            }
        }
    }

    #[test]
    fn non_adjoint_operator_is_rejected() {
        let err = solve(&BadAdjoint, &[0.0; 4], &[0.0; 4], &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, SolverError::NonAdjointOperator { .. }));
    }

    #[test]
    fn config_validation() {
        let bad_alpha = SolverConfig {
            alpha: 0.5,
            ..Default::default()
        };
        assert!(matches!(
            solve(&BadAdjoint, &[0.0; 4], &[0.0; 4], &bad_alpha),
            Err(SolverError::InvalidConfig(_))
        ));
        let bad_steps = SolverConfig {
            tau: Some(1.0),
            sigma: Some(1.0),
            ..Default::default()
        };
        // tau*sigma*||K||^2 = 4 >= 1
        assert!(matches!(
            solve(&BadAdjoint, &[0.0; 4], &[0.0; 4], &bad_steps),
            Err(SolverError::InvalidConfig(_))
        ));
    }
}
