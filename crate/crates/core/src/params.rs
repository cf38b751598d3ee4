use crate::error::ParamError;

/// The pair `lambda = (lambda1, lambda2)` weighting the value bound and the
/// Lipschitz bound of the KR test functions. Either entry may be
/// `f64::INFINITY`, which drops the corresponding constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegParams {
    lambda1: f64,
    lambda2: f64,
}

impl RegParams {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self, ParamError> {
        if lambda1.is_nan() || lambda1 <= 0.0 {
            return Err(ParamError::BadLambda1(lambda1));
        }
        if lambda2.is_nan() || lambda2 <= 0.0 {
            return Err(ParamError::BadLambda2(lambda2));
        }
        Ok(Self { lambda1, lambda2 })
    }

    /// `(lambda1, inf)`: the discrepancy degenerates to `lambda1` times the
    /// L1 norm.
    pub fn l1_only(lambda1: f64) -> Result<Self, ParamError> {
        Self::new(lambda1, f64::INFINITY)
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn both_infinite(&self) -> bool {
        self.lambda1.is_infinite() && self.lambda2.is_infinite()
    }
}
