//! A small dense revised-simplex solver for equality-form linear programs
//! `min c'x  s.t.  Ax = b, x >= 0`, sized for the exact transport oracle
//! (tens of rows). Bland's rule guards against cycling; the caller supplies
//! a feasible starting basis.

use crate::error::LpError;

/// One column of the constraint matrix, sparse by row.
#[derive(Debug, Clone)]
pub struct SparseCol {
    pub cost: f64,
    pub entries: Vec<(usize, f64)>,
}

/// An equality-form linear program.
#[derive(Debug, Clone)]
pub struct StandardLp {
    pub nrows: usize,
    pub cols: Vec<SparseCol>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    /// Primal values per column.
    pub x: Vec<f64>,
    /// Dual multipliers per row.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

const PIVOT_TOL: f64 = 1e-11;

fn invert(matrix: &mut [f64], m: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    for col in 0..m {
        let mut piv = col;
        for r in col + 1..m {
            if matrix[r * m + col].abs() > matrix[piv * m + col].abs() {
                piv = r;
            }
        }
        if matrix[piv * m + col].abs() < 1e-12 {
            return None;
        }
        if piv != col {
            for k in 0..m {
                matrix.swap(col * m + k, piv * m + k);
                inv.swap(col * m + k, piv * m + k);
            }
        }
        let p = matrix[col * m + col];
        for k in 0..m {
            matrix[col * m + k] /= p;
            inv[col * m + k] /= p;
        }
        for r in 0..m {
            if r != col {
                let factor = matrix[r * m + col];
                if factor != 0.0 {
                    for k in 0..m {
                        matrix[r * m + k] -= factor * matrix[col * m + k];
                        inv[r * m + k] -= factor * inv[col * m + k];
                    }
                }
            }
        }
    }
    Some(inv)
}

fn col_times_binv(binv: &[f64], m: usize, col: &SparseCol, out: &mut [f64]) {
    out.fill(0.0);
    for &(row, val) in &col.entries {
        for i in 0..m {
            out[i] += binv[i * m + row] * val;
        }
    }
}

/// Solves the LP starting from `initial_basis` (one column index per row,
/// forming an invertible matrix with nonnegative basic values).
pub fn simplex_solve(lp: &StandardLp, initial_basis: &[usize]) -> Result<LpSolution, LpError> {
    let m = lp.nrows;
    if initial_basis.len() != m {
        return Err(LpError::Malformed(format!(
            "basis has {} entries for {} rows",
            initial_basis.len(),
            m
        )));
    }
    for col in &lp.cols {
        for &(row, _) in &col.entries {
            if row >= m {
                return Err(LpError::Malformed(format!("row index {row} out of range")));
            }
        }
    }

    let mut basis = initial_basis.to_vec();
    let mut in_basis = vec![false; lp.cols.len()];
    let mut bmat = vec![0.0; m * m];
    for (i, &j) in basis.iter().enumerate() {
        in_basis[j] = true;
        for &(row, val) in &lp.cols[j].entries {
            bmat[row * m + i] = val;
        }
    }
    let mut binv = invert(&mut bmat, m).ok_or(LpError::SingularBasis)?;

    let mut xb = vec![0.0; m];
    for i in 0..m {
        xb[i] = (0..m).map(|k| binv[i * m + k] * lp.rhs[k]).sum();
        if xb[i] < -1e-9 {
            return Err(LpError::Malformed(format!(
                "initial basis is infeasible: x_B[{i}] = {}",
                xb[i]
            )));
        }
        xb[i] = xb[i].max(0.0);
    }

    let cost_scale = lp
        .cols
        .iter()
        .fold(1.0_f64, |acc, c| acc.max(c.cost.abs()));
    let rc_tol = 1e-9 * cost_scale;

    let iter_limit = 200 * (m + lp.cols.len());
    let mut duals = vec![0.0; m];
    let mut direction = vec![0.0; m];
    let mut iterations = 0;

    loop {
        if iterations > iter_limit {
            return Err(LpError::IterationLimit(iter_limit));
        }
        // duals y = c_B^T B^{-1}
        for j in 0..m {
            duals[j] = (0..m).map(|i| lp.cols[basis[i]].cost * binv[i * m + j]).sum();
        }
        // Bland: first column with negative reduced cost
        let mut entering = None;
        for (j, col) in lp.cols.iter().enumerate() {
            if in_basis[j] {
                continue;
            }
            let ay: f64 = col.entries.iter().map(|&(r, v)| duals[r] * v).sum();
            if col.cost - ay < -rc_tol {
                entering = Some(j);
                break;
            }
        }
        let Some(entering) = entering else {
            break;
        };

        col_times_binv(&binv, m, &lp.cols[entering], &mut direction);
        let mut leaving: Option<(usize, f64)> = None;
        for i in 0..m {
            if direction[i] > PIVOT_TOL {
                let ratio = xb[i] / direction[i];
                let better = match leaving {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && basis[i] < basis[li])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
        }
        let Some((row, step)) = leaving else {
            return Err(LpError::Unbounded(entering));
        };

        for i in 0..m {
            if i != row {
                xb[i] -= step * direction[i];
                if xb[i] < 0.0 {
                    xb[i] = 0.0;
                }
            }
        }
        xb[row] = step;
        in_basis[basis[row]] = false;
        in_basis[entering] = true;
        basis[row] = entering;

        let pivot = direction[row];
        for k in 0..m {
            binv[row * m + k] /= pivot;
        }
        for i in 0..m {
            if i != row && direction[i] != 0.0 {
                let factor = direction[i];
                for k in 0..m {
                    binv[i * m + k] -= factor * binv[row * m + k];
                }
            }
        }
        iterations += 1;
    }

    // refresh basic values and duals from the final inverse
    for i in 0..m {
        xb[i] = (0..m)
            .map(|k| binv[i * m + k] * lp.rhs[k])
            .sum::<f64>()
            .max(0.0);
    }
    for j in 0..m {
        duals[j] = (0..m).map(|i| lp.cols[basis[i]].cost * binv[i * m + j]).sum();
    }

    let mut x = vec![0.0; lp.cols.len()];
    for i in 0..m {
        x[basis[i]] = xb[i];
    }
    let objective = basis
        .iter()
        .zip(&xb)
        .map(|(&j, &v)| lp.cols[j].cost * v)
        .sum();

    Ok(LpSolution {
        objective,
        x,
        duals,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // min -x1 - 2 x2  s.t.  x1 + s1 = 3, x2 + s2 = 2, x1 + x2 + s3 = 4
    #[test]
    fn solves_textbook_lp() {
        let cols = vec![
            SparseCol { cost: -1.0, entries: vec![(0, 1.0), (2, 1.0)] },
            SparseCol { cost: -2.0, entries: vec![(1, 1.0), (2, 1.0)] },
            SparseCol { cost: 0.0, entries: vec![(0, 1.0)] },
            SparseCol { cost: 0.0, entries: vec![(1, 1.0)] },
            SparseCol { cost: 0.0, entries: vec![(2, 1.0)] },
        ];
        let lp = StandardLp {
            nrows: 3,
            cols,
            rhs: vec![3.0, 2.0, 4.0],
        };
        let sol = simplex_solve(&lp, &[2, 3, 4]).unwrap();
        assert!((sol.objective + 6.0).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9);
        assert!((sol.x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn detects_unbounded() {
        // min -x1 s.t. x1 - x2 = 0 -> push both to infinity
        let cols = vec![
            SparseCol { cost: -1.0, entries: vec![(0, 1.0)] },
            SparseCol { cost: 0.0, entries: vec![(0, -1.0)] },
        ];
        let lp = StandardLp {
            nrows: 1,
            cols,
            rhs: vec![0.0],
        };
        // basis: column 1 is -1, still invertible
        let err = simplex_solve(&lp, &[1]).unwrap_err();
        assert!(matches!(err, LpError::Unbounded(_) | LpError::Malformed(_)));
    }

    #[test]
    fn duals_certify_optimum() {
        let cols = vec![
            SparseCol { cost: 3.0, entries: vec![(0, 1.0)] },
            SparseCol { cost: 1.0, entries: vec![(0, 1.0), (1, 1.0)] },
            SparseCol { cost: 4.0, entries: vec![(1, 1.0)] },
        ];
        let lp = StandardLp {
            nrows: 2,
            cols,
            rhs: vec![2.0, 3.0],
        };
        let sol = simplex_solve(&lp, &[0, 2]).unwrap();
        let dual_value: f64 = sol.duals.iter().zip(&lp.rhs).map(|(y, b)| y * b).sum();
        assert!((sol.objective - dual_value).abs() < 1e-9);
        // dual feasibility: c_j - y'A_j >= 0
        for col in &lp.cols {
            let ay: f64 = col.entries.iter().map(|&(r, v)| sol.duals[r] * v).sum();
            assert!(col.cost - ay >= -1e-9);
        }
    }
}
