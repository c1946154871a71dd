//! Column-scaled least squares with condition reporting.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Condition numbers above this are refused.
pub const MAX_CONDITION: f64 = 1e12;

/// Solution of a scaled least-squares problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub solution: Vec<f64>,
    /// 2-norm condition number of the column-normalized design matrix.
    pub condition: f64,
    /// Euclidean norm of the (weighted) residual.
    pub residual: f64,
}

/// 2-norm condition number via singular values.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Minimizes ‖A c − y‖ after scaling every column of `A` to unit norm.
///
/// Zero columns are left out of the solve and get coefficient 0. Fails with
/// `IllConditioned` when the scaled matrix has condition above
/// [`MAX_CONDITION`].
pub fn solve_scaled(a: &DMatrix<f64>, y: &[f64], context: &str) -> Result<LeastSquares> {
    if a.nrows() != y.len() {
        return Err(Error::invalid(format!(
            "{context}: {} rows but {} right-hand side entries",
            a.nrows(),
            y.len()
        )));
    }
    if a.nrows() < a.ncols() {
        return Err(Error::invalid(format!(
            "{context}: {} equations for {} unknowns",
            a.nrows(),
            a.ncols()
        )));
    }
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    let active: Vec<usize> = (0..a.ncols()).filter(|&j| norms[j] > 0.0).collect();
    let mut scaled = DMatrix::zeros(a.nrows(), active.len());
    for (col, &j) in active.iter().enumerate() {
        scaled.set_column(col, &(a.column(j) / norms[j]));
    }
    let rhs = DVector::from_column_slice(y);
    let svd = scaled.clone().svd(true, true);
    let sv = &svd.singular_values;
    let condition = if sv.is_empty() {
        1.0
    } else if sv.min() == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / sv.min()
    };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned {
            condition,
            context: context.to_string(),
        });
    }
    let mut solution = vec![0.0; a.ncols()];
    if !active.is_empty() {
        let z = svd
            .solve(&rhs, 0.0)
            .map_err(|e| Error::invalid(format!("{context}: {e}")))?;
        for (col, &j) in active.iter().enumerate() {
            solution[j] = z[col] / norms[j];
        }
    }
    let fitted = a * DVector::from_column_slice(&solution);
    let residual = (fitted - rhs).norm();
    Ok(LeastSquares {
        solution,
        condition,
        residual,
    })
}

/// Same as [`solve_scaled`] with every row `i` multiplied by `weights[i]`.
pub fn solve_weighted(
    a: &DMatrix<f64>,
    y: &[f64],
    weights: &[f64],
    context: &str,
) -> Result<LeastSquares> {
    if weights.len() != y.len() {
        return Err(Error::invalid(format!("{context}: weight count mismatch")));
    }
    let mut aw = a.clone();
    for (i, w) in weights.iter().enumerate() {
        aw.row_mut(i).scale_mut(*w);
    }
    let yw: Vec<f64> = y.iter().zip(weights).map(|(v, w)| v * w).collect();
    solve_scaled(&aw, &yw, context)
}

/// sqrt(diag((AᵀA)^{-1})): the relative standard error of every least-squares
/// coefficient under uniform row noise. Zero columns get infinity.
pub fn coefficient_scales(a: &DMatrix<f64>) -> Vec<f64> {
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    let active: Vec<usize> = (0..a.ncols()).filter(|&j| norms[j] > 0.0).collect();
    let mut scaled = DMatrix::zeros(a.nrows(), active.len());
    for (col, &j) in active.iter().enumerate() {
        scaled.set_column(col, &(a.column(j) / norms[j]));
    }
    let svd = scaled.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut out = vec![f64::INFINITY; a.ncols()];
    for (col, &j) in active.iter().enumerate() {
        let var: f64 = svd
            .singular_values
            .iter()
            .enumerate()
            .map(|(i, s)| (v_t[(i, col)] / s).powi(2))
            .sum();
        out[j] = var.sqrt() / norms[j];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_scales_of_orthogonal_columns() {
        let a = DMatrix::from_row_slice(3, 2, &[2.0, 0.0, 0.0, 3.0, 0.0, 0.0]);
        let s = coefficient_scales(&a);
        assert!((s[0] - 0.5).abs() < 1e-15 && (s[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn recovers_exact_solution() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let y = [1.0, 3.0, 5.0, 7.0];
        let ls = solve_scaled(&a, &y, "line").unwrap();
        assert!((ls.solution[0] - 1.0).abs() < 1e-14);
        assert!((ls.solution[1] - 2.0).abs() < 1e-14);
        assert!(ls.residual < 1e-13);
    }

    #[test]
    fn scaling_removes_column_magnitude() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1e9, 0.0, 1e9, 1.0, 0.0]);
        let ls = solve_scaled(&a, &[2.0, 1.0, 1.0], "scaled").unwrap();
        assert!(ls.condition < 10.0);
        assert!((ls.solution[1] - 1e-9).abs() < 1e-22);
    }

    #[test]
    fn duplicate_columns_are_refused() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        assert!(matches!(
            solve_scaled(&a, &[1.0, 2.0, 3.0], "dup"),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn zero_column_gets_zero_coefficient() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 2.0, 0.0, 3.0, 0.0]);
        let ls = solve_scaled(&a, &[2.0, 4.0, 6.0], "zero").unwrap();
        assert_eq!(ls.solution[1], 0.0);
        assert!((ls.solution[0] - 2.0).abs() < 1e-14);
    }
}
