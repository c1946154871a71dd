//! Model self-adjoint operators with explicit eigenpairs on (0, L).
//!
//! Every operator uses the Dirichlet sine basis φ_n(x) = √(2/L) sin(nπx/L).
//! The Dirichlet Laplacian pairs it with λ_n = (nπ/L)²; a diagonal operator
//! pairs it with any strictly increasing positive spectrum.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::condition_number;
use crate::quadrature::CompositeGrid;

/// Default composite Gauss-Legendre layout: 32 panels of 16 nodes.
pub const DEFAULT_PANELS: usize = 32;
pub const DEFAULT_ORDER: usize = 16;
/// Quadrature nodes required per oscillation of the highest mode.
pub const NODES_PER_OSCILLATION: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOperator {
    eigenvalues: Vec<f64>,
    length: f64,
    dim: usize,
}

/// Spectral coefficients c_n against the operator's eigenfunctions.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SpatialField {
    pub coeffs: Vec<f64>,
}

impl SpatialField {
    pub fn new(coeffs: Vec<f64>) -> Self {
        SpatialField { coeffs }
    }

    pub fn zeros(modes: usize) -> Self {
        SpatialField {
            coeffs: vec![0.0; modes],
        }
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    /// Euclidean norm of the coefficients, which is the L² norm of the field.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        SpatialField::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Coefficientwise `self + other`, padding the shorter one with zeros.
    pub fn add(&self, other: &SpatialField) -> Self {
        let n = self.modes().max(other.modes());
        let get = |f: &SpatialField, i: usize| f.coeffs.get(i).copied().unwrap_or(0.0);
        SpatialField::new((0..n).map(|i| get(self, i) + get(other, i)).collect())
    }

    pub fn sub(&self, other: &SpatialField) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// Same field truncated or zero-padded to `modes` coefficients.
    pub fn resized(&self, modes: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(modes, 0.0);
        SpatialField::new(coeffs)
    }
}

impl SpectralOperator {
    /// −u'' on (0, L) with Dirichlet conditions, first `modes` eigenpairs.
    pub fn dirichlet_laplacian_1d(length: f64, modes: usize) -> Result<Self> {
        check_length(length)?;
        if modes == 0 {
            return Err(Error::invalid("operator needs at least one mode"));
        }
        let eigenvalues = (1..=modes)
            .map(|n| (n as f64 * PI / length).powi(2))
            .collect();
        Ok(SpectralOperator {
            eigenvalues,
            length,
            dim: 1,
        })
    }

    /// Diagonal operator with the given eigenvalues on the sine basis of (0, L).
    pub fn diagonal(eigenvalues: Vec<f64>, length: f64) -> Result<Self> {
        Self::diagonal_with_dim(eigenvalues, length, 1)
    }

    /// As [`diagonal`](Self::diagonal) but declaring the spatial dimension used
    /// by the Weyl growth check.
    pub fn diagonal_with_dim(eigenvalues: Vec<f64>, length: f64, dim: usize) -> Result<Self> {
        check_length(length)?;
        if dim == 0 {
            return Err(Error::invalid("domain dimension must be positive"));
        }
        if eigenvalues.is_empty() {
            return Err(Error::invalid("operator needs at least one eigenvalue"));
        }
        if !(eigenvalues[0] > 0.0) || !eigenvalues.iter().all(|l| l.is_finite()) {
            return Err(Error::invalid("eigenvalues must be positive and finite"));
        }
        if let Some(w) = eigenvalues.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(format!(
                "eigenvalues must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        Ok(SpectralOperator {
            eigenvalues,
            length,
            dim,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// φ for mode index `i` (0-based, so i = 0 is n = 1) at `x`.
    pub fn phi(&self, i: usize, x: f64) -> f64 {
        let n = (i + 1) as f64;
        (2.0 / self.length).sqrt() * (n * PI * x / self.length).sin()
    }

    /// Default quadrature grid over the whole domain.
    pub fn default_grid(&self) -> CompositeGrid {
        CompositeGrid::new(0.0, self.length, DEFAULT_PANELS, DEFAULT_ORDER)
    }

    /// Spectral coefficients of a function sampled at the nodes of `grid`.
    pub fn project(&self, grid: &CompositeGrid, samples: &[f64]) -> Result<SpatialField> {
        if samples.len() != grid.len() {
            return Err(Error::invalid(format!(
                "{} samples for {} quadrature nodes",
                samples.len(),
                grid.len()
            )));
        }
        // mode M completes M/2 oscillations on the domain
        let needed = (NODES_PER_OSCILLATION * self.modes()).div_ceil(2);
        if grid.len() < needed {
            return Err(Error::GridTooCoarse {
                nodes: grid.len(),
                modes: self.modes(),
            });
        }
        let coeffs = (0..self.modes())
            .map(|i| {
                grid.nodes
                    .iter()
                    .zip(&grid.weights)
                    .zip(samples)
                    .map(|((x, w), v)| w * v * self.phi(i, *x))
                    .sum()
            })
            .collect();
        Ok(SpatialField::new(coeffs))
    }

    /// Projection of a function on the default grid.
    pub fn project_fn(&self, f: impl Fn(f64) -> f64) -> Result<SpatialField> {
        let grid = self.default_grid();
        let samples: Vec<f64> = grid.nodes.iter().map(|&x| f(x)).collect();
        self.project(&grid, &samples)
    }

    /// Σ_n c_n φ_n(x).
    pub fn eval(&self, field: &SpatialField, x: f64) -> f64 {
        field
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * self.phi(i, x))
            .sum()
    }

    /// Field values at every point of `xs`.
    pub fn synthesize(&self, field: &SpatialField, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(field, x)).collect()
    }

    /// Matrix [φ_n(x_i)] with one row per point and one column per mode.
    pub fn sample_matrix(&self, xs: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(xs.len(), self.modes(), |r, c| self.phi(c, xs[r]))
    }

    /// Sample matrix together with its 2-norm condition number.
    pub fn sample_conditioning(&self, xs: &[f64]) -> (DMatrix<f64>, f64) {
        let m = self.sample_matrix(xs);
        let cond = condition_number(&m);
        (m, cond)
    }

    /// Operator with the same eigenpairs restricted to the first `modes`.
    pub fn truncated(&self, modes: usize) -> Result<Self> {
        if modes == 0 || modes > self.modes() {
            return Err(Error::invalid(format!(
                "cannot keep {modes} of {} modes",
                self.modes()
            )));
        }
        Ok(SpectralOperator {
            eigenvalues: self.eigenvalues[..modes].to_vec(),
            length: self.length,
            dim: self.dim,
        })
    }
}

fn check_length(length: f64) -> Result<()> {
    if length > 0.0 && length.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "domain length must be positive, got {length}"
        )))
    }
}

/// Result of fitting λ_n ≈ c₀ n^{2/d}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylFit {
    pub c0: f64,
    /// Largest relative deviation |λ_n / (c₀ n^{2/d}) − 1| over the fitted modes.
    pub residual: f64,
    pub holds: bool,
}

/// Relative deviation below which the Weyl growth law is accepted.
pub const WEYL_TOL: f64 = 0.05;

/// Fits λ_n ≈ c₀ n^{2/d} over the upper half of the modes.
///
/// The exponent is fixed to the Weyl value 2/d, so the log-log regression
/// reduces to averaging log λ_n − (2/d) log n.
pub fn weyl_check(op: &SpectralOperator) -> Result<WeylFit> {
    let m = op.modes();
    if m < 10 {
        return Err(Error::invalid(format!(
            "Weyl check needs at least 10 modes, got {m}"
        )));
    }
    let slope = 2.0 / op.dim() as f64;
    let range = (m / 2)..m;
    let count = range.len() as f64;
    let offsets: Vec<f64> = range
        .clone()
        .map(|i| op.eigenvalues[i].ln() - slope * ((i + 1) as f64).ln())
        .collect();
    let c0 = (offsets.iter().sum::<f64>() / count).exp();
    let residual = range
        .map(|i| (op.eigenvalues[i] / (c0 * ((i + 1) as f64).powf(slope)) - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(WeylFit {
        c0,
        residual,
        holds: residual < WEYL_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_on_pi_has_square_spectrum() {
        let op = SpectralOperator::dirichlet_laplacian_1d(PI, 3).unwrap();
        for (got, want) in op.eigenvalues().iter().zip([1.0, 4.0, 9.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert!((op.phi(0, PI / 2.0) - (2.0 / PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sine_modes_are_orthonormal() {
        let op = SpectralOperator::dirichlet_laplacian_1d(PI, 6).unwrap();
        let g = op.default_grid();
        for i in 0..6 {
            for j in 0..6 {
                let ip: f64 = g
                    .nodes
                    .iter()
                    .zip(&g.weights)
                    .map(|(x, w)| w * op.phi(i, *x) * op.phi(j, *x))
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-10, "({i},{j}) -> {ip}");
            }
        }
    }

    #[test]
    fn projection_of_parabola() {
        // ∫_0^π x(π−x) √(2/π) sin(nx) dx = 4√2/(√π n³) for odd n, 0 for even n
        let op = SpectralOperator::dirichlet_laplacian_1d(PI, 4).unwrap();
        let f = op.project_fn(|x| x * (PI - x)).unwrap();
        let first = 3.191_538_243_211_461_4;
        assert!((f.coeffs[0] - first).abs() < 1e-12, "{}", f.coeffs[0]);
        assert!(f.coeffs[1].abs() < 1e-12);
        assert!((f.coeffs[2] - first / 27.0).abs() < 1e-12);
        assert!(f.coeffs[3].abs() < 1e-12);
    }

    #[test]
    fn projection_of_eigenfunction_and_zero() {
        let op = SpectralOperator::dirichlet_laplacian_1d(2.0, 5).unwrap();
        let f = op.project_fn(|x| op.phi(1, x)).unwrap();
        for (i, c) in f.coeffs.iter().enumerate() {
            let want = if i == 1 { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 1e-8);
        }
        assert!(op.project_fn(|_| 0.0).unwrap().is_zero());
    }

    #[test]
    fn coarse_grid_is_refused() {
        let op = SpectralOperator::dirichlet_laplacian_1d(1.0, 40).unwrap();
        let grid = CompositeGrid::new(0.0, 1.0, 4, 16);
        let samples = vec![0.0; grid.len()];
        assert!(matches!(
            op.project(&grid, &samples),
            Err(Error::GridTooCoarse {
                nodes: 64,
                modes: 40
            })
        ));
    }

    #[test]
    fn non_monotone_spectrum_is_refused() {
        assert!(SpectralOperator::diagonal(vec![1.0, 1.0, 2.0], 1.0).is_err());
        assert!(SpectralOperator::diagonal(vec![0.0, 1.0], 1.0).is_err());
        assert!(SpectralOperator::diagonal(vec![1.0, 3.0], 1.0).is_ok());
    }

    #[test]
    fn weyl_growth() {
        let lap = SpectralOperator::dirichlet_laplacian_1d(PI, 20).unwrap();
        let fit = weyl_check(&lap).unwrap();
        assert!(fit.holds && (fit.c0 - 1.0).abs() < 1e-12);

        let shifted: Vec<f64> = (1..=20).map(|n| (n * n + n) as f64).collect();
        let fit = weyl_check(&SpectralOperator::diagonal(shifted, PI).unwrap()).unwrap();
        assert!(fit.holds, "{fit:?}");

        let slow: Vec<f64> = (1..=20).map(|n| ((n + 1) as f64).ln()).collect();
        let fit = weyl_check(&SpectralOperator::diagonal(slow, PI).unwrap()).unwrap();
        assert!(!fit.holds);
    }
}
