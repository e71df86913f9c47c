use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, VerifyError};
use crate::linalg::{c, hermiticity_defect, herm_eigenvalues, partial_trace, projector, trace, CMat, C64};

/// Tolerance for the Hermitian, unit-trace and positivity checks.
pub const STATE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: CMat,
    dims: Vec<usize>,
}

impl DensityOperator {
    pub fn new(matrix: CMat, dims: Vec<usize>) -> Result<Self> {
        let side: usize = dims.iter().product();
        if matrix.nrows() != side || matrix.ncols() != side {
            return Err(VerifyError::Dimension(format!(
                "{}x{} matrix for dims {dims:?}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = hermiticity_defect(&matrix);
        if herm > STATE_TOL {
            return Err(VerifyError::NotDensity(format!("Hermiticity defect {herm:e}")));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(VerifyError::NotDensity(format!("trace {tr}")));
        }
        let min = herm_eigenvalues(&matrix).into_iter().fold(f64::INFINITY, f64::min);
        if min < -STATE_TOL {
            return Err(VerifyError::NotDensity(format!("eigenvalue {min:e}")));
        }
        Ok(DensityOperator { matrix, dims })
    }

    /// `|ψ⟩⟨ψ|` after normalizing `psi`.
    pub fn pure(psi: &DVector<C64>, dims: Vec<usize>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(VerifyError::NotDensity("zero vector".into()));
        }
        Self::new(projector(&(psi / c(norm, 0.0))), dims)
    }

    pub(crate) fn from_parts_unchecked(matrix: CMat, dims: Vec<usize>) -> Self {
        DensityOperator { matrix, dims }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Keeps the listed factors in their original order.
    pub fn reduce(&self, keep: &[usize]) -> DensityOperator {
        DensityOperator {
            matrix: partial_trace(&self.matrix, &self.dims, keep),
            dims: keep.iter().map(|&i| self.dims[i]).collect(),
        }
    }

    /// Splits into (first factor, everything else) for conditional entropies.
    pub fn first_and_rest(&self) -> (usize, usize) {
        let a = self.dims[0];
        (a, self.dims[1..].iter().product())
    }
}

/// `(1/√d) Σ |ii⟩` as a density operator on `d × d`.
pub fn max_entangled(d: usize) -> Result<DensityOperator> {
    if d < 2 {
        return Err(VerifyError::InvalidParameter(format!("dimension {d} < 2")));
    }
    let mut psi = DVector::zeros(d * d);
    for i in 0..d {
        psi[i * d + i] = c(1.0, 0.0);
    }
    DensityOperator::pure(&psi, vec![d, d])
}

/// Haar-random pure state via a normalized complex Gaussian vector.
pub fn random_pure_state<R: Rng>(rng: &mut R, dims: Vec<usize>) -> Result<DensityOperator> {
    let side: usize = dims.iter().product();
    let psi = DVector::from_fn(side, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    DensityOperator::pure(&psi, dims)
}
