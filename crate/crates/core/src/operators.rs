//! Soft linear operators: one dense complex matrix per parameter.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Result, SoftError};
use crate::par::Execution;
use crate::soft_core::{ParameterSet, SoftComplex, SoftReal, SoftVector};

/// Absolute Hermitian-defect threshold (scaled by the largest entry when
/// that exceeds one).
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Relative eigenvalue floor below which an operator is treated as singular.
pub const PD_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SoftOperator {
    params: ParameterSet,
    rows: usize,
    cols: usize,
    values: Vec<DMatrix<Complex64>>,
}

/// Per-parameter spectral extremes of a Hermitian soft operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBoundsReport {
    pub min_eig: SoftReal,
    pub max_eig: SoftReal,
    /// `max/min`, or `+inf` where the minimum is not positive.
    pub condition: SoftReal,
}

impl SoftOperator {
    pub fn new(params: ParameterSet, rows: usize, cols: usize, values: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if values.len() != params.len() {
            return Err(SoftError::DimensionMismatch {
                what: "soft operator parameter values",
                expected: params.len(),
                found: values.len(),
            });
        }
        for m in &values {
            if m.nrows() != rows {
                return Err(SoftError::DimensionMismatch {
                    what: "soft operator rows",
                    expected: rows,
                    found: m.nrows(),
                });
            }
            if m.ncols() != cols {
                return Err(SoftError::DimensionMismatch {
                    what: "soft operator columns",
                    expected: cols,
                    found: m.ncols(),
                });
            }
        }
        Ok(SoftOperator {
            params,
            rows,
            cols,
            values,
        })
    }

    pub fn constant(params: &ParameterSet, m: DMatrix<Complex64>) -> Self {
        SoftOperator {
            rows: m.nrows(),
            cols: m.ncols(),
            values: vec![m; params.len()],
            params: params.clone(),
        }
    }

    pub fn constant_real(params: &ParameterSet, rows: usize, cols: usize, row_major: &[f64]) -> Self {
        assert_eq!(row_major.len(), rows * cols, "row-major data has wrong length");
        Self::constant(
            params,
            DMatrix::from_row_iterator(rows, cols, row_major.iter().map(|&x| Complex64::new(x, 0.0))),
        )
    }

    pub fn from_fn(
        params: &ParameterSet,
        rows: usize,
        cols: usize,
        f: impl FnMut(usize) -> DMatrix<Complex64>,
    ) -> Result<Self> {
        Self::new(params.clone(), rows, cols, (0..params.len()).map(f).collect())
    }

    pub fn identity(params: &ParameterSet, n: usize) -> Self {
        Self::constant(params, DMatrix::identity(n, n))
    }

    pub fn zeros(params: &ParameterSet, rows: usize, cols: usize) -> Self {
        Self::constant(params, DMatrix::zeros(rows, cols))
    }

    /// `diag(d(λ))` for a soft real per diagonal entry.
    pub fn diagonal_real(params: &ParameterSet, diag: &[f64]) -> Self {
        Self::constant(
            params,
            DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                diag.len(),
                diag.iter().map(|&x| Complex64::new(x, 0.0)),
            )),
        )
    }

    pub(crate) fn from_parts_unchecked(
        params: ParameterSet,
        rows: usize,
        cols: usize,
        values: Vec<DMatrix<Complex64>>,
    ) -> Self {
        SoftOperator {
            params,
            rows,
            cols,
            values,
        }
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[DMatrix<Complex64>] {
        &self.values
    }

    pub fn at(&self, idx: usize) -> &DMatrix<Complex64> {
        &self.values[idx]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn shape_error(what: &'static str, expected: usize, found: usize) -> SoftError {
        SoftError::DimensionMismatch { what, expected, found }
    }

    fn map(&self, f: impl Fn(&DMatrix<Complex64>) -> DMatrix<Complex64>) -> SoftOperator {
        let values: Vec<_> = self.values.iter().map(f).collect();
        let (rows, cols) = values
            .first()
            .map(|m| (m.nrows(), m.ncols()))
            .unwrap_or((self.rows, self.cols));
        SoftOperator {
            params: self.params.clone(),
            rows,
            cols,
            values,
        }
    }

    /// `result(λ) = op(λ) · x(λ)`.
    pub fn apply(&self, x: &SoftVector) -> Result<SoftVector> {
        self.params.ensure_same(x.params())?;
        if x.dim() != self.cols {
            return Err(Self::shape_error("operator input dimension", self.cols, x.dim()));
        }
        Ok(SoftVector::from_parts_unchecked(
            self.params.clone(),
            self.rows,
            self.values.iter().zip(x.values()).map(|(m, v)| m * v).collect(),
        ))
    }

    /// Conjugate transpose per parameter.
    pub fn adjoint(&self) -> SoftOperator {
        self.map(|m| m.adjoint())
    }

    /// `result(λ) = self(λ) · rhs(λ)`.
    pub fn compose(&self, rhs: &SoftOperator) -> Result<SoftOperator> {
        self.params.ensure_same(&rhs.params)?;
        if self.cols != rhs.rows {
            return Err(Self::shape_error("composition inner dimension", self.cols, rhs.rows));
        }
        Ok(SoftOperator {
            params: self.params.clone(),
            rows: self.rows,
            cols: rhs.cols,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn add(&self, rhs: &SoftOperator) -> Result<SoftOperator> {
        self.params.ensure_same(&rhs.params)?;
        if self.rows != rhs.rows {
            return Err(Self::shape_error("operator rows", self.rows, rhs.rows));
        }
        if self.cols != rhs.cols {
            return Err(Self::shape_error("operator columns", self.cols, rhs.cols));
        }
        Ok(SoftOperator {
            params: self.params.clone(),
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, rhs: &SoftOperator) -> Result<SoftOperator> {
        self.add(&rhs.scale_real(&SoftReal::constant(&self.params, -1.0))?)
    }

    /// Pointwise product with a soft scalar.
    pub fn scale(&self, alpha: &SoftComplex) -> Result<SoftOperator> {
        self.params.ensure_same(alpha.params())?;
        Ok(SoftOperator {
            params: self.params.clone(),
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().zip(alpha.values()).map(|(m, &a)| m * a).collect(),
        })
    }

    pub fn scale_real(&self, alpha: &SoftReal) -> Result<SoftOperator> {
        self.scale(&SoftComplex::from_real(alpha))
    }

    /// Largest absolute entry difference across all parameters.
    pub fn max_abs_diff(&self, other: &SoftOperator) -> Result<f64> {
        self.params.ensure_same(&other.params)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Self::shape_error(
                "operator size",
                self.rows * self.cols,
                other.rows * other.cols,
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| max_abs(&(a - b)))
            .fold(0.0, f64::max))
    }

    /// Hermitian defect per parameter, `max |op - op*|`.
    pub fn hermitian_defect(&self) -> Vec<f64> {
        self.values.iter().map(|m| max_abs(&(m - m.adjoint()))).collect()
    }

    fn ensure_hermitian(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Self::shape_error("square operator", self.rows, self.cols));
        }
        for (idx, (m, defect)) in self.values.iter().zip(self.hermitian_defect()).enumerate() {
            if defect > HERMITIAN_TOL * max_abs(m).max(1.0) {
                return Err(SoftError::NotHermitian {
                    label: self.params.label(idx).to_string(),
                    defect,
                });
            }
        }
        Ok(())
    }

    /// Extreme eigenvalues of a Hermitian operator per parameter.
    pub fn hermitian_eig_extremes(&self) -> Result<SpectralBoundsReport> {
        self.hermitian_eig_extremes_with(Execution::default())
    }

    pub fn hermitian_eig_extremes_with(&self, exec: Execution) -> Result<SpectralBoundsReport> {
        self.ensure_hermitian()?;
        let extremes = exec.map(self.values.len(), |i| hermitian_extremes(&self.values[i]));
        let min_eig = SoftReal::from_fn(&self.params, |i| extremes[i].0);
        let max_eig = SoftReal::from_fn(&self.params, |i| extremes[i].1);
        let condition = SoftReal::from_fn(&self.params, |i| {
            let (lo, hi) = extremes[i];
            if lo > 0.0 {
                hi / lo
            } else {
                f64::INFINITY
            }
        });
        Ok(SpectralBoundsReport {
            min_eig,
            max_eig,
            condition,
        })
    }

    fn ensure_hpd(&self) -> Result<()> {
        self.ensure_hermitian()?;
        for (idx, m) in self.values.iter().enumerate() {
            let (lo, hi) = hermitian_extremes(m);
            // written so that NaN extremes are rejected too
            let positive = lo > PD_EPS * hi && hi > 0.0;
            if !positive {
                return Err(SoftError::NotPositiveDefinite {
                    label: self.params.label(idx).to_string(),
                });
            }
        }
        Ok(())
    }

    fn cholesky_at(&self, idx: usize) -> Result<Cholesky<Complex64, nalgebra::Dyn>> {
        Cholesky::new(symmetrize(&self.values[idx])).ok_or_else(|| SoftError::NotPositiveDefinite {
            label: self.params.label(idx).to_string(),
        })
    }

    /// Solves `op(λ) x(λ) = rhs(λ)` for Hermitian positive definite `op`.
    pub fn solve_hpd(&self, rhs: &SoftVector) -> Result<SoftVector> {
        self.params.ensure_same(rhs.params())?;
        if rhs.dim() != self.rows {
            return Err(Self::shape_error("right-hand side dimension", self.rows, rhs.dim()));
        }
        self.ensure_hpd()?;
        let values = (0..self.values.len())
            .map(|i| {
                let m = &self.values[i];
                if is_diagonal(m) {
                    return Ok(rhs.at(i).zip_map(&m.diagonal(), |x, d| x / d.re));
                }
                Ok(self.cholesky_at(i)?.solve(rhs.at(i)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SoftVector::from_parts_unchecked(self.params.clone(), self.rows, values))
    }

    /// Dense inverse of a Hermitian positive definite operator, returned
    /// exactly Hermitian.
    pub fn invert_hpd(&self) -> Result<SoftOperator> {
        self.ensure_hpd()?;
        let values = (0..self.values.len())
            .map(|i| {
                let m = &self.values[i];
                if is_diagonal(m) {
                    return Ok(DMatrix::from_diagonal(
                        &m.diagonal().map(|d| Complex64::new(1.0 / d.re, 0.0)),
                    ));
                }
                Ok(symmetrize(&self.cholesky_at(i)?.inverse()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SoftOperator {
            params: self.params.clone(),
            rows: self.rows,
            cols: self.cols,
            values,
        })
    }

    /// Largest singular value per parameter.
    pub fn operator_norm_upper(&self) -> SoftReal {
        SoftReal::from_fn(&self.params, |i| spectral_norm(&self.values[i]))
    }
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `(m + m*) / 2`.
pub(crate) fn symmetrize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Diagonal matrices take exact elementwise paths.
fn is_diagonal(m: &DMatrix<Complex64>) -> bool {
    m.iter()
        .enumerate()
        .all(|(k, z)| k % m.nrows() == k / m.nrows() || *z == Complex64::new(0.0, 0.0))
}

/// All eigenvalues of the symmetrized matrix, ascending.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut eigs: Vec<f64> = if is_diagonal(m) {
        m.diagonal().iter().map(|z| z.re).collect()
    } else {
        SymmetricEigen::new(symmetrize(m)).eigenvalues.iter().copied().collect()
    };
    eigs.sort_by(f64::total_cmp);
    eigs
}

pub(crate) fn hermitian_extremes(m: &DMatrix<Complex64>) -> (f64, f64) {
    let eigs = hermitian_eigenvalues(m);
    (eigs[0], eigs[eigs.len() - 1])
}

pub(crate) fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ab() -> ParameterSet {
        ParameterSet::new(["a", "b"]).unwrap()
    }

    #[test]
    fn apply_examples() {
        let p = ab();
        let x = SoftVector::constant_real(&p, &[1.0, 2.0]);
        assert_eq!(SoftOperator::identity(&p, 2).apply(&x).unwrap(), x);
        let swap = SoftOperator::constant_real(&p, 2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(swap.apply(&x).unwrap(), SoftVector::constant_real(&p, &[2.0, 1.0]));
        assert_eq!(
            SoftOperator::zeros(&p, 3, 2).apply(&x).unwrap(),
            SoftVector::null(&p, 3)
        );
        assert!(SoftOperator::zeros(&p, 3, 3).apply(&x).is_err());
    }

    #[test]
    fn adjoint_examples() {
        let p = ab();
        let op = SoftOperator::from_fn(&p, 2, 3, |i| {
            DMatrix::from_fn(2, 3, |r, k| c(r as f64 + i as f64, k as f64 - 1.0))
        })
        .unwrap();
        assert_eq!(op.adjoint().adjoint(), op);
        let d = SoftOperator::diagonal_real(&p, &[2.0, -1.0]);
        assert_eq!(d.adjoint(), d);
        let row = SoftOperator::constant(&p, DMatrix::from_row_slice(1, 2, &[c(0.0, 0.0), c(0.0, 1.0)]));
        let adj = row.adjoint();
        assert_eq!((adj.rows(), adj.cols()), (2, 1));
        assert_eq!(adj.at(0)[(0, 0)], c(0.0, 0.0));
        assert_eq!(adj.at(1)[(1, 0)], c(0.0, -1.0));
    }

    #[test]
    fn compose_scale_examples() {
        let p = ab();
        let op = SoftOperator::constant_real(&p, 2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(op.compose(&SoftOperator::identity(&p, 2)).unwrap(), op);
        let alpha = SoftComplex::new(p.clone(), vec![c(2.0, 1.0), c(-1.0, 0.0)]).unwrap();
        let x = SoftVector::constant_real(&p, &[1.0, -1.0]);
        let lhs = op.scale(&alpha).unwrap().apply(&x).unwrap();
        let rhs = op.apply(&x).unwrap().scale(&alpha).unwrap();
        assert_eq!(lhs, rhs);
        let gram = op.adjoint().compose(&op).unwrap();
        let rep = gram.hermitian_eig_extremes().unwrap();
        assert!(rep.min_eig.values().iter().all(|&v| v >= -1e-12));
        assert!(op.compose(&SoftOperator::zeros(&p, 3, 3)).is_err());
    }

    #[test]
    fn eig_extremes_examples() {
        let p = ab();
        let rep = SoftOperator::identity(&p, 3).hermitian_eig_extremes().unwrap();
        assert_eq!(rep.min_eig.values(), &[1.0, 1.0]);
        assert_eq!(rep.max_eig.values(), &[1.0, 1.0]);
        let rep = SoftOperator::diagonal_real(&p, &[2.0, 1.0])
            .hermitian_eig_extremes()
            .unwrap();
        assert_eq!(rep.min_eig.values(), &[1.0, 1.0]);
        assert_eq!(rep.max_eig.values(), &[2.0, 2.0]);
        assert_eq!(rep.condition.values(), &[2.0, 2.0]);
        let scaled = SoftOperator::from_fn(&p, 2, 2, |i| {
            DMatrix::identity(2, 2) * c(if i == 1 { 4.0 } else { 1.0 }, 0.0)
        })
        .unwrap();
        let rep = scaled.hermitian_eig_extremes().unwrap();
        assert_eq!(rep.min_eig.get(1), 4.0);
        assert_eq!(rep.max_eig.get(1), 4.0);
    }

    #[test]
    fn eig_extremes_non_diagonal() {
        let p = ab();
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let m = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let rep = SoftOperator::constant(&p, m).hermitian_eig_extremes().unwrap();
        assert!((rep.min_eig.get(0) - 1.0).abs() < 1e-14);
        assert!((rep.max_eig.get(0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eig_extremes_rejects_non_hermitian() {
        let p = ab();
        let op = SoftOperator::constant_real(&p, 2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            op.hermitian_eig_extremes(),
            Err(SoftError::NotHermitian { .. })
        ));
    }

    #[test]
    fn solve_and_invert_examples() {
        let p = ab();
        let x = SoftVector::constant_real(&p, &[2.0, 3.0]);
        assert_eq!(SoftOperator::identity(&p, 2).solve_hpd(&x).unwrap(), x);
        let d = SoftOperator::diagonal_real(&p, &[2.0, 1.0]);
        let sol = d.solve_hpd(&x).unwrap();
        for v in sol.values() {
            assert!((v - DVector::from_vec(vec![c(1.0, 0.0), c(3.0, 0.0)])).norm() < 1e-15);
        }
        let inv = d.invert_hpd().unwrap();
        assert_eq!(inv, SoftOperator::diagonal_real(&p, &[0.5, 1.0]));
    }

    #[test]
    fn solve_rejects_singular_and_names_parameter() {
        let p = ab();
        let op = SoftOperator::from_fn(&p, 2, 2, |i| {
            DMatrix::from_diagonal(&DVector::from_vec(vec![
                c(1.0, 0.0),
                c(if i == 1 { 0.0 } else { 1.0 }, 0.0),
            ]))
        })
        .unwrap();
        match op.invert_hpd() {
            Err(SoftError::NotPositiveDefinite { label }) => assert_eq!(label, "b"),
            other => panic!("unexpected {other:?}"),
        }
        let indefinite = SoftOperator::diagonal_real(&p, &[1.0, -1.0]);
        assert!(indefinite.solve_hpd(&SoftVector::null(&p, 2)).is_err());
    }

    #[test]
    fn operator_norm_examples() {
        let p = ab();
        assert_eq!(
            SoftOperator::identity(&p, 3).operator_norm_upper().values(),
            &[1.0, 1.0]
        );
        let d = SoftOperator::diagonal_real(&p, &[3.0, 4.0]).operator_norm_upper();
        assert!(d.values().iter().all(|&v| (v - 4.0).abs() < 1e-14));
        assert_eq!(
            SoftOperator::zeros(&p, 2, 3).operator_norm_upper().values(),
            &[0.0, 0.0]
        );
    }
}
