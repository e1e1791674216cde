//! Soft scalars and soft vectors over a finite parameter set.
//!
//! Every soft object stores exactly one value per parameter label, in the
//! order fixed by its [`ParameterSet`]. Comparisons between soft reals are
//! pointwise and therefore only a partial order.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Result, SoftError};

/// Tolerances for floating comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Absolute threshold used when comparing against zero.
    pub abs: f64,
    /// Relative threshold used otherwise.
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-10, rel: 1e-10 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    pub fn approx_eq(&self, a: f64, b: f64) -> bool {
        let diff = (a - b).abs();
        diff <= self.abs || diff <= self.rel * a.abs().max(b.abs())
    }

    pub fn is_zero(&self, a: f64) -> bool {
        a.abs() <= self.abs
    }
}

/// The finite, ordered set of parameter labels underlying every soft object.
#[derive(Clone)]
pub struct ParameterSet {
    labels: Arc<[String]>,
}

impl ParameterSet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(SoftError::InvalidParameterSet("parameter set must be non-empty".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(SoftError::InvalidParameterSet(format!(
                    "duplicate parameter label `{l}`"
                )));
            }
        }
        Ok(ParameterSet { labels: labels.into() })
    }

    /// Convenience constructor for `n` labels `p0, p1, ...`.
    pub fn indexed(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| format!("p{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn ensure_same(&self, other: &ParameterSet) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(SoftError::ParameterMismatch {
                left: self.labels.to_vec(),
                right: other.labels.to_vec(),
            })
        }
    }
}

impl PartialEq for ParameterSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.labels, &other.labels) || self.labels == other.labels
    }
}

impl Eq for ParameterSet {}

impl fmt::Debug for ParameterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.labels.iter()).finish()
    }
}

/// A real number per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftReal {
    params: ParameterSet,
    values: Vec<f64>,
}

impl SoftReal {
    pub fn new(params: ParameterSet, values: Vec<f64>) -> Result<Self> {
        if values.len() != params.len() {
            return Err(SoftError::DimensionMismatch {
                what: "soft real values",
                expected: params.len(),
                found: values.len(),
            });
        }
        Ok(SoftReal { params, values })
    }

    pub fn constant(params: &ParameterSet, value: f64) -> Self {
        SoftReal {
            values: vec![value; params.len()],
            params: params.clone(),
        }
    }

    pub fn from_fn(params: &ParameterSet, f: impl FnMut(usize) -> f64) -> Self {
        SoftReal {
            values: (0..params.len()).map(f).collect(),
            params: params.clone(),
        }
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SoftReal {
        SoftReal {
            params: self.params.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &SoftReal, f: impl Fn(f64, f64) -> f64) -> Result<SoftReal> {
        self.params.ensure_same(&other.params)?;
        Ok(SoftReal {
            params: self.params.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    fn all_pairs(&self, other: &SoftReal, pred: impl Fn(f64, f64) -> bool) -> Result<bool> {
        self.params.ensure_same(&other.params)?;
        Ok(self.values.iter().zip(&other.values).all(|(&a, &b)| pred(a, b)))
    }

    /// `self(λ) ≤ other(λ)` for every parameter.
    pub fn soft_le(&self, other: &SoftReal) -> Result<bool> {
        self.all_pairs(other, |a, b| a <= b)
    }

    pub fn soft_lt(&self, other: &SoftReal) -> Result<bool> {
        self.all_pairs(other, |a, b| a < b)
    }

    pub fn soft_ge(&self, other: &SoftReal) -> Result<bool> {
        self.all_pairs(other, |a, b| a >= b)
    }

    pub fn soft_gt(&self, other: &SoftReal) -> Result<bool> {
        self.all_pairs(other, |a, b| a > b)
    }

    /// Pointwise equality within `tol`.
    pub fn approx_eq(&self, other: &SoftReal, tol: Tolerance) -> Result<bool> {
        self.all_pairs(other, |a, b| tol.approx_eq(a, b))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.params
            .labels()
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().copied())
    }
}

/// A complex number per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftComplex {
    params: ParameterSet,
    values: Vec<Complex64>,
}

impl SoftComplex {
    pub fn new(params: ParameterSet, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != params.len() {
            return Err(SoftError::DimensionMismatch {
                what: "soft complex values",
                expected: params.len(),
                found: values.len(),
            });
        }
        Ok(SoftComplex { params, values })
    }

    pub fn constant(params: &ParameterSet, value: Complex64) -> Self {
        SoftComplex {
            values: vec![value; params.len()],
            params: params.clone(),
        }
    }

    pub fn from_real(r: &SoftReal) -> Self {
        SoftComplex {
            params: r.params.clone(),
            values: r.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, idx: usize) -> Complex64 {
        self.values[idx]
    }

    pub fn re(&self) -> SoftReal {
        SoftReal {
            params: self.params.clone(),
            values: self.values.iter().map(|z| z.re).collect(),
        }
    }

    pub fn abs(&self) -> SoftReal {
        SoftReal {
            params: self.params.clone(),
            values: self.values.iter().map(|z| z.norm()).collect(),
        }
    }

    pub fn conj(&self) -> SoftComplex {
        SoftComplex {
            params: self.params.clone(),
            values: self.values.iter().map(|z| z.conj()).collect(),
        }
    }
}

/// A soft element of an absolute soft vector space over `C^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftVector {
    params: ParameterSet,
    dim: usize,
    values: Vec<DVector<Complex64>>,
}

impl SoftVector {
    pub fn new(params: ParameterSet, dim: usize, values: Vec<DVector<Complex64>>) -> Result<Self> {
        if dim == 0 {
            return Err(SoftError::Precondition("soft vector dimension must be positive".into()));
        }
        if values.len() != params.len() {
            return Err(SoftError::DimensionMismatch {
                what: "soft vector parameter values",
                expected: params.len(),
                found: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| v.len() != dim) {
            return Err(SoftError::DimensionMismatch {
                what: "soft vector length",
                expected: dim,
                found: v.len(),
            });
        }
        Ok(SoftVector { params, dim, values })
    }

    /// The same vector for every parameter.
    pub fn constant(params: &ParameterSet, v: DVector<Complex64>) -> Self {
        SoftVector {
            dim: v.len(),
            values: vec![v; params.len()],
            params: params.clone(),
        }
    }

    /// Embeds a real vector, constant over parameters.
    pub fn constant_real(params: &ParameterSet, v: &[f64]) -> Self {
        Self::constant(
            params,
            DVector::from_iterator(v.len(), v.iter().map(|&x| Complex64::new(x, 0.0))),
        )
    }

    /// Θ, the null soft vector.
    pub fn null(params: &ParameterSet, dim: usize) -> Self {
        Self::constant(params, DVector::zeros(dim))
    }

    /// Canonical basis vector `e_k` (zero-based), constant over parameters.
    pub fn basis(params: &ParameterSet, dim: usize, k: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[k] = Complex64::new(1.0, 0.0);
        Self::constant(params, v)
    }

    pub fn from_fn(params: &ParameterSet, dim: usize, mut f: impl FnMut(usize) -> DVector<Complex64>) -> Result<Self> {
        let values = (0..params.len()).map(&mut f).collect();
        Self::new(params.clone(), dim, values)
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[DVector<Complex64>] {
        &self.values
    }

    pub fn at(&self, idx: usize) -> &DVector<Complex64> {
        &self.values[idx]
    }

    pub(crate) fn from_parts_unchecked(params: ParameterSet, dim: usize, values: Vec<DVector<Complex64>>) -> Self {
        debug_assert!(values.iter().all(|v| v.len() == dim));
        SoftVector { params, dim, values }
    }

    pub fn ensure_compatible(&self, other: &SoftVector) -> Result<()> {
        self.params.ensure_same(&other.params)?;
        if self.dim != other.dim {
            return Err(SoftError::DimensionMismatch {
                what: "soft vector dimension",
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &SoftVector) -> Result<SoftVector> {
        self.ensure_compatible(other)?;
        Ok(self.zip_map(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &SoftVector) -> Result<SoftVector> {
        self.ensure_compatible(other)?;
        Ok(self.zip_map(other, |a, b| a - b))
    }

    /// Pointwise product with a soft scalar.
    pub fn scale(&self, alpha: &SoftComplex) -> Result<SoftVector> {
        self.params.ensure_same(alpha.params())?;
        Ok(SoftVector {
            params: self.params.clone(),
            dim: self.dim,
            values: self.values.iter().zip(alpha.values()).map(|(v, &a)| v * a).collect(),
        })
    }

    pub fn scale_real(&self, alpha: &SoftReal) -> Result<SoftVector> {
        self.scale(&SoftComplex::from_real(alpha))
    }

    fn zip_map(
        &self,
        other: &SoftVector,
        f: impl Fn(&DVector<Complex64>, &DVector<Complex64>) -> DVector<Complex64>,
    ) -> SoftVector {
        SoftVector {
            params: self.params.clone(),
            dim: self.dim,
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect(),
        }
    }

    /// `⟨self, other⟩(λ)`, linear in the first slot.
    pub fn inner(&self, other: &SoftVector) -> Result<SoftComplex> {
        soft_inner_product(self, other)
    }

    pub fn norm(&self) -> SoftReal {
        soft_norm(self)
    }

    /// Largest per-parameter Euclidean norm.
    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Standard inner product of complex vectors, linear in `x` and
/// conjugate-linear in `y`.
pub(crate) fn cdot(x: &DVector<Complex64>, y: &DVector<Complex64>) -> Complex64 {
    // nalgebra's `dotc` conjugates its receiver.
    y.dotc(x)
}

pub fn soft_inner_product(x: &SoftVector, y: &SoftVector) -> Result<SoftComplex> {
    x.ensure_compatible(y)?;
    Ok(SoftComplex {
        params: x.params.clone(),
        values: x.values.iter().zip(&y.values).map(|(a, b)| cdot(a, b)).collect(),
    })
}

pub fn soft_norm(x: &SoftVector) -> SoftReal {
    SoftReal {
        params: x.params.clone(),
        values: x.values.iter().map(|v| v.norm()).collect(),
    }
}

/// A soft element of the direct sum `⊕_j V_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectSumSoftVector {
    params: ParameterSet,
    block_dims: Vec<usize>,
    /// Indexed `[λ][j]`.
    values: Vec<Vec<DVector<Complex64>>>,
}

impl DirectSumSoftVector {
    pub fn new(params: ParameterSet, block_dims: Vec<usize>, values: Vec<Vec<DVector<Complex64>>>) -> Result<Self> {
        if values.len() != params.len() {
            return Err(SoftError::DimensionMismatch {
                what: "direct-sum parameter values",
                expected: params.len(),
                found: values.len(),
            });
        }
        for blocks in &values {
            if blocks.len() != block_dims.len() {
                return Err(SoftError::BlockMismatch(format!(
                    "expected {} blocks, found {}",
                    block_dims.len(),
                    blocks.len()
                )));
            }
            for (j, (b, &d)) in blocks.iter().zip(&block_dims).enumerate() {
                if b.len() != d {
                    return Err(SoftError::BlockMismatch(format!(
                        "block {j} has length {}, expected {d}",
                        b.len()
                    )));
                }
            }
        }
        Ok(DirectSumSoftVector {
            params,
            block_dims,
            values,
        })
    }

    pub fn zeros(params: &ParameterSet, block_dims: &[usize]) -> Self {
        let blocks: Vec<_> = block_dims.iter().map(|&d| DVector::zeros(d)).collect();
        DirectSumSoftVector {
            params: params.clone(),
            block_dims: block_dims.to_vec(),
            values: vec![blocks; params.len()],
        }
    }

    /// Builds a direct-sum vector from one soft vector per block.
    pub fn from_blocks(blocks: &[SoftVector]) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| SoftError::BlockMismatch("at least one block required".into()))?;
        let params = first.params().clone();
        for b in blocks {
            params.ensure_same(b.params())?;
        }
        let block_dims = blocks.iter().map(SoftVector::dim).collect();
        let values = (0..params.len())
            .map(|l| blocks.iter().map(|b| b.at(l).clone()).collect())
            .collect();
        Ok(DirectSumSoftVector {
            params,
            block_dims,
            values,
        })
    }

    pub(crate) fn from_parts_unchecked(
        params: ParameterSet,
        block_dims: Vec<usize>,
        values: Vec<Vec<DVector<Complex64>>>,
    ) -> Self {
        DirectSumSoftVector {
            params,
            block_dims,
            values,
        }
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn at(&self, idx: usize) -> &[DVector<Complex64>] {
        &self.values[idx]
    }

    /// Block `j` as a soft vector.
    pub fn block(&self, j: usize) -> SoftVector {
        SoftVector {
            params: self.params.clone(),
            dim: self.block_dims[j],
            values: self.values.iter().map(|b| b[j].clone()).collect(),
        }
    }

    pub fn ensure_compatible(&self, other: &DirectSumSoftVector) -> Result<()> {
        self.params.ensure_same(&other.params)?;
        if self.block_dims != other.block_dims {
            return Err(SoftError::BlockMismatch(format!(
                "block structure {:?} vs {:?}",
                self.block_dims, other.block_dims
            )));
        }
        Ok(())
    }

    pub fn inner(&self, other: &DirectSumSoftVector) -> Result<SoftComplex> {
        direct_sum_inner_product(self, other)
    }
}

/// `⟨f, g⟩(λ) = Σ_j ⟨f_j(λ), g_j(λ)⟩`, summed in increasing `j`.
pub fn direct_sum_inner_product(f: &DirectSumSoftVector, g: &DirectSumSoftVector) -> Result<SoftComplex> {
    f.ensure_compatible(g)?;
    let values = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(fb, gb)| {
            fb.iter()
                .zip(gb)
                .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + cdot(a, b))
        })
        .collect();
    Ok(SoftComplex {
        params: f.params.clone(),
        values,
    })
}
