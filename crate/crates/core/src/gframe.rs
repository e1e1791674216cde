//! Soft g-frames: analysis and synthesis operators, the frame operator,
//! optimal soft bounds, tightness and exactness.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, SoftError};
use crate::operators::{hermitian_extremes, SoftOperator};
use crate::par::Execution;
use crate::soft_core::{DirectSumSoftVector, ParameterSet, SoftReal, SoftVector};

/// Default relative threshold for the frame predicate and tightness.
pub const DEFAULT_FRAME_TOL: f64 = 1e-10;

/// A family of soft operators `Λ_j : C^n → C^{d_j}` over one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftGFrame {
    params: ParameterSet,
    ambient_dim: usize,
    blocks: Vec<SoftOperator>,
}

/// Optimal soft bounds of a g-frame together with the frame and tightness
/// verdicts they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBoundsCertificate {
    pub lower: SoftReal,
    pub upper: SoftReal,
    pub is_frame: bool,
    pub is_tight: bool,
}

impl FrameBoundsCertificate {
    /// `upper/lower` per parameter (`+inf` where the lower bound vanishes).
    pub fn condition(&self) -> SoftReal {
        self.upper
            .zip_with(&self.lower, |u, l| if l > 0.0 { u / l } else { f64::INFINITY })
            .expect("bounds share parameters")
    }

    /// Labels where the frame predicate fails at `tol`.
    pub fn failing_labels(&self, tol: f64) -> Vec<String> {
        self.lower
            .iter()
            .zip(self.upper.values())
            .filter(|((_, lo), &hi)| !frame_predicate(*lo, hi, tol))
            .map(|((l, _), _)| l.to_string())
            .collect()
    }
}

fn frame_predicate(lower: f64, upper: f64, tol: f64) -> bool {
    upper > 0.0 && lower > tol * upper
}

impl SoftGFrame {
    pub fn new(params: ParameterSet, ambient_dim: usize, blocks: Vec<SoftOperator>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(SoftError::Precondition("a g-frame needs at least one block".into()));
        }
        if ambient_dim == 0 {
            return Err(SoftError::Precondition("ambient dimension must be positive".into()));
        }
        for b in &blocks {
            params.ensure_same(b.params())?;
            if b.cols() != ambient_dim {
                return Err(SoftError::DimensionMismatch {
                    what: "block columns (ambient dimension)",
                    expected: ambient_dim,
                    found: b.cols(),
                });
            }
            if b.rows() == 0 {
                return Err(SoftError::Precondition("block with zero rows".into()));
            }
        }
        Ok(SoftGFrame {
            params,
            ambient_dim,
            blocks,
        })
    }

    /// The g-frame induced by a vector family: block `j` is `f ↦ ⟨f, f_j⟩`.
    pub fn induced_from_vectors(vectors: &[SoftVector]) -> Result<Self> {
        let first = vectors
            .first()
            .ok_or_else(|| SoftError::Precondition("empty vector family".into()))?;
        let params = first.params().clone();
        let n = first.dim();
        let blocks = vectors
            .iter()
            .map(|v| {
                first.ensure_compatible(v)?;
                Ok(SoftOperator::from_parts_unchecked(
                    params.clone(),
                    1,
                    n,
                    v.values()
                        .iter()
                        .map(|x| DMatrix::from_row_slice(1, n, x.adjoint().as_slice()))
                        .collect(),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(params, n, blocks)
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn blocks(&self) -> &[SoftOperator] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(SoftOperator::rows).collect()
    }

    /// Replaces every block `Λ_j` by `Λ_j ∘ op`.
    pub fn compose_right(&self, op: &SoftOperator) -> Result<SoftGFrame> {
        let blocks = self.blocks.iter().map(|b| b.compose(op)).collect::<Result<Vec<_>>>()?;
        SoftGFrame::new(self.params.clone(), op.cols(), blocks)
    }

    /// Copy of the frame with block `j` removed, or `None` if it is the last
    /// block.
    pub fn without(&self, j: usize) -> Option<SoftGFrame> {
        if self.blocks.len() <= 1 {
            return None;
        }
        let mut blocks = self.blocks.clone();
        blocks.remove(j);
        Some(SoftGFrame {
            params: self.params.clone(),
            ambient_dim: self.ambient_dim,
            blocks,
        })
    }

    fn check_vector(&self, f: &SoftVector) -> Result<()> {
        self.params.ensure_same(f.params())?;
        if f.dim() != self.ambient_dim {
            return Err(SoftError::DimensionMismatch {
                what: "vector dimension (ambient)",
                expected: self.ambient_dim,
                found: f.dim(),
            });
        }
        Ok(())
    }

    /// `T*f = {Λ_j f}`.
    pub fn analysis(&self, f: &SoftVector) -> Result<DirectSumSoftVector> {
        self.check_vector(f)?;
        let values = (0..self.params.len())
            .map(|l| self.blocks.iter().map(|b| b.at(l) * f.at(l)).collect())
            .collect();
        Ok(DirectSumSoftVector::from_parts_unchecked(
            self.params.clone(),
            self.block_dims(),
            values,
        ))
    }

    /// `T{g_j} = Σ_j Λ_j* g_j`, summed in increasing `j`.
    pub fn synthesis(&self, g: &DirectSumSoftVector) -> Result<SoftVector> {
        self.params.ensure_same(g.params())?;
        if g.block_dims() != self.block_dims().as_slice() {
            return Err(SoftError::BlockMismatch(format!(
                "frame blocks {:?} vs vector blocks {:?}",
                self.block_dims(),
                g.block_dims()
            )));
        }
        let values = (0..self.params.len())
            .map(|l| {
                let mut acc = nalgebra::DVector::zeros(self.ambient_dim);
                for (b, gj) in self.blocks.iter().zip(g.at(l)) {
                    acc += b.at(l).ad_mul(gj);
                }
                acc
            })
            .collect();
        Ok(SoftVector::from_parts_unchecked(
            self.params.clone(),
            self.ambient_dim,
            values,
        ))
    }

    /// The synthesis operator at parameter `l` as a dense `n × Σd_j` matrix.
    pub fn synthesis_matrix(&self, l: usize) -> DMatrix<Complex64> {
        let total: usize = self.block_dims().iter().sum();
        let mut m = DMatrix::zeros(self.ambient_dim, total);
        let mut offset = 0;
        for b in &self.blocks {
            let adj = b.at(l).adjoint();
            m.columns_mut(offset, b.rows()).copy_from(&adj);
            offset += b.rows();
        }
        m
    }

    /// The synthesis operator as a soft operator `⊕V_j → U`.
    pub fn synthesis_operator(&self) -> SoftOperator {
        let total: usize = self.block_dims().iter().sum();
        SoftOperator::from_parts_unchecked(
            self.params.clone(),
            self.ambient_dim,
            total,
            (0..self.params.len()).map(|l| self.synthesis_matrix(l)).collect(),
        )
    }

    /// `S = Σ_j Λ_j* Λ_j`.
    pub fn frame_operator(&self) -> SoftOperator {
        self.frame_operator_with(Execution::default())
    }

    pub fn frame_operator_with(&self, exec: Execution) -> SoftOperator {
        let values = exec.map(self.params.len(), |l| {
            frame_operator_at(&self.blocks, l, self.ambient_dim)
        });
        SoftOperator::from_parts_unchecked(self.params.clone(), self.ambient_dim, self.ambient_dim, values)
    }

    /// Optimal soft bounds: the per-parameter spectral extremes of `S`.
    pub fn frame_bounds(&self, tol: f64) -> FrameBoundsCertificate {
        self.frame_bounds_with(tol, Execution::default())
    }

    pub fn frame_bounds_with(&self, tol: f64, exec: Execution) -> FrameBoundsCertificate {
        let extremes = exec.map(self.params.len(), |l| {
            hermitian_extremes(&frame_operator_at(&self.blocks, l, self.ambient_dim))
        });
        certificate_from_extremes(&self.params, &extremes, tol)
    }

    /// Leave-one-out exactness test; entry `j` is true iff removing block `j`
    /// destroys the frame property.
    pub fn is_exact(&self, tol: f64) -> Result<Vec<bool>> {
        self.is_exact_with(tol, Execution::default())
    }

    pub fn is_exact_with(&self, tol: f64, exec: Execution) -> Result<Vec<bool>> {
        let cert = self.frame_bounds_with(tol, exec);
        if !cert.is_frame {
            return Err(SoftError::NotAFrame {
                labels: cert.failing_labels(tol),
            });
        }
        Ok(exec.map(self.blocks.len(), |j| match self.without(j) {
            None => true,
            Some(rest) => (0..self.params.len()).any(|l| {
                let (lo, hi) = hermitian_extremes(&frame_operator_at(&rest.blocks, l, self.ambient_dim));
                !frame_predicate(lo, hi, tol)
            }),
        }))
    }

    /// `Σ_j ‖Λ_j f‖²` per parameter.
    pub fn frame_energy(&self, f: &SoftVector) -> Result<SoftReal> {
        self.check_vector(f)?;
        Ok(SoftReal::from_fn(&self.params, |l| {
            self.blocks.iter().map(|b| (b.at(l) * f.at(l)).norm_squared()).sum()
        }))
    }
}

pub(crate) fn frame_operator_at(blocks: &[SoftOperator], l: usize, n: usize) -> DMatrix<Complex64> {
    let mut s = DMatrix::zeros(n, n);
    for b in blocks {
        let m = b.at(l);
        s += m.ad_mul(m);
    }
    s
}

pub(crate) fn certificate_from_extremes(
    params: &ParameterSet,
    extremes: &[(f64, f64)],
    tol: f64,
) -> FrameBoundsCertificate {
    let lower = SoftReal::from_fn(params, |l| extremes[l].0);
    let upper = SoftReal::from_fn(params, |l| extremes[l].1);
    let is_frame = extremes.iter().all(|&(lo, hi)| frame_predicate(lo, hi, tol));
    let is_tight = is_frame && extremes.iter().all(|&(lo, hi)| (hi - lo).abs() <= tol * hi);
    FrameBoundsCertificate {
        lower,
        upper,
        is_frame,
        is_tight,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn one() -> ParameterSet {
        ParameterSet::indexed(1).unwrap()
    }

    fn e1e1e2(p: &ParameterSet) -> SoftGFrame {
        SoftGFrame::induced_from_vectors(&[
            SoftVector::basis(p, 2, 0),
            SoftVector::basis(p, 2, 0),
            SoftVector::basis(p, 2, 1),
        ])
        .unwrap()
    }

    fn identity_frame(p: &ParameterSet, n: usize) -> SoftGFrame {
        SoftGFrame::new(p.clone(), n, vec![SoftOperator::identity(p, n)]).unwrap()
    }

    #[test]
    fn analysis_examples() {
        let p = one();
        let f = SoftVector::constant_real(&p, &[1.0, 2.0]);
        let a = identity_frame(&p, 2).analysis(&f).unwrap();
        assert_eq!(a.block(0), f);

        let a = e1e1e2(&p).analysis(&f).unwrap();
        let got: Vec<Complex64> = a.at(0).iter().map(|b| b[0]).collect();
        assert_eq!(got, vec![c(1.0), c(1.0), c(2.0)]);

        let z = e1e1e2(&p).analysis(&SoftVector::null(&p, 2)).unwrap();
        assert!(z.at(0).iter().all(|b| b.norm() == 0.0));
    }

    #[test]
    fn synthesis_examples() {
        let p = one();
        let g = DirectSumSoftVector::from_blocks(&[SoftVector::constant_real(&p, &[4.0, -1.0])]).unwrap();
        assert_eq!(identity_frame(&p, 2).synthesis(&g).unwrap(), g.block(0));

        let g = DirectSumSoftVector::from_blocks(&[
            SoftVector::constant_real(&p, &[1.0]),
            SoftVector::constant_real(&p, &[1.0]),
            SoftVector::constant_real(&p, &[2.0]),
        ])
        .unwrap();
        assert_eq!(
            e1e1e2(&p).synthesis(&g).unwrap(),
            SoftVector::constant_real(&p, &[2.0, 2.0])
        );
        let wrong = DirectSumSoftVector::zeros(&p, &[1, 2]);
        assert!(matches!(e1e1e2(&p).synthesis(&wrong), Err(SoftError::BlockMismatch(_))));
    }

    #[test]
    fn synthesis_after_analysis_is_frame_operator() {
        let p = ParameterSet::indexed(2).unwrap();
        let f = SoftVector::constant(&p, DVector::from_vec(vec![Complex64::new(1.0, -0.5), c(0.25)]));
        let fr = e1e1e2(&p);
        let lhs = fr.synthesis(&fr.analysis(&f).unwrap()).unwrap();
        let rhs = fr.frame_operator().apply(&f).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn frame_operator_examples() {
        let p = one();
        assert_eq!(identity_frame(&p, 2).frame_operator(), SoftOperator::identity(&p, 2));
        assert_eq!(
            e1e1e2(&p).frame_operator(),
            SoftOperator::diagonal_real(&p, &[2.0, 1.0])
        );

        let ab = ParameterSet::new(["a", "b"]).unwrap();
        let scaled = SoftOperator::from_fn(&ab, 2, 2, |l| {
            DMatrix::identity(2, 2) * c(if l == 0 { 1.0 } else { 2.0 })
        })
        .unwrap();
        let s = SoftGFrame::new(ab.clone(), 2, vec![scaled]).unwrap().frame_operator();
        assert_eq!(s.at(0), &DMatrix::identity(2, 2));
        assert_eq!(s.at(1), &(DMatrix::identity(2, 2) * c(4.0)));
    }

    #[test]
    fn frame_bounds_examples() {
        let p = ParameterSet::new(["p", "q"]).unwrap();
        let cert = identity_frame(&p, 2).frame_bounds(DEFAULT_FRAME_TOL);
        assert_eq!(cert.lower.values(), &[1.0, 1.0]);
        assert_eq!(cert.upper.values(), &[1.0, 1.0]);
        assert!(cert.is_frame && cert.is_tight);

        let cert = e1e1e2(&p).frame_bounds(DEFAULT_FRAME_TOL);
        assert_eq!(cert.lower.values(), &[1.0, 1.0]);
        assert_eq!(cert.upper.values(), &[2.0, 2.0]);
        assert!(cert.is_frame && !cert.is_tight);

        let deficient = SoftGFrame::induced_from_vectors(&[SoftVector::basis(&p, 2, 0)]).unwrap();
        let cert = deficient.frame_bounds(DEFAULT_FRAME_TOL);
        assert_eq!(cert.lower.values(), &[0.0, 0.0]);
        assert!(!cert.is_frame);
        assert_eq!(cert.failing_labels(DEFAULT_FRAME_TOL), vec!["p", "q"]);
    }

    #[test]
    fn exactness_examples() {
        let p = one();
        let split =
            SoftGFrame::induced_from_vectors(&[SoftVector::basis(&p, 2, 0), SoftVector::basis(&p, 2, 1)]).unwrap();
        assert_eq!(split.is_exact(DEFAULT_FRAME_TOL).unwrap(), vec![true, true]);
        assert_eq!(
            e1e1e2(&p).is_exact(DEFAULT_FRAME_TOL).unwrap(),
            vec![false, false, true]
        );
        assert_eq!(identity_frame(&p, 3).is_exact(DEFAULT_FRAME_TOL).unwrap(), vec![true]);

        let deficient = SoftGFrame::induced_from_vectors(&[SoftVector::basis(&p, 2, 0)]).unwrap();
        assert!(matches!(
            deficient.is_exact(DEFAULT_FRAME_TOL),
            Err(SoftError::NotAFrame { .. })
        ));
    }

    #[test]
    fn induced_from_soft_vectors() {
        let ab = ParameterSet::new(["a", "b"]).unwrap();
        let onb = SoftGFrame::induced_from_vectors(&[
            SoftVector::basis(&ab, 3, 0),
            SoftVector::basis(&ab, 3, 1),
            SoftVector::basis(&ab, 3, 2),
        ])
        .unwrap();
        let cert = onb.frame_bounds(DEFAULT_FRAME_TOL);
        assert!(cert.is_tight);
        assert_eq!(cert.upper.values(), &[1.0, 1.0]);

        let f1 = SoftVector::from_fn(&ab, 2, |l| {
            DVector::from_vec(vec![c(if l == 0 { 1.0 } else { 2.0 }), c(0.0)])
        })
        .unwrap();
        let fr = SoftGFrame::induced_from_vectors(&[f1, SoftVector::basis(&ab, 2, 1)]).unwrap();
        let cert = fr.frame_bounds(DEFAULT_FRAME_TOL);
        assert_eq!(cert.lower.values(), &[1.0, 1.0]);
        assert_eq!(cert.upper.values(), &[1.0, 4.0]);

        let mixed = SoftGFrame::induced_from_vectors(&[SoftVector::basis(&ab, 2, 0), SoftVector::basis(&ab, 3, 0)]);
        assert!(mixed.is_err());
    }

    #[test]
    fn frame_energy_examples() {
        let p = one();
        let f = SoftVector::constant_real(&p, &[1.0, 1.0]);
        assert_eq!(e1e1e2(&p).frame_energy(&f).unwrap().values(), &[3.0]);
        assert_eq!(identity_frame(&p, 2).frame_energy(&f).unwrap().values(), &[2.0]);
        assert_eq!(
            e1e1e2(&p).frame_energy(&SoftVector::null(&p, 2)).unwrap().values(),
            &[0.0]
        );
    }

    #[test]
    fn synthesis_matrix_matches_synthesis() {
        let p = one();
        let fr = e1e1e2(&p);
        let g = DirectSumSoftVector::from_blocks(&[
            SoftVector::constant_real(&p, &[1.0]),
            SoftVector::constant_real(&p, &[-3.0]),
            SoftVector::constant_real(&p, &[2.0]),
        ])
        .unwrap();
        let stacked = DVector::from_vec(vec![c(1.0), c(-3.0), c(2.0)]);
        assert_eq!(&(fr.synthesis_matrix(0) * stacked), fr.synthesis(&g).unwrap().at(0));
    }
}
