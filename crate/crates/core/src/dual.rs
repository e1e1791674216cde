//! Canonical dual g-frames, reconstruction and atomic resolutions.

use crate::error::{Result, SoftError};
use crate::gframe::{SoftGFrame, DEFAULT_FRAME_TOL};
use crate::operators::SoftOperator;
use crate::soft_core::SoftVector;
use crate::verify::random::{random_soft_vector, seeded_rng};

/// A g-frame, its canonical dual `{Λ_j S⁻¹}` and the inverse frame operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPair {
    pub frame: SoftGFrame,
    pub dual: SoftGFrame,
    pub s_inverse: SoftOperator,
}

/// Where the dual frame enters the decomposition `f = Σ_j ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconstructionOrder {
    /// `Σ_j Λ_j* Λ_j S⁻¹ f`
    DualInside,
    /// `Σ_j S⁻¹ Λ_j* Λ_j f`
    DualOutside,
}

/// Which frame is applied first in an atomic resolution of `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolutionSide {
    /// `T f = Σ_j Λ_j* Λ̃_j T f`
    DualFirst,
    /// `T f = Σ_j Λ̃_j* Λ_j T f`
    FrameFirst,
}

pub fn canonical_dual(frame: &SoftGFrame) -> Result<DualPair> {
    canonical_dual_with_tol(frame, DEFAULT_FRAME_TOL)
}

pub fn canonical_dual_with_tol(frame: &SoftGFrame, tol: f64) -> Result<DualPair> {
    let cert = frame.frame_bounds(tol);
    if !cert.is_frame {
        return Err(SoftError::NotAFrame {
            labels: cert.failing_labels(tol),
        });
    }
    let s_inverse = frame.frame_operator().invert_hpd()?;
    let dual = frame.compose_right(&s_inverse)?;
    Ok(DualPair {
        frame: frame.clone(),
        dual,
        s_inverse,
    })
}

/// `Σ_j outer_j* inner_j f`, summed in increasing `j`.
pub fn resynthesize(outer: &SoftGFrame, inner: &SoftGFrame, f: &SoftVector) -> Result<SoftVector> {
    outer.synthesis(&inner.analysis(f)?)
}

impl DualPair {
    pub fn reconstruct(&self, f: &SoftVector, order: ReconstructionOrder) -> Result<SoftVector> {
        match order {
            ReconstructionOrder::DualInside => resynthesize(&self.frame, &self.dual, f),
            ReconstructionOrder::DualOutside => resynthesize(&self.dual, &self.frame, f),
        }
    }

    pub fn atomic_resolution(&self, t: &SoftOperator, f: &SoftVector, side: ResolutionSide) -> Result<SoftVector> {
        let n = self.frame.ambient_dim();
        if t.rows() != n || t.cols() != n {
            return Err(SoftError::DimensionMismatch {
                what: "resolved operator must be square on the ambient space",
                expected: n,
                found: if t.rows() != n { t.rows() } else { t.cols() },
            });
        }
        let tf = t.apply(f)?;
        match side {
            ResolutionSide::DualFirst => resynthesize(&self.frame, &self.dual, &tf),
            ResolutionSide::FrameFirst => resynthesize(&self.dual, &self.frame, &tf),
        }
    }
}

/// Largest relative error `‖x(λ) - f(λ)‖ / ‖f(λ)‖` over parameters.
pub(crate) fn relative_error(x: &SoftVector, f: &SoftVector) -> f64 {
    x.values()
        .iter()
        .zip(f.values())
        .map(|(a, b)| {
            let scale = b.norm();
            let diff = (a - b).norm();
            if scale > 0.0 {
                diff / scale
            } else {
                diff
            }
        })
        .fold(0.0, f64::max)
}

const DUAL_CHECK_SEED: u64 = 0x5eed_d0a1;

/// Worst relative reconstruction error of the pair `(F, G)` in either order,
/// over `trials` random probes.
pub fn dual_pair_defect(f: &SoftGFrame, g: &SoftGFrame, trials: usize, seed: u64) -> Result<f64> {
    f.params().ensure_same(g.params())?;
    if f.ambient_dim() != g.ambient_dim() || f.block_dims() != g.block_dims() {
        return Err(SoftError::BlockMismatch(format!(
            "pair shapes differ: {}/{:?} vs {}/{:?}",
            f.ambient_dim(),
            f.block_dims(),
            g.ambient_dim(),
            g.block_dims()
        )));
    }
    let mut rng = seeded_rng(seed, 0);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let x = random_soft_vector(&mut rng, f.params(), f.ambient_dim());
        worst = worst
            .max(relative_error(&resynthesize(f, g, &x)?, &x))
            .max(relative_error(&resynthesize(g, f, &x)?, &x));
    }
    Ok(worst)
}

/// True iff `f = Σ_j Λ_j* Γ_j f = Σ_j Γ_j* Λ_j f` on `trials` random probes
/// to relative tolerance `tol`.
pub fn dual_pair_check(f: &SoftGFrame, g: &SoftGFrame, trials: usize, tol: f64) -> Result<bool> {
    Ok(dual_pair_defect(f, g, trials, DUAL_CHECK_SEED)? <= tol)
}
