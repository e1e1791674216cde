//! Stacked-matrix reference path.
//!
//! All blocks at a parameter are stacked into one tall matrix `M(λ)`; the
//! frame operator is `M*M` and the optimal bounds are the squared extreme
//! singular values of `M`. Nothing here goes through the block-sum or the
//! Hermitian eigensolver used by the main path.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::gframe::{FrameBoundsCertificate, SoftGFrame};
use crate::operators::SoftOperator;
use crate::soft_core::{SoftReal, SoftVector};

/// `M(λ)`: the blocks of `frame` stacked vertically in increasing `j`.
pub fn stacked_analysis_matrix(frame: &SoftGFrame, l: usize) -> DMatrix<Complex64> {
    let total: usize = frame.block_dims().iter().sum();
    let mut m = DMatrix::zeros(total, frame.ambient_dim());
    let mut row = 0;
    for b in frame.blocks() {
        m.rows_mut(row, b.rows()).copy_from(b.at(l));
        row += b.rows();
    }
    m
}

pub fn oracle_frame_operator(frame: &SoftGFrame) -> SoftOperator {
    SoftOperator::from_fn(frame.params(), frame.ambient_dim(), frame.ambient_dim(), |l| {
        let m = stacked_analysis_matrix(frame, l);
        m.adjoint() * m
    })
    .expect("shapes follow the frame")
}

/// Bounds from singular values of the stacked matrix.
pub fn oracle_frame_bounds(frame: &SoftGFrame, tol: f64) -> FrameBoundsCertificate {
    let n = frame.ambient_dim();
    let extremes: Vec<(f64, f64)> = (0..frame.params().len())
        .map(|l| {
            let m = stacked_analysis_matrix(frame, l);
            let rows = m.nrows();
            let sv = m.svd(false, false).singular_values;
            let hi = sv.iter().copied().fold(0.0, f64::max);
            // fewer stacked rows than n leaves a null space
            let lo = if rows < n {
                0.0
            } else {
                sv.iter().copied().fold(f64::INFINITY, f64::min)
            };
            (lo * lo, hi * hi)
        })
        .collect();
    let lower = SoftReal::from_fn(frame.params(), |l| extremes[l].0);
    let upper = SoftReal::from_fn(frame.params(), |l| extremes[l].1);
    let is_frame = extremes.iter().all(|&(lo, hi)| hi > 0.0 && lo > tol * hi);
    let is_tight = is_frame && extremes.iter().all(|&(lo, hi)| (hi - lo).abs() <= tol * hi);
    FrameBoundsCertificate {
        lower,
        upper,
        is_frame,
        is_tight,
    }
}

/// `‖M(λ) f(λ)‖²`.
pub fn oracle_frame_energy(frame: &SoftGFrame, f: &SoftVector) -> SoftReal {
    SoftReal::from_fn(frame.params(), |l| {
        (stacked_analysis_matrix(frame, l) * f.at(l)).norm_squared()
    })
}
