//! Ordinary soft frames assembled from a g-frame and one local frame per
//! target space: `{Λ_j* f_jk : j ∈ J, k ∈ K_j}`.
//!
//! Composed vectors are flattened in `(j, k)` lexicographic order and the
//! order is kept alongside them so dual families line up index by index.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::dual::{canonical_dual, relative_error, resynthesize};
use crate::error::{Result, SoftError};
use crate::gframe::{FrameBoundsCertificate, SoftGFrame, DEFAULT_FRAME_TOL};
use crate::operators::max_abs;
use crate::soft_core::{ParameterSet, SoftReal, SoftVector};
use crate::verify::random::{random_soft_vector, seeded_rng};

/// One frame `{f_jk}_k` for each target space `V_j`, with its optimal local
/// bounds and a common envelope `lower ≤ A_j ≤ B_j ≤ upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFrameFamily {
    families: Vec<Vec<SoftVector>>,
    local_bounds: Vec<FrameBoundsCertificate>,
    envelope_lower: SoftReal,
    envelope_upper: SoftReal,
}

impl LocalFrameFamily {
    /// Computes local bounds and takes the tightest envelope (pointwise min
    /// of lower bounds, max of upper bounds).
    pub fn new(families: Vec<Vec<SoftVector>>) -> Result<Self> {
        Self::with_tol(families, DEFAULT_FRAME_TOL)
    }

    pub fn with_tol(families: Vec<Vec<SoftVector>>, tol: f64) -> Result<Self> {
        if families.is_empty() {
            return Err(SoftError::Precondition("no local frames given".into()));
        }
        let mut local_bounds = Vec::with_capacity(families.len());
        for (j, fam) in families.iter().enumerate() {
            let cert = SoftGFrame::induced_from_vectors(fam)
                .map_err(|e| SoftError::Precondition(format!("local family {j}: {e}")))?
                .frame_bounds(tol);
            if !cert.is_frame {
                return Err(SoftError::Precondition(format!(
                    "local family {j} is not a frame at {:?}",
                    cert.failing_labels(tol)
                )));
            }
            local_bounds.push(cert);
        }
        let params = families[0][0].params().clone();
        for fam in &families {
            params.ensure_same(fam[0].params())?;
        }
        let envelope_lower = SoftReal::from_fn(&params, |l| {
            local_bounds
                .iter()
                .map(|c| c.lower.get(l))
                .fold(f64::INFINITY, f64::min)
        });
        let envelope_upper = SoftReal::from_fn(&params, |l| {
            local_bounds.iter().map(|c| c.upper.get(l)).fold(0.0, f64::max)
        });
        Ok(LocalFrameFamily {
            families,
            local_bounds,
            envelope_lower,
            envelope_upper,
        })
    }

    /// Uses a caller-supplied envelope, which must contain every local bound.
    pub fn with_envelope(families: Vec<Vec<SoftVector>>, lower: SoftReal, upper: SoftReal) -> Result<Self> {
        let mut fam = Self::new(families)?;
        let zero = SoftReal::constant(lower.params(), 0.0);
        if !lower.soft_gt(&zero)? {
            return Err(SoftError::Precondition("envelope lower bound must be positive".into()));
        }
        for (j, cert) in fam.local_bounds.iter().enumerate() {
            if !lower.soft_le(&cert.lower)? || !cert.upper.soft_le(&upper)? {
                return Err(SoftError::Precondition(format!(
                    "local bounds of family {j} fall outside the envelope"
                )));
            }
        }
        fam.envelope_lower = lower;
        fam.envelope_upper = upper;
        Ok(fam)
    }

    pub fn families(&self) -> &[Vec<SoftVector>] {
        &self.families
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    pub fn params(&self) -> &ParameterSet {
        self.envelope_lower.params()
    }

    pub fn local_bounds(&self, j: usize) -> &FrameBoundsCertificate {
        &self.local_bounds[j]
    }

    pub fn envelope(&self) -> (&SoftReal, &SoftReal) {
        (&self.envelope_lower, &self.envelope_upper)
    }

    /// The common tight bound `Ā` if every family is tight with the same
    /// per-parameter bound.
    pub fn common_tight_bound(&self, tol: f64) -> Option<SoftReal> {
        let first = &self.local_bounds[0];
        let all_tight = self.local_bounds.iter().all(|c| {
            c.is_tight
                && c.upper
                    .values()
                    .iter()
                    .zip(first.upper.values())
                    .all(|(a, b)| (a - b).abs() <= tol * a.abs().max(b.abs()))
        });
        all_tight.then(|| first.upper.clone())
    }

    /// Canonical dual of every local family.
    pub fn canonical_duals(&self) -> Result<LocalFrameFamily> {
        let families = self
            .families
            .iter()
            .map(|fam| {
                let fr = SoftGFrame::induced_from_vectors(fam)?;
                let s_inv = fr.frame_operator().invert_hpd()?;
                fam.iter().map(|v| s_inv.apply(v)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        LocalFrameFamily::new(families)
    }
}

/// The flattened family `{Λ_j* f_jk}` and the `(j, k)` origin of each entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedFrame {
    pub vectors: Vec<SoftVector>,
    pub index: Vec<(usize, usize)>,
}

impl ComposedFrame {
    pub fn as_gframe(&self) -> Result<SoftGFrame> {
        SoftGFrame::induced_from_vectors(&self.vectors)
    }
}

pub fn compose_frame(frame: &SoftGFrame, locals: &LocalFrameFamily) -> Result<ComposedFrame> {
    if locals.len() != frame.len() {
        return Err(SoftError::DimensionMismatch {
            what: "number of local frames",
            expected: frame.len(),
            found: locals.len(),
        });
    }
    frame.params().ensure_same(locals.params())?;
    let mut vectors = Vec::new();
    let mut index = Vec::new();
    for (j, (block, fam)) in frame.blocks().iter().zip(locals.families()).enumerate() {
        let adj = block.adjoint();
        for (k, v) in fam.iter().enumerate() {
            if v.dim() != block.rows() {
                return Err(SoftError::DimensionMismatch {
                    what: "local frame vector dimension",
                    expected: block.rows(),
                    found: v.dim(),
                });
            }
            vectors.push(adj.apply(v)?);
            index.push((j, k));
        }
    }
    Ok(ComposedFrame { vectors, index })
}

fn check_same_layout(a: &LocalFrameFamily, b: &LocalFrameFamily) -> Result<()> {
    let la: Vec<usize> = a.families().iter().map(Vec::len).collect();
    let lb: Vec<usize> = b.families().iter().map(Vec::len).collect();
    if la != lb {
        return Err(SoftError::BlockMismatch(format!(
            "local family sizes differ: {la:?} vs {lb:?}"
        )));
    }
    Ok(())
}

/// Worst relative error of `Σ_jk ⟨f, Λ_j* f_jk⟩ Γ_j* g_jk = f` and of the
/// swapped identity over `trials` random probes.
pub fn composed_dual_pair_defect(
    frame: &SoftGFrame,
    other: &SoftGFrame,
    locals: &LocalFrameFamily,
    other_locals: &LocalFrameFamily,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    check_same_layout(locals, other_locals)?;
    let a = compose_frame(frame, locals)?.as_gframe()?;
    let b = compose_frame(other, other_locals)?.as_gframe()?;
    if a.ambient_dim() != b.ambient_dim() {
        return Err(SoftError::DimensionMismatch {
            what: "ambient dimension of paired frames",
            expected: a.ambient_dim(),
            found: b.ambient_dim(),
        });
    }
    let mut rng = seeded_rng(seed, 1);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let f = random_soft_vector(&mut rng, frame.params(), frame.ambient_dim());
        worst = worst
            .max(relative_error(&resynthesize(&b, &a, &f)?, &f))
            .max(relative_error(&resynthesize(&a, &b, &f)?, &f));
    }
    Ok(worst)
}

const COMPOSED_CHECK_SEED: u64 = 0xc0_4405e;

pub fn composed_dual_pair(
    frame: &SoftGFrame,
    other: &SoftGFrame,
    locals: &LocalFrameFamily,
    other_locals: &LocalFrameFamily,
    trials: usize,
    tol: f64,
) -> Result<bool> {
    Ok(composed_dual_pair_defect(frame, other, locals, other_locals, trials, COMPOSED_CHECK_SEED)? <= tol)
}

/// Canonical dual of a frame composed with tight local frames of common
/// bound `Ā`, together with the closed form `{Λ̃_j* (f_jk / Ā)}` and the
/// measured defects of both identities.
#[derive(Debug, Clone, PartialEq)]
pub struct TightLocalDual {
    pub composed: ComposedFrame,
    pub tight_bound: SoftReal,
    /// Canonical dual of the composed family, computed from its own frame
    /// operator.
    pub dual: Vec<SoftVector>,
    /// `Λ̃_j* (f_jk / Ā)` from the canonical dual g-frame.
    pub predicted: Vec<SoftVector>,
    /// `max_λ |S_composed - Ā S_F|_max / |Ā S_F|_max`.
    pub operator_defect: f64,
    /// Worst relative difference between `dual` and `predicted`.
    pub dual_defect: f64,
}

impl TightLocalDual {
    pub fn holds(&self, operator_tol: f64, dual_tol: f64) -> bool {
        self.operator_defect <= operator_tol && self.dual_defect <= dual_tol
    }
}

pub fn tight_local_canonical_dual(frame: &SoftGFrame, locals: &LocalFrameFamily) -> Result<TightLocalDual> {
    let tight_bound = locals
        .common_tight_bound(DEFAULT_FRAME_TOL)
        .ok_or_else(|| SoftError::Precondition("local frames are not all tight with a common bound".into()))?;
    let pair = canonical_dual(frame)?;
    let composed = compose_frame(frame, locals)?;
    let composed_frame = composed.as_gframe()?;
    let s_composed = composed_frame.frame_operator();
    let s_frame = frame.frame_operator();
    let scaled = s_frame.scale_real(&tight_bound)?;

    let operator_defect = (0..frame.params().len())
        .map(|l| max_abs(&(s_composed.at(l) - scaled.at(l))) / max_abs(scaled.at(l)))
        .fold(0.0, f64::max);

    let s_composed_inv = s_composed.invert_hpd()?;
    let dual = composed
        .vectors
        .iter()
        .map(|v| s_composed_inv.apply(v))
        .collect::<Result<Vec<_>>>()?;

    let inv_bound = tight_bound.map(|a| 1.0 / a);
    let predicted = composed
        .index
        .iter()
        .map(|&(j, k)| {
            let scaled_local = locals.families()[j][k].scale_real(&inv_bound)?;
            pair.dual.blocks()[j].adjoint().apply(&scaled_local)
        })
        .collect::<Result<Vec<_>>>()?;

    let dual_defect = dual
        .iter()
        .zip(&predicted)
        .map(|(d, p)| relative_error(d, p))
        .fold(0.0, f64::max);

    Ok(TightLocalDual {
        composed,
        tight_bound,
        dual,
        predicted,
        operator_defect,
        dual_defect,
    })
}

/// `Σ_j Λ_j(λ)* S_j^loc(λ) Λ_j(λ)`, the frame operator of the composed family
/// assembled block by block.
pub fn composed_frame_operator_blockwise(
    frame: &SoftGFrame,
    locals: &LocalFrameFamily,
) -> Result<crate::operators::SoftOperator> {
    if locals.len() != frame.len() {
        return Err(SoftError::DimensionMismatch {
            what: "number of local frames",
            expected: frame.len(),
            found: locals.len(),
        });
    }
    let n = frame.ambient_dim();
    let local_ops: Vec<_> = locals
        .families()
        .iter()
        .map(|fam| SoftGFrame::induced_from_vectors(fam).map(|g| g.frame_operator()))
        .collect::<Result<_>>()?;
    crate::operators::SoftOperator::from_fn(frame.params(), n, n, |l| {
        let mut acc = nalgebra::DMatrix::<Complex64>::zeros(n, n);
        for (b, s_loc) in frame.blocks().iter().zip(&local_ops) {
            acc += b.at(l).ad_mul(&(s_loc.at(l) * b.at(l)));
        }
        acc
    })
}

/// Orthonormal-basis local frames scaled by `sqrt(a(λ))`: tight with bound `a`.
pub fn scaled_basis_family(params: &ParameterSet, dim: usize, bound: &SoftReal) -> Vec<SoftVector> {
    (0..dim)
        .map(|k| {
            SoftVector::from_parts_unchecked(
                params.clone(),
                dim,
                (0..params.len())
                    .map(|l| {
                        let mut v = DVector::zeros(dim);
                        v[k] = Complex64::new(bound.get(l).sqrt(), 0.0);
                        v
                    })
                    .collect(),
            )
        })
        .collect()
}

/// Samples the composition sandwich `Ā C ‖f‖² ≤ Σ_jk |⟨Λ_j f, f_jk⟩|² ≤ B̄ D ‖f‖²`
/// and returns the worst relative violation (zero when it holds).
pub fn composition_sandwich_violation(
    frame: &SoftGFrame,
    locals: &LocalFrameFamily,
    probes: usize,
    seed: u64,
) -> Result<f64> {
    let composed = compose_frame(frame, locals)?.as_gframe()?;
    let cert = frame.frame_bounds(DEFAULT_FRAME_TOL);
    let (lo_env, hi_env) = locals.envelope();
    let mut rng = seeded_rng(seed, 2);
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let f = random_soft_vector(&mut rng, frame.params(), frame.ambient_dim());
        let energy = composed.frame_energy(&f)?;
        for l in 0..frame.params().len() {
            let nf2 = f.at(l).norm_squared();
            let lo = lo_env.get(l) * cert.lower.get(l) * nf2;
            let hi = hi_env.get(l) * cert.upper.get(l) * nf2;
            let e = energy.get(l);
            let scale = hi.max(f64::MIN_POSITIVE);
            worst = worst.max((lo - e).max(0.0) / scale).max((e - hi).max(0.0) / scale);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::SoftOperator;

    fn scalar_family(p: &ParameterSet, vals: &[f64]) -> Vec<SoftVector> {
        vals.iter().map(|&v| SoftVector::constant_real(p, &[v])).collect()
    }

    fn coordinate_frame(p: &ParameterSet) -> SoftGFrame {
        SoftGFrame::induced_from_vectors(&[SoftVector::basis(p, 2, 0), SoftVector::basis(p, 2, 1)]).unwrap()
    }

    #[test]
    fn identity_gframe_with_orthonormal_locals() {
        let p = ParameterSet::indexed(2).unwrap();
        let fr = SoftGFrame::new(p.clone(), 3, vec![SoftOperator::identity(&p, 3)]).unwrap();
        let basis: Vec<_> = (0..3).map(|k| SoftVector::basis(&p, 3, k)).collect();
        let locals = LocalFrameFamily::new(vec![basis.clone()]).unwrap();
        let composed = compose_frame(&fr, &locals).unwrap();
        assert_eq!(composed.vectors, basis);
        assert_eq!(composed.index, vec![(0, 0), (0, 1), (0, 2)]);
        let cert = composed.as_gframe().unwrap().frame_bounds(1e-10);
        assert_eq!(cert.lower.values(), &[1.0, 1.0]);
        assert!(cert.is_tight);
    }

    #[test]
    fn coordinate_gframe_with_doubled_scalars() {
        let p = ParameterSet::indexed(1).unwrap();
        let fr = coordinate_frame(&p);
        let locals =
            LocalFrameFamily::new(vec![scalar_family(&p, &[1.0, 1.0]), scalar_family(&p, &[1.0, 1.0])]).unwrap();
        assert_eq!(locals.common_tight_bound(1e-10).unwrap().values(), &[2.0]);
        let composed = compose_frame(&fr, &locals).unwrap();
        let e1 = SoftVector::basis(&p, 2, 0);
        let e2 = SoftVector::basis(&p, 2, 1);
        assert_eq!(composed.vectors, vec![e1.clone(), e1, e2.clone(), e2]);
        let g = composed.as_gframe().unwrap();
        assert_eq!(g.frame_operator(), SoftOperator::diagonal_real(&p, &[2.0, 2.0]));
        let cert = g.frame_bounds(1e-10);
        assert_eq!((cert.lower.get(0), cert.upper.get(0)), (2.0, 2.0));
        let coeffs = g.analysis(&SoftVector::null(&p, 2)).unwrap();
        assert!(coeffs.at(0).iter().all(|b| b.norm() == 0.0));
    }

    #[test]
    fn composed_dual_pairs() {
        let p = ParameterSet::indexed(1).unwrap();
        let fr = coordinate_frame(&p);
        let locals =
            LocalFrameFamily::new(vec![scalar_family(&p, &[1.0, 1.0]), scalar_family(&p, &[1.0, 1.0])]).unwrap();
        let halves =
            LocalFrameFamily::new(vec![scalar_family(&p, &[0.5, 0.5]), scalar_family(&p, &[0.5, 0.5])]).unwrap();
        assert_eq!(locals.canonical_duals().unwrap(), halves);
        assert!(composed_dual_pair(&fr, &fr, &locals, &halves, 10, 1e-12).unwrap());
        // pairing the locals with themselves resynthesizes 2f
        assert!(!composed_dual_pair(&fr, &fr, &locals, &locals, 10, 1e-8).unwrap());
        let d = composed_dual_pair_defect(&fr, &fr, &locals, &locals, 3, 9).unwrap();
        assert!((d - 1.0).abs() < 1e-14);

        let id = SoftGFrame::new(p.clone(), 2, vec![SoftOperator::identity(&p, 2)]).unwrap();
        let onb = LocalFrameFamily::new(vec![vec![SoftVector::basis(&p, 2, 0), SoftVector::basis(&p, 2, 1)]]).unwrap();
        let dual = canonical_dual(&id).unwrap().dual;
        assert!(composed_dual_pair(&id, &dual, &onb, &onb.canonical_duals().unwrap(), 5, 1e-12).unwrap());
    }

    #[test]
    fn tight_local_examples() {
        let p = ParameterSet::indexed(1).unwrap();
        let fr = coordinate_frame(&p);
        let locals =
            LocalFrameFamily::new(vec![scalar_family(&p, &[1.0, 1.0]), scalar_family(&p, &[1.0, 1.0])]).unwrap();
        let res = tight_local_canonical_dual(&fr, &locals).unwrap();
        assert!(res.holds(1e-12, 1e-12));
        for (d, v) in res.dual.iter().zip(&res.composed.vectors) {
            assert!(relative_error(d, &v.scale_real(&SoftReal::constant(&p, 0.5)).unwrap()) < 1e-15);
        }

        let ab = ParameterSet::new(["a", "b"]).unwrap();
        let bound = SoftReal::new(ab.clone(), vec![1.0, 2.0]).unwrap();
        let e1e1e2 = SoftGFrame::induced_from_vectors(&[
            SoftVector::basis(&ab, 2, 0),
            SoftVector::basis(&ab, 2, 0),
            SoftVector::basis(&ab, 2, 1),
        ])
        .unwrap();
        let locals = LocalFrameFamily::new((0..3).map(|_| scaled_basis_family(&ab, 1, &bound)).collect()).unwrap();
        let res = tight_local_canonical_dual(&e1e1e2, &locals).unwrap();
        assert!((res.tight_bound.get(0) - 1.0).abs() < 1e-15);
        assert!((res.tight_bound.get(1) - 2.0).abs() < 1e-15);
        assert!(res.holds(1e-12, 1e-12));
    }

    #[test]
    fn non_tight_locals_rejected() {
        let p = ParameterSet::indexed(1).unwrap();
        let fr = coordinate_frame(&p);
        let locals = LocalFrameFamily::new(vec![scalar_family(&p, &[1.0]), scalar_family(&p, &[1.0, 1.0])]).unwrap();
        assert!(locals.common_tight_bound(1e-10).is_none());
        assert!(matches!(
            tight_local_canonical_dual(&fr, &locals),
            Err(SoftError::Precondition(_))
        ));
    }

    #[test]
    fn envelope_and_shape_errors() {
        let p = ParameterSet::indexed(1).unwrap();
        let fams = vec![scalar_family(&p, &[1.0]), scalar_family(&p, &[1.0, 1.0])];
        let ok =
            LocalFrameFamily::with_envelope(fams.clone(), SoftReal::constant(&p, 0.5), SoftReal::constant(&p, 3.0));
        assert!(ok.is_ok());
        let bad =
            LocalFrameFamily::with_envelope(fams.clone(), SoftReal::constant(&p, 1.5), SoftReal::constant(&p, 3.0));
        assert!(matches!(bad, Err(SoftError::Precondition(_))));
        let locals = LocalFrameFamily::new(fams).unwrap();
        assert_eq!(locals.envelope().0.values(), &[1.0]);
        assert_eq!(locals.envelope().1.values(), &[2.0]);

        let fr = coordinate_frame(&p);
        let wrong_dim = LocalFrameFamily::new(vec![
            vec![SoftVector::basis(&p, 2, 0), SoftVector::basis(&p, 2, 1)],
            scalar_family(&p, &[1.0]),
        ])
        .unwrap();
        assert!(matches!(
            compose_frame(&fr, &wrong_dim),
            Err(SoftError::DimensionMismatch { .. })
        ));
        let too_few = LocalFrameFamily::new(vec![scalar_family(&p, &[1.0])]).unwrap();
        assert!(compose_frame(&fr, &too_few).is_err());
        assert!(LocalFrameFamily::new(vec![vec![SoftVector::null(&p, 1)]]).is_err());
    }

    #[test]
    fn blockwise_operator_matches_composed() {
        let p = ParameterSet::indexed(1).unwrap();
        let fr = SoftGFrame::induced_from_vectors(&[
            SoftVector::constant_real(&p, &[1.0, 2.0]),
            SoftVector::constant_real(&p, &[0.0, 1.0]),
        ])
        .unwrap();
        let locals = LocalFrameFamily::new(vec![scalar_family(&p, &[1.0, 3.0]), scalar_family(&p, &[2.0])]).unwrap();
        let direct = compose_frame(&fr, &locals)
            .unwrap()
            .as_gframe()
            .unwrap()
            .frame_operator();
        let blockwise = composed_frame_operator_blockwise(&fr, &locals).unwrap();
        assert!(direct.max_abs_diff(&blockwise).unwrap() < 1e-14);
        assert_eq!(composition_sandwich_violation(&fr, &locals, 20, 3).unwrap(), 0.0);
    }
}
