//! Randomized property harness.
//!
//! Every structural identity of soft g-frames is measured on random
//! instances and random probes; each property reports the worst relative
//! defect observed and where it occurred. Failures are data, not errors.
//!
//! Trials are independent and may run on the rayon pool. Each trial draws
//! from its own stream of the seeded generator and results are aggregated in
//! trial order, so a given seed always yields byte-identical reports.

pub mod oracle;
pub mod random;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::compose::{compose_frame, tight_local_canonical_dual, LocalFrameFamily};
use crate::dual::{canonical_dual, resynthesize, DualPair, ReconstructionOrder, ResolutionSide};
use crate::gframe::{FrameBoundsCertificate, SoftGFrame, DEFAULT_FRAME_TOL};
use crate::operators::max_abs;
use crate::par::Execution;
use crate::soft_core::{DirectSumSoftVector, SoftComplex, SoftVector};

use self::oracle::{oracle_frame_bounds, oracle_frame_operator};
use self::random::{
    complex_gaussian, random_local_family, random_positive_soft_real, random_soft_operator, random_soft_vector,
    random_tight_family, seeded_rng, RandomModel, TrialRng,
};

/// Every property the harness measures, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    SoftNormAxioms,
    InnerProductAxioms,
    DirectSumInnerProduct,
    AdjointPairing,
    SynthesisNormBound,
    OracleFrameOperator,
    OracleFrameBounds,
    FramePredicate,
    FrameEnergyIdentity,
    FrameSandwich,
    DualBounds,
    InverseSandwich,
    Decomposition,
    AtomicResolution,
    CompositionSandwich,
    ComposedDualPair,
    TightLocalOperator,
    TightLocalDual,
}

impl Property {
    pub const ALL: [Property; 18] = [
        Property::SoftNormAxioms,
        Property::InnerProductAxioms,
        Property::DirectSumInnerProduct,
        Property::AdjointPairing,
        Property::SynthesisNormBound,
        Property::OracleFrameOperator,
        Property::OracleFrameBounds,
        Property::FramePredicate,
        Property::FrameEnergyIdentity,
        Property::FrameSandwich,
        Property::DualBounds,
        Property::InverseSandwich,
        Property::Decomposition,
        Property::AtomicResolution,
        Property::CompositionSandwich,
        Property::ComposedDualPair,
        Property::TightLocalOperator,
        Property::TightLocalDual,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Property::SoftNormAxioms => "soft_norm_axioms",
            Property::InnerProductAxioms => "inner_product_axioms",
            Property::DirectSumInnerProduct => "direct_sum_inner_product",
            Property::AdjointPairing => "adjoint_pairing",
            Property::SynthesisNormBound => "synthesis_norm_bound",
            Property::OracleFrameOperator => "oracle_frame_operator",
            Property::OracleFrameBounds => "oracle_frame_bounds",
            Property::FramePredicate => "frame_predicate",
            Property::FrameEnergyIdentity => "frame_energy_identity",
            Property::FrameSandwich => "frame_sandwich",
            Property::DualBounds => "dual_bounds",
            Property::InverseSandwich => "inverse_sandwich",
            Property::Decomposition => "decomposition",
            Property::AtomicResolution => "atomic_resolution",
            Property::CompositionSandwich => "composition_sandwich",
            Property::ComposedDualPair => "composed_dual_pair",
            Property::TightLocalOperator => "tight_local_operator",
            Property::TightLocalDual => "tight_local_dual",
        }
    }

    /// What the property checks, in one line.
    pub fn basis(self) -> &'static str {
        match self {
            Property::SoftNormAxioms => "soft norm: positivity, null vector, homogeneity, triangle inequality",
            Property::InnerProductAxioms => "soft inner product: conjugate symmetry, linearity, positivity",
            Property::DirectSumInnerProduct => "direct-sum inner product is the sum of block inner products",
            Property::AdjointPairing => "analysis operator is the adjoint of synthesis",
            Property::SynthesisNormBound => "synthesis operator norm is at most sqrt(upper bound)",
            Property::OracleFrameOperator => "plumbing: block-sum frame operator equals stacked Gram matrix",
            Property::OracleFrameBounds => "plumbing: spectral bounds equal squared stacked singular values",
            Property::FramePredicate => "optimal lower bound is positive at every parameter",
            Property::FrameEnergyIdentity => "<Sf, f> equals the sum of block energies",
            Property::FrameSandwich => "lower |f|^2 <= energy <= upper |f|^2",
            Property::DualBounds => "canonical dual has optimal bounds (1/upper, 1/lower)",
            Property::InverseSandwich => "1/upper <= <S^-1 f, f>/|f|^2 <= 1/lower",
            Property::Decomposition => "f is recovered with the dual inside and outside",
            Property::AtomicResolution => "Tf is recovered through the frame and its dual",
            Property::CompositionSandwich => "composed family bounds lie within local envelope times g-frame bounds",
            Property::ComposedDualPair => "composed frame and composed dual reproduce f",
            Property::TightLocalOperator => "tight locals of bound A give S_composed = A S",
            Property::TightLocalDual => "tight locals: composed canonical dual is the dual g-frame applied to f/A",
        }
    }

    /// Threshold on the worst violation.
    pub fn tolerance(self) -> f64 {
        match self {
            Property::SoftNormAxioms
            | Property::InnerProductAxioms
            | Property::DirectSumInnerProduct
            | Property::OracleFrameOperator => 1e-12,
            Property::AdjointPairing
            | Property::OracleFrameBounds
            | Property::FrameEnergyIdentity
            | Property::TightLocalOperator => 1e-10,
            Property::FrameSandwich | Property::InverseSandwich | Property::CompositionSandwich => 1e-9,
            Property::SynthesisNormBound
            | Property::DualBounds
            | Property::Decomposition
            | Property::AtomicResolution
            | Property::ComposedDualPair
            | Property::TightLocalDual => 1e-8,
            Property::FramePredicate => 0.0,
        }
    }

    pub fn requires_frame(self) -> bool {
        matches!(
            self,
            Property::FrameSandwich
                | Property::DualBounds
                | Property::InverseSandwich
                | Property::Decomposition
                | Property::AtomicResolution
                | Property::CompositionSandwich
                | Property::ComposedDualPair
                | Property::TightLocalOperator
                | Property::TightLocalDual
        )
    }
}

/// Where the worst violation of a property was observed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub parameter: String,
    pub trial: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub property_id: String,
    pub basis: String,
    pub passed: bool,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub witness: Option<Witness>,
    /// Set when every trial skipped the property.
    pub skipped: Option<String>,
}

const NOT_A_FRAME: &str = "instance is not a frame; property needs frame bounds";

#[derive(Debug, Clone, Copy, Default)]
struct Worst {
    value: f64,
    label: Option<usize>,
}

impl Worst {
    fn update(&mut self, value: f64, label: usize) {
        // NaN must register as a failure
        if value > self.value || (value.is_nan() && !self.value.is_nan()) {
            self.value = value;
            self.label = Some(label);
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Outcome {
    Measured(Worst),
    Skipped,
}

fn rel_err(x: &DVector<Complex64>, target: &DVector<Complex64>) -> f64 {
    let scale = target.norm();
    let diff = (x - target).norm();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Random soft scalar with `|α(λ)| ≤ 1`.
fn random_unit_scalar(rng: &mut TrialRng, frame: &SoftGFrame) -> SoftComplex {
    let values = (0..frame.params().len())
        .map(|_| {
            let z = complex_gaussian(rng);
            z / z.norm().max(1.0)
        })
        .collect();
    SoftComplex::new(frame.params().clone(), values).expect("one value per parameter")
}

/// Rescales each parameter slice to Euclidean norm at most one.
fn clamp_unit(v: &SoftVector) -> SoftVector {
    SoftVector::from_parts_unchecked(
        v.params().clone(),
        v.dim(),
        v.values()
            .iter()
            .map(|x| x / Complex64::new(x.norm().max(1.0), 0.0))
            .collect(),
    )
}

struct Instance<'a> {
    frame: &'a SoftGFrame,
    cert: FrameBoundsCertificate,
    pair: Option<DualPair>,
    tol: f64,
}

impl<'a> Instance<'a> {
    fn new(frame: &'a SoftGFrame, tol: f64) -> Self {
        let cert = frame.frame_bounds(tol);
        let pair = if cert.is_frame {
            canonical_dual_checked(frame, tol)
        } else {
            None
        };
        Instance { frame, cert, pair, tol }
    }

    fn n_params(&self) -> usize {
        self.frame.params().len()
    }
}

fn canonical_dual_checked(frame: &SoftGFrame, tol: f64) -> Option<DualPair> {
    crate::dual::canonical_dual_with_tol(frame, tol).ok()
}

fn measure_soft_norm(inst: &Instance, rng: &mut TrialRng, probes: usize) -> Worst {
    let mut w = Worst::default();
    let n = inst.frame.ambient_dim();
    let params = inst.frame.params();
    let null_norm = SoftVector::null(params, n).norm();
    for (l, &v) in null_norm.values().iter().enumerate() {
        w.update(v, l);
    }
    for _ in 0..probes {
        let x = random_soft_vector(rng, params, n);
        let y = random_soft_vector(rng, params, n);
        let alpha = random_unit_scalar(rng, inst.frame);
        let nx = x.norm();
        let ny = y.norm();
        let nsum = x.add(&y).expect("same shape").norm();
        let nscaled = x.scale(&alpha).expect("same params").norm();
        for l in 0..inst.n_params() {
            w.update((-nx.get(l)).max(0.0), l);
            let a = alpha.get(l).norm();
            w.update(
                (nscaled.get(l) - a * nx.get(l)).abs() / (a * nx.get(l)).max(f64::MIN_POSITIVE),
                l,
            );
            w.update(
                (nsum.get(l) - nx.get(l) - ny.get(l)).max(0.0) / (nx.get(l) + ny.get(l)),
                l,
            );
        }
    }
    w
}

fn measure_inner_product(inst: &Instance, rng: &mut TrialRng, probes: usize) -> Worst {
    let mut w = Worst::default();
    let n = inst.frame.ambient_dim();
    let params = inst.frame.params();
    let theta = SoftVector::null(params, n);
    for (l, z) in theta.inner(&theta).expect("same shape").values().iter().enumerate() {
        w.update(z.norm(), l);
    }
    for _ in 0..probes {
        let x = clamp_unit(&random_soft_vector(rng, params, n));
        let y = clamp_unit(&random_soft_vector(rng, params, n));
        let z = clamp_unit(&random_soft_vector(rng, params, n));
        let alpha = random_unit_scalar(rng, inst.frame);
        let xy = x.inner(&y).expect("same shape");
        let yx = y.inner(&x).expect("same shape");
        let xx = x.inner(&x).expect("same shape");
        let xz = x.inner(&z).expect("same shape");
        let yz = y.inner(&z).expect("same shape");
        let lin = x
            .scale(&alpha)
            .and_then(|ax| ax.add(&y))
            .and_then(|v| v.inner(&z))
            .expect("same shape");
        let nx = x.norm();
        for l in 0..inst.n_params() {
            w.update((xy.get(l) - yx.get(l).conj()).norm(), l);
            w.update((lin.get(l) - (alpha.get(l) * xz.get(l) + yz.get(l))).norm(), l);
            w.update((-xx.get(l).re).max(0.0) + xx.get(l).im.abs(), l);
            w.update((xx.get(l).re - nx.get(l) * nx.get(l)).abs(), l);
        }
    }
    w
}

fn random_direct_sum(rng: &mut TrialRng, frame: &SoftGFrame) -> DirectSumSoftVector {
    let blocks: Vec<SoftVector> = frame
        .block_dims()
        .iter()
        .map(|&d| random_soft_vector(rng, frame.params(), d))
        .collect();
    DirectSumSoftVector::from_blocks(&blocks).expect("shared params")
}

fn measure_direct_sum(inst: &Instance, rng: &mut TrialRng, probes: usize) -> Worst {
    let mut w = Worst::default();
    for _ in 0..probes {
        let g = random_direct_sum(rng, inst.frame);
        let gg = g.inner(&g).expect("same shape");
        for l in 0..inst.n_params() {
            let blocks: f64 = g.at(l).iter().map(|b| b.norm_squared()).sum();
            w.update(
                (gg.get(l) - Complex64::new(blocks, 0.0)).norm() / blocks.max(f64::MIN_POSITIVE),
                l,
            );
        }
    }
    w
}

fn measure_adjoint(inst: &Instance, rng: &mut TrialRng, probes: usize) -> Worst {
    let mut w = Worst::default();
    let frame = inst.frame;
    for _ in 0..probes {
        let f = random_soft_vector(rng, frame.params(), frame.ambient_dim());
        let g = random_direct_sum(rng, frame);
        let lhs = frame
            .analysis(&f)
            .and_then(|a| a.inner(&g))
            .expect("shapes follow frame");
        let rhs = frame
            .synthesis(&g)
            .and_then(|s| f.inner(&s))
            .expect("shapes follow frame");
        for l in 0..inst.n_params() {
            let gn: f64 = g.at(l).iter().map(|b| b.norm_squared()).sum::<f64>().sqrt();
            let scale = 1.0 + f.at(l).norm() * gn;
            w.update((lhs.get(l) - rhs.get(l)).norm() / scale, l);
        }
    }
    w
}

fn measure_synthesis_norm(inst: &Instance) -> Worst {
    let mut w = Worst::default();
    let norms = inst.frame.synthesis_operator().operator_norm_upper();
    for l in 0..inst.n_params() {
        w.update((norms.get(l) - inst.cert.upper.get(l).max(0.0).sqrt()).max(0.0), l);
    }
    w
}

fn measure_oracle_operator(inst: &Instance) -> Worst {
    let mut w = Worst::default();
    let main = inst.frame.frame_operator();
    let oracle = oracle_frame_operator(inst.frame);
    for l in 0..inst.n_params() {
        let scale = max_abs(main.at(l)).max(1.0);
        w.update(max_abs(&(main.at(l) - oracle.at(l))) / scale, l);
    }
    w
}

fn measure_oracle_bounds(inst: &Instance) -> Worst {
    let mut w = Worst::default();
    let oracle = oracle_frame_bounds(inst.frame, inst.tol);
    for l in 0..inst.n_params() {
        let scale = inst.cert.upper.get(l).max(1.0);
        w.update((oracle.lower.get(l) - inst.cert.lower.get(l)).abs() / scale, l);
        w.update((oracle.upper.get(l) - inst.cert.upper.get(l)).abs() / scale, l);
    }
    w
}

fn measure_frame_predicate(inst: &Instance) -> Worst {
    let mut w = Worst::default();
    for l in 0..inst.n_params() {
        let (lo, hi) = (inst.cert.lower.get(l), inst.cert.upper.get(l));
        let v = if hi > 0.0 { (inst.tol - lo / hi).max(0.0) } else { 1.0 };
        // a value exactly at the threshold still fails the strict predicate
        let v = if v == 0.0 && lo <= inst.tol * hi {
            f64::MIN_POSITIVE
        } else {
            v
        };
        w.update(v, l);
    }
    w
}

fn measure_energy(inst: &Instance, rng: &mut TrialRng, probes: usize) -> Worst {
    let mut w = Worst::default();
    let frame = inst.frame;
    let s = frame.frame_operator();
    for _ in 0..probes {
        let f = random_soft_vector(rng, frame.params(), frame.ambient_dim());
        let energy = frame.frame_energy(&f).expect("shape");
        let sff = s.apply(&f).and_then(|sf| sf.inner(&f)).expect("shape");
        for l in 0..inst.n_params() {
            let nf2 = f.at(l).norm_squared();
            w.update((sff.get(l).re - energy.get(l)).abs() / (1.0 + nf2), l);
        }
    }
    w
}

fn measure_sandwich(inst: &Instance, rng: &mut TrialRng, probes: usize) -> Worst {
    let mut w = Worst::default();
    let frame = inst.frame;
    for _ in 0..probes {
        let f = random_soft_vector(rng, frame.params(), frame.ambient_dim());
        let energy = frame.frame_energy(&f).expect("shape");
        for l in 0..inst.n_params() {
            let nf2 = f.at(l).norm_squared();
            let lo = inst.cert.lower.get(l) * nf2;
            let hi = inst.cert.upper.get(l) * nf2;
            let e = energy.get(l);
            w.update((lo - e).max(0.0).max(e - hi) / hi.max(f64::MIN_POSITIVE), l);
        }
    }
    w
}

fn measure_dual_bounds(inst: &Instance, pair: &DualPair) -> Worst {
    let mut w = Worst::default();
    let dual_cert = pair.dual.frame_bounds(inst.tol);
    for l in 0..inst.n_params() {
        let want_lo = 1.0 / inst.cert.upper.get(l);
        let want_hi = 1.0 / inst.cert.lower.get(l);
        w.update((dual_cert.lower.get(l) - want_lo).abs() / want_lo, l);
        w.update((dual_cert.upper.get(l) - want_hi).abs() / want_hi, l);
    }
    w
}

fn measure_inverse_sandwich(inst: &Instance, pair: &DualPair, rng: &mut TrialRng, probes: usize) -> Worst {
    let mut w = Worst::default();
    let frame = inst.frame;
    for _ in 0..probes {
        let f = random_soft_vector(rng, frame.params(), frame.ambient_dim());
        let q = pair.s_inverse.apply(&f).and_then(|x| x.inner(&f)).expect("shape");
        for l in 0..inst.n_params() {
            let ratio = q.get(l).re / f.at(l).norm_squared();
            let lo = 1.0 / inst.cert.upper.get(l);
            let hi = 1.0 / inst.cert.lower.get(l);
            w.update((lo - ratio).max(0.0).max(ratio - hi) / hi, l);
        }
    }
    w
}

fn measure_decomposition(inst: &Instance, pair: &DualPair, rng: &mut TrialRng, probes: usize) -> Worst {
    let mut w = Worst::default();
    let cond = inst.cert.condition();
    let frame = inst.frame;
    for _ in 0..probes {
        let f = random_soft_vector(rng, frame.params(), frame.ambient_dim());
        for order in [ReconstructionOrder::DualInside, ReconstructionOrder::DualOutside] {
            let r = pair.reconstruct(&f, order).expect("shape");
            for l in 0..inst.n_params() {
                w.update(rel_err(r.at(l), f.at(l)) / cond.get(l), l);
            }
        }
    }
    w
}

fn measure_atomic(inst: &Instance, pair: &DualPair, rng: &mut TrialRng, probes: usize) -> Worst {
    let mut w = Worst::default();
    let cond = inst.cert.condition();
    let frame = inst.frame;
    let n = frame.ambient_dim();
    let t = random_soft_operator(rng, frame.params(), n, n);
    for _ in 0..probes {
        let f = random_soft_vector(rng, frame.params(), n);
        let tf = t.apply(&f).expect("shape");
        for side in [ResolutionSide::DualFirst, ResolutionSide::FrameFirst] {
            let r = pair.atomic_resolution(&t, &f, side).expect("shape");
            for l in 0..inst.n_params() {
                w.update(rel_err(r.at(l), tf.at(l)) / cond.get(l), l);
            }
        }
    }
    w
}

/// Random local frames with one vector more than each block dimension.
fn random_locals(rng: &mut TrialRng, frame: &SoftGFrame) -> Option<LocalFrameFamily> {
    let families = frame
        .block_dims()
        .iter()
        .map(|&d| random_local_family(rng, frame.params(), d, d + 1))
        .collect();
    LocalFrameFamily::new(families).ok()
}

fn measure_composition(inst: &Instance, pair: &DualPair, rng: &mut TrialRng, probes: usize) -> (Outcome, Outcome) {
    let frame = inst.frame;
    let Some(locals) = random_locals(rng, frame) else {
        return (Outcome::Skipped, Outcome::Skipped);
    };
    let Ok(local_duals) = locals.canonical_duals() else {
        return (Outcome::Skipped, Outcome::Skipped);
    };
    let composed = compose_frame(frame, &locals)
        .and_then(|c| c.as_gframe())
        .expect("shapes follow frame");
    let composed_dual = compose_frame(&pair.dual, &local_duals)
        .and_then(|c| c.as_gframe())
        .expect("shapes follow frame");
    let (env_lo, env_hi) = locals.envelope();
    let mut sandwich = Worst::default();
    let mut duality = Worst::default();
    for _ in 0..probes {
        let f = random_soft_vector(rng, frame.params(), frame.ambient_dim());
        let energy = composed.frame_energy(&f).expect("shape");
        let forward = resynthesize(&composed_dual, &composed, &f).expect("shape");
        let backward = resynthesize(&composed, &composed_dual, &f).expect("shape");
        for l in 0..inst.n_params() {
            let nf2 = f.at(l).norm_squared();
            let lo = env_lo.get(l) * inst.cert.lower.get(l) * nf2;
            let hi = env_hi.get(l) * inst.cert.upper.get(l) * nf2;
            let e = energy.get(l);
            sandwich.update((lo - e).max(0.0).max(e - hi) / hi.max(f64::MIN_POSITIVE), l);
            duality.update(rel_err(forward.at(l), f.at(l)), l);
            duality.update(rel_err(backward.at(l), f.at(l)), l);
        }
    }
    (Outcome::Measured(sandwich), Outcome::Measured(duality))
}

fn measure_tight_local(inst: &Instance, rng: &mut TrialRng) -> (Outcome, Outcome) {
    let frame = inst.frame;
    let bound = random_positive_soft_real(rng, frame.params(), 0.5, 2.0);
    let families = frame
        .block_dims()
        .iter()
        .map(|&d| {
            let extra = rng.random_range(0..=2);
            random_tight_family(rng, frame.params(), d, d + extra, &bound)
        })
        .collect();
    let Ok(locals) = LocalFrameFamily::new(families) else {
        return (Outcome::Skipped, Outcome::Skipped);
    };
    match tight_local_canonical_dual(frame, &locals) {
        Ok(res) => (
            Outcome::Measured(Worst {
                value: res.operator_defect,
                label: Some(0),
            }),
            Outcome::Measured(Worst {
                value: res.dual_defect,
                label: Some(0),
            }),
        ),
        Err(_) => (Outcome::Skipped, Outcome::Skipped),
    }
}

/// All properties on one instance, in [`Property::ALL`] order.
fn measure_instance(frame: &SoftGFrame, rng: &mut TrialRng, probes: usize, tol: f64) -> Vec<Outcome> {
    let inst = Instance::new(frame, tol);
    let mut out = vec![
        Outcome::Measured(measure_soft_norm(&inst, rng, probes)),
        Outcome::Measured(measure_inner_product(&inst, rng, probes)),
        Outcome::Measured(measure_direct_sum(&inst, rng, probes)),
        Outcome::Measured(measure_adjoint(&inst, rng, probes)),
        Outcome::Measured(measure_synthesis_norm(&inst)),
        Outcome::Measured(measure_oracle_operator(&inst)),
        Outcome::Measured(measure_oracle_bounds(&inst)),
        Outcome::Measured(measure_frame_predicate(&inst)),
        Outcome::Measured(measure_energy(&inst, rng, probes)),
    ];
    match inst.pair.as_ref() {
        Some(pair) => {
            out.push(Outcome::Measured(measure_sandwich(&inst, rng, probes)));
            out.push(Outcome::Measured(measure_dual_bounds(&inst, pair)));
            out.push(Outcome::Measured(measure_inverse_sandwich(&inst, pair, rng, probes)));
            out.push(Outcome::Measured(measure_decomposition(&inst, pair, rng, probes)));
            out.push(Outcome::Measured(measure_atomic(&inst, pair, rng, probes)));
            let (sandwich, duality) = measure_composition(&inst, pair, rng, probes);
            out.push(sandwich);
            out.push(duality);
            let (op, dual) = measure_tight_local(&inst, rng);
            out.push(op);
            out.push(dual);
        }
        None => out.extend(std::iter::repeat_n(Outcome::Skipped, 9)),
    }
    debug_assert_eq!(out.len(), Property::ALL.len());
    out
}

fn aggregate(labels: &[String], trials: Vec<Vec<Outcome>>) -> Vec<PropertyReport> {
    Property::ALL
        .iter()
        .enumerate()
        .map(|(p, &prop)| {
            let mut worst = Worst::default();
            let mut witness = None;
            let mut measured = 0usize;
            for (t, outcomes) in trials.iter().enumerate() {
                if let Outcome::Measured(w) = outcomes[p] {
                    measured += 1;
                    let before = worst.value;
                    if w.value > before || (w.value.is_nan() && !before.is_nan()) {
                        worst = w;
                        witness = w.label.map(|l| Witness {
                            parameter: labels[l].clone(),
                            trial: t,
                        });
                    }
                }
            }
            let tolerance = prop.tolerance();
            let skipped = (measured == 0).then(|| NOT_A_FRAME.to_string());
            PropertyReport {
                property_id: prop.id().to_string(),
                basis: prop.basis().to_string(),
                passed: worst.value <= tolerance,
                worst_violation: worst.value,
                tolerance,
                witness,
                skipped,
            }
        })
        .collect()
}

/// Runs every property on `trials` random instances of `model`.
pub fn run_suite(model: &RandomModel, trials: usize) -> Vec<PropertyReport> {
    run_suite_with(model, trials, Execution::default())
}

pub fn run_suite_with(model: &RandomModel, trials: usize, exec: Execution) -> Vec<PropertyReport> {
    assert!(trials >= 1, "at least one trial");
    exec.scope(|| {
        let outcomes = exec.map(trials, |t| {
            let mut rng = model.trial_rng(t);
            let frame = model.instance_from(&mut rng);
            measure_instance(&frame, &mut rng, model.probes, DEFAULT_FRAME_TOL)
        });
        aggregate(model.params.labels(), outcomes)
    })
}

/// Runs every property on one fixed frame; each trial draws fresh probes
/// and local frames from stream `t` of `seed`.
pub fn check_frame(frame: &SoftGFrame, trials: usize, seed: u64, tol: f64) -> Vec<PropertyReport> {
    check_frame_with(frame, trials, seed, tol, Execution::default())
}

pub fn check_frame_with(
    frame: &SoftGFrame,
    trials: usize,
    seed: u64,
    tol: f64,
    exec: Execution,
) -> Vec<PropertyReport> {
    assert!(trials >= 1, "at least one trial");
    exec.scope(|| {
        let outcomes = exec.map(trials, |t| {
            let mut rng = seeded_rng(seed, t as u64);
            measure_instance(frame, &mut rng, 1, tol)
        });
        aggregate(frame.params().labels(), outcomes)
    })
}

pub fn all_passed(reports: &[PropertyReport]) -> bool {
    reports.iter().all(|r| r.passed)
}

/// Canonical dual helper re-exported for the harness' callers.
pub fn dual_of(frame: &SoftGFrame) -> crate::error::Result<DualPair> {
    canonical_dual(frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::soft_core::ParameterSet;

    fn model() -> RandomModel {
        RandomModel::new(42, 3, vec![1, 2, 2, 1], ParameterSet::indexed(2).unwrap()).unwrap()
    }

    #[test]
    fn property_ids_are_unique() {
        let mut ids: Vec<_> = Property::ALL.iter().map(|p| p.id()).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), Property::ALL.len());
    }

    #[test]
    fn full_rank_model_passes_everything() {
        let reports = run_suite(&model(), 12);
        for r in &reports {
            assert!(r.passed, "{} failed: {:e}", r.property_id, r.worst_violation);
            assert!(r.skipped.is_none(), "{} skipped", r.property_id);
        }
    }

    #[test]
    fn rank_deficient_model_fails_frame_predicate_and_skips() {
        let reports = run_suite(&model().rank_deficient(), 4);
        let pred = reports.iter().find(|r| r.property_id == "frame_predicate").unwrap();
        assert!(!pred.passed);
        assert!(pred.witness.is_some());
        for r in reports.iter().filter(|r| {
            Property::ALL
                .iter()
                .any(|p| p.id() == r.property_id && p.requires_frame())
        }) {
            assert!(r.skipped.is_some());
            assert!(r.passed);
        }
        let energy = reports
            .iter()
            .find(|r| r.property_id == "frame_energy_identity")
            .unwrap();
        assert!(energy.passed && energy.skipped.is_none());
    }

    #[test]
    fn same_seed_same_reports() {
        let a = run_suite(&model(), 5);
        let b = run_suite(&model(), 5);
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let a = run_suite_with(&model(), 6, Execution::Sequential);
        let b = run_suite_with(&model(), 6, Execution::Parallel);
        assert_eq!(a, b);
    }

    #[test]
    fn check_frame_on_worked_example() {
        let p = ParameterSet::indexed(1).unwrap();
        let fr = SoftGFrame::induced_from_vectors(&[
            SoftVector::basis(&p, 2, 0),
            SoftVector::basis(&p, 2, 0),
            SoftVector::basis(&p, 2, 1),
        ])
        .unwrap();
        let reports = check_frame(&fr, 10, 42, DEFAULT_FRAME_TOL);
        assert!(all_passed(&reports));
    }
}
