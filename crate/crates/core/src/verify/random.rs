//! Seeded random instances: complex Gaussian entries with unit variance.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, SoftError};
use crate::gframe::{SoftGFrame, DEFAULT_FRAME_TOL};
use crate::operators::SoftOperator;
use crate::soft_core::{ParameterSet, SoftReal, SoftVector};

pub type TrialRng = ChaCha8Rng;

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<Complex64> {
    // column-major fill order keeps the stream layout independent of nalgebra internals
    let data: Vec<Complex64> = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    DMatrix::from_vec(rows, cols, data)
}

pub fn random_soft_vector<R: Rng + ?Sized>(rng: &mut R, params: &ParameterSet, dim: usize) -> SoftVector {
    let values = (0..params.len())
        .map(|_| DVector::from_iterator(dim, (0..dim).map(|_| complex_gaussian(rng))))
        .collect();
    SoftVector::from_parts_unchecked(params.clone(), dim, values)
}

pub fn random_soft_operator<R: Rng + ?Sized>(
    rng: &mut R,
    params: &ParameterSet,
    rows: usize,
    cols: usize,
) -> SoftOperator {
    let values = (0..params.len()).map(|_| random_matrix(rng, rows, cols)).collect();
    SoftOperator::from_parts_unchecked(params.clone(), rows, cols, values)
}

/// Uniform in `[lo, hi)` per parameter.
pub fn random_positive_soft_real<R: Rng + ?Sized>(rng: &mut R, params: &ParameterSet, lo: f64, hi: f64) -> SoftReal {
    SoftReal::from_fn(params, |_| rng.random_range(lo..hi))
}

/// `count ≥ dim` random vectors in `C^dim` (a frame almost surely).
pub fn random_local_family<R: Rng + ?Sized>(
    rng: &mut R,
    params: &ParameterSet,
    dim: usize,
    count: usize,
) -> Vec<SoftVector> {
    (0..count).map(|_| random_soft_vector(rng, params, dim)).collect()
}

/// `count ≥ dim` vectors forming a tight frame for `C^dim` with bound
/// `bound(λ)`: the scaled columns of `Q*` for a random isometry `Q`.
pub fn random_tight_family<R: Rng + ?Sized>(
    rng: &mut R,
    params: &ParameterSet,
    dim: usize,
    count: usize,
    bound: &SoftReal,
) -> Vec<SoftVector> {
    assert!(count >= dim, "a tight frame for C^{dim} needs at least {dim} vectors");
    let per_param: Vec<DMatrix<Complex64>> = (0..params.len())
        .map(|l| {
            let q = random_matrix(rng, count, dim).qr().q();
            q.adjoint() * Complex64::new(bound.get(l).sqrt(), 0.0)
        })
        .collect();
    (0..count)
        .map(|k| {
            SoftVector::from_parts_unchecked(
                params.clone(),
                dim,
                per_param.iter().map(|m| m.column(k).into_owned()).collect(),
            )
        })
        .collect()
}

/// Whether generated frames must be frames or must fail to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generation {
    /// Guaranteed frame: if a draw falls short, a multiple of the stacked
    /// identity is added until the frame predicate holds.
    FullRank,
    /// Every block annihilates the last coordinate, so `S` is singular.
    RankDeficient,
}

/// Shape, parameters and seed of a family of random g-frames.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomModel {
    pub seed: u64,
    pub ambient_dim: usize,
    pub block_dims: Vec<usize>,
    pub params: ParameterSet,
    pub generation: Generation,
    /// Random probe vectors drawn per trial.
    pub probes: usize,
}

impl RandomModel {
    pub fn new(seed: u64, ambient_dim: usize, block_dims: Vec<usize>, params: ParameterSet) -> Result<Self> {
        if ambient_dim == 0 || block_dims.is_empty() || block_dims.contains(&0) {
            return Err(SoftError::Precondition(
                "random model needs positive dimensions and at least one block".into(),
            ));
        }
        if block_dims.iter().sum::<usize>() < ambient_dim {
            return Err(SoftError::Precondition(format!(
                "blocks {block_dims:?} cannot span dimension {ambient_dim}"
            )));
        }
        Ok(RandomModel {
            seed,
            ambient_dim,
            block_dims,
            params,
            generation: Generation::FullRank,
            probes: 8,
        })
    }

    /// A random shape with `n ≤ max_n`, `J ≤ max_blocks`, `|A| ≤ max_params`
    /// and block dimensions at most `n`, drawn from `seed`.
    pub fn random_shape(seed: u64, max_n: usize, max_blocks: usize, max_params: usize) -> Self {
        let mut rng = seeded_rng(seed, u64::MAX);
        let n = rng.random_range(1..=max_n);
        let j = rng.random_range(1..=max_blocks);
        let mut dims: Vec<usize> = (0..j).map(|_| rng.random_range(1..=n)).collect();
        // dims[0] + (n - sum) ≤ n since sum ≥ dims[0]
        dims[0] += n.saturating_sub(dims.iter().sum());
        let a = rng.random_range(1..=max_params);
        Self::new(seed, n, dims, ParameterSet::indexed(a).expect("non-empty")).expect("shape spans by construction")
    }

    pub fn rank_deficient(mut self) -> Self {
        self.generation = Generation::RankDeficient;
        self
    }

    pub fn with_probes(mut self, probes: usize) -> Self {
        self.probes = probes;
        self
    }

    /// Generator for trial `trial`; the instance is drawn first, probes after.
    pub fn trial_rng(&self, trial: usize) -> TrialRng {
        seeded_rng(self.seed, trial as u64)
    }

    pub fn instance(&self, trial: usize) -> SoftGFrame {
        self.instance_from(&mut self.trial_rng(trial))
    }

    pub fn instance_from<R: Rng + ?Sized>(&self, rng: &mut R) -> SoftGFrame {
        let n = self.ambient_dim;
        let mut blocks: Vec<SoftOperator> = self
            .block_dims
            .iter()
            .map(|&d| random_soft_operator(rng, &self.params, d, n))
            .collect();
        match self.generation {
            Generation::RankDeficient => {
                for b in &mut blocks {
                    let values = b
                        .values()
                        .iter()
                        .map(|m| {
                            let mut m = m.clone();
                            m.column_mut(n - 1).fill(Complex64::new(0.0, 0.0));
                            m
                        })
                        .collect();
                    *b = SoftOperator::from_parts_unchecked(self.params.clone(), b.rows(), n, values);
                }
                SoftGFrame::new(self.params.clone(), n, blocks).expect("valid shape")
            }
            Generation::FullRank => {
                let mut frame = SoftGFrame::new(self.params.clone(), n, blocks.clone()).expect("valid shape");
                let mut eps = 1.0;
                while !frame.frame_bounds(DEFAULT_FRAME_TOL).is_frame {
                    add_stacked_identity(&mut blocks, &self.params, n, eps);
                    frame = SoftGFrame::new(self.params.clone(), n, blocks.clone()).expect("valid shape");
                    eps *= 2.0;
                }
                frame
            }
        }
    }
}

/// Adds `eps` times `[I_n; 0]` to the vertically stacked blocks.
fn add_stacked_identity(blocks: &mut [SoftOperator], params: &ParameterSet, n: usize, eps: f64) {
    let mut row = 0;
    for b in blocks.iter_mut() {
        let d = b.rows();
        let values = b
            .values()
            .iter()
            .map(|m| {
                let mut m = m.clone();
                for r in 0..d {
                    let global = row + r;
                    if global < n {
                        m[(r, global)] += Complex64::new(eps, 0.0);
                    }
                }
                m
            })
            .collect();
        *b = SoftOperator::from_parts_unchecked(params.clone(), d, n, values);
        row += d;
    }
}
