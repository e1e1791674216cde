use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use soft_gframe::dual::{canonical_dual, ReconstructionOrder};
use soft_gframe::io::FrameSpec;
use soft_gframe::verify::oracle::{oracle_frame_bounds, oracle_frame_operator};
use soft_gframe::verify::random::{
    complex_gaussian, random_positive_soft_real, random_soft_operator, random_soft_vector, random_tight_family,
    seeded_rng, RandomModel,
};
use soft_gframe::{Execution, ParameterSet, SoftComplex, SoftGFrame, SoftOperator, DEFAULT_FRAME_TOL};

/// `(seed, n, block dims, |A|)` with the blocks able to span `C^n`.
fn shape() -> impl Strategy<Value = (u64, usize, Vec<usize>, usize)> {
    (any::<u64>(), 1usize..=5, 1usize..=3).prop_flat_map(|(seed, n, a)| {
        prop::collection::vec(1usize..=n, 1..=5).prop_map(move |mut dims| {
            let sum: usize = dims.iter().sum();
            dims[0] += n.saturating_sub(sum);
            (seed, n, dims, a)
        })
    })
}

fn frame_of((seed, n, dims, a): &(u64, usize, Vec<usize>, usize)) -> SoftGFrame {
    RandomModel::new(*seed, *n, dims.clone(), ParameterSet::indexed(*a).unwrap())
        .unwrap()
        .instance(0)
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_product_axioms(seed in any::<u64>(), dim in 1usize..6, a in 1usize..4) {
        let p = ParameterSet::indexed(a).unwrap();
        let mut rng = seeded_rng(seed, 0);
        let x = random_soft_vector(&mut rng, &p, dim);
        let y = random_soft_vector(&mut rng, &p, dim);
        let z = random_soft_vector(&mut rng, &p, dim);
        let alpha = SoftComplex::new(p.clone(), (0..a).map(|_| complex_gaussian(&mut rng)).collect()).unwrap();
        let xy = x.inner(&y).unwrap();
        let yx = y.inner(&x).unwrap();
        let lin = x.scale(&alpha).unwrap().add(&z).unwrap().inner(&y).unwrap();
        let zy = z.inner(&y).unwrap();
        for l in 0..a {
            prop_assert!((xy.get(l) - yx.get(l).conj()).norm() <= 1e-12 * (1.0 + xy.get(l).norm()));
            let want = alpha.get(l) * xy.get(l) + zy.get(l);
            prop_assert!((lin.get(l) - want).norm() <= 1e-12 * (1.0 + want.norm()));
            let xx = x.inner(&x).unwrap().get(l);
            prop_assert!(xx.re >= 0.0 && xx.im.abs() <= 1e-12 * xx.re);
        }
    }

    #[test]
    fn operator_adjoint_pairing(seed in any::<u64>(), m in 1usize..6, n in 1usize..6) {
        let p = ParameterSet::indexed(2).unwrap();
        let mut rng = seeded_rng(seed, 0);
        let op = random_soft_operator(&mut rng, &p, m, n);
        let f = random_soft_vector(&mut rng, &p, n);
        let g = random_soft_vector(&mut rng, &p, m);
        let lhs = op.apply(&f).unwrap().inner(&g).unwrap();
        let rhs = f.inner(&op.adjoint().apply(&g).unwrap()).unwrap();
        for l in 0..2 {
            let scale = 1.0 + f.at(l).norm() * g.at(l).norm() * max_abs(op.at(l));
            prop_assert!((lhs.get(l) - rhs.get(l)).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn inverse_frame_operator_is_an_inverse(s in shape()) {
        let fr = frame_of(&s);
        let op = fr.frame_operator();
        let inv = op.invert_hpd().unwrap();
        let cond = fr.frame_bounds(DEFAULT_FRAME_TOL).condition();
        let id = SoftOperator::identity(fr.params(), fr.ambient_dim());
        let prod = op.compose(&inv).unwrap();
        for l in 0..fr.params().len() {
            prop_assert!(max_abs(&(prod.at(l) - id.at(l))) <= 1e-10 * cond.get(l));
        }
    }

    #[test]
    fn operator_norm_is_submultiplicative(seed in any::<u64>(), k in 1usize..5, m in 1usize..5, n in 1usize..5) {
        let p = ParameterSet::indexed(2).unwrap();
        let mut rng = seeded_rng(seed, 0);
        let a = random_soft_operator(&mut rng, &p, k, m);
        let b = random_soft_operator(&mut rng, &p, m, n);
        let ab = a.compose(&b).unwrap().operator_norm_upper();
        let na = a.operator_norm_upper();
        let nb = b.operator_norm_upper();
        for l in 0..2 {
            prop_assert!(ab.get(l) <= na.get(l) * nb.get(l) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn scaling_covariance(s in shape(), factor in 0.1f64..10.0) {
        let fr = frame_of(&s);
        let p = fr.params().clone();
        let mut rng = seeded_rng(s.0, 99);
        let alpha = SoftComplex::new(p.clone(), (0..p.len()).map(|_| complex_gaussian(&mut rng) * factor).collect()).unwrap();
        let scaled = SoftGFrame::new(
            p.clone(),
            fr.ambient_dim(),
            fr.blocks().iter().map(|b| b.scale(&alpha).unwrap()).collect(),
        )
        .unwrap();
        let c = fr.frame_bounds(DEFAULT_FRAME_TOL);
        let cs = scaled.frame_bounds(DEFAULT_FRAME_TOL);
        let s0 = fr.frame_operator();
        let s1 = scaled.frame_operator();
        for l in 0..p.len() {
            let a2 = alpha.get(l).norm_sqr();
            prop_assert!(max_abs(&(s1.at(l) - s0.at(l) * Complex64::new(a2, 0.0))) <= 1e-10 * a2 * max_abs(s0.at(l)));
            prop_assert!((cs.upper.get(l) - a2 * c.upper.get(l)).abs() <= 1e-10 * a2 * c.upper.get(l));
            prop_assert!((cs.lower.get(l) - a2 * c.lower.get(l)).abs() <= 1e-10 * a2 * c.upper.get(l));
        }
    }

    #[test]
    fn dual_of_dual_is_the_frame(s in shape()) {
        let fr = frame_of(&s);
        let pair = canonical_dual(&fr).unwrap();
        let back = canonical_dual(&pair.dual).unwrap().dual;
        let cond = fr.frame_bounds(DEFAULT_FRAME_TOL).condition();
        for (b0, b1) in fr.blocks().iter().zip(back.blocks()) {
            for l in 0..fr.params().len() {
                let scale = max_abs(b0.at(l)).max(f64::MIN_POSITIVE);
                prop_assert!(max_abs(&(b1.at(l) - b0.at(l))) <= 1e-8 * scale * cond.get(l));
            }
        }
    }

    #[test]
    fn tight_frame_dual_is_rescaled_frame(seed in any::<u64>(), dim in 1usize..5, extra in 0usize..3) {
        let p = ParameterSet::indexed(2).unwrap();
        let mut rng = seeded_rng(seed, 0);
        let bound = random_positive_soft_real(&mut rng, &p, 0.5, 3.0);
        let fr = SoftGFrame::induced_from_vectors(&random_tight_family(&mut rng, &p, dim, dim + extra, &bound)).unwrap();
        let cert = fr.frame_bounds(DEFAULT_FRAME_TOL);
        prop_assert!(cert.is_tight);
        let pair = canonical_dual(&fr).unwrap();
        for (b, d) in fr.blocks().iter().zip(pair.dual.blocks()) {
            for l in 0..2 {
                let want = b.at(l) / Complex64::new(bound.get(l), 0.0);
                prop_assert!(max_abs(&(d.at(l) - &want)) <= 1e-10 * (1.0 + max_abs(&want)));
            }
        }
    }

    #[test]
    fn oracle_agrees_with_block_sums(s in shape()) {
        let fr = frame_of(&s);
        let main = fr.frame_operator();
        let oracle = oracle_frame_operator(&fr);
        for l in 0..fr.params().len() {
            prop_assert!(max_abs(&(main.at(l) - oracle.at(l))) <= 1e-12 * (1.0 + max_abs(main.at(l))));
        }
        let c = fr.frame_bounds(DEFAULT_FRAME_TOL);
        let o = oracle_frame_bounds(&fr, DEFAULT_FRAME_TOL);
        prop_assert_eq!(c.is_frame, o.is_frame);
        for l in 0..fr.params().len() {
            prop_assert!((c.lower.get(l) - o.lower.get(l)).abs() <= 1e-10 * (1.0 + c.upper.get(l)));
            prop_assert!((c.upper.get(l) - o.upper.get(l)).abs() <= 1e-10 * (1.0 + c.upper.get(l)));
        }
    }

    #[test]
    fn reconstruction_orders_agree(s in shape()) {
        let fr = frame_of(&s);
        let pair = canonical_dual(&fr).unwrap();
        let cond = fr.frame_bounds(DEFAULT_FRAME_TOL).condition();
        let mut rng = seeded_rng(s.0, 7);
        let f = random_soft_vector(&mut rng, fr.params(), fr.ambient_dim());
        let a = pair.reconstruct(&f, ReconstructionOrder::DualInside).unwrap();
        let b = pair.reconstruct(&f, ReconstructionOrder::DualOutside).unwrap();
        for l in 0..fr.params().len() {
            prop_assert!((a.at(l) - b.at(l)).norm() <= 1e-9 * cond.get(l) * f.at(l).norm());
        }
    }

    #[test]
    fn induced_energy_is_sum_of_squared_coefficients(seed in any::<u64>(), dim in 1usize..5, count in 1usize..7) {
        let p = ParameterSet::indexed(2).unwrap();
        let mut rng = seeded_rng(seed, 0);
        let vectors: Vec<_> = (0..count).map(|_| random_soft_vector(&mut rng, &p, dim)).collect();
        let fr = SoftGFrame::induced_from_vectors(&vectors).unwrap();
        let f = random_soft_vector(&mut rng, &p, dim);
        let energy = fr.frame_energy(&f).unwrap();
        for l in 0..2 {
            let want: f64 = vectors.iter().map(|v| f.inner(v).unwrap().get(l).norm_sqr()).sum();
            prop_assert!((energy.get(l) - want).abs() <= 1e-12 * (1.0 + want));
        }
    }

    #[test]
    fn spec_round_trip_is_exact(s in shape()) {
        let fr = frame_of(&s);
        let spec = FrameSpec::new(fr.clone()).with_certificate(fr.frame_bounds(DEFAULT_FRAME_TOL));
        let back = FrameSpec::from_json_str(&spec.to_json_string()).unwrap();
        prop_assert_eq!(back, spec);
    }

    #[test]
    fn execution_strategies_agree(s in shape()) {
        let fr = frame_of(&s);
        let seq = Execution::Sequential.scope(|| {
            (fr.frame_bounds_with(DEFAULT_FRAME_TOL, Execution::Sequential), fr.is_exact_with(DEFAULT_FRAME_TOL, Execution::Sequential).unwrap())
        });
        let par = (fr.frame_bounds_with(DEFAULT_FRAME_TOL, Execution::Parallel), fr.is_exact_with(DEFAULT_FRAME_TOL, Execution::Parallel).unwrap());
        prop_assert_eq!(seq, par);
    }
}
