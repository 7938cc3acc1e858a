use std::sync::Arc;

use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use modtrace_core::algebra::{series_in_a, AlgebraElement, SeriesOutcome, SeriesTail};
use modtrace_core::frames::{frame_identity_deviation, is_frame, pullback_frame, FrameOfMultipliers};
use modtrace_core::haagerup::{
    balanced_pair, factorize_trace_class, haagerup_norm, haagerup_upper, matrix_dual_lower,
    matrix_haagerup_upper, phi, psi_diagram_deviation, SearchOptions,
};
use modtrace_core::linalg::{herm_eig, op_norm, polar, sqrt_psd, trace_norm, CMatrix, C64};
use modtrace_core::module::{inclusion, AdjointableOperator, ModuleRef};
use modtrace_core::random::{self, random_element, random_frame, random_positive, random_projection_module};
use modtrace_core::spectrum::{Point, Spectrum};
use modtrace_core::traceclass::{
    conjugate_by_isometry, is_trace_class, pointwise_trace, trace_beta, trace_norm_module, TraceVerdict,
};

fn complex_matrix(max: usize) -> impl Strategy<Value = CMatrix> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), r * c).prop_map(move |v| {
            CMatrix::new(r, c, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap()
        })
    })
}

fn square_matrix(max: usize) -> impl Strategy<Value = CMatrix> {
    (1..=max).prop_flat_map(|n| {
        prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), n * n).prop_map(move |v| {
            CMatrix::new(n, n, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap()
        })
    })
}

fn hermitian(max: usize) -> impl Strategy<Value = CMatrix> {
    square_matrix(max).prop_map(|g| (&g + &g.adjoint()).scale_real(0.5))
}

/// A random projection-field module described by a seed.
fn module_from(seed: u64, points: usize, infinity: bool, d: usize) -> (ChaCha8Rng, ModuleRef) {
    let mut rng = random::rng(seed);
    let spectrum = Spectrum::numbered(points, infinity).unwrap();
    let m = random_projection_module(&mut rng, &spectrum, d).unwrap();
    (rng, m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn eigen_reconstructs(m in hermitian(6)) {
        let e = herm_eig(&m).unwrap();
        let err = (&e.reconstruct() - &m).max_abs();
        prop_assert!(err <= 1e-10 * (1.0 + op_norm(&m).unwrap()));
    }

    #[test]
    fn trace_norm_dominates_and_is_adjoint_invariant(m in complex_matrix(6)) {
        let t = trace_norm(&m).unwrap();
        prop_assert!(t >= op_norm(&m).unwrap() - 1e-12 * (1.0 + t));
        prop_assert!((t - trace_norm(&m.adjoint()).unwrap()).abs() <= 1e-10 * (1.0 + t));
    }

    #[test]
    fn polar_factors(m in square_matrix(6)) {
        let p = polar(&m).unwrap();
        let scale = 1.0 + op_norm(&m).unwrap();
        prop_assert!((&(&p.isometry * &p.modulus) - &m).max_abs() <= 1e-9 * scale);
        let v = &p.isometry;
        prop_assert!((&(&(v * &v.adjoint()) * v) - v).max_abs() <= 1e-9);
    }

    #[test]
    fn psd_root_squares_back(g in square_matrix(6)) {
        let m = &g.adjoint() * &g;
        let r = sqrt_psd(&m).unwrap();
        prop_assert!((&(&r * &r) - &m).max_abs() <= 1e-9 * (1.0 + op_norm(&m).unwrap()));
    }

    #[test]
    fn algebra_norm_axioms(
        a in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 4),
        b in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 4),
    ) {
        let s = Spectrum::numbered(3, true).unwrap();
        let mk = |v: &[(f64, f64)]| {
            AlgebraElement::new(
                s.clone(),
                v[..3].iter().map(|&(x, y)| C64::new(x, y)).collect(),
                Some(C64::new(v[3].0, v[3].1)),
            )
            .unwrap()
        };
        let (x, y) = (mk(&a), mk(&b));
        prop_assert!(x.add(&y).unwrap().norm() <= x.norm() + y.norm() + 1e-12);
        prop_assert!(x.mul(&y).unwrap().norm() <= x.norm() * y.norm() + 1e-12);
        let mut ideal = a.clone();
        ideal[3] = (0.0, 0.0);
        let inside = mk(&ideal);
        prop_assert!(inside.is_in_a());
        prop_assert!(inside.mul(&y).unwrap().is_in_a());
    }

    #[test]
    fn complete_series_is_the_plain_sum(
        terms in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 0..12),
    ) {
        let s = Spectrum::numbered(3, false).unwrap();
        let summands: Vec<_> = terms
            .iter()
            .map(|v| AlgebraElement::from_real(s.clone(), v, None).unwrap())
            .collect();
        let mut plain = AlgebraElement::zero(s.clone());
        for t in &summands {
            plain = plain.add(t).unwrap();
        }
        match series_in_a(&s, &summands, SeriesTail::Complete).unwrap() {
            SeriesOutcome::Converged(v) => prop_assert_eq!(v, plain),
            other => prop_assert!(false, "{:?}", other),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn localisation_is_functorial(seed in any::<u64>(), points in 1usize..4, d in 1usize..5) {
        let (mut rng, m) = module_from(seed, points, true, d);
        let t = random::random_operator(&mut rng, &m).unwrap();
        let r = random::random_operator(&mut rng, &m).unwrap();
        let tr = t.compose(&r).unwrap();
        let ta = t.adjoint();
        let mut best: f64 = 0.0;
        for p in m.spectrum().points() {
            let direct = t.matrix(p).unwrap() * r.matrix(p).unwrap();
            prop_assert!((&direct - tr.matrix(p).unwrap()).max_abs() <= 1e-10);
            prop_assert_eq!(ta.matrix(p).unwrap(), &t.matrix(p).unwrap().adjoint());
            best = best.max(op_norm(t.matrix(p).unwrap()).unwrap());
        }
        prop_assert_eq!(t.op_norm().unwrap(), best);
    }

    #[test]
    fn cauchy_schwarz(seed in any::<u64>(), points in 1usize..4, d in 1usize..5) {
        let (mut rng, m) = module_from(seed, points, false, d);
        let xi = random_element(&mut rng, &m).unwrap();
        let eta = random_element(&mut rng, &m).unwrap();
        let lhs = xi.inner(&eta).unwrap().norm();
        let rhs = xi.inner(&xi).unwrap().norm().sqrt() * eta.inner(&eta).unwrap().norm().sqrt();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
        for e in [&xi, &eta, &xi.add(&eta).unwrap(), &xi.scale(C64::new(0.0, 2.0))] {
            prop_assert!(e.is_in_module());
        }
        let t = random::random_operator(&mut rng, &m).unwrap();
        prop_assert!(t.apply(&xi).unwrap().is_in_module());
    }

    #[test]
    fn frames_reconstruct_and_agree_with_identity_form(
        seed in any::<u64>(), points in 1usize..4, d in 1usize..5, extra in 0usize..3,
    ) {
        let (mut rng, m) = module_from(seed, points, true, d);
        let f = random_frame(&mut rng, &m, d + extra).unwrap();
        let eta = random_element(&mut rng, &m).unwrap();
        prop_assert!(f.reconstruct(&eta).unwrap().distance(&eta).unwrap() <= 1e-8 * (1.0 + eta.norm()));

        let probes = FrameOfMultipliers::canonical(&m).unwrap();
        let good = frame_identity_deviation(f.members(), probes.members()).unwrap();
        prop_assert!(is_frame(&m, f.members()).unwrap().is_frame);
        prop_assert!(good <= 1e-8);
        // dropping a member breaks both forms whenever it carried weight somewhere
        let short = &f.members()[1..];
        let weight = f.members()[0].norm();
        if weight > 1e-3 {
            prop_assert!(!is_frame(&m, short).unwrap().is_frame);
            prop_assert!(frame_identity_deviation(short, probes.members()).unwrap() > 1e-8);
        }
    }

    #[test]
    fn pullback_along_isometries_is_a_frame(seed in any::<u64>(), points in 1usize..4, d in 1usize..5) {
        let (mut rng, m) = module_from(seed, points, true, d);
        let (ambient, theta) = inclusion(&m);
        let f = random_frame(&mut rng, &ambient, d + 1).unwrap();
        let back = pullback_frame(&theta, &f).unwrap();
        prop_assert!(is_frame(&m, back.members()).unwrap().is_frame);
    }

    #[test]
    fn positive_traces(seed in any::<u64>(), points in 1usize..4, d in 1usize..5) {
        let (mut rng, m) = module_from(seed, points, false, d);
        let t = random_positive(&mut rng, &m).unwrap();
        let frames = [FrameOfMultipliers::canonical(&m).unwrap(), random_frame(&mut rng, &m, d + 2).unwrap()];
        let pointwise = pointwise_trace(&t).unwrap().function;
        let mut values = Vec::new();
        for f in &frames {
            match trace_beta(&t, f).unwrap() {
                TraceVerdict::Defined(v) => {
                    prop_assert!(v.is_positive());
                    for p in m.spectrum().points() {
                        let gap = (v.value(p).unwrap() - pointwise.value(p).unwrap()).norm();
                        prop_assert!(gap <= 1e-9);
                    }
                    values.push(v);
                }
                other => prop_assert!(false, "{:?}", other),
            }
        }
        prop_assert!(values[0].distance(&values[1]).unwrap() <= 1e-8);
        prop_assert!(trace_norm_module(&t).unwrap() >= t.op_norm().unwrap() - 1e-10);
    }

    #[test]
    fn holder_inequality(seed in any::<u64>(), points in 1usize..4, d in 1usize..5) {
        let (mut rng, m) = module_from(seed, points, true, d);
        let r = random::random_operator(&mut rng, &m).unwrap();
        let s = random::random_operator(&mut rng, &m).unwrap();
        let lhs = trace_norm_module(&r.compose(&s).unwrap()).unwrap();
        let rhs = m
            .spectrum()
            .points()
            .map(|p| {
                let hs = |t: &AdjointableOperator| {
                    let x = t.matrix(p).unwrap();
                    (&x.adjoint() * x).trace().re.sqrt()
                };
                hs(&r) * hs(&s)
            })
            .fold(0.0, f64::max);
        prop_assert!(lhs <= rhs * (1.0 + 1e-10) + 1e-10);
    }

    #[test]
    fn conjugation_by_inclusion(seed in any::<u64>(), points in 1usize..4, d in 1usize..5, compact in any::<bool>()) {
        let (mut rng, m) = module_from(seed, points, true, d);
        let t = if compact {
            random_positive(&mut rng, &m).unwrap()
        } else {
            AdjointableOperator::identity(&m)
        };
        let (_, theta) = inclusion(&m);
        let big = conjugate_by_isometry(&t, &theta).unwrap();
        prop_assert_eq!(is_trace_class(&t).unwrap(), is_trace_class(&big).unwrap());
        let a = pointwise_trace(&t).unwrap().function;
        let b = pointwise_trace(&big).unwrap().function;
        prop_assert!(a.distance(&b).unwrap() <= 1e-9);
    }

    #[test]
    fn contraction_and_level_one(seed in any::<u64>(), points in 1usize..4, d in 1usize..4, terms in 0usize..4) {
        let (mut rng, m) = module_from(seed, points, true, d);
        let u = random::random_tensor(&mut rng, &m, terms).unwrap();
        let t = phi(&u).unwrap();
        let norm = trace_norm_module(&t).unwrap();
        prop_assert!(t.op_norm().unwrap() <= haagerup_upper(&u) + 1e-10);
        prop_assert_eq!(haagerup_norm(&u).unwrap(), norm);
        prop_assert!(haagerup_upper(&u) >= norm - 1e-7);
        let f = factorize_trace_class(&t, &FrameOfMultipliers::canonical(&m).unwrap()).unwrap();
        prop_assert!(haagerup_upper(&f) <= norm + 1e-7);
        prop_assert!(phi(&f).unwrap().distance(&t) <= 1e-8 * (1.0 + t.op_norm().unwrap()));
        prop_assert!(psi_diagram_deviation(&u).unwrap() <= 1e-12);
    }

    #[test]
    fn balanced_representatives(seed in any::<u64>(), points in 1usize..4, d in 1usize..4, terms in 1usize..4) {
        let (mut rng, m) = module_from(seed, points, true, d);
        let u = random::random_tensor(&mut rng, &m, terms).unwrap();
        let coeffs: Vec<_> = (0..terms)
            .map(|_| {
                let at_inf = C64::new(rng.random_range(-2.0..2.0), 0.0);
                AlgebraElement::from_fn(m.spectrum().clone(), |p| match p {
                    Point::Infinity => at_inf,
                    Point::Finite(_) => random::complex_normal(&mut rng),
                })
            })
            .collect();
        let (l, r) = balanced_pair(&u, &coeffs).unwrap();
        let (pl, pr) = (phi(&l).unwrap(), phi(&r).unwrap());
        prop_assert!(pl.distance(&pr) <= 1e-12 * (1.0 + pl.op_norm().unwrap()));
        let (nl, nr) = (haagerup_norm(&l).unwrap(), haagerup_norm(&r).unwrap());
        prop_assert!((nl - nr).abs() <= 1e-10 * (1.0 + nl));
        prop_assert!(pl.op_norm().unwrap() <= haagerup_upper(&l) + 1e-10);
        prop_assert!(pr.op_norm().unwrap() <= haagerup_upper(&r) + 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sandwich_is_ordered(seed in any::<u64>(), points in 1usize..3, d in 1usize..3, n in 1usize..3) {
        let (mut rng, m) = module_from(seed, points, false, d);
        let u = random::random_matrix_tensor(&mut rng, &m, n, 2).unwrap();
        let opts = SearchOptions { restarts: 3, seed, ..SearchOptions::default() };
        let upper = matrix_haagerup_upper(&u, &opts).unwrap().upper;
        let lower = matrix_dual_lower(&u, &opts).unwrap();
        prop_assert!(lower <= upper * (1.0 + 1e-12) + 1e-12);
    }
}

#[test]
fn spectrum_handles_are_shared() {
    let s = Spectrum::numbered(2, false).unwrap();
    let a = AlgebraElement::zero(s.clone());
    assert!(Arc::ptr_eq(a.spectrum(), &s));
}
