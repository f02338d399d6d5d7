use std::f64::consts::PI;

use proptest::prelude::*;

use symbell::bell_operator::{
    build_block, build_block_from, constants_from, max_quantum_violation, tridiagonal_angles_from, MeasurementPair,
    TwiceSpin, ViolationOptions,
};
use symbell::inequalities::{
    class_linear_form, class_r, generate_class, relabel_outcomes, BellInequality, ClassParams, Sign,
};
use symbell::polytope::{self, enumerate_all_tuples, enumerate_boundary_tuples, phi, phi_inverse, StrategyTuple};
use symbell::rational::int;
use symbell::robustness::{
    self, apply_error_model, inequality_in_spin_form, kappa_star, ErrorModel, KappaStar, SpinMomentSet,
};
use symbell::states::{self, GaussianParams, SymmetricState};
use symbell::{oracle, ExecMode};

fn tuple(max_n: u64) -> impl Strategy<Value = StrategyTuple> {
    (1..=max_n).prop_flat_map(|n| {
        (0..=n).prop_flat_map(move |a| {
            (0..=n - a)
                .prop_flat_map(move |b| (0..=n - a - b).prop_map(move |c| StrategyTuple::new(a, b, c, n - a - b - c)))
        })
    })
}

fn coeffs() -> impl Strategy<Value = [i64; 5]> {
    prop::array::uniform5(-6i64..=6).prop_filter("needs a two-body term", |c| c[2..].iter().any(|&x| x != 0))
}

fn inequality(n: u64, c: [i64; 5]) -> BellInequality {
    BellInequality::from_integers(n, [0, c[0], c[1], c[2], c[3], c[4]]).with_exact_bound()
}

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

fn class_params() -> impl Strategy<Value = (ClassParams, u64)> {
    (1..=5u64, 1..=5u64, 0..=4u64, sign(), sign(), 2..=30u64)
        .prop_map(|(x, y, mu, sigma, branch, n)| {
            (
                ClassParams {
                    x,
                    y,
                    mu,
                    sigma,
                    branch,
                },
                n,
            )
        })
        .prop_filter("valid parameters", |(p, n)| p.validate(*n).is_ok())
}

fn angles() -> impl Strategy<Value = MeasurementPair> {
    (0.0..2.0 * PI, 0.0..2.0 * PI).prop_map(|(p, t)| MeasurementPair::new(p, t))
}

fn symmetric_state(max_n: u64) -> impl Strategy<Value = SymmetricState> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(-1.0f64..1.0, n as usize + 1)
            .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
            .prop_map(move |v| SymmetricState::from_coeffs(n, v).normalized())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn phi_inverse_round_trip(t in tuple(50)) {
        prop_assert_eq!(phi_inverse(&phi(&t)).unwrap(), t);
        let s = phi(&t);
        let n = t.n() as i64;
        prop_assert_eq!(s.s00, s.s0 * s.s0 - n);
        prop_assert_eq!(s.s11, s.s1 * s.s1 - n);
        prop_assert!(s.within_local_bounds());
    }

    #[test]
    fn relabeling_negates_one_body_terms(t in tuple(40)) {
        let (s, r) = (phi(&t), phi(&t.relabeled()));
        prop_assert_eq!((r.s0, r.s1, r.s00, r.s01, r.s11), (-s.s0, -s.s1, s.s00, s.s01, s.s11));
    }

    #[test]
    fn boundary_minimum_is_global(n in 1..=30u64, c in coeffs()) {
        let q = BellInequality::from_integers(n, [0, c[0], c[1], c[2], c[3], c[4]]);
        let boundary = polytope::minimize_over_polytope(&q, n).value;
        prop_assert_eq!(&boundary, &oracle::all_tuples_minimum(&q));
        if n <= 6 {
            prop_assert_eq!(boundary, oracle::exhaustive_strategy_minimum(&q).unwrap());
        }
    }

    #[test]
    fn parallel_and_sequential_agree(n in 1..=60u64, c in coeffs()) {
        let q = BellInequality::from_integers(n, [0, c[0], c[1], c[2], c[3], c[4]]);
        prop_assert_eq!(
            polytope::minimize_over_polytope_with(&q, n, ExecMode::Parallel),
            polytope::minimize_over_polytope_with(&q, n, ExecMode::Sequential)
        );
    }

    #[test]
    fn relabeling_preserves_bound((p, n) in class_params()) {
        let q = generate_class(p, n).unwrap();
        let r = relabel_outcomes(&q);
        prop_assert_eq!(&r.beta_c, &q.beta_c);
        prop_assert_eq!(polytope::minimize_over_polytope(&r, n).value, polytope::minimize_over_polytope(&q, n).value);
    }

    #[test]
    fn class_quadratic_identity((p, n) in class_params()) {
        let q = generate_class(p, n).unwrap();
        let xy = (p.x * p.y) as i64;
        for t in enumerate_boundary_tuples(n) {
            let l = class_linear_form(p, &t);
            prop_assert_eq!(int(2) * q.value(&phi(&t)), int(l * l + 8 * xy * class_r(p, &t) as i64 - 1));
        }
    }

    #[test]
    fn tridiagonal_at_corollary_angles(n in 2..=200u64, c in coeffs(), kappa in 0.05..PI - 0.05) {
        let q = BellInequality::from_integers(n, [0, c[0], c[1], c[2], c[3], c[4]]);
        let k = q.coefficients();
        prop_assume!(k.delta * k.delta - k.gamma * k.epsilon >= 0.0);
        let Ok(thetas) = tridiagonal_angles_from(&k, kappa) else { return Ok(()) };
        for theta in thetas {
            let m = MeasurementPair::new(theta - kappa, theta);
            let block = build_block_from(0.0, &constants_from(&k, m), n, TwiceSpin::symmetric(n));
            let dmax = block.d.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let vmax = block.v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            prop_assert!(vmax <= 1e-12 * dmax.max(1.0), "max|v| = {vmax}, max|d| = {dmax}");
        }
    }

    #[test]
    fn dicke_diagonal_matches_dense(n in 2..=8u64, c in coeffs(), m in angles()) {
        let q = inequality(n, c);
        let block = build_block(&q, m, TwiceSpin::symmetric(n)).unwrap();
        let dense = oracle::dense_bell_operator(&q, m).unwrap();
        let scale = 1.0 + q.coefficients().beta_c.abs();
        for k in 0..=n {
            let psi = oracle::dicke_vector(n as u32, k as u32);
            let diff = (oracle::dense_expectation(&dense, &psi) - block.d[k as usize]).abs();
            prop_assert!(diff <= 1e-12 * scale, "k={k}: {diff}");
        }
    }

    #[test]
    fn block_projection_matches_dense(n in 2..=8u64, c in coeffs(), m in angles()) {
        let q = inequality(n, c);
        prop_assert!(oracle::block_projection_check(&q, m).unwrap() <= 1e-10 * (1.0 + q.coefficients().beta_c.abs()));
        let a = oracle::dense_bell_operator(&q, m).unwrap();
        let b = oracle::dense_bell_from_collective(&q, m).unwrap();
        prop_assert!((a - b).amax() <= 1e-10 * (1.0 + q.coefficients().beta_c.abs()));
    }

    #[test]
    fn reduced_density_is_a_state(s in symmetric_state(120)) {
        let rho = states::reduced_density(&s, 2).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() <= 1e-12);
        prop_assert!(rho.min_eigenvalue() >= -1e-10);
        prop_assert!(rho.max_asymmetry() <= 1e-12);
        let e = &rho.entries;
        prop_assert!((e[1][1] - e[2][2]).abs() <= 1e-12 && (e[1][1] - e[1][2]).abs() <= 1e-12);
        let one = states::reduced_density(&s, 1).unwrap();
        prop_assert!((one.trace() - 1.0).abs() <= 1e-12 && one.min_eigenvalue() >= -1e-10);
    }

    #[test]
    fn rho2_expectation_matches_block(s in symmetric_state(200), c in coeffs(), m in angles()) {
        let q = BellInequality::from_integers(s.n, [0, c[0], c[1], c[2], c[3], c[4]]);
        let rho = states::reduced_density(&s, 2).unwrap();
        let a = states::expectation_from_rho2(&q, m, &rho);
        let b = states::symmetric_expectation(&q, m, &s).unwrap();
        let nf = s.n as f64;
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + nf * nf));
    }

    #[test]
    fn spin_moments_match_dense(s in symmetric_state(8)) {
        let n = s.n as u32;
        let mut psi = vec![0.0; 1 << n];
        for k in 0..=n {
            let d = oracle::dicke_vector(n, k);
            for (p, x) in psi.iter_mut().zip(d) {
                *p += s.coeffs[k as usize] * x;
            }
        }
        let dense = oracle::dense_spin_moments(n, &psi).unwrap();
        let fast = SpinMomentSet::from_state(&s);
        for (a, b) in dense.iter().zip([fast.sz, fast.sx, fast.szz, fast.sxx, fast.sdd]) {
            prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn error_model_identity_and_monotonicity(
        s in symmetric_state(60), c in coeffs(), m in angles(), eta in 0.05..=1.0f64, k1 in 0.0..50.0f64, dk in 0.0..50.0f64,
    ) {
        let q = BellInequality::from_integers(s.n, [0, c[0], c[1], c[2], c[3], c[4]]).with_exact_bound();
        let moms = SpinMomentSet::from_state(&s);
        let same = apply_error_model(&moms, ErrorModel::IDEAL);
        prop_assert_eq!([same.sz, same.sx, same.szz, same.sxx, same.sdd], [moms.sz, moms.sx, moms.szz, moms.sxx, moms.sdd]);
        let form = inequality_in_spin_form(&q, m);
        let direct = states::symmetric_expectation(&q, m, &s).unwrap();
        prop_assert!((form.evaluate(&moms) - direct).abs() <= 1e-9 * (1.0 + q.coefficients().beta_c.abs()));
        if form.offset_slope() >= 0.0 {
            let lo = form.evaluate(&apply_error_model(&moms, ErrorModel::new(eta, k1).unwrap()));
            let hi = form.evaluate(&apply_error_model(&moms, ErrorModel::new(eta, k1 + dk).unwrap()));
            prop_assert!(hi >= lo - 1e-9 * (1.0 + lo.abs()));
        }
    }

    #[test]
    fn f_forms_are_exact(n in 2..=60u64, d in 1..=2u32, w in 0..=2u32, k in 0..=58u64) {
        prop_assume!(w <= d && k <= n - d as u64);
        prop_assert_eq!(states::f_form_exact(n, d, w, k), states::f_binomial(n, d, w, k));
    }
}

#[test]
fn boundary_image_is_injective() {
    for n in 1..=50u64 {
        let mut images: Vec<_> = enumerate_boundary_tuples(n).iter().map(|t| phi(t).as_array()).collect();
        let len = images.len();
        images.sort_unstable();
        images.dedup();
        assert_eq!(images.len(), len, "n = {n}");
    }
}

#[test]
fn all_tuples_round_trip_small_n() {
    for n in 1..=20u64 {
        for t in enumerate_all_tuples(n) {
            assert_eq!(phi_inverse(&phi(&t)).unwrap(), t);
        }
    }
}

#[test]
fn ghz_matches_classical_mixture() {
    for n in 3..=10u64 {
        for (i, c) in [[-2i64, 0, 1, -1, 1], [3, -1, 2, 1, -4], [0, 0, 0, 5, -3]]
            .into_iter()
            .enumerate()
        {
            let q = inequality(n, c);
            let m = MeasurementPair::new(0.3 + i as f64, 2.1 - 0.7 * i as f64);
            let block = build_block(&q, m, TwiceSpin::symmetric(n)).unwrap();
            let mut coeffs = vec![0.0; n as usize + 1];
            coeffs[0] = 1.0;
            coeffs[n as usize] = 1.0;
            let ghz = states::expectation(&SymmetricState::from_coeffs(n, coeffs).normalized(), &block).unwrap();
            let mixture = (block.d[0] + block.d[n as usize]) / 2.0;
            assert!(
                (ghz - mixture).abs() <= 1e-12 * (1.0 + q.coefficients().beta_c.abs()),
                "n = {n}"
            );
        }
    }
}

// Tridiagonal angle of the optimal frame, the fitted Gaussian and its fidelity.
#[test]
fn optimal_state_is_gaussian() {
    let reference = [
        (10u64, 2.6672, 0.4049, 1e-3),
        (100, 2.6334, 1.3935, 1e-3),
        (1000, 2.6231, 4.5109, 1e-3),
        (10_000, 2.6180, 14.379, 2e-3),
    ];
    for (n, theta_ref, sigma_ref, tol) in reference {
        let ex = BellInequality::example(n);
        let v = max_quantum_violation(&ex, &ViolationOptions::default()).unwrap();
        let (m, value, state) = states::tridiagonal_eigenstate(&ex, v.measurements.kappa()).unwrap();
        assert!((value - v.value).abs() <= 1e-8 * v.value.abs(), "n = {n}");
        assert!((m.theta - theta_ref).abs() <= tol, "n = {n}: θ = {}", m.theta);
        let fit = GaussianParams::fit(&state);
        assert!(
            (fit.sigma - sigma_ref).abs() <= 0.1 * sigma_ref,
            "n = {n}: σ = {}",
            fit.sigma
        );
        let mu = n as f64 / 2.0 + 1.0 / (4.0 * m.theta.cos());
        assert!((fit.mu - mu).abs() <= 0.05, "n = {n}: μ = {} vs {mu}", fit.mu);
        assert!(state.fidelity(&states::gaussian_state(n, fit)) >= 0.999, "n = {n}");
    }
}

// Offsets enter linearly, so κ*(η) = -(value at κ = 0) / slope. First moments are left alone by
// the error model: only states whose violation sits in the second moments lose tolerance as η
// drops. The Gaussian case violates through ⟨Sx⟩ and gains a little.
#[test]
fn kappa_star_follows_visibility() {
    let cases = [
        robustness::half_dicke_case(200, ExecMode::Parallel).unwrap(),
        robustness::gaussian_case(200).unwrap(),
    ];
    let mut trends = Vec::new();
    for case in &cases {
        let form = inequality_in_spin_form(&case.ineq, case.measurements);
        assert!((form.evaluate(&case.moments) - case.ideal_value).abs() <= 1e-9 * case.ineq.coefficients().beta_c);
        let mut ks = Vec::new();
        for eta in [1.0, 0.99, 0.97, 0.95, 0.9] {
            let k = match kappa_star(&form, &case.moments, eta).unwrap() {
                KappaStar::Finite(k) => k,
                other => panic!("η = {eta}: {other:?}"),
            };
            let at_zero = form.evaluate(&apply_error_model(&case.moments, ErrorModel::new(eta, 0.0).unwrap()));
            let expected = -at_zero / form.offset_slope();
            assert!((k - expected).abs() <= 1e-6 * expected, "η = {eta}: {k} vs {expected}");
            ks.push(k);
        }
        trends.push(ks);
    }
    assert!(trends[0].windows(2).all(|w| w[1] < w[0]), "half-Dicke: {:?}", trends[0]);
    assert!(trends[1].windows(2).all(|w| w[1] >= w[0]), "Gaussian: {:?}", trends[1]);
}
