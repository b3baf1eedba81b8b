mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use aewl::cmath::{is_unitary, j_operator, omega, tensor2x2, tensor_outer_columns, Matrix2};
use aewl::engine::{evolve, evolve_with, EngineConfig, EvolutionPath, Outcome, StrategyParams};
use aewl::equilibrium::{
    best_response, enumerate_2x2_pure_ne, find_equilibria_among, find_pure_grid_equilibria,
    pareto_filter, StrategyGrid, EQUILIBRIUM_TOL,
};
use aewl::games::{expected_payoffs, PayoffMatrix, PdParams};
use proptest::prelude::*;

fn theta() -> impl Strategy<Value = f64> {
    0.0..=PI
}

fn phi() -> impl Strategy<Value = f64> {
    0.0..=FRAC_PI_2
}

fn gamma() -> impl Strategy<Value = f64> {
    0.0..=FRAC_PI_2
}

fn params() -> impl Strategy<Value = StrategyParams> {
    (theta(), phi()).prop_map(|(t, p)| StrategyParams::new(t, p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn omega_is_unitary(t in theta(), p in phi()) {
        prop_assert!(is_unitary(&omega(t, p).unwrap(), 1e-9));
    }

    #[test]
    fn j_is_unitary(g in gamma()) {
        prop_assert!(is_unitary(&j_operator(g).unwrap(), 1e-9));
    }

    #[test]
    fn outer_columns_match_full_product(a in params(), b in params()) {
        let (oa, ob) = (a.operator(), b.operator());
        let full = tensor2x2(&oa, &ob);
        let (left, right) = tensor_outer_columns(&oa, &ob);
        prop_assert!(left.max_abs_diff(&full.column(0)) <= 1e-12);
        prop_assert!(right.max_abs_diff(&full.column(3)) <= 1e-12);
    }

    #[test]
    fn shortcut_matches_full_path_and_oracle(a in params(), b in params(), g in gamma()) {
        let cfg = EngineConfig::new(g, 0).unwrap();
        let short = evolve_with(&a, &b, &cfg, EvolutionPath::Shortcut);
        let full = evolve_with(&a, &b, &cfg, EvolutionPath::FullMatrix);
        prop_assert!(short.max_abs_diff(&full) <= 1e-12);
        let oracle = common::delta((a.theta(), a.phi()), (b.theta(), b.phi()), g);
        prop_assert!(common::max_diff(&short.probs(), &oracle) <= 1e-12);
    }

    #[test]
    fn distribution_is_normalized(a in params(), b in params(), g in gamma()) {
        let d = evolve(&a, &b, &EngineConfig::new(g, 0).unwrap());
        let total: f64 = d.probs().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
        prop_assert!(d.probs().iter().all(|p| *p >= 0.0));
    }

    #[test]
    fn phases_irrelevant_without_entanglement(t1 in theta(), t2 in theta(), p1 in phi(), p2 in phi(), q1 in phi(), q2 in phi()) {
        let cfg = EngineConfig::new(0.0, 0).unwrap();
        let a = evolve(&StrategyParams::new(t1, p1).unwrap(), &StrategyParams::new(t2, p2).unwrap(), &cfg);
        let b = evolve(&StrategyParams::new(t1, q1).unwrap(), &StrategyParams::new(t2, q2).unwrap(), &cfg);
        prop_assert!(a.max_abs_diff(&b) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kronecker_mixed_product(a in params(), b in params(), c in params(), d in params()) {
        let (a, b, c, d) = (a.operator(), b.operator(), c.operator(), d.operator());
        let lhs = tensor2x2(&a, &b) * tensor2x2(&c, &d);
        let rhs = tensor2x2(&(a * c), &(b * d));
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9);
    }

    #[test]
    fn classical_embedding_is_deterministic(g in gamma(), k in 0usize..4) {
        let pick = |flip: bool| if flip { StrategyParams::FLIP } else { StrategyParams::IDENTITY };
        let outcome = Outcome::from_index(k);
        let s1 = pick(outcome.coin1 == aewl::engine::Coin::D);
        let s2 = pick(outcome.coin2 == aewl::engine::Coin::D);
        let d = evolve(&s1, &s2, &EngineConfig::new(g, 0).unwrap());
        prop_assert_eq!(d.degenerate_outcome(1e-9), Some(outcome));
    }

    #[test]
    fn pareto_filter_never_empty(pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..30)) {
        let items: Vec<(usize, (f64, f64))> = pairs.into_iter().enumerate().collect();
        let kept = pareto_filter(&items).unwrap();
        prop_assert!(!kept.is_empty());
        for (_, p) in &kept {
            prop_assert!(!items.iter().any(|(_, q)| q.0 >= p.0 && q.1 >= p.1 && (q.0 > p.0 || q.1 > p.1)));
        }
    }

    #[test]
    fn best_response_invariant_under_affine_payoffs(opp in params(), a in 0.1f64..10.0, b in -10.0f64..10.0) {
        let m = PayoffMatrix::canonical();
        let g = StrategyGrid::new(9, 5).unwrap();
        let cfg = EngineConfig::default();
        let (s, v) = best_response(&opp, &m, &cfg, &g);
        let (s2, v2) = best_response(&opp, &m.affine(a, b), &cfg, &g);
        prop_assert_eq!(s, s2);
        prop_assert!((v2 - (a * v + b)).abs() < 1e-9 * (1.0 + a.abs() + b.abs()));
    }

    #[test]
    fn refining_grid_never_lowers_best_response(opp in params(), g in gamma()) {
        let m = PayoffMatrix::canonical();
        let cfg = EngineConfig::new(g, 0).unwrap();
        let mut last = f64::NEG_INFINITY;
        // 3x2 ⊂ 5x3 ⊂ 9x5 ⊂ 17x9: each grid contains the previous one's points
        for (nt, np) in [(3, 2), (5, 3), (9, 5), (17, 9)] {
            let (_, v) = best_response(&opp, &m, &cfg, &StrategyGrid::new(nt, np).unwrap());
            prop_assert!(v >= last - 1e-12);
            last = v;
        }
    }

    #[test]
    fn embedded_restriction_matches_classical_ne(g in gamma(), t in 1.0f64..10.0, r in 0.5f64..1.0, p in 0.1f64..0.5) {
        // generic PD with distinct cells (T > R > P > S = 0, R > T/2)
        let pd = PdParams { t, r: r * t, p: p * r * t, s: 0.0 };
        prop_assume!(pd.satisfies_pd());
        let m = PayoffMatrix::pd(pd);
        let cfg = EngineConfig::new(g, 0).unwrap();
        let reports = find_equilibria_among(vec![StrategyParams::IDENTITY, StrategyParams::FLIP], &m, &cfg, EQUILIBRIUM_TOL);
        let as_index = |s: &StrategyParams| usize::from(*s == StrategyParams::FLIP);
        let found: Vec<(usize, usize)> = reports.iter().map(|r| (as_index(&r.profile.0), as_index(&r.profile.1))).collect();
        prop_assert_eq!(found, enumerate_2x2_pure_ne(&m));
    }
}

#[test]
fn equilibrium_sets_are_symmetric() {
    let m = PayoffMatrix::canonical();
    let g = StrategyGrid::new(9, 5).unwrap();
    for gamma in [0.0, 0.4, 1.0, FRAC_PI_2] {
        let cfg = EngineConfig::new(gamma, 0).unwrap();
        let reports = find_pure_grid_equilibria(&m, &cfg, &g, EQUILIBRIUM_TOL);
        assert!(!reports.is_empty(), "gamma {gamma}");
        for r in &reports {
            let (a, b) = r.profile;
            assert!(
                reports.iter().any(|q| q.profile == (b, a)),
                "gamma {gamma}: mirror of {a:?},{b:?} missing"
            );
        }
    }
}

#[test]
fn equilibria_invariant_under_affine_payoffs() {
    let m = PayoffMatrix::canonical();
    let g = StrategyGrid::new(9, 5).unwrap();
    for gamma in [0.0, FRAC_PI_2] {
        let cfg = EngineConfig::new(gamma, 0).unwrap();
        let base: Vec<_> = find_pure_grid_equilibria(&m, &cfg, &g, EQUILIBRIUM_TOL)
            .into_iter()
            .map(|r| r.profile)
            .collect();
        let scaled: Vec<_> =
            find_pure_grid_equilibria(&m.affine(2.5, -1.0), &cfg, &g, EQUILIBRIUM_TOL)
                .into_iter()
                .map(|r| r.profile)
                .collect();
        assert_eq!(base, scaled);
    }
}

#[test]
fn expected_payoffs_agree_with_oracle() {
    let m = PayoffMatrix::canonical();
    let cfg = EngineConfig::new(1.1, 0).unwrap();
    let a = StrategyParams::new(0.9, 0.2).unwrap();
    let b = StrategyParams::new(2.0, 1.3).unwrap();
    let got = expected_payoffs(&m, &evolve(&a, &b, &cfg));
    let want = common::expect(
        &common::delta((0.9, 0.2), (2.0, 1.3), 1.1),
        [3.0, 0.0, 5.0, 1.0],
        [3.0, 5.0, 0.0, 1.0],
    );
    assert!((got.0 - want.0).abs() < 1e-12 && (got.1 - want.1).abs() < 1e-12);
}

#[test]
fn three_param_family_is_unitary() {
    for k in 0..50 {
        let x = k as f64 / 49.0;
        let op: Matrix2 =
            aewl::cmath::omega_extended(PI * x, FRAC_PI_2 * (1.0 - x), FRAC_PI_2 * x).unwrap();
        assert!(is_unitary(&op, 1e-9));
    }
}
