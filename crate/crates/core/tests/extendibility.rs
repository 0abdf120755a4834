use fermigauss::bounds::{bosonic_strategy_lower_bound, family_cm};
use fermigauss::channels;
use fermigauss::extend::{self, ExtendQuery, FeasibilityResult, Lemma, Status};
use fermigauss::fgs::{self, BipartiteCM};
use fermigauss::random;
use fermigauss::sdp::SolverOptions;
use fermigauss::sweep::{self, Exec};
use fermigauss::Tolerances;

fn solve(b: &BipartiteCM, k1: usize, k2: usize) -> FeasibilityResult {
    let q = ExtendQuery::new(b.clone(), k1, k2).unwrap();
    extend::feasibility(&q, &Tolerances::default(), &SolverOptions::default()).unwrap()
}

#[test]
fn feasibility_is_monotone_down_the_hierarchy() {
    // Feasible at (k1, k2) implies feasible at every smaller pair.
    let b = family_cm(3, 2);
    for (k1, k2) in [(3, 2), (2, 2), (3, 1), (1, 2), (1, 1)] {
        assert!(solve(&b, k1, k2).status.is_feasible(), "({k1},{k2})");
    }
}

#[test]
fn feasible_results_obey_the_cross_correlation_bound() {
    let mut r = random::rng(21);
    let tol = Tolerances::default();
    for _ in 0..20 {
        let b = BipartiteCM::new(random::random_cm(&mut r, 2), 1, 1).unwrap();
        for (k1, k2) in [(1, 2), (2, 1), (2, 2)] {
            let res = solve(&b, k1, k2);
            if res.status.is_feasible() {
                let q = ExtendQuery::new(b.clone(), k1, k2).unwrap();
                assert!(extend::precheck_cross_correlation(&q, &tol).is_none());
            }
        }
    }
}

#[test]
fn product_states_extend_to_any_order() {
    let mut r = random::rng(5);
    let p = fgs::product_cm(&random::random_cm(&mut r, 1), &random::random_cm(&mut r, 1));
    for k in [1, 2, 5, 10, 20] {
        let res = solve(&p, k, k);
        assert!(res.status.is_feasible(), "k = {k}: {:?}", res.status);
    }
}

#[test]
fn certificates_appear_once_the_cross_bound_fails() {
    // For M(1,1) the cross block has singular value 1, so any k1 k2 > 4
    // violates X^T X <= 4/(k1 k2).
    let b = family_cm(1, 1);
    let tol = Tolerances::default();
    for (k1, k2) in [(5, 1), (1, 5), (3, 2), (3, 3)] {
        let q = ExtendQuery::new(b.clone(), k1, k2).unwrap();
        let c = extend::precheck_cross_correlation(&q, &tol).expect("certificate");
        assert_eq!(c.lemma, Lemma::CrossCorrelation);
        assert_eq!(solve(&b, k1, k2).status, Status::InfeasibleCertified);
    }
}

#[test]
fn extensions_reproduce_every_pair() {
    let tol = Tolerances::default();
    let b = family_cm(3, 2);
    let q = ExtendQuery::new(b.clone(), 3, 2).unwrap();
    let res = extend::feasibility(&q, &tol, &SolverOptions::default()).unwrap();
    let ext = extend::build_extension(&q, &res, &tol).unwrap();
    assert_eq!(ext.modes(), 5);
    assert!(extend::is_block_symmetric(&ext, &q));
    for i in 0..3 {
        for j in 0..2 {
            assert_eq!(extend::pair_marginal(&ext, &q, i, j).unwrap(), b);
        }
    }
}

#[test]
fn channel_sweep_paths_agree() {
    let tol = Tolerances::default();
    let opts = SolverOptions::default();
    let lams: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let run = |exec| {
        sweep::map(exec, &lams, |&l| {
            let ch = channels::pure_loss(l).unwrap();
            let ad = channels::antidegradable(&ch, &tol, &opts).unwrap();
            let ke = channels::channel_k_extendible(&ch, 2, &tol, &opts).unwrap();
            (ad.status, ke.status.is_feasible())
        })
    };
    let seq = run(Exec::Sequential);
    assert_eq!(seq, run(Exec::Parallel));
    for (l, (ad, ke)) in lams.iter().zip(&seq) {
        assert_eq!(ad.is_feasible(), *l <= 0.5, "lambda {l}");
        assert_eq!(ad.is_feasible(), *ke, "lambda {l}");
    }
}

#[test]
fn replacement_channels_have_product_choi_states() {
    let tol = Tolerances::default();
    let mut r = random::rng(17);
    for _ in 0..20 {
        let n = random::random_cm(&mut r, 2);
        let ch = channels::validate_channel(&fermigauss::DMatrix::zeros(4, 2), n.body()).unwrap();
        assert!(channels::is_entanglement_breaking(&ch, &tol));
        assert!(extend::is_separable_gaussian(&channels::choi_cm(&ch), &tol));
    }
}

#[test]
fn bosonic_bound_stays_below_one_over_k() {
    for k in 1..=20 {
        assert!(bosonic_strategy_lower_bound(k, k) <= 1.0 / k as f64);
    }
}
