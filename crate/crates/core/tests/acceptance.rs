//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use fermigauss::bounds::{
    bosonic_strategy_lower_bound, definetti_bounds, epsilon_family, family_cm, family_overlap,
    lower_bound_two_mode, trace_upper_from_cm,
};
use fermigauss::channels::{
    antidegradable, channel_k_extendible, choi_cm, is_entanglement_breaking, pure_loss, same_verdict,
    validate_channel,
};
use fermigauss::extend::{
    build_extension, feasibility, is_block_symmetric, is_separable_gaussian, pair_marginal, ExtendQuery,
    Lemma, Status,
};
use fermigauss::fgs::{self, BipartiteCM, Side};
use fermigauss::matalg::{self, AntisymmetricMatrix};
use fermigauss::random;
use fermigauss::sdp::SolverOptions;
use fermigauss::sweep::Exec;
use fermigauss::verify::{run_suite, Suite};
use fermigauss::{oracle, DMatrix, Tolerances};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(label: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || {
        format!("{label}: got {got:.15e}, want {want:.15e} (tol {tol:e})")
    })
}

fn query(b: &BipartiteCM, k1: usize, k2: usize) -> Result<fermigauss::extend::FeasibilityResult, String> {
    let q = ExtendQuery::new(b.clone(), k1, k2).map_err(|e| e.to_string())?;
    feasibility(&q, &Tolerances::default(), &SolverOptions::default()).map_err(|e| format!("({k1},{k2}): {e}"))
}

fn hierarchy() -> Outcome {
    let start = Instant::now();
    let mut solved = 0;
    for k1 in 1..=4 {
        for k2 in 1..=4 {
            let b = family_cm(k1, k2);
            let r = query(&b, k1, k2)?;
            ensure(r.status == Status::Feasible && r.margin >= -1e-7, || {
                format!("family({k1},{k2}) at ({k1},{k2}): {:?} margin {:e}", r.status, r.margin)
            })?;
            solved += 1;
            let mut above = Vec::new();
            if k2 == 1 {
                above.push((k1 + 1, k2));
            }
            if k1 == 1 {
                above.push((k1, k2 + 1));
            }
            for (j1, j2) in above {
                let r = query(&b, j1, j2)?;
                ensure(r.status == Status::InfeasibleCertified && r.certificate.is_some(), || {
                    format!("family({k1},{k2}) at ({j1},{j2}): {:?}", r.status)
                })?;
                solved += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{solved} queries in {:.2}s", elapsed.as_secs_f64()))
}

fn one_sided_spectra() -> Outcome {
    let mut worst = 0.0_f64;
    for k in 1..=8 {
        let spec = matalg::hermitian_spectrum(family_cm(1, k).cm().body());
        let r = 1.0 / k as f64;
        let mut want = [-1.0, -r, r, 1.0];
        want.sort_by(f64::total_cmp);
        for (g, w) in spec.iter().zip(want) {
            worst = worst.max((g - w).abs());
        }
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:e}"))?;
    Ok(format!("k <= 8, max deviation {worst:.1e}"))
}

fn tightness() -> Outcome {
    let (mut lo_err, mut up_err) = (0.0_f64, 0.0_f64);
    for k1 in 1..=6 {
        for k2 in 1..=6 {
            let b = family_cm(k1, k2);
            let s = ((k1 * k2) as f64).sqrt();
            let lo = lower_bound_two_mode(&b).map_err(|e| e.to_string())?;
            let up = trace_upper_from_cm(&b);
            within(&format!("lower({k1},{k2})"), lo, 1.0 / s, 1e-8)?;
            within(&format!("upper({k1},{k2})"), up, 2.0 / s, 1e-10)?;
            lo_err = lo_err.max((lo - 1.0 / s).abs());
            up_err = up_err.max((up - 2.0 / s).abs());
        }
    }
    Ok(format!("lower err {lo_err:.1e}, upper err {up_err:.1e}"))
}

fn overlap_identity() -> Outcome {
    let bell = family_cm(1, 1);
    for k in 1..=6 {
        let o = fgs::overlap(family_cm(k, k).cm(), bell.cm()).map_err(|e| e.to_string())?;
        let kf = k as f64;
        within(&format!("overlap({k},{k})"), o, 0.5 * (1.0 + 1.0 / (kf * kf)), 1e-10)?;
    }
    let mut worst = 0.0_f64;
    for k1 in 1..=6 {
        for k2 in 1..=6 {
            let o = fgs::overlap(family_cm(k1, k2).cm(), bell.cm()).map_err(|e| e.to_string())?;
            let (a, b) = (k1 as f64, k2 as f64);
            let want = 0.25 * ((2.0 * a * b - a - b + 2.0) / (a * b) + 2.0 / (a * b).sqrt());
            within(&format!("overlap({k1},{k2})"), o, want, 1e-10)?;
            within(&format!("family_overlap({k1},{k2})"), family_overlap(k1, k2), want, 1e-10)?;
            worst = worst.max((o - want).abs());
        }
    }
    Ok(format!("max deviation {worst:.1e}"))
}

fn epsilon_independence() -> Outcome {
    for eps in [0.5, 0.1, 0.01] {
        let b = epsilon_family(eps).map_err(|e| e.to_string())?;
        fgs::validate_cm(b.cm().body().clone()).map_err(|e| format!("eps {eps}: {e}"))?;
        for (k1, k2) in [(1, 2), (2, 1)] {
            let r = query(&b, k1, k2)?;
            let lemma = r.certificate.as_ref().map(|c| c.lemma);
            ensure(
                r.status == Status::InfeasibleCertified && lemma == Some(Lemma::ColumnSum),
                || format!("eps {eps} at ({k1},{k2}): {:?} {lemma:?}", r.status),
            )?;
        }
        within(&format!("||X||_1 at eps {eps}"), trace_upper_from_cm(&b), eps, 1e-12)?;
    }
    Ok("eps in {0.5, 0.1, 0.01} certified by column sums".into())
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let (tol, opts) = (Tolerances::default(), SolverOptions::default());
    let rt = run_suite(Suite::Roundtrip, 4, 200, 11, Exec::Parallel, &tol, &opts).map_err(|e| e.to_string())?;
    ensure(rt.max_residual < 1e-9, || format!("roundtrip residual {:e}", rt.max_residual))?;
    let wick = run_suite(Suite::Wick, 3, 40, 12, Exec::Parallel, &tol, &opts).map_err(|e| e.to_string())?;
    ensure(wick.max_residual < 1e-8, || format!("wick residual {:e}", wick.max_residual))?;
    let sw = run_suite(Suite::Sandwich, 3, 100, 13, Exec::Parallel, &tol, &opts).map_err(|e| e.to_string())?;
    ensure(sw.max_residual <= 1e-9, || format!("sandwich violation {:e}", sw.max_residual))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "roundtrip {:.1e}, wick {:.1e} over {} subsets, sandwich violation {:.1e}, {:.2}s",
        rt.max_residual,
        wick.max_residual,
        wick.checks,
        sw.max_residual,
        elapsed.as_secs_f64()
    ))
}

fn extension_correctness() -> Outcome {
    let tol = Tolerances::default();
    let b = family_cm(2, 2);
    let q = ExtendQuery::new(b.clone(), 2, 2).map_err(|e| e.to_string())?;
    let r = feasibility(&q, &tol, &SolverOptions::default()).map_err(|e| e.to_string())?;
    let ext = build_extension(&q, &r, &tol).map_err(|e| e.to_string())?;
    fgs::validate_cm(ext.body().clone()).map_err(|e| format!("extension: {e}"))?;
    ensure(ext.modes() == 4 && ext.dim() == 8, || format!("extension has {} modes", ext.modes()))?;
    ensure(is_block_symmetric(&ext, &q), || "extension not permutation invariant".into())?;
    for i in 0..2 {
        for j in 0..2 {
            let p = pair_marginal(&ext, &q, i, j).map_err(|e| e.to_string())?;
            ensure(p.cm().matrix() == b.cm().matrix(), || format!("marginal (A{i},B{j}) differs"))?;
        }
    }

    let small = family_cm(2, 1);
    let q = ExtendQuery::new(small.clone(), 2, 1).map_err(|e| e.to_string())?;
    let r = feasibility(&q, &tol, &SolverOptions::default()).map_err(|e| e.to_string())?;
    let ext = build_extension(&q, &r, &tol).map_err(|e| e.to_string())?;
    let target = oracle::state_from_cm(small.cm()).map_err(|e| e.to_string())?;
    let mut worst = 0.0_f64;
    for order in [[0, 2, 1], [1, 2, 0]] {
        let moved = fgs::permute_modes(&ext, &order).map_err(|e| e.to_string())?;
        let pair = oracle::state_from_cm(&moved)
            .and_then(|s| s.reduce(0..2))
            .map_err(|e| e.to_string())?;
        worst = worst.max(oracle::trace_distance(&pair, &target).map_err(|e| e.to_string())?);
    }
    ensure(worst <= 1e-8, || format!("dense marginal distance {worst:e}"))?;
    let suite = run_suite(Suite::Extension, 3, 20, 5, Exec::Parallel, &tol, &SolverOptions::default())
        .map_err(|e| e.to_string())?;
    ensure(suite.passed, || format!("random (2,1) instances: {:e}", suite.max_residual))?;
    Ok(format!(
        "8-mode extension exact; dense distance {worst:.1e}, random instances {:.1e}",
        suite.max_residual
    ))
}

fn definetti() -> Outcome {
    let r = definetti_bounds(1, 1, 2, 2).map_err(|e| e.to_string())?;
    ensure(r.t == 1.0 && r.trace_upper == 1.0, || format!("T {} trace {}", r.t, r.trace_upper))?;
    // h(1/2) = 1 bit, so the formulas give exactly 2 and 1.
    ensure(r.er_upper == 2.0 && r.esq_upper == 1.0, || {
        format!("er {} esq {}", r.er_upper, r.esq_upper)
    })?;
    let c = definetti_bounds(1, 1, 1, 1).map_err(|e| e.to_string())?;
    ensure(c.t == 2.0, || format!("clamped T {}", c.t))?;

    let b = family_cm(2, 2);
    let rho = oracle::state_from_cm(b.cm()).map_err(|e| e.to_string())?;
    let prod = fgs::product_cm(&fgs::marginal(&b, Side::A), &fgs::marginal(&b, Side::B));
    let sigma = oracle::state_from_cm(prod.cm()).map_err(|e| e.to_string())?;
    let d = oracle::trace_distance(&rho, &sigma).map_err(|e| e.to_string())?;
    ensure((0.5..=1.0).contains(&d), || format!("trace distance {d} outside [0.5, 1]"))?;
    Ok(format!("T=1 er=2 esq=1, clamp T=2, family(2,2) distance {d:.6}"))
}

fn channels() -> Outcome {
    let (tol, opts) = (Tolerances::default(), SolverOptions::default());
    for step in 0..=10 {
        let lam = step as f64 / 10.0;
        let ch = pure_loss(lam).map_err(|e| e.to_string())?;
        let ad = antidegradable(&ch, &tol, &opts).map_err(|e| format!("lambda {lam}: {e}"))?;
        let expect = step <= 5;
        ensure(ad.status.is_feasible() == expect, || {
            format!("lambda {lam}: {:?} margin {:e}", ad.status, ad.margin)
        })?;
        let ext = channel_k_extendible(&ch, 2, &tol, &opts).map_err(|e| format!("lambda {lam}: {e}"))?;
        ensure(same_verdict(&ad, &ext), || {
            format!("lambda {lam}: antidegradable {:?} vs 2-extendible {:?}", ad.status, ext.status)
        })?;
        let eb = is_entanglement_breaking(&ch, &tol);
        ensure(eb == (lam.sqrt() <= 1e-9), || format!("lambda {lam}: eb {eb}"))?;
    }

    let mut rng = random::rng(3);
    let mut eb_count = 0;
    for _ in 0..50 {
        let n0 = random::random_cm(&mut rng, 1);
        let replacement = validate_channel(&DMatrix::zeros(2, 2), n0.body()).map_err(|e| e.to_string())?;
        ensure(is_entanglement_breaking(&replacement, &tol), || "replacement channel not EB".into())?;
        ensure(is_separable_gaussian(&choi_cm(&replacement), &tol), || {
            "EB Choi state not separable".into()
        })?;
        eb_count += 1;
        let ch = random::random_channel(&mut rng, 1, 1);
        let op = matalg::norms(ch.x()).op;
        ensure(is_entanglement_breaking(&ch, &tol) == (op <= 1e-9), || format!("op {op}"))?;
    }
    let tiny = validate_channel(&(DMatrix::identity(2, 2) * 1e-10), &AntisymmetricMatrix::zeros(2).unwrap())
        .map_err(|e| e.to_string())?;
    ensure(is_entanglement_breaking(&tiny, &tol), || "x = 1e-10 should count as EB".into())?;
    Ok(format!("boundary at 1/2, 2-extendibility agrees on 11 points, {eb_count} EB Choi states separable"))
}

fn bosonic() -> Outcome {
    for k in 2..=20 {
        let kf = k as f64;
        let v = bosonic_strategy_lower_bound(k, k);
        within(&format!("bosonic({k},{k})"), v, 1.0 / (2.0 * kf * kf), 1e-10)?;
        ensure(v < 1.0 / kf, || format!("k {k}: {v} not below 1/k"))?;
    }
    Ok("1/(2k^2) < 1/k for k in 2..=20".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("family hierarchy", hierarchy),
        ("one-sided spectra", one_sided_spectra),
        ("two-mode tightness", tightness),
        ("overlap identity", overlap_identity),
        ("epsilon family", epsilon_independence),
        ("dense oracle equivalence", oracle_equivalence),
        ("extension correctness", extension_correctness),
        ("de Finetti evaluation", definetti),
        ("channels", channels),
        ("bosonic comparison", bosonic),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
