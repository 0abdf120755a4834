//! Randomized cross-checks between the CM layer and the dense model.

use serde::Serialize;

use crate::extend::{self, ExtendQuery};
use crate::fgs::{self, BipartiteCM};
use crate::matalg::{self, AntisymmetricMatrix};
use crate::oracle;
use crate::random::{self, SeededRng};
use crate::sdp::SolverOptions;
use crate::sweep::{self, Exec};
use crate::{Error, Result, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Roundtrip,
    Wick,
    Sandwich,
    Extension,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "roundtrip" => Ok(Suite::Roundtrip),
            "wick" => Ok(Suite::Wick),
            "sandwich" => Ok(Suite::Sandwich),
            "extension" => Ok(Suite::Extension),
            other => Err(Error::InvalidParameter(format!("unknown suite `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub n_max: usize,
    pub trials: usize,
    pub seed: u64,
    /// Number of individual comparisons made.
    pub checks: usize,
    /// Largest residual, or largest inequality violation for `sandwich`.
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn trial_rng(seed: u64, trial: usize) -> SeededRng {
    random::rng(seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn modes_for(rng: &mut SeededRng, n_max: usize) -> usize {
    use rand::Rng;
    rng.random_range(1..=n_max)
}

/// Largest `|cm_from_state(state_from_cm(M)) - M|` entry.
fn roundtrip_trial(seed: u64, trial: usize, n_max: usize) -> Result<(usize, f64)> {
    let mut r = trial_rng(seed, trial);
    let n = modes_for(&mut r, n_max);
    let m = random::random_cm(&mut r, n);
    let back = oracle::cm_from_state(&oracle::state_from_cm(&m)?)?;
    Ok((1, (back.matrix() - m.matrix()).amax()))
}

fn even_subsets(dim: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << dim) {
        let len = mask.count_ones() as usize;
        if len.is_multiple_of(2) && len <= max_len {
            out.push((0..dim).filter(|i| mask & (1 << i) != 0).collect());
        }
    }
    out
}

fn wick_trial(seed: u64, trial: usize, n_max: usize) -> Result<(usize, f64)> {
    let mut r = trial_rng(seed, trial);
    let n = modes_for(&mut r, n_max);
    let m = random::random_cm(&mut r, n);
    let s = oracle::state_from_cm(&m)?;
    let mut worst = 0.0_f64;
    let subsets = even_subsets(2 * n, 6);
    for idx in &subsets {
        let (lhs, rhs) = oracle::wick_check(&s, &m, idx)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok((subsets.len(), worst))
}

/// Violation of `||dM||_op <= ||rho - sigma||_1 <= ||dM||_1 / 2`.
fn sandwich_trial(seed: u64, trial: usize, n_max: usize) -> Result<(usize, f64)> {
    let mut r = trial_rng(seed, trial);
    let n = modes_for(&mut r, n_max);
    let a = random::random_cm(&mut r, n);
    let b = random::random_cm(&mut r, n);
    let td = oracle::trace_distance(&oracle::state_from_cm(&a)?, &oracle::state_from_cm(&b)?)?;
    let norms = matalg::norms(&(a.matrix() - b.matrix()));
    let violation = (norms.op - td).max(td - 0.5 * norms.trace).max(0.0);
    Ok((2, violation))
}

/// Random (2, 1)-extendible two-mode state: the (A1, B) marginal of a
/// three-mode CM symmetrized over A1 <-> A2. The solver's extension is
/// reconstructed densely and both pair marginals compared with the input.
fn extension_trial(seed: u64, trial: usize, tol: &Tolerances, opts: &SolverOptions) -> Result<(usize, f64)> {
    let mut r = trial_rng(seed, trial);
    let raw = random::random_cm(&mut r, 3);
    let swapped = fgs::permute_modes(&raw, &[1, 0, 2])?;
    let sym = (raw.matrix() + swapped.matrix()) * 0.5;
    let sym = fgs::validate_cm(AntisymmetricMatrix::from_exact(sym))?;
    let b = BipartiteCM::new(fgs::restrict_modes(&sym, &[0, 2])?, 1, 1)?;
    let q = ExtendQuery::new(b.clone(), 2, 1)?;
    let res = extend::feasibility(&q, tol, opts)?;
    let ext = extend::build_extension(&q, &res, tol)?;
    let target = oracle::state_from_cm(b.cm())?;
    let mut worst = 0.0_f64;
    // Bring each pair to the leading modes so the partial trace is contiguous.
    for order in [[0, 2, 1], [1, 2, 0]] {
        let moved = fgs::permute_modes(&ext, &order)?;
        let pair = oracle::state_from_cm(&moved)?.reduce(0..2)?;
        worst = worst.max(oracle::trace_distance(&pair, &target)?);
    }
    Ok((2, worst))
}

/// Runs a suite. `n_max` caps the mode count per trial.
pub fn run_suite(
    suite: Suite,
    n_max: usize,
    trials: usize,
    seed: u64,
    exec: Exec,
    tol: &Tolerances,
    opts: &SolverOptions,
) -> Result<SuiteReport> {
    if n_max == 0 || n_max > oracle::MAX_MODES {
        return Err(Error::TooManyModes {
            n: n_max,
            cap: oracle::MAX_MODES,
        });
    }
    let idx: Vec<usize> = (0..trials).collect();
    let (tolerance, results) = match suite {
        Suite::Roundtrip => (1e-9, sweep::map(exec, &idx, |&t| roundtrip_trial(seed, t, n_max))),
        Suite::Wick => (1e-8, sweep::map(exec, &idx, |&t| wick_trial(seed, t, n_max))),
        Suite::Sandwich => (1e-9, sweep::map(exec, &idx, |&t| sandwich_trial(seed, t, n_max))),
        Suite::Extension => (1e-8, sweep::map(exec, &idx, |&t| extension_trial(seed, t, tol, opts))),
    };
    let mut checks = 0;
    let mut max_residual = 0.0_f64;
    for r in results {
        let (c, v) = r?;
        checks += c;
        max_residual = max_residual.max(v);
    }
    Ok(SuiteReport {
        suite,
        n_max,
        trials,
        seed,
        checks,
        max_residual,
        tolerance,
        passed: max_residual < tolerance,
    })
}
