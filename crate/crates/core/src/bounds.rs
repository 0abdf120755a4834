//! Finite de Finetti bounds and the extendible two-mode family.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::fgs::{self, BipartiteCM, CovarianceMatrix};
use crate::matalg::{self, AntisymmetricMatrix};
use crate::{Error, Result};

/// `h(x) = -x log2 x - (1-x) log2 (1-x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange {
            value: x,
            range: "[0, 1]",
        });
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeFinettiReport {
    pub na: usize,
    pub nb: usize,
    pub k1: usize,
    pub k2: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub trace_upper: f64,
    pub er_upper: f64,
    pub esq_upper: f64,
    pub trace_lower: Option<f64>,
    pub family_params: Option<(usize, usize)>,
}

/// Trace-distance, relative-entropy and squashed-entanglement upper bounds
/// for a `(k1, k2)`-extendible state on `n_a + n_b` modes.
pub fn definetti_bounds(na: usize, nb: usize, k1: usize, k2: usize) -> Result<DeFinettiReport> {
    if na == 0 || nb == 0 || k1 == 0 || k2 == 0 {
        return Err(Error::InvalidParameter(
            "mode counts and extension orders must be positive".into(),
        ));
    }
    let root = ((k1 * k2) as f64).sqrt();
    let raw = 2.0 / root * (na as f64).min(nb as f64).min(root);
    let t = raw.min(2.0);
    let h = binary_entropy(t / 2.0)?;
    let n = (na + nb) as f64;
    Ok(DeFinettiReport {
        na,
        nb,
        k1,
        k2,
        t,
        trace_upper: t,
        er_upper: 0.5 * n * t + h,
        esq_upper: 0.25 * n * t + 0.5 * h,
        trace_lower: None,
        family_params: None,
    })
}

/// `||X||_1`, which bounds `||rho - rho_A (x) rho_B||_1`.
pub fn trace_upper_from_cm(b: &BipartiteCM) -> f64 {
    matalg::norms(&b.x()).trace
}

/// Largest `|eigenvalue|` of a 4x4 antisymmetric matrix, in closed form.
fn op_norm_4x4(k: &DMatrix<f64>) -> f64 {
    let mut p = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            p += k[(i, j)] * k[(i, j)];
        }
    }
    let pf = k[(0, 1)] * k[(2, 3)] - k[(0, 2)] * k[(1, 3)] + k[(0, 3)] * k[(1, 2)];
    let disc = (p * p - 4.0 * pf * pf).max(0.0);
    ((p + disc.sqrt()) / 2.0).sqrt()
}

fn golden_min(lo: f64, hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let g = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// `inf ||M - (a-block (+) b-block)||_op` over `|a|, |b| <= 1`, a lower bound
/// on the trace distance to separable states for one mode per side.
pub fn lower_bound_two_mode(b: &BipartiteCM) -> Result<f64> {
    if b.na() != 1 || b.nb() != 1 {
        return Err(Error::WrongSplit {
            expected_a: 1,
            expected_b: 1,
            found_a: b.na(),
            found_b: b.nb(),
        });
    }
    let m = b.cm().matrix().clone();
    let f = |a: f64, bb: f64| {
        let mut k = m.clone();
        k[(0, 1)] -= a;
        k[(1, 0)] += a;
        k[(2, 3)] -= bb;
        k[(3, 2)] += bb;
        op_norm_4x4(&k)
    };
    let steps = 200;
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        let a = -1.0 + 2.0 * i as f64 / steps as f64;
        for j in 0..=steps {
            let bb = -1.0 + 2.0 * j as f64 / steps as f64;
            best = best.min(f(a, bb));
        }
    }
    // The objective is convex (a norm of an affine map), so nested
    // golden-section search over the full square finds the infimum; it also
    // copes with the kinks where the two singular values cross.
    let (_, refined) = golden_min(-1.0, 1.0, 1e-12, |a| golden_min(-1.0, 1.0, 1e-12, |bb| f(a, bb)).1);
    Ok(best.min(refined))
}

/// The family `M(k1, k2)` obtained from a Bell pair by pure loss with
/// transmissivities `1/k1` and `1/k2`. Panics if either order is zero.
pub fn family_cm(k1: usize, k2: usize) -> BipartiteCM {
    assert!(k1 >= 1 && k2 >= 1, "family_cm needs k1, k2 >= 1");
    let (f1, f2) = (k1 as f64, k2 as f64);
    let a = (f1 - 1.0) / f1;
    let b = (f2 - 1.0) / f2;
    let x = 1.0 / (f1 * f2).sqrt();
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        0.0, a, 0.0, x,
        -a, 0.0, x, 0.0,
        0.0, -x, 0.0, b,
        -x, 0.0, -b, 0.0,
    ]);
    let cm = CovarianceMatrix::from_trusted(AntisymmetricMatrix::from_exact(m));
    BipartiteCM::new(cm, 1, 1).expect("four-by-four family splits as (1, 1)")
}

/// Spectrum of `i M(k1, k2)` in closed form, ascending.
pub fn family_spectrum(k1: usize, k2: usize) -> [f64; 4] {
    let (f1, f2) = (k1 as f64, k2 as f64);
    let a = (f1 - 1.0) * (f2 / f1).sqrt();
    let b = (f2 - 1.0) * (f1 / f2).sqrt();
    let base = (a * a + b * b) / 2.0 + 1.0;
    let spread = 0.5 * (a - b).abs() * (a * a + 2.0 * a * b + b * b + 4.0).sqrt();
    let s = (f1 * f2).sqrt();
    let r1 = (base + spread).sqrt() / s;
    let r2 = (base - spread).max(0.0).sqrt() / s;
    [-r1, -r2, r2, r1]
}

/// Pure two-mode state that is close to separable for small `eps` but is
/// neither `(1, 2)`- nor `(2, 1)`-extendible.
pub fn epsilon_family(eps: f64) -> Result<BipartiteCM> {
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(Error::OutOfRange {
            value: eps,
            range: "(0, 2]",
        });
    }
    let h = eps / 2.0;
    let c = (1.0 - h * h).max(0.0).sqrt();
    // The B block carries the opposite orientation of the A block; with
    // equal orientations the matrix would violate the bona fide condition.
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        0.0, c, h, 0.0,
        -c, 0.0, 0.0, h,
        -h, 0.0, 0.0, -c,
        0.0, -h, c, 0.0,
    ]);
    let cm = fgs::validate_cm(AntisymmetricMatrix::from_exact(m))?;
    BipartiteCM::new(cm, 1, 1)
}

/// Overlap `Tr(rho(k1, k2) rho(1, 1))` in closed form.
pub fn family_overlap(k1: usize, k2: usize) -> f64 {
    let (f1, f2) = (k1 as f64, k2 as f64);
    0.25 * ((2.0 * f1 * f2 - f1 - f2 + 2.0) / (f1 * f2) + 2.0 / (f1 * f2).sqrt())
}

/// Weaker lower bound from the EPR-overlap witness:
/// `Tr(rho(k1, k2) EPR) - 1/2`, which equals `1/(2k^2)` at `k1 = k2 = k`.
pub fn bosonic_strategy_lower_bound(k1: usize, k2: usize) -> f64 {
    family_overlap(k1, k2) - 0.5
}
