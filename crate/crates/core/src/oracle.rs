//! Dense Fock-space model used as ground truth for the CM layer.
//!
//! Majorana operators under Jordan-Wigner are signed permutation matrices, so
//! they are stored as a permutation plus one phase per basis state. Mode 1 is
//! the most significant bit of the occupation index.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{Complex, DMatrix};

use crate::fgs::{self, CovarianceMatrix};
use crate::matalg::{self, AntisymmetricMatrix};
use crate::{Error, Result};

pub type C64 = Complex<f64>;

/// Largest mode count the dense model accepts.
pub const MAX_MODES: usize = 12;

const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Operator `|j> -> phase[j] |perm[j]>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub perm: Vec<usize>,
    pub phase: Vec<C64>,
}

impl Monomial {
    pub fn identity(dim: usize) -> Self {
        Self {
            perm: (0..dim).collect(),
            phase: vec![ONE; dim],
        }
    }

    /// Operator product `self * rhs`.
    pub fn mul(&self, rhs: &Monomial) -> Monomial {
        let perm = rhs.perm.iter().map(|&p| self.perm[p]).collect();
        let phase = rhs
            .phase
            .iter()
            .zip(&rhs.perm)
            .map(|(c, &p)| c * self.phase[p])
            .collect();
        Monomial { perm, phase }
    }

    pub fn scale(mut self, c: C64) -> Monomial {
        for p in &mut self.phase {
            *p *= c;
        }
        self
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let d = self.perm.len();
        let mut m = DMatrix::from_element(d, d, ZERO);
        for j in 0..d {
            m[(self.perm[j], j)] = self.phase[j];
        }
        m
    }

    /// `Tr(self * rho)`.
    pub fn expectation(&self, rho: &DMatrix<C64>) -> C64 {
        (0..self.perm.len())
            .map(|j| self.phase[j] * rho[(j, self.perm[j])])
            .sum()
    }

    /// Adds `c * self` into `acc`.
    pub fn add_to(&self, c: C64, acc: &mut DMatrix<C64>) {
        for j in 0..self.perm.len() {
            acc[(self.perm[j], j)] += c * self.phase[j];
        }
    }
}

/// The `2n` Jordan-Wigner Majoranas on `n` modes.
#[derive(Debug, Clone)]
pub struct MajoranaSet {
    n: usize,
    gammas: Vec<Monomial>,
}

impl MajoranaSet {
    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Zero-based Majorana `p` (`gamma_{p+1}`).
    pub fn gamma(&self, p: usize) -> &Monomial {
        &self.gammas[p]
    }

    pub fn dense(&self, p: usize) -> DMatrix<C64> {
        self.gammas[p].to_dense()
    }

    /// Product `gamma_{idx[0]} ... gamma_{idx[m-1]}`.
    pub fn product(&self, idx: &[usize]) -> Monomial {
        idx.iter()
            .fold(Monomial::identity(self.dim()), |acc, &p| acc.mul(&self.gammas[p]))
    }

    /// `(-1)^N` as a diagonal monomial.
    pub fn parity(&self) -> Monomial {
        let d = self.dim();
        Monomial {
            perm: (0..d).collect(),
            phase: (0..d)
                .map(|j| if (j as u32).count_ones().is_multiple_of(2) { ONE } else { -ONE })
                .collect(),
        }
    }
}

fn build(n: usize) -> MajoranaSet {
    let d = 1usize << n;
    let mut gammas = Vec::with_capacity(2 * n);
    for k in 0..n {
        let bit = 1usize << (n - 1 - k);
        let before_mask = !((bit << 1) - 1) & (d - 1);
        let mut g1 = Monomial::identity(d);
        let mut g2 = Monomial::identity(d);
        for j in 0..d {
            let string = if (j & before_mask).count_ones().is_multiple_of(2) { ONE } else { -ONE };
            let target = j ^ bit;
            g1.perm[j] = target;
            g1.phase[j] = string;
            // -Y: |0> -> -i|1>, |1> -> i|0>
            g2.perm[j] = target;
            g2.phase[j] = string * if j & bit == 0 { -I } else { I };
        }
        gammas.push(g1);
        gammas.push(g2);
    }
    MajoranaSet { n, gammas }
}

type Cache = RwLock<HashMap<usize, Arc<MajoranaSet>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Jordan-Wigner Majoranas, memoized per mode count.
pub fn jordan_wigner(n: usize) -> Result<Arc<MajoranaSet>> {
    if n == 0 || n > MAX_MODES {
        return Err(Error::TooManyModes { n, cap: MAX_MODES });
    }
    if let Some(set) = cache().read().expect("cache poisoned").get(&n) {
        return Ok(Arc::clone(set));
    }
    let set = Arc::new(build(n));
    let mut w = cache().write().expect("cache poisoned");
    Ok(Arc::clone(w.entry(n).or_insert(set)))
}

/// A density matrix on `n` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    n: usize,
    rho: DMatrix<C64>,
}

fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

impl DenseState {
    /// Checks unit trace, positivity and parity symmetry to `1e-10`.
    pub fn new(n: usize, rho: DMatrix<C64>) -> Result<Self> {
        if n == 0 || n > MAX_MODES {
            return Err(Error::TooManyModes { n, cap: MAX_MODES });
        }
        let d = 1usize << n;
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rho.nrows(),
            });
        }
        let s = Self { n, rho };
        let tr = s.rho.trace();
        if (tr - ONE).norm() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        if (&s.rho - s.rho.adjoint()).camax() > 1e-10 {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let min = hermitian_eigenvalues(&s.rho)[0];
        if min < -1e-10 {
            return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
        }
        if s.parity_violation() > 1e-10 {
            return Err(Error::InvalidState("does not commute with parity".into()));
        }
        Ok(s)
    }

    /// Projector onto a normalized ket.
    pub fn pure(n: usize, ket: &[C64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(ket);
        let nv = v.norm();
        let v = v / C64::new(nv, 0.0);
        Self::new(n, &v * v.adjoint())
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let d = 1usize << n.min(MAX_MODES);
        Self::new(n, DMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0))
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> &DMatrix<C64> {
        &self.rho
    }

    /// `|| [rho, P] ||_max` with `P = (-1)^N`.
    pub fn parity_violation(&self) -> f64 {
        let d = self.rho.nrows();
        let mut worst = 0.0_f64;
        for r in 0..d {
            for c in 0..d {
                if (r ^ c).count_ones() % 2 == 1 {
                    worst = worst.max(self.rho[(r, c)].norm());
                }
            }
        }
        worst
    }

    pub fn commutes_with_parity(&self) -> bool {
        self.parity_violation() <= 1e-10
    }

    /// `rho_self (x) rho_other` with `self` on the leading modes.
    pub fn tensor(&self, other: &DenseState) -> Result<DenseState> {
        DenseState::new(self.n + other.n, self.rho.kronecker(&other.rho))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.rho)
    }

    /// Reduced state on a contiguous mode range. Valid for parity-even states.
    pub fn reduce(&self, keep: Range<usize>) -> Result<DenseState> {
        if keep.start >= keep.end || keep.end > self.n {
            return Err(Error::InvalidParameter(format!(
                "mode range {keep:?} invalid for {} modes",
                self.n
            )));
        }
        let k = keep.end - keep.start;
        let low = self.n - keep.end;
        let dk = 1usize << k;
        let dl = 1usize << low;
        let dh = 1usize << keep.start;
        let mut out = DMatrix::from_element(dk, dk, ZERO);
        for h in 0..dh {
            for l in 0..dl {
                for r in 0..dk {
                    let row = (h << (k + low)) | (r << low) | l;
                    for c in 0..dk {
                        let col = (h << (k + low)) | (c << low) | l;
                        out[(r, c)] += self.rho[(row, col)];
                    }
                }
            }
        }
        DenseState::new(k, out)
    }

    /// Expectation of the monomial `gamma_{idx[0]} ... gamma_{idx[m-1]}`.
    pub fn monomial_expectation(&self, idx: &[usize]) -> Result<C64> {
        let set = jordan_wigner(self.n)?;
        if let Some(&bad) = idx.iter().find(|&&p| p >= 2 * self.n) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                dim: 2 * self.n,
            });
        }
        Ok(set.product(idx).expectation(&self.rho))
    }
}

/// Dense state of a Gaussian CM,
/// `rho = 2^-n prod_j (I + i l_j g'_{2j-1} g'_{2j})` in the rotated Majoranas
/// `g'_a = sum_b O_ba g_b`.
pub fn state_from_cm(m: &CovarianceMatrix) -> Result<DenseState> {
    let n = m.modes();
    let set = jordan_wigner(n)?;
    fgs::validate_cm(m.body().clone())?;
    let cf = m.canonical()?;
    let o = &cf.rotation;
    let d = set.dim();
    let mut rho = DMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0);
    for (j, &l) in cf.lambdas.iter().enumerate() {
        // Q = g'_{2j-1} g'_{2j}; the diagonal part vanishes by orthogonality.
        let mut factor = DMatrix::identity(d, d);
        for a in 0..2 * n {
            for b in (a + 1)..2 * n {
                let w = o[(a, 2 * j)] * o[(b, 2 * j + 1)] - o[(b, 2 * j)] * o[(a, 2 * j + 1)];
                if w != 0.0 {
                    set.gamma(a)
                        .mul(set.gamma(b))
                        .add_to(I * C64::new(l * w, 0.0), &mut factor);
                }
            }
        }
        rho = factor * rho;
    }
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    DenseState::new(n, rho)
}

/// `M_qp = Re Tr(i g_q g_p rho)`.
pub fn cm_from_state(s: &DenseState) -> Result<CovarianceMatrix> {
    let set = jordan_wigner(s.n)?;
    let d = 2 * s.n;
    let mut m = DMatrix::zeros(d, d);
    for q in 0..d {
        for p in (q + 1)..d {
            let v = (I * set.gamma(q).mul(set.gamma(p)).expectation(&s.rho)).re;
            m[(q, p)] = v;
            m[(p, q)] = -v;
        }
    }
    fgs::validate_cm(AntisymmetricMatrix::from_exact(m))
}

/// `||rho_a - rho_b||_1`.
pub fn trace_distance(a: &DenseState, b: &DenseState) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch {
            expected: a.n,
            found: b.n,
        });
    }
    Ok(hermitian_eigenvalues(&(&a.rho - &b.rho))
        .iter()
        .map(|v| v.abs())
        .sum())
}

/// Both sides of `Tr(i^{m/2} g(idx) rho) = Pf(M[idx])`.
pub fn wick_check(s: &DenseState, m: &CovarianceMatrix, idx: &[usize]) -> Result<(f64, f64)> {
    if idx.len() % 2 == 1 {
        return Err(Error::OddSubset { len: idx.len() });
    }
    if let Some(&bad) = idx.iter().find(|&&p| p >= m.dim()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            dim: m.dim(),
        });
    }
    if idx.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedSubset);
    }
    let power = I.powu((idx.len() / 2) as u32);
    let lhs = (power * s.monomial_expectation(idx)?).re;
    let rhs = matalg::pfaffian_raw(&m.body().principal(idx));
    Ok((lhs, rhs))
}

fn von_neumann(s: &DenseState) -> f64 {
    s.eigenvalues()
        .into_iter()
        .filter(|&p| p > 1e-15)
        .map(|p| -p * p.log2())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Entropies {
    pub s_a: f64,
    pub s_b: f64,
    pub s_ab: f64,
    pub i_ab: f64,
}

/// Entropies in bits with A the leading `na` modes.
pub fn entropies(s: &DenseState, split: (usize, usize)) -> Result<Entropies> {
    let (na, nb) = split;
    if na + nb != s.n || na == 0 || nb == 0 {
        return Err(Error::WrongSplit {
            expected_a: na,
            expected_b: nb,
            found_a: s.n,
            found_b: 0,
        });
    }
    let s_a = von_neumann(&s.reduce(0..na)?);
    let s_b = von_neumann(&s.reduce(na..s.n)?);
    let s_ab = von_neumann(s);
    Ok(Entropies {
        s_a,
        s_b,
        s_ab,
        i_ab: s_a + s_b - s_ab,
    })
}

/// `(-1)^N` as a dense matrix.
pub fn parity(n: usize) -> Result<DMatrix<C64>> {
    Ok(jordan_wigner(n)?.parity().to_dense())
}
