//! Covariance matrices of fermionic Gaussian states.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::matalg::{self, AntisymmetricMatrix, CanonicalForm};
use crate::{Error, Result, Tolerances};

/// A bona fide covariance matrix: real antisymmetric with `iM` spectrum in
/// `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    body: AntisymmetricMatrix,
}

impl CovarianceMatrix {
    /// Skips validation. Callers must guarantee the bona fide condition.
    pub(crate) fn from_trusted(body: AntisymmetricMatrix) -> Self {
        Self { body }
    }

    pub fn body(&self) -> &AntisymmetricMatrix {
        &self.body
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.body.as_matrix()
    }

    pub fn modes(&self) -> usize {
        self.body.modes()
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    pub fn spectrum(&self) -> Vec<f64> {
        matalg::hermitian_spectrum(&self.body)
    }

    /// The `n` nonnegative symplectic eigenvalues `|l_j|`, descending.
    pub fn abs_lambdas(&self) -> Vec<f64> {
        let s = self.spectrum();
        let n = self.modes();
        let mut l: Vec<f64> = s[n..].iter().map(|v| v.abs()).collect();
        l.reverse();
        l
    }

    pub fn canonical(&self) -> Result<CanonicalForm> {
        matalg::canonical_form(&self.body)
    }

    /// `M^2 = -I` within `tol`.
    pub fn is_pure(&self, tol: f64) -> bool {
        let m = self.matrix();
        let d = m.nrows();
        (m * m + DMatrix::identity(d, d)).amax() <= tol
    }

    /// Smallest eigenvalue of `I + iM`.
    pub fn margin(&self) -> f64 {
        matalg::bona_fide_margin(self.matrix())
    }
}

/// Validates with the default `eps_psd`.
pub fn validate_cm(k: AntisymmetricMatrix) -> Result<CovarianceMatrix> {
    validate_cm_with(k, &Tolerances::default())
}

pub fn validate_cm_with(k: AntisymmetricMatrix, tol: &Tolerances) -> Result<CovarianceMatrix> {
    let spec = matalg::hermitian_spectrum(&k);
    if let Some(&top) = spec.last() {
        let worst = if spec[0].abs() > top.abs() { spec[0] } else { top };
        if worst.abs() > 1.0 + tol.eps_psd {
            return Err(Error::NotBonaFide { eigenvalue: worst });
        }
    }
    Ok(CovarianceMatrix { body: k })
}

/// Convenience: antisymmetrize then validate.
pub fn cm_from_matrix(raw: &DMatrix<f64>) -> Result<CovarianceMatrix> {
    validate_cm(matalg::antisymmetrize(raw)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// A covariance matrix with a declared split into `n_a + n_b` modes, the A
/// modes first.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteCM {
    cm: CovarianceMatrix,
    na: usize,
    nb: usize,
}

impl BipartiteCM {
    pub fn new(cm: CovarianceMatrix, na: usize, nb: usize) -> Result<Self> {
        if na + nb != cm.modes() {
            return Err(Error::DimensionMismatch {
                expected: cm.modes(),
                found: na + nb,
            });
        }
        Ok(Self { cm, na, nb })
    }

    pub fn cm(&self) -> &CovarianceMatrix {
        &self.cm
    }

    pub fn na(&self) -> usize {
        self.na
    }

    pub fn nb(&self) -> usize {
        self.nb
    }

    pub fn m_a(&self) -> DMatrix<f64> {
        let da = 2 * self.na;
        self.cm.matrix().view((0, 0), (da, da)).into_owned()
    }

    pub fn m_b(&self) -> DMatrix<f64> {
        let (da, db) = (2 * self.na, 2 * self.nb);
        self.cm.matrix().view((da, da), (db, db)).into_owned()
    }

    /// Off-diagonal block `X` (`2 n_a x 2 n_b`).
    pub fn x(&self) -> DMatrix<f64> {
        let (da, db) = (2 * self.na, 2 * self.nb);
        self.cm.matrix().view((0, da), (da, db)).into_owned()
    }
}

/// Named states with closed-form covariance matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardState {
    Vacuum(usize),
    BellPhiPlus,
    BellPhiMinus,
    BellPsiPlus,
    BellPsiMinus,
    /// `[[0, I], [-I, 0]]` with `2m` Majoranas per side.
    Epr(usize),
    SingleMode(f64),
}

impl StandardState {
    /// Natural bipartition, if any.
    pub fn split(&self) -> Option<(usize, usize)> {
        match *self {
            Self::BellPhiPlus | Self::BellPhiMinus | Self::BellPsiPlus | Self::BellPsiMinus => {
                Some((1, 1))
            }
            Self::Epr(m) => Some((m, m)),
            _ => None,
        }
    }
}

fn bell(upper: [f64; 2]) -> DMatrix<f64> {
    // entries (1,4) and (2,3); the rest follows by antisymmetry
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 3)] = upper[0];
    m[(3, 0)] = -upper[0];
    m[(1, 2)] = upper[1];
    m[(2, 1)] = -upper[1];
    m
}

pub fn standard_state(kind: StandardState) -> Result<CovarianceMatrix> {
    let m = match kind {
        StandardState::Vacuum(n) => {
            if n == 0 {
                return Err(Error::InvalidParameter("vacuum needs at least one mode".into()));
            }
            CanonicalForm::blocks(&vec![1.0; n])
        }
        StandardState::BellPhiPlus => bell([1.0, 1.0]),
        StandardState::BellPhiMinus => bell([-1.0, -1.0]),
        StandardState::BellPsiPlus => bell([-1.0, 1.0]),
        StandardState::BellPsiMinus => bell([1.0, -1.0]),
        StandardState::Epr(m) => {
            if m == 0 {
                return Err(Error::InvalidParameter("EPR needs m >= 1".into()));
            }
            let d = 2 * m;
            let mut k = DMatrix::zeros(2 * d, 2 * d);
            for i in 0..d {
                k[(i, d + i)] = 1.0;
                k[(d + i, i)] = -1.0;
            }
            k
        }
        StandardState::SingleMode(l) => {
            if !(-1.0..=1.0).contains(&l) {
                return Err(Error::InvalidParameter(format!(
                    "single-mode lambda {l} outside [-1, 1]"
                )));
            }
            CanonicalForm::blocks(&[l])
        }
    };
    Ok(CovarianceMatrix::from_trusted(AntisymmetricMatrix::from_exact(m)))
}

/// Standard state with its natural split.
pub fn standard_bipartite(kind: StandardState) -> Result<BipartiteCM> {
    let cm = standard_state(kind)?;
    let (na, nb) = kind
        .split()
        .ok_or_else(|| Error::InvalidParameter(format!("{kind:?} has no natural split")))?;
    BipartiteCM::new(cm, na, nb)
}

/// Reduced CM of one side. Principal submatrices of bona fide CMs are bona fide.
pub fn marginal(b: &BipartiteCM, side: Side) -> CovarianceMatrix {
    let m = match side {
        Side::A => b.m_a(),
        Side::B => b.m_b(),
    };
    CovarianceMatrix::from_trusted(AntisymmetricMatrix::from_exact(m))
}

pub fn product_cm(ma: &CovarianceMatrix, mb: &CovarianceMatrix) -> BipartiteCM {
    let (da, db) = (ma.dim(), mb.dim());
    let mut m = DMatrix::zeros(da + db, da + db);
    m.view_mut((0, 0), (da, da)).copy_from(ma.matrix());
    m.view_mut((da, da), (db, db)).copy_from(mb.matrix());
    BipartiteCM {
        cm: CovarianceMatrix::from_trusted(AntisymmetricMatrix::from_exact(m)),
        na: ma.modes(),
        nb: mb.modes(),
    }
}

/// Reorders modes: output mode `i` is input mode `perm[i]`.
pub fn permute_modes(m: &CovarianceMatrix, perm: &[usize]) -> Result<CovarianceMatrix> {
    let n = m.modes();
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: perm.len(),
        });
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    let idx: Vec<usize> = perm.iter().flat_map(|&p| [2 * p, 2 * p + 1]).collect();
    Ok(CovarianceMatrix::from_trusted(AntisymmetricMatrix::from_exact(
        m.body().principal(&idx),
    )))
}

/// Restriction to a subset of modes (in the given order).
pub fn restrict_modes(m: &CovarianceMatrix, modes: &[usize]) -> Result<CovarianceMatrix> {
    if let Some(&bad) = modes.iter().find(|&&p| p >= m.modes()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            dim: m.modes(),
        });
    }
    let idx: Vec<usize> = modes.iter().flat_map(|&p| [2 * p, 2 * p + 1]).collect();
    Ok(CovarianceMatrix::from_trusted(AntisymmetricMatrix::from_exact(
        m.body().principal(&idx),
    )))
}

/// `|Tr(rho1 rho2)| = sqrt(det((M1 M2 - I) / 2))`.
pub fn overlap(m1: &CovarianceMatrix, m2: &CovarianceMatrix) -> Result<f64> {
    if m1.dim() != m2.dim() {
        return Err(Error::DimensionMismatch {
            expected: m1.dim(),
            found: m2.dim(),
        });
    }
    let d = m1.dim();
    let det = ((m1.matrix() * m2.matrix() - DMatrix::identity(d, d)) * 0.5).determinant();
    if det < -1e-12 {
        return Err(Error::NegativeDeterminant { det });
    }
    Ok(det.max(0.0).sqrt())
}

fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// von Neumann entropy in bits, `sum_j h((1 + l_j) / 2)`.
pub fn gaussian_entropy(m: &CovarianceMatrix) -> f64 {
    m.abs_lambdas()
        .into_iter()
        .map(|l| h2((1.0 + l.min(1.0)) / 2.0))
        .sum()
}

/// `I(A;B) = S(A) + S(B) - S(AB)` in bits.
pub fn mutual_information(b: &BipartiteCM) -> f64 {
    gaussian_entropy(&marginal(b, Side::A)) + gaussian_entropy(&marginal(b, Side::B))
        - gaussian_entropy(b.cm())
}

/// Half the mutual information.
pub fn e_cq(b: &BipartiteCM) -> f64 {
    0.5 * mutual_information(b)
}

/// Quadratic Hamiltonian `h` with `tanh(h / 2) = M` blockwise.
pub fn hamiltonian_from_cm(m: &CovarianceMatrix) -> Result<AntisymmetricMatrix> {
    let cf = m.canonical()?;
    if let Some(&l) = cf.lambdas.iter().find(|l| l.abs() >= 1.0 - 1e-12) {
        return Err(Error::SingularState { lambda: l });
    }
    Ok(AntisymmetricMatrix::from_exact(
        cf.map_blocks(|l| 2.0 * l.atanh()),
    ))
}

/// Gaussian states given by a CM are always parity-even.
pub fn check_parity_superselection_cm(_m: &CovarianceMatrix) -> bool {
    true
}
