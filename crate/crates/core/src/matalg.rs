//! Real antisymmetric matrix algebra.
//!
//! Every positivity condition of the form `A + iB >= 0` (with `A` real
//! symmetric and `B` real antisymmetric) is evaluated on the real symmetric
//! embedding `[[A, -B], [B, A]]`, whose spectrum is that of `A + iB` with each
//! eigenvalue doubled. Nothing here needs complex arithmetic.

use nalgebra::{DMatrix, Schur};
use serde::Serialize;

use crate::{Error, Result};

/// Real antisymmetric matrix of even dimension `2n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntisymmetricMatrix(DMatrix<f64>);

impl AntisymmetricMatrix {
    /// The `dim x dim` zero matrix.
    pub fn zeros(dim: usize) -> Result<Self> {
        check_even(dim)?;
        Ok(Self(DMatrix::zeros(dim, dim)))
    }

    /// Builds from row-major entries, see [`antisymmetrize`].
    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        antisymmetrize(&DMatrix::from_row_slice(dim, dim, entries))
    }

    /// Wraps a matrix already known to be exactly antisymmetric.
    pub(crate) fn from_exact(m: DMatrix<f64>) -> Self {
        debug_assert!(m.nrows() == m.ncols() && m.nrows().is_multiple_of(2));
        let mut m = m;
        let d = m.nrows();
        for i in 0..d {
            m[(i, i)] = 0.0;
            for j in (i + 1)..d {
                let v = 0.5 * (m[(i, j)] - m[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn modes(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }

    /// Principal submatrix on the given (ordered) index list.
    pub fn principal(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.0[(idx[r], idx[c])])
    }

    /// Number of free real parameters, `n(2n - 1)`.
    pub fn free_params(dim: usize) -> usize {
        dim * dim.saturating_sub(1) / 2
    }
}

fn check_even(dim: usize) -> Result<()> {
    if dim % 2 == 1 {
        Err(Error::DimensionOdd { dim })
    } else {
        Ok(())
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Projects `raw` onto its antisymmetric part with a zero diagonal, using the
/// default relative tolerance of `1e-8`.
pub fn antisymmetrize(raw: &DMatrix<f64>) -> Result<AntisymmetricMatrix> {
    antisymmetrize_with(raw, crate::Tolerances::default().antisym_rtol)
}

/// As [`antisymmetrize`] with an explicit relative tolerance. The residue is
/// the largest entry of the symmetric part, compared against `rtol` times the
/// largest input entry.
pub fn antisymmetrize_with(raw: &DMatrix<f64>, rtol: f64) -> Result<AntisymmetricMatrix> {
    if raw.nrows() != raw.ncols() {
        return Err(Error::NotSquare {
            rows: raw.nrows(),
            cols: raw.ncols(),
        });
    }
    check_even(raw.nrows())?;
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    let sym = (raw + raw.transpose()) * 0.5;
    let residue = max_abs(&sym);
    if residue > rtol * max_abs(raw) {
        return Err(Error::NotAntisymmetric { residue });
    }
    Ok(AntisymmetricMatrix::from_exact(raw.clone()))
}

/// Real symmetric embedding of the Hermitian matrix `a + i b`.
pub fn realify(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.nrows();
    let mut r = DMatrix::zeros(2 * d, 2 * d);
    r.view_mut((0, 0), (d, d)).copy_from(a);
    r.view_mut((d, d), (d, d)).copy_from(a);
    r.view_mut((0, d), (d, d)).copy_from(&(-b));
    r.view_mut((d, 0), (d, d)).copy_from(b);
    r
}

pub(crate) fn sorted_symmetric_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of the Hermitian matrix `iK`, ascending. They come in pairs
/// `±lambda_j`.
pub fn hermitian_spectrum(k: &AntisymmetricMatrix) -> Vec<f64> {
    let d = k.dim();
    let zero = DMatrix::zeros(d, d);
    // Each eigenvalue of iK appears twice in the embedding.
    sorted_symmetric_eigenvalues(realify(&zero, k.as_matrix()))
        .into_iter()
        .step_by(2)
        .collect()
}

/// Minimum eigenvalue of `a + i b` and whether it clears `-eps_psd`.
pub fn realify_psd_check(
    a: &DMatrix<f64>,
    b: &AntisymmetricMatrix,
    eps_psd: f64,
) -> Result<(f64, bool)> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.nrows() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            found: a.nrows(),
        });
    }
    let min = min_eig_hermitian(a, b.as_matrix());
    Ok((min, min >= -eps_psd))
}

/// Minimum eigenvalue of `a + i b` for raw blocks (no shape checks).
pub(crate) fn min_eig_hermitian(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return f64::INFINITY;
    }
    let a = (a + a.transpose()) * 0.5;
    sorted_symmetric_eigenvalues(realify(&a, b))[0]
}

/// Minimum eigenvalue of `I + iK`.
pub(crate) fn bona_fide_margin(k: &DMatrix<f64>) -> f64 {
    min_eig_hermitian(&DMatrix::identity(k.nrows(), k.nrows()), k)
}

/// Operator and trace norm of a real matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    pub op: f64,
    pub trace: f64,
}

pub fn norms(k: &DMatrix<f64>) -> Norms {
    if k.is_empty() {
        return Norms { op: 0.0, trace: 0.0 };
    }
    let sv = k.singular_values();
    Norms {
        op: sv.iter().fold(0.0_f64, |a, v| a.max(*v)),
        trace: sv.iter().sum(),
    }
}

/// Pfaffian by skew-symmetric Gaussian elimination with partial pivoting
/// (Parlett-Reid). The empty matrix has Pfaffian 1.
pub fn pfaffian(k: &AntisymmetricMatrix) -> f64 {
    pfaffian_raw(k.as_matrix())
}

pub(crate) fn pfaffian_raw(k: &DMatrix<f64>) -> f64 {
    let n = k.nrows();
    if n == 0 {
        return 1.0;
    }
    if n % 2 == 1 {
        return 0.0;
    }
    let mut a = k.clone();
    let mut pf = 1.0;
    let mut col = 0;
    while col + 1 < n {
        let pivot = (col + 1..n)
            .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
            .expect("non-empty pivot range");
        if pivot != col + 1 {
            a.swap_rows(col + 1, pivot);
            a.swap_columns(col + 1, pivot);
            pf = -pf;
        }
        let head = a[(col, col + 1)];
        if head == 0.0 {
            return 0.0;
        }
        pf *= head;
        if col + 2 < n {
            // tau_i = a[col, i] / a[col, col+1] for i > col+1
            let tau: Vec<f64> = (col + 2..n).map(|i| a[(col, i)] / head).collect();
            let piv_col: Vec<f64> = (col + 2..n).map(|i| a[(i, col + 1)]).collect();
            for (r, i) in (col + 2..n).enumerate() {
                for (c, j) in (col + 2..n).enumerate() {
                    a[(i, j)] += tau[r] * piv_col[c] - piv_col[r] * tau[c];
                }
            }
        }
        col += 2;
    }
    pf
}

/// `K = O * blocks([[0, l_j], [-l_j, 0]]) * O^T` with `O` special orthogonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub rotation: DMatrix<f64>,
    /// Sorted descending; nonnegative except possibly the last entry, which
    /// absorbs the sign needed to keep `det(rotation) = +1`.
    pub lambdas: Vec<f64>,
}

impl CanonicalForm {
    pub fn blocks(lambdas: &[f64]) -> DMatrix<f64> {
        let d = 2 * lambdas.len();
        let mut b = DMatrix::zeros(d, d);
        for (j, &l) in lambdas.iter().enumerate() {
            b[(2 * j, 2 * j + 1)] = l;
            b[(2 * j + 1, 2 * j)] = -l;
        }
        b
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.rotation * Self::blocks(&self.lambdas) * self.rotation.transpose()
    }

    /// Rebuilds `O * blocks(f(l_j)) * O^T` for a block-wise function `f`.
    pub fn map_blocks(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mapped: Vec<f64> = self.lambdas.iter().map(|&l| f(l)).collect();
        &self.rotation * Self::blocks(&mapped) * self.rotation.transpose()
    }
}

pub fn canonical_form(k: &AntisymmetricMatrix) -> Result<CanonicalForm> {
    let d = k.dim();
    if d == 0 {
        return Ok(CanonicalForm {
            rotation: DMatrix::zeros(0, 0),
            lambdas: vec![],
        });
    }
    let scale = max_abs(k.as_matrix());
    if scale == 0.0 {
        return Ok(CanonicalForm {
            rotation: DMatrix::identity(d, d),
            lambdas: vec![0.0; d / 2],
        });
    }
    let (q, t) = Schur::try_new(k.as_matrix().clone(), 1e-15 * scale, 10_000)
        .ok_or(Error::NoConvergence)?
        .unpack();

    // (column a, column b, lambda) with K q_a = -l q_b and K q_b = l q_a.
    let mut pairs: Vec<(usize, usize, f64)> = Vec::with_capacity(d / 2);
    let mut singles: Vec<usize> = Vec::new();
    let sub_tol = 1e-13 * scale;
    let mut i = 0;
    while i < d {
        if i + 1 < d && t[(i + 1, i)].abs() > sub_tol {
            // Normal 2x2 block [[a, b], [-b, a]] with a ~ 0.
            let l = 0.5 * (t[(i, i + 1)] - t[(i + 1, i)]);
            pairs.push((i, i + 1, l));
            i += 2;
        } else {
            singles.push(i);
            i += 1;
        }
    }
    for z in singles.chunks(2) {
        // Zero eigenvalues come in an even number for even dimension.
        let b = if z.len() == 2 { z[1] } else { z[0] };
        pairs.push((z[0], b, 0.0));
    }

    let mut blocks: Vec<(Vec<f64>, Vec<f64>, f64)> = pairs
        .into_iter()
        .map(|(a, b, l)| {
            let ca: Vec<f64> = q.column(a).iter().copied().collect();
            let cb: Vec<f64> = q.column(b).iter().copied().collect();
            if l < 0.0 {
                (cb, ca, -l)
            } else {
                (ca, cb, l)
            }
        })
        .collect();
    blocks.sort_by(|x, y| y.2.total_cmp(&x.2));

    let mut rotation = DMatrix::zeros(d, d);
    let mut lambdas = Vec::with_capacity(d / 2);
    for (j, (ca, cb, l)) in blocks.into_iter().enumerate() {
        for r in 0..d {
            rotation[(r, 2 * j)] = ca[r];
            rotation[(r, 2 * j + 1)] = cb[r];
        }
        lambdas.push(l);
    }
    if rotation.determinant() < 0.0 {
        let last = d - 2;
        for r in 0..d {
            rotation[(r, last)] = -rotation[(r, last)];
        }
        let n = lambdas.len();
        lambdas[n - 1] = -lambdas[n - 1];
    }
    Ok(CanonicalForm { rotation, lambdas })
}
