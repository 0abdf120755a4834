//! Seeded generators for random matrices, states and channels.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::GaussianChannel;
use crate::fgs::CovarianceMatrix;
use crate::matalg::{AntisymmetricMatrix, CanonicalForm};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_antisymmetric(rng: &mut impl Rng, dim: usize) -> AntisymmetricMatrix {
    let g = gaussian_matrix(rng, dim, dim);
    AntisymmetricMatrix::from_exact((&g - g.transpose()) * 0.5)
}

/// Haar-distributed special orthogonal matrix.
pub fn random_rotation(rng: &mut impl Rng, dim: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, dim, dim).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if dim > 0 && q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Bona fide CM `O blocks(l) O^T` with `l_j` uniform on `[-1, 1]`.
pub fn random_cm(rng: &mut impl Rng, modes: usize) -> CovarianceMatrix {
    let lambdas: Vec<f64> = (0..modes).map(|_| rng.random_range(-1.0..=1.0)).collect();
    cm_with_lambdas(rng, &lambdas)
}

/// Random pure CM (`M^2 = -I`).
pub fn random_pure_cm(rng: &mut impl Rng, modes: usize) -> CovarianceMatrix {
    cm_with_lambdas(rng, &vec![1.0; modes])
}

pub fn cm_with_lambdas(rng: &mut impl Rng, lambdas: &[f64]) -> CovarianceMatrix {
    let o = random_rotation(rng, 2 * lambdas.len());
    let m = &o * CanonicalForm::blocks(lambdas) * o.transpose();
    CovarianceMatrix::from_trusted(AntisymmetricMatrix::from_exact(m))
}

/// Random valid channel with `||X||_op^2 = alpha < 1` and noise
/// `(1 - alpha) N0` for a random bona fide `N0`.
pub fn random_channel(rng: &mut impl Rng, n_in: usize, n_out: usize) -> GaussianChannel {
    let alpha: f64 = rng.random_range(0.05..0.95);
    let mut x = gaussian_matrix(rng, 2 * n_out, 2 * n_in);
    let op = crate::matalg::norms(&x).op;
    x *= alpha.sqrt() / op;
    let n0 = random_cm(rng, n_out);
    let n = n0.body().scale(1.0 - alpha);
    GaussianChannel::new_unchecked(x, n, n_in, n_out)
}
