//! Fermionic Gaussian channels `M -> X M X^T + N`.

use nalgebra::{DMatrix, DVector};

use crate::extend::{self, ExtendQuery, FeasibilityResult};
use crate::fgs::{self, BipartiteCM, CovarianceMatrix, Side};
use crate::matalg::{self, AntisymmetricMatrix, CanonicalForm};
use crate::sdp::{self, LmiBlock, Problem, SolverOptions, Term};
use crate::{Error, Result, Tolerances};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannel {
    x: DMatrix<f64>,
    n: AntisymmetricMatrix,
    n_in: usize,
    n_out: usize,
}

impl GaussianChannel {
    pub(crate) fn new_unchecked(x: DMatrix<f64>, n: AntisymmetricMatrix, n_in: usize, n_out: usize) -> Self {
        Self { x, n, n_in, n_out }
    }

    /// `2 n_out x 2 n_in` transfer matrix.
    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn n(&self) -> &AntisymmetricMatrix {
        &self.n
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    /// Smallest eigenvalue of `I - X X^T + iN`.
    pub fn cp_margin(&self) -> f64 {
        let d = self.x.nrows();
        matalg::min_eig_hermitian(
            &(DMatrix::identity(d, d) - &self.x * self.x.transpose()),
            self.n.as_matrix(),
        )
    }
}

pub fn validate_channel(x: &DMatrix<f64>, n: &AntisymmetricMatrix) -> Result<GaussianChannel> {
    validate_channel_with(x, n, &Tolerances::default())
}

/// Accepts iff `I + iN - X X^T >= -eps_psd`.
pub fn validate_channel_with(
    x: &DMatrix<f64>,
    n: &AntisymmetricMatrix,
    tol: &Tolerances,
) -> Result<GaussianChannel> {
    if x.nrows() % 2 == 1 || x.ncols() % 2 == 1 {
        return Err(Error::DimensionOdd {
            dim: if x.nrows() % 2 == 1 { x.nrows() } else { x.ncols() },
        });
    }
    if x.nrows() != n.dim() {
        return Err(Error::DimensionMismatch {
            expected: n.dim(),
            found: x.nrows(),
        });
    }
    let ch = GaussianChannel::new_unchecked(x.clone(), n.clone(), x.ncols() / 2, x.nrows() / 2);
    let min_eig = ch.cp_margin();
    if min_eig < -tol.eps_psd {
        return Err(Error::NotCP { min_eig });
    }
    Ok(ch)
}

pub fn apply(ch: &GaussianChannel, m: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    apply_with(ch, m, &Tolerances::default())
}

pub fn apply_with(ch: &GaussianChannel, m: &CovarianceMatrix, tol: &Tolerances) -> Result<CovarianceMatrix> {
    if m.modes() != ch.n_in {
        return Err(Error::DimensionMismatch {
            expected: ch.n_in,
            found: m.modes(),
        });
    }
    let out = &ch.x * m.matrix() * ch.x.transpose() + ch.n.as_matrix();
    fgs::validate_cm_with(AntisymmetricMatrix::from_exact(out), tol)
}

/// Applies the channel to one side of a bipartite state.
pub fn apply_to_side(ch: &GaussianChannel, b: &BipartiteCM, side: Side) -> Result<BipartiteCM> {
    let (ma, mb, x) = (b.m_a(), b.m_b(), b.x());
    let local = fgs::marginal(b, side);
    let out = apply(ch, &local)?;
    let (ma, mb, x) = match side {
        Side::A => (out.matrix().clone(), mb, &ch.x * x),
        Side::B => (ma, out.matrix().clone(), x * ch.x.transpose()),
    };
    let (da, db) = (ma.nrows(), mb.nrows());
    let mut m = DMatrix::zeros(da + db, da + db);
    m.view_mut((0, 0), (da, da)).copy_from(&ma);
    m.view_mut((da, da), (db, db)).copy_from(&mb);
    m.view_mut((0, da), (da, db)).copy_from(&x);
    m.view_mut((da, 0), (db, da)).copy_from(&(-x.transpose()));
    let cm = fgs::validate_cm(AntisymmetricMatrix::from_exact(m))?;
    BipartiteCM::new(cm, da / 2, db / 2)
}

/// CM of the Choi state, `[[N, X], [-X^T, 0]]` with split `(n_out, n_in)`.
pub fn choi_cm(ch: &GaussianChannel) -> BipartiteCM {
    let (dout, din) = (2 * ch.n_out, 2 * ch.n_in);
    let mut m = DMatrix::zeros(dout + din, dout + din);
    m.view_mut((0, 0), (dout, dout)).copy_from(ch.n.as_matrix());
    m.view_mut((0, dout), (dout, din)).copy_from(&ch.x);
    m.view_mut((dout, 0), (din, dout)).copy_from(&(-ch.x.transpose()));
    let cm = CovarianceMatrix::from_trusted(AntisymmetricMatrix::from_exact(m));
    BipartiteCM::new(cm, ch.n_out, ch.n_in).expect("split matches by construction")
}

/// Searches for `D` with `I + iD >= 0` and `I - 2 X X^T + i (2N - D) >= 0`.
/// The witness is returned in `delta_a`.
pub fn antidegradable(ch: &GaussianChannel, tol: &Tolerances, opts: &SolverOptions) -> Result<FeasibilityResult> {
    let d = 2 * ch.n_out;
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| ((i + 1)..d).map(move |j| (i, j))).collect();
    let terms = |sign: f64| -> Vec<Term> {
        pairs
            .iter()
            .enumerate()
            .map(|(v, &(i, j))| Term {
                var: v,
                entries: vec![(i, j, sign)],
            })
            .collect()
    };
    let problem = Problem {
        nvars: pairs.len(),
        blocks: vec![
            LmiBlock {
                a: DMatrix::identity(d, d),
                k0: DMatrix::zeros(d, d),
                terms: terms(1.0),
            },
            LmiBlock {
                a: DMatrix::identity(d, d) - &ch.x * ch.x.transpose() * 2.0,
                k0: ch.n.as_matrix() * 2.0,
                terms: terms(-1.0),
            },
        ],
    };
    let x0 = DVector::from_iterator(pairs.len(), pairs.iter().map(|&(i, j)| ch.n.get(i, j)));
    let sol = sdp::maximize_margin(&problem, x0, opts);
    let status = extend::classify(&sol, tol)?;
    let delta = status.is_feasible().then(|| {
        let mut m = DMatrix::zeros(d, d);
        for (&(i, j), &v) in pairs.iter().zip(sol.x.iter()) {
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
        AntisymmetricMatrix::from_exact(m)
    });
    Ok(FeasibilityResult {
        status,
        delta_a: delta,
        delta_b: None,
        margin: sol.margin,
        margin_upper: sol.upper,
        iterations: sol.iterations,
        certificate: None,
    })
}

/// Entanglement-breaking Gaussian channels are exactly the replacement
/// channels, `X = 0`.
pub fn is_entanglement_breaking(ch: &GaussianChannel, tol: &Tolerances) -> bool {
    let eb = matalg::norms(&ch.x).op <= tol.eps_psd;
    if eb {
        debug_assert!(extend::is_separable_gaussian(&choi_cm(ch), tol));
    }
    eb
}

/// Beam splitter with transmissivity `lam` against a vacuum environment.
pub fn pure_loss(lam: f64) -> Result<GaussianChannel> {
    if !(0.0..=1.0).contains(&lam) {
        return Err(Error::OutOfRange {
            value: lam,
            range: "[0, 1]",
        });
    }
    let x = DMatrix::identity(2, 2) * lam.sqrt();
    let n = AntisymmetricMatrix::from_exact(CanonicalForm::blocks(&[1.0 - lam]));
    Ok(GaussianChannel::new_unchecked(x, n, 1, 1))
}

/// Extendibility of the Choi state with `k` copies of the output.
pub fn channel_k_extendible(
    ch: &GaussianChannel,
    k: usize,
    tol: &Tolerances,
    opts: &SolverOptions,
) -> Result<FeasibilityResult> {
    let q = ExtendQuery::new(choi_cm(ch), k, 1)?;
    extend::feasibility(&q, tol, opts)
}

/// Whether two outcomes agree on feasibility.
pub fn same_verdict(a: &FeasibilityResult, b: &FeasibilityResult) -> bool {
    a.status.is_feasible() == b.status.is_feasible()
}
