//! `(k1, k2)`-extendibility of bipartite Gaussian states.
//!
//! A state with CM `[[M_A, X], [-X^T, M_B]]` is `(k1, k2)`-extendible iff
//! there are antisymmetric `D_A`, `D_B` with `I + iD_A >= 0`, `I + iD_B >= 0`
//! and
//!
//! ```text
//! I + i [[k1 M_A - (k1-1) D_A,  sqrt(k1 k2) X          ],
//!        [-sqrt(k1 k2) X^T,     k2 M_B - (k2-1) D_B    ]] >= 0.
//! ```
//!
//! The extension itself uses `Z = M_A - D_A` between distinct A copies and
//! `Y = M_B - D_B` between distinct B copies.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::fgs::{self, BipartiteCM, CovarianceMatrix};
use crate::matalg::{self, AntisymmetricMatrix};
use crate::sdp::{self, LmiBlock, Problem, SolverOptions, Term};
use crate::{Error, Result, Tolerances};

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendQuery {
    pub b: BipartiteCM,
    pub k1: usize,
    pub k2: usize,
}

impl ExtendQuery {
    pub fn new(b: BipartiteCM, k1: usize, k2: usize) -> Result<Self> {
        if k1 == 0 || k2 == 0 {
            return Err(Error::InvalidParameter("k1 and k2 must be at least 1".into()));
        }
        Ok(Self { b, k1, k2 })
    }

    fn scale(&self) -> f64 {
        ((self.k1 * self.k2) as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Feasible,
    InfeasibleCertified,
    InfeasibleNumerical,
}

impl Status {
    pub fn is_feasible(self) -> bool {
        self == Status::Feasible
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Feasible => "feasible",
            Status::InfeasibleCertified => "infeasible_certified",
            Status::InfeasibleNumerical => "infeasible_numerical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma {
    /// `X^T X <= 4 I / (k1 k2)`.
    CrossCorrelation,
    /// Squared row sums of a CM are at most one.
    ColumnSum,
}

/// A violated analytic inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub lemma: Lemma,
    /// One-based row of the extended CM, for column-sum certificates.
    pub row: Option<usize>,
    pub value: f64,
    pub bound: f64,
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lemma {
            Lemma::CrossCorrelation => write!(
                f,
                "cross-correlation bound: lambda_max(X^T X) = {} > 4/(k1 k2) = {}",
                fmt_num(self.value),
                fmt_num(self.bound)
            ),
            Lemma::ColumnSum => write!(
                f,
                "column-sum row {}: {} > {}",
                self.row.unwrap_or(0),
                fmt_num(self.value),
                fmt_num(self.bound)
            ),
        }
    }
}

fn fmt_num(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityResult {
    pub status: Status,
    /// Present iff feasible.
    pub delta_a: Option<AntisymmetricMatrix>,
    pub delta_b: Option<AntisymmetricMatrix>,
    /// Smallest eigenvalue across the three constraint blocks at the best
    /// point found.
    pub margin: f64,
    /// Upper bound on the optimal margin reported by the solver.
    pub margin_upper: f64,
    pub iterations: usize,
    pub certificate: Option<Certificate>,
}

pub fn precheck_cross_correlation(q: &ExtendQuery, tol: &Tolerances) -> Option<Certificate> {
    let x = q.b.x();
    let top = matalg::norms(&x).op;
    let value = top * top;
    let bound = 4.0 / (q.k1 * q.k2) as f64;
    (value > bound + tol.eps_feas).then_some(Certificate {
        lemma: Lemma::CrossCorrelation,
        row: None,
        value,
        bound,
    })
}

/// Row sums over the rows of the extended CM that contain no unknown
/// blocks: the A rows when `k1 = 1`, the B rows when `k2 = 1`.
pub fn precheck_columnsum(q: &ExtendQuery, tol: &Tolerances) -> Option<Certificate> {
    let (ma, mb, x) = (q.b.m_a(), q.b.m_b(), q.b.x());
    let mut worst: Option<(usize, f64)> = None;
    let mut consider = |row: usize, v: f64| {
        if v > 1.0 + tol.eps_feas && worst.is_none_or(|(_, w)| v > w) {
            worst = Some((row, v));
        }
    };
    let da = ma.nrows();
    if q.k1 == 1 {
        for i in 0..da {
            let v = ma.row(i).norm_squared() + q.k2 as f64 * x.row(i).norm_squared();
            consider(i + 1, v);
        }
    }
    if q.k2 == 1 {
        let offset = q.k1 * da;
        for i in 0..mb.nrows() {
            let v = mb.row(i).norm_squared() + q.k1 as f64 * x.column(i).norm_squared();
            consider(offset + i + 1, v);
        }
    }
    worst.map(|(row, value)| Certificate {
        lemma: Lemma::ColumnSum,
        row: Some(row),
        value,
        bound: 1.0,
    })
}

fn upper_pairs(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|i| ((i + 1)..d).map(move |j| (i, j))).collect()
}

fn pack(m: &DMatrix<f64>, pairs: &[(usize, usize)], out: &mut Vec<f64>) {
    out.extend(pairs.iter().map(|&(i, j)| m[(i, j)]));
}

fn unpack(x: &[f64], d: usize, pairs: &[(usize, usize)]) -> AntisymmetricMatrix {
    let mut m = DMatrix::zeros(d, d);
    for (&(i, j), &v) in pairs.iter().zip(x) {
        m[(i, j)] = v;
        m[(j, i)] = -v;
    }
    AntisymmetricMatrix::from_exact(m)
}

/// The three constraint blocks as an LMI in the free entries of `D_A`, `D_B`.
fn extension_problem(q: &ExtendQuery) -> Problem {
    let (ma, mb, x) = (q.b.m_a(), q.b.m_b(), q.b.x());
    let (da, db) = (ma.nrows(), mb.nrows());
    let pa = upper_pairs(da);
    let pb = upper_pairs(db);
    let s = q.scale();
    let (k1, k2) = (q.k1 as f64, q.k2 as f64);

    let single = |d: usize, pairs: &[(usize, usize)], first: usize| LmiBlock {
        a: DMatrix::identity(d, d),
        k0: DMatrix::zeros(d, d),
        terms: pairs
            .iter()
            .enumerate()
            .map(|(v, &(i, j))| Term {
                var: first + v,
                entries: vec![(i, j, 1.0)],
            })
            .collect(),
    };

    let dt = da + db;
    let mut k0 = DMatrix::zeros(dt, dt);
    k0.view_mut((0, 0), (da, da)).copy_from(&(&ma * k1));
    k0.view_mut((da, da), (db, db)).copy_from(&(&mb * k2));
    k0.view_mut((0, da), (da, db)).copy_from(&(&x * s));
    k0.view_mut((da, 0), (db, da)).copy_from(&(-x.transpose() * s));
    let mut terms = Vec::new();
    if q.k1 > 1 {
        terms.extend(pa.iter().enumerate().map(|(v, &(i, j))| Term {
            var: v,
            entries: vec![(i, j, -(k1 - 1.0))],
        }));
    }
    if q.k2 > 1 {
        terms.extend(pb.iter().enumerate().map(|(v, &(i, j))| Term {
            var: pa.len() + v,
            entries: vec![(da + i, da + j, -(k2 - 1.0))],
        }));
    }
    Problem {
        nvars: pa.len() + pb.len(),
        blocks: vec![
            single(da, &pa, 0),
            single(db, &pb, pa.len()),
            LmiBlock {
                a: DMatrix::identity(dt, dt),
                k0,
                terms,
            },
        ],
    }
}

/// Minimum eigenvalues of the three constraint blocks at given witnesses.
pub fn constraint_margins(
    q: &ExtendQuery,
    delta_a: &AntisymmetricMatrix,
    delta_b: &AntisymmetricMatrix,
) -> Result<[f64; 3]> {
    check_witness_dims(q, delta_a, delta_b)?;
    let p = extension_problem(q);
    let x = witness_vector(delta_a, delta_b);
    Ok([p.blocks[0].min_eig(&x), p.blocks[1].min_eig(&x), p.blocks[2].min_eig(&x)])
}

fn witness_vector(delta_a: &AntisymmetricMatrix, delta_b: &AntisymmetricMatrix) -> DVector<f64> {
    let mut v = Vec::new();
    pack(delta_a.as_matrix(), &upper_pairs(delta_a.dim()), &mut v);
    pack(delta_b.as_matrix(), &upper_pairs(delta_b.dim()), &mut v);
    DVector::from_vec(v)
}

fn check_witness_dims(
    q: &ExtendQuery,
    delta_a: &AntisymmetricMatrix,
    delta_b: &AntisymmetricMatrix,
) -> Result<()> {
    for (want, got) in [(2 * q.b.na(), delta_a.dim()), (2 * q.b.nb(), delta_b.dim())] {
        if want != got {
            return Err(Error::DimensionMismatch {
                expected: want,
                found: got,
            });
        }
    }
    Ok(())
}

/// Decides extendibility with analytic prechecks followed by the max-margin
/// solver.
pub fn feasibility(q: &ExtendQuery, tol: &Tolerances, opts: &SolverOptions) -> Result<FeasibilityResult> {
    let certificate = precheck_cross_correlation(q, tol).or_else(|| precheck_columnsum(q, tol));
    let problem = extension_problem(q);
    let mut x0 = Vec::with_capacity(problem.nvars);
    pack(&q.b.m_a(), &upper_pairs(2 * q.b.na()), &mut x0);
    pack(&q.b.m_b(), &upper_pairs(2 * q.b.nb()), &mut x0);
    let sol = sdp::maximize_margin(&problem, DVector::from_vec(x0), opts);

    let mut result = FeasibilityResult {
        status: Status::InfeasibleNumerical,
        delta_a: None,
        delta_b: None,
        margin: sol.margin,
        margin_upper: sol.upper,
        iterations: sol.iterations,
        certificate: None,
    };
    if certificate.is_some() {
        result.status = Status::InfeasibleCertified;
        result.certificate = certificate;
        return Ok(result);
    }
    if classify(&sol, tol)?.is_feasible() {
        let npa = AntisymmetricMatrix::free_params(2 * q.b.na());
        result.status = Status::Feasible;
        result.delta_a = Some(unpack(
            &sol.x.as_slice()[..npa],
            2 * q.b.na(),
            &upper_pairs(2 * q.b.na()),
        ));
        result.delta_b = Some(unpack(
            &sol.x.as_slice()[npa..],
            2 * q.b.nb(),
            &upper_pairs(2 * q.b.nb()),
        ));
    }
    Ok(result)
}

/// Feasible at margin `>= -eps_feas`; numerically infeasible only when the
/// solver converged with an optimum bound below `-100 eps_feas`.
pub(crate) fn classify(sol: &sdp::Solution, tol: &Tolerances) -> Result<Status> {
    if sol.margin >= -tol.eps_feas {
        Ok(Status::Feasible)
    } else if sol.converged && sol.upper < -100.0 * tol.eps_feas {
        Ok(Status::InfeasibleNumerical)
    } else {
        Err(Error::SolverStalled {
            margin: sol.margin,
            iterations: sol.iterations,
        })
    }
}

/// `(1, k)` query plus a direct evaluation of the one-sided inequality
/// `I_A (+) I_B / k + i M_AB >= 0 (+) i (1 - 1/k) D_B`.
pub fn one_sided_feasibility(
    b: &BipartiteCM,
    k: usize,
    tol: &Tolerances,
    opts: &SolverOptions,
) -> Result<FeasibilityResult> {
    let q = ExtendQuery::new(b.clone(), 1, k)?;
    let r = feasibility(&q, tol, opts)?;
    if let Some(db) = &r.delta_b {
        let direct = one_sided_min_eig(b, k, db)?;
        if direct < r.margin.min(0.0) - 1e-8 {
            return Err(Error::FormulationMismatch { min_eig: direct });
        }
    }
    Ok(r)
}

/// Smallest eigenvalue of the one-sided matrix inequality at witness `D_B`.
pub fn one_sided_min_eig(b: &BipartiteCM, k: usize, delta_b: &AntisymmetricMatrix) -> Result<f64> {
    let (da, db) = (2 * b.na(), 2 * b.nb());
    if delta_b.dim() != db {
        return Err(Error::DimensionMismatch {
            expected: db,
            found: delta_b.dim(),
        });
    }
    let kf = k as f64;
    let mut a = DMatrix::identity(da + db, da + db);
    for i in da..da + db {
        a[(i, i)] = 1.0 / kf;
    }
    let mut m = b.cm().matrix().clone();
    let shift = delta_b.as_matrix() * (1.0 - 1.0 / kf);
    let mut lower = m.view_mut((da, da), (db, db));
    lower -= shift;
    Ok(matalg::min_eig_hermitian(&a, &m))
}

/// Extended CM on `k1 n_A + k2 n_B` modes, A copies first.
pub fn build_extension(q: &ExtendQuery, r: &FeasibilityResult, tol: &Tolerances) -> Result<CovarianceMatrix> {
    match (&r.delta_a, &r.delta_b) {
        (Some(da), Some(db)) if r.status.is_feasible() => extension_from_witness(q, da, db, tol),
        _ => Err(Error::NotFeasible),
    }
}

pub fn extension_from_witness(
    q: &ExtendQuery,
    delta_a: &AntisymmetricMatrix,
    delta_b: &AntisymmetricMatrix,
    tol: &Tolerances,
) -> Result<CovarianceMatrix> {
    check_witness_dims(q, delta_a, delta_b)?;
    let (ma, mb, x) = (q.b.m_a(), q.b.m_b(), q.b.x());
    let (da, db) = (ma.nrows(), mb.nrows());
    let z = &ma - delta_a.as_matrix();
    let y = &mb - delta_b.as_matrix();
    let off = q.k1 * da;
    let dim = off + q.k2 * db;
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..q.k1 {
        for j in 0..q.k1 {
            let blk = if i == j { &ma } else { &z };
            m.view_mut((i * da, j * da), (da, da)).copy_from(blk);
        }
        for j in 0..q.k2 {
            m.view_mut((i * da, off + j * db), (da, db)).copy_from(&x);
            m.view_mut((off + j * db, i * da), (db, da)).copy_from(&(-x.transpose()));
        }
    }
    for i in 0..q.k2 {
        for j in 0..q.k2 {
            let blk = if i == j { &mb } else { &y };
            m.view_mut((off + i * db, off + j * db), (db, db)).copy_from(blk);
        }
    }
    let ext = matalg::antisymmetrize_with(&m, 1e-12)?;
    let relaxed = Tolerances {
        eps_psd: tol.eps_feas,
        ..*tol
    };
    let cm = fgs::validate_cm_with(ext, &relaxed)?;
    debug_assert!(is_block_symmetric(&cm, q));
    Ok(cm)
}

/// Invariance of an extension under swapping any two A copies or any two B
/// copies.
pub fn is_block_symmetric(ext: &CovarianceMatrix, q: &ExtendQuery) -> bool {
    let (na, nb) = (q.b.na(), q.b.nb());
    let modes = q.k1 * na + q.k2 * nb;
    let swap = |group_start: usize, size: usize, a: usize, b: usize| -> Vec<usize> {
        let mut perm: Vec<usize> = (0..modes).collect();
        for t in 0..size {
            perm.swap(group_start + a * size + t, group_start + b * size + t);
        }
        perm
    };
    let mut perms = Vec::new();
    for a in 1..q.k1 {
        perms.push(swap(0, na, 0, a));
    }
    for b in 1..q.k2 {
        perms.push(swap(q.k1 * na, nb, 0, b));
    }
    perms.iter().all(|p| {
        fgs::permute_modes(ext, p).is_ok_and(|m| m.matrix() == ext.matrix())
    })
}

/// CM of the pair `(A_i, B_j)` inside an extension (zero-based copies).
pub fn pair_marginal(ext: &CovarianceMatrix, q: &ExtendQuery, i: usize, j: usize) -> Result<BipartiteCM> {
    let (na, nb) = (q.b.na(), q.b.nb());
    let modes: Vec<usize> = (i * na..(i + 1) * na)
        .chain((q.k1 * na + j * nb)..(q.k1 * na + (j + 1) * nb))
        .collect();
    BipartiteCM::new(fgs::restrict_modes(ext, &modes)?, na, nb)
}

/// Gaussian states are separable iff they are product states.
pub fn is_separable_gaussian(b: &BipartiteCM, tol: &Tolerances) -> bool {
    matalg::norms(&b.x()).op <= tol.eps_psd
}
