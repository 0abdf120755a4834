//! Extendibility analysis for fermionic Gaussian states.
//!
//! States are represented by their Majorana covariance matrices (CMs). The crate
//! decides `(k1, k2)`-extendibility through a small semidefinite feasibility
//! problem, evaluates finite de Finetti bounds, builds the extendible two-mode
//! family and classifies fermionic Gaussian channels. Every CM-level result can
//! be cross-checked against the dense Fock-space model in [`oracle`].
//!
//! Conventions used throughout:
//!
//! * Majoranas `g_{2j-1} = c_j + c_j^dag`, `g_{2j} = i(c_j - c_j^dag)` with a
//!   Jordan-Wigner encoding where mode 1 is the most significant qubit.
//! * `M_qp = Tr(i g_q g_p rho)`; the single-mode vacuum is `[[0, 1], [-1, 0]]`.
//! * Entropies are in bits.

pub mod bounds;
pub mod channels;
pub mod error;
pub mod extend;
pub mod fgs;
pub mod format;
pub mod matalg;
pub mod oracle;
pub mod random;
pub mod sdp;
pub mod sweep;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
pub use tol::Tolerances;

pub use nalgebra::DMatrix;
