use serde::{Deserialize, Serialize};

/// Numerical tolerances, one per failure class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Slack allowed on every `I + iK >= 0` condition for closed-form inputs.
    pub eps_psd: f64,
    /// Slack allowed on solver-produced witnesses.
    pub eps_feas: f64,
    /// Target accuracy of eigenvalue computations.
    pub eig: f64,
    /// Relative accuracy of `Pf(K)^2 = det K`.
    pub pfaffian_rel: f64,
    /// Largest symmetric residue accepted by [`crate::matalg::antisymmetrize`],
    /// relative to the largest input entry.
    pub antisym_rtol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_psd: 1e-9,
            eps_feas: 1e-7,
            eig: 1e-10,
            pfaffian_rel: 1e-8,
            antisym_rtol: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> crate::Result<()> {
        let all = [
            self.eps_psd,
            self.eps_feas,
            self.eig,
            self.pfaffian_rel,
            self.antisym_rtol,
        ];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(crate::Error::InvalidParameter(
                "tolerances must be positive and finite".into(),
            ))
        }
    }
}
