//! Independent checking of primal/dual pairs for the cloning SDP.
//!
//! Nothing here looks at solver state: feasibility is decided from fresh
//! eigendecompositions of `X` and of `𝟙 ⊗ Y − Q`, and the objective values
//! are recomputed from the matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{FactoredDims, HermitianOperator};
use crate::sdp::CloningSdp;

/// Tolerance used when none is given. Looser than the solver's default so
/// that serialized solutions still pass.
pub const DEFAULT_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimalCheck {
    pub feasible: bool,
    /// `⟨Q, X⟩`.
    pub value: f64,
    pub min_eigenvalue: f64,
    /// `‖Tr_out(X) − 𝟙‖` in operator norm.
    pub trace_defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualCheck {
    pub feasible: bool,
    /// `Tr(Y)`.
    pub value: f64,
    /// Minimum eigenvalue of `𝟙 ⊗ Y − Q`.
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub primal: PrimalCheck,
    pub dual: DualCheck,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `dual_value − primal_value`.
    pub gap: f64,
    pub tolerance: f64,
    pub certified: bool,
}

fn check_tolerance(tol: f64) -> Result<()> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "tolerance must be finite and nonnegative, got {tol}"
        )))
    }
}

pub fn check_primal(x: &HermitianOperator, p: &CloningSdp, tol: f64) -> Result<PrimalCheck> {
    check_tolerance(tol)?;
    if x.dim() != p.q().dim() {
        return Err(Error::Dimension(format!(
            "primal variable has dimension {}, problem has {}",
            x.dim(),
            p.q().dim()
        )));
    }
    let min_eigenvalue = x.min_eigenvalue()?;
    let trace_defect = p
        .reduce(x)
        .sub(&HermitianOperator::identity(p.in_dim()))
        .operator_norm()?;
    Ok(PrimalCheck {
        feasible: min_eigenvalue >= -tol && trace_defect <= tol,
        value: p.q().inner(x),
        min_eigenvalue,
        trace_defect,
    })
}

pub fn check_dual(y: &HermitianOperator, p: &CloningSdp, tol: f64) -> Result<DualCheck> {
    check_tolerance(tol)?;
    if y.dim() != p.in_dim() {
        return Err(Error::Dimension(format!(
            "dual variable has dimension {}, input space has {}",
            y.dim(),
            p.in_dim()
        )));
    }
    let min_eigenvalue = p.lift(y).sub(p.q()).min_eigenvalue()?;
    Ok(DualCheck {
        feasible: min_eigenvalue >= -tol,
        value: y.trace(),
        min_eigenvalue,
    })
}

/// Certified iff both variables are feasible and the two values agree to `tol`.
pub fn certify(
    x: &HermitianOperator,
    y: &HermitianOperator,
    p: &CloningSdp,
    tol: f64,
) -> Result<CertificateReport> {
    let primal = check_primal(x, p, tol)?;
    let dual = check_dual(y, p, tol)?;
    let gap = dual.value - primal.value;
    Ok(CertificateReport {
        primal,
        dual,
        primal_value: primal.value,
        dual_value: dual.value,
        gap,
        tolerance: tol,
        certified: primal.feasible && dual.feasible && gap.abs() <= tol,
    })
}

/// A self-contained claim: objective, both variables and the claimed value.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub q: HermitianOperator,
    pub primal_x: HermitianOperator,
    pub dual_y: HermitianOperator,
    pub tolerance: f64,
    pub value: f64,
}

/// Outcome of checking a [`Certificate`]: the recomputed report plus whether
/// the claimed value matches it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub report: CertificateReport,
    pub claimed_value: f64,
    pub claimed_value_matches: bool,
    pub certified: bool,
}

impl Certificate {
    /// The problem implied by the shapes: the input space is that of `Y`.
    pub fn problem(&self) -> Result<CloningSdp> {
        let nin = self.dual_y.dim();
        let n = self.q.dim();
        if nin == 0 || !n.is_multiple_of(nin) {
            return Err(Error::Dimension(format!(
                "objective dimension {n} is not a multiple of the dual dimension {nin}"
            )));
        }
        CloningSdp::new(self.q.clone(), FactoredDims::new(vec![n / nin, nin])?)
    }

    pub fn check(&self, tol: f64) -> Result<CertificateCheck> {
        let p = self.problem()?;
        let report = certify(&self.primal_x, &self.dual_y, &p, tol)?;
        let claimed_value_matches = (self.value - report.primal_value).abs() <= tol
            && (self.value - report.dual_value).abs() <= tol;
        Ok(CertificateCheck {
            report,
            claimed_value: self.value,
            claimed_value_matches,
            certified: report.certified && claimed_value_matches,
        })
    }
}
