//! Choi–Jamiołkowski representation of channels.
//!
//! `J(Φ) = Σ_{ij} Φ(|i⟩⟨j|) ⊗ |i⟩⟨j|` lives on `output ⊗ input`, input last.
//! `Φ` is completely positive iff `J ⪰ 0` and trace preserving iff
//! `Tr_output J = 𝟙_input`.

use crate::error::{Error, Result};
use crate::linalg::{
    c64, conj_vec, frobenius, kron, kron_vec, outer, trace_out_leading, ComplexMatrix,
    HermitianOperator, StateVector,
};
use crate::schemes::Ensemble;

/// Absolute tolerance on the minimum Choi eigenvalue and the trace defect.
pub const CPTP_TOLERANCE: f64 = 1e-9;

const KRAUS_TOLERANCE: f64 = 1e-10;
const ROUTE_TOLERANCE: f64 = 1e-12;

/// Kraus operators `A_i : C^in → C^out` with `Σ A_i† A_i = 𝟙`.
#[derive(Debug, Clone)]
pub struct KrausSet {
    in_dim: usize,
    out_dim: usize,
    ops: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = ops.first() else {
            return Err(Error::InvalidArgument("empty Kraus set".into()));
        };
        let (out_dim, in_dim) = first.shape();
        if ops.iter().any(|a| a.shape() != (out_dim, in_dim)) {
            return Err(Error::Dimension("Kraus operators differ in shape".into()));
        }
        let mut sum = ComplexMatrix::zeros(in_dim, in_dim);
        for a in &ops {
            sum += a.adjoint() * a;
        }
        let residual = frobenius(&(sum - ComplexMatrix::identity(in_dim, in_dim)));
        if residual > KRAUS_TOLERANCE {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(Self {
            in_dim,
            out_dim,
            ops,
        })
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.ops.iter().map(|a| a * rho * a.adjoint()).fold(
            ComplexMatrix::zeros(self.out_dim, self.out_dim),
            |acc, m| acc + m,
        )
    }
}

/// Choi operator of a quantum channel `L(C^in) → L(C^out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiOperator {
    in_dim: usize,
    out_dim: usize,
    matrix: HermitianOperator,
}

impl ChoiOperator {
    /// Wraps a matrix on `output ⊗ input`, checking CP and TP to [`CPTP_TOLERANCE`].
    pub fn new(matrix: HermitianOperator, in_dim: usize, out_dim: usize) -> Result<Self> {
        if matrix.dim() != in_dim * out_dim {
            return Err(Error::Dimension(format!(
                "Choi matrix has dimension {}, expected {out_dim}·{in_dim}",
                matrix.dim()
            )));
        }
        let choi = Self {
            in_dim,
            out_dim,
            matrix,
        };
        let min_eigenvalue = choi.cp_residual()?;
        if min_eigenvalue < -CPTP_TOLERANCE {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        let residual = choi.tp_residual();
        if residual > CPTP_TOLERANCE {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(choi)
    }

    /// `J = Σ_i vec(A_i) vec(A_i)†` in the output-first ordering.
    pub fn from_kraus(kraus: &KrausSet) -> Result<Self> {
        let (din, dout) = (kraus.in_dim(), kraus.out_dim());
        let n = din * dout;
        let mut j = ComplexMatrix::zeros(n, n);
        for a in kraus.ops() {
            // |A⟩⟩ = Σ_i A|i⟩ ⊗ |i⟩
            let mut v = StateVector::zeros(n);
            for y in 0..dout {
                for i in 0..din {
                    v[y * din + i] = a[(y, i)];
                }
            }
            j += outer(&v, &v);
        }
        Self::new(HermitianOperator::from_hermitian_part(&j), din, dout)
    }

    /// Choi operator of a linear map given by its action on matrices.
    pub fn from_map(
        in_dim: usize,
        out_dim: usize,
        map: impl Fn(&ComplexMatrix) -> ComplexMatrix,
    ) -> Result<Self> {
        let n = in_dim * out_dim;
        let mut j = ComplexMatrix::zeros(n, n);
        for r in 0..in_dim {
            for c in 0..in_dim {
                let mut unit = ComplexMatrix::zeros(in_dim, in_dim);
                unit[(r, c)] = c64(1.0, 0.0);
                let image = map(&unit);
                if image.shape() != (out_dim, out_dim) {
                    return Err(Error::Dimension(format!(
                        "map output has shape {:?}, expected {out_dim}x{out_dim}",
                        image.shape()
                    )));
                }
                j += kron(&image, &unit);
            }
        }
        Self::new(HermitianOperator::new(j)?, in_dim, out_dim)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn matrix(&self) -> &HermitianOperator {
        &self.matrix
    }

    pub fn into_matrix(self) -> HermitianOperator {
        self.matrix
    }

    /// Minimum eigenvalue of `J`.
    pub fn cp_residual(&self) -> Result<f64> {
        self.matrix.min_eigenvalue()
    }

    /// `‖Tr_out J − 𝟙‖_F`.
    pub fn tp_residual(&self) -> f64 {
        let reduced = trace_out_leading(self.matrix.matrix(), self.out_dim, self.in_dim);
        frobenius(&(reduced - ComplexMatrix::identity(self.in_dim, self.in_dim)))
    }

    /// `Φ(ρ) = Σ_{ij} ρ_ij Φ(|i⟩⟨j|)`, read off the blocks of `J`.
    pub fn apply(&self, rho: &HermitianOperator) -> Result<HermitianOperator> {
        if rho.dim() != self.in_dim {
            return Err(Error::Dimension(format!(
                "state has dimension {}, channel input is {}",
                rho.dim(),
                self.in_dim
            )));
        }
        let (din, dout) = (self.in_dim, self.out_dim);
        let j = self.matrix.matrix();
        let r = rho.matrix();
        let out = ComplexMatrix::from_fn(dout, dout, |y, yp| {
            let mut acc = c64(0.0, 0.0);
            for i in 0..din {
                for k in 0..din {
                    acc += r[(i, k)] * j[(y * din + i, yp * din + k)];
                }
            }
            acc
        });
        Ok(HermitianOperator::from_hermitian_part(&out))
    }

    /// `⟨φ ⊗ ψ̄| J |φ ⊗ ψ̄⟩`, which equals `⟨φ|Φ(|ψ⟩⟨ψ|)|φ⟩`.
    pub fn quadratic_form(&self, phi: &StateVector, psi: &StateVector) -> Result<f64> {
        if phi.len() != self.out_dim || psi.len() != self.in_dim {
            return Err(Error::Dimension(format!(
                "vectors of dimension ({}, {}) for a {}→{} channel",
                phi.len(),
                psi.len(),
                self.in_dim,
                self.out_dim
            )));
        }
        Ok(self.matrix.expectation(&kron_vec(phi, &conj_vec(psi))))
    }

    /// `⟨ψψ|Φ(|ψ⟩⟨ψ|)|ψψ⟩` for a cloner `C^d → C^d ⊗ C^d`.
    pub fn clone_fidelity(&self, psi: &StateVector) -> Result<f64> {
        self.check_cloner(psi.len())?;
        let out = self.apply(&HermitianOperator::projector(psi))?;
        Ok(out.expectation(&kron_vec(psi, psi)))
    }

    fn check_cloner(&self, d: usize) -> Result<()> {
        if self.in_dim != d || self.out_dim != d * d {
            return Err(Error::Dimension(format!(
                "expected a {d}→{} cloner, got {}→{}",
                d * d,
                self.in_dim,
                self.out_dim
            )));
        }
        Ok(())
    }
}

/// Success probability by applying the channel to each note and projecting
/// onto two copies.
pub fn success_probability_direct(j: &ChoiOperator, e: &Ensemble) -> Result<f64> {
    j.check_cloner(e.dim())?;
    e.items().iter().try_fold(0.0, |acc, item| {
        Ok(acc + item.weight * j.clone_fidelity(&item.state)?)
    })
}

/// Success probability through the Choi quadratic form `⟨ψψψ̄|J|ψψψ̄⟩`.
pub fn success_probability_choi(j: &ChoiOperator, e: &Ensemble) -> Result<f64> {
    j.check_cloner(e.dim())?;
    e.items().iter().try_fold(0.0, |acc, item| {
        let two = kron_vec(&item.state, &item.state);
        Ok(acc + item.weight * j.quadratic_form(&two, &item.state)?)
    })
}

/// `Σ_k p_k ⟨ψ_k ψ_k|Φ(|ψ_k⟩⟨ψ_k|)|ψ_k ψ_k⟩`, evaluated by both routes which
/// must agree to 1e-12.
pub fn success_probability(j: &ChoiOperator, e: &Ensemble) -> Result<f64> {
    let direct = success_probability_direct(j, e)?;
    let choi = success_probability_choi(j, e)?;
    if (direct - choi).abs() > ROUTE_TOLERANCE {
        return Err(Error::RouteMismatch(format!(
            "direct {direct} vs Choi {choi}"
        )));
    }
    Ok(direct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, identity, max_abs};
    use crate::random::{random_kraus, random_state};
    use crate::schemes::wiesner_ensemble;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_channel_choi() {
        let k = KrausSet::new(vec![identity(2)]).unwrap();
        let j = ChoiOperator::from_kraus(&k).unwrap();
        let s = 0.5f64.sqrt();
        let bell =
            StateVector::from_vec(vec![c64(s, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(s, 0.0)]);
        let expected = HermitianOperator::projector(&bell).scale(2.0);
        assert!(j.matrix().max_abs_diff(&expected) < 1e-15);
        assert!(j.tp_residual() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rho = HermitianOperator::projector(&random_state(2, &mut rng));
        assert!(j.apply(&rho).unwrap().max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn non_tp_kraus_is_rejected() {
        let half = identity(2) * c64(0.5, 0.0);
        match KrausSet::new(vec![half]) {
            Err(Error::NotTracePreserving { residual }) => assert!(residual > 0.1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn from_kraus_and_from_map_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let k = KrausSet::new(random_kraus(3, 4, 3, &mut rng)).unwrap();
        let a = ChoiOperator::from_kraus(&k).unwrap();
        let b = ChoiOperator::from_map(3, 4, |m| k.apply(m)).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-14);
        // rank ≤ number of Kraus operators
        let values = a.matrix().eigenvalues().unwrap();
        assert!(values[..values.len() - 3].iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn apply_matches_kraus_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let k = KrausSet::new(random_kraus(2, 4, 2, &mut rng)).unwrap();
        let j = ChoiOperator::from_kraus(&k).unwrap();
        let psi = random_state(2, &mut rng);
        let rho = HermitianOperator::projector(&psi);
        let out = j.apply(&rho).unwrap();
        assert!(max_abs(&(out.matrix() - k.apply(rho.matrix()))) < 1e-14);
        assert!((out.trace() - 1.0).abs() < 1e-12);
        assert!(out.min_eigenvalue().unwrap() > -1e-12);
    }

    #[test]
    fn choi_identity_for_quadratic_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let k = KrausSet::new(random_kraus(3, 2, 4, &mut rng)).unwrap();
        let j = ChoiOperator::from_kraus(&k).unwrap();
        for _ in 0..50 {
            let psi = random_state(3, &mut rng);
            let phi = random_state(2, &mut rng);
            let lhs = HermitianOperator::projector(&phi)
                .inner(&j.apply(&HermitianOperator::projector(&psi)).unwrap());
            let rhs = j.quadratic_form(&phi, &psi).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn new_rejects_non_cp_and_non_tp() {
        let not_tp = HermitianOperator::identity(4);
        assert!(matches!(
            ChoiOperator::new(not_tp, 2, 2),
            Err(Error::NotTracePreserving { .. })
        ));
        // transpose map: TP but not CP
        let t = ChoiOperator::from_map(2, 2, |m| m.transpose());
        assert!(matches!(t, Err(Error::NotPositive { .. })));
        assert!(ChoiOperator::new(HermitianOperator::identity(5), 2, 2).is_err());
    }

    #[test]
    fn dimension_errors() {
        let j = ChoiOperator::from_kraus(&KrausSet::new(vec![identity(2)]).unwrap()).unwrap();
        assert!(j.apply(&HermitianOperator::identity(3)).is_err());
        assert!(success_probability(&j, &wiesner_ensemble()).is_err());
        assert!(j
            .quadratic_form(&basis_vector(3, 0), &basis_vector(2, 0))
            .is_err());
    }
}
