//! Explicit attacks: cloning channels for quantum verification and
//! measurement strategies for classical (ticket) verification.

use crate::channels::{ChoiOperator, KrausSet};
use crate::error::{Error, Result};
use crate::linalg::{
    c64, kron, symmetric_projector, ComplexMatrix, HermitianOperator, StateVector, C64,
};
use crate::schemes::{fourier_matrix, BasisPair, TicketScheme};
use crate::sdp::CloningSdp;

/// Completeness tolerance for strategy POVMs.
pub const POVM_TOLERANCE: f64 = 1e-10;

fn real_matrix(rows: usize, cols: usize, scale: f64, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| c64(scale * x, 0.0)))
}

fn from_kraus(ops: Vec<ComplexMatrix>) -> ChoiOperator {
    let kraus = KrausSet::new(ops).expect("fixed Kraus operators are complete");
    ChoiOperator::from_kraus(&kraus).expect("fixed Kraus operators define a channel")
}

/// Optimal counterfeiter for the four-state (two-basis) qubit scheme; its
/// success probability on that scheme is 3/4.
pub fn wiesner_optimal_cloner() -> ChoiOperator {
    let s = 1.0 / 12f64.sqrt();
    let a0 = real_matrix(4, 2, s, &[3.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0]);
    let a1 = real_matrix(4, 2, s, &[0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 3.0]);
    from_kraus(vec![a0, a1])
}

/// Universal symmetric qubit cloner with fidelity 2/3 on every pure state.
pub fn buzek_hillery_cloner() -> ChoiOperator {
    let s = 1.0 / 6f64.sqrt();
    let a0 = real_matrix(4, 2, s, &[2.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
    let a1 = real_matrix(4, 2, s, &[0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 2.0]);
    from_kraus(vec![a0, a1])
}

/// `ρ ↦ (2/(d+1)) S(ρ⊗𝟙)S` with `S` the projector onto the symmetric
/// subspace of `C^d ⊗ C^d`.
pub fn werner_cloner(d: usize) -> Result<ChoiOperator> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "cloner needs d >= 2, got {d}"
        )));
    }
    let sym = symmetric_projector(d, 2)?.into_matrix();
    let ident = ComplexMatrix::identity(d, d);
    let factor = c64(2.0 / (d + 1) as f64, 0.0);
    ChoiOperator::from_map(d, d * d, |rho| &sym * kron(rho, &ident) * &sym * factor)
}

/// Keeps the note as the first output and emits `|0⟩` as the second.
pub fn passthrough_cloner(d: usize) -> Result<ChoiOperator> {
    if d < 1 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut zero = ComplexMatrix::zeros(d, d);
    zero[(0, 0)] = c64(1.0, 0.0);
    ChoiOperator::from_map(d, d * d, |rho| kron(rho, &zero))
}

/// Generalized Pauli operators and the Fourier transform on `C^d`.
#[derive(Debug, Clone)]
pub struct PauliOperators {
    pub dim: usize,
    /// `|i⟩ ↦ |i+1 mod d⟩`.
    pub x: ComplexMatrix,
    /// `|i⟩ ↦ ω^i |i⟩`.
    pub z: ComplexMatrix,
    /// `|i⟩ ↦ d^{-1/2} Σ_j ω^{ij} |j⟩`.
    pub f: ComplexMatrix,
}

impl PauliOperators {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!(
                "Pauli operators need d >= 2, got {d}"
            )));
        }
        let mut x = ComplexMatrix::zeros(d, d);
        let mut z = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            x[((i + 1) % d, i)] = c64(1.0, 0.0);
            z[(i, i)] = root_of_unity(i, d);
        }
        Ok(Self {
            dim: d,
            x,
            z,
            f: fourier_matrix(d),
        })
    }

    /// `X^s Z^t`.
    pub fn displacement(&self, s: usize, t: usize) -> ComplexMatrix {
        self.x.pow((s % self.dim) as u32) * self.z.pow((t % self.dim) as u32)
    }
}

fn root_of_unity(k: usize, d: usize) -> C64 {
    let angle = 2.0 * std::f64::consts::PI * (k % d) as f64 / d as f64;
    c64(angle.cos(), angle.sin())
}

/// One POVM element together with the pair of answers it produces.
#[derive(Debug, Clone)]
pub struct PovmOutcome {
    pub element: HermitianOperator,
    pub answers: (usize, usize),
}

/// A counterfeiter against a ticket scheme: for each challenge pair
/// `(c₁, c₂)`, a POVM on the ticket with an answer pair per outcome.
#[derive(Debug, Clone)]
pub struct TicketStrategy {
    dim: usize,
    /// Indexed by `c₁·2 + c₂`.
    povms: Vec<Vec<PovmOutcome>>,
}

impl TicketStrategy {
    pub fn new(dim: usize, povms: Vec<Vec<PovmOutcome>>) -> Result<Self> {
        let nc = TicketScheme::CHALLENGES;
        if povms.len() != nc * nc {
            return Err(Error::Dimension(format!(
                "expected {} POVMs, got {}",
                nc * nc,
                povms.len()
            )));
        }
        for povm in &povms {
            let mut total = HermitianOperator::zeros(dim);
            for o in povm {
                if o.element.dim() != dim {
                    return Err(Error::Dimension(format!(
                        "POVM element of dimension {} in a {dim}-dimensional strategy",
                        o.element.dim()
                    )));
                }
                if o.answers.0 >= dim || o.answers.1 >= dim {
                    return Err(Error::InvalidArgument(format!(
                        "answer {:?} out of range for d = {dim}",
                        o.answers
                    )));
                }
                let min_eigenvalue = o.element.min_eigenvalue()?;
                if min_eigenvalue < -POVM_TOLERANCE {
                    return Err(Error::NotPositive { min_eigenvalue });
                }
                total = total.add(&o.element);
            }
            let residual = total.max_abs_diff(&HermitianOperator::identity(dim));
            if residual > POVM_TOLERANCE {
                return Err(Error::NotTracePreserving { residual });
            }
        }
        Ok(Self { dim, povms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn povm(&self, c1: usize, c2: usize) -> &[PovmOutcome] {
        &self.povms[c1 * TicketScheme::CHALLENGES + c2]
    }

    /// Largest deviation of any POVM from `Σ A = 𝟙` (max-abs entry).
    pub fn completeness_residual(&self) -> f64 {
        self.povms
            .iter()
            .map(|povm| {
                povm.iter()
                    .fold(HermitianOperator::zeros(self.dim), |acc, o| {
                        acc.add(&o.element)
                    })
                    .max_abs_diff(&HermitianOperator::identity(self.dim))
            })
            .fold(0.0, f64::max)
    }
}

/// Measures in `basis` and repeats the outcome as both answers.
fn basis_measurement(basis: &[StateVector]) -> Vec<PovmOutcome> {
    basis
        .iter()
        .enumerate()
        .map(|(a, e)| PovmOutcome {
            element: HermitianOperator::projector(e),
            answers: (a, a),
        })
        .collect()
}

/// Measures the ticket in basis `b` regardless of the challenges and gives the
/// outcome as both answers.
pub fn measure_in_basis(pair: &BasisPair, b: usize) -> Result<TicketStrategy> {
    if b >= 2 {
        return Err(Error::InvalidArgument(format!(
            "basis index {b} out of range"
        )));
    }
    let povm = basis_measurement(pair.basis(b));
    TicketStrategy::new(pair.dim(), vec![povm; 4])
}

/// Counterfeiter for the computational/Fourier ticket scheme. On equal
/// challenges it measures in the requested basis and repeats the outcome; on
/// distinct challenges it measures `{P_{s,t}/d}`, with `P_{s,t}` the projector
/// onto `X^s Z^t |ψ⟩`, `|ψ⟩ ∝ |0⟩ + F|0⟩`, and answers `s` to challenge 0 and
/// `t` to challenge 1.
pub fn ticket_cloner(d: usize) -> Result<TicketStrategy> {
    let paulis = PauliOperators::new(d)?;
    let pair = BasisPair::from_columns(&ComplexMatrix::identity(d, d), &paulis.f)?;
    let mut fiducial = paulis.f.column(0).into_owned();
    fiducial[0] += c64(1.0, 0.0);
    let norm = fiducial.norm();
    let fiducial = fiducial.unscale(norm);

    let mut mixed_01 = Vec::with_capacity(d * d);
    let mut mixed_10 = Vec::with_capacity(d * d);
    for s in 0..d {
        for t in 0..d {
            let v = paulis.displacement(s, t) * &fiducial;
            let element = HermitianOperator::projector(&v).scale(1.0 / d as f64);
            mixed_01.push(PovmOutcome {
                element: element.clone(),
                answers: (s, t),
            });
            mixed_10.push(PovmOutcome {
                element,
                answers: (t, s),
            });
        }
    }
    TicketStrategy::new(
        d,
        vec![
            basis_measurement(pair.basis(0)),
            mixed_01,
            mixed_10,
            basis_measurement(pair.basis(1)),
        ],
    )
}

/// Probability that both answers are accepted, averaged over keys and the
/// uniformly random challenge pair.
pub fn evaluate_ticket_strategy(s: &TicketStrategy, t: &TicketScheme) -> Result<f64> {
    if s.dim() != t.dim() {
        return Err(Error::Dimension(format!(
            "strategy for d = {} against a scheme with d = {}",
            s.dim(),
            t.dim()
        )));
    }
    let nc = TicketScheme::CHALLENGES;
    let challenge_weight = 1.0 / (nc * nc) as f64;
    let mut total = 0.0;
    for key in t.keys() {
        let psi = t.key_state(key);
        for c1 in 0..nc {
            for c2 in 0..nc {
                for o in s.povm(c1, c2) {
                    if t.accepts(o.answers.0, c1, key) && t.accepts(o.answers.1, c2, key) {
                        total +=
                            t.key_probability() * challenge_weight * o.element.expectation(psi);
                    }
                }
            }
        }
    }
    Ok(total)
}

/// Explicit optimal pair for the distinct-challenge block of a qubit ticket
/// scheme: `X = |00⟩⟨00| ⊗ |u₀⟩⟨u₀| + |11⟩⟨11| ⊗ |u₁⟩⟨u₁|` with `u₀`, `u₁` the
/// top and bottom eigenvectors of `V_{0,0}`, and `Y = (1+√c)/(2d) 𝟙`.
pub fn qubit_block_witness(
    scheme: &TicketScheme,
) -> Result<(CloningSdp, HermitianOperator, HermitianOperator)> {
    let d = scheme.dim();
    if d != 2 {
        return Err(Error::InvalidArgument(format!(
            "the explicit block witness is only defined for d = 2, got {d}"
        )));
    }
    let pair = scheme.basis_pair();
    let v00 = HermitianOperator::projector(&pair.basis(0)[0])
        .add(&HermitianOperator::projector(&pair.basis(1)[0]));
    let eig = v00.eig()?;
    let u1 = eig.vector(0);
    let u0 = eig.vector(1);
    let ket = |a: usize| {
        let mut v = StateVector::zeros(d);
        v[a] = c64(1.0, 0.0);
        v
    };
    let term = |a: usize, u: &StateVector| {
        HermitianOperator::projector(&ket(a))
            .kron(&HermitianOperator::projector(&ket(a)))
            .kron(&HermitianOperator::projector(u))
    };
    let x = term(0, &u0).add(&term(1, &u1));
    let c = pair.effective_overlap();
    let y = HermitianOperator::identity(d).scale((1.0 + c.sqrt()) / (2 * d) as f64);
    let problem = crate::schemes::build_q_classical(scheme)
        .block(0, 1)
        .problem()?;
    Ok((problem, x, y))
}
