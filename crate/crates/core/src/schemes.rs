//! Money schemes and the objective operators of their counterfeiting SDPs.
//!
//! Quantum-verification schemes are ensembles `{(p_k, |ψ_k⟩)}`; the bank
//! verifies a note with `{|ψ_k⟩⟨ψ_k|, 𝟙 − |ψ_k⟩⟨ψ_k|}`. Their objective is
//! `Q = Σ_k p_k |ψ_k ψ_k ψ̄_k⟩⟨ψ_k ψ_k ψ̄_k|` on `Y ⊗ Z ⊗ X`.
//!
//! Classical-verification (ticket) schemes encode `|e_t^b⟩` from one of two
//! bases, send a challenge bit `c`, and accept an answer `a` when `b ≠ c` or
//! `a = t`. Their objective is block diagonal in the challenges and answers.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{
    basis_vector, binomial, c64, conj_vec, kron, kron_vec, outer, partial_transpose,
    symmetric_projector, ComplexMatrix, FactoredDims, HermitianOperator, StateVector,
};
use crate::sdp::CloningSdp;

const ENSEMBLE_TOLERANCE: f64 = 1e-12;
const BASIS_TOLERANCE: f64 = 1e-12;

/// One `(weight, state)` pair of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleItem {
    pub weight: f64,
    pub state: StateVector,
}

/// Probability distribution over pure states of `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    dim: usize,
    items: Vec<EnsembleItem>,
}

impl Ensemble {
    pub fn new(items: Vec<(f64, StateVector)>) -> Result<Self> {
        let Some(first) = items.first() else {
            return Err(Error::InvalidEnsemble("ensemble is empty".into()));
        };
        let dim = first.1.len();
        if dim == 0 {
            return Err(Error::InvalidEnsemble(
                "states must have dimension >= 1".into(),
            ));
        }
        let mut total = 0.0;
        for (k, (weight, state)) in items.iter().enumerate() {
            if state.len() != dim {
                return Err(Error::InvalidEnsemble(format!(
                    "state {k} has dimension {}, expected {dim}",
                    state.len()
                )));
            }
            if !weight.is_finite() || *weight < 0.0 {
                return Err(Error::InvalidEnsemble(format!("weight {k} is {weight}")));
            }
            let norm = state.norm();
            if (norm - 1.0).abs() > ENSEMBLE_TOLERANCE {
                return Err(Error::InvalidEnsemble(format!("state {k} has norm {norm}")));
            }
            total += weight;
        }
        if (total - 1.0).abs() > ENSEMBLE_TOLERANCE {
            return Err(Error::InvalidEnsemble(format!("weights sum to {total}")));
        }
        Ok(Self {
            dim,
            items: items
                .into_iter()
                .map(|(weight, state)| EnsembleItem { weight, state })
                .collect(),
        })
    }

    /// Uniform weights over the given states.
    pub fn uniform(states: Vec<StateVector>) -> Result<Self> {
        let w = 1.0 / states.len().max(1) as f64;
        Self::new(states.into_iter().map(|s| (w, s)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn items(&self) -> &[EnsembleItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// `Σ_k p_k |ψ_k⟩⟨ψ_k|`.
    pub fn average_state(&self) -> HermitianOperator {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for item in &self.items {
            m += outer(&item.state, &item.state) * c64(item.weight, 0.0);
        }
        HermitianOperator::from_hermitian_part(&m)
    }
}

fn ket(amplitudes: &[(f64, f64)]) -> StateVector {
    StateVector::from_iterator(
        amplitudes.len(),
        amplitudes.iter().map(|&(re, im)| c64(re, im)),
    )
}

/// `{|0⟩, |1⟩, |+⟩, |−⟩}` with weight 1/4 each.
pub fn wiesner_ensemble() -> Ensemble {
    let s = 0.5f64.sqrt();
    Ensemble::uniform(vec![
        ket(&[(1.0, 0.0), (0.0, 0.0)]),
        ket(&[(0.0, 0.0), (1.0, 0.0)]),
        ket(&[(s, 0.0), (s, 0.0)]),
        ket(&[(s, 0.0), (-s, 0.0)]),
    ])
    .expect("Wiesner ensemble is valid")
}

/// The three Pauli eigenbases, weight 1/6 each.
pub fn six_state_ensemble() -> Ensemble {
    let s = 0.5f64.sqrt();
    Ensemble::uniform(vec![
        ket(&[(1.0, 0.0), (0.0, 0.0)]),
        ket(&[(0.0, 0.0), (1.0, 0.0)]),
        ket(&[(s, 0.0), (s, 0.0)]),
        ket(&[(s, 0.0), (-s, 0.0)]),
        ket(&[(s, 0.0), (0.0, s)]),
        ket(&[(s, 0.0), (0.0, -s)]),
    ])
    .expect("six-state ensemble is valid")
}

/// Tetrahedral qubit SIC: `|0⟩` and `3^{-1/2}|0⟩ + (2/3)^{1/2} ω^j |1⟩` for
/// `j = 0, 1, 2`, `ω = e^{2πi/3}`; weight 1/4 each.
pub fn sic_qubit_ensemble() -> Ensemble {
    let a = (1.0f64 / 3.0).sqrt();
    let b = (2.0f64 / 3.0).sqrt();
    let mut states = vec![ket(&[(1.0, 0.0), (0.0, 0.0)])];
    for j in 0..3 {
        let phase = 2.0 * PI * j as f64 / 3.0;
        states.push(ket(&[(a, 0.0), (b * phase.cos(), b * phase.sin())]));
    }
    Ensemble::uniform(states).expect("SIC ensemble is valid")
}

/// Computational and Fourier bases of `C^d`, weight `1/(2d)` each. For `d = 2`
/// this is the Wiesner ensemble up to ordering.
pub fn two_basis_ensemble(d: usize) -> Result<Ensemble> {
    let pair = fourier_basis_pair(d)?;
    Ensemble::uniform(pair.basis0.into_iter().chain(pair.basis1).collect())
}

/// `Q = Σ_k p_k |ψ_k ⊗ ψ_k ⊗ ψ̄_k⟩⟨ψ_k ⊗ ψ_k ⊗ ψ̄_k|` on `C^{d³}`.
pub fn build_q_quantum(e: &Ensemble) -> HermitianOperator {
    let n = e.dim().pow(3);
    let mut q = ComplexMatrix::zeros(n, n);
    for item in e.items() {
        let v = kron_vec(&kron_vec(&item.state, &item.state), &conj_vec(&item.state));
        q += outer(&v, &v) * c64(item.weight, 0.0);
    }
    HermitianOperator::from_hermitian_part(&q)
}

/// `Q = (𝟙 ⊗ 𝟙 ⊗ T)(Π) / rank(Π)` with `Π` the symmetric projector on `(C^d)^{⊗3}`.
pub fn build_q_symmetric(d: usize) -> Result<HermitianOperator> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "symmetric scheme needs d >= 2, got {d}"
        )));
    }
    let pi = symmetric_projector(d, 3)?;
    let dims = FactoredDims::uniform(d, 3)?;
    let q = partial_transpose(&pi, &dims, 2)?;
    Ok(q.scale(1.0 / binomial(d + 2, 3)))
}

/// The cloning SDP of a quantum-verification objective on `C^d ⊗ C^d ⊗ C^d`.
pub fn quantum_problem(q: HermitianOperator, d: usize) -> Result<CloningSdp> {
    CloningSdp::new(q, FactoredDims::uniform(d, 3)?)
}

/// Quantum Fourier transform `F|i⟩ = d^{-1/2} Σ_j ω^{ij} |j⟩`, `ω = e^{2πi/d}`.
pub fn fourier_matrix(d: usize) -> ComplexMatrix {
    let norm = 1.0 / (d as f64).sqrt();
    ComplexMatrix::from_fn(d, d, |j, i| {
        let angle = 2.0 * PI * ((i * j) % d) as f64 / d as f64;
        c64(norm * angle.cos(), norm * angle.sin())
    })
}

/// Two orthonormal bases `{|e_t^0⟩}` and `{|e_t^1⟩}` of `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisPair {
    dim: usize,
    pub basis0: Vec<StateVector>,
    pub basis1: Vec<StateVector>,
}

fn check_orthonormal(basis: &[StateVector], d: usize, label: &str) -> Result<()> {
    if basis.len() != d {
        return Err(Error::InvalidBasis(format!(
            "{label} has {} vectors, expected {d}",
            basis.len()
        )));
    }
    for (i, u) in basis.iter().enumerate() {
        if u.len() != d {
            return Err(Error::InvalidBasis(format!(
                "{label} vector {i} has dimension {}, expected {d}",
                u.len()
            )));
        }
        for (j, v) in basis.iter().enumerate() {
            let ip = u.dotc(v);
            let want = if i == j { 1.0 } else { 0.0 };
            if (ip - c64(want, 0.0)).norm() > BASIS_TOLERANCE {
                return Err(Error::InvalidBasis(format!(
                    "{label} is not orthonormal: <e_{i}|e_{j}> = {ip}"
                )));
            }
        }
    }
    Ok(())
}

impl BasisPair {
    pub fn new(basis0: Vec<StateVector>, basis1: Vec<StateVector>) -> Result<Self> {
        let dim = basis0.len();
        if dim == 0 {
            return Err(Error::InvalidBasis("empty basis".into()));
        }
        check_orthonormal(&basis0, dim, "basis0")?;
        check_orthonormal(&basis1, dim, "basis1")?;
        Ok(Self {
            dim,
            basis0,
            basis1,
        })
    }

    /// Bases given as the columns of two unitaries.
    pub fn from_columns(u0: &ComplexMatrix, u1: &ComplexMatrix) -> Result<Self> {
        let cols = |u: &ComplexMatrix| (0..u.ncols()).map(|j| u.column(j).into_owned()).collect();
        Self::new(cols(u0), cols(u1))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self, b: usize) -> &[StateVector] {
        match b {
            0 => &self.basis0,
            1 => &self.basis1,
            _ => panic!("basis index {b} out of range"),
        }
    }

    /// `c = max_{s,t} |⟨e_s^0|e_t^1⟩|²`.
    pub fn effective_overlap(&self) -> f64 {
        effective_overlap(self)
    }
}

/// `c = max_{s,t} |⟨e_s^0|e_t^1⟩|²`, always in `[1/d, 1]`.
pub fn effective_overlap(pair: &BasisPair) -> f64 {
    pair.basis0
        .iter()
        .flat_map(|u| pair.basis1.iter().map(move |v| u.dotc(v).norm_sqr()))
        .fold(0.0, f64::max)
}

/// Computational basis and the columns of the Fourier transform.
pub fn fourier_basis_pair(d: usize) -> Result<BasisPair> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "ticket scheme needs d >= 2, got {d}"
        )));
    }
    BasisPair::from_columns(&ComplexMatrix::identity(d, d), &fourier_matrix(d))
}

/// Secret key of a ticket: the note holds `|e_t^b⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TicketKey {
    pub t: usize,
    pub b: usize,
}

type AnswerPredicate = dyn Fn(usize, usize, TicketKey) -> bool + Send + Sync;

/// Rule deciding whether answer `a` to challenge `c` is valid for key `k`.
#[derive(Clone)]
pub enum AnswerRule {
    /// Accept iff `b ≠ c` or `a = t`.
    Standard,
    /// Caller-supplied set of valid `(a, c, k)` triples.
    Custom(Arc<AnswerPredicate>),
}

impl fmt::Debug for AnswerRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Standard => f.write_str("Standard"),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Classical-verification scheme over two bases with one-bit challenges.
#[derive(Debug, Clone)]
pub struct TicketScheme {
    pair: BasisPair,
    rule: AnswerRule,
}

impl TicketScheme {
    pub const CHALLENGES: usize = 2;

    pub fn new(pair: BasisPair) -> Self {
        Self {
            pair,
            rule: AnswerRule::Standard,
        }
    }

    pub fn with_rule(
        pair: BasisPair,
        rule: impl Fn(usize, usize, TicketKey) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            pair,
            rule: AnswerRule::Custom(Arc::new(rule)),
        }
    }

    pub fn dim(&self) -> usize {
        self.pair.dim()
    }

    pub fn basis_pair(&self) -> &BasisPair {
        &self.pair
    }

    /// All `2d` keys; each is drawn with probability `1/(2d)`.
    pub fn keys(&self) -> impl Iterator<Item = TicketKey> + '_ {
        (0..2).flat_map(move |b| (0..self.dim()).map(move |t| TicketKey { t, b }))
    }

    pub fn key_probability(&self) -> f64 {
        1.0 / (2 * self.dim()) as f64
    }

    pub fn key_state(&self, key: TicketKey) -> &StateVector {
        &self.pair.basis(key.b)[key.t]
    }

    pub fn accepts(&self, answer: usize, challenge: usize, key: TicketKey) -> bool {
        match &self.rule {
            AnswerRule::Standard => key.b != challenge || answer == key.t,
            AnswerRule::Custom(f) => f(answer, challenge, key),
        }
    }

    /// Worst case, over keys and challenges, of the probability that an honest
    /// holder measuring in basis `c` is accepted.
    pub fn honest_acceptance(&self) -> f64 {
        let mut worst = f64::INFINITY;
        for key in self.keys() {
            let psi = self.key_state(key);
            for c in 0..Self::CHALLENGES {
                let p: f64 = self
                    .pair
                    .basis(c)
                    .iter()
                    .enumerate()
                    .filter(|&(a, _)| self.accepts(a, c, key))
                    .map(|(_, e)| e.dotc(psi).norm_sqr())
                    .sum();
                worst = worst.min(p);
            }
        }
        worst
    }
}

/// Ticket scheme over the computational and Fourier bases of `C^d`.
pub fn fourier_ticket_scheme(d: usize) -> Result<TicketScheme> {
    Ok(TicketScheme::new(fourier_basis_pair(d)?))
}

/// Objective for one challenge pair `(c₁, c₂)`.
#[derive(Debug, Clone)]
pub struct ChallengeBlock {
    pub challenges: (usize, usize),
    /// Probability `1/|C|²` of this challenge pair.
    pub weight: f64,
    /// `Q^{a₁a₂} = Σ_k p_k [valid] |ψ_k⟩⟨ψ_k|` indexed by `a₁·d + a₂`.
    pub answer_blocks: Vec<HermitianOperator>,
    /// `Σ_{a₁a₂} |a₁a₂⟩⟨a₁a₂| ⊗ Q^{a₁a₂}` on `C^d ⊗ C^d ⊗ C^d`.
    pub q: HermitianOperator,
}

impl ChallengeBlock {
    pub fn answer_block(&self, a1: usize, a2: usize) -> &HermitianOperator {
        let d = (self.answer_blocks.len() as f64).sqrt().round() as usize;
        &self.answer_blocks[a1 * d + a2]
    }

    pub fn problem(&self) -> Result<CloningSdp> {
        let d = self.q.dim();
        let d = (d as f64).cbrt().round() as usize;
        CloningSdp::new(self.q.clone(), FactoredDims::uniform(d, 3)?)
    }
}

/// The classical-verification objective, one block per challenge pair.
#[derive(Debug, Clone)]
pub struct ClassicalObjective {
    pub dim: usize,
    pub blocks: Vec<ChallengeBlock>,
}

impl ClassicalObjective {
    pub fn problems(&self) -> Result<Vec<CloningSdp>> {
        self.blocks.iter().map(ChallengeBlock::problem).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.weight).collect()
    }

    pub fn block(&self, c1: usize, c2: usize) -> &ChallengeBlock {
        self.blocks
            .iter()
            .find(|b| b.challenges == (c1, c2))
            .expect("challenge pair present")
    }

    /// Full objective on `(a₁, a₂) ⊗ (c₁, c₂, x)`: the input register carries
    /// the two challenges and the ticket.
    pub fn full_q(&self) -> HermitianOperator {
        let d = self.dim;
        let nc = self.blocks.len();
        let inner = nc * d;
        let n = d * d * inner;
        let mut q = ComplexMatrix::zeros(n, n);
        for (ci, block) in self.blocks.iter().enumerate() {
            for (a, qa) in block.answer_blocks.iter().enumerate() {
                let offset = a * inner + ci * d;
                let mut view = q.view_mut((offset, offset), (d, d));
                view += qa.matrix() * c64(block.weight, 0.0);
            }
        }
        HermitianOperator::from_hermitian_part(&q)
    }
}

/// Builds the objective blocks of a ticket scheme. The ticket register is not
/// conjugated, so a block's optimal primal variable is directly a POVM
/// `{A^{a₁a₂}}` with success `Σ ⟨ψ_k|A^{a₁a₂}|ψ_k⟩`.
pub fn build_q_classical(scheme: &TicketScheme) -> ClassicalObjective {
    let d = scheme.dim();
    let p = scheme.key_probability();
    let nc = TicketScheme::CHALLENGES;
    let mut blocks = Vec::with_capacity(nc * nc);
    for c1 in 0..nc {
        for c2 in 0..nc {
            let mut answer_blocks = Vec::with_capacity(d * d);
            let mut q = ComplexMatrix::zeros(d * d * d, d * d * d);
            for a1 in 0..d {
                for a2 in 0..d {
                    let mut qa = ComplexMatrix::zeros(d, d);
                    for key in scheme.keys() {
                        if scheme.accepts(a1, c1, key) && scheme.accepts(a2, c2, key) {
                            let psi = scheme.key_state(key);
                            qa += outer(psi, psi) * c64(p, 0.0);
                        }
                    }
                    let label = basis_vector(d * d, a1 * d + a2);
                    q += kron(&outer(&label, &label), &qa);
                    answer_blocks.push(HermitianOperator::from_hermitian_part(&qa));
                }
            }
            blocks.push(ChallengeBlock {
                challenges: (c1, c2),
                weight: 1.0 / (nc * nc) as f64,
                answer_blocks,
                q: HermitianOperator::from_hermitian_part(&q),
            });
        }
    }
    ClassicalObjective { dim: d, blocks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, partial_trace};
    use crate::random::random_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wiesner_ensemble_shape() {
        let e = wiesner_ensemble();
        assert_eq!(e.dim(), 2);
        assert_eq!(e.len(), 4);
        assert!(e.items().iter().all(|i| i.weight == 0.25));
        let avg = e.average_state();
        assert!(avg.max_abs_diff(&HermitianOperator::identity(2).scale(0.5)) < 1e-15);
        let overlap = e.items()[0].state.dotc(&e.items()[2].state).norm_sqr();
        assert!((overlap - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ensemble_validation() {
        let zero = basis_vector(2, 0);
        assert!(Ensemble::new(vec![]).is_err());
        assert!(Ensemble::new(vec![(0.5, zero.clone())]).is_err());
        assert!(Ensemble::new(vec![(1.0, zero.clone() * c64(2.0, 0.0))]).is_err());
        assert!(Ensemble::new(vec![(1.5, zero.clone()), (-0.5, zero.clone())]).is_err());
        assert!(Ensemble::new(vec![(0.5, zero.clone()), (0.5, basis_vector(3, 0))]).is_err());
        assert!(Ensemble::new(vec![(1.0, zero)]).is_ok());
    }

    #[test]
    fn wiesner_q_matches_display_and_norm() {
        let q = build_q_quantum(&wiesner_ensemble());
        let s = 0.5f64.sqrt();
        let plus = ket(&[(s, 0.0), (s, 0.0)]);
        let minus = ket(&[(s, 0.0), (-s, 0.0)]);
        let cube = |v: &StateVector| kron_vec(&kron_vec(v, v), v);
        let mut expected = ComplexMatrix::zeros(8, 8);
        for v in [basis_vector(2, 0), basis_vector(2, 1), plus, minus] {
            let c = cube(&v);
            expected += outer(&c, &c) * c64(0.25, 0.0);
        }
        assert!(max_abs(&(q.matrix() - expected)) < 1e-15);
        assert!((q.operator_norm().unwrap() - 3.0 / 8.0).abs() < 1e-12);
        assert!((q.trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn six_state_q_is_the_symmetric_q() {
        let q6 = build_q_quantum(&six_state_ensemble());
        let qs = build_q_symmetric(2).unwrap();
        assert!(q6.max_abs_diff(&qs) < 1e-12);
        assert!((q6.operator_norm().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sic_overlaps_and_norm() {
        let e = sic_qubit_ensemble();
        for (i, a) in e.items().iter().enumerate() {
            for b in &e.items()[i + 1..] {
                assert!((a.state.dotc(&b.state).norm_sqr() - 1.0 / 3.0).abs() < 1e-14);
            }
        }
        let q = build_q_quantum(&e);
        assert!((q.operator_norm().unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(
            e.average_state()
                .max_abs_diff(&HermitianOperator::identity(2).scale(0.5))
                < 1e-15
        );
    }

    #[test]
    fn single_state_q_is_rank_one() {
        let e = Ensemble::new(vec![(1.0, basis_vector(2, 0))]).unwrap();
        let q = build_q_quantum(&e);
        let expected = HermitianOperator::projector(&basis_vector(8, 0));
        assert_eq!(q, expected);
    }

    #[test]
    fn symmetric_q_norm_and_trace() {
        for d in 2..=5 {
            let q = build_q_symmetric(d).unwrap();
            assert!((q.trace() - 1.0).abs() < 1e-12);
            let want = 2.0 / (d * (d + 1)) as f64;
            assert!((q.operator_norm().unwrap() - want).abs() < 1e-10, "d={d}");
            assert!(q.min_eigenvalue().unwrap() > -1e-12);
        }
        assert!(build_q_symmetric(1).is_err());
    }

    #[test]
    fn symmetric_q_commutes_with_u_u_ubar() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = build_q_symmetric(3).unwrap();
        for _ in 0..10 {
            let u = random_unitary(3, &mut rng);
            let g = kron(&kron(&u, &u), &u.map(|z| z.conj()));
            let comm = &g * q.matrix() - q.matrix() * &g;
            assert!(max_abs(&comm) <= 1e-10);
        }
    }

    #[test]
    fn q_reduces_to_transposed_average_state() {
        for e in [
            wiesner_ensemble(),
            six_state_ensemble(),
            sic_qubit_ensemble(),
        ] {
            let q = build_q_quantum(&e);
            let dims = FactoredDims::uniform(2, 3).unwrap();
            let reduced = partial_trace(&q, &dims, &[2]).unwrap();
            assert!(reduced.max_abs_diff(&e.average_state().transpose()) < 1e-14);
        }
    }

    #[test]
    fn q_invariant_under_item_order() {
        let e = six_state_ensemble();
        let mut items: Vec<_> = e
            .items()
            .iter()
            .map(|i| (i.weight, i.state.clone()))
            .collect();
        items.reverse();
        items.swap(1, 4);
        let shuffled = Ensemble::new(items).unwrap();
        assert!(build_q_quantum(&e).max_abs_diff(&build_q_quantum(&shuffled)) < 1e-15);
    }

    #[test]
    fn fourier_scheme_overlaps() {
        let t2 = fourier_ticket_scheme(2).unwrap();
        let s = 0.5f64.sqrt();
        let pair = t2.basis_pair();
        assert!((&pair.basis1[0] - ket(&[(s, 0.0), (s, 0.0)])).norm() < 1e-15);
        assert!((&pair.basis1[1] - ket(&[(s, 0.0), (-s, 0.0)])).norm() < 1e-15);
        assert!((effective_overlap(pair) - 0.5).abs() < 1e-15);
        let t3 = fourier_ticket_scheme(3).unwrap();
        for u in &t3.basis_pair().basis0 {
            for v in &t3.basis_pair().basis1 {
                assert!((u.dotc(v).norm_sqr() - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        assert!((t3.basis_pair().effective_overlap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identical_bases_have_overlap_one() {
        let id = ComplexMatrix::identity(3, 3);
        let pair = BasisPair::from_columns(&id, &id).unwrap();
        assert!((effective_overlap(&pair) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn basis_pair_rejects_non_orthonormal() {
        let mut m = ComplexMatrix::identity(2, 2);
        m[(0, 1)] = c64(0.1, 0.0);
        assert!(BasisPair::from_columns(&ComplexMatrix::identity(2, 2), &m).is_err());
        assert!(BasisPair::new(vec![basis_vector(2, 0)], vec![basis_vector(2, 0)]).is_err());
    }

    #[test]
    fn honest_users_always_pass() {
        for d in 2..=5 {
            assert!((fourier_ticket_scheme(d).unwrap().honest_acceptance() - 1.0).abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pair =
            BasisPair::from_columns(&random_unitary(3, &mut rng), &random_unitary(3, &mut rng))
                .unwrap();
        assert!((TicketScheme::new(pair).honest_acceptance() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn custom_rule_is_used() {
        let pair = fourier_basis_pair(2).unwrap();
        let strict = TicketScheme::with_rule(pair, |a, _c, k| a == k.t);
        assert!(!strict.accepts(1, 1, TicketKey { t: 0, b: 0 }));
        assert!(strict.honest_acceptance() < 1.0);
    }

    #[test]
    fn classical_blocks_for_mixed_challenges() {
        for d in 2..=3 {
            let scheme = fourier_ticket_scheme(d).unwrap();
            let obj = build_q_classical(&scheme);
            let block = obj.block(0, 1);
            let pair = scheme.basis_pair();
            for s in 0..d {
                for t in 0..d {
                    let v = outer(&pair.basis0[s], &pair.basis0[s])
                        + outer(&pair.basis1[t], &pair.basis1[t]);
                    let want = v * c64(1.0 / (2 * d) as f64, 0.0);
                    assert!(max_abs(&(block.answer_block(s, t).matrix() - want)) < 1e-15);
                }
            }
        }
    }

    #[test]
    fn v_block_eigenvalues() {
        let scheme = fourier_ticket_scheme(2).unwrap();
        let pair = scheme.basis_pair();
        let v = HermitianOperator::projector(&pair.basis0[0])
            .add(&HermitianOperator::projector(&pair.basis1[1]));
        let values = v.eigenvalues().unwrap();
        let r = 0.5f64.sqrt();
        assert!((values[0] - (1.0 - r)).abs() < 1e-14);
        assert!((values[1] - (1.0 + r)).abs() < 1e-14);
    }

    #[test]
    fn classical_objective_is_normalized() {
        for d in 2..=4 {
            let obj = build_q_classical(&fourier_ticket_scheme(d).unwrap());
            assert!((obj.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
            assert_eq!(obj.full_q().dim(), d * d * 4 * d);
            // with every answer accepted, any POVM (here 𝟙/d²) succeeds with probability 1
            let pair = fourier_basis_pair(d).unwrap();
            let lax = build_q_classical(&TicketScheme::with_rule(pair, |_, _, _| true));
            let value: f64 = lax
                .blocks
                .iter()
                .map(|b| b.weight * b.answer_blocks.iter().map(|q| q.trace()).sum::<f64>())
                .sum::<f64>()
                / (d * d) as f64;
            assert!((value - 1.0).abs() < 1e-12);
        }
    }
}
