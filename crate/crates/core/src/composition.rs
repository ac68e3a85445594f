//! Parallel repetition and threshold verification.
//!
//! An `n`-fold scheme lives on `(Y₁⊗Z₁⊗X₁) ⊗ … ⊗ (Y_n⊗Z_n⊗X_n)` when the single
//! objectives are tensored; the cloning SDP wants the registers grouped as
//! `(Y₁…Y_n) ⊗ (Z₁…Z_n) ⊗ (X₁…X_n)`. [`interleave_permutation`] is the factor
//! permutation between the two layouts.

use crate::certificates::{check_dual, check_primal};
use crate::error::{Error, Result};
use crate::linalg::{binomial, permutation_operator, FactoredDims, HermitianOperator};
use crate::schemes::{build_q_quantum, Ensemble};
use crate::sdp::CloningSdp;

/// Largest total dimension for which `R` is assembled densely in
/// [`verify_r_norm`].
pub const DENSE_R_LIMIT: usize = 1024;

/// Largest total dimension for explicitly built composed problems.
pub const DENSE_PROBLEM_LIMIT: usize = 4096;

/// Tolerance on `Σ p_k |ψ_k⟩⟨ψ_k| = 𝟙/d` in [`threshold_conditions_hold`].
pub const AVERAGE_STATE_TOLERANCE: f64 = 1e-10;
/// Tolerance on `‖Q‖ = α/d` in [`threshold_conditions_hold`].
pub const NORM_TOLERANCE: f64 = 1e-9;

/// `n` repetitions of a scheme with single-copy value `alpha`, accepted when
/// at least `t` of them pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepetitionSpec {
    pub alpha: f64,
    pub n: usize,
    pub t: usize,
}

impl RepetitionSpec {
    pub fn new(alpha: f64, n: usize, t: usize) -> Result<Self> {
        check_alpha(alpha)?;
        if t == 0 || t > n {
            return Err(Error::InvalidArgument(format!(
                "threshold must satisfy 1 <= t <= n, got t = {t}, n = {n}"
            )));
        }
        Ok(Self { alpha, n, t })
    }

    pub fn value(&self) -> f64 {
        binomial_tail(self.alpha, self.n, self.t)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "value {alpha} outside [0, 1]"
        )))
    }
}

fn binomial_tail(alpha: f64, n: usize, t: usize) -> f64 {
    (t..=n)
        .map(|j| binomial(n, j) * alpha.powi(j as i32) * (1.0 - alpha).powi((n - j) as i32))
        .sum()
}

/// `αⁿ`.
pub fn repeated_value(alpha: f64, n: usize) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(alpha.powi(n as i32))
}

/// `Σ_{j=t}^{n} C(n,j) αʲ (1−α)^{n−j}`.
pub fn threshold_value(alpha: f64, n: usize, t: usize) -> Result<f64> {
    Ok(RepetitionSpec::new(alpha, n, t)?.value())
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The threshold value for a rational `α = num/den`, as a reduced fraction.
pub fn threshold_value_exact(num: u64, den: u64, n: usize, t: usize) -> Result<(u128, u128)> {
    if den == 0 || num > den {
        return Err(Error::InvalidArgument(format!(
            "{num}/{den} is not in [0, 1]"
        )));
    }
    RepetitionSpec::new(num as f64 / den as f64, n, t)?;
    let overflow =
        || Error::InvalidArgument(format!("exact threshold value overflows for n = {n}"));
    let (p, q) = (num as u128, den as u128);
    let pow = |b: u128, e: usize| -> Result<u128> {
        (0..e).try_fold(1u128, |acc, _| acc.checked_mul(b).ok_or_else(overflow))
    };
    let mut total = 0u128;
    let mut choose = 1u128;
    for j in 0..=n {
        if j > 0 {
            choose = choose
                .checked_mul((n - j + 1) as u128)
                .ok_or_else(overflow)?
                / j as u128;
        }
        if j >= t {
            let term = choose
                .checked_mul(pow(p, j)?)
                .and_then(|x| x.checked_mul(pow(q - p, n - j).ok()?))
                .ok_or_else(overflow)?;
            total = total.checked_add(term).ok_or_else(overflow)?;
        }
    }
    let denom = pow(q, n)?;
    let g = gcd(total, denom).max(1);
    Ok((total / g, denom / g))
}

/// Permutation sending factor `r·k + f` of the interleaved layout to position
/// `f·n + r` of the grouped layout.
pub fn interleave_permutation(n: usize, k: usize) -> Vec<usize> {
    let mut perm = vec![0; n * k];
    for r in 0..n {
        for f in 0..k {
            perm[r * k + f] = f * n + r;
        }
    }
    perm
}

fn tensor_all(ops: &[&HermitianOperator]) -> HermitianOperator {
    ops.iter()
        .fold(HermitianOperator::identity(1), |acc, op| acc.kron(op))
}

fn check_dense(total: usize, limit: usize) -> Result<()> {
    if total > limit {
        return Err(Error::SizeGuard(format!(
            "operator dimension {total} exceeds the dense limit {limit}"
        )));
    }
    Ok(())
}

fn checked_total(dims: &[usize], n: usize) -> Result<usize> {
    dims.iter()
        .try_fold(1usize, |acc, &d| {
            (0..n).try_fold(acc, |a, _| a.checked_mul(d))
        })
        .ok_or_else(|| Error::SizeGuard("operator dimension overflows".into()))
}

/// Regroups an operator on `n` interleaved copies of `base` into the grouped
/// layout, returning the operator and the grouped factor dimensions.
fn regroup(
    op: &HermitianOperator,
    base: &FactoredDims,
    n: usize,
) -> Result<(HermitianOperator, FactoredDims)> {
    let k = base.len();
    let interleaved = FactoredDims::new(
        (0..n)
            .flat_map(|_| base.as_slice().iter().copied())
            .collect(),
    )?;
    let w = permutation_operator(&interleaved, &interleave_permutation(n, k))?;
    let grouped = FactoredDims::new(base.as_slice().iter().map(|d| d.pow(n as u32)).collect())?;
    Ok((op.conjugate_by(&w), grouped))
}

fn check_same_dims(problems: &[CloningSdp]) -> Result<&FactoredDims> {
    let first = problems
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one factor".into()))?;
    if problems.iter().any(|p| p.dims() != first.dims()) {
        return Err(Error::Dimension(
            "factor problems have different dimensions".into(),
        ));
    }
    Ok(first.dims())
}

/// The cloning SDP of the product scheme: `Q = W_π (Q₁ ⊗ … ⊗ Q_n) W_π*`.
pub fn product_problem(problems: &[CloningSdp]) -> Result<CloningSdp> {
    let base = check_same_dims(problems)?;
    let n = problems.len();
    check_dense(checked_total(base.as_slice(), n)?, DENSE_PROBLEM_LIMIT)?;
    let qs: Vec<&HermitianOperator> = problems.iter().map(|p| p.q()).collect();
    let (q, dims) = regroup(&tensor_all(&qs), base, n)?;
    CloningSdp::new(q, dims)
}

/// `n`-fold parallel repetition of one scheme.
pub fn repeated_problem(p: &CloningSdp, n: usize) -> Result<CloningSdp> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "need at least one repetition".into(),
        ));
    }
    product_problem(&vec![p.clone(); n])
}

/// Tensors feasible factor solutions into a feasible solution of the product
/// problem: `X = W_π(X₁⊗…⊗X_n)W_π*`, `Y = Y₁⊗…⊗Y_n`. Each input pair is
/// checked at `tol` first.
pub fn tensor_certificates(
    problems: &[CloningSdp],
    xs: &[HermitianOperator],
    ys: &[HermitianOperator],
    tol: f64,
) -> Result<(CloningSdp, HermitianOperator, HermitianOperator)> {
    if xs.len() != problems.len() || ys.len() != problems.len() {
        return Err(Error::Dimension(
            "one primal and one dual per factor".into(),
        ));
    }
    for (i, ((p, x), y)) in problems.iter().zip(xs).zip(ys).enumerate() {
        let primal = check_primal(x, p, tol)?;
        let dual = check_dual(y, p, tol)?;
        if !primal.feasible || !dual.feasible {
            return Err(Error::InvalidArgument(format!(
                "factor {i} is not feasible (primal {:?}, dual {:?})",
                primal, dual
            )));
        }
    }
    let product = product_problem(problems)?;
    let base = problems[0].dims();
    let (x, _) = regroup(
        &tensor_all(&xs.iter().collect::<Vec<_>>()),
        base,
        problems.len(),
    )?;
    let y = tensor_all(&ys.iter().collect::<Vec<_>>());
    Ok((product, x, y))
}

/// Success and failure objectives of one repetition:
/// `Q₁ = Σ p_k |ψψψ̄⟩⟨ψψψ̄|`, `Q₀ = Σ p_k (𝟙 − |ψψ⟩⟨ψψ|) ⊗ |ψ̄⟩⟨ψ̄|`.
#[derive(Debug, Clone)]
pub struct ThresholdOperators {
    pub dim: usize,
    pub q1: HermitianOperator,
    pub q0: HermitianOperator,
}

impl ThresholdOperators {
    /// `Q₀` for `a = 0`, `Q₁` for `a = 1`.
    pub fn get(&self, a: bool) -> &HermitianOperator {
        if a {
            &self.q1
        } else {
            &self.q0
        }
    }
}

pub fn build_threshold_operators(e: &Ensemble) -> ThresholdOperators {
    let d = e.dim();
    let q1 = build_q_quantum(e);
    let mut q0 = HermitianOperator::zeros(d * d * d);
    let ident = HermitianOperator::identity(d * d);
    for item in e.items() {
        let psi = &item.state;
        let pair = HermitianOperator::projector(&crate::linalg::kron_vec(psi, psi));
        let conj = HermitianOperator::projector(&crate::linalg::conj_vec(psi));
        q0 = q0.add(&ident.sub(&pair).kron(&conj).scale(item.weight));
    }
    ThresholdOperators { dim: d, q1, q0 }
}

/// Whether the average note is `𝟙/d` and `‖Q‖ = α/d`, which together make
/// the threshold value a binomial tail.
pub fn threshold_conditions_hold(e: &Ensemble, alpha: f64) -> Result<bool> {
    let d = e.dim();
    let avg = e.average_state();
    let uniform = HermitianOperator::identity(d).scale(1.0 / d as f64);
    if avg.max_abs_diff(&uniform) > AVERAGE_STATE_TOLERANCE {
        return Ok(false);
    }
    let norm = build_q_quantum(e).operator_norm()?;
    Ok((norm - alpha / d as f64).abs() <= NORM_TOLERANCE)
}

/// `R = Σ_{a : |a| ≥ t} Q_{a₁} ⊗ … ⊗ Q_{a_n}` in the interleaved layout.
fn assemble_r(ops: &ThresholdOperators, n: usize, t: usize) -> HermitianOperator {
    let d3 = ops.dim.pow(3);
    let mut r = HermitianOperator::zeros(d3.pow(n as u32));
    for pattern in 0u64..(1 << n) {
        if (pattern.count_ones() as usize) < t {
            continue;
        }
        let factors: Vec<&HermitianOperator> =
            (0..n).map(|i| ops.get(pattern >> i & 1 == 1)).collect();
        r = r.add(&tensor_all(&factors));
    }
    r
}

fn check_threshold_args(n: usize, t: usize) -> Result<()> {
    if t == 0 || t > n {
        return Err(Error::InvalidArgument(format!(
            "threshold must satisfy 1 <= t <= n, got t = {t}, n = {n}"
        )));
    }
    if n > 63 {
        return Err(Error::SizeGuard(format!("n = {n} repetitions")));
    }
    Ok(())
}

/// Cloning SDP for "at least `t` of `n`" verification of a quantum scheme.
pub fn threshold_problem(e: &Ensemble, n: usize, t: usize) -> Result<CloningSdp> {
    check_threshold_args(n, t)?;
    let d = e.dim();
    check_dense(checked_total(&[d, d, d], n)?, DENSE_PROBLEM_LIMIT)?;
    let ops = build_threshold_operators(e);
    let r = assemble_r(&ops, n, t);
    let (q, dims) = regroup(&r, &FactoredDims::uniform(d, 3)?, n)?;
    CloningSdp::new(q, dims)
}

/// `‖R‖` two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RNormCheck {
    /// Operator norm of the densely assembled `R`.
    pub lhs: f64,
    /// `(1/dⁿ) Σ_{j≥t} C(n,j) αʲ (1−α)^{n−j}` with `α = d‖Q₁‖`.
    pub rhs: f64,
}

/// Closed-form `‖R‖`, valid when the threshold conditions hold.
pub fn r_norm_formula(e: &Ensemble, n: usize, t: usize) -> Result<f64> {
    check_threshold_args(n, t)?;
    let d = e.dim() as f64;
    let alpha = d * build_q_quantum(e).operator_norm()?;
    Ok(binomial_tail(alpha.min(1.0), n, t) / d.powi(n as i32))
}

/// Compares the dense operator norm of `R` with the closed form. Refuses when
/// `d^{3n}` exceeds [`DENSE_R_LIMIT`].
pub fn verify_r_norm(e: &Ensemble, n: usize, t: usize) -> Result<RNormCheck> {
    check_threshold_args(n, t)?;
    let d = e.dim();
    check_dense(checked_total(&[d, d, d], n)?, DENSE_R_LIMIT)?;
    let rhs = r_norm_formula(e, n, t)?;
    let lhs = assemble_r(&build_threshold_operators(e), n, t).operator_norm()?;
    Ok(RNormCheck { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, max_abs};
    use crate::schemes::{quantum_problem, six_state_ensemble, wiesner_ensemble};

    #[test]
    fn values() {
        assert_eq!(repeated_value(0.75, 1).unwrap(), 0.75);
        assert_eq!(repeated_value(0.75, 4).unwrap(), 0.31640625);
        assert_eq!(repeated_value(0.3, 0).unwrap(), 1.0);
        assert!(repeated_value(1.5, 2).is_err());
        assert_eq!(threshold_value(0.75, 3, 2).unwrap(), 0.84375);
        assert_eq!(threshold_value(0.75, 2, 1).unwrap(), 15.0 / 16.0);
        assert!((threshold_value(0.6, 5, 5).unwrap() - 0.6f64.powi(5)).abs() < 1e-15);
        assert!(threshold_value(0.75, 2, 3).is_err());
        assert!(threshold_value(0.75, 2, 0).is_err());
    }

    #[test]
    fn exact_threshold() {
        assert_eq!(threshold_value_exact(3, 4, 3, 2).unwrap(), (27, 32));
        assert_eq!(threshold_value_exact(3, 4, 2, 1).unwrap(), (15, 16));
        assert_eq!(threshold_value_exact(2, 3, 2, 2).unwrap(), (4, 9));
        assert!(threshold_value_exact(5, 4, 2, 1).is_err());
    }

    #[test]
    fn interleave_layout() {
        assert_eq!(interleave_permutation(2, 3), vec![0, 2, 4, 1, 3, 5]);
        let p = interleave_permutation(4, 3);
        let mut sorted = p.clone();
        sorted.sort();
        assert_eq!(sorted, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn single_repetition_is_identity() {
        let p = quantum_problem(build_q_quantum(&wiesner_ensemble()), 2).unwrap();
        let r = repeated_problem(&p, 1).unwrap();
        assert!(r.q().max_abs_diff(p.q()) == 0.0);
    }

    #[test]
    fn regrouped_product_state() {
        // |abc⟩⊗|a'b'c'⟩ must land on |aa'⟩⊗|bb'⟩⊗|cc'⟩.
        let base = FactoredDims::uniform(2, 3).unwrap();
        let idx = |bits: [usize; 3]| bits[0] * 4 + bits[1] * 2 + bits[2];
        let first = HermitianOperator::projector(&basis_vector(8, idx([1, 0, 1])));
        let second = HermitianOperator::projector(&basis_vector(8, idx([0, 1, 1])));
        let (g, dims) = regroup(&first.kron(&second), &base, 2).unwrap();
        assert_eq!(dims.as_slice(), &[4, 4, 4]);
        let want = 2 * 16 + 4 + 3;
        assert!((g.matrix()[(want, want)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn threshold_operator_relations() {
        for e in [wiesner_ensemble(), six_state_ensemble()] {
            let ops = build_threshold_operators(&e);
            let sum = ops.q0.add(&ops.q1);
            assert!(sum.max_abs_diff(&HermitianOperator::identity(8).scale(0.5)) < 1e-12);
            assert!(ops.q0.min_eigenvalue().unwrap() > -1e-12);
            let comm = ops.q0.matrix() * ops.q1.matrix() - ops.q1.matrix() * ops.q0.matrix();
            assert!(max_abs(&comm) <= 1e-10);
        }
    }

    #[test]
    fn conditions() {
        assert!(threshold_conditions_hold(&wiesner_ensemble(), 0.75).unwrap());
        assert!(threshold_conditions_hold(&six_state_ensemble(), 2.0 / 3.0).unwrap());
        assert!(!threshold_conditions_hold(&wiesner_ensemble(), 0.7).unwrap());
        let single = Ensemble::new(vec![(1.0, basis_vector(2, 0))]).unwrap();
        assert!(!threshold_conditions_hold(&single, 1.0).unwrap());
    }

    #[test]
    fn r_norm_small_cases() {
        let e = wiesner_ensemble();
        let c = verify_r_norm(&e, 1, 1).unwrap();
        assert!((c.lhs - 0.375).abs() < 1e-12 && (c.rhs - 0.375).abs() < 1e-12);
        let c = verify_r_norm(&e, 2, 2).unwrap();
        assert!((c.lhs - 0.375 * 0.375).abs() < 1e-12);
        assert!(matches!(verify_r_norm(&e, 4, 1), Err(Error::SizeGuard(_))));
    }
}
