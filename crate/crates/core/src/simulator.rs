//! Monte Carlo replay of the money protocols.
//!
//! Every attack is reduced to per-key outcome distributions computed with the
//! Born rule; trials then only draw a key, the challenges and a categorical
//! outcome. Trials are split into fixed-size chunks and chunk `i` uses
//! ChaCha8 stream `i` of the given seed, so a report depends only on the seed
//! and never on how many worker threads ran the chunks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{success_probability, ChoiOperator};
use crate::cloners::{evaluate_ticket_strategy, TicketStrategy};
use crate::error::{Error, Result};
use crate::linalg::{c64, kron, ComplexMatrix, HermitianOperator, StateVector};
use crate::schemes::{wiesner_ensemble, Ensemble, TicketScheme};

/// Environment variable capping the number of simulation threads.
pub const THREADS_ENV: &str = "QMONEY_THREADS";

const CHUNK: u64 = 1 << 15;

/// Largest `n` accepted by [`simulate_bell_attack`].
pub const MAX_BELL_QUBITS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub trials: u64,
    pub seed: u64,
    /// Independent repetitions per note; a trial succeeds only if all pass.
    pub repetitions: usize,
}

impl TrialConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            repetitions: 1,
        }
    }

    pub fn with_repetitions(mut self, n: usize) -> Self {
        self.repetitions = n;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument(
                "trial count must be at least 1".into(),
            ));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidArgument(
                "need at least one repetition".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub successes: u64,
    pub trials: u64,
    pub empirical: f64,
    pub analytic: Option<f64>,
    /// Binomial standard error, from the analytic rate when known.
    pub standard_error: f64,
    pub z: Option<f64>,
}

impl TrialReport {
    pub fn new(successes: u64, trials: u64, analytic: Option<f64>) -> Self {
        let empirical = successes as f64 / trials as f64;
        let p = analytic.unwrap_or(empirical);
        let standard_error = (p * (1.0 - p) / trials as f64).max(0.0).sqrt();
        let z = analytic.map(|a| {
            let diff = empirical - a;
            if standard_error > 0.0 {
                diff / standard_error
            } else if diff == 0.0 {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            }
        });
        Self {
            successes,
            trials,
            empirical,
            analytic,
            standard_error,
            z,
        }
    }

    /// Whether `|z| ≤ k`.
    pub fn within(&self, k: f64) -> bool {
        self.z.is_some_and(|z| z.abs() <= k)
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))
        })?;
        if n == 0 {
            return Err(Error::InvalidArgument(format!(
                "{THREADS_ENV} must be positive"
            )));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

/// Counts successes of `trial` over `trials` draws, chunked over ChaCha
/// streams.
fn run_trials<F>(trials: u64, seed: u64, trial: F) -> Result<u64>
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    let pool = thread_pool()?;
    Ok(pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                let count = CHUNK.min(trials - i * CHUNK);
                (0..count).filter(|_| trial(&mut rng)).count() as u64
            })
            .sum()
    }))
}

/// Index drawn from a discrete distribution given by nonnegative weights.
fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Outcome distribution of the bank's two independent verifications
/// `{Π, 𝟙−Π} ⊗ {Π, 𝟙−Π}` on `Φ(|ψ⟩⟨ψ|)`; index 0 is "both valid".
fn clone_outcomes(j: &ChoiOperator, psi: &StateVector) -> Result<[f64; 4]> {
    let d = psi.len();
    let out = j.apply(&HermitianOperator::projector(psi))?;
    let pi = HermitianOperator::projector(psi).into_matrix();
    let not_pi = ComplexMatrix::identity(d, d) - &pi;
    let mut probs = [0.0; 4];
    for (k, (a, b)) in [
        (&pi, &pi),
        (&pi, &not_pi),
        (&not_pi, &pi),
        (&not_pi, &not_pi),
    ]
    .into_iter()
    .enumerate()
    {
        let effect = HermitianOperator::from_hermitian_part(&kron(a, b));
        probs[k] = out.inner(&effect).max(0.0);
    }
    Ok(probs)
}

/// Draws notes from `scheme`, runs each through the cloner and verifies both
/// outputs.
pub fn simulate_quantum_attack(
    scheme: &Ensemble,
    cloner: &ChoiOperator,
    cfg: &TrialConfig,
) -> Result<TrialReport> {
    cfg.validate()?;
    let single = success_probability(cloner, scheme)?;
    let weights: Vec<f64> = scheme.items().iter().map(|i| i.weight).collect();
    let tables = scheme
        .items()
        .iter()
        .map(|i| clone_outcomes(cloner, &i.state))
        .collect::<Result<Vec<_>>>()?;
    let n = cfg.repetitions;
    let successes = run_trials(cfg.trials, cfg.seed, |rng| {
        (0..n).all(|_| {
            let k = sample_index(&weights, rng);
            sample_index(&tables[k], rng) == 0
        })
    })?;
    Ok(TrialReport::new(
        successes,
        cfg.trials,
        Some(single.powi(n as i32)),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellReport {
    /// Acceptance of the note assembled from Bell-pair halves.
    pub first_note: TrialReport,
    /// Trials whose retained halves also passed, among accepted trials.
    pub second_note_successes: u64,
    /// `second_note_successes / first_note.successes` (1 when nothing was accepted).
    pub conditional_second_rate: f64,
}

/// Projects `state` with `op` and returns the probability and renormalized state.
fn project(op: &ComplexMatrix, state: &StateVector) -> (f64, StateVector) {
    let v = op * state;
    let p = v.norm_squared();
    if p > 0.0 {
        (p, v.unscale(p.sqrt()))
    } else {
        (0.0, v)
    }
}

/// Entanglement attack on the qubit two-basis scheme: each of the `n` qubits
/// handed to the bank is half of `(|00⟩+|11⟩)/√2`. The bank measures
/// `{Π_k, 𝟙−Π_k}` on the submitted halves; on acceptance the retained halves
/// are checked against the same keys.
pub fn simulate_bell_attack(n: usize, trials: u64, seed: u64) -> Result<BellReport> {
    if n == 0 || n > MAX_BELL_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "Bell attack needs 1 <= n <= {MAX_BELL_QUBITS}, got {n}"
        )));
    }
    TrialConfig::new(trials, seed).validate()?;
    let e = wiesner_ensemble();
    let weights: Vec<f64> = e.items().iter().map(|i| i.weight).collect();
    let id2 = ComplexMatrix::identity(2, 2);
    let ops: Vec<(ComplexMatrix, ComplexMatrix)> = e
        .items()
        .iter()
        .map(|i| {
            let pi = HermitianOperator::projector(&i.state).into_matrix();
            (kron(&pi, &id2), kron(&id2, &pi))
        })
        .collect();
    let s = 0.5f64.sqrt();
    let bell = StateVector::from_vec(vec![c64(s, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(s, 0.0)]);

    // Outcome per trial: 0 = rejected, 1 = accepted but second fails, 2 = both.
    let outcome = |rng: &mut ChaCha8Rng| -> u8 {
        let mut kept = Vec::with_capacity(n);
        for _ in 0..n {
            let k = sample_index(&weights, rng);
            let (p, post) = project(&ops[k].0, &bell);
            if sample_index(&[p, 1.0 - p], rng) != 0 {
                return 0;
            }
            kept.push((k, post));
        }
        let all = kept.iter().all(|(k, post)| {
            let (p, _) = project(&ops[*k].1, post);
            sample_index(&[p, (1.0 - p).max(0.0)], rng) == 0
        });
        if all {
            2
        } else {
            1
        }
    };

    let chunks = trials.div_ceil(CHUNK);
    let pool = thread_pool()?;
    let (accepted, second) = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                let count = CHUNK.min(trials - i * CHUNK);
                let mut acc = (0u64, 0u64);
                for _ in 0..count {
                    match outcome(&mut rng) {
                        2 => {
                            acc.0 += 1;
                            acc.1 += 1;
                        }
                        1 => acc.0 += 1,
                        _ => {}
                    }
                }
                acc
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    });
    let first_note = TrialReport::new(accepted, trials, Some(0.5f64.powi(n as i32)));
    Ok(BellReport {
        first_note,
        second_note_successes: second,
        conditional_second_rate: if accepted == 0 {
            1.0
        } else {
            second as f64 / accepted as f64
        },
    })
}

/// Draws a key and two uniform challenges, samples the strategy's outcome and
/// checks both answers.
pub fn simulate_ticket_attack(
    scheme: &TicketScheme,
    strategy: &TicketStrategy,
    cfg: &TrialConfig,
) -> Result<TrialReport> {
    cfg.validate()?;
    let single = evaluate_ticket_strategy(strategy, scheme)?;
    let keys: Vec<_> = scheme.keys().collect();
    let nc = TicketScheme::CHALLENGES;
    // tables[key][c1·nc + c2] = (outcome probabilities, outcome accepted?)
    let tables: Vec<Vec<(Vec<f64>, Vec<bool>)>> = keys
        .iter()
        .map(|&key| {
            let psi = scheme.key_state(key);
            (0..nc * nc)
                .map(|c| {
                    let (c1, c2) = (c / nc, c % nc);
                    let povm = strategy.povm(c1, c2);
                    let probs = povm
                        .iter()
                        .map(|o| o.element.expectation(psi).max(0.0))
                        .collect();
                    let ok = povm
                        .iter()
                        .map(|o| {
                            scheme.accepts(o.answers.0, c1, key)
                                && scheme.accepts(o.answers.1, c2, key)
                        })
                        .collect();
                    (probs, ok)
                })
                .collect()
        })
        .collect();
    let n = cfg.repetitions;
    let successes = run_trials(cfg.trials, cfg.seed, |rng| {
        (0..n).all(|_| {
            let k = rng.random_range(0..keys.len());
            let c = rng.random_range(0..nc * nc);
            let (probs, ok) = &tables[k][c];
            ok[sample_index(probs, rng)]
        })
    })?;
    Ok(TrialReport::new(
        successes,
        cfg.trials,
        Some(single.powi(n as i32)),
    ))
}

/// Honest holder: one uniform challenge, measurement in the challenged basis.
pub fn simulate_honest_verification(
    scheme: &TicketScheme,
    cfg: &TrialConfig,
) -> Result<TrialReport> {
    cfg.validate()?;
    let keys: Vec<_> = scheme.keys().collect();
    let nc = TicketScheme::CHALLENGES;
    let tables: Vec<Vec<(Vec<f64>, Vec<bool>)>> = keys
        .iter()
        .map(|&key| {
            let psi = scheme.key_state(key);
            (0..nc)
                .map(|c| {
                    let basis = scheme.basis_pair().basis(c);
                    let probs = basis.iter().map(|e| e.dotc(psi).norm_sqr()).collect();
                    let ok = (0..basis.len())
                        .map(|a| scheme.accepts(a, c, key))
                        .collect();
                    (probs, ok)
                })
                .collect()
        })
        .collect();
    let n = cfg.repetitions;
    let successes = run_trials(cfg.trials, cfg.seed, |rng| {
        (0..n).all(|_| {
            let k = rng.random_range(0..keys.len());
            let c = rng.random_range(0..nc);
            let (probs, ok) = &tables[k][c];
            ok[sample_index(probs, rng)]
        })
    })?;
    Ok(TrialReport::new(
        successes,
        cfg.trials,
        Some(scheme.honest_acceptance()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloners::{passthrough_cloner, ticket_cloner, wiesner_optimal_cloner};
    use crate::schemes::fourier_ticket_scheme;

    #[test]
    fn report_statistics() {
        let r = TrialReport::new(50, 100, Some(0.5));
        assert_eq!(r.empirical, 0.5);
        assert_eq!(r.z, Some(0.0));
        assert!((r.standard_error - 0.05).abs() < 1e-15);
        let r = TrialReport::new(100, 100, Some(1.0));
        assert_eq!(r.z, Some(0.0));
        assert!(r.within(0.0));
    }

    #[test]
    fn sampling_follows_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts = [0u32; 3];
        for _ in 0..30000 {
            counts[sample_index(&[0.2, 0.0, 0.8], &mut rng)] += 1;
        }
        assert_eq!(counts[1], 0);
        assert!((counts[0] as f64 / 30000.0 - 0.2).abs() < 0.02);
    }

    #[test]
    fn seed_fixes_report() {
        let cfg = TrialConfig::new(100_000, 11);
        let e = wiesner_ensemble();
        let j = wiesner_optimal_cloner();
        let a = simulate_quantum_attack(&e, &j, &cfg).unwrap();
        let b = simulate_quantum_attack(&e, &j, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.within(5.0));
        let c = simulate_quantum_attack(&e, &j, &TrialConfig::new(100_000, 12)).unwrap();
        assert_ne!(a.successes, c.successes);
    }

    #[test]
    fn passthrough_and_repetitions() {
        let e = wiesner_ensemble();
        let r = simulate_quantum_attack(
            &e,
            &passthrough_cloner(2).unwrap(),
            &TrialConfig::new(100_000, 2),
        )
        .unwrap();
        assert!((r.analytic.unwrap() - 0.5).abs() < 1e-12);
        assert!(r.within(5.0));
        let r = simulate_quantum_attack(
            &e,
            &wiesner_optimal_cloner(),
            &TrialConfig::new(100_000, 3).with_repetitions(3),
        )
        .unwrap();
        assert!((r.analytic.unwrap() - 0.421875).abs() < 1e-12);
        assert!(r.within(5.0));
    }

    #[test]
    fn bell_attack_small() {
        let r = simulate_bell_attack(2, 50_000, 4).unwrap();
        assert!(r.first_note.within(5.0));
        assert_eq!(r.second_note_successes, r.first_note.successes);
        assert!(simulate_bell_attack(0, 10, 1).is_err());
        assert!(simulate_bell_attack(21, 10, 1).is_err());
    }

    #[test]
    fn ticket_and_honest() {
        let t = fourier_ticket_scheme(2).unwrap();
        let r = simulate_ticket_attack(
            &t,
            &ticket_cloner(2).unwrap(),
            &TrialConfig::new(100_000, 5),
        )
        .unwrap();
        assert!(r.within(5.0));
        let h = simulate_honest_verification(&t, &TrialConfig::new(10_000, 6)).unwrap();
        assert_eq!(h.successes, h.trials);
        assert!(
            simulate_ticket_attack(&t, &ticket_cloner(3).unwrap(), &TrialConfig::new(10, 1))
                .is_err()
        );
        assert!(simulate_honest_verification(&t, &TrialConfig::new(0, 1)).is_err());
    }
}
