//! Prints the analytic optimality certificate for the qubit two-basis scheme:
//! the Choi operator of the optimal cloner and the dual `Y = (3/8)𝟙`.
//!
//! `cargo run -p qmoney --example wiesner_certificate > wiesner.json`

use qmoney::certificates::{Certificate, DEFAULT_TOLERANCE};
use qmoney::cloners::wiesner_optimal_cloner;
use qmoney::io::certificate_to_json;
use qmoney::schemes::{build_q_quantum, wiesner_ensemble};
use qmoney::HermitianOperator;

fn main() {
    let cert = Certificate {
        q: build_q_quantum(&wiesner_ensemble()),
        primal_x: wiesner_optimal_cloner().into_matrix(),
        dual_y: HermitianOperator::identity(2).scale(0.375),
        tolerance: DEFAULT_TOLERANCE,
        value: 0.75,
    };
    let check = cert
        .check(DEFAULT_TOLERANCE)
        .expect("well-formed certificate");
    assert!(check.certified, "analytic certificate must verify");
    println!("{}", certificate_to_json(&cert));
}
