//! JSON formats for scheme descriptions and certificates.
//!
//! Complex numbers are `[re, im]` pairs, vectors are lists of pairs and
//! matrices are lists of rows. A scheme file has a `dimension` and either a
//! `states` list of `{weight, amplitudes}` items or the two ticket bases
//! `basis0` and `basis1`, each a list of basis vectors. A certificate file
//! holds the matrices `q`, `primal_x`, `dual_y`, a `tolerance` and the claimed
//! `value`. Floats are written in shortest round-trip form, so a written
//! certificate reads back bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::certificates::Certificate;
use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, HermitianOperator, StateVector};
use crate::schemes::{BasisPair, Ensemble, TicketScheme};

type Amplitude = [f64; 2];

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    weight: f64,
    amplitudes: Vec<Amplitude>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    states: Option<Vec<RawState>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    basis0: Option<Vec<Vec<Amplitude>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    basis1: Option<Vec<Vec<Amplitude>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCertificate {
    q: Vec<Vec<Amplitude>>,
    primal_x: Vec<Vec<Amplitude>>,
    dual_y: Vec<Vec<Amplitude>>,
    tolerance: f64,
    value: f64,
}

/// A parsed scheme file.
#[derive(Debug, Clone)]
pub enum SchemeFile {
    Quantum(Ensemble),
    Ticket(TicketScheme),
}

fn to_vector(amps: &[Amplitude], dim: usize) -> Result<StateVector> {
    if amps.len() != dim {
        return Err(Error::Dimension(format!(
            "vector has {} amplitudes, scheme dimension is {dim}",
            amps.len()
        )));
    }
    Ok(StateVector::from_iterator(
        dim,
        amps.iter().map(|a| c64(a[0], a[1])),
    ))
}

fn from_vector(v: &StateVector) -> Vec<Amplitude> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn to_matrix(rows: &[Vec<Amplitude>], name: &str) -> Result<HermitianOperator> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension(format!(
            "`{name}` is not a nonempty square matrix"
        )));
    }
    let m = ComplexMatrix::from_fn(n, n, |i, j| c64(rows[i][j][0], rows[i][j][1]));
    HermitianOperator::new(m)
}

fn from_matrix(m: &HermitianOperator) -> Vec<Vec<Amplitude>> {
    let a = m.matrix();
    (0..a.nrows())
        .map(|i| {
            (0..a.ncols())
                .map(|j| [a[(i, j)].re, a[(i, j)].im])
                .collect()
        })
        .collect()
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_scheme(text: &str) -> Result<SchemeFile> {
    let raw: RawScheme = parse_json(text)?;
    let d = raw.dimension;
    if d == 0 {
        return Err(Error::Parse("`dimension` must be positive".into()));
    }
    match (raw.states, raw.basis0, raw.basis1) {
        (Some(states), None, None) => {
            let items = states
                .iter()
                .map(|s| Ok((s.weight, to_vector(&s.amplitudes, d)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(SchemeFile::Quantum(Ensemble::new(items)?))
        }
        (None, Some(b0), Some(b1)) => {
            let basis = |b: &[Vec<Amplitude>]| {
                b.iter()
                    .map(|v| to_vector(v, d))
                    .collect::<Result<Vec<_>>>()
            };
            let pair = BasisPair::new(basis(&b0)?, basis(&b1)?)?;
            Ok(SchemeFile::Ticket(TicketScheme::new(pair)))
        }
        _ => Err(Error::Parse(
            "a scheme needs either `states` or both `basis0` and `basis1`".into(),
        )),
    }
}

pub fn read_scheme(path: impl AsRef<Path>) -> Result<SchemeFile> {
    parse_scheme(&std::fs::read_to_string(path)?)
}

pub fn ensemble_to_json(e: &Ensemble) -> String {
    let raw = RawScheme {
        dimension: e.dim(),
        states: Some(
            e.items()
                .iter()
                .map(|i| RawState {
                    weight: i.weight,
                    amplitudes: from_vector(&i.state),
                })
                .collect(),
        ),
        basis0: None,
        basis1: None,
    };
    serde_json::to_string_pretty(&raw).expect("plain data serializes")
}

pub fn ticket_scheme_to_json(t: &TicketScheme) -> String {
    let basis = |b: usize| t.basis_pair().basis(b).iter().map(from_vector).collect();
    let raw = RawScheme {
        dimension: t.dim(),
        states: None,
        basis0: Some(basis(0)),
        basis1: Some(basis(1)),
    };
    serde_json::to_string_pretty(&raw).expect("plain data serializes")
}

pub fn parse_certificate(text: &str) -> Result<Certificate> {
    let raw: RawCertificate = parse_json(text)?;
    if !raw.tolerance.is_finite() || raw.tolerance < 0.0 || !raw.value.is_finite() {
        return Err(Error::Parse(
            "`tolerance` and `value` must be finite, tolerance nonnegative".into(),
        ));
    }
    Ok(Certificate {
        q: to_matrix(&raw.q, "q")?,
        primal_x: to_matrix(&raw.primal_x, "primal_x")?,
        dual_y: to_matrix(&raw.dual_y, "dual_y")?,
        tolerance: raw.tolerance,
        value: raw.value,
    })
}

pub fn read_certificate(path: impl AsRef<Path>) -> Result<Certificate> {
    parse_certificate(&std::fs::read_to_string(path)?)
}

pub fn certificate_to_json(c: &Certificate) -> String {
    let raw = RawCertificate {
        q: from_matrix(&c.q),
        primal_x: from_matrix(&c.primal_x),
        dual_y: from_matrix(&c.dual_y),
        tolerance: c.tolerance,
        value: c.value,
    };
    serde_json::to_string(&raw).expect("plain data serializes")
}

pub fn write_certificate(c: &Certificate, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, certificate_to_json(c))?;
    Ok(())
}
