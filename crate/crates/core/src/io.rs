//! JSON channel descriptions.
//!
//! A channel file is an object with a `kind` tag:
//!
//! ```json
//! {"kind": "classical", "rows": [[0.89, 0.11], [0.11, 0.89]]}
//! {"kind": "bsc", "p": 0.11}
//! {"kind": "unweighted", "x_size": 2, "y_size": 2, "neighbors": [[0], [1]]}
//! {"kind": "quantum", "kraus": [[[1, 0], [0, 1]]]}
//! {"kind": "amplitude_damping", "gamma": 0.3}
//! ```
//!
//! Kraus entries are either real numbers or `[re, im]` pairs.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical::{ClassicalChannel, Distribution};
use crate::error::{Error, Result};
use crate::flat::UnweightedChannel;
use crate::quantum::{CMat, DensityMatrix, QuantumChannel};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Real(x) => Complex64::new(x, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Classical { rows: Vec<Vec<f64>> },
    Bsc { p: f64 },
    Bec { e: f64 },
    ClassicalIdentity { d: usize },
    ClassicalConstant { inputs: usize, output: Vec<f64> },
    Unweighted { x_size: usize, y_size: usize, neighbors: Vec<Vec<usize>> },
    RandomRegular { d: usize, degree: usize, seed: u64 },
    Quantum { kraus: Vec<Vec<Vec<Entry>>> },
    QuantumIdentity { d: usize },
    Depolarizing { p: f64 },
    CompletelyDepolarizing { d: usize },
    Dephasing { p: f64 },
    AmplitudeDamping { gamma: f64 },
    QuantumConstant { inputs: usize, output: Vec<f64> },
    Measurement { d: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Channel {
    Classical(ClassicalChannel),
    Unweighted(UnweightedChannel),
    Quantum(QuantumChannel),
}

impl Channel {
    pub fn kind(&self) -> &'static str {
        match self {
            Channel::Classical(_) => "classical",
            Channel::Unweighted(_) => "unweighted",
            Channel::Quantum(_) => "quantum",
        }
    }

    /// Classical view: unweighted channels become uniform transition matrices.
    pub fn as_classical(&self) -> Option<ClassicalChannel> {
        match self {
            Channel::Classical(c) => Some(c.clone()),
            Channel::Unweighted(u) => Some(u.to_channel()),
            Channel::Quantum(_) => None,
        }
    }
}

fn matrix(rows: &[Vec<Entry>], k: usize) -> Result<CMat> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(Error::InvalidChannel(format!("Kraus operator {k} is empty")));
    }
    if let Some(i) = rows.iter().position(|row| row.len() != c) {
        return Err(Error::InvalidChannel(format!("Kraus operator {k}: row {i} has {} entries, expected {c}", rows[i].len())));
    }
    Ok(CMat::from_fn(r, c, |i, j| rows[i][j].value()))
}

impl ChannelSpec {
    pub fn build(&self) -> Result<Channel> {
        use ChannelSpec::*;
        Ok(match self {
            Classical { rows } => Channel::Classical(ClassicalChannel::new(rows.clone())?),
            Bsc { p } => Channel::Classical(ClassicalChannel::bsc(*p)?),
            Bec { e } => Channel::Classical(ClassicalChannel::bec(*e)?),
            ClassicalIdentity { d } => Channel::Classical(ClassicalChannel::identity(positive(*d)?)),
            ClassicalConstant { inputs, output } => {
                Channel::Classical(ClassicalChannel::constant(positive(*inputs)?, &Distribution::new(output.clone())?))
            }
            Unweighted { x_size, y_size, neighbors } => {
                Channel::Unweighted(UnweightedChannel::new(*x_size, *y_size, neighbors.clone())?)
            }
            RandomRegular { d, degree, seed } => Channel::Unweighted(UnweightedChannel::random_regular(*d, *degree, *seed)?),
            Quantum { kraus } => {
                let ops = kraus.iter().enumerate().map(|(k, m)| matrix(m, k)).collect::<Result<Vec<_>>>()?;
                Channel::Quantum(QuantumChannel::new(ops)?)
            }
            QuantumIdentity { d } => Channel::Quantum(QuantumChannel::identity(positive(*d)?)),
            Depolarizing { p } => Channel::Quantum(QuantumChannel::depolarizing(*p)?),
            CompletelyDepolarizing { d } => Channel::Quantum(QuantumChannel::completely_depolarizing(positive(*d)?)),
            Dephasing { p } => Channel::Quantum(QuantumChannel::dephasing(*p)?),
            AmplitudeDamping { gamma } => Channel::Quantum(QuantumChannel::amplitude_damping(*gamma)?),
            QuantumConstant { inputs, output } => {
                let sigma = DensityMatrix::diagonal(output)?;
                Channel::Quantum(QuantumChannel::constant(positive(*inputs)?, &sigma))
            }
            Measurement { d } => Channel::Quantum(QuantumChannel::measurement(positive(*d)?)),
        })
    }

    /// Explicit Kraus description of a quantum channel.
    pub fn from_quantum(ch: &QuantumChannel) -> Self {
        let kraus = ch
            .kraus()
            .iter()
            .map(|k| {
                (0..k.nrows())
                    .map(|i| (0..k.ncols()).map(|j| Entry::Complex([k[(i, j)].re, k[(i, j)].im])).collect())
                    .collect()
            })
            .collect();
        ChannelSpec::Quantum { kraus }
    }
}

fn positive(d: usize) -> Result<usize> {
    if d == 0 {
        Err(Error::param("dimension must be positive"))
    } else {
        Ok(d)
    }
}

pub fn parse_channel_spec(text: &str) -> Result<ChannelSpec> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

/// Reads, parses and validates a channel file.
pub fn load_channel(path: &Path) -> Result<(ChannelSpec, Channel)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let spec = parse_channel_spec(&text)?;
    let ch = spec.build()?;
    Ok((spec, ch))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bsc_parses() {
        let s = parse_channel_spec(r#"{"kind": "classical", "rows": [[0.89, 0.11], [0.11, 0.89]]}"#).unwrap();
        match s.build().unwrap() {
            Channel::Classical(c) => assert_eq!(c, ClassicalChannel::bsc(0.11).unwrap()),
            other => panic!("{other:?}"),
        }
        let s = parse_channel_spec(r#"{"kind": "bsc", "p": 0.11}"#).unwrap();
        assert_eq!(s.build().unwrap().kind(), "classical");
    }

    #[test]
    fn bad_row_is_named() {
        let s = parse_channel_spec(r#"{"kind": "classical", "rows": [[0.5, 0.5], [0.5, 0.4]]}"#).unwrap();
        let e = s.build().unwrap_err().to_string();
        assert!(e.contains("row 1"), "{e}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = parse_channel_spec("{\"kind\": \"bsc\",\n \"p\": 0.1,,}").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        let e = parse_channel_spec(r#"{"kind": "bsc", "q": 0.1}"#).unwrap_err().to_string();
        assert!(e.contains("`q`"), "{e}");
        let e = parse_channel_spec(r#"{"kind": "teleporter"}"#).unwrap_err().to_string();
        assert!(e.contains("teleporter"), "{e}");
    }

    #[test]
    fn kraus_validation() {
        let ok = parse_channel_spec(r#"{"kind": "quantum", "kraus": [[[1, 0], [0, [0, 1]]]]}"#).unwrap();
        assert!(matches!(ok.build().unwrap(), Channel::Quantum(_)));
        let bad = parse_channel_spec(r#"{"kind": "quantum", "kraus": [[[1, 0], [0, 0.9]]]}"#).unwrap();
        let e = bad.build().unwrap_err();
        assert!(matches!(e, Error::InvalidChannel(_)), "{e}");
        let ragged = parse_channel_spec(r#"{"kind": "quantum", "kraus": [[[1, 0], [0]]]}"#).unwrap();
        assert!(ragged.build().unwrap_err().to_string().contains("row 1"));
    }

    #[test]
    fn quantum_round_trip() {
        let ch = QuantumChannel::amplitude_damping(0.3).unwrap();
        let spec = ChannelSpec::from_quantum(&ch);
        let text = serde_json::to_string(&spec).unwrap();
        match parse_channel_spec(&text).unwrap().build().unwrap() {
            Channel::Quantum(q) => assert_eq!(q, ch),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unweighted_regularity_checked() {
        let s = parse_channel_spec(r#"{"kind": "unweighted", "x_size": 2, "y_size": 2, "neighbors": [[0, 1], [1]]}"#).unwrap();
        assert!(s.build().unwrap_err().to_string().contains("regular"));
    }
}
