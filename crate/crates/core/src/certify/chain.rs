//! JSON forms of certificates.
//!
//! A single certificate nests its sub-certificates inline:
//! `{"c": "4591", "a": "85", "factors": [{"p": "5", "kind": "trial"}, ...]}`.
//! A chain file is a JSON array ordered leaves-first, where a `"cert"` factor
//! may omit its body and refer to an earlier entry with the same `c`.

use std::collections::HashMap;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{FactorProof, Justification, PrimalityCertificate};

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("malformed certificate JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a decimal integer: {0:?}")]
    BadNumber(String),
    #[error("factor {0} refers to a certificate that does not appear earlier in the chain")]
    UnresolvedReference(String),
    #[error("trial factor {0} carries a certificate body")]
    TrialWithBody(String),
    #[error("chain file is empty")]
    Empty,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertWire {
    c: String,
    a: String,
    factors: Vec<FactorWire>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorWire {
    p: String,
    kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cert: Option<Box<CertWire>>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Trial,
    Cert,
}

fn parse_decimal(s: &str) -> Result<BigUint, ChainError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ChainError::BadNumber(s.to_string()));
    }
    BigUint::from_str(s).map_err(|_| ChainError::BadNumber(s.to_string()))
}

fn to_wire(cert: &PrimalityCertificate, inline: bool) -> CertWire {
    CertWire {
        c: cert.c.to_string(),
        a: cert.a.to_string(),
        factors: cert
            .factors
            .iter()
            .map(|f| match &f.justification {
                Justification::TrialDivision => FactorWire {
                    p: f.p.to_string(),
                    kind: Kind::Trial,
                    cert: None,
                },
                Justification::Certificate(nested) => FactorWire {
                    p: f.p.to_string(),
                    kind: Kind::Cert,
                    cert: inline.then(|| Box::new(to_wire(nested, true))),
                },
            })
            .collect(),
    }
}

fn from_wire(
    wire: &CertWire,
    known: &HashMap<BigUint, PrimalityCertificate>,
) -> Result<PrimalityCertificate, ChainError> {
    let mut factors = Vec::with_capacity(wire.factors.len());
    for f in &wire.factors {
        let p = parse_decimal(&f.p)?;
        let justification = match (f.kind, &f.cert) {
            (Kind::Trial, None) => Justification::TrialDivision,
            (Kind::Trial, Some(_)) => return Err(ChainError::TrialWithBody(f.p.clone())),
            (Kind::Cert, Some(body)) => Justification::Certificate(Box::new(from_wire(body, known)?)),
            (Kind::Cert, None) => match known.get(&p) {
                Some(c) => Justification::Certificate(Box::new(c.clone())),
                None => return Err(ChainError::UnresolvedReference(f.p.clone())),
            },
        };
        factors.push(FactorProof { p, justification });
    }
    Ok(PrimalityCertificate {
        c: parse_decimal(&wire.c)?,
        a: parse_decimal(&wire.a)?,
        factors,
    })
}

/// A certificate as one JSON object with inline sub-certificates.
pub fn write_certificate(cert: &PrimalityCertificate) -> String {
    serde_json::to_string_pretty(&to_wire(cert, true)).expect("serializable")
}

pub fn read_certificate(text: &str) -> Result<PrimalityCertificate, ChainError> {
    let wire: CertWire = serde_json::from_str(text)?;
    from_wire(&wire, &HashMap::new())
}

/// Every certificate in the tree, leaves first, each `c` once.
pub fn chain_entries(root: &PrimalityCertificate) -> Vec<&PrimalityCertificate> {
    fn walk<'a>(c: &'a PrimalityCertificate, out: &mut Vec<&'a PrimalityCertificate>) {
        for f in &c.factors {
            if let Justification::Certificate(nested) = &f.justification {
                walk(nested, out);
            }
        }
        if !out.iter().any(|e| e.c == c.c) {
            out.push(c);
        }
    }
    let mut out = Vec::new();
    walk(root, &mut out);
    out
}

/// The chain file for `root`: a leaves-first array with references in place
/// of nested bodies. The last entry is `root`.
pub fn write_chain(root: &PrimalityCertificate) -> String {
    let wires: Vec<CertWire> = chain_entries(root)
        .into_iter()
        .map(|c| to_wire(c, false))
        .collect();
    serde_json::to_string_pretty(&wires).expect("serializable")
}

/// Reads a chain file and returns every entry, resolved, in file order.
/// The last element is the root.
pub fn read_chain(text: &str) -> Result<Vec<PrimalityCertificate>, ChainError> {
    let wires: Vec<CertWire> = serde_json::from_str(text)?;
    if wires.is_empty() {
        return Err(ChainError::Empty);
    }
    let mut known = HashMap::new();
    let mut out = Vec::with_capacity(wires.len());
    for w in &wires {
        let cert = from_wire(w, &known)?;
        known.insert(cert.c.clone(), cert.clone());
        out.push(cert);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(p: u32) -> FactorProof {
        FactorProof {
            p: p.into(),
            justification: Justification::TrialDivision,
        }
    }

    fn sample() -> PrimalityCertificate {
        let c1 = PrimalityCertificate {
            c: 4591u32.into(),
            a: 85u32.into(),
            factors: vec![leaf(5), leaf(17)],
        };
        let c2 = PrimalityCertificate {
            c: 68821u32.into(),
            a: 1147u32.into(),
            factors: vec![leaf(31), leaf(37)],
        };
        PrimalityCertificate {
            c: 2242664283679u64.into(),
            a: (4591u64 * 68821).into(),
            factors: vec![
                FactorProof {
                    p: 4591u32.into(),
                    justification: Justification::Certificate(Box::new(c1)),
                },
                FactorProof {
                    p: 68821u32.into(),
                    justification: Justification::Certificate(Box::new(c2)),
                },
            ],
        }
    }

    #[test]
    fn inline_round_trip() {
        let cert = sample();
        assert_eq!(read_certificate(&write_certificate(&cert)).unwrap(), cert);
    }

    #[test]
    fn chain_round_trip_is_leaves_first() {
        let cert = sample();
        let text = write_chain(&cert);
        let entries = read_chain(&text).unwrap();
        let cs: Vec<String> = entries.iter().map(|e| e.c.to_string()).collect();
        assert_eq!(cs, ["4591", "68821", "2242664283679"]);
        assert_eq!(entries.last().unwrap(), &cert);
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(matches!(read_chain("[]"), Err(ChainError::Empty)));
        assert!(matches!(
            read_certificate(r#"{"c":"-7","a":"3","factors":[]}"#),
            Err(ChainError::BadNumber(_))
        ));
        assert!(matches!(
            read_chain(r#"[{"c":"10","a":"4","factors":[{"p":"3","kind":"cert"}]}]"#),
            Err(ChainError::UnresolvedReference(_))
        ));
        assert!(matches!(
            read_certificate(r#"{"c":"10","a":"4","factors":[],"extra":1}"#),
            Err(ChainError::Json(_))
        ));
    }
}
