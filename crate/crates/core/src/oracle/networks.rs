//! Concrete affine instantiations of declared networks and the JSON
//! network manifest they are read from.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::OracleError;
use crate::query::ScalarLinear;
use crate::rational::{format_rational, parse_rational, Rational};

/// `x ↦ W·x + b` with `W` of shape `outputs × inputs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineNetwork {
    pub name: String,
    pub weights: Vec<Vec<Rational>>,
    pub bias: Vec<Rational>,
}

impl AffineNetwork {
    pub fn new(name: impl Into<String>, weights: Vec<Vec<Rational>>, bias: Vec<Rational>) -> Result<Self, OracleError> {
        let name = name.into();
        let mismatch = |message: String| OracleError::DimensionMismatch { name: name.clone(), message };
        if weights.len() != bias.len() {
            return Err(mismatch(format!("{} weight rows but {} bias entries", weights.len(), bias.len())));
        }
        if let Some(row) = weights.first() {
            if let Some(bad) = weights.iter().find(|r| r.len() != row.len()) {
                return Err(mismatch(format!("ragged weight rows of lengths {} and {}", row.len(), bad.len())));
            }
        }
        Ok(AffineNetwork { name, weights, bias })
    }

    pub fn inputs(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn outputs(&self) -> usize {
        self.bias.len()
    }

    pub fn check_shape(&self, inputs: usize, outputs: usize) -> Result<(), OracleError> {
        if self.inputs() != inputs || self.outputs() != outputs {
            return Err(OracleError::DimensionMismatch {
                name: self.name.clone(),
                message: format!(
                    "expected {inputs} inputs and {outputs} outputs, found {} and {}",
                    self.inputs(),
                    self.outputs()
                ),
            });
        }
        Ok(())
    }

    pub fn apply(&self, x: &[Rational]) -> Vec<Rational> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).fold(b.clone(), |acc, (w, xi)| acc + w * xi))
            .collect()
    }

    /// Symbolic application to linear inputs.
    pub fn apply_linear(&self, x: &[ScalarLinear]) -> Vec<ScalarLinear> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| {
                row.iter().zip(x).fold(ScalarLinear::constant(b.clone()), |acc, (w, xi)| acc.plus(&xi.scale(w)))
            })
            .collect()
    }
}

/// One entry of the network manifest; weights are optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkDecl {
    pub name: String,
    pub inputs: usize,
    pub outputs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Vec<Json>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<Vec<Json>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkManifest {
    pub networks: Vec<NetworkDecl>,
}

/// Reads a JSON number or a `"p/q"` string exactly. Numbers keep their
/// decimal text, so `0.1` is one tenth.
pub fn json_rational(v: &Json) -> Option<Rational> {
    let text = match v {
        Json::Number(n) => n.to_string(),
        Json::String(s) => s.clone(),
        _ => return None,
    };
    match text.split_once(['e', 'E']) {
        Some((mantissa, exp)) => {
            let m = parse_rational(mantissa)?;
            let e: i32 = exp.parse().ok()?;
            let scale = Rational::from_integer(num_traits::pow(BigInt::from(10), e.unsigned_abs() as usize));
            Some(if e >= 0 { m * scale } else { m / scale })
        }
        None => parse_rational(&text),
    }
}

pub fn rational_json(q: &Rational) -> Json {
    if q.is_integer() {
        Json::Number(q.to_integer().to_string().parse().expect("integer text is a JSON number"))
    } else {
        Json::String(format_rational(q))
    }
}

impl NetworkDecl {
    /// The concrete network, or `None` when no weights are given. A missing
    /// bias is zero.
    pub fn affine(&self) -> Result<Option<AffineNetwork>, OracleError> {
        let Some(weights) = &self.weights else { return Ok(None) };
        let bad = |what: &str| OracleError::Manifest(format!("network `{}`: {what} is not a number", self.name));
        let weights = weights
            .iter()
            .map(|row| row.iter().map(|w| json_rational(w).ok_or_else(|| bad("a weight"))).collect())
            .collect::<Result<Vec<Vec<_>>, _>>()?;
        let bias = match &self.bias {
            Some(b) => {
                b.iter().map(|x| json_rational(x).ok_or_else(|| bad("a bias entry"))).collect::<Result<_, _>>()?
            }
            None => vec![Rational::zero(); self.outputs],
        };
        let net = AffineNetwork::new(self.name.clone(), weights, bias)?;
        net.check_shape(self.inputs, self.outputs)?;
        Ok(Some(net))
    }
}

impl From<&AffineNetwork> for NetworkDecl {
    fn from(n: &AffineNetwork) -> NetworkDecl {
        NetworkDecl {
            name: n.name.clone(),
            inputs: n.inputs(),
            outputs: n.outputs(),
            weights: Some(n.weights.iter().map(|r| r.iter().map(rational_json).collect()).collect()),
            bias: Some(n.bias.iter().map(rational_json).collect()),
        }
    }
}

pub fn parse_networks(text: &str) -> Result<NetworkManifest, OracleError> {
    serde_json::from_str(text).map_err(|e| OracleError::Manifest(e.to_string()))
}

impl NetworkManifest {
    /// Every network that carries weights, by name.
    pub fn affine(&self) -> Result<BTreeMap<String, AffineNetwork>, OracleError> {
        let mut out = BTreeMap::new();
        for d in &self.networks {
            if let Some(n) = d.affine()? {
                out.insert(d.name.clone(), n);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn numbers_are_read_exactly() {
        let m = parse_networks(
            r#"{"networks":[{"name":"f","inputs":2,"outputs":1,"weights":[[0.1,"1/3"]],"bias":[-2e-1]},
                {"name":"g","inputs":1,"outputs":1}]}"#,
        )
        .unwrap();
        let nets = m.affine().unwrap();
        assert_eq!(nets.len(), 1);
        let f = &nets["f"];
        assert_eq!(f.weights, vec![vec![ratio(1, 10), ratio(1, 3)]]);
        assert_eq!(f.bias, vec![ratio(-1, 5)]);
        assert_eq!(f.apply(&[int(10), int(3)]), vec![ratio(9, 5)]);
    }

    #[test]
    fn shapes_must_match_the_declaration() {
        let m =
            parse_networks(r#"{"networks":[{"name":"f","inputs":2,"outputs":1,"weights":[[1]],"bias":[0]}]}"#).unwrap();
        assert!(matches!(m.affine(), Err(OracleError::DimensionMismatch { .. })));
    }

    #[test]
    fn manifest_round_trips() {
        let f = AffineNetwork::new("f", vec![vec![ratio(1, 3), int(2)]], vec![ratio(1, 2)]).unwrap();
        let text = serde_json::to_string(&NetworkManifest { networks: vec![NetworkDecl::from(&f)] }).unwrap();
        assert_eq!(parse_networks(&text).unwrap().affine().unwrap()["f"], f);
    }
}
