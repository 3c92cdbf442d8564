//! Exact decision of emitted queries against concrete affine networks.

use std::collections::BTreeMap;

use super::lra::{holds, satisfy, Limits};
use super::networks::AffineNetwork;
use super::OracleError;
use crate::backend::{to_dnf, MetaNetwork};
use crate::query::{Assertion, Query, ScalarLinear, Var};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// A model over the global variables `X..` then `Y..`.
    Sat(BTreeMap<Var, Rational>),
    Unsat,
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat(_))
    }
}

/// `Y = W·X + b` for every block of the meta-network.
pub fn network_equations(
    meta: &MetaNetwork,
    nets: &BTreeMap<String, AffineNetwork>,
) -> Result<Vec<Assertion>, OracleError> {
    let m = meta.total_inputs();
    let mut out = Vec::new();
    for (k, e) in meta.entries.iter().enumerate() {
        let net = nets.get(&e.network).ok_or_else(|| OracleError::MissingNetwork(e.network.clone()))?;
        net.check_shape(e.inputs, e.outputs)?;
        let xs: Vec<ScalarLinear> = (0..e.inputs).map(|i| ScalarLinear::scalar_var(meta.input_offset(k) + i)).collect();
        for (j, y) in net.apply_linear(&xs).into_iter().enumerate() {
            let out_var = ScalarLinear::scalar_var(m + meta.output_offset(k) + j);
            out.push(Assertion::Eq(out_var.minus(&y)));
        }
    }
    Ok(out)
}

pub fn decide_query(
    meta: &MetaNetwork,
    nets: &BTreeMap<String, AffineNetwork>,
    q: &Query,
) -> Result<Verdict, OracleError> {
    decide_query_with(meta, nets, q, Limits::default())
}

/// Splits `q` into disjuncts and decides each together with the network
/// equations. The first satisfiable disjunct provides the witness.
pub fn decide_query_with(
    meta: &MetaNetwork,
    nets: &BTreeMap<String, AffineNetwork>,
    q: &Query,
    limits: Limits,
) -> Result<Verdict, OracleError> {
    let equations = network_equations(meta, nets)?;
    let total = meta.total_inputs() + meta.total_outputs();
    for conj in to_dnf(q) {
        if let Some(v) = conj.iter().flat_map(Assertion::vars).find(|v| *v >= total) {
            return Err(OracleError::DimensionMismatch {
                name: "meta-network".into(),
                message: format!("query mentions variable {v} but the meta-network has {total}"),
            });
        }
        let mut atoms = equations.clone();
        atoms.extend(conj);
        if let Some(mut model) = satisfy(&atoms, limits)? {
            for v in 0..total {
                model.entry(v).or_insert_with(num_traits::Zero::zero);
            }
            assert!(holds(&atoms, &|v| model.get(&v).cloned()), "witness violates its own query");
            return Ok(Verdict::Sat(model));
        }
    }
    Ok(Verdict::Unsat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{parse_query, MetaEntry};
    use crate::rational::int;

    fn identity() -> BTreeMap<String, AffineNetwork> {
        let f = AffineNetwork::new("f", vec![vec![int(1)]], vec![int(0)]).unwrap();
        BTreeMap::from([("f".to_string(), f)])
    }

    fn meta() -> MetaNetwork {
        MetaNetwork { entries: vec![MetaEntry { network: "f".into(), inputs: 1, outputs: 1, application: 0 }] }
    }

    fn decide(text: &str) -> Verdict {
        let m = meta();
        decide_query(&m, &identity(), &parse_query(&m, text).unwrap()).unwrap()
    }

    #[test]
    fn identity_network_queries() {
        match decide("(Y0 >= 0.0)") {
            Verdict::Sat(w) => assert_eq!(w[&0], w[&1]),
            Verdict::Unsat => panic!("expected sat"),
        }
        assert_eq!(decide("(Y0 >= 1.0) and (Y0 <= 0.0)"), Verdict::Unsat);
        assert_eq!(decide("(0.0 < 0.0)"), Verdict::Unsat);
        assert!(decide("((Y0 >= 1.0) and (Y0 <= 0.0)) or (X0 == 3.0)").is_sat());
        // the network ties Y0 to X0
        assert_eq!(decide("(X0 >= 1.0) and (Y0 <= 0.0)"), Verdict::Unsat);
    }

    #[test]
    fn missing_or_misshapen_networks_are_errors() {
        let m = meta();
        let q = parse_query(&m, "(Y0 >= 0.0)").unwrap();
        assert!(matches!(decide_query(&m, &BTreeMap::new(), &q), Err(OracleError::MissingNetwork(_))));
        let wide = AffineNetwork::new("f", vec![vec![int(1), int(1)]], vec![int(0)]).unwrap();
        let nets = BTreeMap::from([("f".to_string(), wide)]);
        assert!(matches!(decide_query(&m, &nets, &q), Err(OracleError::DimensionMismatch { .. })));
    }
}
