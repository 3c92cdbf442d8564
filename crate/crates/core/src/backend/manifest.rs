//! Query files and the JSON manifest describing them.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value as Json};

use super::text::{render_conjunction, render_query};
use super::{render_linear, scalar_solutions, to_dnf, EmittedProperty, EmittedQuery, PropertyOutput};
use crate::query::{Bound, Solution, Tree, Var};
use crate::state::Ctx;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Tree,
    #[default]
    Dnf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub indexing: String,
    pub properties: Vec<PropertyManifest>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyManifest {
    pub property: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    /// Boolean structure over the leaves, e.g. `(L0) or (L1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub weakened_strict: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub leaves: Vec<LeafManifest>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafManifest {
    pub negated: bool,
    pub format: Format,
    pub queries: Vec<QueryManifest>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QueryManifest {
    pub file: String,
    pub meta_network: Vec<MetaEntryManifest>,
    pub solution: Map<String, Json>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaEntryManifest {
    pub name: String,
    pub inputs: usize,
    pub outputs: usize,
}

fn structure_text(t: &Tree<usize>) -> String {
    match t {
        Tree::Atom(i) => format!("L{i}"),
        Tree::Conj(x, y) => format!("({}) and ({})", structure_text(x), structure_text(y)),
        Tree::Disj(x, y) => format!("({}) or ({})", structure_text(x), structure_text(y)),
    }
}

fn solution_json(ctx: &Ctx, p: &EmittedProperty, q: &EmittedQuery) -> Map<String, Json> {
    let global: BTreeMap<Var, Var> = q.globals.iter().enumerate().map(|(g, l)| (*l, g)).collect();
    let names = |v: Var| match (p.user_names.get(&v), global.get(&v)) {
        (Some(n), _) => n.clone(),
        (None, Some(g)) => q.meta.var_name(*g),
        (None, None) => ctx.name(v),
    };
    let bounds = |bs: &[Bound]| -> Json {
        bs.iter().map(|b| json!({"strict": b.strict, "value": render_linear(&b.value, &names)})).collect()
    };
    let mut out = Map::new();
    for s in scalar_solutions(ctx, &q.solutions) {
        let value = match &s {
            Solution::Scalar { value, .. } => Json::String(render_linear(value, &names)),
            Solution::Bounds { lower, upper, .. } => json!({"lower": bounds(lower), "upper": bounds(upper)}),
            Solution::Free { .. } => Json::String("free".into()),
            Solution::Vector { .. } => unreachable!("vector solutions are lowered"),
        };
        out.insert(names(s.var()), value);
    }
    out
}

/// The manifest entry for one property and the files it refers to.
pub fn property_files(ctx: &Ctx, p: &EmittedProperty, format: Format) -> (PropertyManifest, Vec<(String, String)>) {
    let mut files = Vec::new();
    let (status, structure, leaves) = match &p.output {
        PropertyOutput::Trivial(b) => {
            (Some(if *b { "trivially-true" } else { "trivially-false" }.to_string()), None, Vec::new())
        }
        PropertyOutput::Queries { structure, leaves } => {
            let mut out = Vec::new();
            for (li, leaf) in leaves.iter().enumerate() {
                let mut queries = Vec::new();
                for (qi, q) in leaf.queries.iter().enumerate() {
                    let meta_network = q
                        .meta
                        .entries
                        .iter()
                        .map(|e| MetaEntryManifest { name: e.network.clone(), inputs: e.inputs, outputs: e.outputs })
                        .collect::<Vec<_>>();
                    let solution = solution_json(ctx, p, q);
                    let bodies = match format {
                        Format::Tree => vec![(format!("{}.{li}.{qi}.txt", p.name), render_query(&q.meta, &q.body))],
                        Format::Dnf => to_dnf(&q.body)
                            .iter()
                            .enumerate()
                            .map(|(k, c)| (format!("{}.{li}.{qi}.{k}.txt", p.name), render_conjunction(&q.meta, c)))
                            .collect(),
                    };
                    for (file, body) in bodies {
                        queries.push(QueryManifest {
                            file: file.clone(),
                            meta_network: meta_network.clone(),
                            solution: solution.clone(),
                        });
                        files.push((file, body + "\n"));
                    }
                }
                out.push(LeafManifest { negated: leaf.negated, format, queries });
            }
            (None, Some(structure_text(structure)), out)
        }
    };
    let manifest = PropertyManifest {
        property: p.name.clone(),
        status,
        structure,
        weakened_strict: p.weakened_strict && leaves.iter().any(|l| !l.queries.is_empty()),
        leaves,
    };
    (manifest, files)
}

/// Writes every query file and `manifest.json` into `dir`.
pub fn emit(properties: &[(&Ctx, EmittedProperty)], format: Format, dir: &Path) -> io::Result<Manifest> {
    fs::create_dir_all(dir)?;
    let mut manifest = Manifest { indexing: "0-based".into(), properties: Vec::new() };
    for (ctx, p) in properties {
        let (entry, files) = property_files(ctx, p, format);
        for (name, body) in files {
            fs::write(dir.join(name), body)?;
        }
        manifest.properties.push(entry);
    }
    let text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
    fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(manifest)
}
