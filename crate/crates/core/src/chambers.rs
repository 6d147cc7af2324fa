//! Nef cones, the dual form of the exhaustion criterion, and chamber graphs.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::audit::Finding;
use crate::cone::{image_cone, Cone};
use crate::error::{Error, Result};
use crate::exhaustion::{pushforward_map, TargetEdges};
use crate::model::{ChamberData, FanoRecord, FlopType};

/// The dual of the cone spanned by the record's rays.
pub fn nef_cone(r: &FanoRecord) -> Result<Cone> {
    let ne = r.full_cone()?;
    // Validates pointedness and full dimension before dualizing.
    ne.facets()?;
    Ok(ne.dual())
}

/// For each contracted candidate `l_i`, the facet of the nef cone cut out by
/// `l_i`, read in the target's coordinates through the pullback chart, must
/// equal the dual of `cone(M_i)`. Every codimension-two face of the nef cone
/// must lie on exactly two facets.
pub fn facet_patch_check(
    r: &FanoRecord,
    candidates: &[usize],
    targets: &TargetEdges,
) -> Result<Vec<Finding>> {
    let ne = r.ray_cone(candidates)?;
    let mut findings = Vec::new();
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    for &i in &sorted {
        let ray = &r.rays[i];
        if ray.contraction.is_none() {
            continue;
        }
        let entry = targets.get(&ray.label).ok_or_else(|| Error::MissingTargets {
            record: r.id.to_string(),
            ray: ray.label.clone(),
        })?;
        let phi = pushforward_map(r, i)?;
        // y is on the facet iff P y is nef iff y pairs nonnegatively with φ_i(NE).
        let facet = image_cone(&ne, &phi)?.dual();
        let expected = Cone::new(r.rho() - 1, &entry.edges)?.dual();
        let mut too_big = Vec::new();
        for g in facet.generators() {
            if !expected.contains(g.vec())? {
                too_big.push(g.to_string());
            }
        }
        let mut too_small = Vec::new();
        for g in expected.generators() {
            if !facet.contains(g.vec())? {
                too_small.push(g.to_string());
            }
        }
        if !too_big.is_empty() {
            findings.push(Finding::keyed(
                &ray.label,
                format!(
                    "facet cut out by {} is strictly larger than the dual of its target cone: contains {}",
                    ray.label,
                    too_big.join(", ")
                ),
            ));
        }
        if !too_small.is_empty() {
            findings.push(Finding::keyed(
                &ray.label,
                format!(
                    "facet cut out by {} misses {} of the dual of its target cone",
                    ray.label,
                    too_small.join(", ")
                ),
            ));
        }
    }
    let amp = ne.dual();
    match amp.codim2_faces() {
        Ok(faces) => {
            for f in faces {
                if f.facets.len() != 2 {
                    let gens: Vec<String> = f.generators.iter().map(ToString::to_string).collect();
                    findings.push(Finding::unkeyed(format!(
                        "codimension-two face [{}] of the nef cone lies on {} facets",
                        gens.join(", "),
                        f.facets.len()
                    )));
                }
            }
        }
        Err(e @ (Error::LowerDimensional { .. } | Error::NotPointed(_))) => {
            findings.push(Finding::unkeyed(format!("nef cone has no facet structure: {e}")));
        }
        Err(e) => return Err(e),
    }
    Ok(findings)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChamberNode {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChamberEdge {
    pub from: String,
    pub to: String,
    pub flop_type: FlopType,
}

/// Chambers joined by typed flops. Self-inverse edges are stored with
/// `from < to`; an `E*_inv` edge is stored as the forward type reversed, so
/// each adjacency has exactly one representation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChamberGraph {
    pub nodes: Vec<ChamberNode>,
    pub edges: Vec<ChamberEdge>,
}

impl ChamberGraph {
    pub fn from_data(data: &ChamberData) -> Result<Self> {
        let mut ids = BTreeSet::new();
        let mut labels = BTreeSet::new();
        for n in &data.nodes {
            if !ids.insert(n.id.as_str()) {
                return Err(Error::ChamberGraph(format!("duplicate chamber id {:?}", n.id)));
            }
            if !labels.insert(n.label.as_str()) {
                return Err(Error::ChamberGraph(format!("duplicate chamber label {:?}", n.label)));
            }
        }
        let mut pairs = BTreeSet::new();
        let mut edges = Vec::new();
        for e in &data.edges {
            let t: FlopType = e.flop_type.parse()?;
            for end in [&e.from, &e.to] {
                if !ids.contains(end.as_str()) {
                    return Err(Error::ChamberGraph(format!("edge endpoint {end:?} is not a chamber")));
                }
            }
            if e.from == e.to {
                return Err(Error::ChamberGraph(format!("self-loop at {:?}", e.from)));
            }
            let (from, to, t) = if t.is_self_inverse() {
                if e.from < e.to {
                    (e.from.clone(), e.to.clone(), t)
                } else {
                    (e.to.clone(), e.from.clone(), t)
                }
            } else if t.is_inverse_variant() {
                (e.to.clone(), e.from.clone(), t.inverse())
            } else {
                (e.from.clone(), e.to.clone(), t)
            };
            let key = if from < to { (from.clone(), to.clone()) } else { (to.clone(), from.clone()) };
            if !pairs.insert(key) {
                return Err(Error::ChamberGraph(format!(
                    "chambers {from:?} and {to:?} are joined twice"
                )));
            }
            edges.push(ChamberEdge { from, to, flop_type: t });
        }
        let mut nodes: Vec<ChamberNode> = data
            .nodes
            .iter()
            .map(|n| ChamberNode { id: n.id.clone(), label: n.label.clone() })
            .collect();
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        edges.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
        Ok(ChamberGraph { nodes, edges })
    }

    /// Flop type of the move from chamber `from` to chamber `to`, if adjacent.
    pub fn flop_between(&self, from: &str, to: &str) -> Option<FlopType> {
        self.edges.iter().find_map(|e| {
            if e.from == from && e.to == to {
                Some(e.flop_type)
            } else if e.from == to && e.to == from {
                Some(e.flop_type.inverse())
            } else {
                None
            }
        })
    }
}

/// Builds the validated chamber graph of a record; a record without
/// adjacency data has the single chamber `T`.
pub fn chamber_graph(r: &FanoRecord) -> Result<ChamberGraph> {
    match &r.chambers {
        Some(d) => ChamberGraph::from_data(d),
        None => Ok(ChamberGraph {
            nodes: vec![ChamberNode { id: "T".into(), label: "T".into() }],
            edges: Vec::new(),
        }),
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn emit_dot(name: &str, g: &ChamberGraph) -> String {
    let mut s = String::new();
    writeln!(s, "graph {} {{", quote(name)).unwrap();
    for n in &g.nodes {
        writeln!(s, "  {} [label={}];", quote(&n.id), quote(&n.label)).unwrap();
    }
    for e in &g.edges {
        writeln!(
            s,
            "  {} -- {} [label={}];",
            quote(&e.from),
            quote(&e.to),
            quote(e.flop_type.as_str())
        )
        .unwrap();
    }
    s.push_str("}\n");
    s
}
