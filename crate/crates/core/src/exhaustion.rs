//! Exhaustion criterion for a candidate set of extremal rays.
//!
//! For each candidate `l_i` with a contraction, every edge of the contracted
//! cone `M_i` must be the image `φ_i(l_j)` of some other candidate. An edge
//! nobody hits points at a ray the candidate set is missing.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cone::{canonicalize_ray, image_cone, Pointedness, Ray};
use crate::error::{Error, Result};
use crate::linalg::{QMat, QVec};
use crate::model::FanoRecord;

/// `φ_i`, the transpose of ray `i`'s pullback matrix.
pub fn pushforward_map(r: &FanoRecord, i: usize) -> Result<QMat> {
    let ray = &r.rays[i];
    let c = ray.contraction.as_ref().ok_or_else(|| Error::MissingDescriptor {
        record: r.id.to_string(),
        ray: ray.label.clone(),
    })?;
    let p = c.pullback_matrix()?;
    if p.rows() != r.rho() || p.cols() + 1 != r.rho() {
        return Err(Error::Invariant {
            record: r.id.to_string(),
            location: ray.label.clone(),
            message: format!("pullback must be {}x{}", r.rho(), r.rho() - 1),
        });
    }
    let phi = p.transpose();
    let image = phi.mul_vec(&ray.vec)?;
    if !image.is_zero() || phi.rank() + 1 != r.rho() {
        return Err(Error::Invariant {
            record: r.id.to_string(),
            location: ray.label.clone(),
            message: format!(
                "kernel of the pushforward is not the line through {}",
                ray.vec
            ),
        });
    }
    Ok(phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    RecordTable,
    DerivedOracle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TargetEntry {
    pub edges: Vec<QVec>,
    pub provenance: Provenance,
}

/// The edge sets `M_i`, keyed by ray label.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct TargetEdges(pub BTreeMap<String, TargetEntry>);

impl TargetEdges {
    pub fn get(&self, label: &str) -> Option<&TargetEntry> {
        self.0.get(label)
    }
}

/// Extreme rays of `φ_i(cone(full_set))`.
pub fn derive_target_edges(r: &FanoRecord, full_set: &[usize], i: usize) -> Result<TargetEntry> {
    let cone = r.ray_cone(full_set)?;
    if let Pointedness::Line(l) = cone.is_pointed() {
        return Err(Error::NotPointed(l.to_string()));
    }
    let phi = pushforward_map(r, i)?;
    let image = image_cone(&cone, &phi)?;
    Ok(TargetEntry {
        edges: image.extreme_rays()?.into_iter().map(Ray::into_vec).collect(),
        provenance: Provenance::DerivedOracle,
    })
}

/// Targets for every ray with a descriptor: the record's own `target_edges`
/// where present, otherwise derived from the cone of `full_set`.
pub fn build_targets(r: &FanoRecord, full_set: &[usize]) -> Result<TargetEdges> {
    let mut out = BTreeMap::new();
    for (i, ray) in r.rays.iter().enumerate() {
        let Some(c) = &ray.contraction else { continue };
        let entry = match &c.target_edges {
            Some(edges) => TargetEntry {
                edges: edges.clone(),
                provenance: Provenance::RecordTable,
            },
            None => derive_target_edges(r, full_set, i)?,
        };
        out.insert(ray.label.clone(), entry);
    }
    Ok(TargetEdges(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Miss {
    /// 1-based position of the contracted ray in the record.
    pub i: usize,
    pub ray: String,
    pub edge: QVec,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReciprocalFailure {
    pub i: usize,
    pub j: usize,
    pub ray_i: String,
    pub ray_j: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExhaustionReport {
    pub record: String,
    pub candidate_labels: Vec<String>,
    pub verdict: Verdict,
    pub misses: Vec<Miss>,
    pub reciprocal_failures: Vec<ReciprocalFailure>,
}

impl ExhaustionReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// 1-based indices of the rays with at least one uncovered edge.
    pub fn miss_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.misses.iter().map(|m| m.i).collect();
        v.dedup();
        v
    }
}

/// A candidate ray. `ray` is its index in the record when it is one of the
/// record's rays; proposals that match no record ray have none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub label: String,
    pub vec: QVec,
    pub ray: Option<usize>,
}

impl Candidate {
    pub fn from_record(r: &FanoRecord, i: usize) -> Self {
        Candidate {
            label: r.rays[i].label.clone(),
            vec: r.rays[i].vec.clone(),
            ray: Some(i),
        }
    }
}

fn canonical_image(phi: &QMat, v: &QVec) -> Result<Option<Ray>> {
    let w = phi.mul_vec(v)?;
    if w.is_zero() {
        Ok(None)
    } else {
        canonicalize_ray(&w).map(Some)
    }
}

fn canonical_edges(entry: &TargetEntry) -> Result<Vec<Ray>> {
    let mut e = entry
        .edges
        .iter()
        .map(canonicalize_ray)
        .collect::<Result<Vec<_>>>()?;
    e.sort();
    e.dedup();
    Ok(e)
}

pub fn check_exhaustion(
    r: &FanoRecord,
    candidates: &[usize],
    targets: &TargetEdges,
) -> Result<ExhaustionReport> {
    let cands: Vec<Candidate> = candidates
        .iter()
        .map(|&i| Candidate::from_record(r, i))
        .collect();
    check_candidates(r, &cands, targets)
}

pub fn check_candidates(
    r: &FanoRecord,
    cands: &[Candidate],
    targets: &TargetEdges,
) -> Result<ExhaustionReport> {
    let vecs: Vec<QVec> = cands.iter().map(|c| c.vec.clone()).collect();
    if let Pointedness::Line(l) = crate::cone::Cone::new(r.rho(), &vecs)?.is_pointed() {
        return Err(Error::NotPointed(l.to_string()));
    }

    let mut contracted: Vec<(usize, &Candidate)> = cands
        .iter()
        .filter_map(|c| c.ray.map(|i| (i, c)))
        .filter(|(i, _)| r.rays[*i].contraction.is_some())
        .collect();
    contracted.sort_by_key(|(i, _)| *i);

    let mut maps = BTreeMap::new();
    let mut edge_sets = BTreeMap::new();
    for &(i, c) in &contracted {
        let entry = targets.get(&c.label).ok_or_else(|| Error::MissingTargets {
            record: r.id.to_string(),
            ray: c.label.clone(),
        })?;
        maps.insert(i, pushforward_map(r, i)?);
        edge_sets.insert(i, canonical_edges(entry)?);
    }

    let mut misses = Vec::new();
    let mut reciprocal = Vec::new();
    for &(i, ci) in &contracted {
        let phi = &maps[&i];
        let images: Vec<(&Candidate, Option<Ray>)> = cands
            .iter()
            .filter(|c| c.ray != Some(i))
            .map(|c| Ok((c, canonical_image(phi, &c.vec)?)))
            .collect::<Result<_>>()?;
        for m in &edge_sets[&i] {
            let hits: Vec<&Candidate> = images
                .iter()
                .filter(|(_, img)| img.as_ref() == Some(m))
                .map(|(c, _)| *c)
                .collect();
            if hits.is_empty() {
                misses.push(Miss {
                    i: i + 1,
                    ray: ci.label.clone(),
                    edge: m.vec().clone(),
                    note: format!(
                        "edge {m} of the cone contracted by {} is the image of no other candidate",
                        ci.label
                    ),
                });
                continue;
            }
            for cj in hits {
                let Some(j) = cj.ray else { continue };
                let Some(phi_j) = maps.get(&j) else { continue };
                let back = canonical_image(phi_j, &ci.vec)?;
                let ok = back.is_some_and(|b| edge_sets[&j].contains(&b));
                if !ok {
                    reciprocal.push(ReciprocalFailure {
                        i: i + 1,
                        j: j + 1,
                        ray_i: ci.label.clone(),
                        ray_j: cj.label.clone(),
                    });
                }
            }
        }
    }
    misses.sort_by(|a, b| (a.i, &a.edge).cmp(&(b.i, &b.edge)));
    reciprocal.sort_by_key(|f| (f.i, f.j));
    reciprocal.dedup();

    let verdict = if misses.is_empty() && reciprocal.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ExhaustionReport {
        record: r.id.to_string(),
        candidate_labels: cands.iter().map(|c| c.label.clone()).collect(),
        verdict,
        misses,
        reciprocal_failures: reciprocal,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Extension {
    pub final_candidates: Vec<String>,
    pub added: Vec<String>,
    pub warnings: Vec<String>,
    pub trail: Vec<ExhaustionReport>,
}

impl Extension {
    pub fn final_report(&self) -> &ExhaustionReport {
        self.trail.last().expect("at least one check runs")
    }
}

/// Runs the check, and while it fails adds the first remaining proposal
/// whose image covers a missed edge. Proposals that cover nothing are
/// skipped with a warning.
pub fn extend_candidates(
    r: &FanoRecord,
    candidates: &[usize],
    targets: &TargetEdges,
    proposals: &[QVec],
) -> Result<Extension> {
    let mut cands: Vec<Candidate> = candidates
        .iter()
        .map(|&i| Candidate::from_record(r, i))
        .collect();
    let mut queue: Vec<(usize, QVec)> = proposals.iter().cloned().enumerate().collect();
    queue.reverse();
    let mut trail = Vec::new();
    let mut added = Vec::new();
    let mut warnings = Vec::new();

    loop {
        let report = check_candidates(r, &cands, targets)?;
        let done = report.passed();
        let misses = report.misses.clone();
        trail.push(report);
        if done {
            break;
        }
        let mut consumed = None;
        while let Some((k, p)) = queue.pop() {
            if p.dim() != r.rho() {
                return Err(Error::DimensionMismatch(format!(
                    "proposal {p} against {} basis divisors",
                    r.rho()
                )));
            }
            let mut covers = false;
            for m in &misses {
                let phi = pushforward_map(r, m.i - 1)?;
                let edge = canonicalize_ray(&m.edge)?;
                if canonical_image(&phi, &p)?.as_ref() == Some(&edge) {
                    covers = true;
                    break;
                }
            }
            if covers {
                consumed = Some((k, p));
                break;
            }
            warnings.push(format!("proposal {} {p} covers no missed edge; skipped", k + 1));
        }
        let Some((k, p)) = consumed else { break };
        let cand = proposal_candidate(r, k, p)?;
        added.push(cand.label.clone());
        cands.push(cand);
    }

    Ok(Extension {
        final_candidates: cands.into_iter().map(|c| c.label).collect(),
        added,
        warnings,
        trail,
    })
}

fn proposal_candidate(r: &FanoRecord, k: usize, p: QVec) -> Result<Candidate> {
    let cp = canonicalize_ray(&p)?;
    for (i, ray) in r.rays.iter().enumerate() {
        if canonicalize_ray(&ray.vec)? == cp {
            return Ok(Candidate::from_record(r, i));
        }
    }
    Ok(Candidate {
        label: format!("p{}", k + 1),
        vec: p,
        ray: None,
    })
}
