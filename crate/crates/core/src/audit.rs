//! Itemized audit of one record.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::chambers::{chamber_graph, facet_patch_check};
use crate::cone::Pointedness;
use crate::error::{Error, Result};
use crate::exhaustion::{build_targets, check_exhaustion};
use crate::flop::{flopped_rows, solve_pullback_coeffs, verify_against_table, FlopConfig};
use crate::model::{derive_anti_k_combo, row_location, AntiKDerivation, FanoRecord};

/// A single failed check, optionally keyed by the row or ray it concerns.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Finding {
    pub key: Option<String>,
    pub message: String,
}

impl Finding {
    pub fn keyed(key: &str, message: impl Into<String>) -> Self {
        Finding { key: Some(key.to_string()), message: message.into() }
    }

    pub fn unkeyed(message: impl Into<String>) -> Self {
        Finding { key: None, message: message.into() }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.key {
            Some(k) => write!(f, "{k}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl Serialize for Finding {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Section {
    pub check: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub findings: Vec<Finding>,
}

impl Section {
    fn from_findings(check: &str, findings: Vec<Finding>) -> Self {
        let status = if findings.is_empty() { Status::Pass } else { Status::Fail };
        Section { check: check.into(), status, note: None, findings }
    }

    fn skipped(check: &str, note: impl Into<String>) -> Self {
        Section {
            check: check.into(),
            status: Status::Skipped,
            note: Some(note.into()),
            findings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub record: String,
    pub status: Status,
    pub sections: Vec<Section>,
}

impl AuditReport {
    pub fn new(record: String, sections: Vec<Section>) -> Self {
        let failed = sections.iter().any(|s| s.status == Status::Fail);
        AuditReport {
            record,
            status: if failed { Status::Fail } else { Status::Pass },
            sections,
        }
    }

    pub fn section(&self, check: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.check == check)
    }

    pub fn findings(&self) -> impl Iterator<Item = &Finding> {
        self.sections.iter().flat_map(|s| s.findings.iter())
    }

    pub fn finding_count(&self) -> usize {
        self.findings().count()
    }

    /// Distinct row or ray keys across all findings.
    pub fn flagged_keys(&self) -> BTreeSet<String> {
        self.findings().filter_map(|f| f.key.clone()).collect()
    }
}

pub const ANTI_K_ROWS: &str = "antiK_rows";
pub const POSITIVITY: &str = "antiK_positivity";
pub const PROJECTION: &str = "projection_formula";
pub const POINTEDNESS: &str = "pointedness";
pub const DERIVATION: &str = "antiK_derivation";
pub const REFERENCE: &str = "reference_diff";
pub const EXHAUSTION: &str = "exhaustion";
pub const FACET_PATCH: &str = "facet_patch";
pub const CHAMBERS: &str = "chamber_graph";
pub const FLOPS: &str = "flop_tables";

/// Value-level checks of a loaded record, each failure itemized.
pub fn validate_record(r: &FanoRecord) -> Result<AuditReport> {
    let mut sections = vec![
        anti_k_rows(r)?,
        positivity(r),
        projection(r)?,
        pointedness(r)?,
    ];
    sections.push(derivation(r)?);
    Ok(AuditReport::new(r.id.to_string(), sections))
}

/// Everything [`validate_record`] does, plus the cone criteria, the chamber
/// graph, flop recomputation for the given configs and, when a reference
/// record is supplied, a cell-by-cell diff against it.
pub fn audit_record(
    r: &FanoRecord,
    reference: Option<&FanoRecord>,
    flops: &[&FlopConfig],
) -> Result<AuditReport> {
    let mut report = validate_record(r)?;
    let mut sections = std::mem::take(&mut report.sections);
    sections.push(match reference {
        Some(reference) => reference_diff(r, reference),
        None => Section::skipped(REFERENCE, "no reference record"),
    });
    let pointed = sections
        .iter()
        .any(|s| s.check == POINTEDNESS && s.status == Status::Pass);
    let (ex, patch) = cone_criteria(r, pointed)?;
    sections.push(ex);
    sections.push(patch);
    sections.push(match chamber_graph(r) {
        Ok(_) => Section::from_findings(CHAMBERS, Vec::new()),
        Err(e) => Section::from_findings(CHAMBERS, vec![Finding::unkeyed(e.to_string())]),
    });
    sections.push(flop_section(r, flops)?);
    Ok(AuditReport::new(r.id.to_string(), sections))
}

fn anti_k_rows(r: &FanoRecord) -> Result<Section> {
    let mut findings = Vec::new();
    for row in r.anti_k_rows() {
        let expected = r.expected_anti_k(&row.vec)?;
        if expected != row.anti_k {
            findings.push(Finding::keyed(
                &row.label,
                format!(
                    "-K mismatch at {}: stored {}, expected {expected}",
                    row_location(&row),
                    row.anti_k
                ),
            ));
        }
    }
    Ok(Section::from_findings(ANTI_K_ROWS, findings))
}

fn positivity(r: &FanoRecord) -> Section {
    let findings = r
        .rays
        .iter()
        .filter(|ray| !ray.anti_k.is_positive())
        .map(|ray| Finding::keyed(&ray.label, format!("-K . {} = {} is not positive", ray.label, ray.anti_k)))
        .collect();
    Section::from_findings(POSITIVITY, findings)
}

fn projection(r: &FanoRecord) -> Result<Section> {
    let mut findings = Vec::new();
    for ray in &r.rays {
        if ray.ray_type.is_divisorial() && ray.contraction.is_none() {
            findings.push(Finding::keyed(&ray.label, "divisorial ray without contraction descriptor"));
        }
        if let Some(msg) = r.descriptor_violation(ray)? {
            findings.push(Finding::keyed(&ray.label, msg));
        }
    }
    Ok(Section::from_findings(PROJECTION, findings))
}

fn pointedness(r: &FanoRecord) -> Result<Section> {
    if r.rays.is_empty() {
        return Ok(Section::from_findings(POINTEDNESS, vec![Finding::unkeyed("empty ray list")]));
    }
    let findings = match r.full_cone()?.is_pointed() {
        Pointedness::Pointed(_) => Vec::new(),
        Pointedness::Line(l) => vec![Finding::unkeyed(format!("cone of rays contains the line through {l}"))],
    };
    Ok(Section::from_findings(POINTEDNESS, findings))
}

fn derivation(r: &FanoRecord) -> Result<Section> {
    let rows = r.anti_k_rows();
    let pairs: Vec<_> = rows.iter().map(|x| (x.vec.clone(), x.anti_k.clone())).collect();
    Ok(match derive_anti_k_combo(&pairs, r.rho())? {
        AntiKDerivation::Unique(l) if l == r.anti_k_combo => Section::from_findings(DERIVATION, Vec::new()),
        AntiKDerivation::Unique(l) => Section::from_findings(
            DERIVATION,
            vec![Finding::unkeyed(format!("rows determine {l} but antiK_combo is {}", r.anti_k_combo))],
        ),
        AntiKDerivation::Inconsistent(w) => {
            let labels: Vec<&str> = w.iter().map(|&i| rows[i].label.as_str()).collect();
            Section::from_findings(
                DERIVATION,
                vec![Finding::unkeyed(format!(
                    "no single -K combination fits all rows; minimal inconsistent rows: {}",
                    labels.join(", ")
                ))],
            )
        }
        AntiKDerivation::Underdetermined { kernel_dim } => {
            Section::skipped(DERIVATION, format!("rows leave a {kernel_dim}-dimensional freedom"))
        }
    })
}

fn reference_diff(r: &FanoRecord, reference: &FanoRecord) -> Section {
    let mut findings = Vec::new();
    if r.basis != reference.basis {
        findings.push(Finding::unkeyed(format!(
            "basis {:?} differs from reference {:?}",
            r.basis, reference.basis
        )));
    }
    if r.anti_k_combo != reference.anti_k_combo {
        findings.push(Finding::unkeyed(format!(
            "antiK_combo {} differs from reference {}",
            r.anti_k_combo, reference.anti_k_combo
        )));
    }
    let ours = r.anti_k_rows();
    let theirs = reference.anti_k_rows();
    for row in &ours {
        match theirs.iter().find(|x| x.label == row.label && x.table == row.table) {
            None => findings.push(Finding::keyed(
                &row.label,
                format!("{} is absent from the reference", row_location(row)),
            )),
            Some(x) if x.vec != row.vec || x.anti_k != row.anti_k => findings.push(Finding::keyed(
                &row.label,
                format!(
                    "{} reads {} | {}, reference {} | {}",
                    row_location(row),
                    row.vec,
                    row.anti_k,
                    x.vec,
                    x.anti_k
                ),
            )),
            Some(_) => {}
        }
    }
    for x in &theirs {
        if !ours.iter().any(|row| row.label == x.label && row.table == x.table) {
            findings.push(Finding::keyed(&x.label, format!("{} is missing", row_location(x))));
        }
    }
    Section::from_findings(REFERENCE, findings)
}

fn cone_criteria(r: &FanoRecord, pointed: bool) -> Result<(Section, Section)> {
    if !pointed {
        return Ok((
            Section::skipped(EXHAUSTION, "ray cone is not pointed"),
            Section::skipped(FACET_PATCH, "ray cone is not pointed"),
        ));
    }
    if r.rays.iter().all(|x| x.contraction.is_none()) {
        return Ok((
            Section::skipped(EXHAUSTION, "no contraction descriptors"),
            Section::skipped(FACET_PATCH, "no contraction descriptors"),
        ));
    }
    let all: Vec<usize> = (0..r.rays.len()).collect();
    let targets = match build_targets(r, &all) {
        Ok(t) => t,
        Err(e @ (Error::Invariant { .. } | Error::NotPointed(_))) => {
            let f = vec![Finding::unkeyed(e.to_string())];
            return Ok((
                Section::from_findings(EXHAUSTION, f.clone()),
                Section::from_findings(FACET_PATCH, f),
            ));
        }
        Err(e) => return Err(e),
    };
    let ex = match check_exhaustion(r, &all, &targets) {
        Ok(rep) => {
            let mut f: Vec<Finding> = rep
                .misses
                .iter()
                .map(|m| Finding::keyed(&m.ray, m.note.clone()))
                .collect();
            f.extend(rep.reciprocal_failures.iter().map(|x| {
                Finding::keyed(
                    &x.ray_i,
                    format!("{} is matched by {} but its image under the contraction of {} is no edge", x.ray_i, x.ray_j, x.ray_j),
                )
            }));
            Section::from_findings(EXHAUSTION, f)
        }
        Err(e @ Error::Invariant { .. }) => Section::from_findings(EXHAUSTION, vec![Finding::unkeyed(e.to_string())]),
        Err(e) => return Err(e),
    };
    let patch = match facet_patch_check(r, &all, &targets) {
        Ok(f) => Section::from_findings(FACET_PATCH, f),
        Err(e @ Error::Invariant { .. }) => Section::from_findings(FACET_PATCH, vec![Finding::unkeyed(e.to_string())]),
        Err(e) => return Err(e),
    };
    Ok((ex, patch))
}

fn flop_section(r: &FanoRecord, flops: &[&FlopConfig]) -> Result<Section> {
    let mine: Vec<&&FlopConfig> = flops.iter().filter(|c| c.record == r.id).collect();
    if mine.is_empty() {
        return Ok(Section::skipped(FLOPS, "no flop configuration"));
    }
    let mut findings = Vec::new();
    for cfg in mine {
        match solve_pullback_coeffs(cfg) {
            Ok(coeffs) => {
                let res = flopped_rows(cfg, &coeffs)?;
                findings.extend(verify_against_table(r, cfg, &res)?);
            }
            Err(e @ (Error::Underdetermined { .. } | Error::Inconsistent { .. })) => {
                findings.push(Finding::keyed(&cfg.ray, e.to_string()));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Section::from_findings(FLOPS, findings))
}
