//! Intersection numbers across a flop.
//!
//! On a common resolution the pullback of a flopped divisor is the pullback
//! of the original plus a combination of exceptional divisors,
//! `(ψ⁺)*X⁺ = ψ*X + Σ α_s D^s`. The `α` are fixed by asking every curve the
//! flop contracts to pair to zero with the left-hand side.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::audit::Finding;
use crate::error::{Error, Result};
use crate::linalg::{solve_linear, QMat, QVec};
use crate::model::{from_json_slice, FanoRecord, RecordId};
use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestCurve {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// `(c, ψ*X_t)` for each tracked divisor.
    pub pullback_row: QVec,
    /// `(c, D^s)` for each exceptional divisor.
    pub exc_row: QVec,
    pub contracted_by_flop: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlopConfig {
    pub record: RecordId,
    pub ray: String,
    pub tracked_divisors: Vec<String>,
    pub exceptional_divisors: Vec<String>,
    pub test_curves: Vec<TestCurve>,
    pub result_curves: Vec<String>,
    #[serde(rename = "antiK_combo_tracked")]
    pub anti_k_combo_tracked: QVec,
}

impl FlopConfig {
    fn invariant(&self, location: &str, message: String) -> Error {
        Error::Invariant {
            record: self.record.to_string(),
            location: format!("flop {}: {location}", self.ray),
            message,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nt = self.tracked_divisors.len();
        let ns = self.exceptional_divisors.len();
        if self.anti_k_combo_tracked.dim() != nt {
            return Err(self.invariant(
                "antiK_combo_tracked",
                format!("length {} for {nt} tracked divisors", self.anti_k_combo_tracked.dim()),
            ));
        }
        let mut labels = BTreeSet::new();
        for c in &self.test_curves {
            if !labels.insert(c.label.as_str()) {
                return Err(self.invariant(&c.label, "duplicate test curve label".into()));
            }
            if c.pullback_row.dim() != nt || c.exc_row.dim() != ns {
                return Err(self.invariant(
                    &c.label,
                    format!("rows must have lengths {nt} and {ns}"),
                ));
            }
        }
        for l in &self.result_curves {
            if !labels.contains(l.as_str()) {
                return Err(Error::UnknownLabel(l.clone()));
            }
        }
        let contracted = self.test_curves.iter().filter(|c| c.contracted_by_flop).count();
        if contracted < ns {
            return Err(self.invariant(
                "test_curves",
                format!("{contracted} contracted curves cannot determine {ns} coefficients"),
            ));
        }
        Ok(())
    }

    fn curve(&self, label: &str) -> Result<&TestCurve> {
        self.test_curves
            .iter()
            .find(|c| c.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }
}

pub fn parse_flop_config(bytes: &[u8]) -> Result<FlopConfig> {
    let cfg: FlopConfig = from_json_slice(bytes)?;
    cfg.validate()?;
    Ok(cfg)
}

fn system(curves: &[&TestCurve], t: usize, ns: usize) -> Result<(QMat, QVec)> {
    let rows: Vec<QVec> = curves.iter().map(|c| c.exc_row.clone()).collect();
    let a = if rows.is_empty() {
        QMat::zeros(0, ns)
    } else {
        QMat::from_rows(&rows)?
    };
    let b = QVec::from(
        curves
            .iter()
            .map(|c| -&c.pullback_row[t])
            .collect::<Vec<_>>(),
    );
    Ok((a, b))
}

/// Coefficients `α_{t,s}`: rows are tracked divisors, columns exceptional
/// divisors.
pub fn solve_pullback_coeffs(cfg: &FlopConfig) -> Result<QMat> {
    let ns = cfg.exceptional_divisors.len();
    let nt = cfg.tracked_divisors.len();
    let contracted: Vec<&TestCurve> = cfg.test_curves.iter().filter(|c| c.contracted_by_flop).collect();
    let mut out = QMat::zeros(nt, ns);
    for t in 0..nt {
        let (a, b) = system(&contracted, t, ns)?;
        match solve_linear(&a, &b)? {
            Some(s) if s.kernel_basis.is_empty() => {
                for (k, v) in s.solution.iter().enumerate() {
                    out.set(t, k, v.clone());
                }
            }
            Some(s) => {
                return Err(Error::Underdetermined {
                    divisor: cfg.tracked_divisors[t].clone(),
                    kernel_dim: s.kernel_basis.len(),
                })
            }
            None => {
                let mut keep = contracted.clone();
                let mut k = 0;
                while k < keep.len() {
                    let mut trial = keep.clone();
                    trial.remove(k);
                    let (a, b) = system(&trial, t, ns)?;
                    if solve_linear(&a, &b)?.is_none() {
                        keep = trial;
                    } else {
                        k += 1;
                    }
                }
                return Err(Error::Inconsistent {
                    divisor: cfg.tracked_divisors[t].clone(),
                    curves: keep.iter().map(|c| c.label.clone()).collect(),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlopResultRow {
    pub label: String,
    /// `(l, X_t⁺)` for each tracked divisor.
    pub vec: QVec,
    #[serde(rename = "antiK")]
    pub anti_k: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlopResult {
    pub coeffs: QMat,
    pub rows: Vec<FlopResultRow>,
}

/// `(c, (ψ⁺)*X_t⁺)` for one test curve.
pub fn corrected_row(cfg: &FlopConfig, coeffs: &QMat, c: &TestCurve) -> QVec {
    QVec::from(
        (0..cfg.tracked_divisors.len())
            .map(|t| {
                let corr: Rat = (0..cfg.exceptional_divisors.len())
                    .map(|s| coeffs.get(t, s) * &c.exc_row[s])
                    .sum();
                &c.pullback_row[t] + &corr
            })
            .collect::<Vec<_>>(),
    )
}

pub fn flopped_rows(cfg: &FlopConfig, coeffs: &QMat) -> Result<FlopResult> {
    let mut rows = Vec::new();
    for l in &cfg.result_curves {
        let c = cfg.curve(l)?;
        let vec = corrected_row(cfg, coeffs, c);
        let anti_k = cfg.anti_k_combo_tracked.dot(&vec)?;
        rows.push(FlopResultRow { label: l.clone(), vec, anti_k });
    }
    Ok(FlopResult { coeffs: coeffs.clone(), rows })
}

/// Coefficient names: row `t` (tracked divisor) and column `s` (exceptional
/// divisor) get letter number `t * max(cols, 2) + s`, so with one exceptional
/// divisor the coefficients are `a, c`, and with two `a, b, c, d`.
pub fn coefficient_letters(coeffs: &QMat) -> Vec<(String, Rat)> {
    let stride = coeffs.cols().max(2);
    let mut out = Vec::new();
    for t in 0..coeffs.rows() {
        for s in 0..coeffs.cols() {
            let k = t * stride + s;
            let name = if k < 26 {
                ((b'a' + k as u8) as char).to_string()
            } else {
                format!("alpha{k}")
            };
            out.push((name, coeffs.get(t, s).clone()));
        }
    }
    out
}

/// Cell-by-cell comparison of computed rows with the record's table for the
/// flopped ray. Missing tables and rows are findings; when a computed row
/// turns up under another label the finding names that row.
pub fn verify_against_table(r: &FanoRecord, cfg: &FlopConfig, res: &FlopResult) -> Result<Vec<Finding>> {
    if r.id != cfg.record {
        return Err(Error::Invariant {
            record: r.id.to_string(),
            location: format!("flop {}", cfg.ray),
            message: format!("config belongs to {}", cfg.record),
        });
    }
    r.ray_index(&cfg.ray)?;
    if cfg.tracked_divisors.len() != r.rho() {
        return Err(Error::DimensionMismatch(format!(
            "{} tracked divisors against {} basis divisors",
            cfg.tracked_divisors.len(),
            r.rho()
        )));
    }
    let mut findings = Vec::new();
    let table = r.flop_tables.get(&cfg.ray);
    if table.is_none() {
        findings.push(Finding::keyed(&cfg.ray, format!("no flop table for {}", cfg.ray)));
    }
    for row in &res.rows {
        let stored = table.and_then(|t| t.iter().find(|x| x.label == row.label));
        let Some(stored) = stored else {
            let elsewhere = r.flop_tables.iter().find_map(|(key, t)| {
                t.iter()
                    .find(|x| x.vec == row.vec && x.anti_k == row.anti_k)
                    .map(|x| (key, x))
            });
            match elsewhere {
                Some((key, x)) => findings.push(Finding::keyed(
                    &x.label,
                    format!(
                        "row {} of table {key} carries the computed values of {} in table {}",
                        x.label, row.label, cfg.ray
                    ),
                )),
                None => findings.push(Finding::keyed(
                    &row.label,
                    format!("computed row {} {} has no table entry", row.label, row.vec),
                )),
            }
            continue;
        };
        for (t, name) in cfg.tracked_divisors.iter().enumerate() {
            if stored.vec[t] != row.vec[t] {
                findings.push(Finding::keyed(
                    &row.label,
                    format!(
                        "({}, {name}+): table {} but computed {}",
                        row.label, stored.vec[t], row.vec[t]
                    ),
                ));
            }
        }
        if stored.anti_k != row.anti_k {
            findings.push(Finding::keyed(
                &row.label,
                format!(
                    "({}, -K+): table {} but computed {}",
                    row.label, stored.anti_k, row.anti_k
                ),
            ));
        }
    }
    Ok(findings)
}
