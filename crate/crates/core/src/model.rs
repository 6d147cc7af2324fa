//! Record format for one deformation type: divisor basis, anticanonical
//! combination, extremal rays with contraction data, and flop row tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cone::{Cone, Pointedness};
use crate::error::{Error, Result};
use crate::linalg::{solve_linear, QMat, QVec};
use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordId {
    pub b2: u32,
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
}

impl fmt::Display for RecordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B2={}/n{}", self.b2, self.n)?;
        if let Some(v) = &self.variant {
            f.write_str(v)?;
        }
        Ok(())
    }
}

macro_rules! label_enum {
    ($(#[$m:meta])* $name:ident / $err:ident { $($var:ident => $s:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name { $($var),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$var),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$var => $s),+ }
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok($name::$var),)+
                    _ => Err(Error::$err(s.to_string())),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(|_| serde::de::Error::unknown_variant(
                    &s, &[$($s),+],
                ))
            }
        }
    };
}

label_enum!(
    /// Mori type of an extremal ray.
    RayType / IllegalRayType {
        E1 => "E1", E2 => "E2", E3 => "E3", E4 => "E4", E5 => "E5",
        C => "C", D => "D", FFiber => "F_fiber", Flopping => "Flopping",
    }
);

label_enum!(
    /// Type of a flop between adjacent chambers.
    FlopType / IllegalFlopType {
        E1 => "E1", E2 => "E2", E3 => "E3", E4 => "E4", E5 => "E5",
        E1Inv => "E1_inv", E2Inv => "E2_inv", E3Inv => "E3_inv",
        E4Inv => "E4_inv", E5Inv => "E5_inv",
        F => "F", G => "G", Others => "Others",
    }
);

impl RayType {
    pub fn is_divisorial(self) -> bool {
        matches!(
            self,
            RayType::E1 | RayType::E2 | RayType::E3 | RayType::E4 | RayType::E5
        )
    }
}

impl FlopType {
    pub fn is_self_inverse(self) -> bool {
        matches!(self, FlopType::F | FlopType::G | FlopType::Others)
    }

    /// The type of the same flop traversed in the opposite direction.
    pub fn inverse(self) -> FlopType {
        use FlopType::*;
        match self {
            E1 => E1Inv,
            E2 => E2Inv,
            E3 => E3Inv,
            E4 => E4Inv,
            E5 => E5Inv,
            E1Inv => E1,
            E2Inv => E2,
            E3Inv => E3,
            E4Inv => E4,
            E5Inv => E5,
            other => other,
        }
    }

    pub fn is_inverse_variant(self) -> bool {
        use FlopType::*;
        matches!(self, E1Inv | E2Inv | E3Inv | E4Inv | E5Inv)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionDescriptor {
    pub target: Option<RecordId>,
    /// ρ rows, ρ−1 columns; column t is the pullback of the t-th target
    /// basis divisor written in this record's basis.
    pub pullback: Vec<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_edges: Option<Vec<QVec>>,
}

impl ContractionDescriptor {
    pub fn pullback_matrix(&self) -> Result<QMat> {
        let rows: Vec<QVec> = self.pullback.iter().cloned().map(QVec::from).collect();
        QMat::from_rows(&rows)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayRecord {
    pub label: String,
    pub vec: QVec,
    #[serde(rename = "antiK")]
    pub anti_k: Rat,
    #[serde(rename = "type")]
    pub ray_type: RayType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contraction: Option<ContractionDescriptor>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlopRow {
    pub label: String,
    pub vec: QVec,
    #[serde(rename = "antiK")]
    pub anti_k: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChamberNodeData {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChamberEdgeData {
    pub from: String,
    pub to: String,
    #[serde(rename = "type")]
    pub flop_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChamberData {
    pub nodes: Vec<ChamberNodeData>,
    pub edges: Vec<ChamberEdgeData>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanoRecord {
    pub id: RecordId,
    pub basis: Vec<String>,
    #[serde(rename = "antiK_combo")]
    pub anti_k_combo: QVec,
    pub rays: Vec<RayRecord>,
    pub flop_tables: BTreeMap<String, Vec<FlopRow>>,
    pub weyl_group: String,
    pub flop_types: Vec<FlopType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chambers: Option<ChamberData>,
}

/// One row of the anticanonical data, wherever it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntiKRow {
    pub label: String,
    /// `None` for a ray of the record, the owning ray label for a table row.
    pub table: Option<String>,
    pub vec: QVec,
    pub anti_k: Rat,
}

impl FanoRecord {
    pub fn rho(&self) -> usize {
        self.basis.len()
    }

    pub fn ray_index(&self, label: &str) -> Result<usize> {
        self.rays
            .iter()
            .position(|r| r.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn ray_cone(&self, indices: &[usize]) -> Result<Cone> {
        let gens: Vec<QVec> = indices.iter().map(|&i| self.rays[i].vec.clone()).collect();
        Cone::new(self.rho(), &gens)
    }

    pub fn full_cone(&self) -> Result<Cone> {
        self.ray_cone(&(0..self.rays.len()).collect::<Vec<_>>())
    }

    /// Ray rows in record order, then table rows by table key and row order.
    pub fn anti_k_rows(&self) -> Vec<AntiKRow> {
        let mut rows: Vec<AntiKRow> = self
            .rays
            .iter()
            .map(|r| AntiKRow {
                label: r.label.clone(),
                table: None,
                vec: r.vec.clone(),
                anti_k: r.anti_k.clone(),
            })
            .collect();
        for (key, table) in &self.flop_tables {
            rows.extend(table.iter().map(|r| AntiKRow {
                label: r.label.clone(),
                table: Some(key.clone()),
                vec: r.vec.clone(),
                anti_k: r.anti_k.clone(),
            }));
        }
        rows
    }

    pub fn table_row_count(&self) -> usize {
        self.flop_tables.values().map(Vec::len).sum()
    }

    pub fn expected_anti_k(&self, vec: &QVec) -> Result<Rat> {
        self.anti_k_combo.dot(vec)
    }

    fn invariant(&self, location: impl Into<String>, message: impl Into<String>) -> Error {
        Error::Invariant {
            record: self.id.to_string(),
            location: location.into(),
            message: message.into(),
        }
    }

    /// Shape checks every computation relies on: dimensions, label
    /// uniqueness, table keys, descriptor shapes.
    pub fn check_structure(&self) -> Result<()> {
        let rho = self.rho();
        if rho == 0 {
            return Err(self.invariant("basis", "empty divisor basis"));
        }
        if self.anti_k_combo.dim() != rho {
            return Err(self.invariant(
                "antiK_combo",
                format!("length {} but the basis has {rho} divisors", self.anti_k_combo.dim()),
            ));
        }
        let mut labels = BTreeSet::new();
        for r in &self.rays {
            if !labels.insert(r.label.as_str()) {
                return Err(self.invariant(&r.label, "duplicate ray label"));
            }
            if r.vec.dim() != rho {
                return Err(self.invariant(
                    &r.label,
                    format!("vector of length {} against {rho} basis divisors", r.vec.dim()),
                ));
            }
            if let Some(c) = &r.contraction {
                if c.pullback.len() != rho || c.pullback.iter().any(|row| row.len() + 1 != rho) {
                    return Err(self.invariant(
                        &r.label,
                        format!("pullback matrix must be {rho}x{}", rho - 1),
                    ));
                }
                for e in c.target_edges.iter().flatten() {
                    if e.dim() + 1 != rho {
                        return Err(self.invariant(
                            &r.label,
                            format!("target edge {e} must have length {}", rho - 1),
                        ));
                    }
                }
            }
        }
        for (key, table) in &self.flop_tables {
            if !labels.contains(key.as_str()) {
                return Err(self.invariant(
                    format!("flop_tables.{key}"),
                    "table key is not a ray label",
                ));
            }
            for row in table {
                if row.vec.dim() != rho {
                    return Err(self.invariant(
                        &row.label,
                        format!("vector of length {} against {rho} basis divisors", row.vec.dim()),
                    ));
                }
            }
        }
        if let Some(ch) = &self.chambers {
            crate::chambers::ChamberGraph::from_data(ch)?;
        }
        Ok(())
    }

    /// Value-level invariants. The first violation is returned as an error.
    pub fn check_invariants(&self) -> Result<()> {
        if self.rays.is_empty() {
            return Err(self.invariant("rays", "empty ray list: the Mori cone must be pointed and nonzero"));
        }
        for row in self.anti_k_rows() {
            let expected = self.expected_anti_k(&row.vec)?;
            if expected != row.anti_k {
                return Err(self.invariant(
                    row_location(&row),
                    format!("-K mismatch: stored {} but antiK_combo . vec = {expected}", row.anti_k),
                ));
            }
        }
        for r in &self.rays {
            if !r.anti_k.is_positive() {
                return Err(self.invariant(&r.label, format!("-K . {} = {} is not positive", r.label, r.anti_k)));
            }
            if r.ray_type.is_divisorial() && r.contraction.is_none() {
                return Err(Error::MissingDescriptor {
                    record: self.id.to_string(),
                    ray: r.label.clone(),
                });
            }
            if let Some(msg) = self.descriptor_violation(r)? {
                return Err(self.invariant(&r.label, msg));
            }
        }
        if let Pointedness::Line(l) = self.full_cone()?.is_pointed() {
            return Err(self.invariant("rays", format!("cone of rays is not pointed: contains the line through {l}")));
        }
        match derive_anti_k_combo(&self.anti_k_rows_as_pairs(), self.rho())? {
            AntiKDerivation::Unique(l) if l != self.anti_k_combo => {
                return Err(self.invariant(
                    "antiK_combo",
                    format!("stored {} but the rows determine {l}", self.anti_k_combo),
                ));
            }
            AntiKDerivation::Inconsistent(w) => {
                return Err(self.invariant("antiK_combo", format!("rows {w:?} are mutually inconsistent")));
            }
            _ => {}
        }
        Ok(())
    }

    pub(crate) fn anti_k_rows_as_pairs(&self) -> Vec<(QVec, Rat)> {
        self.anti_k_rows().into_iter().map(|r| (r.vec, r.anti_k)).collect()
    }

    /// Projection-formula and rank checks for one descriptor, as a message.
    pub fn descriptor_violation(&self, r: &RayRecord) -> Result<Option<String>> {
        let Some(c) = &r.contraction else {
            return Ok(None);
        };
        let p = c.pullback_matrix()?;
        let image = p.transpose().mul_vec(&r.vec)?;
        if !image.is_zero() {
            return Ok(Some(format!(
                "projection formula violated: pullback^T . vec({}) = {image}, expected 0",
                r.label
            )));
        }
        let rank = p.rank();
        if rank + 1 != self.rho() {
            return Ok(Some(format!(
                "pullback has rank {rank}, expected {}",
                self.rho() - 1
            )));
        }
        if let Some(edges) = &c.target_edges {
            if edges.iter().any(QVec::is_zero) {
                return Ok(Some("zero target edge".into()));
            }
            let m = Cone::new(self.rho() - 1, edges)?;
            if m.extreme_rays()?.len() != edges.len() {
                return Ok(Some("target edges are not an extreme set".into()));
            }
        }
        Ok(None)
    }
}

pub(crate) fn row_location(row: &AntiKRow) -> String {
    match &row.table {
        Some(t) => format!("row {} (table {t})", row.label),
        None => format!("row {}", row.label),
    }
}

fn schema_error<E: fmt::Display>(e: serde_path_to_error::Error<E>) -> Error {
    let path = e.path().to_string();
    Error::Schema {
        path,
        message: e.into_inner().to_string(),
    }
}

pub(crate) fn from_json_slice<T: for<'de> Deserialize<'de>>(bytes: &[u8]) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let value = serde_path_to_error::deserialize(de).map_err(schema_error)?;
    Ok(value)
}

/// Schema and structure only; value invariants are left to the audit.
pub fn load_record_lenient(bytes: &[u8]) -> Result<FanoRecord> {
    let r: FanoRecord = from_json_slice(bytes)?;
    r.check_structure()?;
    Ok(r)
}

/// Fully validated load: any violated invariant is an error naming the
/// record, the row and the failed equality.
pub fn parse_record(bytes: &[u8]) -> Result<FanoRecord> {
    let r = load_record_lenient(bytes)?;
    r.check_invariants()?;
    Ok(r)
}

pub fn record_to_json(r: &FanoRecord) -> String {
    serde_json::to_string_pretty(r).expect("records always serialize")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum AntiKDerivation {
    Unique(QVec),
    /// A minimal set of row indices with no common solution.
    Inconsistent(Vec<usize>),
    Underdetermined { kernel_dim: usize },
}

fn solve_rows(rows: &[&(QVec, Rat)], rho: usize) -> Result<Option<crate::linalg::LinearSolution>> {
    let vecs: Vec<QVec> = rows.iter().map(|(v, _)| v.clone()).collect();
    let a = if vecs.is_empty() {
        QMat::zeros(0, rho)
    } else {
        QMat::from_rows(&vecs)?
    };
    let b = QVec::from(rows.iter().map(|(_, k)| k.clone()).collect::<Vec<_>>());
    solve_linear(&a, &b)
}

/// Solves `λ · vec = antiK` over all rows.
pub fn derive_anti_k_combo(rows: &[(QVec, Rat)], rho: usize) -> Result<AntiKDerivation> {
    if let Some(bad) = rows.iter().find(|(v, _)| v.dim() != rho) {
        return Err(Error::DimensionMismatch(format!(
            "row {} against {rho} basis divisors",
            bad.0
        )));
    }
    let all: Vec<&(QVec, Rat)> = rows.iter().collect();
    match solve_rows(&all, rho)? {
        Some(s) if s.kernel_basis.is_empty() => Ok(AntiKDerivation::Unique(s.solution)),
        Some(s) => Ok(AntiKDerivation::Underdetermined {
            kernel_dim: s.kernel_basis.len(),
        }),
        None => {
            // Deletion filter: drop each row whose removal keeps the system
            // inconsistent; what survives is irreducibly inconsistent.
            let mut keep: Vec<usize> = (0..rows.len()).collect();
            let mut k = 0;
            while k < keep.len() {
                let trial: Vec<&(QVec, Rat)> = keep
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, &i)| &rows[i])
                    .collect();
                if solve_rows(&trial, rho)?.is_none() {
                    keep.remove(k);
                } else {
                    k += 1;
                }
            }
            Ok(AntiKDerivation::Inconsistent(keep))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[i64]) -> QVec {
        QVec::from_i64s(v)
    }

    #[test]
    fn record_id_rendering() {
        let id = RecordId { b2: 5, n: 1, variant: None };
        assert_eq!(id.to_string(), "B2=5/n1");
        let id = RecordId { b2: 6, n: 1, variant: Some("A".into()) };
        assert_eq!(id.to_string(), "B2=6/n1A");
    }

    #[test]
    fn label_parsing() {
        assert_eq!("F_fiber".parse::<RayType>().unwrap(), RayType::FFiber);
        assert_eq!("E3_inv".parse::<FlopType>().unwrap(), FlopType::E3Inv);
        assert_eq!(FlopType::E3Inv.inverse(), FlopType::E3);
        assert_eq!(FlopType::F.inverse(), FlopType::F);
        assert!("F_inv".parse::<FlopType>().is_err());
    }

    #[test]
    fn contradictory_rows() {
        let rows = vec![(q(&[1, 2]), Rat::from(1)), (q(&[1, 2]), Rat::from(2))];
        assert_eq!(
            derive_anti_k_combo(&rows, 2).unwrap(),
            AntiKDerivation::Inconsistent(vec![0, 1])
        );
    }

    #[test]
    fn minimal_witness_skips_innocent_rows() {
        let rows = vec![
            (q(&[1, 0]), Rat::from(1)),
            (q(&[0, 1]), Rat::from(1)),
            (q(&[1, 1]), Rat::from(5)),
            (q(&[2, 0]), Rat::from(2)),
        ];
        assert_eq!(
            derive_anti_k_combo(&rows, 2).unwrap(),
            AntiKDerivation::Inconsistent(vec![1, 2, 3])
        );
    }

    #[test]
    fn underdetermined_rows() {
        let rows = vec![(q(&[1, 1, 0]), Rat::from(1))];
        assert_eq!(
            derive_anti_k_combo(&rows, 3).unwrap(),
            AntiKDerivation::Underdetermined { kernel_dim: 2 }
        );
    }

    const MINI: &str = r#"{
        "id": {"b2": 2, "n": 99},
        "basis": ["E", "H"],
        "antiK_combo": [-1, 4],
        "rays": [
            {"label": "l1", "vec": [-1, 0], "antiK": 1, "type": "E1",
             "contraction": {"target": null, "pullback": [[0], [1]]}},
            {"label": "l2", "vec": [3, 1], "antiK": 1, "type": "C"}
        ],
        "flop_tables": {},
        "weyl_group": "A1",
        "flop_types": []
    }"#;

    #[test]
    fn parse_and_round_trip() {
        let r = parse_record(MINI.as_bytes()).unwrap();
        assert_eq!(r.rho(), 2);
        let again = parse_record(record_to_json(&r).as_bytes()).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn schema_errors_carry_paths() {
        let bad = MINI.replace("\"antiK\": 1, \"type\": \"C\"", "\"antiK\": 1.5, \"type\": \"C\"");
        match parse_record(bad.as_bytes()) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "rays[1].antiK"),
            other => panic!("{other:?}"),
        }
        let unknown = MINI.replace("\"weyl_group\"", "\"colour\": 1, \"weyl_group\"");
        assert!(matches!(parse_record(unknown.as_bytes()), Err(Error::Schema { .. })));
    }

    #[test]
    fn invariant_errors_name_the_row() {
        let bad = MINI.replace("\"antiK\": 1, \"type\": \"C\"", "\"antiK\": 2, \"type\": \"C\"");
        let err = parse_record(bad.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("B2=2/n99"), "{err}");
        assert!(err.contains("row l2"), "{err}");
        assert!(err.contains("-K mismatch"), "{err}");
        assert!(load_record_lenient(bad.as_bytes()).is_ok());
    }

    #[test]
    fn empty_rays_rejected() {
        let v: serde_json::Value = serde_json::from_str(MINI).unwrap();
        let mut v = v;
        v["rays"] = serde_json::json!([]);
        let err = parse_record(v.to_string().as_bytes()).unwrap_err();
        assert!(err.to_string().contains("empty ray list"));
    }

    #[test]
    fn projection_formula_violation() {
        let bad = MINI.replace("[[0], [1]]", "[[1], [1]]");
        let err = parse_record(bad.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("projection formula"), "{err}");
    }
}
