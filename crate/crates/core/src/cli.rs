//! Command-line front end. Each command returns an exit code: 0 when there
//! are no findings, 1 when there is at least one, 2 when the input is unusable.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::audit::{audit_record, AuditReport, Status};
use crate::chambers::{chamber_graph, emit_dot, nef_cone};
use crate::error::{Error, Result};
use crate::exhaustion::{build_targets, check_exhaustion, extend_candidates};
use crate::flop::{
    coefficient_letters, flopped_rows, parse_flop_config, solve_pullback_coeffs, verify_against_table,
    FlopConfig, FlopResultRow,
};
use crate::linalg::QVec;
use crate::model::{derive_anti_k_combo, load_record_lenient, row_location, AntiKDerivation, FanoRecord};
use crate::rational::Rat;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mra", version, about = "Exact verifier for extremal-ray records")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Audit every record in a directory.
    Verify {
        #[arg(env = "MRA_DATA")]
        dir: PathBuf,
        /// Directory of reference records to diff against, matched by id.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Extra directory of `*.flop.json` configs.
        #[arg(long)]
        flops: Vec<PathBuf>,
        /// Write one report per record and a summary here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the exhaustion criterion on one record.
    CheckExhaustion {
        file: PathBuf,
        #[arg(long = "drop-ray")]
        drop_ray: Vec<String>,
        /// JSON file holding a vector or a list of vectors.
        #[arg(long)]
        propose: Vec<PathBuf>,
    },
    /// Solve a flop configuration and print the flopped rows.
    Flop {
        file: PathBuf,
        /// Compare the rows with this record's table.
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Print the nef cone of a record.
    Nef {
        file: PathBuf,
        /// Write the chamber graph in DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Recover the anticanonical combination from the rows of a record.
    DeriveAntik { file: PathBuf },
}

pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_DATA } else { EXIT_OK };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    run(cli.command, out, err)
}

pub fn run(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let res = match cmd {
        Command::Verify { dir, reference, flops, out: out_dir } => {
            cmd_verify(&dir, reference.as_deref(), &flops, out_dir.as_deref(), out, err)
        }
        Command::CheckExhaustion { file, drop_ray, propose } => {
            cmd_check_exhaustion(&file, &drop_ray, &propose, out)
        }
        Command::Flop { file, record } => cmd_flop(&file, record.as_deref(), out),
        Command::Nef { file, dot } => cmd_nef(&file, dot.as_deref(), out),
        Command::DeriveAntik { file } => cmd_derive_antik(&file, out),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DATA
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Io { .. } => e,
        e => Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()),
        },
    }
}

pub fn load_record_file(path: &Path) -> Result<FanoRecord> {
    load_record_lenient(&read(path)?).map_err(|e| with_path(path, e))
}

pub fn load_flop_file(path: &Path) -> Result<FlopConfig> {
    parse_flop_config(&read(path)?).map_err(|e| with_path(path, e))
}

fn json_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = std::fs::read_dir(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    let mut files = Vec::new();
    for e in rd {
        let e = e.map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
        let p = e.path();
        if p.is_file() && p.extension().is_some_and(|x| x == "json") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

fn is_flop_file(p: &Path) -> bool {
    p.file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.ends_with(".flop.json"))
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(value).expect("reports always serialize");
    writeln!(out, "{s}").map_err(|source| Error::Io { path: "<stdout>".into(), source })
}

#[derive(Debug, Serialize)]
struct SummaryEntry {
    record: String,
    file: String,
    status: Status,
    findings: usize,
}

#[derive(Debug, Serialize)]
struct Summary {
    status: Status,
    records: Vec<SummaryEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
}

/// Audits every record of a directory. Files named `*.flop.json` in the
/// directory or in `flop_dirs` are flop configs, every other `*.json` file is
/// a record.
pub fn verify_dir(dir: &Path, reference: Option<&Path>, flop_dirs: &[PathBuf]) -> Result<Vec<(PathBuf, AuditReport)>> {
    let files = json_files(dir)?;
    let mut configs = Vec::new();
    let mut records = Vec::new();
    for p in &files {
        if is_flop_file(p) {
            configs.push(load_flop_file(p)?);
        } else {
            records.push((p.clone(), load_record_file(p)?));
        }
    }
    for d in flop_dirs {
        for p in json_files(d)? {
            if is_flop_file(&p) {
                configs.push(load_flop_file(&p)?);
            }
        }
    }
    let mut refs = BTreeMap::new();
    if let Some(rd) = reference {
        for p in json_files(rd)? {
            if !is_flop_file(&p) {
                let r = load_record_file(&p)?;
                refs.insert(r.id.clone(), r);
            }
        }
    }
    let cfgs: Vec<&FlopConfig> = configs.iter().collect();
    records
        .into_iter()
        .map(|(p, r)| {
            let rep = audit_record(&r, refs.get(&r.id), &cfgs).map_err(|e| with_path(&p, e))?;
            Ok((p, rep))
        })
        .collect()
}

pub fn cmd_verify(
    dir: &Path,
    reference: Option<&Path>,
    flop_dirs: &[PathBuf],
    out_dir: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let reports = verify_dir(dir, reference, flop_dirs)?;
    let mut warnings = Vec::new();
    if reports.is_empty() {
        warnings.push("no records".to_string());
        let _ = writeln!(err, "warning: no records in {}", dir.display());
    }
    let entries: Vec<SummaryEntry> = reports
        .iter()
        .map(|(p, r)| SummaryEntry {
            record: r.record.clone(),
            file: p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            status: r.status,
            findings: r.finding_count(),
        })
        .collect();
    let failed = reports.iter().any(|(_, r)| r.finding_count() > 0);
    let summary = Summary {
        status: if failed { Status::Fail } else { Status::Pass },
        records: entries,
        warnings,
    };
    if let Some(od) = out_dir {
        std::fs::create_dir_all(od).map_err(|source| Error::Io { path: od.to_path_buf(), source })?;
        for (p, r) in &reports {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let target = od.join(format!("{stem}.report.json"));
            let body = serde_json::to_string_pretty(r).expect("reports always serialize") + "\n";
            std::fs::write(&target, body).map_err(|source| Error::Io { path: target.to_path_buf(), source })?;
        }
        let target = od.join("summary.json");
        let body = serde_json::to_string_pretty(&summary).expect("reports always serialize") + "\n";
        std::fs::write(&target, body).map_err(|source| Error::Io { path: target.to_path_buf(), source })?;
        emit(out, &summary)?;
    } else {
        let full: Vec<&AuditReport> = reports.iter().map(|(_, r)| r).collect();
        #[derive(Serialize)]
        struct Full<'a> {
            summary: &'a Summary,
            reports: Vec<&'a AuditReport>,
        }
        emit(out, &Full { summary: &summary, reports: full })?;
    }
    Ok(if failed { EXIT_FINDINGS } else { EXIT_OK })
}

/// A proposal file holds one vector or a list of vectors.
pub fn read_proposals(path: &Path) -> Result<Vec<QVec>> {
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(QVec),
        Many(Vec<QVec>),
    }
    let bytes = read(path)?;
    let v: OneOrMany = serde_json::from_slice(&bytes).map_err(|e| Error::Schema {
        path: path.display().to_string(),
        message: format!("expected a vector or a list of vectors: {e}"),
    })?;
    Ok(match v {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(xs) => xs,
    })
}

pub fn cmd_check_exhaustion(file: &Path, drop: &[String], propose: &[PathBuf], out: &mut dyn Write) -> Result<i32> {
    let r = load_record_file(file)?;
    let mut dropped = Vec::new();
    for l in drop {
        dropped.push(r.ray_index(l)?);
    }
    let all: Vec<usize> = (0..r.rays.len()).collect();
    let candidates: Vec<usize> = all.iter().copied().filter(|i| !dropped.contains(i)).collect();
    let targets = build_targets(&r, &all)?;
    if propose.is_empty() {
        let rep = check_exhaustion(&r, &candidates, &targets)?;
        emit(out, &rep)?;
        return Ok(if rep.passed() { EXIT_OK } else { EXIT_FINDINGS });
    }
    let mut proposals = Vec::new();
    for p in propose {
        proposals.extend(read_proposals(p)?);
    }
    let ext = extend_candidates(&r, &candidates, &targets, &proposals)?;
    emit(out, &ext)?;
    Ok(if ext.final_report().passed() { EXIT_OK } else { EXIT_FINDINGS })
}

#[derive(Debug, Serialize)]
struct FlopOutput {
    record: String,
    ray: String,
    coefficients: BTreeMap<String, Rat>,
    rows: Vec<FlopResultRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    findings: Option<Vec<crate::audit::Finding>>,
}

pub fn cmd_flop(file: &Path, record: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let cfg = load_flop_file(file)?;
    let coeffs = match solve_pullback_coeffs(&cfg) {
        Ok(c) => c,
        Err(e @ Error::Inconsistent { .. }) => {
            #[derive(Serialize)]
            struct Failed {
                record: String,
                ray: String,
                inconsistent: String,
            }
            emit(out, &Failed { record: cfg.record.to_string(), ray: cfg.ray.clone(), inconsistent: e.to_string() })?;
            return Ok(EXIT_FINDINGS);
        }
        Err(e) => return Err(e),
    };
    let res = flopped_rows(&cfg, &coeffs)?;
    let findings = match record {
        Some(p) => Some(verify_against_table(&load_record_file(p)?, &cfg, &res)?),
        None => None,
    };
    let code = if findings.as_ref().is_some_and(|f| !f.is_empty()) { EXIT_FINDINGS } else { EXIT_OK };
    emit(
        out,
        &FlopOutput {
            record: cfg.record.to_string(),
            ray: cfg.ray.clone(),
            coefficients: coefficient_letters(&coeffs).into_iter().collect(),
            rows: res.rows,
            findings,
        },
    )?;
    Ok(code)
}

#[derive(Debug, Serialize)]
struct NefOutput {
    record: String,
    facets: usize,
    /// Inward normals of the facets, one per extremal ray.
    facet_normals: Vec<QVec>,
    rays: Vec<QVec>,
}

pub fn cmd_nef(file: &Path, dot: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let r = load_record_file(file)?;
    let nef = nef_cone(&r)?;
    let facet_normals: Vec<QVec> = nef.facets()?.iter().map(|x| x.vec().clone()).collect();
    let rays: Vec<QVec> = nef.extreme_rays()?.into_iter().map(|x| x.into_vec()).collect();
    if let Some(p) = dot {
        let g = chamber_graph(&r)?;
        let body = emit_dot(&r.id.to_string(), &g);
        std::fs::write(p, body).map_err(|source| Error::Io { path: p.to_path_buf(), source })?;
    }
    emit(
        out,
        &NefOutput { record: r.id.to_string(), facets: facet_normals.len(), facet_normals, rays },
    )?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct Residual {
    row: String,
    stored: Rat,
    computed: Rat,
}

#[derive(Debug, Default, Serialize)]
struct Tally {
    consistent: usize,
    total: usize,
}

#[derive(Debug, Serialize)]
struct DeriveOutput {
    record: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<QVec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inconsistent_rows: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kernel_dim: Option<usize>,
    matches_record: bool,
    checked_against: QVec,
    rays: Tally,
    table_rows: Tally,
    residuals: Vec<Residual>,
}

/// Solves for λ from all rows, then checks every row against λ, or against
/// the record's own combination when the rows do not determine one.
pub fn cmd_derive_antik(file: &Path, out: &mut dyn Write) -> Result<i32> {
    let r = load_record_file(file)?;
    let rows = r.anti_k_rows();
    let pairs: Vec<(QVec, Rat)> = rows.iter().map(|x| (x.vec.clone(), x.anti_k.clone())).collect();
    let d = derive_anti_k_combo(&pairs, r.rho())?;
    let (lambda, inconsistent_rows, kernel_dim) = match d {
        AntiKDerivation::Unique(l) => (Some(l), None, None),
        AntiKDerivation::Inconsistent(w) => (None, Some(w.iter().map(|&i| rows[i].label.clone()).collect()), None),
        AntiKDerivation::Underdetermined { kernel_dim } => (None, None, Some(kernel_dim)),
    };
    let against = lambda.clone().unwrap_or_else(|| r.anti_k_combo.clone());
    let mut residuals = Vec::new();
    let (mut rays, mut table_rows) = (Tally::default(), Tally::default());
    for row in &rows {
        let computed = against.dot(&row.vec)?;
        let tally = if row.table.is_some() { &mut table_rows } else { &mut rays };
        tally.total += 1;
        if computed == row.anti_k {
            tally.consistent += 1;
        } else {
            residuals.push(Residual { row: row_location(row), stored: row.anti_k.clone(), computed });
        }
    }
    let matches_record = lambda.as_ref() == Some(&r.anti_k_combo);
    let ok = matches_record && residuals.is_empty();
    emit(
        out,
        &DeriveOutput {
            record: r.id.to_string(),
            lambda,
            inconsistent_rows,
            kernel_dim,
            matches_record,
            checked_against: against,
            rays,
            table_rows,
            residuals,
        },
    )?;
    Ok(if ok { EXIT_OK } else { EXIT_FINDINGS })
}
