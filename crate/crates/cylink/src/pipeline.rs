//! Batch orchestration and persistence: resumable dataset builds over weight
//! lists, ingestion of external tables, the Hodge-bound conjecture check,
//! surrogate prediction tables, and plot emission.
//!
//! A batch writes three artifacts into its output directory: `manifest.json`
//! (the settings and input list, written once), `journal.jsonl` (one JSON
//! line per finished task, append-only), and `records.csv` (regenerated from
//! the journal in input order). Killing a batch and rerunning recomputes only
//! the tasks missing from the journal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write as _};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::NVARS;
use crate::groebner::{Budget, GroebnerError};
use crate::invariants::{compute_link_invariants, InvariantsError, LinkInvariants};
use crate::learn::{weight_features, LearnError, MLPModel};
use crate::links::{sample_smooth_with_protocol, LinksError, SampleProtocol, WeightSystem};
use crate::symreg::closed_form_h21;

/// Weight systems excluded from batches unless opted in; each needs far more
/// than a desk-scale budget.
pub const HARD_SYSTEMS: [[u32; NVARS]; 6] = [
    [1, 1, 8, 19, 28],
    [1, 1, 9, 21, 32],
    [1, 1, 11, 26, 39],
    [1, 1, 12, 28, 42],
    [1, 6, 34, 81, 122],
    [1, 6, 40, 93, 140],
];

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    BadRow {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("duplicate weight tuple {key:?} at rows {first} and {second}")]
    DuplicateKey {
        key: [u32; NVARS],
        first: usize,
        second: usize,
    },
    #[error("output directory holds a batch with a different {field}")]
    ManifestMismatch { field: &'static str },
    #[error("no usable records")]
    NoRecords,
    #[error("thread pool: {0}")]
    Pool(String),
    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("malformed CSV in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Learn(#[from] LearnError),
}

fn io_err(path: &Path, source: std::io::Error) -> PipelineError {
    PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Debug)]
#[serde(rename_all = "lowercase")]
pub enum RecordStatus {
    Ok,
    Timeout,
    Error,
}

/// One row of the dataset. Field order is the CSV column order; invariant
/// columns are empty unless the status is ok.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct DatasetRecord {
    pub w1: u32,
    pub w2: u32,
    pub w3: u32,
    pub w4: u32,
    pub w5: u32,
    pub d: u64,
    pub gb_length: Option<u64>,
    pub mu: Option<u64>,
    pub mu_plus: Option<u64>,
    pub mu_zero: Option<u64>,
    pub mu_minus: Option<u64>,
    pub h30: Option<u64>,
    pub h21: Option<u64>,
    pub b3: Option<u64>,
    pub nu: Option<u8>,
    pub status: RecordStatus,
    pub elapsed_gb_ms: u64,
    pub elapsed_inv_ms: u64,
}

impl DatasetRecord {
    pub fn weights(&self) -> [u32; NVARS] {
        [self.w1, self.w2, self.w3, self.w4, self.w5]
    }

    /// Canonical join key: the weights sorted ascending.
    pub fn key(&self) -> [u32; NVARS] {
        let mut k = self.weights();
        k.sort_unstable();
        k
    }

    fn from_invariants(inv: &LinkInvariants) -> Self {
        let [w1, w2, w3, w4, w5] = inv.ws.weights();
        DatasetRecord {
            w1,
            w2,
            w3,
            w4,
            w5,
            d: inv.ws.degree(),
            gb_length: Some(inv.gb_length as u64),
            mu: Some(inv.signature.mu),
            mu_plus: Some(inv.signature.mu_plus),
            mu_zero: Some(inv.signature.mu_zero),
            mu_minus: Some(inv.signature.mu_minus),
            h30: Some(inv.hodge.h30),
            h21: Some(inv.hodge.h21),
            b3: Some(inv.hodge.b3),
            nu: Some(inv.cn.nu),
            status: RecordStatus::Ok,
            elapsed_gb_ms: inv.elapsed.gb_ms,
            elapsed_inv_ms: inv.elapsed.invariant_ms,
        }
    }

    fn unfinished(w: [u32; NVARS], status: RecordStatus, elapsed_ms: u64) -> Self {
        let [w1, w2, w3, w4, w5] = w;
        DatasetRecord {
            w1,
            w2,
            w3,
            w4,
            w5,
            d: w.iter().map(|&x| u64::from(x)).sum(),
            gb_length: None,
            mu: None,
            mu_plus: None,
            mu_zero: None,
            mu_minus: None,
            h30: None,
            h21: None,
            b3: None,
            nu: None,
            status,
            elapsed_gb_ms: elapsed_ms,
            elapsed_inv_ms: 0,
        }
    }
}

/// One journal line: the record plus where and why it stopped, if it did.
#[derive(Clone, Serialize, Deserialize, Debug)]
pub struct JournalEntry {
    pub weights: [u32; NVARS],
    pub task_seed: u64,
    pub stage: Option<String>,
    pub message: Option<String>,
    pub record: DatasetRecord,
}

#[derive(Clone, Serialize, Deserialize, Debug)]
pub struct BatchManifest {
    pub seed: u64,
    pub budget: Budget,
    pub include_hard: bool,
    pub input: Vec<[u32; NVARS]>,
    pub excluded_hard: Vec<[u32; NVARS]>,
}

#[derive(Clone, Debug)]
pub struct BatchConfig {
    pub seed: u64,
    /// Zero lets the thread pool pick.
    pub workers: usize,
    pub budget: Budget,
    pub include_hard: bool,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            seed: 0,
            workers: 0,
            budget: Budget::default(),
            include_hard: false,
        }
    }
}

#[derive(Clone, Copy, Serialize, Debug)]
pub struct BatchSummary {
    pub total: usize,
    pub ok: usize,
    pub timeout: usize,
    pub error: usize,
    pub skipped_hard: usize,
    /// Tasks taken from the journal instead of being recomputed.
    pub reused: usize,
}

impl BatchSummary {
    /// 0 when every record is ok, 2 when timeouts or errors are present.
    /// Fatal conditions surface as `Err` before a summary exists.
    pub fn exit_code(&self) -> i32 {
        if self.timeout + self.error > 0 {
            2
        } else {
            0
        }
    }
}

/// The seed for one task, stable under resumption: drawn from a dedicated
/// stream of the batch generator indexed by the task's input position.
pub fn task_seed(batch_seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(batch_seed);
    rng.set_stream(index as u64 + 1);
    rng.next_u64()
}

fn is_hard(w: &[u32; NVARS]) -> bool {
    let mut sorted = *w;
    sorted.sort_unstable();
    HARD_SYSTEMS.contains(&sorted)
}

fn compute_task(w: [u32; NVARS], seed: u64, budget: &Budget) -> JournalEntry {
    let started = Instant::now();
    let failed = |status, stage: &str, message: String, started: &Instant| JournalEntry {
        weights: w,
        task_seed: seed,
        stage: Some(stage.to_string()),
        message: Some(message),
        record: DatasetRecord::unfinished(w, status, started.elapsed().as_millis() as u64),
    };

    let ws = match WeightSystem::new(w) {
        Ok(ws) => ws,
        Err(e) => return failed(RecordStatus::Error, "validate", e.to_string(), &started),
    };
    let protocol = SampleProtocol {
        budget: *budget,
        ..SampleProtocol::default()
    };
    let cand = match sample_smooth_with_protocol(&ws, seed, &protocol) {
        Ok(c) => c,
        Err(e) => {
            let status = match &e {
                LinksError::Groebner(GroebnerError::BudgetExceeded { .. }) => RecordStatus::Timeout,
                _ => RecordStatus::Error,
            };
            return failed(status, "screening", e.to_string(), &started);
        }
    };
    match compute_link_invariants(&cand, budget) {
        Ok(inv) => JournalEntry {
            weights: w,
            task_seed: seed,
            stage: None,
            message: None,
            record: DatasetRecord::from_invariants(&inv),
        },
        Err(e) => {
            let status = match &e {
                InvariantsError::Groebner(GroebnerError::BudgetExceeded { .. }) => {
                    RecordStatus::Timeout
                }
                _ => RecordStatus::Error,
            };
            failed(status, "groebner", e.to_string(), &started)
        }
    }
}

fn read_journal(path: &Path) -> Result<BTreeMap<[u32; NVARS], JournalEntry>, PipelineError> {
    let mut map = BTreeMap::new();
    if !path.exists() {
        return Ok(map);
    }
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        // A line truncated by a crash mid-write fails to parse; the task it
        // belonged to is simply recomputed.
        if let Ok(entry) = serde_json::from_str::<JournalEntry>(&line) {
            map.insert(entry.weights, entry);
        }
    }
    Ok(map)
}

/// Compute invariants for every listed weight system, persisting
/// incrementally. Reruns skip everything already journaled; the final CSV is
/// written in input order, so its bytes do not depend on worker scheduling.
pub fn run_batch(
    weights: &[[u32; NVARS]],
    out_dir: &Path,
    cfg: &BatchConfig,
) -> Result<BatchSummary, PipelineError> {
    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;

    let mut seen = BTreeSet::new();
    let mut input = Vec::new();
    let mut excluded = Vec::new();
    for w in weights {
        if !seen.insert(*w) {
            continue;
        }
        if !cfg.include_hard && is_hard(w) {
            excluded.push(*w);
        } else {
            input.push(*w);
        }
    }

    let manifest = BatchManifest {
        seed: cfg.seed,
        budget: cfg.budget,
        include_hard: cfg.include_hard,
        input: input.clone(),
        excluded_hard: excluded.clone(),
    };
    let manifest_path = out_dir.join("manifest.json");
    if manifest_path.exists() {
        let file = fs::File::open(&manifest_path).map_err(|e| io_err(&manifest_path, e))?;
        let existing: serde_json::Value =
            serde_json::from_reader(BufReader::new(file)).map_err(|e| PipelineError::Json {
                path: manifest_path.clone(),
                source: e,
            })?;
        let current = serde_json::to_value(&manifest).expect("manifest serializes");
        for field in ["seed", "budget", "include_hard", "input"] {
            if existing.get(field) != current.get(field) {
                return Err(PipelineError::ManifestMismatch { field: match field {
                    "seed" => "seed",
                    "budget" => "budget",
                    "include_hard" => "include_hard",
                    _ => "input",
                }});
            }
        }
    } else {
        let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&manifest_path, body).map_err(|e| io_err(&manifest_path, e))?;
    }

    let journal_path = out_dir.join("journal.jsonl");
    let mut done = read_journal(&journal_path)?;
    let pending: Vec<(usize, [u32; NVARS])> = input
        .iter()
        .enumerate()
        .filter(|(_, w)| !done.contains_key(*w))
        .map(|(i, w)| (i, *w))
        .collect();
    let reused = input.len() - pending.len();

    if !pending.is_empty() {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| PipelineError::Pool(e.to_string()))?;
        let (tx, rx) = mpsc::channel::<JournalEntry>();
        let budget = cfg.budget;
        let batch_seed = cfg.seed;
        pool.spawn(move || {
            pending.into_par_iter().for_each_with(tx, |tx, (i, w)| {
                let entry = compute_task(w, task_seed(batch_seed, i), &budget);
                let _ = tx.send(entry);
            });
        });

        let mut journal = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&journal_path)
            .map_err(|e| io_err(&journal_path, e))?;
        for entry in rx {
            let mut line =
                serde_json::to_string(&entry).expect("journal entry serializes");
            line.push('\n');
            journal
                .write_all(line.as_bytes())
                .and_then(|_| journal.flush())
                .map_err(|e| io_err(&journal_path, e))?;
            done.insert(entry.weights, entry);
        }
    }

    let records: Vec<DatasetRecord> = input
        .iter()
        .map(|w| done.get(w).expect("all tasks journaled").record.clone())
        .collect();
    write_records(&out_dir.join("records.csv"), &records)?;

    let count = |s: RecordStatus| records.iter().filter(|r| r.status == s).count();
    Ok(BatchSummary {
        total: input.len(),
        ok: count(RecordStatus::Ok),
        timeout: count(RecordStatus::Timeout),
        error: count(RecordStatus::Error),
        skipped_hard: excluded.len(),
        reused,
    })
}

/// A parsed input row: five weights and the optional known CY Hodge number.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct WeightRow {
    pub weights: [u32; NVARS],
    pub h21_cy: Option<u64>,
    pub line: usize,
}

/// Read a weight list: CSV columns `w1..w5` with an optional sixth `h21_cy`
/// column. A single header line is allowed and detected by non-numeric text.
pub fn load_weight_systems(path: &Path) -> Result<Vec<WeightRow>, PipelineError> {
    let bad = |line: usize, message: String| PipelineError::BadRow {
        path: path.to_path_buf(),
        line,
        message,
    };
    let body = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rows = Vec::new();
    let mut saw_data = false;
    for (idx, raw) in body.lines().enumerate() {
        let line = idx + 1;
        let text = raw.trim();
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        if !saw_data && fields[0].parse::<u32>().is_err() {
            saw_data = true;
            continue;
        }
        saw_data = true;
        if fields.len() != NVARS && fields.len() != NVARS + 1 {
            return Err(bad(line, format!("expected 5 or 6 fields, got {}", fields.len())));
        }
        let mut weights = [0u32; NVARS];
        for (slot, field) in weights.iter_mut().zip(&fields) {
            *slot = field
                .parse()
                .map_err(|_| bad(line, format!("bad weight {field:?}")))?;
        }
        let h21_cy = match fields.get(NVARS) {
            Some(f) if !f.is_empty() => Some(
                f.parse()
                    .map_err(|_| bad(line, format!("bad h21_cy {f:?}")))?,
            ),
            _ => None,
        };
        rows.push(WeightRow {
            weights,
            h21_cy,
            line,
        });
    }
    Ok(rows)
}

pub fn write_records(path: &Path, records: &[DatasetRecord]) -> Result<(), PipelineError> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    for r in records {
        writer.serialize(r).map_err(|e| PipelineError::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
    }
    writer.flush().map_err(|e| io_err(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<DatasetRecord>, PipelineError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let mut records = Vec::new();
    for row in reader.deserialize() {
        records.push(row.map_err(|e| PipelineError::Csv {
            path: path.to_path_buf(),
            source: e,
        })?);
    }
    Ok(records)
}

/// A table of externally known CY 3-fold Hodge numbers, keyed by sorted
/// weight tuple.
#[derive(Clone, Debug, Default)]
pub struct CyHodgeTable {
    pub map: BTreeMap<[u32; NVARS], u64>,
    pub warning: Option<String>,
}

/// A previously published invariant table in the record CSV schema, keyed by
/// sorted weight tuple.
#[derive(Clone, Debug, Default)]
pub struct PublishedTable {
    pub map: BTreeMap<[u32; NVARS], DatasetRecord>,
    pub warning: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExternalKind {
    CyHodge,
    PublishedInvariants,
}

#[derive(Clone, Debug)]
pub enum ExternalTable {
    CyHodge(CyHodgeTable),
    Published(PublishedTable),
}

pub fn ingest_cy_hodge(path: &Path) -> Result<CyHodgeTable, PipelineError> {
    let rows = load_weight_systems(path)?;
    let mut map = BTreeMap::new();
    let mut first_line: BTreeMap<[u32; NVARS], usize> = BTreeMap::new();
    for row in &rows {
        let value = row.h21_cy.ok_or_else(|| PipelineError::BadRow {
            path: path.to_path_buf(),
            line: row.line,
            message: "missing h21_cy column".into(),
        })?;
        let mut key = row.weights;
        key.sort_unstable();
        if let Some(&first) = first_line.get(&key) {
            return Err(PipelineError::DuplicateKey {
                key,
                first,
                second: row.line,
            });
        }
        first_line.insert(key, row.line);
        map.insert(key, value);
    }
    let warning = map.is_empty().then(|| "no data rows".to_string());
    Ok(CyHodgeTable { map, warning })
}

pub fn ingest_published(path: &Path) -> Result<PublishedTable, PipelineError> {
    let records = read_records(path)?;
    let mut map = BTreeMap::new();
    let mut first_line: BTreeMap<[u32; NVARS], usize> = BTreeMap::new();
    for (idx, record) in records.into_iter().enumerate() {
        let line = idx + 2;
        let key = record.key();
        if let Some(&first) = first_line.get(&key) {
            return Err(PipelineError::DuplicateKey {
                key,
                first,
                second: line,
            });
        }
        first_line.insert(key, line);
        map.insert(key, record);
    }
    let warning = map.is_empty().then(|| "no data rows".to_string());
    Ok(PublishedTable { map, warning })
}

pub fn ingest_external(path: &Path, kind: ExternalKind) -> Result<ExternalTable, PipelineError> {
    match kind {
        ExternalKind::CyHodge => Ok(ExternalTable::CyHodge(ingest_cy_hodge(path)?)),
        ExternalKind::PublishedInvariants => {
            Ok(ExternalTable::Published(ingest_published(path)?))
        }
    }
}

/// Outcome of checking h21(link) <= h21(CY) over a join of computed records
/// with an ingested CY Hodge table.
#[derive(Clone, Serialize, Debug)]
pub struct ConjectureReport {
    pub checked: usize,
    pub equalities: usize,
    pub violations: Vec<[u32; NVARS]>,
    /// Records with no CY entry under their sorted key.
    pub missing: usize,
    pub pmcc: Option<f64>,
    pub holds: bool,
}

pub fn conjecture_check(records: &[DatasetRecord], cy: &CyHodgeTable) -> ConjectureReport {
    let mut checked = 0;
    let mut equalities = 0;
    let mut violations = Vec::new();
    let mut missing = 0;
    let mut link_values = Vec::new();
    let mut cy_values = Vec::new();
    for record in records {
        let Some(h21) = record.h21 else { continue };
        match cy.map.get(&record.key()) {
            Some(&bound) => {
                checked += 1;
                if h21 == bound {
                    equalities += 1;
                }
                if h21 > bound {
                    violations.push(record.weights());
                }
                link_values.push(h21 as f64);
                cy_values.push(bound as f64);
            }
            None => missing += 1,
        }
    }
    let pmcc = crate::learn::pmcc(&link_values, &cy_values).ok();
    ConjectureReport {
        checked,
        equalities,
        holds: violations.is_empty(),
        violations,
        missing,
        pmcc,
    }
}

/// Surrogate predictions for one weight system, with bound flags when a CY
/// table is supplied.
#[derive(Clone, Serialize, Debug)]
pub struct PredictionRow {
    pub weights: [u32; NVARS],
    pub gb_length_nn: f64,
    pub h21_nn: f64,
    pub h21_formula: f64,
    pub h21_formula_rounded: i64,
    pub cy_h21: Option<u64>,
    pub nn_within_bound: Option<bool>,
    pub formula_within_bound: Option<bool>,
}

pub fn predict_remaining(
    gb_model: &MLPModel,
    h21_model: &MLPModel,
    weights: &[[u32; NVARS]],
    cy: Option<&CyHodgeTable>,
) -> Result<Vec<PredictionRow>, PipelineError> {
    let mut rows = Vec::with_capacity(weights.len());
    for w in weights {
        let features = weight_features(w);
        let gb_length_nn = gb_model.forward(&features)?;
        let h21_nn = h21_model.forward(&features)?;
        let h21_formula = closed_form_h21(w).map_err(|e| PipelineError::BadRow {
            path: PathBuf::from("<weights>"),
            line: 0,
            message: e.to_string(),
        })?;
        let h21_formula_rounded = h21_formula.round() as i64;
        let mut key = *w;
        key.sort_unstable();
        let cy_h21 = cy.and_then(|t| t.map.get(&key).copied());
        rows.push(PredictionRow {
            weights: *w,
            gb_length_nn,
            h21_nn,
            h21_formula,
            h21_formula_rounded,
            cy_h21,
            nn_within_bound: cy_h21.map(|b| h21_nn.round() as i64 <= b as i64),
            formula_within_bound: cy_h21.map(|b| h21_formula_rounded <= b as i64),
        });
    }
    Ok(rows)
}

fn integer_histogram(values: &[u64], max_bins: usize) -> Vec<(u64, u64, u64)> {
    let min = *values.iter().min().expect("nonempty");
    let max = *values.iter().max().expect("nonempty");
    let span = max - min + 1;
    let width = span.div_ceil(max_bins as u64).max(1);
    let nbins = span.div_ceil(width) as usize;
    let mut counts = vec![0u64; nbins];
    for &v in values {
        counts[((v - min) / width) as usize] += 1;
    }
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let lo = min + i as u64 * width;
            (lo, lo + width - 1, c)
        })
        .collect()
}

fn svg_header(width: u32, height: u32, title: &str) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\">\n\
         <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{title}</text>",
        width / 2
    );
    s
}

fn svg_bar_chart(title: &str, xlabel: &str, labels: &[String], counts: &[u64]) -> String {
    let (width, height) = (800u32, 480u32);
    let (left, right, top, bottom) = (70.0, 20.0, 40.0, 60.0);
    let plot_w = width as f64 - left - right;
    let plot_h = height as f64 - top - bottom;
    let max = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let mut s = svg_header(width, height, title);
    let _ = writeln!(
        s,
        "<line x1=\"{left}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        top + plot_h,
        left + plot_w,
        top + plot_h
    );
    let _ = writeln!(
        s,
        "<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{}\" stroke=\"black\"/>",
        top + plot_h
    );
    for tick in 0..=4 {
        let value = max * tick as f64 / 4.0;
        let y = top + plot_h - plot_h * tick as f64 / 4.0;
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"11\">{:.0}</text>",
            left - 6.0,
            y + 4.0,
            value
        );
    }
    let step = plot_w / counts.len() as f64;
    let label_stride = counts.len().div_ceil(16).max(1);
    for (i, (&count, label)) in counts.iter().zip(labels).enumerate() {
        let bar_h = plot_h * count as f64 / max;
        let x = left + i as f64 * step;
        let _ = writeln!(
            s,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#4878a8\"/>",
            x + step * 0.1,
            top + plot_h - bar_h,
            step * 0.8,
            bar_h
        );
        if i % label_stride == 0 {
            let _ = writeln!(
                s,
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"11\">{label}</text>",
                x + step / 2.0,
                top + plot_h + 16.0
            );
        }
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\">{xlabel}</text>",
        left + plot_w / 2.0,
        height as f64 - 14.0
    );
    s.push_str("</svg>\n");
    s
}

fn svg_scatter(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    points: &[(f64, f64)],
    identity_line: bool,
) -> String {
    let (width, height) = (640u32, 640u32);
    let (left, right, top, bottom) = (70.0, 20.0, 40.0, 60.0);
    let plot_w = width as f64 - left - right;
    let plot_h = height as f64 - top - bottom;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &(x, y) in points {
        lo = lo.min(x).min(y);
        hi = hi.max(x).max(y);
    }
    if !lo.is_finite() || lo == hi {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = (hi - lo) * 0.05;
    let (lo, hi) = (lo - pad, hi + pad);
    let map_x = |v: f64| left + plot_w * (v - lo) / (hi - lo);
    let map_y = |v: f64| top + plot_h * (1.0 - (v - lo) / (hi - lo));
    let mut s = svg_header(width, height, title);
    let _ = writeln!(
        s,
        "<rect x=\"{left}\" y=\"{top}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"black\"/>"
    );
    if identity_line {
        let _ = writeln!(
            s,
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" \
             stroke=\"#888\" stroke-dasharray=\"4,3\"/>",
            map_x(lo),
            map_y(lo),
            map_x(hi),
            map_y(hi)
        );
    }
    for &(x, y) in points {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"#b04838\" fill-opacity=\"0.6\"/>",
            map_x(x),
            map_y(y)
        );
    }
    for (value, label) in [(lo, format!("{lo:.0}")), (hi, format!("{hi:.0}"))] {
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"11\">{label}</text>",
            map_x(value),
            top + plot_h + 16.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"11\">{label}</text>",
            left - 6.0,
            map_y(value) + 4.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\">{xlabel}</text>",
        left + plot_w / 2.0,
        height as f64 - 14.0
    );
    let _ = writeln!(
        s,
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\" \
         transform=\"rotate(-90 16 {:.1})\">{ylabel}</text>",
        top + plot_h / 2.0,
        top + plot_h / 2.0
    );
    s.push_str("</svg>\n");
    s
}

fn write_text(path: &Path, body: &str) -> Result<(), PipelineError> {
    fs::write(path, body).map_err(|e| io_err(path, e))
}

/// Emit histogram and scatter data as CSV plus rendered SVG. The nu histogram
/// always carries one bin per odd value 1 through 47.
pub fn emit_plots(
    records: &[DatasetRecord],
    cy: Option<&CyHodgeTable>,
    predicted_true: Option<&[(f64, f64)]>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, PipelineError> {
    let ok_rows: Vec<&DatasetRecord> = records
        .iter()
        .filter(|r| r.status == RecordStatus::Ok)
        .collect();
    if ok_rows.is_empty() {
        return Err(PipelineError::NoRecords);
    }
    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let mut written = Vec::new();
    let emit = |name: &str, body: String, written: &mut Vec<PathBuf>| {
        let path = out_dir.join(name);
        write_text(&path, &body)?;
        written.push(path);
        Ok::<(), PipelineError>(())
    };

    for (stem, xlabel, values) in [
        (
            "gb_length_hist",
            "Groebner basis length",
            ok_rows.iter().filter_map(|r| r.gb_length).collect::<Vec<_>>(),
        ),
        (
            "h21_hist",
            "h21",
            ok_rows.iter().filter_map(|r| r.h21).collect::<Vec<_>>(),
        ),
    ] {
        let bins = integer_histogram(&values, 40);
        let mut csv_body = String::from("bin_start,bin_end,count\n");
        for (lo, hi, count) in &bins {
            let _ = writeln!(csv_body, "{lo},{hi},{count}");
        }
        emit(&format!("{stem}.csv"), csv_body, &mut written)?;
        let labels: Vec<String> = bins.iter().map(|(lo, _, _)| lo.to_string()).collect();
        let counts: Vec<u64> = bins.iter().map(|&(_, _, c)| c).collect();
        emit(
            &format!("{stem}.svg"),
            svg_bar_chart(xlabel, xlabel, &labels, &counts),
            &mut written,
        )?;
    }

    let mut nu_bins: BTreeMap<u8, u64> = (1..=47).step_by(2).map(|v| (v, 0)).collect();
    for r in &ok_rows {
        if let Some(nu) = r.nu {
            *nu_bins.entry(nu).or_insert(0) += 1;
        }
    }
    let mut csv_body = String::from("nu,count\n");
    for (nu, count) in &nu_bins {
        let _ = writeln!(csv_body, "{nu},{count}");
    }
    emit("nu_hist.csv", csv_body, &mut written)?;
    let labels: Vec<String> = nu_bins.keys().map(|v| v.to_string()).collect();
    let counts: Vec<u64> = nu_bins.values().copied().collect();
    emit(
        "nu_hist.svg",
        svg_bar_chart("nu", "nu", &labels, &counts),
        &mut written,
    )?;

    if let Some(cy) = cy {
        let mut csv_body = String::from("w1,w2,w3,w4,w5,h21_link,h21_cy\n");
        let mut points = Vec::new();
        for r in &ok_rows {
            if let (Some(h21), Some(&bound)) = (r.h21, cy.map.get(&r.key())) {
                let [w1, w2, w3, w4, w5] = r.weights();
                let _ = writeln!(csv_body, "{w1},{w2},{w3},{w4},{w5},{h21},{bound}");
                points.push((bound as f64, h21 as f64));
            }
        }
        if !points.is_empty() {
            emit("hs_vs_hcy.csv", csv_body, &mut written)?;
            emit(
                "hs_vs_hcy.svg",
                svg_scatter("h21: link vs CY", "CY h21", "link h21", &points, true),
                &mut written,
            )?;
        }
    }

    if let Some(pairs) = predicted_true {
        let mut csv_body = String::from("predicted,actual\n");
        for (p, t) in pairs {
            let _ = writeln!(csv_body, "{p},{t}");
        }
        emit("predicted_vs_true.csv", csv_body, &mut written)?;
        emit(
            "predicted_vs_true.svg",
            svg_scatter(
                "predicted vs actual",
                "actual",
                "predicted",
                pairs,
                true,
            ),
            &mut written,
        )?;
    }

    Ok(written)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TargetColumn {
    H21,
    GbLength,
    Nu,
}

impl TargetColumn {
    fn extract(&self, r: &DatasetRecord) -> Option<f64> {
        match self {
            TargetColumn::H21 => r.h21.map(|v| v as f64),
            TargetColumn::GbLength => r.gb_length.map(|v| v as f64),
            TargetColumn::Nu => r.nu.map(f64::from),
        }
    }
}

/// Sorted-weight features and a chosen target, from the ok rows only.
pub fn training_pairs(records: &[DatasetRecord], target: TargetColumn) -> Vec<(Vec<f64>, f64)> {
    records
        .iter()
        .filter(|r| r.status == RecordStatus::Ok)
        .filter_map(|r| {
            target
                .extract(r)
                .map(|y| (weight_features(&r.weights()), y))
        })
        .collect()
}

/// The same extraction shaped for expression-tree search.
pub fn training_arrays(
    records: &[DatasetRecord],
    target: TargetColumn,
) -> Vec<([f64; NVARS], f64)> {
    training_pairs(records, target)
        .into_iter()
        .map(|(x, y)| {
            let mut arr = [0.0; NVARS];
            arr.copy_from_slice(&x);
            (arr, y)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::DEFAULT_WIDTHS;
    use tempfile::tempdir;

    fn quick_budget() -> Budget {
        Budget::default()
    }

    fn batch_cfg(seed: u64) -> BatchConfig {
        BatchConfig {
            seed,
            workers: 1,
            budget: quick_budget(),
            include_hard: false,
        }
    }

    #[test]
    fn weight_list_parsing_handles_headers_and_extras() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("weights.csv");
        fs::write(
            &path,
            "w1,w2,w3,w4,w5,h21_cy\n1,1,1,1,1,101\n22,29,49,50,75\n\n2, 2, 2, 3, 3, 7\n",
        )
        .unwrap();
        let rows = load_weight_systems(&path).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].weights, [1, 1, 1, 1, 1]);
        assert_eq!(rows[0].h21_cy, Some(101));
        assert_eq!(rows[1].weights, [22, 29, 49, 50, 75]);
        assert_eq!(rows[1].h21_cy, None);
        assert_eq!(rows[2].weights, [2, 2, 2, 3, 3]);

        fs::write(&path, "1,1,1,1,1\n1,2,three,4,5\n").unwrap();
        match load_weight_systems(&path) {
            Err(PipelineError::BadRow { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected BadRow, got {other:?}"),
        }
    }

    #[test]
    fn batch_on_the_quintic_produces_the_reference_row() {
        let dir = tempdir().unwrap();
        let summary = run_batch(&[[1, 1, 1, 1, 1]], dir.path(), &batch_cfg(0)).unwrap();
        assert_eq!((summary.total, summary.ok, summary.reused), (1, 1, 0));
        assert_eq!(summary.exit_code(), 0);

        let records = read_records(&dir.path().join("records.csv")).unwrap();
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(r.weights(), [1, 1, 1, 1, 1]);
        assert_eq!(r.d, 5);
        assert_eq!(r.status, RecordStatus::Ok);
        assert_eq!(r.mu, Some(1024));
        assert_eq!((r.h30, r.h21, r.b3), (Some(1), Some(101), Some(204)));
        assert_eq!(
            (r.mu_plus, r.mu_zero, r.mu_minus),
            (Some(580), Some(204), Some(240))
        );
        assert_eq!(r.nu, Some(5));

        let header = fs::read_to_string(dir.path().join("records.csv")).unwrap();
        assert!(header.starts_with(
            "w1,w2,w3,w4,w5,d,gb_length,mu,mu_plus,mu_zero,mu_minus,h30,h21,b3,nu,status,elapsed_gb_ms,elapsed_inv_ms\n"
        ));
    }

    #[test]
    fn completed_batch_reruns_without_recomputation() {
        let dir = tempdir().unwrap();
        let input = [[1, 1, 1, 1, 1], [22, 29, 49, 50, 75]];
        let first = run_batch(&input, dir.path(), &batch_cfg(3)).unwrap();
        assert_eq!((first.ok, first.reused), (2, 0));
        let journal = fs::read(dir.path().join("journal.jsonl")).unwrap();
        let csv = fs::read(dir.path().join("records.csv")).unwrap();

        let second = run_batch(&input, dir.path(), &batch_cfg(3)).unwrap();
        assert_eq!((second.ok, second.reused), (2, 2));
        assert_eq!(journal, fs::read(dir.path().join("journal.jsonl")).unwrap());
        assert_eq!(csv, fs::read(dir.path().join("records.csv")).unwrap());
    }

    fn strip_timing_columns(csv: &str) -> String {
        csv.lines()
            .map(|line| {
                let fields: Vec<&str> = line.split(',').collect();
                fields[..fields.len() - 2].join(",")
            })
            .collect::<Vec<String>>()
            .join("\n")
    }

    #[test]
    fn interrupted_batch_resumes_and_matches() {
        let input = [[1, 1, 1, 1, 1], [22, 29, 49, 50, 75]];
        let full_dir = tempdir().unwrap();
        run_batch(&input, full_dir.path(), &batch_cfg(3)).unwrap();
        let reference = fs::read_to_string(full_dir.path().join("records.csv")).unwrap();

        let crash_dir = tempdir().unwrap();
        run_batch(&input, crash_dir.path(), &batch_cfg(3)).unwrap();
        let before_crash = fs::read_to_string(crash_dir.path().join("records.csv")).unwrap();
        let journal_path = crash_dir.path().join("journal.jsonl");
        let journal = fs::read_to_string(&journal_path).unwrap();
        let first_line_end = journal.find('\n').unwrap() + 1;
        fs::write(&journal_path, &journal[..first_line_end + 20]).unwrap();
        fs::remove_file(crash_dir.path().join("records.csv")).unwrap();

        let resumed = run_batch(&input, crash_dir.path(), &batch_cfg(3)).unwrap();
        assert_eq!((resumed.ok, resumed.reused), (2, 1));
        let rebuilt = fs::read_to_string(crash_dir.path().join("records.csv")).unwrap();
        assert_eq!(strip_timing_columns(&rebuilt), strip_timing_columns(&reference));
        assert_eq!(
            rebuilt.lines().nth(1).unwrap(),
            before_crash.lines().nth(1).unwrap(),
            "untouched journal rows must survive byte for byte"
        );
    }

    #[test]
    fn hard_systems_are_excluded_by_default() {
        let dir = tempdir().unwrap();
        let input = [[1, 1, 8, 19, 28], [1, 1, 1, 1, 1]];
        let summary = run_batch(&input, dir.path(), &batch_cfg(0)).unwrap();
        assert_eq!((summary.total, summary.skipped_hard), (1, 1));
        let records = read_records(&dir.path().join("records.csv")).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].weights(), [1, 1, 1, 1, 1]);
        let manifest: BatchManifest = serde_json::from_str(
            &fs::read_to_string(dir.path().join("manifest.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(manifest.excluded_hard, vec![[1, 1, 8, 19, 28]]);
    }

    #[test]
    fn changed_settings_are_rejected_on_resume() {
        let dir = tempdir().unwrap();
        run_batch(&[[1, 1, 1, 1, 1]], dir.path(), &batch_cfg(0)).unwrap();
        match run_batch(&[[1, 1, 1, 1, 1]], dir.path(), &batch_cfg(1)) {
            Err(PipelineError::ManifestMismatch { field: "seed" }) => {}
            other => panic!("expected seed mismatch, got {other:?}"),
        }
    }

    #[test]
    fn cy_hodge_ingest_rejects_permuted_duplicates() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("cy.csv");
        fs::write(&path, "1,1,1,1,1,101\n").unwrap();
        let table = ingest_cy_hodge(&path).unwrap();
        assert_eq!(table.map.get(&[1, 1, 1, 1, 1]), Some(&101));
        assert!(table.warning.is_none());

        fs::write(&path, "2,1,1,1,1,90\n1,1,1,1,2,91\n").unwrap();
        match ingest_cy_hodge(&path) {
            Err(PipelineError::DuplicateKey { key, first, second }) => {
                assert_eq!(key, [1, 1, 1, 1, 2]);
                assert_eq!((first, second), (1, 2));
            }
            other => panic!("expected DuplicateKey, got {other:?}"),
        }

        fs::write(&path, "w1,w2,w3,w4,w5,h21_cy\n").unwrap();
        let empty = ingest_cy_hodge(&path).unwrap();
        assert!(empty.map.is_empty());
        assert!(empty.warning.is_some());
    }

    fn ok_record(w: [u32; NVARS], h21: u64, nu: u8) -> DatasetRecord {
        let [w1, w2, w3, w4, w5] = w;
        DatasetRecord {
            w1,
            w2,
            w3,
            w4,
            w5,
            d: w.iter().map(|&x| u64::from(x)).sum(),
            gb_length: Some(5),
            mu: Some(100),
            mu_plus: Some(40),
            mu_zero: Some(20),
            mu_minus: Some(40),
            h30: Some(1),
            h21: Some(h21),
            b3: Some(2 * (1 + h21)),
            nu: Some(nu),
            status: RecordStatus::Ok,
            elapsed_gb_ms: 1,
            elapsed_inv_ms: 1,
        }
    }

    #[test]
    fn conjecture_check_joins_on_sorted_keys() {
        let records = vec![
            ok_record([1, 1, 1, 1, 1], 101, 5),
            ok_record([22, 29, 49, 50, 75], 2, 27),
            ok_record([9, 9, 9, 9, 9], 50, 1),
        ];
        let mut cy = CyHodgeTable::default();
        cy.map.insert([1, 1, 1, 1, 1], 101);
        cy.map.insert([22, 29, 49, 50, 75], 120);
        let report = conjecture_check(&records, &cy);
        assert_eq!((report.checked, report.equalities, report.missing), (2, 1, 1));
        assert!(report.holds && report.violations.is_empty());
        assert!((report.pmcc.unwrap() - (-1.0)).abs() < 1e-12);

        cy.map.insert([9, 9, 9, 9, 9], 49);
        let report = conjecture_check(&records, &cy);
        assert!(!report.holds);
        assert_eq!(report.violations, vec![[9, 9, 9, 9, 9]]);
    }

    #[test]
    fn predictions_carry_formula_values_and_bound_flags() {
        let gb = MLPModel::with_widths(&DEFAULT_WIDTHS, 1);
        let h21 = MLPModel::with_widths(&DEFAULT_WIDTHS, 2);
        let mut cy = CyHodgeTable::default();
        cy.map.insert([1, 1, 8, 19, 28], 348);
        cy.map.insert([1, 6, 34, 81, 122], 100);
        let rows = predict_remaining(
            &gb,
            &h21,
            &[[1, 1, 8, 19, 28], [1, 6, 34, 81, 122], [1, 1, 9, 21, 32]],
            Some(&cy),
        )
        .unwrap();
        assert_eq!(rows[0].h21_formula_rounded, 338);
        assert_eq!(rows[0].formula_within_bound, Some(true));
        assert_eq!(rows[1].h21_formula_rounded, 243);
        assert_eq!(rows[1].formula_within_bound, Some(false));
        assert_eq!(rows[2].h21_formula_rounded, 377);
        assert_eq!(rows[2].cy_h21, None);
        assert!(rows.iter().all(|r| r.gb_length_nn.is_finite() && r.h21_nn.is_finite()));
    }

    #[test]
    fn plots_put_a_uniform_toy_set_in_one_nu_bin() {
        let dir = tempdir().unwrap();
        let records: Vec<DatasetRecord> = (0..5)
            .map(|i| ok_record([1, 1, 1, 1, 1 + i], 90 + u64::from(i), 27))
            .collect();
        let written = emit_plots(&records, None, Some(&[(1.0, 1.2), (2.0, 1.8)]), dir.path())
            .unwrap();
        assert_eq!(written.len(), 8);

        let nu_csv = fs::read_to_string(dir.path().join("nu_hist.csv")).unwrap();
        let mut nonzero = Vec::new();
        for line in nu_csv.lines().skip(1) {
            let (nu, count) = line.split_once(',').unwrap();
            if count != "0" {
                nonzero.push((nu.to_string(), count.to_string()));
            }
        }
        assert_eq!(nonzero, vec![("27".to_string(), "5".to_string())]);
        assert_eq!(nu_csv.lines().count(), 25);

        for stem in ["gb_length_hist", "h21_hist", "nu_hist", "predicted_vs_true"] {
            let svg = fs::read_to_string(dir.path().join(format!("{stem}.svg"))).unwrap();
            assert!(svg.starts_with("<svg"));
        }
        assert!(matches!(
            emit_plots(&[], None, None, dir.path()),
            Err(PipelineError::NoRecords)
        ));
    }

    #[test]
    fn training_extraction_uses_ok_rows_only() {
        let mut records = vec![
            ok_record([3, 1, 1, 1, 1], 90, 27),
            ok_record([1, 1, 1, 1, 1], 101, 5),
        ];
        records.push(DatasetRecord::unfinished(
            [2, 2, 2, 3, 3],
            RecordStatus::Timeout,
            9,
        ));
        let pairs = training_pairs(&records, TargetColumn::H21);
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].0, vec![1.0, 1.0, 1.0, 1.0, 3.0]);
        assert_eq!(pairs[0].1, 90.0);
        let arrays = training_arrays(&records, TargetColumn::GbLength);
        assert_eq!(arrays.len(), 2);
        assert_eq!(arrays[1].1, 5.0);
    }
}
