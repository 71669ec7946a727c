//! Classification of coefficient families: point search, then local solvability,
//! with a resumable append-only JSON-lines log.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{CurveError, HyperellipticCurve};
use crate::localsolve::{is_els, Place};
use crate::search::{point_search, RationalPoint};
use crate::sieve::{rerun_matches, SieveCertificate, SieveError, Status};

/// Records are flushed and synced in batches of this size.
pub const BATCH: usize = 64;

#[derive(Debug, Error)]
pub enum CensusError {
    #[error("invalid family: {0}")]
    InvalidSpec(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("log corrupted at line {line}: {message}")]
    LogCorruption { line: usize, message: String },
    #[error("log {0} already exists; pass resume to continue it")]
    LogExists(String),
    #[error("record {id} is {class}, not ELS_UNRESOLVED")]
    ClassificationConflict { id: String, class: String },
    #[error("curve mismatch: {0}")]
    CurveMismatch(String),
    #[error("certificate outcome is not EMPTY")]
    CertificateNotEmpty,
    #[error("certificate does not replay to the same result")]
    CertificateReplayMismatch,
    #[error(transparent)]
    Sieve(#[from] SieveError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub degrees: Vec<usize>,
    pub lo: i64,
    pub hi: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genus: Option<u32>,
    #[serde(default = "yes")]
    pub dedupe: bool,
}

fn yes() -> bool {
    true
}

fn genus_of_degree(d: usize) -> u32 {
    if d <= 4 {
        1
    } else {
        2
    }
}

impl FamilySpec {
    pub fn validate(&self) -> Result<(), CensusError> {
        if self.lo > self.hi {
            return Err(CensusError::InvalidSpec(format!("empty range [{}, {}]", self.lo, self.hi)));
        }
        if self.degrees.is_empty() || self.degrees.iter().any(|d| !(3..=6).contains(d)) {
            return Err(CensusError::InvalidSpec(format!("degrees {:?} not in 3..=6", self.degrees)));
        }
        if let Some(g) = self.genus {
            if let Some(d) = self.degrees.iter().find(|&&d| genus_of_degree(d) != g) {
                return Err(CensusError::InvalidSpec(format!("degree {d} does not have genus {g}")));
            }
        }
        if self.lo == 0 && self.hi == 0 {
            return Err(CensusError::InvalidSpec("range {0} has no nonzero leading coefficient".into()));
        }
        Ok(())
    }

    /// Coefficient tuples (lowest first) to classify, in enumeration order.
    pub fn members(&self) -> Vec<Vec<i64>> {
        let mut degrees = self.degrees.clone();
        degrees.sort_unstable();
        degrees.dedup();
        let mut out = Vec::new();
        for d in degrees {
            let mut cur = vec![self.lo; d + 1];
            loop {
                if cur[d] != 0 && (!self.dedupe || canonical(&cur) == cur) {
                    out.push(cur.clone());
                }
                // Odometer over [lo, hi]^{d+1}.
                let mut i = 0;
                while i <= d && cur[i] == self.hi {
                    cur[i] = self.lo;
                    i += 1;
                }
                if i > d {
                    break;
                }
                cur[i] += 1;
            }
        }
        out
    }
}

/// Least tuple in the orbit under x ↦ −x and, for even degree with f(0) ≠ 0,
/// x ↦ 1/x.
pub fn canonical(f: &[i64]) -> Vec<i64> {
    let neg: Vec<i64> = f.iter().enumerate().map(|(i, &c)| if i % 2 == 1 { -c } else { c }).collect();
    let mut orbit = vec![f.to_vec(), neg.clone()];
    let d = f.len() - 1;
    if d % 2 == 0 && f[0] != 0 {
        let rev: Vec<i64> = f.iter().rev().copied().collect();
        let rev_neg: Vec<i64> = neg.iter().rev().copied().collect();
        orbit.push(rev);
        orbit.push(rev_neg);
    }
    orbit.into_iter().min().expect("nonempty orbit")
}

pub fn curve_id(f: &[i64]) -> String {
    f.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    HasPoint { point: RationalPoint },
    /// `place` is the first failing place (real, then primes ascending).
    LocalObstruction { place: Place, places: Vec<Place> },
    ElsUnresolved,
    SieveEmpty {
        digest: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        certificate: Option<String>,
    },
    SingularSkipped,
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::HasPoint { .. } => "HAS_POINT",
            Classification::LocalObstruction { .. } => "LOCAL_OBSTRUCTION",
            Classification::ElsUnresolved => "ELS_UNRESOLVED",
            Classification::SieveEmpty { .. } => "SIEVE_EMPTY",
            Classification::SingularSkipped => "SINGULAR_SKIPPED",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRecord {
    pub id: String,
    pub coeffs: Vec<i64>,
    #[serde(flatten)]
    pub classification: Classification,
    pub height: u64,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl CensusRecord {
    /// The record without its timestamp, for set comparisons across runs.
    pub fn content(&self) -> (String, Classification, u64) {
        (self.id.clone(), self.classification.clone(), self.height)
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn classify_one(coeffs: &[i64], h: u64) -> CensusRecord {
    let classification = match HyperellipticCurve::from_ints(coeffs) {
        Err(CurveError::NotSquarefree) => Classification::SingularSkipped,
        Err(e) => unreachable!("family members have degree 3..=6: {e}"),
        Ok(c) => classify_curve(&c, h),
    };
    CensusRecord {
        id: curve_id(coeffs),
        coeffs: coeffs.to_vec(),
        classification,
        height: h,
        timestamp: now(),
    }
}

pub fn classify_curve(c: &HyperellipticCurve, h: u64) -> Classification {
    if let Some(pt) = point_search(c, h).into_iter().next() {
        return Classification::HasPoint { point: pt };
    }
    match is_els(c) {
        Ok(r) if !r.els => {
            let places = r.failures();
            Classification::LocalObstruction { place: places[0], places }
        }
        Ok(_) => Classification::ElsUnresolved,
        Err(e) => {
            log::warn!("local solvability undecided for {c:?}: {e}");
            Classification::ElsUnresolved
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CensusSummary {
    pub total: usize,
    pub counts: BTreeMap<String, usize>,
    pub obstruction_places: BTreeMap<String, usize>,
}

impl CensusSummary {
    pub fn count(&self, class: &str) -> usize {
        self.counts.get(class).copied().unwrap_or(0)
    }

    fn from_records<'a>(recs: impl Iterator<Item = &'a CensusRecord>) -> Self {
        let mut s = CensusSummary::default();
        for r in recs {
            s.total += 1;
            *s.counts.entry(r.classification.name().to_string()).or_default() += 1;
            if let Classification::LocalObstruction { place, .. } = &r.classification {
                *s.obstruction_places.entry(place.to_string()).or_default() += 1;
            }
        }
        s
    }
}

/// Run options beyond the family itself.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub resume: bool,
    /// Stop after writing this many new records (simulates an interruption).
    pub max_new_records: Option<usize>,
}

/// Parsed log: records in file order and the byte length of the valid prefix.
struct LoadedLog {
    records: Vec<CensusRecord>,
    valid_len: u64,
    file_len: u64,
}

fn load(path: &Path) -> Result<LoadedLog, CensusError> {
    let file = File::open(path)?;
    let file_len = file.metadata()?.len();
    let mut reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut offset = 0u64;
    let mut line = String::new();
    let mut lineno = 0;
    let mut bad: Option<(usize, String)> = None;
    loop {
        line.clear();
        let n = reader.read_line(&mut line)?;
        if n == 0 {
            break;
        }
        lineno += 1;
        if let Some((l, msg)) = bad.take() {
            return Err(CensusError::LogCorruption { line: l, message: msg });
        }
        let complete = line.ends_with('\n');
        match serde_json::from_str::<CensusRecord>(line.trim_end()) {
            Ok(r) if complete => {
                records.push(r);
                offset += n as u64;
            }
            Ok(_) => bad = Some((lineno, "record without newline".into())),
            Err(_) if line.trim().is_empty() && complete => offset += n as u64,
            Err(e) => bad = Some((lineno, e.to_string())),
        }
    }
    if let Some((l, msg)) = bad {
        log::warn!("truncating unparseable trailing record at line {l}: {msg}");
    }
    Ok(LoadedLog { records, valid_len: offset, file_len })
}

/// Last record per id (later appends supersede earlier ones).
pub fn read_log(path: &Path) -> Result<Vec<CensusRecord>, CensusError> {
    let loaded = load(path)?;
    Ok(latest(loaded.records))
}

fn latest(records: Vec<CensusRecord>) -> Vec<CensusRecord> {
    let mut by_id: HashMap<String, usize> = HashMap::new();
    let mut out: Vec<CensusRecord> = Vec::new();
    for r in records {
        match by_id.get(&r.id) {
            Some(&i) => out[i] = r,
            None => {
                by_id.insert(r.id.clone(), out.len());
                out.push(r);
            }
        }
    }
    out
}

pub fn summary(path: &Path) -> Result<CensusSummary, CensusError> {
    let recs = read_log(path)?;
    Ok(CensusSummary::from_records(recs.iter()))
}

/// Opens the log for appending, dropping an unparseable trailing record.
fn open_for_append(path: &Path, resume: bool) -> Result<(File, HashSet<String>), CensusError> {
    let exists = path.exists() && std::fs::metadata(path)?.len() > 0;
    if exists && !resume {
        return Err(CensusError::LogExists(path.display().to_string()));
    }
    let mut done = HashSet::new();
    if exists {
        let loaded = load(path)?;
        if loaded.valid_len < loaded.file_len {
            let f = OpenOptions::new().write(true).open(path)?;
            f.set_len(loaded.valid_len)?;
            f.sync_all()?;
        }
        done.extend(loaded.records.into_iter().map(|r| r.id));
    }
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.seek(SeekFrom::End(0))?;
    Ok((f, done))
}

pub fn census_run(
    spec: &FamilySpec,
    h: u64,
    log_path: &Path,
    opts: &RunOptions,
) -> Result<CensusSummary, CensusError> {
    spec.validate()?;
    let (mut file, done) = open_for_append(log_path, opts.resume)?;
    let todo: Vec<Vec<i64>> = spec
        .members()
        .into_iter()
        .filter(|f| spec.genus.is_none_or(|g| genus_of_degree(f.len() - 1) == g))
        .filter(|f| !done.contains(&curve_id(f)))
        .collect();
    let limit = opts.max_new_records.unwrap_or(usize::MAX);
    let mut written = 0usize;
    for chunk in todo.chunks(BATCH) {
        if written >= limit {
            break;
        }
        let take = chunk.len().min(limit - written);
        let recs: Vec<CensusRecord> = chunk[..take].par_iter().map(|f| classify_one(f, h)).collect();
        let mut buf = String::new();
        for r in &recs {
            buf.push_str(&serde_json::to_string(r).expect("serializable"));
            buf.push('\n');
        }
        file.write_all(buf.as_bytes())?;
        file.sync_data()?;
        written += take;
    }
    summary(log_path)
}

/// Upgrades an ELS_UNRESOLVED record to SIEVE_EMPTY by appending a new record.
pub fn attach_sieve_result(
    log_path: &Path,
    id: Option<&str>,
    cert: &SieveCertificate,
    cert_ref: Option<String>,
) -> Result<CensusRecord, CensusError> {
    let recs = read_log(log_path)?;
    let coeffs = int_coeffs(&cert.problem.curve)
        .ok_or_else(|| CensusError::CurveMismatch("certificate curve has non-integer coefficients".into()))?;
    let candidates = [curve_id(&coeffs), curve_id(&canonical(&coeffs))];
    if let Some(id) = id {
        if !candidates.iter().any(|c| c == id) {
            return Err(CensusError::CurveMismatch(format!("certificate is for {}, not {id}", candidates[0])));
        }
    }
    let rec = recs
        .iter()
        .find(|r| id.is_none_or(|i| i == r.id) && candidates.contains(&r.id))
        .ok_or_else(|| CensusError::CurveMismatch(format!("no record for {}", candidates[0])))?;
    let digest = cert.digest();
    match &rec.classification {
        Classification::SieveEmpty { digest: d, .. } if *d == digest => return Ok(rec.clone()),
        Classification::ElsUnresolved => {}
        other => {
            return Err(CensusError::ClassificationConflict { id: rec.id.clone(), class: other.name().into() })
        }
    }
    if cert.outcome.status != Status::Empty {
        return Err(CensusError::CertificateNotEmpty);
    }
    if !rerun_matches(cert)? {
        return Err(CensusError::CertificateReplayMismatch);
    }
    let upgraded = CensusRecord {
        classification: Classification::SieveEmpty { digest, certificate: cert_ref },
        timestamp: now(),
        ..rec.clone()
    };
    let (mut f, _) = open_for_append(log_path, true)?;
    let mut line = serde_json::to_string(&upgraded).expect("serializable");
    line.push('\n');
    f.write_all(line.as_bytes())?;
    f.sync_data()?;
    Ok(upgraded)
}

fn int_coeffs(c: &HyperellipticCurve) -> Option<Vec<i64>> {
    c.int_coeffs()
}
