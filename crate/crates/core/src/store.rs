//! Content-addressed cache of sweep results.
//!
//! Layout: `<root>/<digest>/curves.csv`, `manifest.json` and optionally
//! `samples.csv`. Entries are written into a temporary directory and
//! renamed into place, so readers never observe partial entries.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ensemble::{EnsembleCurve, SampleRecord, SweepOutput, SweepSpec};
use crate::error::{Error, Result};
use crate::CODE_VERSION;

/// Environment variable overriding the results directory.
pub const RESULTS_DIR_ENV: &str = "NHAAS_RESULTS_DIR";
pub const MANIFEST_SCHEMA: u32 = 1;

pub const CURVES_HEADER: &str = "L,distance,mean_xi,sem_xi,mean_ipr,sem_ipr,mean_gap,sem_gap,n_samples";
pub const SAMPLES_HEADER: &str = "L,distance,sample_index,xi,ipr,gap,phi";

/// Digest of everything that determines a sweep's output except the
/// number of samples.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResultKey {
    pub digest: String,
}

/// `spec` with the fields the sweep ignores normalized away.
pub fn canonical_spec(spec: &SweepSpec) -> SweepSpec {
    let mut s = spec.clone();
    s.base.phi = 0.0;
    s.base.size = 0;
    s
}

impl ResultKey {
    pub fn for_spec(spec: &SweepSpec) -> Self {
        #[derive(Serialize)]
        struct KeyView<'a> {
            spec: &'a SweepSpec,
            code_version: &'a str,
        }
        let mut canon = canonical_spec(spec);
        canon.n_samples = 0;
        let json = serde_json::to_vec(&KeyView {
            spec: &canon,
            code_version: CODE_VERSION,
        })
        .expect("spec serializes");
        ResultKey {
            digest: hex::encode(Sha256::digest(&json)),
        }
    }
}

impl std::fmt::Display for ResultKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.digest)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub key: String,
    pub code_version: String,
    pub spec: SweepSpec,
    pub created_unix: u64,
    pub total_samples: usize,
    pub failed_samples: usize,
    pub curves_sha256: String,
    pub samples_sha256: Option<String>,
}

impl Manifest {
    /// Equal up to the creation time.
    fn same_content(&self, other: &Manifest) -> bool {
        let mut a = self.clone();
        a.created_unix = other.created_unix;
        &a == other
    }
}

/// A cache hit.
#[derive(Debug, Clone, PartialEq)]
pub struct Stored {
    pub curves: Vec<EnsembleCurve>,
    pub samples: Option<Vec<SampleRecord>>,
    pub manifest: Manifest,
}

fn fmt_f64(out: &mut String, x: f64) {
    let _ = write!(out, "{x:.16e}");
}

pub fn curves_to_csv(curves: &[EnsembleCurve]) -> String {
    let mut s = String::from(CURVES_HEADER);
    s.push('\n');
    for c in curves {
        for i in 0..c.len() {
            let _ = write!(s, "{}", c.size);
            for v in [
                c.axis_values[i],
                c.mean_xi[i],
                c.sem_xi[i],
                c.mean_ipr[i],
                c.sem_ipr[i],
                c.mean_gap[i],
                c.sem_gap[i],
            ] {
                s.push(',');
                fmt_f64(&mut s, v);
            }
            let _ = writeln!(s, ",{}", c.n_samples[i]);
        }
    }
    s
}

fn parse_row<'a>(line: &'a str, expected: usize) -> Result<Vec<&'a str>> {
    let cols: Vec<&str> = line.split(',').collect();
    if cols.len() != expected {
        return Err(Error::Parse(format!("expected {expected} columns, got {}: `{line}`", cols.len())));
    }
    Ok(cols)
}

fn num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad number `{s}`")))
}

pub fn curves_from_csv(text: &str) -> Result<Vec<EnsembleCurve>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(CURVES_HEADER) {
        return Err(Error::Parse("curves header mismatch".into()));
    }
    let mut curves: Vec<EnsembleCurve> = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let c = parse_row(line, 9)?;
        let size: usize = num(c[0])?;
        if curves.last().map(|k| k.size) != Some(size) {
            curves.push(EnsembleCurve {
                size,
                axis_values: vec![],
                mean_xi: vec![],
                sem_xi: vec![],
                mean_ipr: vec![],
                sem_ipr: vec![],
                mean_gap: vec![],
                sem_gap: vec![],
                n_samples: vec![],
            });
        }
        let k = curves.last_mut().expect("pushed above");
        k.axis_values.push(num(c[1])?);
        k.mean_xi.push(num(c[2])?);
        k.sem_xi.push(num(c[3])?);
        k.mean_ipr.push(num(c[4])?);
        k.sem_ipr.push(num(c[5])?);
        k.mean_gap.push(num(c[6])?);
        k.sem_gap.push(num(c[7])?);
        k.n_samples.push(num(c[8])?);
    }
    Ok(curves)
}

pub fn samples_to_csv(samples: &[SampleRecord]) -> String {
    let mut s = String::from(SAMPLES_HEADER);
    s.push('\n');
    for r in samples {
        let _ = write!(s, "{},", r.size);
        fmt_f64(&mut s, r.distance);
        let _ = write!(s, ",{}", r.sample_index);
        for v in [r.xi, r.ipr, r.gap, r.phi] {
            s.push(',');
            fmt_f64(&mut s, v);
        }
        s.push('\n');
    }
    s
}

pub fn samples_from_csv(text: &str) -> Result<Vec<SampleRecord>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(SAMPLES_HEADER) {
        return Err(Error::Parse("samples header mismatch".into()));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let c = parse_row(line, 7)?;
            Ok(SampleRecord {
                size: num(c[0])?,
                distance: num(c[1])?,
                sample_index: num(c[2])?,
                xi: num(c[3])?,
                ipr: num(c[4])?,
                gap: num(c[5])?,
                phi: num(c[6])?,
            })
        })
        .collect()
}

fn sha_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Results directory handle.
#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Store { root: root.into() }
    }

    /// `$NHAAS_RESULTS_DIR` if set, else `fallback`.
    pub fn from_env(fallback: impl Into<PathBuf>) -> Self {
        match std::env::var_os(RESULTS_DIR_ENV) {
            Some(dir) if !dir.is_empty() => Store::new(dir),
            _ => Store::new(fallback),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entry_dir(&self, key: &ResultKey) -> PathBuf {
        self.root.join(&key.digest)
    }

    /// Write an entry. An existing entry with the same content is left
    /// alone; one with different content is a collision.
    pub fn put(&self, spec: &SweepSpec, output: &SweepOutput, keep_samples: bool) -> Result<PathBuf> {
        let key = ResultKey::for_spec(spec);
        let curves_csv = curves_to_csv(&output.curves);
        let samples_csv = keep_samples.then(|| samples_to_csv(&output.samples));
        let manifest = Manifest {
            schema_version: MANIFEST_SCHEMA,
            key: key.digest.clone(),
            code_version: CODE_VERSION.to_string(),
            spec: canonical_spec(spec),
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            total_samples: output.samples.len(),
            failed_samples: output.failures.len(),
            curves_sha256: sha_hex(curves_csv.as_bytes()),
            samples_sha256: samples_csv.as_ref().map(|s| sha_hex(s.as_bytes())),
        };

        let dest = self.entry_dir(&key);
        if dest.exists() {
            return self.check_existing(&key, &manifest).map(|_| dest);
        }
        fs::create_dir_all(&self.root)?;
        let nanos = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.subsec_nanos())
            .unwrap_or(0);
        let tmp = self
            .root
            .join(format!(".tmp-{}-{}-{nanos}", key.digest, std::process::id()));
        fs::create_dir_all(&tmp)?;
        let write_all = || -> Result<()> {
            fs::write(tmp.join("curves.csv"), &curves_csv)?;
            if let Some(s) = &samples_csv {
                fs::write(tmp.join("samples.csv"), s)?;
            }
            fs::write(tmp.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
            Ok(())
        };
        if let Err(e) = write_all() {
            let _ = fs::remove_dir_all(&tmp);
            return Err(e);
        }
        match fs::rename(&tmp, &dest) {
            Ok(()) => Ok(dest),
            Err(e) => {
                let _ = fs::remove_dir_all(&tmp);
                if dest.exists() {
                    // lost a race against another writer
                    self.check_existing(&key, &manifest).map(|_| dest)
                } else {
                    Err(e.into())
                }
            }
        }
    }

    fn check_existing(&self, key: &ResultKey, manifest: &Manifest) -> Result<()> {
        let existing = self.read_manifest(key)?;
        if existing.same_content(manifest) {
            Ok(())
        } else {
            Err(Error::Collision {
                key: key.digest.clone(),
            })
        }
    }

    fn read_manifest(&self, key: &ResultKey) -> Result<Manifest> {
        let corrupted = |reason: String| Error::Corrupted {
            key: key.digest.clone(),
            reason,
        };
        let text = fs::read_to_string(self.entry_dir(key).join("manifest.json"))
            .map_err(|e| corrupted(format!("manifest unreadable: {e}")))?;
        serde_json::from_str(&text).map_err(|e| corrupted(format!("manifest invalid: {e}")))
    }

    /// Cached result for `spec`, `None` on a miss (absent entry, or an
    /// entry recorded for a different spec).
    pub fn get(&self, spec: &SweepSpec) -> Result<Option<Stored>> {
        let key = ResultKey::for_spec(spec);
        let dir = self.entry_dir(&key);
        if !dir.exists() {
            return Ok(None);
        }
        let manifest = self.read_manifest(&key)?;
        if manifest.spec != canonical_spec(spec) || manifest.code_version != CODE_VERSION {
            return Ok(None);
        }
        let corrupted = |reason: String| Error::Corrupted {
            key: key.digest.clone(),
            reason,
        };
        let read_checked = |name: &str, sha: &str| -> Result<String> {
            let text = fs::read_to_string(dir.join(name)).map_err(|e| corrupted(format!("{name} unreadable: {e}")))?;
            if sha_hex(text.as_bytes()) != sha {
                return Err(corrupted(format!("{name} checksum mismatch")));
            }
            Ok(text)
        };
        let curves = curves_from_csv(&read_checked("curves.csv", &manifest.curves_sha256)?)
            .map_err(|e| corrupted(e.to_string()))?;
        let samples = match &manifest.samples_sha256 {
            Some(sha) => Some(
                samples_from_csv(&read_checked("samples.csv", sha)?).map_err(|e| corrupted(e.to_string()))?,
            ),
            None => None,
        };
        Ok(Some(Stored {
            curves,
            samples,
            manifest,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{run_sweep, Axis};
    use crate::model::ModelParams;

    fn spec(seed: u64) -> SweepSpec {
        let mut s = SweepSpec::new(ModelParams::new(2, 0.5, 3.0, 0.0), Axis::Eps, vec![0.01, 0.1], vec![20, 30]);
        s.n_samples = 3;
        s.master_seed = seed;
        s
    }

    #[test]
    fn round_trip_and_miss() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::new(dir.path());
        let s = spec(1);
        assert!(store.get(&s).unwrap().is_none());
        let out = run_sweep(&s).unwrap();
        store.put(&s, &out, true).unwrap();
        let hit = store.get(&s).unwrap().unwrap();
        assert_eq!(hit.curves, out.curves);
        assert_eq!(hit.samples.unwrap(), out.samples);
        // idempotent
        store.put(&s, &out, true).unwrap();
    }

    #[test]
    fn seeds_give_distinct_keys() {
        assert_ne!(ResultKey::for_spec(&spec(1)), ResultKey::for_spec(&spec(2)));
        let mut a = spec(1);
        a.n_samples = 99;
        assert_eq!(ResultKey::for_spec(&a), ResultKey::for_spec(&spec(1)));
    }

    #[test]
    fn tampering_is_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::new(dir.path());
        let s = spec(5);
        let out = run_sweep(&s).unwrap();
        let path = store.put(&s, &out, false).unwrap();
        let csv = path.join("curves.csv");
        let text = fs::read_to_string(&csv).unwrap().replacen("e-2", "e-3", 1);
        fs::write(&csv, text).unwrap();
        assert!(matches!(store.get(&s), Err(Error::Corrupted { .. })));
    }

    #[test]
    fn differing_content_collides() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::new(dir.path());
        let s = spec(9);
        let out = run_sweep(&s).unwrap();
        store.put(&s, &out, false).unwrap();
        let mut more = s.clone();
        more.n_samples = 4;
        let out2 = run_sweep(&more).unwrap();
        assert!(matches!(store.put(&more, &out2, false), Err(Error::Collision { .. })));
    }
}
