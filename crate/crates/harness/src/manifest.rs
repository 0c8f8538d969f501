use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// One contract check with its statistic and threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    pub relation: &'static str,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            statistic,
            relation: "<",
            threshold,
            pass: statistic < threshold,
        }
    }

    pub fn at_most(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            statistic,
            relation: "<=",
            threshold,
            pass: statistic <= threshold,
        }
    }

    pub fn above(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            statistic,
            relation: ">",
            threshold,
            pass: statistic > threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            statistic,
            relation: ">=",
            threshold,
            pass: statistic >= threshold,
        }
    }

    pub fn equal(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            statistic,
            relation: "==",
            threshold,
            pass: statistic == threshold,
        }
    }

    /// A yes/no property, recorded as 1 or 0.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check::equal(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    /// CSV header, in order; empty for JSON files.
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub version: String,
    pub config: BTreeMap<String, String>,
    /// SHA-256 over the sorted `name sha256` lines of `files`.
    pub content_hash: String,
    pub files: Vec<FileEntry>,
    pub checks: Vec<Check>,
    pub all_pass: bool,
    /// Wall-clock timings live in this separate file so the manifest stays reproducible.
    pub timings_file: String,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

/// A CSV table under construction.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    rows: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells.join(","));
    }

    pub fn render(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }
}

/// Shortest round-trip formatting, stable across runs.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Files produced by one run, written together at the end.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>, Vec<String>)>,
}

impl Outputs {
    pub fn table(&mut self, name: &str, table: &Table) {
        self.files.push((name.to_string(), table.render().into_bytes(), table.columns.clone()));
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut s = serde_json::to_string_pretty(value).expect("output serializes");
        s.push('\n');
        self.files.push((name.to_string(), s.into_bytes(), Vec::new()));
    }

    pub fn entries(&self) -> Vec<FileEntry> {
        self.files
            .iter()
            .map(|(name, bytes, columns)| FileEntry {
                name: name.clone(),
                sha256: sha256_hex(bytes),
                columns: columns.clone(),
            })
            .collect()
    }

    pub fn into_files(self) -> Vec<(String, Vec<u8>)> {
        self.files.into_iter().map(|(n, b, _)| (n, b)).collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes every file through a temporary sibling and a rename; on any
/// failure the temporaries written so far are removed.
pub fn write_atomically(dir: &Path, files: &[(String, Vec<u8>)]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
    let result = (|| {
        for (name, bytes) in files {
            let target = dir.join(name);
            let tmp = dir.join(format!(".{name}.tmp"));
            staged.push((tmp.clone(), target));
            let mut f = fs::File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
        }
        for (tmp, target) in &staged {
            fs::rename(tmp, target)?;
        }
        Ok(())
    })();
    if result.is_err() {
        for (tmp, _) in &staged {
            let _ = fs::remove_file(tmp);
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_renders_header_first() {
        let mut t = Table::new(&["a", "b"]);
        t.row(&[num(1.0), num(0.5)]);
        assert_eq!(t.render(), "a,b\n1e0,5e-1\n");
    }

    #[test]
    fn atomic_write_leaves_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        write_atomically(dir.path(), &[("x.csv".into(), b"a\n".to_vec())]).unwrap();
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names, vec![std::ffi::OsString::from("x.csv")]);
    }

    #[test]
    fn failed_write_cleans_up() {
        let dir = tempfile::tempdir().unwrap();
        // A directory in the way makes the second rename fail.
        fs::create_dir(dir.path().join("b.json")).unwrap();
        fs::write(dir.path().join("b.json").join("keep"), b"x").unwrap();
        let r = write_atomically(dir.path(), &[("a.csv".into(), b"1".to_vec()), ("b.json".into(), b"2".to_vec())]);
        assert!(r.is_err());
        assert!(!dir.path().join(".a.csv.tmp").exists());
        assert!(!dir.path().join(".b.json.tmp").exists());
    }
}
