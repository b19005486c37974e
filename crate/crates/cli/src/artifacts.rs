//! CSV/JSON artifact formatting, manifests and digest verification.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Bumped whenever a column is added, removed or reordered.
pub const SCHEMA_VERSION: u32 = 1;

pub const MANIFEST: &str = "manifest.json";

/// Full round-trip decimal: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Column-oriented CSV table, written with a schema comment line first.
#[derive(Debug, Clone)]
pub struct Table {
    name: String,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

pub enum Cell {
    Int(usize),
    Num(f64),
}

impl Table {
    pub fn new(name: &str, columns: Vec<String>) -> Self {
        Self {
            name: name.to_string(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(
            row.into_iter()
                .map(|c| match c {
                    Cell::Int(i) => i.to_string(),
                    Cell::Num(x) => fmt_f64(x),
                })
                .collect(),
        );
    }

    pub fn render(&self) -> Result<Vec<u8>> {
        let mut out = format!(
            "# schema: rcdstab/{}/v{} columns={}\n",
            self.name,
            SCHEMA_VERSION,
            self.columns.join(",")
        )
        .into_bytes();
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        drop(w);
        Ok(out)
    }
}

/// Artifacts are staged in memory and only written once the whole run succeeded.
#[derive(Debug, Default)]
pub struct ArtifactSet {
    files: Vec<(String, Vec<u8>)>,
}

impl ArtifactSet {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    pub fn add_table(&mut self, file: &str, table: &Table) -> Result<()> {
        self.add(file, table.render()?);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Writes every file; on any failure removes the ones already written.
    pub fn write(&self, dir: &Path) -> Result<Vec<ArtifactEntry>> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut written: Vec<PathBuf> = Vec::new();
        let mut entries = Vec::new();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            if let Err(e) = std::fs::write(&path, bytes) {
                for p in &written {
                    let _ = std::fs::remove_file(p);
                }
                let _ = std::fs::remove_file(&path);
                return Err(e).with_context(|| format!("writing {}", path.display()));
            }
            written.push(path);
            entries.push(ArtifactEntry {
                file: name.clone(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(bytes),
            });
        }
        Ok(entries)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub phase: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub generator: String,
    pub schema_version: u32,
    pub config: serde_json::Value,
    pub artifacts: Vec<ArtifactEntry>,
    pub wall_clock_seconds: f64,
    pub timings: Vec<Timing>,
    /// False when a property row failed; the artifacts are still complete.
    pub passed: bool,
}

/// Checks every listed artifact against its recorded digest. Returns the
/// mismatching or missing file names.
pub fn verify_manifest(path: &Path) -> Result<Vec<String>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut bad = Vec::new();
    if manifest.artifacts.is_empty() {
        bail!("manifest lists no artifacts");
    }
    for a in &manifest.artifacts {
        match std::fs::read(dir.join(&a.file)) {
            Ok(bytes) if sha256_hex(&bytes) == a.sha256 && bytes.len() as u64 == a.bytes => {}
            _ => bad.push(a.file.clone()),
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5e17] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn schema_line_comes_first() {
        let mut t = Table::new("demo", vec!["t".into(), "value".into()]);
        t.push(vec![Cell::Int(1), Cell::Num(0.5)]);
        let text = String::from_utf8(t.render().unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "# schema: rcdstab/demo/v1 columns=t,value"
        );
        assert_eq!(lines.next().unwrap(), "t,value");
        assert_eq!(lines.next().unwrap(), "1,5.0000000000000000e-1");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn verify_detects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        let mut set = ArtifactSet::default();
        set.add("a.csv", b"x\n".to_vec());
        let artifacts = set.write(dir.path()).unwrap();
        let manifest = RunManifest {
            tool: "rcdstab".into(),
            version: "0".into(),
            generator: "g".into(),
            schema_version: SCHEMA_VERSION,
            config: serde_json::Value::Null,
            artifacts,
            wall_clock_seconds: 0.0,
            timings: vec![],
            passed: true,
        };
        let mpath = dir.path().join(MANIFEST);
        std::fs::write(&mpath, serde_json::to_vec(&manifest).unwrap()).unwrap();
        assert!(verify_manifest(&mpath).unwrap().is_empty());
        std::fs::write(dir.path().join("a.csv"), b"y\n").unwrap();
        assert_eq!(verify_manifest(&mpath).unwrap(), vec!["a.csv".to_string()]);
    }
}
