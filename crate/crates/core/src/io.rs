//! On-disk formats.
//!
//! * Series CSV: header `timestamp,power`, integer epoch seconds and decimal
//!   watts, one row per present sample.
//! * Hierarchy JSON: `{"nodes": [{"id", "level", "parent", "csv_path"}]}`
//!   with `parent` null for the root and `csv_path` relative to the JSON file
//!   (null for an unmetered node).

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::{Level, MeterHierarchy, MeterNode};
use crate::series::{regularize, PowerSeries};

pub const HIERARCHY_FILE: &str = "hierarchy.json";

/// Writes `bytes` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Renders into a buffer with `f`, then writes it atomically.
pub fn write_with(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    write_atomic(path, &buf)
}

pub fn write_series_csv<W: Write>(series: &PowerSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let e = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["timestamp", "power"]).map_err(e)?;
    for (t, v) in series.iter_present() {
        w.write_record([t.to_string(), v.to_string()]).map_err(e)?;
    }
    w.flush()?;
    Ok(())
}

/// Raw `(timestamp, watts)` rows of a series CSV.
pub fn read_samples<R: Read>(input: R, origin: &Path) -> Result<Vec<(i64, f64)>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers().map_err(|e| Error::parse(origin, e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(origin, format!("missing `{name}` column")))
    };
    let (ti, pi) = (col("timestamp")?, col("power")?);
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(origin, e))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let t: i64 = field(ti)
            .parse()
            .map_err(|e| Error::parse(origin, format!("row {}: timestamp: {e}", line + 2)))?;
        let p: f64 = field(pi)
            .parse()
            .map_err(|e| Error::parse(origin, format!("row {}: power: {e}", line + 2)))?;
        out.push((t, p));
    }
    Ok(out)
}

/// Reads a series CSV and regularizes it onto a `period` grid.
pub fn read_series_csv(path: &Path, period: i64) -> Result<PowerSeries> {
    let file = fs::File::open(path)?;
    regularize(&read_samples(file, path)?, period)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    pub level: Level,
    pub parent: Option<String>,
    pub csv_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyDoc {
    pub nodes: Vec<NodeRecord>,
}

impl HierarchyDoc {
    /// Describes `h` in depth-first order with `<id>.csv` for metered nodes.
    pub fn describe(h: &MeterHierarchy) -> Self {
        let nodes = h
            .iter()
            .map(|n| NodeRecord {
                id: n.id().to_string(),
                level: n.level(),
                parent: h.parent(n.id()).map(str::to_string),
                csv_path: n.series().map(|_| format!("{}.csv", n.id())),
            })
            .collect();
        Self { nodes }
    }

    /// Builds the tree, loading each `csv_path` relative to `base_dir`.
    pub fn load(&self, base_dir: &Path, period: i64) -> Result<MeterHierarchy> {
        let mut children: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        for n in &self.nodes {
            if let Some(p) = &n.parent {
                children.entry(p.as_str()).or_default().push(n.id.clone());
            }
        }
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for rec in &self.nodes {
            let mut node = MeterNode::new(&rec.id, rec.level)
                .with_children(children.remove(rec.id.as_str()).unwrap_or_default());
            if let Some(p) = &rec.csv_path {
                node = node.with_series(read_series_csv(&base_dir.join(p), period)?);
            }
            nodes.push(node);
        }
        if let Some((parent, _)) = children.into_iter().next() {
            return Err(Error::InvalidHierarchy(format!("unknown parent `{parent}`")));
        }
        MeterHierarchy::new(nodes)
    }
}

/// Loads a hierarchy JSON and every CSV it references.
pub fn read_hierarchy(path: &Path, period: i64) -> Result<MeterHierarchy> {
    let text = fs::read_to_string(path)?;
    let doc: HierarchyDoc = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    doc.load(&base, period)
}

/// Writes `hierarchy.json` plus one CSV per metered node into `dir`.
pub fn write_corpus(h: &MeterHierarchy, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let doc = HierarchyDoc::describe(h);
    for node in h.iter() {
        if let Some(s) = node.series() {
            write_with(&dir.join(format!("{}.csv", node.id())), |b| write_series_csv(s, b))?;
        }
    }
    let path = dir.join(HIERARCHY_FILE);
    let json = serde_json::to_string_pretty(&doc).expect("hierarchy serializes");
    write_atomic(&path, json.as_bytes())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree() -> MeterHierarchy {
        let s = |v: &[f64]| PowerSeries::from_watts(60, 30, v.to_vec()).unwrap();
        MeterHierarchy::new(vec![
            MeterNode::new("b", Level::Building)
                .with_series(s(&[3.5, 4.0]))
                .with_children(["f2", "f1"]),
            MeterNode::new("f1", Level::Floor).with_series(s(&[1.5, 2.0])),
            MeterNode::new("f2", Level::Floor).with_series(s(&[2.0, 2.0])),
        ])
        .unwrap()
    }

    #[test]
    fn series_csv_round_trip() {
        let x = PowerSeries::new(0, 30, vec![Some(1.25), None, Some(300.0)]).unwrap();
        let mut buf = Vec::new();
        write_series_csv(&x, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "timestamp,power\n0,1.25\n60,300\n");
        let back = regularize(&read_samples(buf.as_slice(), Path::new("x")).unwrap(), 30).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn bad_csv_is_a_parse_error() {
        let r = read_samples("timestamp,power\n0,abc\n".as_bytes(), Path::new("x.csv"));
        assert!(matches!(r, Err(Error::Parse { .. })));
        let r = read_samples("time,watts\n0,1\n".as_bytes(), Path::new("x.csv"));
        assert!(matches!(r, Err(Error::Parse { .. })));
    }

    #[test]
    fn corpus_round_trip_preserves_child_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_corpus(&tree(), dir.path()).unwrap();
        let back = read_hierarchy(&path, 30).unwrap();
        assert_eq!(back, tree());
        let doc: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(doc["nodes"][0]["parent"], serde_json::Value::Null);
        assert_eq!(doc["nodes"][1]["id"], "f2");
        assert_eq!(doc["nodes"][1]["level"], "floor");
        assert_eq!(doc["nodes"][1]["csv_path"], "f2.csv");
    }
}
