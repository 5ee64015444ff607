//! Edge-list and label-table files.
//!
//! Edge list: UTF-8, one edge per line, `u<TAB>v[<TAB>timestamp]`. Blank
//! lines and lines starting with `#` are skipped. Label table:
//! `label<TAB>id` per line.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeList, EdgeRecord};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Data lines as `(1-based line number, fields)`.
pub(crate) fn read_fields(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rows = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields = if trimmed.contains('\t') {
            trimmed.split('\t').map(|s| s.trim().to_string()).collect()
        } else {
            trimmed.split_whitespace().map(str::to_string).collect()
        };
        rows.push((i + 1, fields));
    }
    Ok(rows)
}

fn parse_error(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_timestamp(path: &Path, line: usize, fields: &[String]) -> Result<Option<i64>> {
    match fields.len() {
        2 => Ok(None),
        3 => fields[2]
            .parse()
            .map(Some)
            .map_err(|_| parse_error(path, line, format!("bad timestamp {:?}", fields[2]))),
        k => Err(parse_error(path, line, format!("expected 2 or 3 fields, got {k}"))),
    }
}

/// Reads an edge list whose endpoints are dense integer ids.
pub fn read_edge_list(path: impl AsRef<Path>) -> Result<EdgeList> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for (line, fields) in read_fields(path)? {
        let timestamp = parse_timestamp(path, line, &fields)?;
        let id = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_error(path, line, format!("bad node id {s:?}")))
        };
        out.push(EdgeRecord {
            u: id(&fields[0])?,
            v: id(&fields[1])?,
            timestamp,
        });
    }
    Ok(out)
}

/// Reads an edge list with arbitrary string labels, assigning dense ids in
/// order of first appearance.
pub fn read_labeled_edge_list(path: impl AsRef<Path>) -> Result<(EdgeList, LabelTable)> {
    let path = path.as_ref();
    let mut labels = LabelTable::default();
    let mut out = Vec::new();
    for (line, fields) in read_fields(path)? {
        let timestamp = parse_timestamp(path, line, &fields)?;
        let u = labels.intern(&fields[0]);
        let v = labels.intern(&fields[1]);
        out.push(EdgeRecord { u, v, timestamp });
    }
    Ok((out, labels))
}

pub fn write_edge_list(path: impl AsRef<Path>, edges: &[EdgeRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    for e in edges {
        let res = match e.timestamp {
            Some(t) => writeln!(w, "{}\t{}\t{}", e.u, e.v, t),
            None => writeln!(w, "{}\t{}", e.u, e.v),
        };
        res.map_err(|err| Error::io(path, err))?;
    }
    w.flush().map_err(|err| Error::io(path, err))
}

pub fn write_pairs(path: impl AsRef<Path>, pairs: &[Edge]) -> Result<()> {
    let records: Vec<EdgeRecord> = pairs.iter().map(|&(u, v)| EdgeRecord::new(u, v)).collect();
    write_edge_list(path, &records)
}

pub fn read_pairs(path: impl AsRef<Path>) -> Result<Vec<Edge>> {
    Ok(read_edge_list(path)?
        .into_iter()
        .map(|r| (r.u, r.v))
        .collect())
}

/// Smallest node count covering every endpoint.
pub fn implied_num_nodes(edges: &[EdgeRecord]) -> usize {
    edges
        .iter()
        .map(|e| e.u.max(e.v) + 1)
        .max()
        .unwrap_or(0)
}

/// Bidirectional map between external node labels and dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelTable {
    labels: Vec<String>,
    ids: HashMap<String, usize>,
}

impl LabelTable {
    pub fn intern(&mut self, label: &str) -> usize {
        if let Some(&id) = self.ids.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(label.to_string());
        self.ids.insert(label.to_string(), id);
        id
    }

    pub fn id(&self, label: &str) -> Option<usize> {
        self.ids.get(label).copied()
    }

    pub fn label(&self, id: usize) -> Option<&str> {
        self.labels.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = create(path)?;
        for (id, label) in self.labels.iter().enumerate() {
            writeln!(w, "{label}\t{id}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut rows = Vec::new();
        for (line, fields) in read_fields(path)? {
            if fields.len() != 2 {
                return Err(parse_error(path, line, "expected label<TAB>id"));
            }
            let id: usize = fields[1]
                .parse()
                .map_err(|_| parse_error(path, line, format!("bad id {:?}", fields[1])))?;
            rows.push((line, id, fields[0].clone()));
        }
        rows.sort_by_key(|r| r.1);
        let mut table = LabelTable::default();
        for (line, id, label) in rows {
            if id != table.len() || table.ids.contains_key(&label) {
                return Err(parse_error(path, line, "ids must be dense and labels unique"));
            }
            table.intern(&label);
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_timestamps() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.tsv");
        std::fs::write(&path, "# header\n0\t1\t5\n\n2\t1\t7\n").unwrap();
        let edges = read_edge_list(&path).unwrap();
        assert_eq!(edges, vec![EdgeRecord::timed(0, 1, 5), EdgeRecord::timed(2, 1, 7)]);
        assert_eq!(implied_num_nodes(&edges), 3);
    }

    #[test]
    fn bad_id_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.tsv");
        std::fs::write(&path, "0\t1\nfoo\t2\n").unwrap();
        match read_edge_list(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn labels_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.tsv");
        std::fs::write(&path, "alice\tbob\nbob\tcarol\n").unwrap();
        let (edges, labels) = read_labeled_edge_list(&path).unwrap();
        assert_eq!(edges, vec![EdgeRecord::new(0, 1), EdgeRecord::new(1, 2)]);
        let table = dir.path().join("labels.tsv");
        labels.write(&table).unwrap();
        let back = LabelTable::read(&table).unwrap();
        assert_eq!(back, labels);
        assert_eq!(back.id("carol"), Some(2));
        assert_eq!(back.label(0), Some("alice"));
    }

    #[test]
    fn write_then_read_edge_list() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.tsv");
        let edges = vec![EdgeRecord::timed(3, 1, 0), EdgeRecord::timed(0, 2, 9)];
        write_edge_list(&path, &edges).unwrap();
        assert_eq!(read_edge_list(&path).unwrap(), edges);
    }
}
