use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Path as written in the manifest, relative to its directory.
    pub path: String,
    pub label: String,
    /// Index into [`DatasetManifest::classes`].
    pub class: usize,
}

/// Labeled image list read from a `path,label` CSV.
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
    /// Distinct labels in first-appearance order.
    pub classes: Vec<String>,
    /// Samples per class, aligned with `classes`.
    pub counts: Vec<usize>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        self.root.join(&entry.path)
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == label)
    }

    /// Training needs at least two classes; loading does not.
    pub fn require_two_classes(&self) -> Result<()> {
        if self.classes.len() < 2 {
            return Err(Error::invalid(format!(
                "dataset has {} class(es); at least 2 are required",
                self.classes.len()
            )));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("path,label\n");
        for e in &self.entries {
            s.push_str(&e.path);
            s.push(',');
            s.push_str(&e.label);
            s.push('\n');
        }
        s
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_manifest(&text, root)
}

pub fn parse_manifest(text: &str, root: impl Into<PathBuf>) -> Result<DatasetManifest> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or(Error::Manifest {
        line: 0,
        reason: "empty manifest".into(),
    })?;
    if header.trim() != "path,label" {
        return Err(Error::Manifest {
            line: hline,
            reason: format!("expected header `path,label`, found {header:?}"),
        });
    }
    let mut entries = Vec::new();
    let mut classes: Vec<String> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut seen = HashSet::new();
    for (line, l) in lines {
        let (p, label) = l.rsplit_once(',').ok_or(Error::Manifest {
            line,
            reason: "label field missing".into(),
        })?;
        let (p, label) = (p.trim(), label.trim());
        if p.is_empty() {
            return Err(Error::Manifest {
                line,
                reason: "path field empty".into(),
            });
        }
        if label.is_empty() {
            return Err(Error::Manifest {
                line,
                reason: "label field missing".into(),
            });
        }
        if !seen.insert(p.to_string()) {
            return Err(Error::Manifest {
                line,
                reason: format!("duplicate path {p}"),
            });
        }
        let class = match classes.iter().position(|c| c == label) {
            Some(i) => i,
            None => {
                classes.push(label.to_string());
                counts.push(0);
                classes.len() - 1
            }
        };
        counts[class] += 1;
        entries.push(ManifestEntry {
            path: p.to_string(),
            label: label.to_string(),
            class,
        });
    }
    if entries.is_empty() {
        return Err(Error::Manifest {
            line: 0,
            reason: "manifest lists no samples".into(),
        });
    }
    Ok(DatasetManifest {
        root: root.into(),
        entries,
        classes,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_two_class() {
        let mut text = String::from("path,label\n");
        for i in 0..87 {
            text.push_str(&format!("h{i}.png,healthy\no{i}.png,osteoporotic\n"));
        }
        let m = parse_manifest(&text, "/data").unwrap();
        assert_eq!(m.class_count(), 2);
        assert_eq!(m.len(), 174);
        assert_eq!(m.counts, vec![87, 87]);
        assert_eq!(m.classes, vec!["healthy", "osteoporotic"]);
        assert_eq!(m.resolve(&m.entries[1]), PathBuf::from("/data/o0.png"));
    }

    #[test]
    fn single_class_loads_but_fails_training_check() {
        let m = parse_manifest("path,label\na.pgm,x\nb.pgm,x\n", ".").unwrap();
        assert_eq!(m.class_count(), 1);
        assert!(m.require_two_classes().is_err());
    }

    #[test]
    fn minimal_set() {
        let m = parse_manifest("path,label\r\na.pgm,x\r\nb.pgm,y\r\n", ".").unwrap();
        assert_eq!((m.class_count(), m.len()), (2, 2));
        assert!(m.require_two_classes().is_ok());
    }

    #[test]
    fn errors() {
        assert!(parse_manifest("", ".").is_err());
        assert!(parse_manifest("path,label\n", ".").is_err());
        assert!(parse_manifest("file,class\na,b\n", ".").is_err());
        assert!(parse_manifest("path,label\na.pgm\n", ".").is_err());
        assert!(parse_manifest("path,label\na.pgm,\n", ".").is_err());
        let dup = parse_manifest("path,label\na.pgm,x\na.pgm,y\n", ".").unwrap_err();
        assert!(dup.to_string().contains("duplicate"));
    }

    #[test]
    fn csv_roundtrip() {
        let m = parse_manifest("path,label\na.pgm,x\nsub/b.pgm,y\n", ".").unwrap();
        let again = parse_manifest(&m.to_csv(), ".").unwrap();
        assert_eq!(again.entries, m.entries);
    }
}
