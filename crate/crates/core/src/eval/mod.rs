//! Cross-validation, confusion metrics, ROC analysis and DeLong's test.

mod delong;
mod loocv;
mod roc;

pub use delong::{delong_test, DelongResult};
pub use loocv::{loocv, FoldPrediction, LoocvOptions};
pub use roc::{roc_auc, RocCurve};

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Label and graded score for one sample; higher scores favor the positive class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub path: String,
    pub true_label: usize,
    pub predicted_label: usize,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Metrics of one classifier over a set of samples. Rates are percentages.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub name: String,
    pub class_names: Vec<String>,
    pub positive: usize,
    pub rows: Vec<SampleRow>,
    pub confusion: Confusion,
    pub tpr: f64,
    pub tnr: f64,
    pub acc: f64,
    pub auc: f64,
    pub roc: RocCurve<f64>,
    /// Folds whose training part held a single class.
    pub degenerate_folds: Vec<usize>,
}

fn percent(num: usize, den: usize) -> f64 {
    if den == 0 {
        f64::NAN
    } else {
        100.0 * num as f64 / den as f64
    }
}

impl EvalReport {
    pub fn from_rows(
        name: impl Into<String>,
        class_names: Vec<String>,
        positive: usize,
        rows: Vec<SampleRow>,
        degenerate_folds: Vec<usize>,
    ) -> Result<Self> {
        if positive >= class_names.len() {
            return Err(Error::UnknownClass(positive));
        }
        if let Some(r) = rows
            .iter()
            .find(|r| r.true_label >= class_names.len() || r.predicted_label >= class_names.len())
        {
            return Err(Error::UnknownClass(r.true_label.max(r.predicted_label)));
        }
        let mut c = Confusion::default();
        for r in &rows {
            match (r.true_label == positive, r.predicted_label == positive) {
                (true, true) => c.tp += 1,
                (true, false) => c.fn_ += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
            }
        }
        let scores: Vec<f64> = rows.iter().map(|r| r.score).collect();
        let positives: Vec<bool> = rows.iter().map(|r| r.true_label == positive).collect();
        let roc = roc_auc(&scores, &positives)?;
        Ok(Self {
            name: name.into(),
            class_names,
            positive,
            tpr: percent(c.tp, c.tp + c.fn_),
            tnr: percent(c.tn, c.tn + c.fp),
            acc: percent(c.tp + c.tn, c.total()),
            auc: 100.0 * roc.auc,
            roc,
            confusion: c,
            rows,
            degenerate_folds,
        })
    }

    /// Builds a report from cross-validation folds, in sample order.
    pub fn from_folds(
        name: impl Into<String>,
        class_names: Vec<String>,
        positive: usize,
        paths: &[String],
        labels: &[usize],
        folds: &[FoldPrediction<Prediction>],
    ) -> Result<Self> {
        let rows = folds
            .iter()
            .map(|f| SampleRow {
                path: paths[f.index].clone(),
                true_label: labels[f.index],
                predicted_label: f.prediction.label,
                score: f.prediction.score,
            })
            .collect();
        let degenerate = folds.iter().filter(|f| f.degenerate).map(|f| f.index).collect();
        Self::from_rows(name, class_names, positive, rows, degenerate)
    }

    /// `name & TPR & TNR & ACC & AUC \\`
    pub fn table_row(&self) -> String {
        format!(
            "{} & {:.1} & {:.1} & {:.1} & {:.1} \\\\",
            self.name, self.tpr, self.tnr, self.acc, self.auc
        )
    }

    pub fn summary(&self) -> String {
        let c = &self.confusion;
        let mut s = String::new();
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "samples = {}", self.rows.len());
        let _ = writeln!(s, "positive_class = {}", self.class_names[self.positive]);
        let _ = writeln!(s, "tp = {}\ntn = {}\nfp = {}\nfn = {}", c.tp, c.tn, c.fp, c.fn_);
        let _ = writeln!(
            s,
            "tpr = {}\ntnr = {}\nacc = {}\nauc = {}",
            self.tpr, self.tnr, self.acc, self.auc
        );
        let folds: Vec<String> = self.degenerate_folds.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "degenerate_folds = {}", folds.join(","));
        s
    }

    /// Writes `predictions.csv`, `roc.csv` and `summary.txt` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut pred = String::from("path,true_label,predicted_label,score\n");
        for r in &self.rows {
            let _ = writeln!(
                pred,
                "{},{},{},{}",
                csv_field(&r.path),
                self.class_names[r.true_label],
                self.class_names[r.predicted_label],
                r.score
            );
        }
        write_file(&dir.join("predictions.csv"), &pred)?;
        let mut roc = String::from("fpr,tpr\n");
        for (f, t) in &self.roc.points {
            let _ = writeln!(roc, "{f},{t}");
        }
        write_file(&dir.join("roc.csv"), &roc)?;
        write_file(&dir.join("summary.txt"), &self.summary())
    }

    /// Reloads a report written by [`EvalReport::write`], recomputing every metric
    /// from the per-sample rows.
    pub fn read(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let summary = read_summary(&dir.join("summary.txt"))?;
        let get = |k: &str| {
            summary
                .iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::Parse(format!("{}: missing `{k}`", dir.join("summary.txt").display())))
        };
        let name = get("name")?;
        let positive_name = get("positive_class")?;
        let path = dir.join("predictions.csv");
        let mut reader = csv::Reader::from_path(&path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let mut class_names: Vec<String> = vec![positive_name];
        let class_of = |name: &str, names: &mut Vec<String>| match names.iter().position(|n| n == name) {
            Some(i) => i,
            None => {
                names.push(name.to_string());
                names.len() - 1
            }
        };
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            let field = |k: usize| {
                rec.get(k)
                    .ok_or_else(|| Error::Parse(format!("{}: row {} is short", path.display(), i + 2)))
            };
            let score: f64 = field(3)?
                .parse()
                .map_err(|_| Error::Parse(format!("{}: row {}: bad score", path.display(), i + 2)))?;
            rows.push(SampleRow {
                path: field(0)?.to_string(),
                true_label: class_of(field(1)?, &mut class_names),
                predicted_label: class_of(field(2)?, &mut class_names),
                score,
            });
        }
        let degenerate = get("degenerate_folds")?
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad degenerate fold index {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(name, class_names, 0, rows, degenerate)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_summary(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect())
}

/// DeLong comparison of two reports over the same samples.
pub fn compare_reports(a: &EvalReport, b: &EvalReport) -> Result<DelongResult<f64>> {
    if a.rows.len() != b.rows.len() {
        return Err(Error::DimensionMismatch {
            expected: a.rows.len(),
            found: b.rows.len(),
        });
    }
    let pos_name = &a.class_names[a.positive];
    let mut scores_b = Vec::with_capacity(b.rows.len());
    let mut positives = Vec::with_capacity(a.rows.len());
    for ra in &a.rows {
        let rb = b
            .rows
            .iter()
            .find(|r| r.path == ra.path)
            .ok_or_else(|| Error::Degenerate(format!("sample {} missing from the second report", ra.path)))?;
        let is_pos_a = ra.true_label == a.positive;
        let is_pos_b = &b.class_names[rb.true_label] == pos_name;
        if is_pos_a != is_pos_b {
            return Err(Error::Degenerate(format!(
                "sample {} has different true labels",
                ra.path
            )));
        }
        scores_b.push(rb.score);
        positives.push(is_pos_a);
    }
    let scores_a: Vec<f64> = a.rows.iter().map(|r| r.score).collect();
    delong_test(&scores_a, &scores_b, &positives)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        vec!["m".into(), "n".into()]
    }

    #[test]
    fn constant_classifier() {
        let labels = [0, 1, 0, 1, 0, 1];
        let folds = loocv(
            &labels,
            LoocvOptions::default(),
            |_| Ok(()),
            |_, _| Ok(Prediction { label: 0, score: 1.0 }),
        )
        .unwrap();
        let paths: Vec<String> = (0..6).map(|i| format!("s{i}.png")).collect();
        let r = EvalReport::from_folds("const", names(), 0, &paths, &labels, &folds).unwrap();
        assert_eq!((r.tpr, r.tnr, r.acc, r.auc), (100.0, 0.0, 50.0, 50.0));
        assert_eq!(r.confusion.total(), 6);
    }

    #[test]
    fn label_perturbation_keeps_predictions() {
        let features = [0.1, 0.9, 0.2, 0.8, 0.3, 0.7, 0.55];
        let run = |labels: &[usize]| {
            loocv(
                labels,
                LoocvOptions::default(),
                |train| {
                    // nearest class mean
                    let mean = |c| {
                        let v: Vec<f64> = train
                            .iter()
                            .filter(|&&j| labels[j] == c)
                            .map(|&j| features[j])
                            .collect();
                        v.iter().sum::<f64>() / v.len() as f64
                    };
                    Ok((mean(0), mean(1)))
                },
                |&(m0, m1): &(f64, f64), i| {
                    let d = (features[i] - m1).abs() - (features[i] - m0).abs();
                    Ok(Prediction {
                        label: if d >= 0.0 { 0 } else { 1 },
                        score: d,
                    })
                },
            )
            .unwrap()
        };
        let labels = [0, 1, 0, 1, 0, 1, 1];
        let base = run(&labels);
        for i in 0..labels.len() {
            let mut flipped = labels;
            flipped[i] = 1 - flipped[i];
            let other = run(&flipped);
            assert_eq!(other[i].prediction, base[i].prediction);
        }
    }

    #[test]
    fn write_read_recomputes_exactly() {
        let rows: Vec<SampleRow> = (0..9)
            .map(|i| SampleRow {
                path: format!("img,{i}.pgm"),
                true_label: i % 2,
                predicted_label: (i / 3) % 2,
                score: (i as f64 * 0.37).sin() / 3.0,
            })
            .collect();
        let r = EvalReport::from_rows("BBLL-S", names(), 0, rows, vec![2, 5]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        r.write(dir.path()).unwrap();
        let back = EvalReport::read(dir.path()).unwrap();
        assert_eq!(back.rows, r.rows);
        assert_eq!(back.summary(), r.summary());
        assert_eq!(back.roc, r.roc);
        let c = compare_reports(&r, &back).unwrap();
        assert_eq!(c.p, 1.0);
        assert!(c.degenerate);
    }

    #[test]
    fn table_row_format() {
        let rows = vec![
            SampleRow {
                path: "a".into(),
                true_label: 0,
                predicted_label: 0,
                score: 0.9,
            },
            SampleRow {
                path: "b".into(),
                true_label: 1,
                predicted_label: 1,
                score: 0.1,
            },
        ];
        let r = EvalReport::from_rows("SRC 1/4", names(), 0, rows, vec![]).unwrap();
        assert_eq!(r.table_row(), "SRC 1/4 & 100.0 & 100.0 & 100.0 & 100.0 \\\\");
    }

    #[test]
    fn mismatched_samples() {
        let mk = |p: &str| {
            EvalReport::from_rows(
                "x",
                names(),
                0,
                vec![
                    SampleRow {
                        path: p.into(),
                        true_label: 0,
                        predicted_label: 0,
                        score: 0.9,
                    },
                    SampleRow {
                        path: "b".into(),
                        true_label: 1,
                        predicted_label: 1,
                        score: 0.1,
                    },
                ],
                vec![],
            )
            .unwrap()
        };
        assert!(compare_reports(&mk("a"), &mk("c")).is_err());
    }
}
