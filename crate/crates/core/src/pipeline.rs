//! End-to-end runs shared by the command-line driver and the test suites.

use rayon::prelude::*;

use crate::bayes::{classify_nb, fit_nb};
use crate::ensemble::{train_and_calibrate, DecisionFunction, EnsembleConfig};
use crate::error::{Error, Result};
use crate::eval::{loocv, EvalReport, FoldPrediction, LoocvOptions, Prediction};
use crate::featsel::{select_features, FeatureMatrix, SelectionConfig};
use crate::imgio::{load_image, DatasetManifest, GrayImage};
use crate::scalar::Real;
use crate::sparse::SolverConfig;
use crate::src::{build_src_images, classify_src_image, InputTransform};
use crate::texture::{extract_all, FeatureTable, TextureConfig};

/// Images with labels, in manifest order.
#[derive(Debug, Clone)]
pub struct LabeledImages<T> {
    pub images: Vec<GrayImage<T>>,
    pub labels: Vec<usize>,
    pub paths: Vec<String>,
    pub class_names: Vec<String>,
}

impl<T: Real> LabeledImages<T> {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    fn subset(&self, idx: &[usize]) -> (Vec<GrayImage<T>>, Vec<usize>) {
        (
            idx.iter().map(|&i| self.images[i].clone()).collect(),
            idx.iter().map(|&i| self.labels[i]).collect(),
        )
    }
}

/// Loads every image listed in the manifest. Failures name the offending path.
pub fn load_dataset<T: Real>(manifest: &DatasetManifest) -> Result<LabeledImages<T>> {
    let images = manifest
        .entries
        .par_iter()
        .map(|e| load_image(manifest.resolve(e)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LabeledImages {
        images,
        labels: manifest.entries.iter().map(|e| e.class).collect(),
        paths: manifest.entries.iter().map(|e| e.path.clone()).collect(),
        class_names: manifest.classes.clone(),
    })
}

fn report<T: Real>(
    name: &str,
    data: &LabeledImages<T>,
    positive: usize,
    folds: Vec<FoldPrediction<Prediction>>,
) -> Result<EvalReport> {
    EvalReport::from_folds(
        name,
        data.class_names.clone(),
        positive,
        &data.paths,
        &data.labels,
        &folds,
    )
}

/// Leave-one-out run of the block ensemble. Returns one report per fusion
/// rule, in the order of [`DecisionFunction::ALL`]. τ* and PDS are fitted
/// inside every training fold when the config asks for calibration.
pub fn crossval_ensemble<T: Real>(
    data: &LabeledImages<T>,
    cfg: &EnsembleConfig,
    opts: LoocvOptions,
) -> Result<Vec<EvalReport>> {
    let k = data.class_names.len();
    let rules: Vec<DecisionFunction> = if k == 2 {
        DecisionFunction::ALL.to_vec()
    } else {
        vec![DecisionFunction::Bbmap]
    };
    let folds = loocv(
        &data.labels,
        opts,
        |idx| {
            let (imgs, labels) = data.subset(idx);
            train_and_calibrate(&imgs, &labels, k, cfg.clone())
        },
        |model, i| {
            let d = model.classify(&data.images[i])?;
            rules
                .iter()
                .map(|&r| {
                    let (label, score) = d.decide(model, r)?;
                    Ok(Prediction {
                        label,
                        score: score.as_f64(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        },
    )?;
    rules
        .iter()
        .enumerate()
        .map(|(j, rule)| {
            let per_rule = folds
                .iter()
                .map(|f| FoldPrediction {
                    index: f.index,
                    prediction: f.prediction[j],
                    degenerate: f.degenerate,
                })
                .collect();
            report(rule.name(), data, cfg.positive_class, per_rule)
        })
        .collect()
}

/// Leave-one-out run of whole-image SRC. The score is `ln(r_n / r_m)`.
pub fn crossval_src<T: Real>(
    data: &LabeledImages<T>,
    name: &str,
    solver: &SolverConfig,
    transform: InputTransform,
    positive: usize,
    opts: LoocvOptions,
) -> Result<EvalReport> {
    let k = data.class_names.len();
    if positive >= k {
        return Err(Error::UnknownClass(positive));
    }
    let folds = loocv(
        &data.labels,
        opts,
        |idx| {
            let (imgs, labels) = data.subset(idx);
            build_src_images(&imgs, &labels, k, solver.clone(), transform)
        },
        |model, i| {
            let d = classify_src_image(model, &data.images[i])?;
            Ok(Prediction {
                label: d.label,
                score: d.score(positive).as_f64(),
            })
        },
    )?;
    report(name, data, positive, folds)
}

/// Texture features of every image, one table row per image in dataset order.
pub fn extract_features<T: Real>(data: &LabeledImages<T>, cfg: &TextureConfig) -> Result<FeatureTable> {
    let vectors = data
        .images
        .par_iter()
        .zip(&data.paths)
        .map(|(img, path)| {
            extract_all(img, cfg).map_err(|e| Error::Sample {
                path: path.clone(),
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let names = vectors.first().map(|v| v.names.clone()).unwrap_or_default();
    let mut table = FeatureTable::new(names);
    for (v, path) in vectors.into_iter().zip(&data.paths) {
        for note in &v.flags {
            log::warn!("{path}: {note}");
        }
        if v.names != table.names {
            return Err(Error::Sample {
                path: path.clone(),
                source: Box::new(Error::Degenerate("feature names differ from the first image".into())),
            });
        }
        table.push(path.clone(), v.values.iter().map(|x| x.as_f64()).collect())?;
    }
    Ok(table)
}

/// Leave-one-out run of feature selection plus naive Bayes. Selection runs
/// inside every training fold. The score is `g_positive(x) − max_other g_i(x)`.
pub fn crossval_texture_nb<T: Real>(
    features: &FeatureMatrix<T>,
    paths: &[String],
    class_names: &[String],
    name: &str,
    selection: &SelectionConfig,
    positive: usize,
    opts: LoocvOptions,
) -> Result<EvalReport> {
    if positive >= features.num_classes() {
        return Err(Error::UnknownClass(positive));
    }
    if paths.len() != features.num_samples() {
        return Err(Error::DimensionMismatch {
            expected: features.num_samples(),
            found: paths.len(),
        });
    }
    selection.validate()?;
    let folds = loocv(
        features.labels(),
        opts,
        |idx| {
            let train = features.select_rows(idx);
            let columns = select_features(&train, selection)?;
            let model = fit_nb(&train.select_columns(&columns))?;
            Ok((columns, model))
        },
        |(columns, model), i| {
            let row = features.row(i);
            let x: Vec<T> = columns.iter().map(|&c| row[c]).collect();
            let d = classify_nb(model, &x)?;
            Ok(Prediction {
                label: d.label,
                score: d.score(positive).as_f64(),
            })
        },
    )?;
    EvalReport::from_folds(name, class_names.to_vec(), positive, paths, features.labels(), &folds)
}
