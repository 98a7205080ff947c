use std::fs;
use std::path::{Path, PathBuf};

use bbsrc::bayes::{classify_nb, fit_nb, load_nb, save_nb};
use bbsrc::ensemble::{
    calibrate_tau, calibration_scores, fit_pds, load_model, pds, save_model, train_and_calibrate, DecisionFunction,
};
use bbsrc::eval::{compare_reports, EvalReport, LoocvOptions};
use bbsrc::featsel::{resolve_selection, select_features, write_selection};
use bbsrc::imgio::{load_image, load_manifest, DatasetManifest};
use bbsrc::pipeline::{crossval_ensemble, crossval_src, crossval_texture_nb, extract_features, load_dataset};
use bbsrc::src::{build_src_images, classify_src_image, load_src, save_src, InputTransform};
use bbsrc::synth::write_synthetic;
use bbsrc::texture::{extract_all, FeatureTable, TextureConfig};
use bbsrc::{Error, FeatureMatrix, GrayImage, LabeledImages, Result};
use serde::Serialize;

use crate::config::{io, Pipeline, RunConfig};

const PDS_CURVE_POINTS: usize = 101;

fn manifest(cfg: &RunConfig) -> Result<DatasetManifest> {
    load_manifest(cfg.manifest()?)
}

fn dataset(cfg: &RunConfig) -> Result<LabeledImages> {
    let m = manifest(cfg)?;
    m.require_two_classes()?;
    load_dataset(&m)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Parse(format!("{}: {e}", path.display()))
}

/// Lowercase directory name for a report, e.g. `SRC 1/4` → `src_1-4`.
fn slug(name: &str) -> String {
    name.chars()
        .map(|c| match c {
            '/' => '-',
            c if c.is_ascii_alphanumeric() || c == '-' => c.to_ascii_lowercase(),
            _ => '_',
        })
        .collect()
}

/// Labels for the table rows, matched to manifest entries by path.
fn table_labels(table: &FeatureTable, m: &DatasetManifest) -> Result<Vec<usize>> {
    table
        .paths
        .iter()
        .map(|p| {
            m.entries
                .iter()
                .find(|e| &e.path == p)
                .map(|e| e.class)
                .ok_or_else(|| Error::InvalidArgument(format!("feature row {p:?} is not in the manifest")))
        })
        .collect()
}

fn feature_table(cfg: &RunConfig, features: Option<&Path>) -> Result<(FeatureTable, DatasetManifest)> {
    let m = manifest(cfg)?;
    m.require_two_classes()?;
    let table = match features {
        Some(p) => FeatureTable::read_csv(p)?,
        None => extract_features(&load_dataset::<f64>(&m)?, &cfg.texture)?,
    };
    Ok((table, m))
}

fn feature_matrix(table: &FeatureTable, m: &DatasetManifest) -> Result<FeatureMatrix> {
    FeatureMatrix::from_table(table, table_labels(table, m)?, m.class_count())
}

pub fn synth(cfg: &RunConfig) -> Result<()> {
    write_synthetic(&cfg.synth, &cfg.output)?;
    cfg.write_to(&cfg.output)?;
    println!(
        "wrote {} images and manifest.csv to {}",
        2 * cfg.synth.per_class,
        cfg.output.display()
    );
    Ok(())
}

pub fn extract(cfg: &RunConfig) -> Result<()> {
    let m = manifest(cfg)?;
    let table = extract_features(&load_dataset::<f64>(&m)?, &cfg.texture)?;
    create_dir(&cfg.output)?;
    let path = cfg.output.join("features.csv");
    table.write_csv(&path)?;
    cfg.write_to(&cfg.output)?;
    println!(
        "{} samples x {} features -> {}",
        table.len(),
        table.names.len(),
        path.display()
    );
    Ok(())
}

pub fn select(cfg: &RunConfig, features: &Path) -> Result<()> {
    let table = FeatureTable::read_csv(features)?;
    let m = manifest(cfg)?;
    let data = feature_matrix(&table, &m)?;
    let chosen = select_features(&data, &cfg.selection)?;
    let names: Vec<String> = chosen.iter().map(|&i| data.names()[i].clone()).collect();
    create_dir(&cfg.output)?;
    let path = cfg.output.join("selected.txt");
    write_selection(&names, &path)?;
    cfg.write_to(&cfg.output)?;
    println!(
        "{} of {} features -> {}",
        names.len(),
        data.num_features(),
        path.display()
    );
    Ok(())
}

pub fn train(cfg: &RunConfig, features: Option<&Path>) -> Result<()> {
    let dir = cfg.output.join("model");
    create_dir(&dir)?;
    let classes = match cfg.pipeline {
        Pipeline::BlockEnsemble => {
            let data = dataset(cfg)?;
            let k = data.class_names.len();
            let model = train_and_calibrate(&data.images, &data.labels, k, cfg.ensemble.clone())?;
            save_model(&model, &dir)?;
            data.class_names
        }
        Pipeline::Src => {
            let data = dataset(cfg)?;
            let keep = cfg.src.fractions()?;
            if keep.len() > 1 {
                log::warn!("training SRC with the first fraction {} only", keep[0]);
            }
            let transform = InputTransform::Downsample {
                keep: keep[0],
                mode: cfg.src.mode,
            };
            let k = data.class_names.len();
            let model = build_src_images(&data.images, &data.labels, k, cfg.src.solver.clone(), transform)?;
            save_src(&model, &dir)?;
            data.class_names
        }
        Pipeline::TextureNb => {
            let (table, m) = feature_table(cfg, features)?;
            let data = feature_matrix(&table, &m)?;
            let chosen = select_features(&data, &cfg.selection)?;
            let model = fit_nb(&data.select_columns(&chosen))?;
            save_nb(&model, dir.join("nb.toml"))?;
            write_selection(model.feature_names(), dir.join("selected.txt"))?;
            let texture = toml::to_string(&cfg.texture).map_err(|e| Error::Parse(format!("texture config: {e}")))?;
            write_text(&dir.join("texture.toml"), &texture)?;
            m.classes.clone()
        }
    };
    write_text(&dir.join("classes.txt"), &(classes.join("\n") + "\n"))?;
    cfg.write_to(&cfg.output)?;
    println!("model -> {}", dir.display());
    Ok(())
}

enum Trained {
    Ensemble(bbsrc::BlockEnsembleModel, DecisionFunction),
    Src(bbsrc::SrcModel),
    Nb(bbsrc::NbModel, TextureConfig),
}

fn load_trained(dir: &Path, decision: Option<DecisionFunction>) -> Result<Trained> {
    if dir.join("nb.toml").is_file() {
        let path = dir.join("texture.toml");
        let text = fs::read_to_string(&path).map_err(|e| io(&path, e))?;
        let texture = toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Ok(Trained::Nb(load_nb(dir.join("nb.toml"))?, texture))
    } else if dir.join("src.toml").is_file() {
        Ok(Trained::Src(load_src(dir)?))
    } else if dir.join("model.toml").is_file() {
        let model = load_model(dir)?;
        let rule = decision.unwrap_or(model.config.decision);
        Ok(Trained::Ensemble(model, rule))
    } else {
        Err(Error::InvalidArgument(format!(
            "{} holds no trained model",
            dir.display()
        )))
    }
}

fn predict(trained: &Trained, img: &GrayImage, positive: usize) -> Result<(usize, f64)> {
    match trained {
        Trained::Ensemble(model, rule) => {
            let (label, score) = model.classify(img)?.decide(model, *rule)?;
            Ok((label, score))
        }
        Trained::Src(model) => {
            let d = classify_src_image(model, img)?;
            Ok((d.label, d.score(positive)))
        }
        Trained::Nb(model, texture) => {
            let fv = extract_all(img, texture)?;
            let columns = resolve_selection(&fv.names, model.feature_names())?;
            let x: Vec<f64> = columns.iter().map(|&c| fv.values[c]).collect();
            let d = classify_nb(model, &x)?;
            Ok((d.label, d.score(positive)))
        }
    }
}

pub fn classify(
    cfg: &RunConfig,
    model_dir: &Path,
    images: &[PathBuf],
    decision: Option<DecisionFunction>,
) -> Result<()> {
    let trained = load_trained(model_dir, decision)?;
    let classes_path = model_dir.join("classes.txt");
    let classes: Vec<String> = fs::read_to_string(&classes_path)
        .map_err(|e| io(&classes_path, e))?
        .lines()
        .map(str::to_string)
        .collect();
    let inputs: Vec<(String, PathBuf, Option<String>)> = if images.is_empty() {
        let m = manifest(cfg)?;
        m.entries
            .iter()
            .map(|e| (e.path.clone(), m.resolve(e), Some(e.label.clone())))
            .collect()
    } else {
        images
            .iter()
            .map(|p| (p.display().to_string(), p.clone(), None))
            .collect()
    };
    create_dir(&cfg.output)?;
    let out = cfg.output.join("predictions.csv");
    let mut w = csv::Writer::from_path(&out).map_err(|e| csv_error(&out, e))?;
    w.write_record(["path", "true_label", "predicted_label", "score"])
        .map_err(|e| csv_error(&out, e))?;
    for (name, path, truth) in inputs {
        let img = load_image(&path)?;
        let (label, score) = predict(&trained, &img, cfg.positive_class).map_err(|e| Error::Sample {
            path: name.clone(),
            source: Box::new(e),
        })?;
        let predicted = classes.get(label).cloned().unwrap_or_else(|| label.to_string());
        println!("{name}\t{predicted}\t{score}");
        w.write_record([name, truth.unwrap_or_default(), predicted, score.to_string()])
            .map_err(|e| csv_error(&out, e))?;
    }
    w.flush().map_err(|e| io(&out, e))?;
    Ok(())
}

fn print_reports(reports: &[EvalReport], out: &Path) -> Result<()> {
    println!("Method & TPR & TNR & ACC & AUC \\\\");
    for r in reports {
        r.write(out.join(slug(&r.name)))?;
        println!("{}", r.table_row());
        if !r.degenerate_folds.is_empty() {
            log::warn!("{}: single-class training folds {:?}", r.name, r.degenerate_folds);
        }
    }
    Ok(())
}

pub fn crossval(cfg: &RunConfig, features: Option<&Path>) -> Result<()> {
    let opts = LoocvOptions {
        allow_single_class_folds: cfg.loocv.allow_single_class_folds,
    };
    let reports = match cfg.pipeline {
        Pipeline::BlockEnsemble => crossval_ensemble(&dataset(cfg)?, &cfg.ensemble, opts)?,
        Pipeline::Src => {
            let data = dataset(cfg)?;
            cfg.src
                .fractions()?
                .into_iter()
                .map(|keep| {
                    let transform = InputTransform::Downsample {
                        keep,
                        mode: cfg.src.mode,
                    };
                    let name = format!("SRC {keep}");
                    crossval_src(&data, &name, &cfg.src.solver, transform, cfg.positive_class, opts)
                })
                .collect::<Result<Vec<_>>>()?
        }
        Pipeline::TextureNb => {
            let (table, m) = feature_table(cfg, features)?;
            let data = feature_matrix(&table, &m)?;
            let name = match cfg.selection.method {
                bbsrc::featsel::SelectionMethod::None => "NB",
                bbsrc::featsel::SelectionMethod::CfsBestFirst => "NB CFS-BF",
                bbsrc::featsel::SelectionMethod::CfsGenetic => "NB CFS-GA",
                bbsrc::featsel::SelectionMethod::InfoGain => "NB IG",
            };
            vec![crossval_texture_nb(
                &data,
                &table.paths,
                &m.classes,
                name,
                &cfg.selection,
                cfg.positive_class,
                opts,
            )?]
        }
    };
    create_dir(&cfg.output)?;
    print_reports(&reports, &cfg.output)?;
    cfg.write_to(&cfg.output)
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct PdsFile {
    slope: f64,
    center: f64,
    pds_min: f64,
    lls_min: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct CalibrationFile {
    tau: f64,
    separable: bool,
    multiple_crossings: bool,
    pds: PdsFile,
}

fn calibrate_scores(scores: &[f64], is_m: &[bool], pds_min: f64, dir: &Path) -> Result<f64> {
    create_dir(dir)?;
    let tc = calibrate_tau(scores, is_m)?;
    let lls_min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let lls_max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let p = fit_pds(tc.tau, lls_min, pds_min)?;

    let file = CalibrationFile {
        tau: tc.tau,
        separable: tc.separable,
        multiple_crossings: tc.multiple_crossings,
        pds: PdsFile {
            slope: p.slope,
            center: p.center,
            pds_min: p.pds_min,
            lls_min: p.lls_min,
        },
    };
    let text = toml::to_string(&file).map_err(|e| Error::Parse(format!("calibration: {e}")))?;
    write_text(&dir.join("calibration.toml"), &text)?;

    let mut curve = String::from("tau,tpr,tnr\n");
    for pt in &tc.curve {
        curve.push_str(&format!("{},{},{}\n", pt.tau, pt.tpr, pt.tnr));
    }
    write_text(&dir.join("tau_curve.csv"), &curve)?;

    let hi = lls_max.max(2.0 * tc.tau - lls_min);
    let mut sig = String::from("score,pds\n");
    for k in 0..PDS_CURVE_POINTS {
        let s = if k == 0 {
            lls_min
        } else {
            lls_min + (hi - lls_min) * k as f64 / (PDS_CURVE_POINTS - 1) as f64
        };
        sig.push_str(&format!("{s},{}\n", pds(s, &p)));
    }
    write_text(&dir.join("pds_curve.csv"), &sig)?;
    Ok(tc.tau)
}

fn read_scores(path: &Path) -> Result<(Vec<f64>, Vec<bool>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::InvalidArgument(format!("{}: missing column {name:?}", path.display())))
    };
    let (si, pi) = (col("score")?, col("positive")?);
    let mut scores = Vec::new();
    let mut is_m = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let bad = || Error::Parse(format!("{}: bad row {}", path.display(), line + 2));
        let score: f64 = rec.get(si).and_then(|s| s.trim().parse().ok()).ok_or_else(bad)?;
        let positive = match rec.get(pi).map(str::trim) {
            Some("1") | Some("true") => true,
            Some("0") | Some("false") => false,
            _ => return Err(bad()),
        };
        scores.push(score);
        is_m.push(positive);
    }
    Ok((scores, is_m))
}

pub fn calibrate(cfg: &RunConfig, scores: Option<&Path>, model: Option<&Path>) -> Result<()> {
    let pds_min = cfg.ensemble.pds_min;
    match (scores, model) {
        (Some(path), _) => {
            let (s, is_m) = read_scores(path)?;
            let tau = calibrate_scores(&s, &is_m, pds_min, &cfg.output)?;
            println!("tau = {tau}");
        }
        (None, Some(dir)) => {
            let model = load_model(dir)?;
            let data = dataset(cfg)?;
            let (r, s, is_m) = calibration_scores(&model, &data.images)?;
            for (name, scores) in [("BBLL-R", r), ("BBLL-S", s)] {
                let tau = calibrate_scores(&scores, &is_m, pds_min, &cfg.output.join(slug(name)))?;
                println!("{name}: tau = {tau}");
            }
        }
        (None, None) => {
            return Err(Error::InvalidArgument("calibrate needs --scores or --model".into()));
        }
    }
    cfg.write_to(&cfg.output)
}

pub fn compare(a: &Path, b: &Path) -> Result<()> {
    let (ra, rb) = (EvalReport::read(a)?, EvalReport::read(b)?);
    let d = compare_reports(&ra, &rb)?;
    println!("A: {} AUC = {:.2}", ra.name, 100.0 * d.auc_a);
    println!("B: {} AUC = {:.2}", rb.name, 100.0 * d.auc_b);
    println!("z = {:.4}", d.z);
    println!("p = {:.4}", d.p);
    println!("degenerate = {}", d.degenerate);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::slug;

    #[test]
    fn report_dirs() {
        assert_eq!(slug("SRC 1/4"), "src_1-4");
        assert_eq!(slug("BBLL-R"), "bbll-r");
        assert_eq!(slug("NB CFS-BF"), "nb_cfs-bf");
    }
}
