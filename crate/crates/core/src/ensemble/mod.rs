//! Block-based ensembles of sparse classifiers.
//!
//! Every image is cut into non-overlapping blocks; block `j` of all training
//! images forms dictionary `D^j`. A test image is solved block by block and the
//! per-block results are fused by voting (BBMAP) or by averaged log-likelihood
//! ratios (BBLL-R on residuals, BBLL-S on coefficient mass).

mod calibrate;
mod fusion;
mod persist;

pub use calibrate::{calibrate_tau, fit_pds, pds, PdsParams, TauCalibration, TauPoint};
pub use fusion::{bbmap, classify_bbll, residual_lls, sparsity_lls, BbmapDecision, LlsScore};
pub use persist::{load_model, save_model};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::{block_vectors, GrayImage};
use crate::scalar::Real;
use crate::sparse::{solve_excluding, Dictionary, SolverConfig, SolverFlags};
use crate::src::{decide, stack_by_class, unit_vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionFunction {
    Bbmap,
    BbllR,
    #[default]
    BbllS,
}

impl DecisionFunction {
    pub const ALL: [DecisionFunction; 3] = [
        DecisionFunction::Bbmap,
        DecisionFunction::BbllR,
        DecisionFunction::BbllS,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DecisionFunction::Bbmap => "BBMAP",
            DecisionFunction::BbllR => "BBLL-R",
            DecisionFunction::BbllS => "BBLL-S",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct EnsembleConfig {
    pub block_width: usize,
    pub block_height: usize,
    pub solver: SolverConfig,
    pub decision: DecisionFunction,
    /// Class `m` of the log-likelihood scores; the other class is `n`.
    pub positive_class: usize,
    /// Negates BBLL-S so that more mass on class `n` scores positive.
    pub negated_sparsity_sign: bool,
    /// PDS value assigned to the smallest calibration score.
    pub pds_min: f64,
    /// Run nested leave-one-out calibration of τ and PDS after training.
    pub calibrate: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            block_width: 25,
            block_height: 25,
            solver: SolverConfig::default(),
            decision: DecisionFunction::default(),
            positive_class: 0,
            negated_sparsity_sign: false,
            pds_min: 0.05,
            calibrate: true,
        }
    }
}

impl EnsembleConfig {
    pub fn with_block(size: usize) -> Self {
        Self {
            block_width: size,
            block_height: size,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_width == 0 || self.block_height == 0 {
            return Err(Error::invalid("block size must be positive"));
        }
        if !(self.pds_min > 0.0 && self.pds_min < 0.5) {
            return Err(Error::invalid(format!(
                "pds_min must lie in (0, 0.5), got {}",
                self.pds_min
            )));
        }
        self.solver.validate()
    }
}

/// Threshold and sigmoid for one log-likelihood variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BbllCalibration<T> {
    pub tau: T,
    pub pds: Option<PdsParams<T>>,
    /// Training scores were perfectly separated; `tau` is the gap midpoint.
    pub separable: bool,
    pub multiple_crossings: bool,
}

impl<T: Real> Default for BbllCalibration<T> {
    fn default() -> Self {
        Self {
            tau: T::zero(),
            pds: None,
            separable: false,
            multiple_crossings: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlockEnsembleModel<T> {
    pub config: EnsembleConfig,
    pub image_width: usize,
    pub image_height: usize,
    pub num_classes: usize,
    /// One dictionary per block, row-major over the block grid.
    pub dictionaries: Vec<Dictionary<T>>,
    /// Training-sample index behind each column (shared by every block).
    pub column_sample: Vec<usize>,
    pub bbll_r: BbllCalibration<T>,
    pub bbll_s: BbllCalibration<T>,
}

/// Result of solving one block.
#[derive(Debug, Clone)]
pub struct BlockOutcome<T> {
    pub block: usize,
    pub x: Vec<T>,
    pub residuals: Vec<T>,
    /// `‖δ_i(x)‖₁` per class.
    pub masses: Vec<T>,
    pub label: usize,
    pub tie: bool,
    pub flags: SolverFlags,
}

#[derive(Debug)]
pub struct BlockSolve<T> {
    pub num_blocks: usize,
    pub outcomes: Vec<BlockOutcome<T>>,
    /// Blocks left out of fusion, with the reason.
    pub failures: Vec<(usize, Error)>,
}

/// Per-image output of every fusion rule.
#[derive(Debug, Clone)]
pub struct EnsembleDecision<T> {
    pub bbmap: BbmapDecision<T>,
    pub lls_r: Option<LlsScore<T>>,
    pub lls_s: Option<LlsScore<T>>,
    pub failed_blocks: Vec<usize>,
}

impl<T: Real> BlockEnsembleModel<T> {
    pub fn num_blocks(&self) -> usize {
        self.dictionaries.len()
    }

    /// Class `n` of the log-likelihood scores.
    pub fn negative_class(&self) -> Result<usize> {
        if self.num_classes != 2 {
            return Err(Error::invalid(format!(
                "log-likelihood fusion needs exactly two classes, model has {}",
                self.num_classes
            )));
        }
        Ok(1 - self.config.positive_class)
    }

    pub fn calibration(&self, decision: DecisionFunction) -> Option<&BbllCalibration<T>> {
        match decision {
            DecisionFunction::Bbmap => None,
            DecisionFunction::BbllR => Some(&self.bbll_r),
            DecisionFunction::BbllS => Some(&self.bbll_s),
        }
    }

    fn check_image(&self, img: &GrayImage<T>) -> Result<()> {
        if img.width() != self.image_width || img.height() != self.image_height {
            return Err(Error::invalid(format!(
                "image is {}x{}, model expects {}x{}",
                img.width(),
                img.height(),
                self.image_width,
                self.image_height
            )));
        }
        Ok(())
    }

    /// Fuses a block solve with every rule.
    pub fn fuse(&self, bs: &BlockSolve<T>) -> Result<EnsembleDecision<T>> {
        let bbmap = bbmap(bs, self.num_classes, self.config.positive_class)?;
        let (lls_r, lls_s) = match self.negative_class() {
            Ok(neg) => {
                let m = self.config.positive_class;
                (
                    Some(residual_lls(bs, m, neg)?),
                    Some(sparsity_lls(bs, m, neg, self.config.negated_sparsity_sign)?),
                )
            }
            Err(_) => (None, None),
        };
        Ok(EnsembleDecision {
            bbmap,
            lls_r,
            lls_s,
            failed_blocks: bs.failures.iter().map(|(b, _)| *b).collect(),
        })
    }

    pub fn classify(&self, img: &GrayImage<T>) -> Result<EnsembleDecision<T>> {
        self.fuse(&block_solve(self, img)?)
    }
}

impl<T: Real> EnsembleDecision<T> {
    /// Label and graded score (vote fraction or LLS) for one rule.
    pub fn decide(&self, model: &BlockEnsembleModel<T>, rule: DecisionFunction) -> Result<(usize, T)> {
        let missing = || Error::invalid("log-likelihood fusion needs exactly two classes");
        match rule {
            DecisionFunction::Bbmap => Ok((self.bbmap.label, self.bbmap.posterior[model.config.positive_class])),
            DecisionFunction::BbllR => {
                let s = self.lls_r.as_ref().ok_or_else(missing)?;
                Ok((classify_bbll(s, model.bbll_r.tau), s.value))
            }
            DecisionFunction::BbllS => {
                let s = self.lls_s.as_ref().ok_or_else(missing)?;
                Ok((classify_bbll(s, model.bbll_s.tau), s.value))
            }
        }
    }

    /// PDS of the rule's score, when that rule has a fitted sigmoid.
    pub fn probability(&self, model: &BlockEnsembleModel<T>, rule: DecisionFunction) -> Option<T> {
        let (score, cal) = match rule {
            DecisionFunction::Bbmap => return None,
            DecisionFunction::BbllR => (self.lls_r.as_ref()?, &model.bbll_r),
            DecisionFunction::BbllS => (self.lls_s.as_ref()?, &model.bbll_s),
        };
        cal.pds.as_ref().map(|p| pds(score.value, p))
    }
}

/// Builds one dictionary per block from the training images.
///
/// Calibration is not run here; see [`calibrate_model`].
pub fn train_block_ensemble<T: Real>(
    images: &[GrayImage<T>],
    labels: &[usize],
    num_classes: usize,
    config: EnsembleConfig,
) -> Result<BlockEnsembleModel<T>> {
    config.validate()?;
    if images.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: images.len(),
            found: labels.len(),
        });
    }
    if config.positive_class >= num_classes {
        return Err(Error::UnknownClass(config.positive_class));
    }
    let first = images.first().ok_or_else(|| Error::invalid("no training images"))?;
    let (w, h) = (first.width(), first.height());
    if let Some(bad) = images.iter().find(|im| im.width() != w || im.height() != h) {
        return Err(Error::invalid(format!(
            "training images differ in size: {}x{} vs {w}x{h}",
            bad.width(),
            bad.height()
        )));
    }
    let order = stack_by_class(labels, num_classes)?;
    let per_image = order
        .par_iter()
        .map(|&i| block_vectors(&images[i], config.block_width, config.block_height))
        .collect::<Result<Vec<_>>>()?;
    let nb = per_image[0].len();
    let column_class: Vec<usize> = order.iter().map(|&i| labels[i]).collect();
    let dictionaries = (0..nb)
        .into_par_iter()
        .map(|b| {
            let cols: Vec<Vec<T>> = per_image.iter().map(|blocks| blocks[b].clone()).collect();
            Dictionary::from_columns(&cols, &column_class, num_classes).map_err(|e| match e {
                Error::ZeroColumn { sample, .. } => Error::ZeroColumn {
                    sample: order[sample],
                    block: Some(b),
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockEnsembleModel {
        config,
        image_width: w,
        image_height: h,
        num_classes,
        dictionaries,
        column_sample: order,
        bbll_r: BbllCalibration::default(),
        bbll_s: BbllCalibration::default(),
    })
}

/// Trains and, if the config asks for it, calibrates.
pub fn train_and_calibrate<T: Real>(
    images: &[GrayImage<T>],
    labels: &[usize],
    num_classes: usize,
    config: EnsembleConfig,
) -> Result<BlockEnsembleModel<T>> {
    let mut model = train_block_ensemble(images, labels, num_classes, config)?;
    if model.config.calibrate && num_classes == 2 {
        calibrate_model(&mut model, images)?;
    }
    Ok(model)
}

fn solve_blocks<T: Real>(
    model: &BlockEnsembleModel<T>,
    img: &GrayImage<T>,
    excluded: &[usize],
) -> Result<BlockSolve<T>> {
    model.check_image(img)?;
    let vectors = block_vectors(img, model.config.block_width, model.config.block_height)?;
    if vectors.len() != model.dictionaries.len() {
        return Err(Error::DimensionMismatch {
            expected: model.dictionaries.len(),
            found: vectors.len(),
        });
    }
    let results: Vec<Result<BlockOutcome<T>>> = vectors
        .par_iter()
        .zip(&model.dictionaries)
        .enumerate()
        .map(|(b, (v, d))| {
            let y = unit_vector(v)?;
            let sol = solve_excluding(d, &y, &model.config.solver, excluded)?;
            let flags = sol.flags;
            let masses = d
                .class_columns()
                .iter()
                .map(|cols| cols.iter().fold(T::zero(), |a, &j| a + sol.x[j].abs()))
                .collect();
            let dec = decide(d, &y, sol);
            Ok(BlockOutcome {
                block: b,
                x: dec.solution.x,
                residuals: dec.residuals,
                masses,
                label: dec.label,
                tie: dec.tie,
                flags,
            })
        })
        .collect();
    let mut outcomes = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (b, r) in results.into_iter().enumerate() {
        match r {
            Ok(o) => outcomes.push(o),
            Err(e) => {
                log::warn!("block {b} excluded from fusion: {e}");
                failures.push((b, e));
            }
        }
    }
    if outcomes.is_empty() {
        return Err(Error::AllBlocksFailed);
    }
    Ok(BlockSolve {
        num_blocks: vectors.len(),
        outcomes,
        failures,
    })
}

/// Solves every block of `img` against its dictionary. Blocks whose solve
/// fails are reported in `failures` and left out of fusion.
pub fn block_solve<T: Real>(model: &BlockEnsembleModel<T>, img: &GrayImage<T>) -> Result<BlockSolve<T>> {
    solve_blocks(model, img, &[])
}

pub fn classify_bbmap<T: Real>(model: &BlockEnsembleModel<T>, img: &GrayImage<T>) -> Result<BbmapDecision<T>> {
    bbmap(
        &block_solve(model, img)?,
        model.num_classes,
        model.config.positive_class,
    )
}

pub fn lls_residual<T: Real>(model: &BlockEnsembleModel<T>, img: &GrayImage<T>) -> Result<LlsScore<T>> {
    let n = model.negative_class()?;
    residual_lls(&block_solve(model, img)?, model.config.positive_class, n)
}

pub fn lls_sparsity<T: Real>(model: &BlockEnsembleModel<T>, img: &GrayImage<T>) -> Result<LlsScore<T>> {
    let n = model.negative_class()?;
    sparsity_lls(
        &block_solve(model, img)?,
        model.config.positive_class,
        n,
        model.config.negated_sparsity_sign,
    )
}

/// Nested leave-one-out scores of the training images: image `i` is scored
/// with its own dictionary columns removed. `images` must be the training set
/// in the order it was passed to [`train_block_ensemble`].
pub fn calibration_scores<T: Real>(
    model: &BlockEnsembleModel<T>,
    images: &[GrayImage<T>],
) -> Result<(Vec<T>, Vec<T>, Vec<bool>)> {
    let m = model.config.positive_class;
    let n = model.negative_class()?;
    if images.len() != model.column_sample.len() {
        return Err(Error::DimensionMismatch {
            expected: model.column_sample.len(),
            found: images.len(),
        });
    }
    let mut is_m = vec![false; images.len()];
    for (col, &s) in model.column_sample.iter().enumerate() {
        is_m[s] = model.dictionaries[0].column_class()[col] == m;
    }
    let scored = images
        .iter()
        .enumerate()
        .map(|(i, img)| {
            let col = model
                .column_sample
                .iter()
                .position(|&s| s == i)
                .expect("every training sample owns a column");
            let bs = solve_blocks(model, img, &[col])?;
            Ok((
                residual_lls(&bs, m, n)?.value,
                sparsity_lls(&bs, m, n, model.config.negated_sparsity_sign)?.value,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (r, s) = scored.into_iter().unzip();
    Ok((r, s, is_m))
}

fn fit_variant<T: Real>(scores: &[T], is_m: &[bool], pds_min: f64, name: &str) -> BbllCalibration<T> {
    let tc = match calibrate_tau(scores, is_m) {
        Ok(tc) => tc,
        Err(e) => {
            log::warn!("{name}: {e}; keeping τ = 0");
            return BbllCalibration::default();
        }
    };
    let lls_min = scores.iter().copied().fold(T::infinity(), T::min);
    let pds = match fit_pds(tc.tau, lls_min, T::lit(pds_min)) {
        Ok(p) => Some(p),
        Err(e) => {
            log::warn!("{name}: {e}");
            None
        }
    };
    BbllCalibration {
        tau: tc.tau,
        pds,
        separable: tc.separable,
        multiple_crossings: tc.multiple_crossings,
    }
}

/// Fits τ* and PDS for both log-likelihood variants from nested
/// leave-one-out scores on the training images.
pub fn calibrate_model<T: Real>(model: &mut BlockEnsembleModel<T>, images: &[GrayImage<T>]) -> Result<()> {
    let (r, s, is_m) = calibration_scores(model, images)?;
    model.bbll_r = fit_variant(&r, &is_m, model.config.pds_min, "BBLL-R");
    model.bbll_s = fit_variant(&s, &is_m, model.config.pds_min, "BBLL-S");
    Ok(())
}
