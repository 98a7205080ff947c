//! Model directory layout:
//!
//! - `model.toml`: configuration, image size, column labels and calibration.
//! - `block_NNNN.bin`: the unit-norm atoms of block `NNNN`.
//! - `norms.bin`: raw column norms, one row per block.
//!
//! Binary matrices are a little-endian `u64` row count and `u64` column count
//! followed by the entries as row-major little-endian `f64`. A block file has
//! one row per pixel and one column per atom.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BbllCalibration, BlockEnsembleModel, EnsembleConfig, PdsParams};
use crate::binio::{read_matrix, write_matrix};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sparse::Dictionary;

const FORMAT: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct PdsFile {
    slope: f64,
    center: f64,
    pds_min: f64,
    lls_min: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct CalibrationFile {
    tau: f64,
    separable: bool,
    multiple_crossings: bool,
    pds: Option<PdsFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct ModelFile {
    format: u32,
    image_width: usize,
    image_height: usize,
    num_classes: usize,
    num_blocks: usize,
    column_class: Vec<usize>,
    column_sample: Vec<usize>,
    config: EnsembleConfig,
    bbll_r: CalibrationFile,
    bbll_s: CalibrationFile,
}

fn to_file<T: Real>(c: &BbllCalibration<T>) -> CalibrationFile {
    CalibrationFile {
        tau: c.tau.as_f64(),
        separable: c.separable,
        multiple_crossings: c.multiple_crossings,
        pds: c.pds.map(|p| PdsFile {
            slope: p.slope.as_f64(),
            center: p.center.as_f64(),
            pds_min: p.pds_min.as_f64(),
            lls_min: p.lls_min.as_f64(),
        }),
    }
}

fn from_file<T: Real>(c: &CalibrationFile) -> BbllCalibration<T> {
    BbllCalibration {
        tau: T::lit(c.tau),
        separable: c.separable,
        multiple_crossings: c.multiple_crossings,
        pds: c.pds.as_ref().map(|p| PdsParams {
            slope: T::lit(p.slope),
            center: T::lit(p.center),
            pds_min: T::lit(p.pds_min),
            lls_min: T::lit(p.lls_min),
        }),
    }
}

fn block_file(dir: &Path, b: usize) -> std::path::PathBuf {
    dir.join(format!("block_{b:04}.bin"))
}

pub fn save_model<T: Real>(model: &BlockEnsembleModel<T>, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = ModelFile {
        format: FORMAT,
        image_width: model.image_width,
        image_height: model.image_height,
        num_classes: model.num_classes,
        num_blocks: model.num_blocks(),
        column_class: model.dictionaries[0].column_class().to_vec(),
        column_sample: model.column_sample.clone(),
        config: model.config.clone(),
        bbll_r: to_file(&model.bbll_r),
        bbll_s: to_file(&model.bbll_s),
    };
    let text = toml::to_string(&meta).map_err(|e| Error::Parse(format!("model metadata: {e}")))?;
    let meta_path = dir.join("model.toml");
    fs::write(&meta_path, text).map_err(|e| Error::io(&meta_path, e))?;
    for (b, d) in model.dictionaries.iter().enumerate() {
        let (rows, cols) = (d.rows(), d.cols());
        let data = (0..rows).flat_map(|r| (0..cols).map(move |c| d.atom(c)[r].as_f64()));
        write_matrix(&block_file(dir, b), rows, cols, data)?;
    }
    let s = model.column_sample.len();
    let norms = model
        .dictionaries
        .iter()
        .flat_map(|d| d.norms().iter().map(|v| v.as_f64()));
    write_matrix(&dir.join("norms.bin"), model.num_blocks(), s, norms)
}

pub fn load_model<T: Real>(dir: impl AsRef<Path>) -> Result<BlockEnsembleModel<T>> {
    let dir = dir.as_ref();
    let meta_path = dir.join("model.toml");
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: ModelFile = toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", meta_path.display())))?;
    if meta.format != FORMAT {
        return Err(Error::Parse(format!(
            "{}: unsupported model format {}",
            meta_path.display(),
            meta.format
        )));
    }
    let s = meta.column_class.len();
    if meta.column_sample.len() != s || meta.num_blocks == 0 {
        return Err(Error::Parse(format!(
            "{}: inconsistent column metadata",
            meta_path.display()
        )));
    }
    let norms_path = dir.join("norms.bin");
    let (nr, nc, norms) = read_matrix(&norms_path)?;
    if nr != meta.num_blocks || nc != s {
        return Err(Error::Parse(format!(
            "{}: expected {}x{s}, found {nr}x{nc}",
            norms_path.display(),
            meta.num_blocks
        )));
    }
    let mut dictionaries = Vec::with_capacity(meta.num_blocks);
    for b in 0..meta.num_blocks {
        let path = block_file(dir, b);
        let (rows, cols, data) = read_matrix(&path)?;
        if cols != s || rows != meta.config.block_width * meta.config.block_height {
            return Err(Error::Parse(format!(
                "{}: unexpected size {rows}x{cols}",
                path.display()
            )));
        }
        let mut atoms = vec![T::zero(); rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                atoms[c * rows + r] = T::lit(data[r * cols + c]);
            }
        }
        let block_norms = norms[b * s..(b + 1) * s].iter().map(|&v| T::lit(v)).collect();
        let d = Dictionary::from_atoms(rows, atoms, block_norms, &meta.column_class, meta.num_classes)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        dictionaries.push(d);
    }
    Ok(BlockEnsembleModel {
        config: meta.config,
        image_width: meta.image_width,
        image_height: meta.image_height,
        num_classes: meta.num_classes,
        dictionaries,
        column_sample: meta.column_sample,
        bbll_r: from_file(&meta.bbll_r),
        bbll_s: from_file(&meta.bbll_s),
    })
}
