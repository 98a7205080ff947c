use serde::{Deserialize, Serialize};

use super::edge::edge_histogram;
use super::fractal::fractal_features;
use super::gabor::{gabor_bank, GaborConfig};
use super::glcm::{glcm, glcm_stats, horizontal_contrast, GlcmConfig};
use super::laws::laws_features;
use super::lbp::lbp_histogram;
use super::spectral::{dct_features, dft_features};
use super::stats::{subband_stats, SubbandStats};
use super::wavelet::{wavelet_frames, WaveletConfig};
use crate::error::{Error, Result};
use crate::imgio::{GrayImage, Plane};
use crate::scalar::Real;

/// Named feature values plus degeneracy notes collected during extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T> {
    pub names: Vec<String>,
    pub values: Vec<T>,
    /// Human-readable notes for families that hit a degenerate input.
    pub flags: Vec<String>,
}

impl<T: Real> FeatureVector<T> {
    pub fn new() -> Self {
        Self {
            names: Vec::new(),
            values: Vec::new(),
            flags: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn push(&mut self, name: impl Into<String>, value: T) {
        self.names.push(name.into());
        self.values.push(value);
    }

    pub fn flag(&mut self, note: impl Into<String>) {
        self.flags.push(note.into());
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    fn append(&mut self, other: FeatureVector<T>) {
        self.names.extend(other.names);
        self.values.extend(other.values);
        self.flags.extend(other.flags);
    }
}

impl<T: Real> Default for FeatureVector<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Which descriptor families to compute, and their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct TextureConfig {
    pub fractal: bool,
    pub wavelet: bool,
    pub gabor: bool,
    pub lbp: bool,
    pub dft: bool,
    pub dct: bool,
    pub laws: bool,
    pub edge: bool,
    pub glcm: bool,
    pub fractal_sets: usize,
    /// Use the conventional LBP bit (1 when the neighbor is ≥ the center).
    pub lbp_inverted: bool,
    pub edge_bins: usize,
    /// Gray levels used for the wavelet-subband contrast signature.
    pub contrast_levels: usize,
    pub wavelet_cfg: WaveletConfig,
    pub gabor_cfg: GaborConfig,
    pub glcm_cfg: GlcmConfig,
}

impl Default for TextureConfig {
    fn default() -> Self {
        Self {
            fractal: true,
            wavelet: true,
            gabor: true,
            lbp: true,
            dft: true,
            dct: true,
            laws: true,
            edge: true,
            glcm: true,
            fractal_sets: 8,
            lbp_inverted: false,
            edge_bins: 16,
            contrast_levels: 8,
            wavelet_cfg: WaveletConfig::default(),
            gabor_cfg: GaborConfig::default(),
            glcm_cfg: GlcmConfig::default(),
        }
    }
}

impl TextureConfig {
    /// Every family disabled; enable the wanted ones on the result.
    pub fn none() -> Self {
        Self {
            fractal: false,
            wavelet: false,
            gabor: false,
            lbp: false,
            dft: false,
            dct: false,
            laws: false,
            edge: false,
            glcm: false,
            ..Self::default()
        }
    }
}

fn push_stats<T: Real>(fv: &mut FeatureVector<T>, prefix: &str, s: &SubbandStats<T>, with_mean: bool) {
    for (name, v) in s.named() {
        if name == "mean" && !with_mean {
            continue;
        }
        fv.push(format!("{prefix}.{name}"), v);
    }
    if s.degenerate {
        fv.flag(format!("{prefix}: zero spread"));
    }
}

fn fractal_family<T: Real>(img: &GrayImage<T>, cfg: &TextureConfig) -> Result<FeatureVector<T>> {
    let f = fractal_features(img, cfg.fractal_sets)?;
    let mut fv = FeatureVector::new();
    for j in 0..cfg.fractal_sets {
        fv.push(format!("fractal.set{j}.dimension"), f.dimension[j]);
        fv.push(format!("fractal.set{j}.area"), f.area[j]);
        fv.push(format!("fractal.set{j}.mean_intensity"), f.mean_intensity[j]);
    }
    if f.degenerate_image {
        fv.flag("fractal: constant image");
    } else if !f.degenerate_sets.is_empty() {
        fv.flag(format!("fractal: degenerate sets {:?}", f.degenerate_sets));
    }
    Ok(fv)
}

fn wavelet_family<T: Real>(img: &GrayImage<T>, cfg: &TextureConfig) -> Result<FeatureVector<T>> {
    let frames = wavelet_frames(img, &cfg.wavelet_cfg)?;
    let mut fv = FeatureVector::new();
    let band = |fv: &mut FeatureVector<T>, name: String, p: &Plane<T>| {
        push_stats(fv, &name, &subband_stats(&p.data), false);
        fv.push(
            format!("{name}.contrast"),
            horizontal_contrast(&p.data, p.width, p.height, cfg.contrast_levels),
        );
    };
    for l in &frames.levels {
        band(&mut fv, format!("wavelet.L{}.HG", l.level), &l.hg);
        band(&mut fv, format!("wavelet.L{}.GH", l.level), &l.gh);
        band(&mut fv, format!("wavelet.L{}.GG", l.level), &l.gg);
    }
    let last = frames.levels.len();
    band(&mut fv, format!("wavelet.L{last}.HH"), frames.residual());
    Ok(fv)
}

fn gabor_family<T: Real>(img: &GrayImage<T>, cfg: &TextureConfig) -> Result<FeatureVector<T>> {
    let mut fv = FeatureVector::new();
    for m in gabor_bank(img, &cfg.gabor_cfg)? {
        let prefix = format!("gabor.s{}.o{}", m.scale, m.orientation);
        push_stats(&mut fv, &prefix, &subband_stats(&m.magnitude.data), true);
    }
    Ok(fv)
}

fn lbp_family<T: Real>(img: &GrayImage<T>, cfg: &TextureConfig) -> Result<FeatureVector<T>> {
    let mut fv = FeatureVector::new();
    let hist = lbp_histogram(img, cfg.lbp_inverted)?;
    if hist.iter().any(|&v| v == T::one()) {
        fv.flag("lbp: single code");
    }
    for (code, v) in hist.into_iter().enumerate() {
        fv.push(format!("lbp.{code:03}"), v);
    }
    Ok(fv)
}

fn low_block<T: Real>(family: &str, values: Vec<T>, constant: bool) -> FeatureVector<T> {
    let mut fv = FeatureVector::new();
    for (i, v) in values.into_iter().enumerate() {
        fv.push(format!("{family}.k{}.l{}", i / 8, i % 8), v);
    }
    if constant {
        fv.flag(format!("{family}: pure DC"));
    }
    fv
}

fn laws_family<T: Real>(img: &GrayImage<T>) -> Result<FeatureVector<T>> {
    let mut fv = FeatureVector::new();
    for c in laws_features(img)? {
        let s = c.stats;
        let prefix = format!("laws.{}", c.name);
        for (name, v) in [
            ("mean", s.mean),
            ("variance", s.variance),
            ("energy", s.energy),
            ("skewness", s.skewness),
            ("kurtosis", s.kurtosis),
            ("entropy", s.entropy),
        ] {
            fv.push(format!("{prefix}.{name}"), v);
        }
        if s.degenerate {
            fv.flag(format!("{prefix}: zero spread"));
        }
    }
    Ok(fv)
}

fn edge_family<T: Real>(img: &GrayImage<T>, cfg: &TextureConfig) -> Result<FeatureVector<T>> {
    let h = edge_histogram(img, cfg.edge_bins)?;
    let mut fv = FeatureVector::new();
    for (k, v) in h.bins.into_iter().enumerate() {
        fv.push(format!("edge.bin{k:02}"), v);
    }
    if h.flat {
        fv.flag("edge: zero gradient");
    }
    Ok(fv)
}

fn glcm_family<T: Real>(img: &GrayImage<T>, cfg: &TextureConfig) -> Result<FeatureVector<T>> {
    let mut fv = FeatureVector::new();
    for m in glcm(img.pixels(), img.width(), img.height(), &cfg.glcm_cfg)? {
        let s = glcm_stats(&m);
        let deg = m.offset.degrees();
        fv.push(format!("glcm.{deg}.contrast"), s.contrast);
        fv.push(format!("glcm.{deg}.correlation"), s.correlation);
        fv.push(format!("glcm.{deg}.energy"), s.energy);
        fv.push(format!("glcm.{deg}.homogeneity"), s.homogeneity);
        if s.correlation_undefined {
            fv.flag(format!("glcm.{deg}: correlation undefined"));
        }
    }
    Ok(fv)
}

/// Concatenates every enabled family, in the order fractal, wavelet, gabor,
/// lbp, dft, dct, laws, edge, glcm.
pub fn extract_all<T: Real>(img: &GrayImage<T>, cfg: &TextureConfig) -> Result<FeatureVector<T>> {
    let wrap = |family: &'static str| {
        move |e: Error| Error::Feature {
            family,
            source: Box::new(e),
        }
    };
    let constant = img.pixels().iter().all(|&v| v == img.pixels()[0]);
    let mut fv = FeatureVector::new();
    if cfg.fractal {
        fv.append(fractal_family(img, cfg).map_err(wrap("fractal"))?);
    }
    if cfg.wavelet {
        fv.append(wavelet_family(img, cfg).map_err(wrap("wavelet"))?);
    }
    if cfg.gabor {
        fv.append(gabor_family(img, cfg).map_err(wrap("gabor"))?);
    }
    if cfg.lbp {
        fv.append(lbp_family(img, cfg).map_err(wrap("lbp"))?);
    }
    if cfg.dft {
        fv.append(low_block("dft", dft_features(img).map_err(wrap("dft"))?, constant));
    }
    if cfg.dct {
        fv.append(low_block("dct", dct_features(img).map_err(wrap("dct"))?, constant));
    }
    if cfg.laws {
        fv.append(laws_family(img).map_err(wrap("laws"))?);
    }
    if cfg.edge {
        fv.append(edge_family(img, cfg).map_err(wrap("edge"))?);
    }
    if cfg.glcm {
        fv.append(glcm_family(img, cfg).map_err(wrap("glcm"))?);
    }
    if let Some(i) = fv.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Degenerate(format!("feature {} is not finite", fv.names[i])));
    }
    Ok(fv)
}
