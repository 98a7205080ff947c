//! Two-class synthetic texture set: an oriented sinusoidal grating with noise
//! against isotropic Gaussian-blurred noise, both standardized to the same
//! mean and standard deviation.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::{save_png16, GrayImage, Plane};
use crate::scalar::Real;
use crate::texture::filter::{centered_taps, filter_cols, filter_rows};
use crate::texture::Boundary;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SynthConfig {
    pub size: usize,
    pub per_class: usize,
    pub seed: u64,
    /// Grating period along x, in pixels.
    pub period_x: f64,
    /// Grating period along y, in pixels.
    pub period_y: f64,
    /// Share of the grating image variance coming from white noise.
    pub noise_fraction: f64,
    /// Gaussian blur applied to the second class.
    pub blur_sigma: f64,
    pub mean: f64,
    pub std: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            size: 128,
            per_class: 20,
            seed: 7,
            period_x: 8.0,
            period_y: 16.0,
            noise_fraction: 0.02,
            blur_sigma: 3.0,
            mean: 0.5,
            std: 0.12,
        }
    }
}

pub const CLASS_NAMES: [&str; 2] = ["grating", "noise"];

#[derive(Debug, Clone)]
pub struct SynthDataset<T> {
    pub images: Vec<GrayImage<T>>,
    pub labels: Vec<usize>,
    pub names: Vec<String>,
}

fn standardize(v: &mut [f64], mean: f64, std: f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let s = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt();
    for x in v.iter_mut() {
        let z = if s > 0.0 { (*x - m) / s } else { 0.0 };
        *x = (mean + std * z).clamp(0.0, 1.0);
    }
}

fn white(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

fn unit_variance(v: &mut [f64]) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let s = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt();
    for x in v.iter_mut() {
        *x = (*x - m) / s;
    }
}

fn grating(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = cfg.size;
    let phase = rng.random::<f64>() * TAU;
    let mut g: Vec<f64> = (0..n * n)
        .map(|i| {
            let (r, c) = ((i / n) as f64, (i % n) as f64);
            (TAU * (c / cfg.period_x + r / cfg.period_y) + phase).sin()
        })
        .collect();
    unit_variance(&mut g);
    let mut noise = white(rng, n * n);
    unit_variance(&mut noise);
    let (a, b) = ((1.0 - cfg.noise_fraction).sqrt(), cfg.noise_fraction.sqrt());
    g.iter().zip(&noise).map(|(x, e)| a * x + b * e).collect()
}

fn blurred_noise(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = cfg.size;
    let plane = Plane {
        width: n,
        height: n,
        data: white(rng, n * n),
    };
    let radius = (3.0 * cfg.blur_sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * cfg.blur_sigma * cfg.blur_sigma)).exp())
        .collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    let taps = centered_taps(&k);
    filter_cols(
        &filter_rows(&plane, &taps, Boundary::Periodic),
        &taps,
        Boundary::Periodic,
    )
    .data
}

/// Generates `per_class` images of each class, alternating classes.
pub fn generate_synthetic<T: Real>(cfg: &SynthConfig) -> Result<SynthDataset<T>> {
    if cfg.size < 2 || cfg.per_class == 0 {
        return Err(Error::invalid(
            "synthetic set needs size ≥ 2 and at least one image per class",
        ));
    }
    if !(cfg.noise_fraction >= 0.0 && cfg.noise_fraction <= 1.0) || !(cfg.blur_sigma > 0.0) {
        return Err(Error::invalid(
            "noise fraction must lie in [0, 1] and blur sigma be positive",
        ));
    }
    if !(cfg.std > 0.0) || !(cfg.mean > 0.0 && cfg.mean < 1.0) {
        return Err(Error::invalid("mean must lie in (0, 1) and std be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = SynthDataset {
        images: Vec::with_capacity(2 * cfg.per_class),
        labels: Vec::with_capacity(2 * cfg.per_class),
        names: Vec::with_capacity(2 * cfg.per_class),
    };
    for i in 0..cfg.per_class {
        for class in 0..2 {
            let mut v = if class == 0 {
                grating(cfg, &mut rng)
            } else {
                blurred_noise(cfg, &mut rng)
            };
            standardize(&mut v, cfg.mean, cfg.std);
            let px = v.into_iter().map(T::lit).collect();
            out.images.push(GrayImage::new(cfg.size, cfg.size, px)?);
            out.labels.push(class);
            out.names.push(format!("{}_{i:03}.png", CLASS_NAMES[class]));
        }
    }
    Ok(out)
}

/// Writes the set as 16-bit PNGs plus `manifest.csv` into `dir`.
pub fn write_synthetic(cfg: &SynthConfig, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let set = generate_synthetic::<f64>(cfg)?;
    let mut manifest = String::from("path,label\n");
    for ((img, &label), name) in set.images.iter().zip(&set.labels).zip(&set.names) {
        save_png16(img, dir.join(name))?;
        manifest.push_str(&format!("{name},{}\n", CLASS_NAMES[label]));
    }
    let path = dir.join("manifest.csv");
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))
}
