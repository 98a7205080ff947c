//! Gabor filter bank evaluated by FFT convolution.

use rustfft::num_complex::Complex;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use super::filter::{fft2, Boundary};
use crate::error::{Error, Result};
use crate::imgio::{GrayImage, Plane};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct GaborConfig {
    pub scales: usize,
    pub orientations: usize,
    /// Wavelength at scale 0, in pixels.
    pub base_wavelength: f64,
    /// Wavelength ratio between consecutive scales.
    pub scale_factor: f64,
    /// Envelope σ as a multiple of the wavelength.
    pub sigma_per_wavelength: f64,
    pub aspect: f64,
    pub phase: f64,
}

impl Default for GaborConfig {
    fn default() -> Self {
        Self {
            scales: 4,
            orientations: 6,
            base_wavelength: 4.0,
            scale_factor: std::f64::consts::SQRT_2,
            sigma_per_wavelength: 0.56,
            aspect: 0.5,
            phase: 0.0,
        }
    }
}

/// Single filter parameters; θ is the direction of the normal to the stripes,
/// measured from the x (column) axis towards increasing rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborParams {
    pub wavelength: f64,
    pub theta: f64,
    pub phase: f64,
    pub sigma: f64,
    pub aspect: f64,
}

impl GaborParams {
    /// Kernel half-width covering three envelope deviations along both axes.
    pub fn half_size(&self) -> usize {
        (3.0 * self.sigma * 1f64.max(1.0 / self.aspect)).ceil() as usize
    }
}

impl GaborConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scales == 0 || self.orientations == 0 {
            return Err(Error::invalid("Gabor bank needs at least one scale and orientation"));
        }
        if !(self.base_wavelength > 0.0 && self.scale_factor > 0.0) {
            return Err(Error::invalid("Gabor wavelengths must be positive"));
        }
        if !(self.sigma_per_wavelength > 0.0 && self.aspect > 0.0) {
            return Err(Error::invalid("Gabor σ and γ must be positive"));
        }
        Ok(())
    }

    /// Filters in scale-major order.
    pub fn filters(&self) -> Vec<GaborParams> {
        let mut out = Vec::with_capacity(self.scales * self.orientations);
        for s in 0..self.scales {
            let wavelength = self.base_wavelength * self.scale_factor.powi(s as i32);
            for o in 0..self.orientations {
                out.push(GaborParams {
                    wavelength,
                    theta: std::f64::consts::PI * o as f64 / self.orientations as f64,
                    phase: self.phase,
                    sigma: self.sigma_per_wavelength * wavelength,
                    aspect: self.aspect,
                });
            }
        }
        out
    }
}

/// Complex kernel with the DC term removed from both parts, row-major
/// `(2h+1)²`, indexed by `(y + h, x + h)`.
pub fn gabor_kernel(p: &GaborParams) -> Vec<Complex<f64>> {
    let h = p.half_size() as isize;
    let side = (2 * h + 1) as usize;
    let (st, ct) = p.theta.sin_cos();
    let mut env = Vec::with_capacity(side * side);
    let mut k = Vec::with_capacity(side * side);
    for y in -h..=h {
        for x in -h..=h {
            let (x, y) = (x as f64, y as f64);
            let w = x * ct + y * st;
            let v = -x * st + y * ct;
            let e = (-(w * w + p.aspect * p.aspect * v * v) / (2.0 * p.sigma * p.sigma)).exp();
            let arg = 2.0 * std::f64::consts::PI * w / p.wavelength + p.phase;
            env.push(e);
            k.push(Complex::from_polar(e, arg));
        }
    }
    let env_sum: f64 = env.iter().sum();
    let k_sum: Complex<f64> = k.iter().sum();
    let shift = k_sum / env_sum;
    for (kv, e) in k.iter_mut().zip(&env) {
        *kv -= shift * *e;
    }
    k
}

#[derive(Debug, Clone)]
pub struct GaborResponse<T> {
    pub params: GaborParams,
    pub scale: usize,
    pub orientation: usize,
    pub magnitude: Plane<T>,
}

/// Response magnitude maps `|I ∗ g|` for every filter of the bank, each the
/// size of the input (symmetric boundary extension).
pub fn gabor_bank<T: Real>(img: &GrayImage<T>, cfg: &GaborConfig) -> Result<Vec<GaborResponse<T>>> {
    cfg.validate()?;
    let filters = cfg.filters();
    let (w, h) = (img.width(), img.height());
    let pad = filters.iter().map(GaborParams::half_size).max().unwrap_or(0);
    if 2 * pad + 1 > w.min(h) {
        return Err(Error::invalid(format!(
            "Gabor kernel of side {} exceeds the {}x{} image",
            2 * pad + 1,
            w,
            h
        )));
    }
    let (pw, ph) = (w + 2 * pad, h + 2 * pad);
    let b = Boundary::Symmetric;
    let mut spectrum: Vec<Complex<T>> = Vec::with_capacity(pw * ph);
    for r in 0..ph {
        let sr = b.index(r as isize - pad as isize, h);
        for c in 0..pw {
            let sc = b.index(c as isize - pad as isize, w);
            spectrum.push(Complex::new(img.get(sr, sc), T::zero()));
        }
    }
    fft2(&mut spectrum, pw, ph, FftDirection::Forward);
    let norm = T::one() / T::from_usize_lossy(pw * ph);
    let mut out = Vec::with_capacity(filters.len());
    for (i, p) in filters.iter().enumerate() {
        let kh = p.half_size() as isize;
        let side = (2 * kh + 1) as usize;
        let kern = gabor_kernel(p);
        let mut buf = vec![Complex::new(T::zero(), T::zero()); pw * ph];
        for (idx, kv) in kern.iter().enumerate() {
            let y = (idx / side) as isize - kh;
            let x = (idx % side) as isize - kh;
            let r = y.rem_euclid(ph as isize) as usize;
            let c = x.rem_euclid(pw as isize) as usize;
            buf[r * pw + c] = Complex::new(T::lit(kv.re), T::lit(kv.im));
        }
        fft2(&mut buf, pw, ph, FftDirection::Forward);
        for (a, s) in buf.iter_mut().zip(&spectrum) {
            *a *= *s;
        }
        fft2(&mut buf, pw, ph, FftDirection::Inverse);
        let mut mag = Plane::zeros(w, h);
        for r in 0..h {
            for c in 0..w {
                mag.data[r * w + c] = buf[(r + pad) * pw + c + pad].norm() * norm;
            }
        }
        out.push(GaborResponse {
            params: *p,
            scale: i / cfg.orientations,
            orientation: i % cfg.orientations,
            magnitude: mag,
        });
    }
    Ok(out)
}
