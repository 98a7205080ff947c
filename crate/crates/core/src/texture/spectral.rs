//! Low-frequency Fourier magnitudes and cosine coefficients.

use rustfft::num_complex::Complex;
use rustfft::FftDirection;

use super::filter::fft2;
use crate::error::{Error, Result};
use crate::imgio::GrayImage;
use crate::scalar::Real;

/// Side of the retained low-frequency block.
pub const LOW_BLOCK: usize = 8;

fn check_size<T: Real>(img: &GrayImage<T>) -> Result<()> {
    if img.width() < LOW_BLOCK || img.height() < LOW_BLOCK {
        return Err(Error::invalid(format!(
            "spectral features need at least {LOW_BLOCK}x{LOW_BLOCK} pixels"
        )));
    }
    Ok(())
}

/// Full 2-D DFT `F(k, l) = 1/(MN) Σ f(m, n) e^{-2πi(km/M + ln/N)}`, with `m`
/// the row index over `M` rows. Row-major `M × N`.
pub fn dft2<T: Real>(img: &GrayImage<T>) -> Vec<Complex<T>> {
    let (w, h) = (img.width(), img.height());
    let mut buf: Vec<Complex<T>> = img.pixels().iter().map(|&v| Complex::new(v, T::zero())).collect();
    fft2(&mut buf, w, h, FftDirection::Forward);
    let norm = T::one() / T::from_usize_lossy(w * h);
    for v in &mut buf {
        *v *= norm;
    }
    buf
}

/// `|F(k, l)|` for `k, l < 8`, ordered by `k` then `l`.
pub fn dft_features<T: Real>(img: &GrayImage<T>) -> Result<Vec<T>> {
    check_size(img)?;
    let f = dft2(img);
    let w = img.width();
    Ok((0..LOW_BLOCK)
        .flat_map(|k| (0..LOW_BLOCK).map(move |l| (k, l)))
        .map(|(k, l)| f[k * w + l].norm())
        .collect())
}

fn dct_basis<T: Real>(n: usize) -> Vec<T> {
    // row k holds α(k) cos(π (2m + 1) k / 2n) for m < n
    let mut b = Vec::with_capacity(LOW_BLOCK * n);
    for k in 0..LOW_BLOCK {
        let alpha = if k == 0 {
            (1.0 / n as f64).sqrt()
        } else {
            (2.0 / n as f64).sqrt()
        };
        for m in 0..n {
            let a = std::f64::consts::PI * (2 * m + 1) as f64 * k as f64 / (2 * n) as f64;
            b.push(T::lit(alpha * a.cos()));
        }
    }
    b
}

/// Orthonormal DCT-II coefficients `C(k, l)` for `k, l < 8`, ordered by `k` then `l`.
pub fn dct_features<T: Real>(img: &GrayImage<T>) -> Result<Vec<T>> {
    check_size(img)?;
    let (w, h) = (img.width(), img.height());
    let by = dct_basis::<T>(h);
    let bx = dct_basis::<T>(w);
    // project columns first: tmp[k][n] = Σ_m by[k][m] f[m][n]
    let mut tmp = vec![T::zero(); LOW_BLOCK * w];
    for k in 0..LOW_BLOCK {
        let dst = &mut tmp[k * w..(k + 1) * w];
        for m in 0..h {
            let coef = by[k * h + m];
            for (d, &v) in dst.iter_mut().zip(&img.pixels()[m * w..(m + 1) * w]) {
                *d += coef * v;
            }
        }
    }
    let mut out = Vec::with_capacity(LOW_BLOCK * LOW_BLOCK);
    for k in 0..LOW_BLOCK {
        for l in 0..LOW_BLOCK {
            let row = &tmp[k * w..(k + 1) * w];
            out.push(row.iter().zip(&bx[l * w..(l + 1) * w]).map(|(&a, &b)| a * b).sum());
        }
    }
    Ok(out)
}
