//! Separable filtering with boundary extension, and 2-D FFT helpers.

use rustfft::num_complex::Complex;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::imgio::Plane;
use crate::scalar::Real;

/// Boundary extension used by every convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Half-sample symmetric reflection: `x[-1] = x[0]`, `x[-2] = x[1]`.
    #[default]
    Symmetric,
    Periodic,
}

impl Boundary {
    #[inline]
    pub fn index(self, i: isize, n: usize) -> usize {
        let n = n as isize;
        match self {
            Boundary::Periodic => i.rem_euclid(n) as usize,
            Boundary::Symmetric => {
                let period = 2 * n;
                let m = i.rem_euclid(period);
                (if m < n { m } else { period - 1 - m }) as usize
            }
        }
    }
}

/// `out[c] = Σ w · in[c + offset]` along each row.
pub fn filter_rows<T: Real>(p: &Plane<T>, taps: &[(isize, T)], boundary: Boundary) -> Plane<T> {
    let mut out = Plane::zeros(p.width, p.height);
    for r in 0..p.height {
        let row = &p.data[r * p.width..(r + 1) * p.width];
        for c in 0..p.width {
            let mut acc = T::zero();
            for &(off, w) in taps {
                acc += w * row[boundary.index(c as isize + off, p.width)];
            }
            out.data[r * p.width + c] = acc;
        }
    }
    out
}

/// `out[r] = Σ w · in[r + offset]` along each column.
pub fn filter_cols<T: Real>(p: &Plane<T>, taps: &[(isize, T)], boundary: Boundary) -> Plane<T> {
    let mut out = Plane::zeros(p.width, p.height);
    for r in 0..p.height {
        for &(off, w) in taps {
            let src = boundary.index(r as isize + off, p.height);
            let src_row = &p.data[src * p.width..(src + 1) * p.width];
            let dst = &mut out.data[r * p.width..(r + 1) * p.width];
            for (d, &s) in dst.iter_mut().zip(src_row) {
                *d += w * s;
            }
        }
    }
    out
}

/// Centered odd-length kernel as offset taps.
pub fn centered_taps<T: Real>(k: &[T]) -> Vec<(isize, T)> {
    let half = (k.len() / 2) as isize;
    k.iter().enumerate().map(|(i, &w)| (i as isize - half, w)).collect()
}

/// In-place unnormalized 2-D FFT of a row-major `width × height` buffer.
pub fn fft2<T: Real>(buf: &mut [Complex<T>], width: usize, height: usize, direction: FftDirection) {
    let mut planner = FftPlanner::<T>::new();
    let row_fft = planner.plan_fft(width, direction);
    row_fft.process(buf);
    let col_fft = planner.plan_fft(height, direction);
    let mut col = vec![Complex::new(T::zero(), T::zero()); height];
    for c in 0..width {
        for r in 0..height {
            col[r] = buf[r * width + c];
        }
        col_fft.process(&mut col);
        for r in 0..height {
            buf[r * width + c] = col[r];
        }
    }
}
