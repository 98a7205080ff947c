use crate::error::{Error, Result};
use crate::imgio::GrayImage;
use crate::scalar::Real;

/// Neighbor offsets `(row, col)` in bit order b1…b8: clockwise from the top-left.
pub const NEIGHBORS: [(isize, isize); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1)];

/// Code of the interior pixel `(r, c)`; b1 is the most significant bit.
///
/// A bit is 0 when the center is ≥ the neighbor. `inverted` flips every bit.
pub fn lbp_code<T: Real>(img: &GrayImage<T>, r: usize, c: usize, inverted: bool) -> u8 {
    let center = img.get(r, c);
    let mut code = 0u8;
    for &(dr, dc) in &NEIGHBORS {
        let n = img.get((r as isize + dr) as usize, (c as isize + dc) as usize);
        let bit = (center < n) != inverted;
        code = (code << 1) | bit as u8;
    }
    code
}

/// Normalized 256-bin histogram of codes over interior pixels.
pub fn lbp_histogram<T: Real>(img: &GrayImage<T>, inverted: bool) -> Result<Vec<T>> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::invalid(format!("LBP needs at least 3x3 pixels, got {w}x{h}")));
    }
    let mut counts = [0u64; 256];
    for r in 1..h - 1 {
        for c in 1..w - 1 {
            counts[lbp_code(img, r, c, inverted) as usize] += 1;
        }
    }
    let total = T::from_usize_lossy((w - 2) * (h - 2));
    Ok(counts.iter().map(|&n| T::lit(n as f64) / total).collect())
}
