use super::GrayImage;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Non-overlapping tiling of an image into `block_width × block_height` blocks.
#[derive(Debug, Clone)]
pub struct BlockGrid<T> {
    pub block_width: usize,
    pub block_height: usize,
    /// Blocks per grid row.
    pub grid_cols: usize,
    /// Blocks per grid column.
    pub grid_rows: usize,
    /// Row-major over block origins.
    pub blocks: Vec<GrayImage<T>>,
}

impl<T> BlockGrid<T> {
    /// Number of blocks, `NB`.
    pub fn count(&self) -> usize {
        self.blocks.len()
    }
}

/// Splits `img` into `m × n` blocks (width × height). Pixels in trailing
/// partial rows or columns of blocks are discarded.
pub fn block_decompose<T: Real>(img: &GrayImage<T>, m: usize, n: usize) -> Result<BlockGrid<T>> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("block size must be positive"));
    }
    if m > img.width() || n > img.height() {
        return Err(Error::invalid(format!(
            "block {m}x{n} exceeds image {}x{}",
            img.width(),
            img.height()
        )));
    }
    let grid_cols = img.width() / m;
    let grid_rows = img.height() / n;
    let mut blocks = Vec::with_capacity(grid_cols * grid_rows);
    for br in 0..grid_rows {
        for bc in 0..grid_cols {
            let mut px = Vec::with_capacity(m * n);
            for r in 0..n {
                let row = br * n + r;
                let start = row * img.width() + bc * m;
                px.extend_from_slice(&img.pixels()[start..start + m]);
            }
            blocks.push(GrayImage::new(m, n, px)?);
        }
    }
    Ok(BlockGrid {
        block_width: m,
        block_height: n,
        grid_cols,
        grid_rows,
        blocks,
    })
}

/// Vectorized blocks without constructing intermediate images.
pub(crate) fn block_vectors<T: Real>(img: &GrayImage<T>, m: usize, n: usize) -> Result<Vec<Vec<T>>> {
    Ok(block_decompose(img, m, n)?
        .blocks
        .into_iter()
        .map(GrayImage::into_vector)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> GrayImage<f64> {
        let total = (w * h) as f64;
        GrayImage::from_fn(w, h, |r, c| (r * w + c) as f64 / total).unwrap()
    }

    #[test]
    fn block_count_400_by_25() {
        let img = GrayImage::constant(400, 400, 0.5f64).unwrap();
        assert_eq!(block_decompose(&img, 25, 25).unwrap().count(), 256);
        assert_eq!(block_decompose(&img, 400, 400).unwrap().count(), 1);
    }

    #[test]
    fn trailing_pixels_discarded() {
        let img = ramp(5, 5);
        let grid = block_decompose(&img, 2, 2).unwrap();
        assert_eq!(grid.count(), 4);
        let covered: Vec<f64> = grid.blocks.iter().flat_map(|b| b.to_vector()).collect();
        for r in 0..5 {
            for c in 0..5 {
                let present = covered.contains(&img.get(r, c));
                assert_eq!(present, r < 4 && c < 4, "pixel ({r},{c})");
            }
        }
    }

    #[test]
    fn block_order_is_row_major() {
        let img = ramp(4, 4);
        let grid = block_decompose(&img, 2, 2).unwrap();
        assert_eq!(grid.blocks[1].get(0, 0), img.get(0, 2));
        assert_eq!(grid.blocks[2].get(0, 0), img.get(2, 0));
        assert_eq!(grid.blocks[3].get(1, 1), img.get(3, 3));
    }

    #[test]
    fn errors() {
        let img = ramp(4, 4);
        assert!(block_decompose(&img, 0, 2).is_err());
        assert!(block_decompose(&img, 5, 2).is_err());
        assert!(block_decompose(&img, 2, 5).is_err());
    }
}
