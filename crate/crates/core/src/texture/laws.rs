//! Laws texture energy masks.

use super::filter::{centered_taps, filter_cols, filter_rows, Boundary};
use super::stats::{subband_stats, SubbandStats};
use crate::error::{Error, Result};
use crate::imgio::{GrayImage, Plane};
use crate::scalar::Real;

pub const VECTORS: [(&str, [f64; 5]); 5] = [
    ("L5", [1.0, 4.0, 6.0, 4.0, 1.0]),
    ("E5", [-1.0, -2.0, 0.0, 2.0, 1.0]),
    ("S5", [-1.0, 0.0, 2.0, 0.0, -1.0]),
    ("W5", [-1.0, 2.0, 0.0, -2.0, 1.0]),
    ("R5", [1.0, -4.0, 6.0, -4.0, 1.0]),
];

/// Local intensity level below which the normalizing divisor is clamped.
const LEVEL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct LawsComponent<T> {
    /// Horizontal vector name followed by vertical, e.g. `E5L5`.
    pub name: String,
    pub map: Plane<T>,
    pub stats: SubbandStats<T>,
}

fn apply<T: Real>(p: &Plane<T>, horizontal: &[f64; 5], vertical: &[f64; 5]) -> Plane<T> {
    let hx: Vec<T> = horizontal.iter().map(|&v| T::lit(v)).collect();
    let vy: Vec<T> = vertical.iter().map(|&v| T::lit(v)).collect();
    let b = Boundary::Symmetric;
    filter_cols(&filter_rows(p, &centered_taps(&hx), b), &centered_taps(&vy), b)
}

/// Divides the image by its local L5L5 level (weights sum to 256), then
/// filters with the 24 remaining masks.
pub fn laws_features<T: Real>(img: &GrayImage<T>) -> Result<Vec<LawsComponent<T>>> {
    if img.width() < 5 || img.height() < 5 {
        return Err(Error::invalid("Laws masks need at least 5x5 pixels"));
    }
    let p = img.to_plane();
    let level = apply(&p, &VECTORS[0].1, &VECTORS[0].1);
    let floor = T::lit(LEVEL_FLOOR);
    let scale = T::lit(256.0);
    let normalized = Plane {
        width: p.width,
        height: p.height,
        data: p
            .data
            .iter()
            .zip(&level.data)
            .map(|(&v, &l)| v / (l / scale).max(floor))
            .collect(),
    };
    let mut out = Vec::with_capacity(24);
    for (hn, hv) in &VECTORS {
        for (vn, vv) in &VECTORS {
            if *hn == "L5" && *vn == "L5" {
                continue;
            }
            let map = apply(&normalized, hv, vv);
            let stats = subband_stats(&map.data);
            out.push(LawsComponent {
                name: format!("{hn}{vn}"),
                map,
                stats,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_four_components() {
        let img = GrayImage::from_fn(9, 9, |r, c| ((r + 2 * c) % 5) as f64 / 4.0).unwrap();
        let comps = laws_features(&img).unwrap();
        assert_eq!(comps.len(), 24);
        assert_eq!(comps.len() * 6, 144);
        assert!(comps.iter().all(|c| c.name != "L5L5"));
    }

    #[test]
    fn constant_is_zero() {
        let img = GrayImage::constant(12, 12, 0.42f64).unwrap();
        for c in laws_features(&img).unwrap() {
            assert!(c.map.data.iter().all(|&v| v.abs() < 1e-12), "{}", c.name);
            assert!(c.stats.mean.abs() < 1e-12);
        }
    }

    #[test]
    fn e5l5_localized_on_vertical_edge() {
        let img = GrayImage::from_fn(20, 20, |_, c| if c < 10 { 0.2 } else { 0.8 }).unwrap();
        let comps = laws_features(&img).unwrap();
        let e5l5 = comps.iter().find(|c| c.name == "E5L5").unwrap();
        for r in 0..20 {
            for c in 0..20 {
                let v: f64 = e5l5.map.get(r, c);
                // level window and E5 each reach 2 columns: influence spans columns 6..=13
                if !(6..=13).contains(&c) {
                    assert!(v.abs() < 1e-12, "({r},{c}) = {v}");
                }
            }
            assert!(e5l5.map.get(r, 9).abs() > 0.1f64);
        }
        // no vertical variation
        let l5e5 = comps.iter().find(|c| c.name == "L5E5").unwrap();
        assert!(l5e5.map.data.iter().all(|&v: &f64| v.abs() < 1e-12));
    }
}
