use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::GrayImage;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Fraction of vector entries retained by undersampling, e.g. `1/20`.
pub type KeepFraction = Ratio<u32>;

/// How contiguous runs of the vectorized image are reduced to one value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Undersampling {
    /// Mean over each run.
    #[default]
    Average,
    /// First element of each run.
    Decimate,
}

/// Parses a keep fraction written as `"1/20"` or `"1"`. Decimal notation is
/// not accepted, and the value must lie in (0, 1].
pub fn parse_fraction(s: &str) -> Result<KeepFraction> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: u32 = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad fraction numerator in {s:?}")))?;
    let den: u32 = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad fraction denominator in {s:?}")))?;
    if den == 0 {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    let keep = Ratio::new(num, den);
    if num == 0 || keep > Ratio::from_integer(1) {
        return Err(Error::Parse(format!("keep fraction {s:?} outside (0, 1]")));
    }
    Ok(keep)
}

fn round_ratio(r: Ratio<u64>) -> u64 {
    // half away from zero for non-negative values
    (r + Ratio::new(1, 2)).floor().to_integer()
}

/// Reduces the vectorized image to `round(l · keep)` entries, each summarizing a
/// contiguous run of `round(1 / keep)` pixels.
pub fn downsample<T: Real>(img: &GrayImage<T>, keep: KeepFraction, mode: Undersampling) -> Result<Vec<T>> {
    if *keep.numer() == 0 || keep > Ratio::from_integer(1) {
        return Err(Error::invalid(format!("keep fraction {keep} outside (0, 1]")));
    }
    let v = img.pixels();
    if keep == Ratio::from_integer(1) {
        return Ok(v.to_vec());
    }
    let l = v.len() as u64;
    let keep64 = Ratio::new(*keep.numer() as u64, *keep.denom() as u64);
    let out_len = round_ratio(keep64 * l).max(1) as usize;
    let run = round_ratio(keep64.recip()).max(1) as usize;
    let mut out = Vec::with_capacity(out_len);
    for i in 0..out_len {
        let start = (i * run).min(v.len() - 1);
        let end = ((i + 1) * run).min(v.len()).max(start + 1);
        let value = match mode {
            Undersampling::Average => v[start..end].iter().copied().sum::<T>() / T::from_usize_lossy(end - start),
            Undersampling::Decimate => v[start],
        };
        out.push(value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_are_averaged() {
        let img = GrayImage::new(4, 1, vec![0.1, 0.3, 0.5, 0.7]).unwrap();
        let out = downsample(&img, Ratio::new(1, 2), Undersampling::Average).unwrap();
        assert_eq!(out.len(), 2);
        assert!((out[0] - 0.2f64).abs() < 1e-15);
        assert!((out[1] - 0.6f64).abs() < 1e-15);
        let dec = downsample(&img, Ratio::new(1, 2), Undersampling::Decimate).unwrap();
        assert_eq!(dec, vec![0.1, 0.5]);
    }

    #[test]
    fn identity_fraction() {
        let img = GrayImage::from_fn(3, 3, |r, c| (r + c) as f64 / 4.0).unwrap();
        let out = downsample(&img, Ratio::from_integer(1), Undersampling::Average).unwrap();
        assert_eq!(out, img.to_vector());
    }

    #[test]
    fn roi_lengths() {
        let img = GrayImage::constant(400, 400, 0.5f64).unwrap();
        assert_eq!(
            downsample(&img, Ratio::new(1, 20), Undersampling::Average)
                .unwrap()
                .len(),
            8000
        );
        assert_eq!(
            downsample(&img, Ratio::new(1, 4), Undersampling::Average)
                .unwrap()
                .len(),
            40000
        );
        assert_eq!(
            downsample(&img, Ratio::new(1, 400), Undersampling::Average)
                .unwrap()
                .len(),
            400
        );
    }

    #[test]
    fn rejects_bad_fractions() {
        let img = GrayImage::constant(2, 2, 0.5f64).unwrap();
        assert!(downsample(&img, Ratio::new(0, 1), Undersampling::Average).is_err());
        assert!(downsample(&img, Ratio::new(3, 2), Undersampling::Average).is_err());
    }

    #[test]
    fn parse() {
        assert_eq!(parse_fraction("1/20").unwrap(), Ratio::new(1, 20));
        assert_eq!(parse_fraction(" 1 ").unwrap(), Ratio::from_integer(1));
        assert!(parse_fraction("1/0").is_err());
        assert!(parse_fraction("a/2").is_err());
        assert!(parse_fraction("2/1").is_err());
        assert!(parse_fraction("0/3").is_err());
        assert!(parse_fraction("0.25").is_err());
        assert_eq!(parse_fraction("2/40").unwrap(), Ratio::new(1, 20));
    }
}
