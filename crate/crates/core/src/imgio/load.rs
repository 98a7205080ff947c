use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};

use super::GrayImage;
use crate::error::{Error, Result};
use crate::scalar::Real;

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Loads an 8/16-bit grayscale PGM (P2/P5) or PNG, rescaled to `[0, 1]` by the
/// format's maximum value. Color inputs are rejected.
pub fn load_image<T: Real>(path: impl AsRef<Path>) -> Result<GrayImage<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let fmt_err = |reason: String| Error::ImageFormat {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        decode_pgm(&bytes).map_err(fmt_err)
    } else if bytes.starts_with(PNG_MAGIC) {
        decode_png(&bytes).map_err(fmt_err)
    } else if bytes.starts_with(b"P3") || bytes.starts_with(b"P6") {
        Err(fmt_err("color PPM images are not supported".into()))
    } else {
        Err(fmt_err("unrecognized image format (expected PGM or PNG)".into()))
    }
}

fn decode_png<T: Real>(bytes: &[u8]) -> std::result::Result<GrayImage<T>, String> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png).map_err(|e| e.to_string())?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let px: Vec<T> = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(|v| T::lit(v as f64 / 255.0)).collect(),
        DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(|v| T::lit(v as f64 / 65535.0)).collect(),
        other => {
            return Err(format!(
                "unsupported PNG color type {:?}; only 8/16-bit grayscale is accepted",
                other.color()
            ))
        }
    };
    GrayImage::new(w, h, px).map_err(|e| e.to_string())
}

struct PgmHeader<'a> {
    rest: &'a [u8],
}

impl<'a> PgmHeader<'a> {
    fn token(&mut self) -> std::result::Result<&'a str, String> {
        loop {
            while let Some((&b, tail)) = self.rest.split_first() {
                if b.is_ascii_whitespace() {
                    self.rest = tail;
                } else {
                    break;
                }
            }
            if self.rest.first() == Some(&b'#') {
                let end = self.rest.iter().position(|&b| b == b'\n').unwrap_or(self.rest.len());
                self.rest = &self.rest[end..];
                continue;
            }
            break;
        }
        let end = self
            .rest
            .iter()
            .position(|b| b.is_ascii_whitespace())
            .unwrap_or(self.rest.len());
        if end == 0 {
            return Err("truncated PGM header".into());
        }
        let (tok, tail) = self.rest.split_at(end);
        self.rest = tail;
        std::str::from_utf8(tok).map_err(|_| "non-ASCII PGM header".to_string())
    }

    fn number(&mut self) -> std::result::Result<u32, String> {
        let t = self.token()?;
        t.parse().map_err(|_| format!("bad PGM number {t:?}"))
    }
}

fn decode_pgm<T: Real>(bytes: &[u8]) -> std::result::Result<GrayImage<T>, String> {
    let mut hdr = PgmHeader { rest: bytes };
    let magic = hdr.token()?;
    let width = hdr.number()? as usize;
    let height = hdr.number()? as usize;
    let maxval = hdr.number()?;
    if maxval == 0 || maxval > 65535 {
        return Err(format!("unsupported PGM maxval {maxval}"));
    }
    let n = width * height;
    let scale = maxval as f64;
    let samples: Vec<u32> = match magic {
        "P5" => {
            // exactly one whitespace byte separates the header from the raster
            let data = hdr.rest.get(1..).ok_or("missing PGM raster")?;
            if maxval < 256 {
                if data.len() < n {
                    return Err("truncated PGM raster".into());
                }
                data[..n].iter().map(|&b| b as u32).collect()
            } else {
                if data.len() < 2 * n {
                    return Err("truncated PGM raster".into());
                }
                data[..2 * n]
                    .chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
                    .collect()
            }
        }
        "P2" => (0..n).map(|_| hdr.number()).collect::<std::result::Result<_, _>>()?,
        other => return Err(format!("unsupported PGM magic {other}")),
    };
    if let Some(v) = samples.iter().find(|&&v| v > maxval) {
        return Err(format!("sample {v} exceeds maxval {maxval}"));
    }
    let px = samples.into_iter().map(|v| T::lit(v as f64 / scale)).collect();
    GrayImage::new(width, height, px).map_err(|e| e.to_string())
}

/// Writes a 16-bit grayscale PNG, quantizing intensities to `round(v · 65535)`.
pub fn save_png16<T: Real>(img: &GrayImage<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let raw: Vec<u16> = img
        .pixels()
        .iter()
        .map(|&p| (p.as_f64() * 65535.0).round() as u16)
        .collect();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(img.width() as u32, img.height() as u32, raw).expect("buffer length matches dimensions");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::ImageFormat {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, bytes: &[u8]) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p).unwrap().write_all(bytes).unwrap();
        p
    }

    #[test]
    fn pgm_extremes() {
        let dir = tempfile::tempdir().unwrap();
        let mut white = b"P5\n2 2\n255\n".to_vec();
        white.extend_from_slice(&[255; 4]);
        let img: GrayImage<f64> = load_image(write(dir.path(), "w.pgm", &white)).unwrap();
        assert!(img.pixels().iter().all(|&p| p == 1.0));

        let black = b"P2\n# comment\n2 2\n255\n0 0\n0 0\n";
        let img: GrayImage<f64> = load_image(write(dir.path(), "b.pgm", black)).unwrap();
        assert!(img.pixels().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn pgm_sixteen_bit_and_custom_maxval() {
        let dir = tempfile::tempdir().unwrap();
        let mut bytes = b"P5 2 1 65535\n".to_vec();
        bytes.extend_from_slice(&32768u16.to_be_bytes());
        bytes.extend_from_slice(&65535u16.to_be_bytes());
        let img: GrayImage<f64> = load_image(write(dir.path(), "s.pgm", &bytes)).unwrap();
        assert!((img.get(0, 0) - 32768.0 / 65535.0).abs() < 1e-15);
        assert_eq!(img.get(0, 1), 1.0);

        let ascii = b"P2 2 1 1023 1023 0";
        let img: GrayImage<f64> = load_image(write(dir.path(), "m.pgm", ascii)).unwrap();
        assert_eq!(img.to_vector(), vec![1.0, 0.0]);
    }

    #[test]
    fn png16_half_intensity() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.png");
        let buf: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_raw(1, 1, vec![32768]).unwrap();
        buf.save(&p).unwrap();
        let img: GrayImage<f64> = load_image(&p).unwrap();
        // 32768 / 65535 = 0.500007629...
        assert!((img.get(0, 0) - 0.500_007_629_510_948_3).abs() < 1e-12);
    }

    #[test]
    fn color_png_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.png");
        let buf: ImageBuffer<image::Rgb<u8>, Vec<u8>> = ImageBuffer::from_raw(1, 1, vec![1, 2, 3]).unwrap();
        buf.save(&p).unwrap();
        let err = load_image::<f64>(&p).unwrap_err();
        assert!(err.to_string().contains("grayscale"), "{err}");
        assert!(load_image::<f64>(write(dir.path(), "x.ppm", b"P6 1 1 255\n\x01\x02\x03")).is_err());
    }

    #[test]
    fn missing_and_garbage() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_image::<f64>(dir.path().join("nope.pgm")),
            Err(Error::Io { .. })
        ));
        assert!(load_image::<f64>(write(dir.path(), "g.bin", b"hello")).is_err());
        assert!(load_image::<f64>(write(dir.path(), "t.pgm", b"P5 4 4 255\n\x00")).is_err());
    }

    #[test]
    fn png16_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::from_fn(3, 2, |r, c| (r * 3 + c) as f64 / 5.0).unwrap();
        let p = dir.path().join("r.png");
        save_png16(&img, &p).unwrap();
        let back: GrayImage<f64> = load_image(&p).unwrap();
        for (a, b) in img.pixels().iter().zip(back.pixels()) {
            assert!((a - b).abs() <= 0.5 / 65535.0 + 1e-15);
        }
    }
}
