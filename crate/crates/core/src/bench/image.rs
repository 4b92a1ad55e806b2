//! Grayscale images, dual fields, NetPBM I/O and test-image synthesis.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::rng::SplitMix64;

/// Row-major `n1 × n2` image; pixel `(i, j)` lives at `i·n2 + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageGray {
    pub n1: usize,
    pub n2: usize,
    pub pixels: Vec<f64>,
}

impl ImageGray {
    pub fn new(n1: usize, n2: usize, pixels: Vec<f64>) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidParameter(format!("empty image {n1}x{n2}")));
        }
        if pixels.len() != n1 * n2 {
            return Err(Error::Dimension { expected: n1 * n2, actual: pixels.len() });
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("image has non-finite pixels".into()));
        }
        Ok(Self { n1, n2, pixels })
    }

    pub fn filled(n1: usize, n2: usize, value: f64) -> Result<Self> {
        Self::new(n1, n2, vec![value; n1 * n2])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pixels[i * self.n2 + j]
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

/// A 2-vector per pixel, stored interleaved: `(p_{ij,0}, p_{ij,1})` at
/// `2(i·n2 + j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualField {
    pub n1: usize,
    pub n2: usize,
    pub values: Vec<f64>,
}

impl DualField {
    pub fn new(n1: usize, n2: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 2 * n1 * n2 {
            return Err(Error::Dimension { expected: 2 * n1 * n2, actual: values.len() });
        }
        Ok(Self { n1, n2, values })
    }

    /// Whether every per-pixel squared norm is at most `lambda`.
    pub fn is_feasible(&self, lambda: f64) -> bool {
        self.values
            .chunks_exact(2)
            .all(|p| p[0] * p[0] + p[1] * p[1] <= lambda)
    }
}

/// Reads a P2 (ASCII) or P5 (binary) grayscale NetPBM file, scaling pixels
/// to `[0, 1]` by the file's maxval.
pub fn pgm_read(path: impl AsRef<Path>) -> Result<ImageGray> {
    pgm_decode(&fs::read(path)?)
}

pub fn pgm_decode(bytes: &[u8]) -> Result<ImageGray> {
    let mut pos = 0usize;
    let magic = header_token(bytes, &mut pos)?;
    let binary = match magic.as_str() {
        "P2" => false,
        "P5" => true,
        m => return Err(Error::Format(format!("unsupported magic '{m}'"))),
    };
    let n2 = header_number(bytes, &mut pos, "width")?;
    let n1 = header_number(bytes, &mut pos, "height")?;
    let maxval = header_number(bytes, &mut pos, "maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("maxval {maxval} outside 1..=65535")));
    }
    let count = n1 * n2;
    let scale = 1.0 / maxval as f64;
    let raw: Vec<usize> = if binary {
        // exactly one whitespace byte separates maxval from the raster
        pos += 1;
        let width = if maxval < 256 { 1 } else { 2 };
        let payload = bytes.get(pos..).unwrap_or(&[]);
        if payload.len() < count * width {
            return Err(Error::Format(format!(
                "truncated raster: need {} bytes, have {}",
                count * width,
                payload.len()
            )));
        }
        if width == 1 {
            payload[..count].iter().map(|&b| b as usize).collect()
        } else {
            payload[..2 * count]
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]) as usize)
                .collect()
        }
    } else {
        let mut v = Vec::with_capacity(count);
        for _ in 0..count {
            v.push(header_number(bytes, &mut pos, "pixel")?);
        }
        v
    };
    if let Some(&bad) = raw.iter().find(|&&p| p > maxval) {
        return Err(Error::Format(format!("pixel {bad} exceeds maxval {maxval}")));
    }
    ImageGray::new(n1, n2, raw.into_iter().map(|p| p as f64 * scale).collect())
}

fn header_token(bytes: &[u8], pos: &mut usize) -> Result<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Format("unexpected end of file".into()));
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = header_token(bytes, pos)?;
    tok.parse()
        .map_err(|_| Error::Format(format!("bad {what} '{tok}'")))
}

/// Writes a binary P5 file with maxval 255, clamping to `[0, 1]`.
pub fn pgm_write(img: &ImageGray, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, pgm_encode(img))?;
    Ok(())
}

pub fn pgm_encode(img: &ImageGray) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.n2, img.n1).into_bytes();
    out.extend(
        img.pixels
            .iter()
            .map(|p| (p.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}

/// Piecewise-smooth pattern in `[0, 1]`: a diagonal ramp background with a
/// few seeded rectangles and a disc.
pub fn synth_test_image(n1: usize, n2: usize, seed: u64) -> Result<ImageGray> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidParameter(format!("empty image {n1}x{n2}")));
    }
    let mut rng = SplitMix64::new(seed);
    let mut px = vec![0.0; n1 * n2];
    for i in 0..n1 {
        for j in 0..n2 {
            px[i * n2 + j] = 0.1 + 0.3 * (i as f64 / n1 as f64 + j as f64 / n2 as f64) / 2.0;
        }
    }
    for _ in 0..4 {
        let (a, b) = (rng.next_f64(), rng.next_f64());
        let (h, w) = (0.15 + 0.3 * rng.next_f64(), 0.15 + 0.3 * rng.next_f64());
        let level = rng.next_f64();
        let (i0, j0) = ((a * n1 as f64) as usize, (b * n2 as f64) as usize);
        let (i1, j1) = (
            (i0 + (h * n1 as f64).ceil() as usize).min(n1),
            (j0 + (w * n2 as f64).ceil() as usize).min(n2),
        );
        for i in i0..i1 {
            for j in j0..j1 {
                px[i * n2 + j] = level;
            }
        }
    }
    let (ci, cj) = (n1 as f64 * 0.5, n2 as f64 * 0.5);
    let r = 0.2 * n1.min(n2) as f64;
    for i in 0..n1 {
        for j in 0..n2 {
            let d = ((i as f64 - ci).powi(2) + (j as f64 - cj).powi(2)).sqrt();
            if d <= r {
                // smooth dome
                px[i * n2 + j] = 0.5 + 0.5 * (1.0 - (d / r).powi(2));
            }
        }
    }
    // pin the range so every pattern spans at least [0.05, 0.95]
    px[0] = 0.0;
    px[n1 * n2 - 1] = 1.0;
    ImageGray::new(n1, n2, px)
}

/// Adds i.i.d. `N(0, std²)` noise drawn from [`SplitMix64`] seeded with `seed`.
pub fn add_gaussian_noise(img: &ImageGray, std: f64, seed: u64) -> Result<ImageGray> {
    if !(std >= 0.0 && std.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise std must be >= 0, got {std}")));
    }
    if std == 0.0 {
        return Ok(img.clone());
    }
    let mut rng = SplitMix64::new(seed);
    let pixels = img.pixels.iter().map(|p| p + std * rng.next_gaussian()).collect();
    ImageGray::new(img.n1, img.n2, pixels)
}
