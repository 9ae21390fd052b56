//! Rasters, PNG/PNM I/O, bilinear resampling, mean-pixel centering and
//! interpolated border synthesis.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::round_half_up;

/// Row-major, channel-interleaved raster of `f32` samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f32>,
    pub centered: bool,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height * channels {
            return Err(Error::DimMismatch(format!(
                "{}x{}x{} image needs {} samples, got {}",
                width,
                height,
                channels,
                width * height * channels,
                data.len()
            )));
        }
        Ok(Image { width, height, channels, data, centered: false })
    }

    /// Raw image with every pixel set to `pixel`.
    pub fn filled(width: usize, height: usize, pixel: &[f32]) -> Self {
        let mut data = Vec::with_capacity(width * height * pixel.len());
        for _ in 0..width * height {
            data.extend_from_slice(pixel);
        }
        Image { width, height, channels: pixel.len(), data, centered: false }
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        (y * self.width + x) * self.channels
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let i = self.index(x, y);
        &self.data[i..i + self.channels]
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[self.index(x, y) + c]
    }

    /// Copies `[x0, x0+w) x [y0, y0+h)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Image> {
        if x0 + w > self.width || y0 + h > self.height {
            return Err(Error::DimMismatch(format!(
                "crop {}x{} at ({},{}) exceeds {}x{} image",
                w, h, x0, y0, self.width, self.height
            )));
        }
        let c = self.channels;
        let mut data = Vec::with_capacity(w * h * c);
        for y in y0..y0 + h {
            let start = self.index(x0, y);
            data.extend_from_slice(&self.data[start..start + w * c]);
        }
        Ok(Image { width: w, height: h, channels: c, data, centered: self.centered })
    }

    /// Copies `src` into `self` with its top-left corner at `(x0, y0)`.
    pub fn blit(&mut self, src: &Image, x0: usize, y0: usize) -> Result<()> {
        if src.channels != self.channels {
            return Err(Error::ChannelMismatch { expected: self.channels, actual: src.channels });
        }
        if x0 + src.width > self.width || y0 + src.height > self.height {
            return Err(Error::DimMismatch(format!(
                "{}x{} blit at ({},{}) exceeds {}x{} canvas",
                src.width, src.height, x0, y0, self.width, self.height
            )));
        }
        let row = src.width * src.channels;
        for y in 0..src.height {
            let dst = self.index(x0, y0 + y);
            let s = src.index(0, y);
            self.data[dst..dst + row].copy_from_slice(&src.data[s..s + row]);
        }
        Ok(())
    }

    /// Replicates a single-channel image into three channels.
    pub fn to_rgb(&self) -> Image {
        if self.channels != 1 {
            return self.clone();
        }
        let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
        Image { width: self.width, height: self.height, channels: 3, data, centered: self.centered }
    }

    /// Extracts one channel as a single-channel image.
    pub fn channel(&self, c: usize) -> Image {
        let data = self.data.iter().skip(c).step_by(self.channels).copied().collect();
        Image { width: self.width, height: self.height, channels: 1, data, centered: self.centered }
    }
}

/// Per-channel mean used for centering and as canvas background.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeanPixel(pub Vec<f32>);

impl MeanPixel {
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("mean pixel needs at least one channel".into()));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=255.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!("mean component {v} outside [0,255]")));
        }
        Ok(MeanPixel(values))
    }

    pub fn zeros(channels: usize) -> Self {
        MeanPixel(vec![0.0; channels])
    }

    pub fn channels(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.0
    }
}

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Reads a PNG or binary PGM/PPM (P5/P6) file.
pub fn decode_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    if bytes.starts_with(PNG_MAGIC) {
        decode_png(path, &bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_pnm(&bytes).map_err(|reason| Error::CorruptFile { path: path.to_path_buf(), reason })
    } else {
        Err(Error::UnsupportedFormat(format!("{}: not PNG or binary PNM", path.display())))
    }
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<Image> {
    let corrupt = |e: image::ImageError| Error::CorruptFile {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png).map_err(corrupt)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray = matches!(
        img.color(),
        image::ColorType::L8 | image::ColorType::L16 | image::ColorType::La8 | image::ColorType::La16
    );
    if gray {
        let data = img.to_luma8().into_raw().into_iter().map(f32::from).collect();
        Image::new(w, h, 1, data)
    } else {
        let data = img.to_rgb8().into_raw().into_iter().map(f32::from).collect();
        Image::new(w, h, 3, data)
    }
}

fn decode_pnm(bytes: &[u8]) -> std::result::Result<Image, String> {
    let channels = if &bytes[..2] == b"P5" { 1 } else { 3 };
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // skip whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err("truncated header".into()),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(format!("expected number at byte {start}"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .unwrap()
            .parse()
            .map_err(|e| format!("bad header number: {e}"))?;
    }
    let [w, h, maxval] = fields;
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported maxval {maxval}"));
    }
    if w == 0 || h == 0 {
        return Err("zero image dimension".into());
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err("missing whitespace after header".into());
    }
    pos += 1;
    let n = w * h * channels;
    let body = bytes.get(pos..pos + n).ok_or_else(|| {
        format!("expected {} sample bytes, found {}", n, bytes.len().saturating_sub(pos))
    })?;
    let data = body.iter().map(|&b| f32::from(b)).collect();
    Image::new(w, h, channels, data).map_err(|e| e.to_string())
}

fn write_pnm_bytes(path: &Path, magic: &str, w: usize, h: usize, body: &[u8]) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    write!(f, "{magic}\n{w} {h}\n255\n")?;
    f.write_all(body)?;
    f.flush()?;
    Ok(())
}

/// Min-max normalizes samples to 0..=255. A degenerate range maps to 0.
pub fn normalize_to_u8(samples: &[f32]) -> Vec<u8> {
    let (lo, hi) = samples
        .iter()
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi.is_nan() || hi <= lo {
        return vec![0; samples.len()];
    }
    let range = f64::from(hi) - f64::from(lo);
    samples
        .iter()
        .map(|&v| round_half_up((f64::from(v) - f64::from(lo)) / range * 255.0).min(255) as u8)
        .collect()
}

/// Writes a single plane as an 8-bit binary PGM after min-max normalization.
pub fn encode_pgm(width: usize, height: usize, plane: &[f32], path: impl AsRef<Path>) -> Result<()> {
    if plane.len() != width * height {
        return Err(Error::DimMismatch(format!(
            "plane has {} samples, expected {}x{}",
            plane.len(),
            width,
            height
        )));
    }
    write_pnm_bytes(path.as_ref(), "P5", width, height, &normalize_to_u8(plane))
}

/// Writes a raw 1- or 3-channel image as P5/P6, rounding and clamping samples.
pub fn encode_pnm(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let magic = match img.channels {
        1 => "P5",
        3 => "P6",
        c => return Err(Error::UnsupportedFormat(format!("cannot write {c}-channel PNM"))),
    };
    let body: Vec<u8> = img
        .data
        .iter()
        .map(|&v| round_half_up(f64::from(v).clamp(0.0, 255.0)) as u8)
        .collect();
    write_pnm_bytes(path.as_ref(), magic, img.width, img.height, &body)
}

/// Bilinear resampling to `round(dim * scale)` on each axis.
pub fn resample_bilinear(img: &Image, scale: f64) -> Result<Image> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale must be positive, got {scale}")));
    }
    let w = round_half_up(img.width as f64 * scale);
    let h = round_half_up(img.height as f64 * scale);
    resample_to(img, w, h)
}

struct Tap {
    i0: usize,
    i1: usize,
    t: f64,
}

fn taps(src: usize, dst: usize) -> Vec<Tap> {
    let ratio = src as f64 / dst as f64;
    let last = (src - 1) as f64;
    (0..dst)
        .map(|x| {
            let s = ((x as f64 + 0.5) * ratio - 0.5).clamp(0.0, last);
            let i0 = s.floor() as usize;
            Tap { i0, i1: (i0 + 1).min(src - 1), t: s - i0 as f64 }
        })
        .collect()
}

/// Bilinear resampling to explicit output dimensions on a half-pixel grid.
pub fn resample_to(img: &Image, out_w: usize, out_h: usize) -> Result<Image> {
    if img.centered {
        return Err(Error::AlreadyCentered);
    }
    if out_w == 0 || out_h == 0 || img.width == 0 || img.height == 0 {
        return Err(Error::ZeroOutputDim { width: out_w, height: out_h });
    }
    let c = img.channels;
    let xs = taps(img.width, out_w);
    let ys = taps(img.height, out_h);
    let mut data = Vec::with_capacity(out_w * out_h * c);
    for ty in &ys {
        for tx in &xs {
            for ch in 0..c {
                let p = |x: usize, y: usize| f64::from(img.at(x, y, ch));
                let (a, b) = (p(tx.i0, ty.i0), p(tx.i1, ty.i0));
                let (d, e) = (p(tx.i0, ty.i1), p(tx.i1, ty.i1));
                let top = a + (b - a) * tx.t;
                let bottom = d + (e - d) * tx.t;
                data.push((top + (bottom - top) * ty.t) as f32);
            }
        }
    }
    Ok(Image { width: out_w, height: out_h, channels: c, data, centered: false })
}

/// Subtracts the per-channel mean from every sample.
pub fn center_image(img: &Image, mean: &MeanPixel) -> Result<Image> {
    if img.centered {
        return Err(Error::AlreadyCentered);
    }
    if mean.channels() != img.channels {
        return Err(Error::ChannelMismatch { expected: img.channels, actual: mean.channels() });
    }
    let m = mean.values();
    let data = img
        .data
        .chunks_exact(img.channels)
        .flat_map(|px| px.iter().zip(m).map(|(v, m)| v - m))
        .collect();
    Ok(Image { data, centered: true, ..img.clone() })
}

/// Grows the image by `border_px` on every side. A pad sample at depth `d`
/// (Chebyshev distance to the nearest image pixel) blends that edge pixel
/// toward the mean with weight `d / (border_px + 1)`.
pub fn pad_with_interpolated_border(img: &Image, border_px: usize, mean: &MeanPixel) -> Result<Image> {
    if img.centered {
        return Err(Error::AlreadyCentered);
    }
    if mean.channels() != img.channels {
        return Err(Error::ChannelMismatch { expected: img.channels, actual: mean.channels() });
    }
    if border_px == 0 {
        return Ok(img.clone());
    }
    let b = border_px as i64;
    let (w, h, c) = (img.width as i64, img.height as i64, img.channels);
    let (ow, oh) = (img.width + 2 * border_px, img.height + 2 * border_px);
    let denom = (border_px + 1) as f64;
    let m = mean.values();
    let mut data = Vec::with_capacity(ow * oh * c);
    for v in 0..oh as i64 {
        let y = v - b;
        let ny = y.clamp(0, h - 1);
        let dy = (y - ny).abs();
        for u in 0..ow as i64 {
            let x = u - b;
            let nx = x.clamp(0, w - 1);
            let dx = (x - nx).abs();
            let edge = img.pixel(nx as usize, ny as usize);
            let d = dx.max(dy);
            if d == 0 {
                data.extend_from_slice(edge);
            } else {
                let t = d as f64 / denom;
                for ch in 0..c {
                    let e = f64::from(edge[ch]);
                    data.push((e + (f64::from(m[ch]) - e) * t) as f32);
                }
            }
        }
    }
    Ok(Image { width: ow, height: oh, channels: c, data, centered: false })
}
