//! Translationally-invariant convolutional feature extractor.
//!
//! Every layer runs in valid mode (no implicit padding) and every output
//! cell is accumulated in the same fixed order: bias first, then input
//! channel, kernel row, kernel column. A cell's value therefore depends
//! only on the pixels of its receptive field, bit for bit, wherever the
//! field sits in the input.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{derive_net_geometry, BoxPx, NetGeometry};
use crate::imaging::Image;

#[derive(Clone, Debug, PartialEq)]
pub enum LayerSpec {
    Conv {
        kernel: usize,
        stride: usize,
        out_channels: usize,
        /// `out x in x kernel x kernel`, row-major.
        weights: Vec<f32>,
        bias: Vec<f32>,
    },
    Relu,
    MaxPool {
        kernel: usize,
        stride: usize,
    },
}

impl LayerSpec {
    /// Spatial `(kernel, stride)`, if the layer has one.
    pub fn window(&self) -> Option<(usize, usize)> {
        match *self {
            LayerSpec::Conv { kernel, stride, .. } | LayerSpec::MaxPool { kernel, stride } => {
                Some((kernel, stride))
            }
            LayerSpec::Relu => None,
        }
    }

    fn header(&self) -> LayerHeader {
        match *self {
            LayerSpec::Conv { kernel, stride, out_channels, .. } => {
                LayerHeader::Conv { kernel, stride, out_channels }
            }
            LayerSpec::Relu => LayerHeader::Relu,
            LayerSpec::MaxPool { kernel, stride } => LayerHeader::MaxPool { kernel, stride },
        }
    }
}

/// Weight-free layer description; weights are regenerated from the seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LayerHeader {
    Conv { kernel: usize, stride: usize, out_channels: usize },
    Relu,
    #[serde(rename = "maxpool")]
    MaxPool { kernel: usize, stride: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetHeader {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub seed: u64,
    pub input_channels: usize,
    pub layers: Vec<LayerHeader>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvNetSpec {
    pub layers: Vec<LayerSpec>,
    pub input_channels: usize,
    pub seed: u64,
    pub preset: Option<String>,
}

impl ConvNetSpec {
    pub fn new(input_channels: usize, layers: Vec<LayerSpec>, seed: u64) -> Result<Self> {
        let spec = ConvNetSpec { layers, input_channels, seed, preset: None };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.layers.is_empty() {
            return bad("network needs at least one layer".into());
        }
        if self.input_channels == 0 {
            return bad("input_channels must be >= 1".into());
        }
        let mut channels = self.input_channels;
        for (i, layer) in self.layers.iter().enumerate() {
            if let Some((k, s)) = layer.window() {
                if k == 0 || s == 0 {
                    return bad(format!("layer {i}: kernel and stride must be >= 1"));
                }
            }
            if let LayerSpec::Conv { kernel, out_channels, weights, bias, .. } = layer {
                if *out_channels == 0 {
                    return bad(format!("layer {i}: out_channels must be >= 1"));
                }
                let expected = out_channels * channels * kernel * kernel;
                if weights.len() != expected {
                    return bad(format!("layer {i}: {} weights, expected {expected}", weights.len()));
                }
                if bias.len() != *out_channels {
                    return bad(format!("layer {i}: {} biases, expected {out_channels}", bias.len()));
                }
                channels = *out_channels;
            }
        }
        Ok(())
    }

    /// Builds a network from a header, drawing conv weights from a seeded
    /// normal distribution. Each output channel's weights are rescaled to
    /// unit L2 norm so unit-variance i.i.d. inputs give unit-variance
    /// pre-activation outputs. Biases are zero.
    pub fn from_header(header: &NetHeader) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(header.seed);
        let mut channels = header.input_channels;
        let mut layers = Vec::with_capacity(header.layers.len());
        for lh in &header.layers {
            layers.push(match *lh {
                LayerHeader::Conv { kernel, stride, out_channels } => {
                    let fan_in = channels * kernel * kernel;
                    let mut weights = Vec::with_capacity(out_channels * fan_in);
                    for _ in 0..out_channels {
                        let w: Vec<f64> =
                            (0..fan_in).map(|_| StandardNormal.sample(&mut rng)).collect();
                        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                        weights.extend(w.iter().map(|v| (v / norm) as f32));
                    }
                    channels = out_channels;
                    LayerSpec::Conv {
                        kernel,
                        stride,
                        out_channels,
                        weights,
                        bias: vec![0.0; out_channels],
                    }
                }
                LayerHeader::Relu => LayerSpec::Relu,
                LayerHeader::MaxPool { kernel, stride } => LayerSpec::MaxPool { kernel, stride },
            });
        }
        let spec = ConvNetSpec {
            layers,
            input_channels: header.input_channels,
            seed: header.seed,
            preset: header.preset.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn header(&self) -> NetHeader {
        NetHeader {
            preset: self.preset.clone(),
            seed: self.seed,
            input_channels: self.input_channels,
            layers: self.layers.iter().map(LayerSpec::header).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.header())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_header(&serde_json::from_str(s)?)
    }

    pub fn geometry(&self) -> NetGeometry {
        derive_net_geometry(self)
    }

    pub fn output_channels(&self) -> usize {
        self.layers
            .iter()
            .rev()
            .find_map(|l| match l {
                LayerSpec::Conv { out_channels, .. } => Some(*out_channels),
                _ => None,
            })
            .unwrap_or(self.input_channels)
    }

    /// Short identifier, e.g. `tiny@7` or `custom@0`.
    pub fn id(&self) -> String {
        format!("{}@{}", self.preset.as_deref().unwrap_or("custom"), self.seed)
    }
}

pub const PRESETS: [&str; 3] = ["tiny", "small", "stride16"];

pub fn preset_header(preset: &str, seed: u64) -> Result<NetHeader> {
    use LayerHeader::*;
    let layers = match preset {
        "tiny" => vec![Conv { kernel: 5, stride: 2, out_channels: 8 }, Relu, MaxPool { kernel: 2, stride: 2 }],
        "small" => vec![
            Conv { kernel: 7, stride: 2, out_channels: 16 },
            Relu,
            MaxPool { kernel: 3, stride: 2 },
            Conv { kernel: 3, stride: 1, out_channels: 32 },
            Relu,
        ],
        "stride16" => vec![
            Conv { kernel: 7, stride: 2, out_channels: 16 },
            Relu,
            MaxPool { kernel: 3, stride: 2 },
            Conv { kernel: 5, stride: 2, out_channels: 32 },
            Relu,
            MaxPool { kernel: 3, stride: 2 },
            Conv { kernel: 3, stride: 1, out_channels: 64 },
            Relu,
        ],
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(NetHeader { preset: Some(preset.to_string()), seed, input_channels: 3, layers })
}

/// Named desk-scale network with deterministic weights.
pub fn make_toy_net(preset: &str, seed: u64) -> Result<ConvNetSpec> {
    ConvNetSpec::from_header(&preset_header(preset, seed)?)
}

/// Dense output of a forward pass, row-major and channel-interleaved.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

impl FeatureMap {
    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        FeatureMap { width, height, channels, data: vec![0.0; width * height * channels] }
    }

    /// Feature vector of cell `(x, y)`.
    pub fn cell(&self, x: usize, y: usize) -> &[f32] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    /// Copies the cells of `b` (cell coordinates).
    pub fn crop(&self, b: &BoxPx) -> Result<FeatureMap> {
        let inside = !b.is_empty()
            && b.x0 >= 0
            && b.y0 >= 0
            && b.x1 as usize <= self.width
            && b.y1 as usize <= self.height;
        if !inside {
            return Err(Error::DimMismatch(format!(
                "crop {:?} outside {}x{} feature map",
                b.as_array(),
                self.width,
                self.height
            )));
        }
        let (w, h) = (b.width() as usize, b.height() as usize);
        let c = self.channels;
        let mut data = Vec::with_capacity(w * h * c);
        for y in b.y0 as usize..b.y1 as usize {
            let start = (y * self.width + b.x0 as usize) * c;
            data.extend_from_slice(&self.data[start..start + w * c]);
        }
        Ok(FeatureMap { width: w, height: h, channels: c, data })
    }

    /// Per-cell sum over channels.
    pub fn channel_sum(&self) -> Vec<f32> {
        self.data.chunks_exact(self.channels).map(|v| v.iter().sum()).collect()
    }
}

struct Tensor {
    w: usize,
    h: usize,
    c: usize,
    data: Vec<f32>,
}

fn conv(x: &Tensor, kernel: usize, stride: usize, oc: usize, weights: &[f32], bias: &[f32]) -> Tensor {
    let (ow, oh) = ((x.w - kernel) / stride + 1, (x.h - kernel) / stride + 1);
    // planar copy so the innermost kernel-column loop is contiguous
    let plane = x.w * x.h;
    let mut planar = vec![0.0f32; plane * x.c];
    for (i, px) in x.data.chunks_exact(x.c).enumerate() {
        for (ch, &v) in px.iter().enumerate() {
            planar[ch * plane + i] = v;
        }
    }
    let kk = kernel * kernel;
    let mut out = Vec::with_capacity(ow * oh * oc);
    for oy in 0..oh {
        for ox in 0..ow {
            let (iy, ix) = (oy * stride, ox * stride);
            for (o, &b) in bias.iter().enumerate() {
                let mut acc = b;
                for ic in 0..x.c {
                    let wbase = (o * x.c + ic) * kk;
                    let pbase = ic * plane;
                    for ky in 0..kernel {
                        let row = pbase + (iy + ky) * x.w + ix;
                        let wrow = wbase + ky * kernel;
                        for kx in 0..kernel {
                            acc += weights[wrow + kx] * planar[row + kx];
                        }
                    }
                }
                out.push(acc);
            }
        }
    }
    Tensor { w: ow, h: oh, c: oc, data: out }
}

fn max_pool(x: &Tensor, kernel: usize, stride: usize) -> Tensor {
    let (ow, oh) = ((x.w - kernel) / stride + 1, (x.h - kernel) / stride + 1);
    let mut out = Vec::with_capacity(ow * oh * x.c);
    for oy in 0..oh {
        for ox in 0..ow {
            for ch in 0..x.c {
                let mut m = f32::NEG_INFINITY;
                for ky in 0..kernel {
                    for kx in 0..kernel {
                        let v = x.data[((oy * stride + ky) * x.w + ox * stride + kx) * x.c + ch];
                        if v > m {
                            m = v;
                        }
                    }
                }
                out.push(m);
            }
        }
    }
    Tensor { w: ow, h: oh, c: x.c, data: out }
}

/// Runs the layer stack over a centered image.
pub fn forward(spec: &ConvNetSpec, img: &Image) -> Result<FeatureMap> {
    if !img.centered {
        return Err(Error::NotCentered);
    }
    if img.channels != spec.input_channels {
        return Err(Error::ChannelMismatch { expected: spec.input_channels, actual: img.channels });
    }
    let rf = spec.geometry().receptive_field;
    if img.width < rf || img.height < rf {
        return Err(Error::InputTooSmall { width: img.width, height: img.height, receptive_field: rf });
    }
    let mut t = Tensor { w: img.width, h: img.height, c: img.channels, data: img.data.clone() };
    for layer in &spec.layers {
        t = match layer {
            LayerSpec::Conv { kernel, stride, out_channels, weights, bias } => {
                conv(&t, *kernel, *stride, *out_channels, weights, bias)
            }
            LayerSpec::Relu => {
                for v in &mut t.data {
                    if v.is_nan() || *v <= 0.0 {
                        *v = 0.0;
                    }
                }
                t
            }
            LayerSpec::MaxPool { kernel, stride } => max_pool(&t, *kernel, *stride),
        };
    }
    Ok(FeatureMap { width: t.w, height: t.h, channels: t.c, data: t.data })
}

/// Runs the network on one receptive-field-sized patch and returns the
/// single output cell's feature vector.
pub fn forward_patch(spec: &ConvNetSpec, img: &Image, b: &BoxPx) -> Result<Vec<f32>> {
    let rf = spec.geometry().receptive_field;
    if b.width() != rf as i64 || b.height() != rf as i64 {
        return Err(Error::WrongPatchSize {
            width: b.width().max(0) as usize,
            height: b.height().max(0) as usize,
            receptive_field: rf,
        });
    }
    if b.x0 < 0 || b.y0 < 0 {
        return Err(Error::DimMismatch(format!("patch {:?} outside image", b.as_array())));
    }
    let patch = img.crop(b.x0 as usize, b.y0 as usize, rf, rf)?;
    let out = forward(spec, &patch)?;
    debug_assert_eq!((out.width, out.height), (1, 1));
    Ok(out.data)
}
