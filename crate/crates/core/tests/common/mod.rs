#![allow(dead_code)]

use convpyr::convnet::LayerSpec;
use convpyr::{center_image, ConvNetSpec, Image, MeanPixel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_raw(w: usize, h: usize, c: usize, seed: u64) -> Image {
    let mut r = rng(seed);
    let data = (0..w * h * c).map(|_| r.random_range(0u8..=255) as f32).collect();
    Image::new(w, h, c, data).unwrap()
}

pub fn random_centered(w: usize, h: usize, c: usize, seed: u64) -> Image {
    center_image(&random_raw(w, h, c, seed), &MeanPixel(vec![117.0; c])).unwrap()
}

/// Random conv/relu/pool stack. With `positive`, weights and biases are
/// strictly positive so a large positive perturbation always propagates.
pub fn random_spec(seed: u64, input_channels: usize, positive: bool) -> ConvNetSpec {
    let mut r = rng(seed);
    let spatial = r.random_range(1..=3);
    let mut layers = Vec::new();
    let mut ch = input_channels;
    for i in 0..spatial {
        let stride = r.random_range(1..=3);
        let kernel = r.random_range(1..=5);
        if i > 0 && r.random_bool(0.4) {
            layers.push(LayerSpec::MaxPool { kernel, stride });
            continue;
        }
        let out = r.random_range(1..=4);
        let n = out * ch * kernel * kernel;
        let (weights, bias) = if positive {
            (
                (0..n).map(|_| r.random_range(0.1f32..1.0)).collect(),
                (0..out).map(|_| r.random_range(0.0f32..0.5)).collect(),
            )
        } else {
            (
                (0..n).map(|_| r.random_range(-1.0f32..1.0)).collect(),
                (0..out).map(|_| r.random_range(-0.5f32..0.5)).collect(),
            )
        };
        layers.push(LayerSpec::Conv { kernel, stride, out_channels: out, weights, bias });
        if r.random_bool(0.6) {
            layers.push(LayerSpec::Relu);
        }
        ch = out;
    }
    ConvNetSpec::new(input_channels, layers, seed).unwrap()
}
