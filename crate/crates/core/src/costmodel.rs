//! Work-sharing arithmetic for dense versus per-region feature extraction,
//! and a wall-clock bench that measures the same trade-off.
//!
//! Ops are counted as input pixels processed.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convnet::{forward, forward_patch, ConvNetSpec, FeatureMap};
use crate::error::{Error, Result};
use crate::geometry::BoxPx;
use crate::imaging::Image;

/// How many window positions fit along an axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionCount {
    /// `floor((N - M) / stride) + 1`: every valid window origin.
    Inclusive,
    /// `floor((N - M) / stride)`, omitting the fencepost.
    PaperFaithful,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub image_px: u64,
    pub region_px: u64,
    pub stride: u64,
    pub mode: RegionCount,
    pub regions: u64,
    pub per_region_ops: f64,
    pub dense_ops: f64,
    pub speedup: f64,
}

impl CostReport {
    pub fn to_text(&self) -> String {
        let rows = [
            ("image (N)", self.image_px.to_string()),
            ("region (M)", self.region_px.to_string()),
            ("stride", self.stride.to_string()),
            ("mode", format!("{:?}", self.mode)),
            ("regions", self.regions.to_string()),
            ("per-region ops", format!("{:.6e}", self.per_region_ops)),
            ("dense ops", format!("{:.6e}", self.dense_ops)),
            ("speedup", format!("{:.1}", self.speedup)),
        ];
        aligned(&rows)
    }
}

fn aligned(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    out
}

/// Region count and pixel-op totals for `M x M` windows at `stride` over an
/// `N x N` image, versus one dense pass over the image.
pub fn analytic_cost(n: u64, m: u64, stride: u64, mode: RegionCount) -> Result<CostReport> {
    if m == 0 || n < m || stride == 0 {
        return Err(Error::InvalidArgument(format!(
            "need N >= M >= 1 and stride >= 1, got N={n} M={m} stride={stride}"
        )));
    }
    let per_axis = (n - m) / stride + u64::from(mode == RegionCount::Inclusive);
    let regions = per_axis * per_axis;
    let per_region = regions * m * m;
    let dense = n * n;
    Ok(CostReport {
        image_px: n,
        region_px: m,
        stride,
        mode,
        regions,
        per_region_ops: per_region as f64,
        dense_ops: dense as f64,
        speedup: per_region as f64 / dense as f64,
    })
}

/// Published GPU timings the desk-scale bench is loosely compared against.
/// Recorded in reports only; never asserted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFigures {
    pub per_region_windows: u32,
    pub per_region_secs: f64,
    pub dense_scales: u32,
    pub dense_secs: f64,
    pub hardware: String,
}

impl Default for ReferenceFigures {
    fn default() -> Self {
        ReferenceFigures {
            per_region_windows: 2000,
            per_region_secs: 10.0,
            dense_scales: 25,
            dense_secs: 1.0,
            hardware: "NVIDIA K20 GPU".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub window_count: usize,
    /// Window side in pixels; defaults to the receptive field. Must exceed
    /// it by a multiple of the stride.
    pub window_side: Option<usize>,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions { window_count: 500, window_side: None, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub image_dims: [usize; 2],
    pub spec_id: String,
    pub window_count: usize,
    pub window_side: usize,
    /// Feature cells per window along each axis.
    pub window_cells: usize,
    pub dense_secs: f64,
    pub per_window_secs: f64,
    /// `per_window_secs / dense_secs`.
    pub ratio: f64,
    pub outputs_identical: bool,
    pub threads_per_arm: usize,
    pub reference: ReferenceFigures,
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        let rows = [
            ("image", format!("{}x{}", self.image_dims[0], self.image_dims[1])),
            ("net", self.spec_id.clone()),
            ("windows", self.window_count.to_string()),
            ("window side", format!("{} px ({} cells)", self.window_side, self.window_cells)),
            ("dense + crop", format!("{:.6} s", self.dense_secs)),
            ("per window", format!("{:.6} s", self.per_window_secs)),
            ("ratio", format!("{:.2}x", self.ratio)),
            ("identical", self.outputs_identical.to_string()),
            ("threads/arm", self.threads_per_arm.to_string()),
            (
                "reference",
                format!(
                    "{} windows {} s vs {} scales {} s ({})",
                    self.reference.per_region_windows,
                    self.reference.per_region_secs,
                    self.reference.dense_scales,
                    self.reference.dense_secs,
                    self.reference.hardware
                ),
            ),
        ];
        aligned(&rows)
    }
}

/// Stride-aligned window origins (in feature cells), chosen deterministically.
pub fn pick_windows(grid_w: usize, grid_h: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut all: Vec<(usize, usize)> =
        (0..grid_h).flat_map(|y| (0..grid_w).map(move |x| (x, y))).collect();
    if all.is_empty() {
        return all;
    }
    all.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    all.iter().cycle().take(count).copied().collect()
}

/// Times one dense forward plus `window_count` crops against
/// `window_count` independent forwards over the same windows. Each arm runs
/// on the calling thread only.
pub fn bench_dense_vs_per_region(
    img: &Image,
    spec: &ConvNetSpec,
    opts: &BenchOptions,
) -> Result<BenchReport> {
    let geom = spec.geometry();
    let (rf, j) = (geom.receptive_field, geom.total_stride);
    let side = opts.window_side.unwrap_or(rf);
    if side < rf || !(side - rf).is_multiple_of(j) {
        return Err(Error::InvalidArgument(format!(
            "window side {side} must be receptive field {rf} plus a multiple of stride {j}"
        )));
    }
    let cells = geom.valid_cells(side);
    let (gw, gh) = (geom.valid_cells(img.width), geom.valid_cells(img.height));
    if gw < cells || gh < cells {
        return Err(Error::InputTooSmall { width: img.width, height: img.height, receptive_field: side });
    }
    let windows = pick_windows(gw - cells + 1, gh - cells + 1, opts.window_count, opts.seed);
    let cell_box = |&(x, y): &(usize, usize)| {
        BoxPx::new(x as i64, y as i64, (x + cells) as i64, (y + cells) as i64)
    };

    let t = Instant::now();
    let dense = forward(spec, img)?;
    let crops: Vec<FeatureMap> = windows.iter().map(|w| dense.crop(&cell_box(w))).collect::<Result<_>>()?;
    let dense_secs = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let per_window: Vec<Vec<f32>> = windows
        .iter()
        .map(|&(x, y)| {
            let px = BoxPx::new((x * j) as i64, (y * j) as i64, (x * j + side) as i64, (y * j + side) as i64);
            if side == rf {
                forward_patch(spec, img, &px)
            } else {
                let patch = img.crop(px.x0 as usize, px.y0 as usize, side, side)?;
                Ok(forward(spec, &patch)?.data)
            }
        })
        .collect::<Result<_>>()?;
    let per_window_secs = t.elapsed().as_secs_f64();

    let outputs_identical = crops.iter().zip(&per_window).all(|(a, b)| {
        a.data.len() == b.len() && a.data.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
    });
    Ok(BenchReport {
        image_dims: [img.width, img.height],
        spec_id: spec.id(),
        window_count: windows.len(),
        window_side: side,
        window_cells: cells,
        dense_secs,
        per_window_secs,
        ratio: per_window_secs / dense_secs.max(f64::MIN_POSITIVE),
        outputs_identical,
        threads_per_arm: 1,
        reference: ReferenceFigures::default(),
    })
}
