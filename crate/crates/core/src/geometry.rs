//! Scale schedules and image-space/feature-space coordinate arithmetic.
//!
//! Feature cells are indexed under valid (unpadded) convolution: cell `f`
//! along an axis is supported by input pixels `[f * stride, f * stride + rf)`
//! and its receptive-field center sits at `offset + f * stride`.

use serde::{Deserialize, Serialize};

use crate::convnet::ConvNetSpec;
use crate::error::{Error, Result};

/// Rounds half-up to the nearest integer, saturating at zero.
pub fn round_half_up(x: f64) -> usize {
    let r = (x + 0.5).floor();
    if r <= 0.0 {
        0
    } else {
        r as usize
    }
}

/// A scaled dimension as used by every pyramid level.
pub fn scaled_dim(dim: usize, scale: f64) -> usize {
    round_half_up(dim as f64 * scale)
}

/// Geometric list of pyramid scales, largest first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSchedule {
    pub scales: Vec<f64>,
    pub interval: usize,
    pub max_scale: f64,
    pub min_size_px: usize,
}

impl ScaleSchedule {
    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    /// Scale at level `i` of the unbounded geometric sequence.
    pub fn scale_at(max_scale: f64, interval: usize, i: usize) -> f64 {
        max_scale * 2f64.powf(-(i as f64) / interval as f64)
    }
}

/// Builds the descending scale list `max_scale * 2^(-i/interval)`, keeping
/// every level whose shorter side still rounds to at least `min_size_px`.
pub fn build_scale_schedule(
    img_w: usize,
    img_h: usize,
    interval: usize,
    max_scale: f64,
    min_size_px: usize,
) -> Result<ScaleSchedule> {
    if img_w == 0 || img_h == 0 {
        return Err(Error::InvalidArgument("image dimensions must be positive".into()));
    }
    if interval == 0 {
        return Err(Error::InvalidArgument("interval must be >= 1".into()));
    }
    if !(max_scale > 0.0 && max_scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("max_scale must be positive, got {max_scale}")));
    }
    if min_size_px == 0 {
        return Err(Error::InvalidArgument("min_size_px must be >= 1".into()));
    }
    let short = img_w.min(img_h);
    let mut scales = Vec::new();
    for i in 0.. {
        let s = ScaleSchedule::scale_at(max_scale, interval, i);
        if scaled_dim(short, s) < min_size_px {
            break;
        }
        scales.push(s);
    }
    if scales.is_empty() {
        return Err(Error::EmptySchedule {
            max_scale,
            short_side: scaled_dim(short, max_scale),
            min_size_px,
        });
    }
    Ok(ScaleSchedule {
        scales,
        interval,
        max_scale,
        min_size_px,
    })
}

/// Composite stride, receptive field and first-window center of a layer stack.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NetGeometry {
    pub total_stride: usize,
    pub receptive_field: usize,
    pub offset: i64,
}

impl NetGeometry {
    /// Composes `(kernel, stride)` pairs front to back. Layers without a
    /// spatial footprint (activations) are simply omitted by the caller.
    pub fn from_layers<I>(layers: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut jump = 1usize;
        let mut rf = 1usize;
        for (kernel, stride) in layers {
            rf += (kernel - 1) * jump;
            jump *= stride;
        }
        NetGeometry {
            total_stride: jump,
            receptive_field: rf,
            offset: ((rf - 1) / 2) as i64,
        }
    }

    /// Number of valid output cells along an axis of `input` pixels.
    pub fn valid_cells(&self, input: usize) -> usize {
        if input < self.receptive_field {
            0
        } else {
            (input - self.receptive_field) / self.total_stride + 1
        }
    }

    /// Image-space center of feature cell `f`.
    pub fn center(&self, f: i64) -> i64 {
        self.offset + f * self.total_stride as i64
    }

    /// Pixel box supporting feature cell `(fx, fy)`.
    pub fn support(&self, fx: usize, fy: usize) -> BoxPx {
        let j = self.total_stride as i64;
        let rf = self.receptive_field as i64;
        let (x0, y0) = (fx as i64 * j, fy as i64 * j);
        BoxPx::new(x0, y0, x0 + rf, y0 + rf)
    }
}

pub fn derive_net_geometry(spec: &ConvNetSpec) -> NetGeometry {
    NetGeometry::from_layers(spec.layers.iter().filter_map(|l| l.window()))
}

/// Half-open pixel (or cell) box `[x0, x1) x [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxPx {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl BoxPx {
    pub const fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        BoxPx { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> i64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> i64 {
        self.y1 - self.y0
    }

    pub fn is_empty(&self) -> bool {
        self.x1 <= self.x0 || self.y1 <= self.y0
    }

    pub fn area(&self) -> i64 {
        if self.is_empty() {
            0
        } else {
            self.width() * self.height()
        }
    }

    pub fn inflate(&self, by: i64) -> Self {
        BoxPx::new(self.x0 - by, self.y0 - by, self.x1 + by, self.y1 + by)
    }

    pub fn translate(&self, dx: i64, dy: i64) -> Self {
        BoxPx::new(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)
    }

    pub fn intersects(&self, other: &BoxPx) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.y0 < other.y1 && other.y0 < self.y1
    }

    pub fn contains(&self, other: &BoxPx) -> bool {
        self.x0 <= other.x0 && self.y0 <= other.y0 && other.x1 <= self.x1 && other.y1 <= self.y1
    }

    pub fn contains_point(&self, x: i64, y: i64) -> bool {
        self.x0 <= x && x < self.x1 && self.y0 <= y && y < self.y1
    }

    pub fn as_array(&self) -> [i64; 4] {
        [self.x0, self.y0, self.x1, self.y1]
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

/// Maps an image-space box to the feature cells whose receptive-field
/// centers fall inside it, clamped to `extent = (cells_w, cells_h)`.
pub fn image_box_to_feature_box(
    b: &BoxPx,
    geom: &NetGeometry,
    extent: (usize, usize),
) -> Result<BoxPx> {
    if b.is_empty() {
        return Err(Error::EmptyFeatureBox(b.as_array()));
    }
    let j = geom.total_stride as i64;
    let o = geom.offset;
    let lo = |v: i64| div_ceil(v - o, j);
    let hi = |v: i64| (v - 1 - o).div_euclid(j) + 1;
    let (ew, eh) = (extent.0 as i64, extent.1 as i64);
    let fb = BoxPx::new(
        lo(b.x0).clamp(0, ew),
        lo(b.y0).clamp(0, eh),
        hi(b.x1).clamp(0, ew),
        hi(b.y1).clamp(0, eh),
    );
    if fb.is_empty() {
        return Err(Error::EmptyFeatureBox(b.as_array()));
    }
    Ok(fb)
}
