//! Dense multiscale convolutional descriptor pyramids.
//!
//! An image pyramid is resampled, bordered and stitched onto a few large
//! canvases, a valid-mode convolutional extractor runs once per canvas, and
//! the resulting feature planes are unpacked into a per-scale pyramid from
//! which region descriptors are cropped. Because every layer is valid-mode
//! with a fixed accumulation order, cropped descriptors are bit-identical
//! to running the network on each region in isolation.

pub mod convnet;
pub mod costmodel;
pub mod error;
pub mod geometry;
pub mod imaging;
pub mod packing;
pub mod pyramid;

pub use convnet::{forward, forward_patch, make_toy_net, ConvNetSpec, FeatureMap, LayerSpec};
pub use costmodel::{analytic_cost, bench_dense_vs_per_region, BenchOptions, CostReport, RegionCount};
pub use error::{Error, Result};
pub use geometry::{build_scale_schedule, derive_net_geometry, image_box_to_feature_box, BoxPx, NetGeometry, ScaleSchedule};
pub use imaging::{center_image, decode_image, pad_with_interpolated_border, resample_bilinear, Image, MeanPixel};
pub use packing::{pack_blf, pack_blf_aligned, render_canvases, CanvasPlan, Placement};
pub use pyramid::{convnet_feat_pyramid, feat_pyramid, warped_pyramids, FeaturePyramid, FeatureRegion, PyramidConfig};
