//! The feature-pyramid pipeline: schedule, resample, pad, pack, render,
//! forward, unpack. Plus region cropping, aspect-ratio warped pyramids,
//! channel-sum visualization and on-disk persistence.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convnet::{forward, make_toy_net, ConvNetSpec, FeatureMap, NetHeader};
use crate::error::{Error, Result};
use crate::geometry::{
    build_scale_schedule, image_box_to_feature_box, round_half_up, BoxPx, NetGeometry,
    ScaleSchedule,
};
use crate::imaging::{
    decode_image, encode_pgm, pad_with_interpolated_border, resample_bilinear, resample_to, Image,
    MeanPixel,
};
use crate::packing::{pack_blf_aligned, render_canvases, CanvasPlan};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetConfig {
    pub preset: String,
    pub seed: u64,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig { preset: "small".into(), seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PyramidConfig {
    pub interval: usize,
    pub max_scale: f64,
    pub min_size_px: usize,
    pub canvas_w: usize,
    pub canvas_h: usize,
    pub border_px: usize,
    pub mean: MeanPixel,
    pub net: NetConfig,
}

impl Default for PyramidConfig {
    fn default() -> Self {
        PyramidConfig {
            interval: 5,
            max_scale: 2.0,
            min_size_px: 16,
            canvas_w: 1200,
            canvas_h: 1200,
            border_px: 16,
            mean: MeanPixel(vec![104.0, 117.0, 123.0]),
            net: NetConfig::default(),
        }
    }
}

impl PyramidConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("interval", self.interval),
            ("min_size_px", self.min_size_px),
            ("canvas_w", self.canvas_w),
            ("canvas_h", self.canvas_h),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidArgument(format!("{name} must be positive")));
        }
        if !(self.max_scale > 0.0 && self.max_scale.is_finite()) {
            return Err(Error::InvalidArgument("max_scale must be positive".into()));
        }
        MeanPixel::new(self.mean.0.clone())?;
        Ok(())
    }

    pub fn build_net(&self) -> Result<ConvNetSpec> {
        make_toy_net(&self.net.preset, self.net.seed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PyramidLevel {
    pub scale: f64,
    pub feat: FeatureMap,
    pub geom: NetGeometry,
    /// Resampled image size, before the border is added.
    pub image_dims: (usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeaturePyramid {
    pub levels: Vec<PyramidLevel>,
    pub source_dims: (usize, usize),
    pub mean: MeanPixel,
    pub spec_id: String,
    pub net: NetHeader,
    pub border_px: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRegion {
    pub level_index: usize,
    pub scale: f64,
    pub box_feat: BoxPx,
    pub data: FeatureMap,
    pub source_box_px: BoxPx,
}

/// Everything produced before the network runs.
#[derive(Clone, Debug)]
pub struct Stitched {
    pub schedule: ScaleSchedule,
    /// Resampled and bordered levels, raw (uncentered).
    pub padded_levels: Vec<Image>,
    pub plan: CanvasPlan,
    /// Centered canvases.
    pub canvases: Vec<Image>,
}

fn prepare_image(img: &Image, mean: &MeanPixel) -> Result<Image> {
    if img.centered {
        return Err(Error::AlreadyCentered);
    }
    let img = if img.channels == 1 && mean.channels() == 3 { img.to_rgb() } else { img.clone() };
    if img.channels != mean.channels() {
        return Err(Error::ChannelMismatch { expected: mean.channels(), actual: img.channels });
    }
    Ok(img)
}

/// Builds the schedule, resamples and pads every level, and renders the
/// packed canvases. Placements are aligned to the network stride so each
/// level's feature grid on the canvas coincides with its standalone grid.
pub fn stitch(img: &Image, cfg: &PyramidConfig, geom: &NetGeometry) -> Result<Stitched> {
    cfg.validate()?;
    let img = prepare_image(img, &cfg.mean)?;
    let schedule =
        build_scale_schedule(img.width, img.height, cfg.interval, cfg.max_scale, cfg.min_size_px)?;
    let padded_levels: Vec<Image> = schedule
        .scales
        .par_iter()
        .map(|&s| pad_with_interpolated_border(&resample_bilinear(&img, s)?, cfg.border_px, &cfg.mean))
        .collect::<Result<_>>()?;
    let rf = geom.receptive_field;
    if let Some(small) = padded_levels.iter().find(|l| l.width < rf || l.height < rf) {
        return Err(Error::InputTooSmall { width: small.width, height: small.height, receptive_field: rf });
    }
    let b2 = 2 * cfg.border_px;
    let dims: Vec<(usize, usize)> =
        padded_levels.iter().map(|l| (l.width - b2, l.height - b2)).collect();
    let plan = pack_blf_aligned(&dims, cfg.canvas_w, cfg.canvas_h, cfg.border_px, geom.total_stride)?;
    let canvases = render_canvases(&plan, &padded_levels, &cfg.mean)?;
    Ok(Stitched { schedule, padded_levels, plan, canvases })
}

/// Reads each level's cells out of its canvas feature map: the cells whose
/// receptive fields lie entirely inside the placement's outer box.
pub fn unpack(stitched: &Stitched, canvas_feats: &[FeatureMap], geom: &NetGeometry) -> Result<Vec<FeatureMap>> {
    let j = geom.total_stride as i64;
    stitched
        .plan
        .placements
        .iter()
        .map(|p| {
            let outer = &p.outer_box;
            debug_assert!(outer.x0 % j == 0 && outer.y0 % j == 0);
            let (fx, fy) = (outer.x0 / j, outer.y0 / j);
            let fw = geom.valid_cells(outer.width() as usize) as i64;
            let fh = geom.valid_cells(outer.height() as usize) as i64;
            canvas_feats[p.canvas_index].crop(&BoxPx::new(fx, fy, fx + fw, fy + fh))
        })
        .collect()
}

/// Feature pyramid for an in-memory image with an explicit network.
pub fn feat_pyramid_with_net(img: &Image, cfg: &PyramidConfig, net: &ConvNetSpec) -> Result<FeaturePyramid> {
    let geom = net.geometry();
    let stitched = stitch(img, cfg, &geom)?;
    let canvas_feats: Vec<FeatureMap> =
        stitched.canvases.par_iter().map(|c| forward(net, c)).collect::<Result<_>>()?;
    let feats = unpack(&stitched, &canvas_feats, &geom)?;
    let b2 = 2 * cfg.border_px;
    let levels = feats
        .into_iter()
        .zip(&stitched.schedule.scales)
        .zip(&stitched.padded_levels)
        .map(|((feat, &scale), padded)| PyramidLevel {
            scale,
            feat,
            geom,
            image_dims: (padded.width - b2, padded.height - b2),
        })
        .collect();
    Ok(FeaturePyramid {
        levels,
        source_dims: (img.width, img.height),
        mean: cfg.mean.clone(),
        spec_id: net.id(),
        net: net.header(),
        border_px: cfg.border_px,
    })
}

pub fn feat_pyramid(img: &Image, cfg: &PyramidConfig) -> Result<FeaturePyramid> {
    feat_pyramid_with_net(img, cfg, &cfg.build_net()?)
}

/// Decodes an image file and computes its feature pyramid.
pub fn convnet_feat_pyramid(image_path: impl AsRef<Path>, cfg: &PyramidConfig) -> Result<FeaturePyramid> {
    feat_pyramid(&decode_image(image_path)?, cfg)
}

/// Area-preserving warp dimensions for aspect ratio `a = w/h`.
pub fn warp_dims(w: usize, h: usize, aspect: f64) -> (usize, usize) {
    let area = w as f64 * h as f64;
    (round_half_up((aspect * area).sqrt()), round_half_up((area / aspect).sqrt()))
}

pub fn warped_pyramids_from_image(
    img: &Image,
    aspect_ratios: &[f64],
    cfg: &PyramidConfig,
) -> Result<Vec<(f64, FeaturePyramid)>> {
    if let Some(a) = aspect_ratios.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(Error::InvalidArgument(format!("aspect ratio must be positive, got {a}")));
    }
    let net = cfg.build_net()?;
    aspect_ratios
        .iter()
        .map(|&a| {
            let (w, h) = warp_dims(img.width, img.height, a);
            let warped = resample_to(img, w, h)?;
            Ok((a, feat_pyramid_with_net(&warped, cfg, &net)?))
        })
        .collect()
}

/// One full pyramid per aspect ratio, in input order.
pub fn warped_pyramids(
    image_path: impl AsRef<Path>,
    aspect_ratios: &[f64],
    cfg: &PyramidConfig,
) -> Result<Vec<(f64, FeaturePyramid)>> {
    warped_pyramids_from_image(&decode_image(image_path)?, aspect_ratios, cfg)
}

impl FeaturePyramid {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, i: usize) -> Result<&PyramidLevel> {
        self.levels.get(i).ok_or(Error::BadLevel { level: i, count: self.levels.len() })
    }

    /// Maps a source-image box into level `i`'s padded pixel frame.
    pub fn box_to_level(&self, i: usize, b: &BoxPx) -> Result<BoxPx> {
        let lvl = self.level(i)?;
        let sx = lvl.image_dims.0 as f64 / self.source_dims.0 as f64;
        let sy = lvl.image_dims.1 as f64 / self.source_dims.1 as f64;
        let m = |v: i64, s: f64| round_half_up(v as f64 * s) as i64;
        let bp = self.border_px as i64;
        let (x0, y0) = (m(b.x0, sx), m(b.y0, sy));
        let x1 = m(b.x1, sx).max(x0 + 1);
        let y1 = m(b.y1, sy).max(y0 + 1);
        Ok(BoxPx::new(x0, y0, x1, y1).translate(bp, bp))
    }

    /// Crops the descriptor region for `box_px` at the level whose mapped
    /// cell extent is closest to `target_cells` in log space. Ties go to
    /// the larger scale.
    pub fn crop_region(&self, box_px: &BoxPx, target_cells: (usize, usize)) -> Result<FeatureRegion> {
        let (sw, sh) = (self.source_dims.0 as i64, self.source_dims.1 as i64);
        if box_px.is_empty() || box_px.x0 < 0 || box_px.y0 < 0 || box_px.x1 > sw || box_px.y1 > sh {
            return Err(Error::InvalidArgument(format!(
                "box {:?} not inside {}x{} source image",
                box_px.as_array(),
                sw,
                sh
            )));
        }
        if target_cells.0 == 0 || target_cells.1 == 0 {
            return Err(Error::InvalidArgument("target cells must be at least 1x1".into()));
        }
        let (tw, th) = (target_cells.0 as f64, target_cells.1 as f64);
        let mut best: Option<(f64, usize, BoxPx)> = None;
        for (i, lvl) in self.levels.iter().enumerate() {
            let mapped = self.box_to_level(i, box_px)?;
            let Ok(fb) = image_box_to_feature_box(&mapped, &lvl.geom, (lvl.feat.width, lvl.feat.height))
            else {
                continue;
            };
            let dist = (fb.width() as f64 / tw).ln().abs() + (fb.height() as f64 / th).ln().abs();
            if best.as_ref().is_none_or(|(d, _, _)| dist < *d) {
                best = Some((dist, i, fb));
            }
        }
        let (_, level_index, box_feat) = best.ok_or(Error::EmptyFeatureBox(box_px.as_array()))?;
        let lvl = &self.levels[level_index];
        Ok(FeatureRegion {
            level_index,
            scale: lvl.scale,
            box_feat,
            data: lvl.feat.crop(&box_feat)?,
            source_box_px: *box_px,
        })
    }

    /// Writes level `i` as a PGM of per-cell channel sums.
    pub fn visualize_level(&self, i: usize, path: impl AsRef<Path>) -> Result<()> {
        let feat = &self.level(i)?.feat;
        encode_pgm(feat.width, feat.height, &feat.channel_sum(), path)
    }

    pub fn manifest(&self) -> Manifest {
        Manifest {
            format: MANIFEST_FORMAT.into(),
            version: 1,
            source_dims: [self.source_dims.0, self.source_dims.1],
            mean: self.mean.clone(),
            spec_id: self.spec_id.clone(),
            net: self.net.clone(),
            border_px: self.border_px,
            element_type: ELEMENT_TYPE.into(),
            layout: LAYOUT.into(),
            levels: self
                .levels
                .iter()
                .enumerate()
                .map(|(i, l)| LevelEntry {
                    index: i,
                    scale: l.scale,
                    image_dims: [l.image_dims.0, l.image_dims.1],
                    padded_dims: [l.image_dims.0 + 2 * self.border_px, l.image_dims.1 + 2 * self.border_px],
                    feat_dims: [l.feat.width, l.feat.height, l.feat.channels],
                    stride: l.geom.total_stride,
                    receptive_field: l.geom.receptive_field,
                    offset: l.geom.offset,
                    file: format!("level_{i:03}.f32"),
                })
                .collect(),
        }
    }

    /// Writes `manifest.json` plus one raw little-endian f32 file per level.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let manifest = self.manifest();
        for (entry, lvl) in manifest.levels.iter().zip(&self.levels) {
            fs::write(dir.join(&entry.file), f32_le_bytes(&lvl.feat.data))?;
        }
        let mut json = serde_json::to_string_pretty(&manifest)?;
        json.push('\n');
        fs::write(dir.join(MANIFEST_FILE), json)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<FeaturePyramid> {
        let dir = dir.as_ref();
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound(path.clone()),
            _ => Error::Io(e),
        })?;
        let m: Manifest = serde_json::from_str(&text)?;
        let corrupt = |reason: String| Error::CorruptFile { path: path.clone(), reason };
        if m.format != MANIFEST_FORMAT || m.element_type != ELEMENT_TYPE || m.layout != LAYOUT {
            return Err(corrupt(format!(
                "unsupported format {:?} / element type {:?} / layout {:?}",
                m.format, m.element_type, m.layout
            )));
        }
        let mut levels = Vec::with_capacity(m.levels.len());
        for (i, e) in m.levels.iter().enumerate() {
            if e.index != i {
                return Err(corrupt(format!("level entry {i} has index {}", e.index)));
            }
            let [w, h, c] = e.feat_dims;
            let data = read_f32_le(&dir.join(&e.file), w * h * c)?;
            levels.push(PyramidLevel {
                scale: e.scale,
                feat: FeatureMap { width: w, height: h, channels: c, data },
                geom: NetGeometry { total_stride: e.stride, receptive_field: e.receptive_field, offset: e.offset },
                image_dims: (e.image_dims[0], e.image_dims[1]),
            });
        }
        Ok(FeaturePyramid {
            levels,
            source_dims: (m.source_dims[0], m.source_dims[1]),
            mean: m.mean,
            spec_id: m.spec_id,
            net: m.net,
            border_px: m.border_px,
        })
    }
}

impl FeatureRegion {
    /// Writes the crop as raw f32le at `path` and a JSON sidecar at
    /// `path` + `.json`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, f32_le_bytes(&self.data.data))?;
        let sidecar = RegionSidecar {
            level_index: self.level_index,
            scale: self.scale,
            box_feat: self.box_feat,
            source_box_px: self.source_box_px,
            dims: [self.data.width, self.data.height, self.data.channels],
            element_type: ELEMENT_TYPE.into(),
            layout: LAYOUT.into(),
        };
        let mut json = serde_json::to_string_pretty(&sidecar)?;
        json.push('\n');
        let mut side = path.as_os_str().to_owned();
        side.push(".json");
        fs::write(side, json)?;
        Ok(())
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";
const MANIFEST_FORMAT: &str = "convpyr-feature-pyramid";
const ELEMENT_TYPE: &str = "f32le";
const LAYOUT: &str = "row-major channel-interleaved";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub source_dims: [usize; 2],
    pub mean: MeanPixel,
    pub spec_id: String,
    pub net: NetHeader,
    pub border_px: usize,
    pub element_type: String,
    pub layout: String,
    pub levels: Vec<LevelEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelEntry {
    pub index: usize,
    pub scale: f64,
    pub image_dims: [usize; 2],
    pub padded_dims: [usize; 2],
    /// Width, height, channels.
    pub feat_dims: [usize; 3],
    pub stride: usize,
    pub receptive_field: usize,
    pub offset: i64,
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSidecar {
    pub level_index: usize,
    pub scale: f64,
    pub box_feat: BoxPx,
    pub source_box_px: BoxPx,
    pub dims: [usize; 3],
    pub element_type: String,
    pub layout: String,
}

pub fn f32_le_bytes(data: &[f32]) -> Vec<u8> {
    data.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn read_f32_le(path: &Path, expected: usize) -> Result<Vec<f32>> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    if bytes.len() != expected * 4 {
        return Err(Error::CorruptFile {
            path: path.to_path_buf(),
            reason: format!("expected {} bytes, found {}", expected * 4, bytes.len()),
        });
    }
    Ok(bytes.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::decode_image;

    fn cfg(preset: &str) -> PyramidConfig {
        PyramidConfig {
            interval: 2,
            max_scale: 1.0,
            min_size_px: 24,
            canvas_w: 256,
            canvas_h: 256,
            border_px: 8,
            net: NetConfig { preset: preset.into(), seed: 3 },
            ..Default::default()
        }
    }

    fn checker(w: usize, h: usize) -> Image {
        let data = (0..w * h)
            .flat_map(|i| {
                let (x, y) = (i % w, i / w);
                let v = if (x / 5 + y / 3) % 2 == 0 { 230.0 } else { 20.0 };
                [v, 255.0 - v, (x * 3 % 256) as f32]
            })
            .collect();
        Image::new(w, h, 3, data).unwrap()
    }

    #[test]
    fn constant_mean_image_gives_zero_features() {
        let c = PyramidConfig { max_scale: 2.0, ..cfg("tiny") };
        let img = Image::filled(64, 64, c.mean.values());
        let pyra = feat_pyramid(&img, &c).unwrap();
        // 128, 91, 64, 45, 32 px
        assert_eq!(pyra.len(), 5);
        for lvl in &pyra.levels {
            assert!(lvl.feat.data.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn level_dims_follow_valid_formula() {
        let img = checker(90, 70);
        let pyra = feat_pyramid(&img, &cfg("small")).unwrap();
        assert!(pyra.levels.windows(2).all(|w| w[0].scale > w[1].scale));
        for lvl in &pyra.levels {
            let g = lvl.geom;
            assert_eq!(lvl.feat.width, g.valid_cells(lvl.image_dims.0 + 16));
            assert_eq!(lvl.feat.height, g.valid_cells(lvl.image_dims.1 + 16));
            assert_eq!(lvl.feat.channels, 32);
        }
    }

    #[test]
    fn grayscale_input_is_promoted() {
        let img = Image::new(40, 40, 1, (0..1600).map(|i| (i % 251) as f32).collect()).unwrap();
        let pyra = feat_pyramid(&img, &cfg("tiny")).unwrap();
        let rgb = feat_pyramid(&img.to_rgb(), &cfg("tiny")).unwrap();
        assert_eq!(pyra, rgb);
    }

    #[test]
    fn too_large_for_canvas() {
        let c = PyramidConfig { max_scale: 2.0, canvas_w: 100, canvas_h: 100, ..cfg("tiny") };
        let err = feat_pyramid(&checker(64, 64), &c).unwrap_err();
        assert!(matches!(err, Error::LevelTooLarge { level: 0, .. }));
    }

    #[test]
    fn level_smaller_than_receptive_field() {
        let c = PyramidConfig { border_px: 0, min_size_px: 10, ..cfg("stride16") };
        assert!(matches!(feat_pyramid(&checker(40, 40), &c), Err(Error::InputTooSmall { .. })));
    }

    #[test]
    fn crop_full_image_level0() {
        // without a border the source box covers every level-0 cell center
        let c = PyramidConfig { border_px: 0, ..cfg("tiny") };
        let pyra = feat_pyramid(&checker(80, 60), &c).unwrap();
        let l0 = &pyra.levels[0];
        let target = (l0.feat.width, l0.feat.height);
        let r = pyra.crop_region(&BoxPx::new(0, 0, 80, 60), target).unwrap();
        assert_eq!(r.level_index, 0);
        assert_eq!(r.data, l0.feat);
        assert_eq!(r, pyra.crop_region(&BoxPx::new(0, 0, 80, 60), target).unwrap());
    }

    #[test]
    fn crop_errors() {
        let pyra = feat_pyramid(&checker(50, 50), &cfg("tiny")).unwrap();
        assert!(pyra.crop_region(&BoxPx::new(0, 0, 51, 10), (1, 1)).is_err());
        assert!(pyra.crop_region(&BoxPx::new(0, 0, 10, 10), (0, 1)).is_err());
        assert!(matches!(pyra.visualize_level(99, "/nonexistent/x.pgm"), Err(Error::BadLevel { .. })));
    }

    #[test]
    fn warp_dims_area_preserving() {
        assert_eq!(warp_dims(200, 50, 1.0), (100, 100));
        assert_eq!(warp_dims(640, 480, 640.0 / 480.0), (640, 480));
        assert_eq!(warp_dims(100, 100, 4.0), (200, 50));
    }

    #[test]
    fn warped_native_equals_plain() {
        let img = checker(72, 48);
        let c = cfg("tiny");
        let plain = feat_pyramid(&img, &c).unwrap();
        let warped = warped_pyramids_from_image(&img, &[72.0 / 48.0, 1.0], &c).unwrap();
        assert_eq!(warped.len(), 2);
        assert_eq!(warped[0].1, plain);
        assert_eq!(warped[1].1.source_dims, (59, 59));
        assert!(warped_pyramids_from_image(&img, &[0.0], &c).is_err());
    }

    #[test]
    fn visualize_two_cells() {
        let dir = tempfile::tempdir().unwrap();
        let mut pyra = feat_pyramid(&checker(40, 40), &cfg("tiny")).unwrap();
        pyra.levels[0].feat = FeatureMap { width: 2, height: 1, channels: 2, data: vec![1.5, 2.5, 0.0, 0.0] };
        let p = dir.path().join("v.pgm");
        pyra.visualize_level(0, &p).unwrap();
        assert_eq!(decode_image(&p).unwrap().data, vec![255.0, 0.0]);
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let pyra = feat_pyramid(&checker(60, 44), &cfg("small")).unwrap();
        pyra.save(dir.path()).unwrap();
        let loaded = FeaturePyramid::load(dir.path()).unwrap();
        assert_eq!(loaded, pyra);
        assert!(matches!(FeaturePyramid::load(dir.path().join("missing")), Err(Error::NotFound(_))));

        fs::write(dir.path().join("level_000.f32"), [0u8; 6]).unwrap();
        assert!(matches!(FeaturePyramid::load(dir.path()), Err(Error::CorruptFile { .. })));
    }

    #[test]
    fn config_json_defaults() {
        let c: PyramidConfig = serde_json::from_str(r#"{"interval": 3}"#).unwrap();
        assert_eq!(c.interval, 3);
        assert_eq!(c.canvas_w, 1200);
        assert_eq!(c.mean.values(), &[104.0, 117.0, 123.0]);
        assert!(serde_json::from_str::<PyramidConfig>(r#"{"intervall": 3}"#).is_err());
    }
}
