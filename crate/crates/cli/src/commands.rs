use std::fs;
use std::path::{Path, PathBuf};

use convpyr::costmodel::RegionCount;
use convpyr::pyramid::{stitch, warped_pyramids, NetConfig};
use convpyr::{
    analytic_cost, bench_dense_vs_per_region, center_image, convnet_feat_pyramid, decode_image, make_toy_net,
    BenchOptions, BoxPx, FeaturePyramid, MeanPixel, PyramidConfig,
};

use crate::ConfigArgs;

pub enum CliError {
    Usage(String),
    Runtime(convpyr::Error),
}

impl From<convpyr::Error> for CliError {
    fn from(e: convpyr::Error) -> Self {
        CliError::Runtime(e)
    }
}

type CliResult = Result<(), CliError>;

fn numbers<T: std::str::FromStr>(s: &str, sep: char, n: usize) -> Result<Vec<T>, String> {
    let parts: Vec<&str> = s.split(sep).map(str::trim).collect();
    if parts.len() != n {
        return Err(format!("expected {n} values separated by '{sep}', got {s:?}"));
    }
    parts.iter().map(|p| p.parse().map_err(|_| format!("invalid number {p:?}"))).collect()
}

pub fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let v = numbers(&s.to_ascii_lowercase(), 'x', 2)?;
    Ok((v[0], v[1]))
}

pub fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let v = numbers(s, ',', 2)?;
    Ok((v[0], v[1]))
}

pub fn parse_mean(s: &str) -> Result<MeanPixel, String> {
    MeanPixel::new(numbers(s, ',', 3)?).map_err(|e| e.to_string())
}

pub fn parse_box(s: &str) -> Result<BoxPx, String> {
    let v: Vec<i64> = numbers(s, ',', 4)?;
    Ok(BoxPx::new(v[0], v[1], v[2], v[3]))
}

/// Defaults, then the config file, then explicit flags.
pub fn resolve_config(args: &ConfigArgs) -> Result<PyramidConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?
        }
        None => PyramidConfig::default(),
    };
    if let Some(v) = args.interval {
        cfg.interval = v;
    }
    if let Some(v) = args.max_scale {
        cfg.max_scale = v;
    }
    if let Some(v) = args.min_size {
        cfg.min_size_px = v;
    }
    if let Some((w, h)) = args.canvas {
        cfg.canvas_w = w;
        cfg.canvas_h = h;
    }
    if let Some(v) = args.border {
        cfg.border_px = v;
    }
    if let Some(v) = &args.mean {
        cfg.mean = v.clone();
    }
    if let Some(v) = &args.preset {
        cfg.net = NetConfig { preset: v.clone(), ..cfg.net };
    }
    if let Some(v) = args.seed {
        cfg.net.seed = v;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn print_levels(pyra: &FeaturePyramid) {
    println!("{:<6} {:>10} {:>12} {:>14}", "level", "scale", "image", "features");
    for (i, l) in pyra.levels.iter().enumerate() {
        println!(
            "{:<6} {:>10.6} {:>12} {:>14}",
            i,
            l.scale,
            format!("{}x{}", l.image_dims.0, l.image_dims.1),
            format!("{}x{}x{}", l.feat.width, l.feat.height, l.feat.channels)
        );
    }
}

fn extract_one(image: &Path, out: &Path, aspects: &[f64], cfg: &PyramidConfig) -> CliResult {
    let pyra = convnet_feat_pyramid(image, cfg)?;
    pyra.save(out)?;
    println!("{} -> {} ({} levels, net {})", image.display(), out.display(), pyra.len(), pyra.spec_id);
    print_levels(&pyra);
    if !aspects.is_empty() {
        for (i, (a, p)) in warped_pyramids(image, aspects, cfg)?.into_iter().enumerate() {
            let dir = out.join(format!("aspect_{i}"));
            p.save(&dir)?;
            println!(
                "aspect {a} -> {} ({}x{} warped, {} levels)",
                dir.display(),
                p.source_dims.0,
                p.source_dims.1,
                p.len()
            );
        }
    }
    Ok(())
}

pub fn extract(image: Option<&Path>, pattern: Option<&str>, out: &Path, aspects: &[f64], args: &ConfigArgs) -> CliResult {
    let cfg = resolve_config(args)?;
    match (image, pattern) {
        (Some(img), _) => extract_one(img, out, aspects, &cfg),
        (None, Some(pat)) => {
            let mut paths: Vec<PathBuf> = glob::glob(pat)
                .map_err(|e| CliError::Usage(format!("bad glob {pat:?}: {e}")))?
                .filter_map(Result::ok)
                .filter(|p| p.is_file())
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(CliError::Usage(format!("no files match {pat:?}")));
            }
            for p in paths {
                let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                extract_one(&p, &out.join(stem), aspects, &cfg)?;
            }
            Ok(())
        }
        (None, None) => Err(CliError::Usage("give an image or --glob".into())),
    }
}

pub fn crop(dir: &Path, region: &BoxPx, target: (usize, usize), out: &Path) -> CliResult {
    let pyra = FeaturePyramid::load(dir)?;
    let r = pyra.crop_region(region, target)?;
    r.save(out)?;
    println!(
        "level {} (scale {:.6}) cells [{}, {}, {}, {}) -> {}x{}x{} written to {}",
        r.level_index,
        r.scale,
        r.box_feat.x0,
        r.box_feat.y0,
        r.box_feat.x1,
        r.box_feat.y1,
        r.data.width,
        r.data.height,
        r.data.channels,
        out.display()
    );
    Ok(())
}

pub fn visualize(dir: &Path, level: usize, out: &Path) -> CliResult {
    let pyra = FeaturePyramid::load(dir)?;
    pyra.visualize_level(level, out)?;
    let l = pyra.level(level)?;
    println!("level {level} ({}x{} cells) written to {}", l.feat.width, l.feat.height, out.display());
    Ok(())
}

pub fn bench(
    image: &Path,
    preset: &str,
    seed: u64,
    windows: usize,
    window_side: Option<usize>,
    mean: MeanPixel,
    json: bool,
) -> CliResult {
    let img = decode_image(image)?;
    let img = if img.channels == 1 { img.to_rgb() } else { img };
    let img = center_image(&img, &mean)?;
    let spec = make_toy_net(preset, seed)?;
    let opts = BenchOptions { window_count: windows, window_side, seed };
    let report = bench_dense_vs_per_region(&img, &spec, &opts)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(convpyr::Error::from)?);
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}

pub fn analytic(n: u64, m: u64, stride: u64, paper_faithful: bool, json: bool) -> CliResult {
    let mode = if paper_faithful { RegionCount::PaperFaithful } else { RegionCount::Inclusive };
    let report = analytic_cost(n, m, stride, mode).map_err(|e| CliError::Usage(e.to_string()))?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(convpyr::Error::from)?);
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}

pub fn pack_debug(image: &Path, out: &Path, masks: bool, args: &ConfigArgs) -> CliResult {
    let cfg = resolve_config(args)?;
    let img = decode_image(image)?;
    let geom = cfg.build_net()?.geometry();
    let stitched = stitch(&img, &cfg, &geom)?;
    stitched.plan.write_debug(out, masks)?;
    println!(
        "{} levels on {} canvas(es) of {}x{}, written to {}",
        stitched.plan.placements.len(),
        stitched.plan.canvas_count,
        cfg.canvas_w,
        cfg.canvas_h,
        out.display()
    );
    Ok(())
}
