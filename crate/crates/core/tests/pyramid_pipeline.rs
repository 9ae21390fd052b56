//! End-to-end pyramid checks against standalone per-level oracles.

mod common;

use convpyr::pyramid::{stitch, NetConfig};
use convpyr::{
    center_image, feat_pyramid, forward, forward_patch, pad_with_interpolated_border, resample_bilinear, BoxPx,
    FeaturePyramid, PyramidConfig,
};

fn cfg(preset: &str, seed: u64) -> PyramidConfig {
    PyramidConfig {
        interval: 3,
        max_scale: 1.5,
        min_size_px: 20,
        canvas_w: 320,
        canvas_h: 240,
        border_px: 16,
        net: NetConfig { preset: preset.into(), seed },
        ..Default::default()
    }
}

#[test]
fn unpacked_levels_equal_standalone_forward() {
    for (i, preset) in ["tiny", "small"].into_iter().enumerate() {
        let c = cfg(preset, i as u64);
        let img = common::random_raw(96, 70, 3, 17 + i as u64);
        let pyra = feat_pyramid(&img, &c).unwrap();
        let net = c.build_net().unwrap();
        let stitched = stitch(&img, &c, &net.geometry()).unwrap();
        assert!(stitched.plan.canvas_count > 1, "exercise multiple canvases");
        assert_eq!(pyra.len(), stitched.schedule.len());
        for (lvl, padded) in pyra.levels.iter().zip(&stitched.padded_levels) {
            let alone = forward(&net, &center_image(padded, &c.mean).unwrap()).unwrap();
            assert_eq!(lvl.feat, alone);
        }
    }
}

#[test]
fn single_level_matches_unstitched_path() {
    let img = common::random_raw(50, 40, 3, 3);
    let c = PyramidConfig { interval: 1, max_scale: 1.0, min_size_px: 40, ..cfg("small", 4) };
    let pyra = feat_pyramid(&img, &c).unwrap();
    assert_eq!(pyra.len(), 1);
    let net = c.build_net().unwrap();
    let padded = pad_with_interpolated_border(&img, c.border_px, &c.mean).unwrap();
    let oracle = forward(&net, &center_image(&padded, &c.mean).unwrap()).unwrap();
    assert_eq!(pyra.levels[0].feat, oracle);

    // centering before padding (toward a zero mean) agrees up to rounding
    let centered = center_image(&img, &c.mean).unwrap();
    let mut as_raw = centered.clone();
    as_raw.centered = false;
    let mut pre = pad_with_interpolated_border(&as_raw, c.border_px, &convpyr::MeanPixel::zeros(3)).unwrap();
    pre.centered = true;
    let alt = forward(&net, &pre).unwrap();
    for (a, b) in alt.data.iter().zip(&oracle.data) {
        assert!((a - b).abs() <= 1e-3 * (1.0 + b.abs()), "{a} vs {b}");
    }
}

#[test]
fn schedule_640x480_gives_ten_levels() {
    let img = common::random_raw(640, 480, 3, 1);
    let c = PyramidConfig {
        interval: 3,
        max_scale: 2.0,
        min_size_px: 100,
        canvas_w: 1312,
        canvas_h: 1312,
        border_px: 16,
        net: NetConfig { preset: "tiny".into(), seed: 0 },
        ..Default::default()
    };
    let pyra = feat_pyramid(&img, &c).unwrap();
    assert_eq!(pyra.len(), 10);
    assert_eq!(pyra.levels[0].image_dims, (1280, 960));
    assert_eq!(pyra.levels[9].image_dims, (160, 120));
}

#[test]
fn crop_of_one_window_equals_patch_forward() {
    let c = PyramidConfig { max_scale: 1.0, ..cfg("tiny", 9) };
    let img = common::random_raw(80, 64, 3, 21);
    let pyra = feat_pyramid(&img, &c).unwrap();
    let net = c.build_net().unwrap();
    let g = net.geometry();
    let padded = pad_with_interpolated_border(&resample_bilinear(&img, 1.0).unwrap(), c.border_px, &c.mean).unwrap();
    let centered = center_image(&padded, &c.mean).unwrap();
    let b = c.border_px as i64;
    for (fx, fy) in [(4, 4), (7, 5), (12, 9), (5, 13)] {
        let support = g.support(fx, fy);
        // back to source coordinates: level 0 has scale 1
        let src = support.translate(-b, -b);
        let r = pyra.crop_region(&src, (1, 1)).unwrap();
        assert_eq!(r.level_index, 0);
        assert_eq!(r.box_feat, BoxPx::new(fx as i64, fy as i64, fx as i64 + 1, fy as i64 + 1));
        assert_eq!(r.data.data, forward_patch(&net, &centered, &support).unwrap());
    }
}

#[test]
fn crop_picks_scaled_level() {
    // a box of side rf/scale at a down-scaled level maps to one cell there
    let c = PyramidConfig { interval: 1, max_scale: 1.0, min_size_px: 20, border_px: 0, ..cfg("tiny", 2) };
    let img = common::random_raw(120, 120, 3, 8);
    let pyra = feat_pyramid(&img, &c).unwrap();
    let lvl = 2;
    assert_eq!(pyra.levels[lvl].scale, 0.25);
    let net = c.build_net().unwrap();
    let g = net.geometry();
    let (fx, fy) = (3usize, 2usize);
    let s = g.support(fx, fy);
    let src = BoxPx::new(s.x0 * 4, s.y0 * 4, s.x1 * 4, s.y1 * 4);
    let r = pyra.crop_region(&src, (1, 1)).unwrap();
    assert_eq!(r.level_index, lvl);
    assert_eq!((r.data.width, r.data.height), (1, 1));
    let level_img = center_image(&resample_bilinear(&img, 0.25).unwrap(), &c.mean).unwrap();
    assert_eq!(r.data.data, forward_patch(&net, &level_img, &s).unwrap());
}

#[test]
fn persistence_round_trip_is_byte_exact() {
    let dir = tempfile::tempdir().unwrap();
    let img = common::random_raw(70, 50, 3, 2);
    let pyra = feat_pyramid(&img, &cfg("small", 1)).unwrap();
    pyra.save(dir.path().join("a")).unwrap();
    let loaded = FeaturePyramid::load(dir.path().join("a")).unwrap();
    assert_eq!(loaded, pyra);
    loaded.save(dir.path().join("b")).unwrap();
    for entry in std::fs::read_dir(dir.path().join("a")).unwrap() {
        let name = entry.unwrap().file_name();
        let a = std::fs::read(dir.path().join("a").join(&name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(&name)).unwrap();
        assert_eq!(a, b, "{name:?}");
    }
}
