//! Receptive-field geometry checked against a brute-force perturbation
//! oracle, plus scale-schedule properties.

mod common;

use std::collections::BTreeSet;

use convpyr::geometry::{scaled_dim, ScaleSchedule};
use convpyr::{build_scale_schedule, forward, image_box_to_feature_box, BoxPx, ConvNetSpec, Image, NetGeometry};
use proptest::prelude::*;

use common::random_spec;

/// Pixels whose perturbation changes output cell (cx, cy).
fn measured_support(spec: &ConvNetSpec, size: usize, cells: &[(usize, usize)]) -> Vec<BTreeSet<(usize, usize)>> {
    let c = spec.input_channels;
    let mut img = Image::new(size, size, c, vec![0.5; size * size * c]).unwrap();
    img.centered = true;
    let base = forward(spec, &img).unwrap();
    let mut support = vec![BTreeSet::new(); cells.len()];
    for y in 0..size {
        for x in 0..size {
            let mut p = img.clone();
            let i = p.index(x, y);
            for v in &mut p.data[i..i + c] {
                *v += 1000.0;
            }
            let out = forward(spec, &p).unwrap();
            for (k, &(cx, cy)) in cells.iter().enumerate() {
                if out.cell(cx, cy) != base.cell(cx, cy) {
                    support[k].insert((x, y));
                }
            }
        }
    }
    support
}

fn span(s: &BTreeSet<(usize, usize)>) -> (usize, usize, usize, usize) {
    let xs = s.iter().map(|p| p.0);
    let ys = s.iter().map(|p| p.1);
    (xs.clone().min().unwrap(), xs.max().unwrap(), ys.clone().min().unwrap(), ys.max().unwrap())
}

fn check_against_oracle(spec: &ConvNetSpec) {
    let g = spec.geometry();
    // large enough for at least two cells per axis, computed from the
    // oracle-free upper bound on the receptive field
    let (mut bound, mut jump) = (1usize, 1usize);
    for (k, s) in spec.layers.iter().filter_map(|l| l.window()) {
        bound += (k.max(s) - 1) * jump + 1;
        jump *= s;
    }
    let size = bound + jump + 1;
    let sup = measured_support(spec, size, &[(0, 0), (1, 0), (0, 1)]);
    let (x0, x1, y0, y1) = span(&sup[0]);
    assert_eq!((x0, y0), (0, 0));
    assert_eq!(x1 - x0 + 1, g.receptive_field, "rf width");
    assert_eq!(y1 - y0 + 1, g.receptive_field, "rf height");
    assert_eq!(((x0 + x1) / 2) as i64, g.offset, "first-window center");
    let (nx0, ..) = span(&sup[1]);
    let (_, _, ny0, _) = span(&sup[2]);
    assert_eq!(nx0 - x0, g.total_stride, "stride x");
    assert_eq!(ny0 - y0, g.total_stride, "stride y");
    let product: usize = spec.layers.iter().filter_map(|l| l.window()).map(|w| w.1).product();
    assert_eq!(g.total_stride, product);
}

fn positive_spec(windows: &[(usize, usize)], out: usize) -> ConvNetSpec {
    use convpyr::LayerSpec;
    let mut layers = Vec::new();
    let mut ch = 1;
    for (i, &(k, s)) in windows.iter().enumerate() {
        if i % 2 == 1 {
            layers.push(LayerSpec::MaxPool { kernel: k, stride: s });
        } else {
            let n = out * ch * k * k;
            layers.push(LayerSpec::Conv {
                kernel: k,
                stride: s,
                out_channels: out,
                weights: (0..n).map(|v| 0.2 + (v % 7) as f32 * 0.1).collect(),
                bias: vec![0.1; out],
            });
            layers.push(LayerSpec::Relu);
            ch = out;
        }
    }
    ConvNetSpec::new(1, layers, 0).unwrap()
}

#[test]
fn oracle_conv11s4_pool3s2() {
    let spec = positive_spec(&[(11, 4), (3, 2)], 2);
    let g = spec.geometry();
    assert_eq!((g.total_stride, g.receptive_field), (8, 19));
    check_against_oracle(&spec);
}

#[test]
fn oracle_conv5s2_pool2s2_conv3s1() {
    let spec = positive_spec(&[(5, 2), (2, 2), (3, 1)], 2);
    let g = spec.geometry();
    assert_eq!((g.total_stride, g.receptive_field), (4, 15));
    check_against_oracle(&spec);
}

#[test]
fn oracle_presets() {
    for preset in ["tiny", "small"] {
        // presets have signed weights; swap in positive ones of the same shape
        let spec = convpyr::make_toy_net(preset, 0).unwrap();
        let windows: Vec<_> = spec.layers.iter().filter_map(|l| l.window()).collect();
        let pos = positive_spec(&windows, 2);
        assert_eq!(pos.geometry(), spec.geometry());
        check_against_oracle(&pos);
    }
}

#[test]
fn oracle_random_specs() {
    for seed in 0..40 {
        let spec = random_spec(seed, 1, true);
        check_against_oracle(&spec);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn schedule_ratio_and_maximality(
        w in 1usize..3000,
        h in 1usize..3000,
        interval in 1usize..12,
        max_scale in 0.1f64..4.0,
        min_frac in 0.0f64..1.0,
    ) {
        let short = w.min(h);
        let top = scaled_dim(short, max_scale);
        prop_assume!(top >= 1);
        let min_size = 1 + ((top - 1) as f64 * min_frac) as usize;
        let s = build_scale_schedule(w, h, interval, max_scale, min_size).unwrap();
        prop_assert_eq!(s.scales[0], max_scale);
        let expected = 2f64.powf(-1.0 / interval as f64);
        for pair in s.scales.windows(2) {
            prop_assert!(pair[1] < pair[0]);
            prop_assert!(((pair[1] / pair[0]) - expected).abs() <= 1e-9 * expected);
        }
        for &sc in &s.scales {
            prop_assert!(scaled_dim(short, sc) >= min_size);
        }
        let next = ScaleSchedule::scale_at(max_scale, interval, s.len());
        prop_assert!(scaled_dim(short, next) < min_size);
    }

    #[test]
    fn center_box_maps_back_to_cell(
        stride in 1usize..20,
        rf_extra in 0usize..40,
        f in 0i64..50,
        fy in 0i64..50,
    ) {
        let rf = stride + rf_extra;
        let g = NetGeometry { total_stride: stride, receptive_field: rf, offset: ((rf - 1) / 2) as i64 };
        let (cx, cy) = (g.center(f), g.center(fy));
        let fb = image_box_to_feature_box(&BoxPx::new(cx, cy, cx + 1, cy + 1), &g, (50, 50)).unwrap();
        prop_assert!(fb.contains_point(f, fy));
    }
}
