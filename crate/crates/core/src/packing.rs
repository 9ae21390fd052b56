//! Bottom-left-fill packing of bordered pyramid levels onto fixed-size
//! canvases.
//!
//! Placement uses the anchor-point variant: candidate anchors are the
//! canvas origin plus, for every existing placement, the point right of its
//! first row and the point below its first column. The lowest feasible
//! anchor wins, ties broken leftmost. Levels are visited by decreasing
//! height, then decreasing width, then index. A new canvas opens only when
//! no existing canvas has a feasible anchor.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoxPx;
use crate::imaging::{center_image, Image, MeanPixel};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub level_index: usize,
    pub canvas_index: usize,
    /// Image content, canvas coordinates.
    pub inner_box: BoxPx,
    /// Content plus border.
    pub outer_box: BoxPx,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanvasPlan {
    pub canvas_w: usize,
    pub canvas_h: usize,
    pub border_px: usize,
    /// Every outer box origin is a multiple of this.
    pub align: usize,
    /// Indexed by level.
    pub placements: Vec<Placement>,
    pub canvas_count: usize,
}

impl CanvasPlan {
    pub fn on_canvas(&self, canvas: usize) -> impl Iterator<Item = &Placement> {
        self.placements.iter().filter(move |p| p.canvas_index == canvas)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Occupancy mask for one canvas: 255 content, 128 border, 0 background.
    pub fn occupancy_mask(&self, canvas: usize) -> Vec<u8> {
        let mut mask = vec![0u8; self.canvas_w * self.canvas_h];
        let mut paint = |b: &BoxPx, v: u8| {
            for y in b.y0..b.y1 {
                let row = y as usize * self.canvas_w;
                mask[row + b.x0 as usize..row + b.x1 as usize].fill(v);
            }
        };
        for p in self.on_canvas(canvas) {
            paint(&p.outer_box, 128);
            paint(&p.inner_box, 255);
        }
        mask
    }

    /// Writes `plan.json` plus one `canvas_NN_mask.pgm` per canvas.
    pub fn write_debug(&self, dir: impl AsRef<Path>, masks: bool) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        fs::write(dir.join("plan.json"), self.to_json()?)?;
        if masks {
            for c in 0..self.canvas_count {
                let mut bytes = format!("P5\n{} {}\n255\n", self.canvas_w, self.canvas_h).into_bytes();
                bytes.extend(self.occupancy_mask(c));
                fs::write(dir.join(format!("canvas_{c:02}_mask.pgm")), bytes)?;
            }
        }
        Ok(())
    }
}

fn round_up(v: usize, m: usize) -> usize {
    v.div_ceil(m) * m
}

/// Packs levels of the given `(w, h)` with a `border_px` frame each.
pub fn pack_blf(
    level_dims: &[(usize, usize)],
    canvas_w: usize,
    canvas_h: usize,
    border_px: usize,
) -> Result<CanvasPlan> {
    pack_blf_aligned(level_dims, canvas_w, canvas_h, border_px, 1)
}

/// As [`pack_blf`], but every outer box starts on a multiple of `align`.
/// Each level reserves its outer size rounded up to `align`; the extra
/// strip is background.
pub fn pack_blf_aligned(
    level_dims: &[(usize, usize)],
    canvas_w: usize,
    canvas_h: usize,
    border_px: usize,
    align: usize,
) -> Result<CanvasPlan> {
    if canvas_w == 0 || canvas_h == 0 || align == 0 {
        return Err(Error::InvalidArgument("canvas dims and alignment must be positive".into()));
    }
    let mut order: Vec<usize> = (0..level_dims.len()).collect();
    order.sort_by(|&a, &b| {
        let (wa, ha) = level_dims[a];
        let (wb, hb) = level_dims[b];
        hb.cmp(&ha).then(wb.cmp(&wa)).then(a.cmp(&b))
    });

    // reserved footprints per canvas
    let mut canvases: Vec<Vec<BoxPx>> = Vec::new();
    let mut slots: Vec<Option<Placement>> = vec![None; level_dims.len()];
    for level in order {
        let (w, h) = level_dims[level];
        if w == 0 || h == 0 {
            return Err(Error::InvalidArgument(format!("level {level} has zero size")));
        }
        let (ow, oh) = (w + 2 * border_px, h + 2 * border_px);
        if ow > canvas_w || oh > canvas_h {
            return Err(Error::LevelTooLarge { level, w: ow, h: oh, canvas_w, canvas_h });
        }
        let (fw, fh) = (round_up(ow, align) as i64, round_up(oh, align) as i64);
        let fits = |x: i64, y: i64, taken: &[BoxPx]| {
            x + ow as i64 <= canvas_w as i64
                && y + oh as i64 <= canvas_h as i64
                && !taken.iter().any(|t| t.intersects(&BoxPx::new(x, y, x + fw, y + fh)))
        };
        let found = canvases.iter().enumerate().find_map(|(ci, taken)| {
            std::iter::once((0, 0))
                .chain(taken.iter().flat_map(|t| [(t.x1, t.y0), (t.x0, t.y1)]))
                .filter(|&(x, y)| fits(x, y, taken))
                .min_by_key(|&(x, y)| (y, x))
                .map(|(x, y)| (ci, x, y))
        });
        let (ci, x, y) = found.unwrap_or_else(|| {
            canvases.push(Vec::new());
            (canvases.len() - 1, 0, 0)
        });
        canvases[ci].push(BoxPx::new(x, y, x + fw, y + fh));
        let outer = BoxPx::new(x, y, x + ow as i64, y + oh as i64);
        slots[level] = Some(Placement {
            level_index: level,
            canvas_index: ci,
            inner_box: outer.inflate(-(border_px as i64)),
            outer_box: outer,
        });
    }
    Ok(CanvasPlan {
        canvas_w,
        canvas_h,
        border_px,
        align,
        placements: slots.into_iter().map(|p| p.expect("every level placed")).collect(),
        canvas_count: canvases.len(),
    })
}

/// Fills each canvas with the mean, blits the padded levels at their outer
/// boxes and centers the result, so background is exactly zero.
pub fn render_canvases(
    plan: &CanvasPlan,
    padded_levels: &[Image],
    mean: &MeanPixel,
) -> Result<Vec<Image>> {
    if padded_levels.len() != plan.placements.len() {
        return Err(Error::DimMismatch(format!(
            "plan has {} placements but {} levels were given",
            plan.placements.len(),
            padded_levels.len()
        )));
    }
    for (p, img) in plan.placements.iter().zip(padded_levels) {
        if img.width as i64 != p.outer_box.width() || img.height as i64 != p.outer_box.height() {
            return Err(Error::DimMismatch(format!(
                "level {} is {}x{}, outer box is {}x{}",
                p.level_index,
                img.width,
                img.height,
                p.outer_box.width(),
                p.outer_box.height()
            )));
        }
        if img.channels != mean.channels() {
            return Err(Error::ChannelMismatch { expected: mean.channels(), actual: img.channels });
        }
    }
    (0..plan.canvas_count)
        .into_par_iter()
        .map(|c| {
            let mut canvas = Image::filled(plan.canvas_w, plan.canvas_h, mean.values());
            for p in plan.on_canvas(c) {
                let img = &padded_levels[p.level_index];
                canvas.blit(img, p.outer_box.x0 as usize, p.outer_box.y0 as usize)?;
            }
            center_image(&canvas, mean)
        })
        .collect()
}
