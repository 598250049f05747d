//! Scalp topographic maps: the segment's potentials at its median sample,
//! interpolated over the head disk and rendered with a diverging colormap.

pub mod layout;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Segment;

pub use layout::{Electrode, ElectrodeLayout};

pub const DEFAULT_GRID: usize = 224;
pub const SCALE_PERCENTILE: f64 = 98.0;
const IDW_POWER: i32 = 2;
const MIN_ELECTRODES: usize = 4;

/// Column `⌊T/2⌋` of the segment, paired with channel names.
pub fn sample_at_median(seg: &Segment) -> Vec<(String, f64)> {
    let tau = seg.n_samples() / 2;
    seg.channels
        .iter()
        .zip(&seg.data)
        .map(|(name, row)| (name.clone(), row[tau]))
        .collect()
}

/// Inverse-distance-weighted (power 2) value at `(x, y)`. A query that
/// coincides with an electrode returns that electrode's value.
pub fn idw_at(x: f64, y: f64, points: &[(f64, f64, f64)]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for &(px, py, v) in points {
        let d2 = (x - px).powi(2) + (y - py).powi(2);
        if d2 == 0.0 {
            return v;
        }
        let w = 1.0 / d2.powi(IDW_POWER / 2);
        num += w * v;
        den += w;
    }
    num / den
}

/// Pixel-center coordinates in the unit square, y pointing up.
pub fn pixel_coords(row: usize, col: usize, h: usize, w: usize) -> (f64, f64) {
    let x = 2.0 * (col as f64 + 0.5) / w as f64 - 1.0;
    let y = 1.0 - 2.0 * (row as f64 + 0.5) / h as f64;
    (x, y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub h: usize,
    pub w: usize,
    /// Row-major values in μV; zero outside the mask.
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

pub fn interpolate_grid(
    values: &[(String, f64)],
    layout: &ElectrodeLayout,
    h: usize,
    w: usize,
) -> Result<Field> {
    let points: Vec<(f64, f64, f64)> = values
        .iter()
        .filter_map(|(name, v)| layout.position(name).map(|(x, y)| (x, y, *v)))
        .collect();
    if points.len() < MIN_ELECTRODES {
        return Err(Error::Render(format!(
            "{} positioned channels, need at least {MIN_ELECTRODES}",
            points.len()
        )));
    }
    let mut field = vec![0.0; h * w];
    let mut mask = vec![false; h * w];
    for r in 0..h {
        for c in 0..w {
            let (x, y) = pixel_coords(r, c, h, w);
            if x * x + y * y <= 1.0 {
                mask[r * w + c] = true;
                field[r * w + c] = idw_at(x, y, &points);
            }
        }
    }
    Ok(Field { h, w, values: field, mask })
}

/// Diverging blue–white–red color for `v` on the symmetric scale ±`v_abs`.
pub fn colormap(v: f64, v_abs: f64) -> [u8; 3] {
    let t = (v / v_abs).clamp(-1.0, 1.0);
    let fade = (255.0 * (1.0 - t.abs())).round() as u8;
    if t >= 0.0 {
        [255, fade, fade]
    } else {
        [fade, fade, 255]
    }
}

/// RGB bytes, row-major. Outside the mask is white; mask pixels touching
/// the outside (or the image border) form a 1-px black head outline.
pub fn render_image(field: &Field, v_abs: f64) -> Result<Vec<u8>> {
    if !(v_abs > 0.0 && v_abs.is_finite()) {
        return Err(Error::Render(format!("color scale {v_abs} must be positive")));
    }
    let (h, w) = (field.h, field.w);
    let inside = |r: isize, c: isize| {
        r >= 0 && c >= 0 && (r as usize) < h && (c as usize) < w && field.mask[r as usize * w + c as usize]
    };
    let mut img = Vec::with_capacity(h * w * 3);
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            let px = if !field.mask[i] {
                [255, 255, 255]
            } else {
                let (ri, ci) = (r as isize, c as isize);
                let edge = !(inside(ri - 1, ci) && inside(ri + 1, ci) && inside(ri, ci - 1) && inside(ri, ci + 1));
                if edge {
                    [0, 0, 0]
                } else {
                    colormap(field.values[i], v_abs)
                }
            };
            img.extend_from_slice(&px);
        }
    }
    Ok(img)
}

/// Linear-interpolated percentile of `|values|`; 1.0 when all are zero.
pub fn color_scale(values: &[f64]) -> f64 {
    let mut abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    if abs.is_empty() {
        return 1.0;
    }
    abs.sort_by(f64::total_cmp);
    let pos = SCALE_PERCENTILE / 100.0 * (abs.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let v = abs[lo] + (abs[hi] - abs[lo]) * (pos - lo as f64);
    if v > 0.0 {
        v
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RendererMeta {
    pub interpolation: String,
    pub height: usize,
    pub width: usize,
    pub colormap: String,
    pub scale_percentile: f64,
    pub v_abs: f64,
    pub layout_version: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topomap {
    pub field: Field,
    pub image: Vec<u8>,
    pub meta: RendererMeta,
}

impl Topomap {
    pub fn to_png(&self) -> Result<Vec<u8>> {
        encode_png(&self.image, self.field.w, self.field.h)
    }
}

pub fn render_topomap(seg: &Segment, layout: &ElectrodeLayout, h: usize, w: usize) -> Result<Topomap> {
    let values: Vec<(String, f64)> = sample_at_median(seg)
        .into_iter()
        .filter(|(name, _)| layout.contains(name))
        .collect();
    let field = interpolate_grid(&values, layout, h, w)?;
    let v_abs = color_scale(&values.iter().map(|(_, v)| *v).collect::<Vec<_>>());
    let image = render_image(&field, v_abs)?;
    Ok(Topomap {
        field,
        image,
        meta: RendererMeta {
            interpolation: "idw-p2".into(),
            height: h,
            width: w,
            colormap: "blue-white-red-linear".into(),
            scale_percentile: SCALE_PERCENTILE,
            v_abs,
            layout_version: layout.version.clone(),
        },
    })
}

pub fn encode_png(rgb: &[u8], width: usize, height: usize) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc
            .write_header()
            .map_err(|e| Error::Render(format!("png header: {e}")))?;
        writer
            .write_image_data(rgb)
            .map_err(|e| Error::Render(format!("png data: {e}")))?;
    }
    Ok(out)
}

/// Decodes an 8-bit RGB PNG into `(rgb, width, height)`.
pub fn decode_png(bytes: &[u8]) -> Result<(Vec<u8>, usize, usize)> {
    let decoder = png::Decoder::new(bytes);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Render(format!("png decode: {e}")))?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Render(format!("png decode: {e}")))?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(Error::Render("expected 8-bit RGB png".into()));
    }
    buf.truncate(info.buffer_size());
    Ok((buf, info.width as usize, info.height as usize))
}
