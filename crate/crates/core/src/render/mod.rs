//! Rasterization of symbolic frames into RGB images.
//!
//! Integer-only drawing: each object is its glyph mask filled with its palette
//! color in a box of `canvas / 4` pixels centered at `(x * canvas, y * canvas)`.
//! Later objects draw over earlier ones. Background is black.

mod font;
mod glyph;
mod palette;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::scene::Frame;

pub use font::{FONT_HEIGHT, FONT_WIDTH, LETTERS};
pub use glyph::{glyph, Mask, MIN_BOX};
pub use palette::{color_of, rgb, Rgb, BACKGROUND, PALETTE};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("png: {0}")]
    Encode(#[from] png::EncodingError),
    #[error("png: {0}")]
    Decode(#[from] png::DecodingError),
    #[error("expected an 8-bit RGB image, got {0:?} at {1:?}")]
    Format(png::ColorType, png::BitDepth),
}

/// Row-major 8-bit RGB image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: u32, height: u32) -> Self {
        Image {
            width,
            height,
            pixels: vec![0; width as usize * height as usize * 3],
        }
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set(&mut self, x: u32, y: u32, c: Rgb) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&c);
    }

    /// Copies `src` with its top-left corner at `(x, y)`, clipping at the edges.
    pub fn blit(&mut self, src: &Image, x: u32, y: u32) {
        for sy in 0..src.height.min(self.height.saturating_sub(y)) {
            for sx in 0..src.width.min(self.width.saturating_sub(x)) {
                self.set(x + sx, y + sy, src.get(sx, sy));
            }
        }
    }

    /// Hex sha256 of the raw pixel bytes.
    pub fn pixel_hash(&self) -> String {
        hex_digest(&self.pixels)
    }

    pub fn to_png(&self) -> Result<Vec<u8>, RenderError> {
        let mut out = Vec::new();
        let mut enc = png::Encoder::new(&mut out, self.width, self.height);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header()?;
        writer.write_image_data(&self.pixels)?;
        writer.finish()?;
        Ok(out)
    }

    pub fn from_png(bytes: &[u8]) -> Result<Image, RenderError> {
        let mut reader = png::Decoder::new(std::io::Cursor::new(bytes)).read_info()?;
        let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
        let info = reader.next_frame(&mut buf)?;
        if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
            return Err(RenderError::Format(info.color_type, info.bit_depth));
        }
        buf.truncate(info.buffer_size());
        Ok(Image {
            width: info.width,
            height: info.height,
            pixels: buf,
        })
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Side of the glyph box for a canvas.
pub fn glyph_box(canvas: u32) -> usize {
    (canvas / 4) as usize
}

/// Pixel of the top-left corner of an object's glyph box, which may lie off
/// the canvas.
pub fn box_origin(x: f64, y: f64, canvas: u32) -> (i64, i64) {
    let half = glyph_box(canvas) as i64 / 2;
    let px = |v: f64| (v * canvas as f64).floor() as i64 - half;
    (px(x), px(y))
}

pub fn rasterize_frame(frame: &Frame, canvas: u32) -> Image {
    let mut img = Image::new(canvas, canvas);
    let size = glyph_box(canvas);
    for obj in &frame.objects {
        let mask = glyph(obj.shape, size);
        let color = rgb(obj.color);
        let (ox, oy) = box_origin(obj.loc.x, obj.loc.y, canvas);
        for my in 0..size {
            for mx in 0..size {
                let (x, y) = (ox + mx as i64, oy + my as i64);
                if mask.get(mx, my) && (0..canvas as i64).contains(&x) && (0..canvas as i64).contains(&y) {
                    img.set(x as u32, y as u32, color);
                }
            }
        }
    }
    img
}

/// Frames side by side, one row per sequence, separated by a 2 pixel grey
/// gutter.
pub fn contact_sheet(rows: &[Vec<Image>]) -> Image {
    const GUTTER: u32 = 2;
    let Some(tile) = rows.iter().flatten().next() else {
        return Image::new(0, 0);
    };
    let (w, h) = (tile.width, tile.height);
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0) as u32;
    let mut sheet = Image::new(cols * (w + GUTTER) + GUTTER, rows.len() as u32 * (h + GUTTER) + GUTTER);
    sheet.pixels.fill(64);
    for (r, row) in rows.iter().enumerate() {
        for (c, img) in row.iter().enumerate() {
            sheet.blit(img, GUTTER + c as u32 * (w + GUTTER), GUTTER + r as u32 * (h + GUTTER));
        }
    }
    sheet
}
