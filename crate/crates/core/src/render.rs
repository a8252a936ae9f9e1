//! Set-of-Marks overlay rendering.
//!
//! Boxes are outlined in a per-label color and a filled badge carrying the
//! label number is drawn at the box's top-left corner. Digits come from a
//! built-in 3x5 bitmap font so output is identical on every machine.

use image::{Rgb, RgbImage};

use crate::elements::SomLayout;

pub const OUTLINE_PX: u32 = 2;
pub const GLYPH_SCALE: u32 = 2;
const GLYPH_W: u32 = 3;
const GLYPH_H: u32 = 5;
const BADGE_PAD: u32 = 2;

pub const PALETTE: [[u8; 3]; 10] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [128, 128, 0],
    [0, 128, 128],
    [170, 110, 40],
];

// Rows of each digit, three bits per row, most significant bit leftmost.
const DIGITS: [[u8; 5]; 10] = [
    [0b111, 0b101, 0b101, 0b101, 0b111],
    [0b010, 0b110, 0b010, 0b010, 0b111],
    [0b111, 0b001, 0b111, 0b100, 0b111],
    [0b111, 0b001, 0b111, 0b001, 0b111],
    [0b101, 0b101, 0b111, 0b001, 0b001],
    [0b111, 0b100, 0b111, 0b001, 0b111],
    [0b111, 0b100, 0b111, 0b101, 0b111],
    [0b111, 0b001, 0b010, 0b010, 0b010],
    [0b111, 0b101, 0b111, 0b101, 0b111],
    [0b111, 0b101, 0b111, 0b001, 0b111],
];

pub fn label_color(label: u32) -> Rgb<u8> {
    Rgb(PALETTE[(label.saturating_sub(1) % PALETTE.len() as u32) as usize])
}

/// Pixel rectangle `(x, y, w, h)` of the label badge for a box whose pixel
/// top-left is `(left, top)`, shifted as needed to stay inside the raster.
pub fn badge_rect(label: u32, left: u32, top: u32, width: u32, height: u32) -> (u32, u32, u32, u32) {
    let digits = label.to_string().len() as u32;
    let bw = (BADGE_PAD + digits * (GLYPH_W * GLYPH_SCALE + BADGE_PAD)).min(width);
    let bh = (GLYPH_H * GLYPH_SCALE + 2 * BADGE_PAD).min(height);
    let x = left.min(width - bw);
    let y = top.min(height - bh);
    (x, y, bw, bh)
}

fn fill(img: &mut RgbImage, x: u32, y: u32, w: u32, h: u32, c: Rgb<u8>) {
    let (iw, ih) = img.dimensions();
    for yy in y..(y + h).min(ih) {
        for xx in x..(x + w).min(iw) {
            img.put_pixel(xx, yy, c);
        }
    }
}

/// Draws the layout over a copy of `raster`.
pub fn render_som(raster: &RgbImage, layout: &SomLayout) -> RgbImage {
    let mut out = raster.clone();
    let (w, h) = out.dimensions();
    if w == 0 || h == 0 {
        return out;
    }
    for el in &layout.elements {
        let c = label_color(el.label);
        let (l, t, r, b) = el.bbox.to_pixels(w, h);
        let bw = r - l;
        let bh = b - t;
        let th = OUTLINE_PX.min(bw).min(bh);
        fill(&mut out, l, t, bw, th, c);
        fill(&mut out, l, b - th, bw, th, c);
        fill(&mut out, l, t, th, bh, c);
        fill(&mut out, r - th, t, th, bh, c);
    }
    // Badges after all outlines so neighbouring boxes never cover a number.
    for el in &layout.elements {
        let c = label_color(el.label);
        let (l, t, _, _) = el.bbox.to_pixels(w, h);
        let (x, y, bw, bh) = badge_rect(el.label, l, t, w, h);
        fill(&mut out, x, y, bw, bh, c);
        let white = Rgb([255, 255, 255]);
        for (k, ch) in el.label.to_string().chars().enumerate() {
            let glyph = DIGITS[ch.to_digit(10).unwrap() as usize];
            let gx = x + BADGE_PAD + k as u32 * (GLYPH_W * GLYPH_SCALE + BADGE_PAD);
            let gy = y + BADGE_PAD;
            for (row, bits) in glyph.iter().enumerate() {
                for col in 0..GLYPH_W {
                    if bits & (1 << (GLYPH_W - 1 - col)) != 0 {
                        let px = gx + col * GLYPH_SCALE;
                        let py = gy + row as u32 * GLYPH_SCALE;
                        // Clip to the badge so the mask of touched pixels stays exact.
                        let cw = GLYPH_SCALE.min((x + bw).saturating_sub(px));
                        let chh = GLYPH_SCALE.min((y + bh).saturating_sub(py));
                        fill(&mut out, px, py, cw, chh, white);
                    }
                }
            }
        }
    }
    out
}
