//! Overlay rendering: content tinted over a dark canvas, vessels outlined,
//! and a small legend in the top-left corner.

use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, Rgb, RgbImage};
use vesseleval::{Instance, InstanceKind, SceneAnnotation};

use crate::dataset::write_bytes;
use crate::CliError;

const BACKGROUND: [u8; 3] = [24, 24, 28];
const CONTENT_ALPHA: f64 = 0.55;
const VESSEL_ALPHA: f64 = 0.15;

/// Deterministic colour for an instance id (FNV-1a hash mapped to a hue).
pub fn instance_color(id: &str) -> [u8; 3] {
    let mut h: u32 = 0x811c_9dc5;
    for b in id.bytes() {
        h ^= b as u32;
        h = h.wrapping_mul(0x0100_0193);
    }
    let hue = (h % 360) as f64;
    let sat = 0.55 + (h >> 16 & 0xff) as f64 / 255.0 * 0.4;
    hsv(hue, sat, 0.95)
}

fn hsv(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let x = c * (1.0 - ((h / 60.0) % 2.0 - 1.0).abs());
    let m = v - c;
    let (r, g, b) = match (h / 60.0) as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    [r, g, b].map(|ch| ((ch + m) * 255.0).round() as u8)
}

fn blend(px: &mut Rgb<u8>, color: [u8; 3], alpha: f64) {
    for (p, c) in px.0.iter_mut().zip(color) {
        *p = (*p as f64 * (1.0 - alpha) + c as f64 * alpha).round() as u8;
    }
}

fn fill(img: &mut RgbImage, inst: &Instance, alpha: f64) {
    let w = img.width() as u64;
    let color = instance_color(&inst.id);
    for (start, end) in inst.mask.intervals() {
        for i in start..end {
            blend(img.get_pixel_mut((i % w) as u32, (i / w) as u32), color, alpha);
        }
    }
}

fn outline(img: &mut RgbImage, inst: &Instance) {
    let color = instance_color(&inst.id);
    let (w, h) = (img.width() as i64, img.height() as i64);
    let bits = inst.mask.decode();
    let inside = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && bits[(y * w + x) as usize];
    for (start, end) in inst.mask.intervals() {
        for i in start..end {
            let (x, y) = (i as i64 % w, i as i64 / w);
            let edge = [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(dx, dy)| !inside(x + dx, y + dy));
            if edge {
                img.put_pixel(x as u32, y as u32, Rgb(color));
            }
        }
    }
}

/// 3x5 glyphs, one row per entry, most significant of the three bits on the left.
fn glyph(c: char) -> [u8; 5] {
    match c.to_ascii_lowercase() {
        '0' => [7, 5, 5, 5, 7],
        '1' => [2, 6, 2, 2, 7],
        '2' => [7, 1, 7, 4, 7],
        '3' => [7, 1, 7, 1, 7],
        '4' => [5, 5, 7, 1, 1],
        '5' => [7, 4, 7, 1, 7],
        '6' => [7, 4, 7, 5, 7],
        '7' => [7, 1, 1, 1, 1],
        '8' => [7, 5, 7, 5, 7],
        '9' => [7, 5, 7, 1, 7],
        'a' => [2, 5, 7, 5, 5],
        'b' => [6, 5, 6, 5, 6],
        'c' => [3, 4, 4, 4, 3],
        'd' => [6, 5, 5, 5, 6],
        'e' => [7, 4, 6, 4, 7],
        'f' => [7, 4, 6, 4, 4],
        'g' => [3, 4, 5, 5, 3],
        'h' => [5, 5, 7, 5, 5],
        'i' => [7, 2, 2, 2, 7],
        'j' => [1, 1, 1, 5, 2],
        'k' => [5, 5, 6, 5, 5],
        'l' => [4, 4, 4, 4, 7],
        'm' => [5, 7, 7, 5, 5],
        'n' => [6, 5, 5, 5, 5],
        'o' => [2, 5, 5, 5, 2],
        'p' => [6, 5, 6, 4, 4],
        'q' => [2, 5, 5, 6, 3],
        'r' => [6, 5, 6, 5, 5],
        's' => [3, 4, 2, 1, 6],
        't' => [7, 2, 2, 2, 2],
        'u' => [5, 5, 5, 5, 7],
        'v' => [5, 5, 5, 5, 2],
        'w' => [5, 5, 7, 7, 5],
        'x' => [5, 5, 2, 5, 5],
        'y' => [5, 5, 2, 2, 2],
        'z' => [7, 1, 2, 4, 7],
        '_' => [0, 0, 0, 0, 7],
        '-' => [0, 0, 7, 0, 0],
        '.' => [0, 0, 0, 0, 2],
        ' ' => [0; 5],
        _ => [7, 1, 2, 0, 2],
    }
}

fn text(img: &mut RgbImage, x: u32, y: u32, s: &str, scale: u32, color: [u8; 3]) {
    for (k, c) in s.chars().enumerate() {
        let gx = x + k as u32 * 4 * scale;
        for (row, bits) in glyph(c).iter().enumerate() {
            for col in 0..3 {
                if bits >> (2 - col) & 1 == 1 {
                    for dy in 0..scale {
                        for dx in 0..scale {
                            let (px, py) = (gx + col * scale + dx, y + row as u32 * scale + dy);
                            if px < img.width() && py < img.height() {
                                img.put_pixel(px, py, Rgb(color));
                            }
                        }
                    }
                }
            }
        }
    }
}

fn legend(img: &mut RgbImage, scene: &SceneAnnotation) {
    let scale = if img.width() >= 512 { 2 } else { 1 };
    let line = 7 * scale;
    let rows = (img.height().saturating_sub(2) / line) as usize;
    for (k, inst) in scene.instances.iter().take(rows).enumerate() {
        let classes: Vec<&str> = inst.classes.iter().map(|c| c.as_str()).collect();
        let y = 2 + k as u32 * line;
        let swatch = instance_color(&inst.id);
        for dy in 0..5 * scale {
            for dx in 0..5 * scale {
                if 2 + dx < img.width() && y + dy < img.height() {
                    img.put_pixel(2 + dx, y + dy, Rgb(swatch));
                }
            }
        }
        text(img, 4 + 6 * scale, y, &format!("{} {}", inst.id, classes.join(" ")), scale, [230, 230, 230]);
    }
}

/// Draws `scene` and returns the PNG bytes.
pub fn render_png(scene: &SceneAnnotation) -> Vec<u8> {
    let mut img = RgbImage::from_pixel(scene.width, scene.height, Rgb(BACKGROUND));
    let of = |kind: InstanceKind| scene.instances.iter().filter(move |i| i.kind == kind);
    for v in of(InstanceKind::Vessel) {
        fill(&mut img, v, VESSEL_ALPHA);
    }
    for i in of(InstanceKind::Material).chain(of(InstanceKind::Part)) {
        fill(&mut img, i, CONTENT_ALPHA);
    }
    for v in of(InstanceKind::Vessel) {
        outline(&mut img, v);
    }
    legend(&mut img, scene);
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png).expect("in-memory png");
    out.into_inner()
}

pub fn render_to(scene: &SceneAnnotation, path: &Path) -> Result<(), CliError> {
    write_bytes(path, &render_png(scene))
}
