//! Rasterization of an observation into a marked RGB image: a simple
//! column-height wall render plus labeled discs at frontier pixel centroids,
//! encoded as binary PPM for transport to a vision-language model.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::camera::CameraModel;
use crate::num;
use crate::scoring::MarkedFrontierSet;
use crate::sim::Observation;

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB triplets, top row first.
    pub pixels: Vec<u8>,
}

impl Raster {
    pub fn new(width: usize, height: usize) -> Self {
        Raster { width, height, pixels: vec![0; width * height * 3] }
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn put(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        if x < self.width && y < self.height {
            let i = (y * self.width + x) * 3;
            self.pixels[i..i + 3].copy_from_slice(&rgb);
        }
    }

    /// Binary PPM (P6) encoding.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.pixels.len() + 32);
        let header = alloc::format!("P6\n{} {}\n255\n", self.width, self.height);
        out.extend_from_slice(header.as_bytes());
        out.extend_from_slice(&self.pixels);
        out
    }
}

const CEILING: [u8; 3] = [32, 32, 44];
const FLOOR: [u8; 3] = [52, 52, 46];
const MARK_FILL: [u8; 3] = [255, 214, 64];
const MARK_TEXT: [u8; 3] = [16, 16, 16];
const MARK_RADIUS: isize = 6;

/// Distinct colors for object instances, cycled by id.
const INSTANCE_PALETTE: [[u8; 3]; 8] = [
    [196, 64, 64],
    [64, 160, 84],
    [70, 100, 200],
    [190, 150, 60],
    [150, 80, 180],
    [70, 170, 170],
    [200, 110, 150],
    [120, 140, 70],
];

fn wall_color(depth: f64, max_depth: f64, instance: Option<u32>) -> [u8; 3] {
    let near = 1.0 - num::clamp(depth / max_depth, 0.0, 1.0);
    let base = match instance {
        Some(id) => INSTANCE_PALETTE[id as usize % INSTANCE_PALETTE.len()],
        None => [160, 160, 160],
    };
    let scale = 0.35 + 0.65 * near;
    [
        (base[0] as f64 * scale) as u8,
        (base[1] as f64 * scale) as u8,
        (base[2] as f64 * scale) as u8,
    ]
}

/// 5x7 uppercase glyphs, one byte per row, low 5 bits used (MSB-left).
const FONT_5X7: [[u8; 7]; 26] = [
    [0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11], // A
    [0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E], // B
    [0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E], // C
    [0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C], // D
    [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F], // E
    [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10], // F
    [0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F], // G
    [0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11], // H
    [0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E], // I
    [0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C], // J
    [0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11], // K
    [0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F], // L
    [0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11], // M
    [0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11], // N
    [0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E], // O
    [0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10], // P
    [0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D], // Q
    [0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11], // R
    [0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E], // S
    [0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04], // T
    [0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E], // U
    [0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04], // V
    [0x11, 0x11, 0x11, 0x15, 0x15, 0x1B, 0x11], // W
    [0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11], // X
    [0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04], // Y
    [0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F], // Z
];

fn draw_glyph(img: &mut Raster, letter: char, cx: isize, cy: isize, rgb: [u8; 3]) {
    let idx = (letter as u8).wrapping_sub(b'A') as usize;
    if idx >= 26 {
        return;
    }
    let rows = &FONT_5X7[idx];
    for (ry, row) in rows.iter().enumerate() {
        for rx in 0..5 {
            if row & (0x10 >> rx) != 0 {
                let x = cx - 2 + rx as isize;
                let y = cy - 3 + ry as isize;
                if x >= 0 && y >= 0 {
                    img.put(x as usize, y as usize, rgb);
                }
            }
        }
    }
}

fn draw_mark(img: &mut Raster, letter: char, px: (f64, f64)) {
    let cx = num::round(px.0) as isize;
    let cy = num::round(px.1) as isize;
    for dy in -MARK_RADIUS..=MARK_RADIUS {
        for dx in -MARK_RADIUS..=MARK_RADIUS {
            if dx * dx + dy * dy <= MARK_RADIUS * MARK_RADIUS {
                let (x, y) = (cx + dx, cy + dy);
                if x >= 0 && y >= 0 {
                    img.put(x as usize, y as usize, MARK_FILL);
                }
            }
        }
    }
    draw_glyph(img, letter, cx, cy, MARK_TEXT);
}

/// Renders the observation with frontier marks burned in. Wall slab height
/// shrinks with depth; columns at max range show only ceiling and floor.
pub fn render_raster(obs: &Observation, camera: &CameraModel, marks: &MarkedFrontierSet) -> Raster {
    let (w, h) = (camera.width as usize, camera.height as usize);
    let mut img = Raster::new(w, h);
    let horizon = h / 2;
    for col in 0..w {
        let depth = obs.depths[col];
        let hit = depth < camera.max_depth - 1e-9;
        // projected half-height of a fixed 0.3m wall slab
        let half = if hit {
            ((camera.fy * 0.3 / num::max(depth, 1e-6)) as usize).min(horizon)
        } else {
            0
        };
        let color = wall_color(depth, camera.max_depth, obs.instance_ids[col]);
        for row in 0..h {
            let rgb = if hit && row + half >= horizon && row < horizon + half {
                color
            } else if row < horizon {
                CEILING
            } else {
                FLOOR
            };
            img.put(col, row, rgb);
        }
    }
    for mark in &marks.marks {
        draw_mark(&mut img, mark.label, mark.pixel);
    }
    img
}

/// Hex dump of the image bytes for logging and golden comparisons.
pub fn ppm_digest(img: &Raster) -> String {
    // FNV-1a over the PPM bytes; stable and dependency-free
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in img.to_ppm() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    alloc::format!("{hash:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Pose;
    use crate::scoring::Mark;

    fn flat_obs(camera: &CameraModel, depth: f64) -> Observation {
        Observation {
            depths: vec![depth; camera.width as usize],
            instance_ids: vec![None; camera.width as usize],
            camera_pose: Pose::new(crate::geom::Vec3::ZERO, 0.0),
            step_index: 0,
        }
    }

    #[test]
    fn ppm_header_and_size() {
        let cam = CameraModel::default();
        let img = render_raster(&flat_obs(&cam, 1.0), &cam, &MarkedFrontierSet::default());
        let ppm = img.to_ppm();
        assert!(ppm.starts_with(b"P6\n128 96\n255\n"));
        assert_eq!(ppm.len(), 14 + 128 * 96 * 3);
    }

    #[test]
    fn nearer_walls_are_taller_and_brighter() {
        let cam = CameraModel::default();
        let near = render_raster(&flat_obs(&cam, 0.5), &cam, &MarkedFrontierSet::default());
        let far = render_raster(&flat_obs(&cam, 3.0), &cam, &MarkedFrontierSet::default());
        let wall_rows = |img: &Raster| {
            (0..img.height)
                .filter(|&r| img.get(10, r) != CEILING && img.get(10, r) != FLOOR)
                .count()
        };
        assert!(wall_rows(&near) > wall_rows(&far));
        let mid = (cam.height / 2) as usize;
        assert!(near.get(10, mid)[0] > far.get(10, mid)[0]);
    }

    #[test]
    fn max_range_column_shows_no_wall() {
        let cam = CameraModel::default();
        let img = render_raster(&flat_obs(&cam, cam.max_depth), &cam, &MarkedFrontierSet::default());
        for row in 0..cam.height as usize {
            let c = img.get(0, row);
            assert!(c == CEILING || c == FLOOR);
        }
    }

    #[test]
    fn mark_paints_disc_and_letter() {
        let cam = CameraModel::default();
        let marks = MarkedFrontierSet {
            marks: vec![Mark { label: 'A', frontier_idx: 0, pixel: (64.0, 48.0) }],
        };
        let img = render_raster(&flat_obs(&cam, 2.0), &cam, &marks);
        assert_eq!(img.get(60, 48), MARK_FILL);
        // the A glyph has ink at its apex, two rows above center
        let mut text_pixels = 0;
        for y in 44..53 {
            for x in 60..69 {
                if img.get(x, y) == MARK_TEXT {
                    text_pixels += 1;
                }
            }
        }
        assert!(text_pixels >= 10);
    }

    #[test]
    fn mark_near_border_is_clipped_not_panicking() {
        let cam = CameraModel::default();
        let marks = MarkedFrontierSet {
            marks: vec![Mark { label: 'Z', frontier_idx: 0, pixel: (0.0, 0.0) }],
        };
        let img = render_raster(&flat_obs(&cam, 2.0), &cam, &marks);
        // disc fill survives clipping; (0,0) itself carries glyph ink
        assert_eq!(img.get(3, 0), MARK_FILL);
        assert_eq!(img.get(0, 0), MARK_TEXT);
    }

    #[test]
    fn digest_is_stable() {
        let cam = CameraModel::default();
        let a = render_raster(&flat_obs(&cam, 1.5), &cam, &MarkedFrontierSet::default());
        let b = render_raster(&flat_obs(&cam, 1.5), &cam, &MarkedFrontierSet::default());
        assert_eq!(ppm_digest(&a), ppm_digest(&b));
        let c = render_raster(&flat_obs(&cam, 1.6), &cam, &MarkedFrontierSet::default());
        assert_ne!(ppm_digest(&a), ppm_digest(&c));
    }
}
