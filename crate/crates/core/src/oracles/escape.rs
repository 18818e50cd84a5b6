use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::UnimodalQuadratic;
use crate::{Error, Result};

/// Outcome of the escape-time test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EscapeOutcome {
    /// `|f^step(z)| > R` for the first time at `step`.
    Escapes(usize),
    Retained,
}

impl EscapeOutcome {
    pub fn escapes(self) -> bool {
        matches!(self, Self::Escapes(_))
    }
}

/// Smallest radius that traps escaping orbits, `max(2 + |c|, 3)`.
pub fn default_escape_radius(c: f64) -> f64 {
    (2.0 + c.abs()).max(3.0)
}

/// Escape-time membership without argument checks.
#[inline]
pub(crate) fn escape_step(f: &UnimodalQuadratic, mut z: Complex64, max_iter: usize, r2: f64) -> EscapeOutcome {
    if z.norm_sqr() > r2 {
        return EscapeOutcome::Escapes(0);
    }
    for step in 1..=max_iter {
        z = f.eval(z);
        if z.norm_sqr() > r2 {
            return EscapeOutcome::Escapes(step);
        }
    }
    EscapeOutcome::Retained
}

/// Standard escape-time test for `x -> c - x^2`.
///
/// Once `|z| > 2 + |c|` the orbit grows monotonically, so a point is reported
/// as escaping at the first step where it leaves the disk of radius `escape_radius`.
pub fn julia_escape_membership(c: f64, z: Complex64, max_iter: usize, escape_radius: f64) -> Result<EscapeOutcome> {
    let f = UnimodalQuadratic::new(c)?;
    if !(escape_radius >= 2.0 + c.abs()) {
        return Err(Error::Config(format!("escape radius {escape_radius} is below 2 + |c| = {}", 2.0 + c.abs())));
    }
    Ok(escape_step(&f, z, max_iter, escape_radius * escape_radius))
}

/// Axis-aligned view of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderWindow {
    pub center: Complex64,
    /// Half of the horizontal extent.
    pub half_width: f64,
}

/// Escape-time render in 8-bit RGB.
#[derive(Debug, Clone, PartialEq)]
pub struct EscapeImage {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

fn shade(outcome: EscapeOutcome, max_iter: usize) -> [u8; 3] {
    match outcome {
        EscapeOutcome::Retained => [0, 0, 0],
        EscapeOutcome::Escapes(step) => {
            let t = ((step as f64 + 1.0).ln() / (max_iter as f64 + 1.0).ln()).clamp(0.0, 1.0);
            let v = (255.0 * (1.0 - t)) as u8;
            [v, (255.0 * (1.0 - t * t)) as u8, 255u8.saturating_sub(v / 4)]
        }
    }
}

/// Renders the filled Julia set of `c - x^2`: retained pixels are black,
/// escaping pixels are shaded by escape time.
pub fn render_escape_time(c: f64, width: usize, height: usize, window: RenderWindow, max_iter: usize) -> Result<EscapeImage> {
    if width == 0 || height == 0 || width * height > 64 << 20 {
        return Err(Error::Config(format!("image size {width}x{height} out of range")));
    }
    if !(window.half_width > 0.0 && window.half_width.is_finite()) {
        return Err(Error::Config(format!("half width {} must be positive", window.half_width)));
    }
    let f = UnimodalQuadratic::new(c)?;
    let r = default_escape_radius(c);
    let pixel = 2.0 * window.half_width / width as f64;
    let rgb: Vec<u8> = (0..height)
        .into_par_iter()
        .flat_map_iter(|row| {
            let im = window.center.im + (height as f64 / 2.0 - row as f64 - 0.5) * pixel;
            (0..width).flat_map(move |col| {
                let re = window.center.re + (col as f64 + 0.5 - width as f64 / 2.0) * pixel;
                shade(escape_step(&f, Complex64::new(re, im), max_iter, r * r), max_iter)
            })
        })
        .collect();
    Ok(EscapeImage { width, height, rgb })
}

impl EscapeImage {
    /// Binary PPM (`P6`).
    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.rgb)?;
        out.flush()?;
        Ok(())
    }

    #[cfg(feature = "png")]
    pub fn write_png(&self, path: &Path) -> Result<()> {
        image::save_buffer(path, &self.rgb, self.width as u32, self.height as u32, image::ExtendedColorType::Rgb8)
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(julia_escape_membership(0.0, cx(2.0, 0.0), 100, 3.0).unwrap(), EscapeOutcome::Escapes(1));
        assert_eq!(julia_escape_membership(2.0, cx(1.0, 0.0), 100, 4.0).unwrap(), EscapeOutcome::Retained);
        assert!(julia_escape_membership(2.0, cx(3.0, 0.0), 100, 4.0).unwrap().escapes());
    }

    #[test]
    fn radius_is_checked() {
        assert!(julia_escape_membership(2.0, cx(0.0, 0.0), 10, 3.0).is_err());
    }

    #[test]
    fn render_has_both_kinds() {
        let img = render_escape_time(0.0, 32, 24, RenderWindow { center: cx(0.0, 0.0), half_width: 1.5 }, 50).unwrap();
        assert_eq!(img.rgb.len(), 32 * 24 * 3);
        assert!(img.rgb.chunks(3).any(|p| p == [0, 0, 0]));
        assert!(img.rgb.chunks(3).any(|p| p != [0, 0, 0]));
    }
}
