//! Benchmark corpora: PGM directories and a synthetic phantom.

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{ComplexImage, RealImage};
use crate::io::load_image;
use crate::recon::CorpusImage;

/// Piecewise-smooth phantom in `[0, 1]`: nested ellipses whose interiors carry
/// slow intensity ramps, on a dark background.
pub fn phantom(rows: usize, cols: usize) -> ComplexImage {
    // (center_y, center_x, semi_y, semi_x, rotation, base, ramp_y, ramp_x)
    type Ellipse = (f64, f64, f64, f64, f64, f64, f64, f64);
    const ELLIPSES: [Ellipse; 6] = [
        (0.0, 0.0, 0.92, 0.72, 0.0, 0.55, 0.10, 0.05),
        (0.0, 0.0, 0.85, 0.64, 0.0, -0.25, 0.0, 0.0),
        (-0.25, -0.22, 0.30, 0.12, 0.35, 0.30, 0.15, 0.0),
        (-0.25, 0.22, 0.35, 0.16, -0.3, 0.25, 0.0, -0.15),
        (0.35, 0.0, 0.18, 0.22, 0.0, 0.35, -0.2, 0.1),
        (0.55, -0.15, 0.06, 0.09, 0.0, 0.45, 0.0, 0.0),
    ];
    let real = RealImage::from_fn(rows, cols, |r, c| {
        let y = 2.0 * (r as f64 + 0.5) / rows as f64 - 1.0;
        let x = 2.0 * (c as f64 + 0.5) / cols as f64 - 1.0;
        let mut v = 0.0;
        for &(cy, cx, ay, ax, rot, base, ry, rx) in &ELLIPSES {
            let (s, co) = rot.sin_cos();
            let dy = y - cy;
            let dx = x - cx;
            let u = co * dy + s * dx;
            let w = -s * dy + co * dx;
            if (u / ay).powi(2) + (w / ax).powi(2) <= 1.0 {
                v += base + ry * u + rx * w;
            }
        }
        v.clamp(0.0, 1.0)
    });
    ComplexImage::from_real(&real)
}

/// Loads every `*.pgm` in `dir`, sorted by file name; ids are the file stems.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<CorpusImage>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    paths
        .into_iter()
        .map(|p| {
            let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(CorpusImage { id, image: load_image(&p)? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phantom_in_unit_range_and_not_constant() {
        let p = phantom(64, 64);
        let vals: Vec<f64> = p.as_slice().iter().map(|v| v.re).collect();
        assert!(vals.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(p.as_slice().iter().all(|v| v.im == 0.0));
        let max = vals.iter().cloned().fold(0.0, f64::max);
        assert!(max > 0.5);
        assert_eq!(vals[0], 0.0);
    }
}
