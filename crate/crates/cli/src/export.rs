//! CSV and PNG export of grid fields.

use std::fs;
use std::path::Path;

use anyhow::Result;
use image::{Rgb, RgbImage};

/// Piecewise-linear blue-white-red colour map on [0, 1].
fn colour(t: f64) -> Rgb<u8> {
    let t = t.clamp(0.0, 1.0);
    let (a, b, s) = if t < 0.5 {
        ([59.0, 76.0, 192.0], [221.0, 221.0, 221.0], t / 0.5)
    } else {
        ([221.0, 221.0, 221.0], [180.0, 4.0, 38.0], (t - 0.5) / 0.5)
    };
    let c = |i: usize| (a[i] + (b[i] - a[i]) * s).round() as u8;
    Rgb([c(0), c(1), c(2)])
}

fn heatmap(path: &Path, n: usize, f: &[f64]) -> Result<()> {
    let lo = f.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let img = RgbImage::from_fn(n as u32, n as u32, |x, y| colour((f[y as usize * n + x as usize] - lo) / span));
    img.save(path)?;
    Ok(())
}

/// Writes `fields.csv` (one column per vertex), `w{j}.csv` (n x n matrix)
/// and `w{j}.png` for each field; returns the written file names.
pub fn write_fields(dir: &Path, n: usize, values: &[Vec<f64>]) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut all = csv::Writer::from_path(dir.join("fields.csv"))?;
    let mut header = vec!["ix".to_string(), "iy".to_string()];
    header.extend((0..values.len()).map(|j| format!("w{j}")));
    all.write_record(&header)?;
    for p in 0..n * n {
        let mut row = vec![(p % n).to_string(), (p / n).to_string()];
        row.extend(values.iter().map(|f| format!("{:.17e}", f[p])));
        all.write_record(&row)?;
    }
    all.flush()?;
    files.push("fields.csv".to_string());
    for (j, f) in values.iter().enumerate() {
        let name = format!("w{j}.csv");
        let mut w = csv::WriterBuilder::new().has_headers(false).from_path(dir.join(&name))?;
        for y in 0..n {
            w.write_record(f[y * n..(y + 1) * n].iter().map(|v| format!("{v:.17e}")))?;
        }
        w.flush()?;
        files.push(name);
        let png = format!("w{j}.png");
        heatmap(&dir.join(&png), n, f)?;
        files.push(png);
    }
    Ok(files)
}
