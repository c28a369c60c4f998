//! CSV and PNG artifacts.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use qr_cauchy::field::Field;

use crate::pipeline::CaseResult;

pub const ERRORS_HEADER: &str = "test,eps,seed,l2,rel_pct,M,N,runtime_s";

/// Minimum edge length of heatmaps in pixels.
const MIN_IMAGE_EDGE: u32 = 400;

/// `x,y,value` rows, row-major by x-line, 17 significant digits.
pub fn write_field_csv<W: Write>(field: &Field, mut out: W) -> io::Result<()> {
    let g = field.grid();
    writeln!(out, "x,y,value")?;
    for m in 0..=g.m {
        for (n, v) in field.line(m).iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", g.x(m), g.y(n), v)?;
        }
    }
    Ok(())
}

pub fn write_errors_csv<W: Write>(results: &[CaseResult], mut out: W) -> io::Result<()> {
    writeln!(out, "{ERRORS_HEADER}")?;
    for r in results {
        writeln!(
            out,
            "{},{:e},{},{:.16e},{:.16e},{},{},{:.6}",
            r.case.test, r.case.eps, r.case.seed, r.report.l2, r.report.rel_pct, r.grid.m, r.grid.n, r.runtime_s
        )?;
    }
    Ok(())
}

/// Piecewise-linear blue → white → red map on `t ∈ [0, 1]`.
fn diverging(t: f64) -> Rgb<u8> {
    const STOPS: [(f64, [f64; 3]); 5] = [
        (0.0, [49.0, 54.0, 149.0]),
        (0.25, [116.0, 173.0, 209.0]),
        (0.5, [247.0, 247.0, 247.0]),
        (0.75, [244.0, 109.0, 67.0]),
        (1.0, [165.0, 0.0, 38.0]),
    ];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.5 };
    let i = STOPS.iter().rposition(|s| s.0 <= t).unwrap_or(0).min(STOPS.len() - 2);
    let (t0, a) = STOPS[i];
    let (t1, b) = STOPS[i + 1];
    let s = (t - t0) / (t1 - t0);
    Rgb([0, 1, 2].map(|k| (a[k] + s * (b[k] - a[k])).round() as u8))
}

/// Heatmap with `x` to the right and `y` upward, symmetric colour range.
pub fn heatmap(field: &Field) -> RgbImage {
    let g = field.grid();
    let (cols, rows) = (g.m as u32 + 1, g.n as u32 + 1);
    let scale = (MIN_IMAGE_EDGE / cols.min(rows)).max(1);
    let range = field.max_abs();
    RgbImage::from_fn(cols * scale, rows * scale, |px, py| {
        let m = (px / scale) as usize;
        let n = g.n - (py / scale) as usize;
        let v = field.get(m, n);
        let t = if range > 0.0 { 0.5 + 0.5 * v / range } else { 0.5 };
        diverging(t)
    })
}

/// Writes the per-case artifacts and returns their paths.
pub fn write_case_artifacts(r: &CaseResult, dir: &Path, images: bool) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let stem = format!("{}_eps{:e}_seed{}", r.case.test, r.case.eps, r.case.seed);
    let mut paths = Vec::new();

    let p = dir.join(format!("{stem}_reconstruction.csv"));
    let mut w = BufWriter::new(File::create(&p)?);
    write_field_csv(&r.reconstruction, &mut w)?;
    w.flush()?;
    paths.push(p);

    let p = dir.join(format!("{stem}_data.csv"));
    let mut w = BufWriter::new(File::create(&p)?);
    r.data.write_csv(&mut w)?;
    w.flush()?;
    paths.push(p);

    if images {
        let err = r.reconstruction.sub(&r.truth).expect("same grid");
        for (name, f) in [("reconstruction", &r.reconstruction), ("error", &err)] {
            let p = dir.join(format!("{stem}_{name}.png"));
            heatmap(f).save(&p).map_err(io::Error::other)?;
            paths.push(p);
        }
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qr_cauchy::field::Grid;

    #[test]
    fn field_csv_layout() {
        let g = Grid::new(1, 2).unwrap();
        let f = Field::from_fn(g, |x, y| x + 10.0 * y);
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "x,y,value");
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[2], "0.0000000000000000e0,5.0000000000000000e-1,5.0000000000000000e0");
        assert!(lines[4].starts_with("1.0000000000000000e0,0.0000000000000000e0,"));
    }

    #[test]
    fn colour_map_endpoints() {
        assert_eq!(diverging(0.0), Rgb([49, 54, 149]));
        assert_eq!(diverging(0.5), Rgb([247, 247, 247]));
        assert_eq!(diverging(1.0), Rgb([165, 0, 38]));
        assert_eq!(diverging(f64::NAN), diverging(0.5));
    }

    #[test]
    fn heatmap_orientation() {
        let g = Grid::new(4, 4).unwrap();
        let f = Field::from_fn(g, |_, y| y - 0.5);
        let img = heatmap(&f);
        assert_eq!(img.width(), 400);
        assert_eq!(*img.get_pixel(0, 0), diverging(1.0));
        assert_eq!(*img.get_pixel(0, img.height() - 1), diverging(0.0));
    }
}
