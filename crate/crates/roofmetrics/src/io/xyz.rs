use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, ParseLocation, Result};
use crate::geom::PointCloud;

/// Whitespace-separated floats, one point per line, with an optional three
/// trailing color integers.
pub fn read_xyz(path: &Path) -> Result<PointCloud> {
    let reader = BufReader::new(File::open(path)?);
    let mut points = Vec::new();
    let mut colors: Vec<[u8; 3]> = Vec::new();
    let mut has_color = None;

    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = line_no + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            location: ParseLocation::Line(line_no),
            message: msg,
        };
        if tokens.len() != 3 && tokens.len() != 6 {
            return Err(err(format!(
                "expected 3 coordinates (plus optional RGB), got {} fields",
                tokens.len()
            )));
        }
        let coord = |i: usize| -> Result<f64> {
            tokens[i]
                .parse::<f64>()
                .map_err(|_| err(format!("invalid coordinate '{}'", tokens[i])))
        };
        points.push(Point3::new(coord(0)?, coord(1)?, coord(2)?));

        let line_has_color = tokens.len() == 6;
        if *has_color.get_or_insert(line_has_color) != line_has_color {
            return Err(err("inconsistent color columns".into()));
        }
        if line_has_color {
            let channel = |i: usize| -> Result<u8> {
                tokens[i]
                    .parse::<u8>()
                    .map_err(|_| err(format!("invalid color channel '{}'", tokens[i])))
            };
            colors.push([channel(3)?, channel(4)?, channel(5)?]);
        }
    }

    let cloud = PointCloud::new(points)?;
    if has_color == Some(true) {
        cloud.with_colors(colors)
    } else {
        Ok(cloud)
    }
}

/// Full decimal precision (shortest f64 round-trip formatting).
pub fn write_xyz(cloud: &PointCloud, path: &Path) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    for (i, p) in cloud.points().iter().enumerate() {
        write!(writer, "{} {} {}", p.x, p.y, p.z)?;
        if let Some(colors) = cloud.colors() {
            let [r, g, b] = colors[i];
            write!(writer, " {r} {g} {b}")?;
        }
        writeln!(writer)?;
    }
    writer.flush()?;
    Ok(())
}
