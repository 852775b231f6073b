use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, ParseLocation, Result};
use crate::flight::FlightPlan;
use crate::metrics::{FScoreTable, MetricCurve};

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        location: ParseLocation::Line(line),
        message: message.into(),
    }
}

/// Coarse-alignment pairs file: CSV with header `sx,sy,sz,tx,ty,tz`,
/// coordinates in meters.
pub fn read_pairs_csv(path: &Path) -> Result<Vec<(Point3<f64>, Point3<f64>)>> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty pairs file"))?;
    let header = header?;
    let expected = ["sx", "sy", "sz", "tx", "ty", "tz"];
    let got: Vec<String> = header.split(',').map(|c| c.trim().to_lowercase()).collect();
    if got != expected {
        return Err(parse_err(
            path,
            1,
            format!("expected header 'sx,sy,sz,tx,ty,tz', got '{header}'"),
        ));
    }

    let mut pairs = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(parse_err(
                path,
                line_no,
                format!("expected 6 fields, got {}", fields.len()),
            ));
        }
        let mut values = [0.0f64; 6];
        for (i, f) in fields.iter().enumerate() {
            values[i] = f.trim().parse::<f64>().map_err(|_| {
                parse_err(path, line_no, format!("invalid coordinate '{}'", f.trim()))
            })?;
        }
        pairs.push((
            Point3::new(values[0], values[1], values[2]),
            Point3::new(values[3], values[4], values[5]),
        ));
    }
    Ok(pairs)
}

/// Threshold sweep as CSV: `threshold_cm,precision_pct,recall_pct,fscore_pct`.
pub fn write_metric_curve_csv(curve: &MetricCurve, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "threshold_cm,precision_pct,recall_pct,fscore_pct\n")?;
    for i in 0..curve.thresholds.len() {
        write!(
            w,
            "{:.4},{:.6},{:.6},{:.6}\n",
            curve.thresholds[i] * 100.0,
            curve.precision_pct[i],
            curve.recall_pct[i],
            curve.fscore_pct[i]
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metric_curve_csv(path: &Path) -> Result<MetricCurve> {
    let reader = BufReader::new(File::open(path)?);
    let mut curve = MetricCurve {
        thresholds: vec![],
        precision_pct: vec![],
        recall_pct: vec![],
        fscore_pct: vec![],
    };
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if idx == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(parse_err(
                path,
                idx + 1,
                format!("expected 4 fields, got {}", fields.len()),
            ));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| parse_err(path, idx + 1, format!("invalid number '{s}'")))
        };
        curve.thresholds.push(parse(fields[0])? / 100.0);
        curve.precision_pct.push(parse(fields[1])?);
        curve.recall_pct.push(parse(fields[2])?);
        curve.fscore_pct.push(parse(fields[3])?);
    }
    Ok(curve)
}

/// Ranked table as CSV: `flight,section,fscore,rank`, followed by per-flight
/// `mean` rows carrying the mean F-score and mean rank.
pub fn write_fscore_table_csv(table: &FScoreTable, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "flight,section,fscore,rank\n")?;
    for (s, section) in table.sections.iter().enumerate() {
        for (f, flight) in table.flights.iter().enumerate() {
            write!(
                w,
                "{flight},{section},{:.4},{:.4}\n",
                table.scores[s][f], table.ranks[s][f]
            )?;
        }
    }
    for (f, flight) in table.flights.iter().enumerate() {
        write!(
            w,
            "{flight},mean,{:.4},{:.4}\n",
            table.mean_fscore[f], table.mean_rank[f]
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Long-format F-score matrix: CSV with header `flight,section,fscore`.
/// Flights and sections keep first-seen order. Returns
/// (flights, sections, scores[section][flight]).
pub fn read_fscore_matrix_csv(path: &Path) -> Result<(Vec<String>, Vec<String>, Vec<Vec<f64>>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut flights: Vec<String> = Vec::new();
    let mut sections: Vec<String> = Vec::new();
    let mut cells: Vec<(usize, usize, f64)> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if idx == 0 {
            let got: Vec<String> = line.split(',').map(|c| c.trim().to_lowercase()).collect();
            if got != ["flight", "section", "fscore"] {
                return Err(parse_err(
                    path,
                    1,
                    format!("expected header 'flight,section,fscore', got '{line}'"),
                ));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_err(
                path,
                line_no,
                format!("expected 3 fields, got {}", fields.len()),
            ));
        }
        let flight = fields[0].trim().to_string();
        let section = fields[1].trim().to_string();
        let score = fields[2].trim().parse::<f64>().map_err(|_| {
            parse_err(path, line_no, format!("invalid F-score '{}'", fields[2].trim()))
        })?;
        let f = flights.iter().position(|x| *x == flight).unwrap_or_else(|| {
            flights.push(flight);
            flights.len() - 1
        });
        let s = sections.iter().position(|x| *x == section).unwrap_or_else(|| {
            sections.push(section);
            sections.len() - 1
        });
        cells.push((s, f, score));
    }

    let mut scores = vec![vec![f64::NAN; flights.len()]; sections.len()];
    for (s, f, v) in cells {
        scores[s][f] = v;
    }
    for (s, row) in scores.iter().enumerate() {
        for (f, v) in row.iter().enumerate() {
            if v.is_nan() {
                return Err(parse_err(
                    path,
                    1,
                    format!(
                        "missing cell for flight '{}', section '{}'",
                        flights[f], sections[s]
                    ),
                ));
            }
        }
    }
    Ok((flights, sections, scores))
}

/// Waypoint list as CSV: `x_m,y_m,z_m,heading_deg,trigger`.
pub fn write_plan_csv(plan: &FlightPlan, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "x_m,y_m,z_m,heading_deg,trigger\n")?;
    for wp in &plan.waypoints {
        write!(
            w,
            "{:.4},{:.4},{:.4},{:.1},{}\n",
            wp.position[0],
            wp.position[1],
            wp.position[2],
            wp.heading_deg,
            if wp.trigger { 1 } else { 0 }
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Minimal line-chart SVG of the precision/recall/F-score sweep.
pub fn write_svg_curves(curve: &MetricCurve, title: &str, path: &Path) -> Result<()> {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 50.0; // margin

    let d_max = curve.thresholds.last().copied().unwrap_or(1.0).max(1e-12);
    let x = |d: f64| M + (W - 2.0 * M) * d / d_max;
    let y = |pct: f64| H - M - (H - 2.0 * M) * pct / 100.0;

    let polyline = |values: &[f64], color: &str| -> String {
        let pts: Vec<String> = curve
            .thresholds
            .iter()
            .zip(values)
            .map(|(&d, &v)| format!("{:.2},{:.2}", x(d), y(v)))
            .collect();
        format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            pts.join(" ")
        )
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"16\">{title}</text>\n",
        W / 2.0
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{M}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n\
         <line x1=\"{M}\" y1=\"{M}\" x2=\"{M}\" y2=\"{0}\" stroke=\"black\"/>\n",
        H - M,
        W - M
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"12\">threshold (cm)</text>\n",
        W / 2.0,
        H - 12.0
    ));
    for (i, &d) in curve.thresholds.iter().enumerate() {
        if i % 2 == 0 {
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
                 font-size=\"10\">{:.1}</text>\n",
                x(d),
                H - M + 16.0,
                d * 100.0
            ));
        }
    }
    for pct in [0.0, 25.0, 50.0, 75.0, 100.0] {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"10\">{pct}</text>\n",
            M - 6.0,
            y(pct) + 4.0
        ));
    }
    svg.push_str(&polyline(&curve.precision_pct, "#1f77b4"));
    svg.push_str(&polyline(&curve.recall_pct, "#2ca02c"));
    svg.push_str(&polyline(&curve.fscore_pct, "#d62728"));
    svg.push_str(&format!(
        "<text x=\"{0}\" y=\"{M}\" font-family=\"sans-serif\" font-size=\"12\" \
         fill=\"#1f77b4\">precision</text>\n\
         <text x=\"{0}\" y=\"{1}\" font-family=\"sans-serif\" font-size=\"12\" \
         fill=\"#2ca02c\">recall</text>\n\
         <text x=\"{0}\" y=\"{2}\" font-family=\"sans-serif\" font-size=\"12\" \
         fill=\"#d62728\">F-score</text>\n",
        W - M - 70.0,
        M + 16.0,
        M + 32.0
    ));
    svg.push_str("</svg>\n");

    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(svg.as_bytes())?;
    w.flush()?;
    Ok(())
}
