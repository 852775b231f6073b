use std::collections::HashMap;

use nalgebra::Point3;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{PointCloud, TriangleMesh};

/// Samples `round(surface_area * density)` points uniformly over the mesh
/// surface: triangles are selected with probability proportional to area,
/// then a point is drawn with uniform barycentric coordinates.
///
/// Zero-area triangles carry zero weight and are skipped (with a warning).
/// Deterministic for a fixed seed. Vertex colors, when present, are
/// interpolated onto the samples.
pub fn sample_mesh(mesh: &TriangleMesh, density: f64, seed: u64) -> Result<PointCloud> {
    if !(density > 0.0) {
        return Err(Error::InvalidParam(format!(
            "sampling density must be positive, got {density}"
        )));
    }

    let mut cumulative = Vec::with_capacity(mesh.triangles().len());
    let mut total = 0.0;
    let mut degenerate = 0usize;
    for t in 0..mesh.triangles().len() {
        let area = mesh.triangle_area(t);
        if area <= 0.0 {
            degenerate += 1;
        }
        total += area;
        cumulative.push(total);
    }
    if degenerate > 0 {
        log::warn!("skipping {degenerate} zero-area triangles during sampling");
    }
    if total <= 0.0 {
        return Err(Error::EmptySurface);
    }

    let count = (total * density).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    let mut colors = mesh.colors().map(|_| Vec::with_capacity(count));

    for _ in 0..count {
        let target = rng.gen::<f64>() * total;
        let tri = cumulative.partition_point(|&c| c <= target).min(cumulative.len() - 1);
        let [ia, ib, ic] = mesh.triangles()[tri];
        let (a, b, c) = (
            mesh.vertices()[ia],
            mesh.vertices()[ib],
            mesh.vertices()[ic],
        );
        // Uniform barycentric draw: fold the unit square onto the triangle.
        let (mut u, mut v) = (rng.gen::<f64>(), rng.gen::<f64>());
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        // a + u(b-a) + v(c-a): exact when a coordinate is shared by all
        // three vertices (flat surfaces stay flat bit-for-bit).
        points.push(a + (b - a) * u + (c - a) * v);
        if let (Some(out), Some(vc)) = (&mut colors, mesh.colors()) {
            let w = 1.0 - u - v;
            let blend = |ch: usize| {
                (vc[ia][ch] as f64 * w + vc[ib][ch] as f64 * u + vc[ic][ch] as f64 * v).round()
                    as u8
            };
            out.push([blend(0), blend(1), blend(2)]);
        }
    }

    let cloud = PointCloud::new(points)?;
    match colors {
        Some(c) => cloud.with_colors(c),
        None => Ok(cloud),
    }
}

/// Greedy uniform-density subsampling: walks the cloud in input order
/// (optionally pre-shuffled by `shuffle_seed`) and keeps each point that is
/// at least `d_min` from every point kept so far.
///
/// The result is maximal: every rejected input point lies within `d_min` of
/// some kept point. Points at exactly `d_min` are both kept.
pub fn subsample_min_distance(
    cloud: &PointCloud,
    d_min: f64,
    shuffle_seed: Option<u64>,
) -> Result<PointCloud> {
    if !(d_min > 0.0) {
        return Err(Error::InvalidParam(format!(
            "minimum distance must be positive, got {d_min}"
        )));
    }

    let mut visit: Vec<usize> = (0..cloud.len()).collect();
    if let Some(seed) = shuffle_seed {
        visit.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }

    // Hash grid with cell size d_min; conflicts can only live in the
    // 3x3x3 cell neighborhood.
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    let cell_of = |p: &Point3<f64>| {
        (
            (p.x / d_min).floor() as i64,
            (p.y / d_min).floor() as i64,
            (p.z / d_min).floor() as i64,
        )
    };

    let mut kept = Vec::new();
    'next: for &i in &visit {
        let p = &cloud.points()[i];
        let (cx, cy, cz) = cell_of(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(bucket) = grid.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &j in bucket {
                            if (cloud.points()[j] - p).norm() < d_min {
                                continue 'next;
                            }
                        }
                    }
                }
            }
        }
        grid.entry((cx, cy, cz)).or_default().push(i);
        kept.push(i);
    }

    Ok(cloud.select(&kept))
}
