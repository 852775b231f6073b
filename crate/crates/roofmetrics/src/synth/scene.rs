use std::f64::consts::PI;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{sample_mesh, PointCloud, TriangleMesh};

/// A multi-level rooftop: flat segments at different elevations carrying
/// parametric features (equipment boxes, a dome, thin walls).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneSpec {
    /// Overall footprint (meters), for validation only.
    pub footprint: [f64; 2],
    pub segments: Vec<RoofSegment>,
    #[serde(default)]
    pub features: Vec<Feature>,
    /// Ground-truth cloud sampling density (points per square meter).
    #[serde(default = "default_density")]
    pub gt_density: f64,
    pub seed: u64,
}

fn default_density() -> f64 {
    2000.0
}

/// A flat rectangular roof section at a fixed elevation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoofSegment {
    /// Footprint rectangle [x0, y0, x1, y1] (meters).
    pub rect: [f64; 4],
    /// Elevation above ground level (meters).
    pub elevation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Feature {
    /// HVAC-style closed box sitting on a segment.
    Box {
        center: [f64; 2],
        size: [f64; 3],
        segment: usize,
    },
    /// Closed upright cylinder.
    Cylinder {
        center: [f64; 2],
        radius: f64,
        height: f64,
        segment: usize,
        #[serde(default = "default_sides")]
        sides: usize,
    },
    /// Observatory-style dome.
    Hemisphere {
        center: [f64; 2],
        radius: f64,
        segment: usize,
        #[serde(default = "default_sides")]
        sides: usize,
    },
    /// Barrier wall along a line on a segment.
    ThinWall {
        start: [f64; 2],
        end: [f64; 2],
        thickness: f64,
        height: f64,
        segment: usize,
    },
}

fn default_sides() -> usize {
    32
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub mesh: TriangleMesh,
    pub gt_cloud: PointCloud,
}

/// Builds the scene mesh and samples the ground-truth cloud. Deterministic
/// for a fixed spec (including its seed).
pub fn generate_scene(spec: &SceneSpec) -> Result<Scene> {
    validate(spec)?;

    let mut mesh = TriangleMesh::new(vec![], vec![])?;
    for segment in &spec.segments {
        mesh.append(&segment_plate(segment));
    }
    for feature in &spec.features {
        mesh.append(&feature_mesh(feature, spec)?);
    }

    let gt_cloud = sample_mesh(&mesh, spec.gt_density, spec.seed)?;
    Ok(Scene { mesh, gt_cloud })
}

fn validate(spec: &SceneSpec) -> Result<()> {
    if spec.segments.is_empty() {
        return Err(Error::InvalidParam("scene needs at least one segment".into()));
    }
    if !(spec.gt_density > 0.0) {
        return Err(Error::InvalidParam("gt_density must be positive".into()));
    }
    for (i, s) in spec.segments.iter().enumerate() {
        let [x0, y0, x1, y1] = s.rect;
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::InvalidParam(format!("segment {i} rect is empty")));
        }
        if s.elevation < 0.0 {
            return Err(Error::InvalidParam(format!(
                "segment {i} elevation must be >= 0"
            )));
        }
        // Overlapping segments would double the sampled surface.
        for (j, other) in spec.segments.iter().enumerate().skip(i + 1) {
            let [ox0, oy0, ox1, oy1] = other.rect;
            if x0 < ox1 && ox0 < x1 && y0 < oy1 && oy0 < y1 {
                return Err(Error::InvalidParam(format!(
                    "segments {i} and {j} overlap"
                )));
            }
        }
    }
    for (i, f) in spec.features.iter().enumerate() {
        let (seg, bounds) = feature_footprint(f);
        let segment = spec
            .segments
            .get(seg)
            .ok_or_else(|| Error::InvalidParam(format!("feature {i} references segment {seg}")))?;
        let [x0, y0, x1, y1] = segment.rect;
        let [fx0, fy0, fx1, fy1] = bounds;
        if fx0 < x0 || fy0 < y0 || fx1 > x1 || fy1 > y1 {
            return Err(Error::InvalidParam(format!(
                "feature {i} footprint extends beyond segment {seg}"
            )));
        }
    }
    Ok(())
}

fn feature_footprint(f: &Feature) -> (usize, [f64; 4]) {
    match f {
        Feature::Box {
            center,
            size,
            segment,
        } => (
            *segment,
            [
                center[0] - size[0] / 2.0,
                center[1] - size[1] / 2.0,
                center[0] + size[0] / 2.0,
                center[1] + size[1] / 2.0,
            ],
        ),
        Feature::Cylinder {
            center,
            radius,
            segment,
            ..
        }
        | Feature::Hemisphere {
            center,
            radius,
            segment,
            ..
        } => (
            *segment,
            [
                center[0] - radius,
                center[1] - radius,
                center[0] + radius,
                center[1] + radius,
            ],
        ),
        Feature::ThinWall {
            start,
            end,
            thickness,
            segment,
            ..
        } => {
            let half = thickness / 2.0;
            (
                *segment,
                [
                    start[0].min(end[0]) - half,
                    start[1].min(end[1]) - half,
                    start[0].max(end[0]) + half,
                    start[1].max(end[1]) + half,
                ],
            )
        }
    }
}

fn segment_plate(segment: &RoofSegment) -> TriangleMesh {
    let [x0, y0, x1, y1] = segment.rect;
    let z = segment.elevation;
    TriangleMesh::new(
        vec![
            Point3::new(x0, y0, z),
            Point3::new(x1, y0, z),
            Point3::new(x1, y1, z),
            Point3::new(x0, y1, z),
        ],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .expect("valid plate")
}

fn feature_mesh(feature: &Feature, spec: &SceneSpec) -> Result<TriangleMesh> {
    let base = |segment: usize| spec.segments[segment].elevation;
    match feature {
        Feature::Box {
            center,
            size,
            segment,
        } => Ok(cuboid(
            center[0] - size[0] / 2.0,
            center[1] - size[1] / 2.0,
            center[0] + size[0] / 2.0,
            center[1] + size[1] / 2.0,
            base(*segment),
            base(*segment) + size[2],
        )),
        Feature::Cylinder {
            center,
            radius,
            height,
            segment,
            sides,
        } => Ok(cylinder(center, *radius, base(*segment), *height, *sides)),
        Feature::Hemisphere {
            center,
            radius,
            segment,
            sides,
        } => Ok(hemisphere(center, *radius, base(*segment), *sides)),
        Feature::ThinWall {
            start,
            end,
            thickness,
            height,
            segment,
        } => {
            let dx = end[0] - start[0];
            let dy = end[1] - start[1];
            let len = (dx * dx + dy * dy).sqrt();
            if len <= 0.0 {
                return Err(Error::InvalidParam("thin wall has zero length".into()));
            }
            // Perpendicular half-thickness offset.
            let (nx, ny) = (-dy / len * thickness / 2.0, dx / len * thickness / 2.0);
            let z0 = base(*segment);
            let z1 = z0 + height;
            let corners = [
                [start[0] - nx, start[1] - ny],
                [end[0] - nx, end[1] - ny],
                [end[0] + nx, end[1] + ny],
                [start[0] + nx, start[1] + ny],
            ];
            let mut verts = Vec::with_capacity(8);
            for z in [z0, z1] {
                for c in corners {
                    verts.push(Point3::new(c[0], c[1], z));
                }
            }
            let tris = vec![
                // bottom, top
                [0, 2, 1],
                [0, 3, 2],
                [4, 5, 6],
                [4, 6, 7],
                // sides
                [0, 1, 5],
                [0, 5, 4],
                [1, 2, 6],
                [1, 6, 5],
                [2, 3, 7],
                [2, 7, 6],
                [3, 0, 4],
                [3, 4, 7],
            ];
            TriangleMesh::new(verts, tris)
        }
    }
}

fn cuboid(x0: f64, y0: f64, x1: f64, y1: f64, z0: f64, z1: f64) -> TriangleMesh {
    let verts = vec![
        Point3::new(x0, y0, z0),
        Point3::new(x1, y0, z0),
        Point3::new(x1, y1, z0),
        Point3::new(x0, y1, z0),
        Point3::new(x0, y0, z1),
        Point3::new(x1, y0, z1),
        Point3::new(x1, y1, z1),
        Point3::new(x0, y1, z1),
    ];
    let tris = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [1, 2, 6],
        [1, 6, 5],
        [2, 3, 7],
        [2, 7, 6],
        [3, 0, 4],
        [3, 4, 7],
    ];
    TriangleMesh::new(verts, tris).expect("valid cuboid")
}

fn cylinder(center: &[f64; 2], radius: f64, z0: f64, height: f64, sides: usize) -> TriangleMesh {
    let z1 = z0 + height;
    let mut verts = Vec::new();
    for z in [z0, z1] {
        for k in 0..sides {
            let a = 2.0 * PI * k as f64 / sides as f64;
            verts.push(Point3::new(
                center[0] + radius * a.cos(),
                center[1] + radius * a.sin(),
                z,
            ));
        }
    }
    let top_center = verts.len();
    verts.push(Point3::new(center[0], center[1], z1));

    let mut tris = Vec::new();
    for k in 0..sides {
        let next = (k + 1) % sides;
        // side quad
        tris.push([k, next, sides + next]);
        tris.push([k, sides + next, sides + k]);
        // top fan
        tris.push([sides + k, sides + next, top_center]);
    }
    TriangleMesh::new(verts, tris).expect("valid cylinder")
}

fn hemisphere(center: &[f64; 2], radius: f64, z0: f64, sides: usize) -> TriangleMesh {
    let rings = sides / 2;
    let mut verts = Vec::new();
    for r in 0..rings {
        let phi = PI / 2.0 * r as f64 / rings as f64;
        let (rz, rr) = (radius * phi.sin(), radius * phi.cos());
        for k in 0..sides {
            let a = 2.0 * PI * k as f64 / sides as f64;
            verts.push(Point3::new(
                center[0] + rr * a.cos(),
                center[1] + rr * a.sin(),
                z0 + rz,
            ));
        }
    }
    let apex = verts.len();
    verts.push(Point3::new(center[0], center[1], z0 + radius));

    let mut tris = Vec::new();
    for r in 0..rings - 1 {
        for k in 0..sides {
            let next = (k + 1) % sides;
            let (a, b) = (r * sides + k, r * sides + next);
            let (c, d) = ((r + 1) * sides + k, (r + 1) * sides + next);
            tris.push([a, b, d]);
            tris.push([a, d, c]);
        }
    }
    for k in 0..sides {
        let next = (k + 1) % sides;
        tris.push([(rings - 1) * sides + k, (rings - 1) * sides + next, apex]);
    }
    TriangleMesh::new(verts, tris).expect("valid hemisphere")
}

/// Convenience scene mirroring a multi-level roof with HVAC boxes, a dome,
/// and a thin barrier wall.
impl SceneSpec {
    pub fn example(seed: u64) -> Self {
        Self {
            footprint: [20.0, 16.0],
            segments: vec![
                RoofSegment {
                    rect: [0.0, 0.0, 12.0, 16.0],
                    elevation: 10.0,
                },
                RoofSegment {
                    rect: [12.0, 0.0, 20.0, 16.0],
                    elevation: 6.0,
                },
            ],
            features: vec![
                Feature::Box {
                    center: [4.0, 4.0],
                    size: [2.0, 1.5, 1.2],
                    segment: 0,
                },
                Feature::Box {
                    center: [8.5, 11.0],
                    size: [1.0, 2.5, 0.8],
                    segment: 0,
                },
                Feature::Hemisphere {
                    center: [16.0, 5.0],
                    radius: 2.0,
                    segment: 1,
                    sides: 32,
                },
                Feature::ThinWall {
                    start: [13.0, 12.0],
                    end: [19.0, 12.0],
                    thickness: 0.03,
                    height: 1.0,
                    segment: 1,
                },
            ],
            gt_density: 2000.0,
            seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_flat_segment_has_exact_area() {
        let spec = SceneSpec {
            footprint: [10.0, 10.0],
            segments: vec![RoofSegment {
                rect: [0.0, 0.0, 10.0, 10.0],
                elevation: 5.0,
            }],
            features: vec![],
            gt_density: 100.0,
            seed: 1,
        };
        let scene = generate_scene(&spec).unwrap();
        assert!((scene.mesh.surface_area() - 100.0).abs() < 1e-9);
        assert!(scene.gt_cloud.points().iter().all(|p| p.z == 5.0));
    }

    #[test]
    fn two_segments_cluster_at_two_levels() {
        let spec = SceneSpec {
            footprint: [10.0, 5.0],
            segments: vec![
                RoofSegment {
                    rect: [0.0, 0.0, 5.0, 5.0],
                    elevation: 5.0,
                },
                RoofSegment {
                    rect: [5.0, 0.0, 10.0, 5.0],
                    elevation: 10.0,
                },
            ],
            features: vec![],
            gt_density: 200.0,
            seed: 2,
        };
        let scene = generate_scene(&spec).unwrap();
        for p in scene.gt_cloud.points() {
            assert!(p.z == 5.0 || p.z == 10.0);
        }
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let spec = SceneSpec::example(7);
        let a = generate_scene(&spec).unwrap();
        let b = generate_scene(&spec).unwrap();
        assert_eq!(a.mesh, b.mesh);
        assert_eq!(a.gt_cloud, b.gt_cloud);
    }

    #[test]
    fn overlapping_segments_rejected() {
        let spec = SceneSpec {
            footprint: [10.0, 10.0],
            segments: vec![
                RoofSegment {
                    rect: [0.0, 0.0, 6.0, 6.0],
                    elevation: 5.0,
                },
                RoofSegment {
                    rect: [5.0, 5.0, 10.0, 10.0],
                    elevation: 8.0,
                },
            ],
            features: vec![],
            gt_density: 100.0,
            seed: 0,
        };
        assert!(generate_scene(&spec).is_err());
    }

    #[test]
    fn feature_outside_segment_rejected() {
        let mut spec = SceneSpec::example(0);
        spec.features.push(Feature::Box {
            center: [11.9, 8.0],
            size: [1.0, 1.0, 1.0],
            segment: 0,
        });
        assert!(generate_scene(&spec).is_err());
    }
}
