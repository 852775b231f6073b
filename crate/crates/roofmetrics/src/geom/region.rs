use nalgebra::{Point2, Point3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Region used for trimming clouds to roof sections and as a mission
/// footprint: an axis-aligned box, or a convex polygon footprint in the
/// xy plane with an optional height interval.
///
/// Containment is boundary-inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundingRegion {
    Aabb {
        min: [f64; 3],
        max: [f64; 3],
    },
    Polygon {
        /// Convex, in counter-clockwise or clockwise order.
        vertices: Vec<[f64; 2]>,
        #[serde(default)]
        z_min: Option<f64>,
        #[serde(default)]
        z_max: Option<f64>,
    },
}

impl BoundingRegion {
    pub fn aabb(min: Point3<f64>, max: Point3<f64>) -> Result<Self> {
        if !(min.x < max.x && min.y < max.y && min.z < max.z) {
            return Err(Error::InvalidParam(
                "bounding box must have non-empty interior".into(),
            ));
        }
        Ok(Self::Aabb {
            min: min.coords.into(),
            max: max.coords.into(),
        })
    }

    pub fn polygon(vertices: Vec<Point2<f64>>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidParam(
                "polygon footprint needs at least 3 vertices".into(),
            ));
        }
        if !is_convex(&vertices) {
            return Err(Error::InvalidParam("polygon footprint must be convex".into()));
        }
        Ok(Self::Polygon {
            vertices: vertices.into_iter().map(|v| [v.x, v.y]).collect(),
            z_min: None,
            z_max: None,
        })
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        match self {
            Self::Aabb { min, max } => (0..3).all(|i| min[i] <= p[i] && p[i] <= max[i]),
            Self::Polygon {
                vertices,
                z_min,
                z_max,
            } => {
                if z_min.map_or(false, |z| p.z < z) || z_max.map_or(false, |z| p.z > z) {
                    return false;
                }
                point_in_convex_polygon(&Point2::new(p.x, p.y), vertices)
            }
        }
    }

    /// Axis-aligned xy extent: (min_x, min_y, max_x, max_y).
    pub fn footprint_bounds(&self) -> (f64, f64, f64, f64) {
        match self {
            Self::Aabb { min, max } => (min[0], min[1], max[0], max[1]),
            Self::Polygon { vertices, .. } => {
                let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
                for v in vertices {
                    b.0 = b.0.min(v[0]);
                    b.1 = b.1.min(v[1]);
                    b.2 = b.2.max(v[0]);
                    b.3 = b.3.max(v[1]);
                }
                b
            }
        }
    }
}

fn is_convex(vertices: &[Point2<f64>]) -> bool {
    let n = vertices.len();
    let mut sign = 0.0f64;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let c = vertices[(i + 2) % n];
        let cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
        if cross.abs() < 1e-15 {
            continue;
        }
        if sign == 0.0 {
            sign = cross.signum();
        } else if cross.signum() != sign {
            return false;
        }
    }
    sign != 0.0
}

/// Boundary-inclusive test: the point must not lie strictly outside any edge.
fn point_in_convex_polygon(p: &Point2<f64>, vertices: &[[f64; 2]]) -> bool {
    let n = vertices.len();
    let mut sign = 0.0f64;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let cross = (b[0] - a[0]) * (p.y - a[1]) - (b[1] - a[1]) * (p.x - a[0]);
        if cross == 0.0 {
            continue;
        }
        if sign == 0.0 {
            sign = cross.signum();
        } else if cross.signum() != sign {
            return false;
        }
    }
    true
}
