//! Signed-distance initializers for the benchmark geometries.
//!
//! Distances are positive inside a shape and negative outside. Circles and
//! their unions are exact; the ellipse uses a nearest-point solve; piriforms
//! are sampled as dense polylines with an even-odd inside test. The piriform
//! is the quartic pear curve x(t) = a(1+sin t), y(t) = b·cos t·(1+sin t)
//! with the cusp at the local origin.

use crate::grid::{Field, Grid2};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum ShapeSpec {
    Circle {
        center: (f64, f64),
        radius: f64,
    },
    TwoCircles {
        c1: (f64, f64),
        r1: f64,
        c2: (f64, f64),
        r2: f64,
    },
    /// k×k grid of equal circles; `first` is the lowest-left center.
    CircleArray {
        first: (f64, f64),
        spacing: f64,
        count: usize,
        radius: f64,
    },
    Ellipse {
        center: (f64, f64),
        semi_axes: (f64, f64),
    },
    /// Pear curve with the cusp placed at `cusp`, opening along `rotation`.
    Piriform {
        cusp: (f64, f64),
        a: f64,
        b: f64,
        rotation: f64,
    },
    /// Four piriforms with cusps offset from `center` along the diagonals,
    /// each leaf opening outward into its quadrant.
    CloverLeaf {
        center: (f64, f64),
        a: f64,
        b: f64,
        cusp_offset: f64,
    },
}

impl ShapeSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Shape(msg.into()));
        match *self {
            ShapeSpec::Circle { radius, .. } if radius <= 0.0 => bad("circle radius must be > 0"),
            ShapeSpec::TwoCircles { r1, r2, .. } if r1 <= 0.0 || r2 <= 0.0 => {
                bad("circle radii must be > 0")
            }
            ShapeSpec::CircleArray {
                radius,
                spacing,
                count,
                ..
            } if radius <= 0.0 || spacing <= 0.0 || count == 0 => {
                bad("circle array needs positive radius, spacing and count")
            }
            ShapeSpec::Ellipse {
                semi_axes: (a, b), ..
            } if a <= 0.0 || b <= 0.0 => bad("ellipse semi-axes must be > 0"),
            ShapeSpec::Piriform { a, b, .. } if a <= 0.0 || b <= 0.0 => {
                bad("piriform parameters must be > 0")
            }
            ShapeSpec::CloverLeaf {
                a, b, cusp_offset, ..
            } if a <= 0.0 || b <= 0.0 || cusp_offset < 0.0 => {
                bad("cloverleaf needs positive leaf parameters")
            }
            _ => Ok(()),
        }
    }

    /// Polyline leaves backing the piriform variants; empty otherwise.
    pub(crate) fn polyline_leaves(&self) -> Vec<Polyline> {
        match *self {
            ShapeSpec::Piriform {
                cusp,
                a,
                b,
                rotation,
            } => vec![Polyline::piriform(cusp, a, b, rotation)],
            ShapeSpec::CloverLeaf {
                center,
                a,
                b,
                cusp_offset,
            } => (0..4)
                .map(|k| {
                    let angle =
                        std::f64::consts::FRAC_PI_4 + k as f64 * std::f64::consts::FRAC_PI_2;
                    let cusp = (
                        center.0 + cusp_offset * angle.cos(),
                        center.1 + cusp_offset * angle.sin(),
                    );
                    Polyline::piriform(cusp, a, b, angle)
                })
                .collect(),
            _ => Vec::new(),
        }
    }
}

/// Closed polyline with its bounding box.
pub(crate) struct Polyline {
    pts: Vec<(f64, f64)>,
    bbox: (f64, f64, f64, f64), // xmin, ymin, xmax, ymax
}

impl Polyline {
    const SAMPLES: usize = 1024;

    pub(crate) fn piriform(cusp: (f64, f64), a: f64, b: f64, rotation: f64) -> Polyline {
        let (s, c) = rotation.sin_cos();
        let mut pts = Vec::with_capacity(Self::SAMPLES);
        for k in 0..Self::SAMPLES {
            let t = -std::f64::consts::FRAC_PI_2
                + 2.0 * std::f64::consts::PI * k as f64 / Self::SAMPLES as f64;
            let lx = a * (1.0 + t.sin());
            let ly = b * t.cos() * (1.0 + t.sin());
            pts.push((cusp.0 + c * lx - s * ly, cusp.1 + s * lx + c * ly));
        }
        let mut bbox = (
            f64::INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
        );
        for &(x, y) in &pts {
            bbox.0 = bbox.0.min(x);
            bbox.1 = bbox.1.min(y);
            bbox.2 = bbox.2.max(x);
            bbox.3 = bbox.3.max(y);
        }
        Polyline { pts, bbox }
    }

    /// Signed distance to the closed polyline, positive inside.
    pub(crate) fn signed_distance(&self, x: f64, y: f64) -> f64 {
        let n = self.pts.len();
        let mut d2 = f64::INFINITY;
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (xi, yi) = self.pts[i];
            let (xj, yj) = self.pts[j];
            // distance to segment j-i
            let (ex, ey) = (xi - xj, yi - yj);
            let (wx, wy) = (x - xj, y - yj);
            let t = ((wx * ex + wy * ey) / (ex * ex + ey * ey)).clamp(0.0, 1.0);
            let (dx, dy) = (wx - t * ex, wy - t * ey);
            d2 = d2.min(dx * dx + dy * dy);
            // even-odd crossing test
            if (yi > y) != (yj > y) {
                let xc = xj + (y - yj) / (yi - yj) * (xi - xj);
                if x < xc {
                    inside = !inside;
                }
            }
            j = i;
        }
        let d = d2.sqrt();
        if inside {
            d
        } else {
            -d
        }
    }

    /// Distance from (x, y) to the bounding box (0 inside the box).
    fn bbox_outside_distance(&self, x: f64, y: f64) -> f64 {
        let dx = (self.bbox.0 - x).max(x - self.bbox.2).max(0.0);
        let dy = (self.bbox.1 - y).max(y - self.bbox.3).max(0.0);
        (dx * dx + dy * dy).sqrt()
    }
}

/// Signed distance at a single point. `leaves` must come from
/// [`ShapeSpec::polyline_leaves`] for the piriform variants.
pub(crate) fn sdf_at(shape: &ShapeSpec, x: f64, y: f64, leaves: &[Polyline]) -> f64 {
    match *shape {
        ShapeSpec::Circle { center, radius } => circle_sdf(center, radius, x, y),
        ShapeSpec::TwoCircles { c1, r1, c2, r2 } => {
            circle_sdf(c1, r1, x, y).max(circle_sdf(c2, r2, x, y))
        }
        ShapeSpec::CircleArray {
            first,
            spacing,
            count,
            radius,
        } => {
            let mut d = f64::NEG_INFINITY;
            for kj in 0..count {
                for ki in 0..count {
                    let c = (first.0 + ki as f64 * spacing, first.1 + kj as f64 * spacing);
                    d = d.max(circle_sdf(c, radius, x, y));
                }
            }
            d
        }
        ShapeSpec::Ellipse { center, semi_axes } => ellipse_sdf(center, semi_axes, x, y),
        ShapeSpec::Piriform { .. } | ShapeSpec::CloverLeaf { .. } => {
            let mut d = f64::NEG_INFINITY;
            for leaf in leaves {
                // union of signed distances; a leaf whose box lies farther
                // away than the current best cannot improve the max
                let out = leaf.bbox_outside_distance(x, y);
                if out > 0.0 && -out <= d {
                    continue;
                }
                d = d.max(leaf.signed_distance(x, y));
            }
            d
        }
    }
}

#[inline]
fn circle_sdf(center: (f64, f64), radius: f64, x: f64, y: f64) -> f64 {
    radius - ((x - center.0).powi(2) + (y - center.1).powi(2)).sqrt()
}

/// Signed distance to an axis-aligned ellipse via the nearest boundary
/// point, found by bisection on the boundary parameter in the first quadrant.
fn ellipse_sdf(center: (f64, f64), (a, b): (f64, f64), x: f64, y: f64) -> f64 {
    let px = (x - center.0).abs();
    let py = (y - center.1).abs();
    // nearest-point condition: g(t) = (a²-b²) cos t sin t - px·a·sin t + py·b·cos t = 0
    let g = |t: f64| (a * a - b * b) * t.cos() * t.sin() - px * a * t.sin() + py * b * t.cos();
    let (mut lo, mut hi) = (0.0f64, std::f64::consts::FRAC_PI_2);
    if g(lo) <= 0.0 {
        hi = lo; // point on the positive x-axis: nearest point is (a, 0)
    } else {
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let t = 0.5 * (lo + hi);
    let (qx, qy) = (a * t.cos(), b * t.sin());
    let dist = ((px - qx).powi(2) + (py - qy).powi(2)).sqrt();
    let inside = (px / a).powi(2) + (py / b).powi(2) <= 1.0;
    if inside {
        dist
    } else {
        -dist
    }
}

/// Samples the signed distance of `shape` on all grid nodes (positive inside).
pub fn signed_distance(shape: &ShapeSpec, grid: &Grid2) -> Result<Field> {
    shape.validate()?;
    let leaves = shape.polyline_leaves();
    Ok(Field::from_fn(*grid, |x, y| sdf_at(shape, x, y, &leaves)))
}
