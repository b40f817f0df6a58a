//! Level-set extraction by marching squares.
//!
//! Cells are classified by comparing corner values against the level; crossing
//! points are placed by linear interpolation along cell edges. The two
//! ambiguous saddle cases are resolved by comparing the cell average with the
//! level. Segments are stitched into polylines keyed by the global edge they
//! cross, so chains close exactly without floating-point point matching.

use std::collections::HashMap;

use crate::grid::Field;

/// One connected level-set component.
#[derive(Clone, Debug)]
pub struct ContourLine {
    pub points: Vec<(f64, f64)>,
    /// Closed loop (the segment from the last back to the first point is
    /// implied and counted in `length`).
    pub closed: bool,
    pub length: f64,
}

/// All components of one level set.
#[derive(Clone, Debug, Default)]
pub struct Contours {
    pub lines: Vec<ContourLine>,
    pub total_length: f64,
}

impl Contours {
    pub fn component_count(&self) -> usize {
        self.lines.len()
    }
}

/// Identifies the cell edge a contour point lies on: `H(i, j)` is the edge
/// from node (i, j) to (i+1, j), `V(i, j)` from (i, j) to (i, j+1).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum EdgeKey {
    H(usize, usize),
    V(usize, usize),
}

/// Extracts the `level` iso-lines of `f`. Periodic wrap-around is not
/// traced: components crossing the domain edge appear as open polylines.
pub fn extract_contours(f: &Field, level: f64) -> Contours {
    let g = f.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let above = |i: usize, j: usize| f.at(i, j) > level;
    let interp = |a: f64, b: f64| (level - a) / (b - a);

    let point = |key: EdgeKey| -> (f64, f64) {
        match key {
            EdgeKey::H(i, j) => {
                let t = interp(f.at(i, j), f.at(i + 1, j));
                (g.x(i) + t * g.hx(), g.y(j))
            }
            EdgeKey::V(i, j) => {
                let t = interp(f.at(i, j), f.at(i, j + 1));
                (g.x(i), g.y(j) + t * g.hy())
            }
        }
    };

    // collect segments cell by cell
    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let c00 = above(i, j);
            let c10 = above(i + 1, j);
            let c11 = above(i + 1, j + 1);
            let c01 = above(i, j + 1);
            let case = (c00 as u8) | (c10 as u8) << 1 | (c11 as u8) << 2 | (c01 as u8) << 3;
            let bottom = EdgeKey::H(i, j);
            let top = EdgeKey::H(i, j + 1);
            let left = EdgeKey::V(i, j);
            let right = EdgeKey::V(i + 1, j);
            match case {
                0 | 15 => {}
                1 | 14 => segments.push((left, bottom)),
                2 | 13 => segments.push((bottom, right)),
                3 | 12 => segments.push((left, right)),
                4 | 11 => segments.push((right, top)),
                6 | 9 => segments.push((bottom, top)),
                7 | 8 => segments.push((top, left)),
                5 | 10 => {
                    // saddle: the cell average decides which diagonal the
                    // "above" phase connects; cut off the two other corners
                    let avg = 0.25
                        * (f.at(i, j) + f.at(i + 1, j) + f.at(i + 1, j + 1) + f.at(i, j + 1));
                    let cut_main_diag = (avg > level) != (case == 5);
                    if cut_main_diag {
                        segments.push((left, bottom));
                        segments.push((right, top));
                    } else {
                        segments.push((bottom, right));
                        segments.push((top, left));
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    // adjacency: each edge point joins at most two segments
    let mut adj: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        adj.entry(a).or_default().push(s);
        adj.entry(b).or_default().push(s);
    }

    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    let walk = |start_seg: usize, used: &mut Vec<bool>| -> Vec<EdgeKey> {
        let (a, b) = segments[start_seg];
        used[start_seg] = true;
        let mut chain = vec![a, b];
        // extend forward from b, then backward from a
        for dir in 0..2 {
            loop {
                let tip = if dir == 0 {
                    *chain.last().unwrap()
                } else {
                    chain[0]
                };
                let next = adj[&tip].iter().copied().find(|&s| !used[s]);
                let Some(s) = next else { break };
                used[s] = true;
                let (p, q) = segments[s];
                let far = if p == tip { q } else { p };
                if dir == 0 {
                    chain.push(far);
                } else {
                    chain.insert(0, far);
                }
            }
        }
        chain
    };

    // open chains first (their end points have degree 1), then cycles
    for pass in 0..2 {
        for s in 0..segments.len() {
            if used[s] {
                continue;
            }
            let (a, b) = segments[s];
            let open_end = adj[&a].len() == 1 || adj[&b].len() == 1;
            if pass == 0 && !open_end {
                continue;
            }
            let chain = walk(s, &mut used);
            let closed = chain.len() > 2 && chain[0] == *chain.last().unwrap();
            let keys = if closed {
                &chain[..chain.len() - 1]
            } else {
                &chain[..]
            };
            let pts: Vec<(f64, f64)> = keys.iter().map(|&k| point(k)).collect();
            let mut length = 0.0;
            for w in pts.windows(2) {
                length += dist(w[0], w[1]);
            }
            if closed {
                length += dist(*pts.last().unwrap(), pts[0]);
            }
            lines.push(ContourLine {
                points: pts,
                closed,
                length,
            });
        }
    }

    let total_length = lines.iter().map(|l| l.length).sum();
    Contours {
        lines,
        total_length,
    }
}

#[inline]
fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundaryMode, Grid2};
    use crate::shapes::{signed_distance, ShapeSpec};

    #[test]
    fn constant_field_has_no_contours() {
        let g = Grid2::unit_square(17, BoundaryMode::Neumann);
        let f = Field::constant(g, 0.0);
        let c = extract_contours(&f, 0.5);
        assert_eq!(c.component_count(), 0);
        assert_eq!(c.total_length, 0.0);
    }

    #[test]
    fn circle_perimeter() {
        let g = Grid2::unit_square(257, BoundaryMode::Neumann);
        let d = signed_distance(
            &ShapeSpec::Circle {
                center: (0.5, 0.5),
                radius: 0.25,
            },
            &g,
        )
        .unwrap();
        let c = extract_contours(&d, 0.0);
        assert_eq!(c.component_count(), 1);
        assert!(c.lines[0].closed);
        let exact = 2.0 * std::f64::consts::PI * 0.25;
        assert!(
            (c.total_length - exact).abs() < 0.02 * exact,
            "perimeter {} vs {exact}",
            c.total_length
        );
    }

    #[test]
    fn two_disjoint_circles_give_two_components() {
        let g = Grid2::unit_square(129, BoundaryMode::Neumann);
        let d = signed_distance(
            &ShapeSpec::TwoCircles {
                c1: (0.27, 0.5),
                r1: 0.15,
                c2: (0.73, 0.5),
                r2: 0.15,
            },
            &g,
        )
        .unwrap();
        let c = extract_contours(&d, 0.0);
        assert_eq!(c.component_count(), 2);
        assert!(c.lines.iter().all(|l| l.closed));
    }

    #[test]
    fn open_contour_hits_boundary() {
        let g = Grid2::unit_square(33, BoundaryMode::Neumann);
        let f = Field::from_fn(g, |x, _| x);
        let c = extract_contours(&f, 0.4);
        assert_eq!(c.component_count(), 1);
        assert!(!c.lines[0].closed);
        assert!((c.total_length - 1.0).abs() < 1e-9);
    }

    #[test]
    fn saddle_resolution_is_consistent() {
        // checkerboard corner values force the ambiguous cases
        let g = Grid2::unit_square(3, BoundaryMode::Neumann);
        let mut f = Field::zeros(g);
        f.set(0, 0, 1.0);
        f.set(2, 0, 1.0);
        f.set(1, 1, -1.0);
        f.set(0, 2, 1.0);
        f.set(2, 2, 1.0);
        let c = extract_contours(&f, 0.5);
        // four disconnected corner cuts
        assert_eq!(c.component_count(), 4);
    }
}
