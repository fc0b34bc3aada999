//! Average crossing number from exact per-pair solid angles.
//!
//! For two straight segments the directions along which their projections
//! cross form a spherical quadrilateral (and its antipode): the radial image of
//! the parallelogram `{q(t) - p(s)}`. Its area is the solid angle that
//! parallelogram subtends at the origin, so averaging the crossing count over
//! the sphere gives `ACN = Σ_{i<j} |Ω_ij| / 2π`.

use super::segment_distance;
use crate::error::{Error, Result};
use crate::model::KnotEmbedding;
use crate::vec3::Vec3;
use std::f64::consts::PI;

/// Minimum distance between non-adjacent edges before ACN is refused.
pub const INTERSECTION_TOLERANCE: f64 = 1e-9;

/// Signed solid angle subtended at the origin by triangle `(a, b, c)`.
fn triangle_solid_angle(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
    let num = a.dot(b.cross(c));
    let den = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
    2.0 * num.atan2(den)
}

/// Signed solid angle of the Gauss map of segments `[p1, p2]` and `[p3, p4]`.
pub fn pair_solid_angle(p1: Vec3, p2: Vec3, p3: Vec3, p4: Vec3) -> f64 {
    let c13 = p3 - p1;
    let c14 = p4 - p1;
    let c24 = p4 - p2;
    let c23 = p3 - p2;
    triangle_solid_angle(c13, c14, c24) + triangle_solid_angle(c13, c24, c23)
}

pub fn average_crossing_number(k: &KnotEmbedding) -> Result<f64> {
    let n = k.n_edges();
    let mut total = 0.0;
    for i in 0..n {
        let (a, b) = k.edge(i);
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = k.edge(j);
            if segment_distance(a, b, c, d) < INTERSECTION_TOLERANCE {
                return Err(Error::SelfIntersection(i, j));
            }
            total += pair_solid_angle(a, b, c, d).abs();
        }
    }
    Ok(total / (2.0 * PI))
}
