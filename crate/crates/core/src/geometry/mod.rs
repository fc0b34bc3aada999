//! Geometric observables of PL knots: enclosing volumes, radius of gyration,
//! discrete curvature and torsion, and the average crossing number.

mod acn;
mod hull;
mod sphere;

pub use acn::{average_crossing_number, pair_solid_angle};
pub use hull::convex_hull_volume;
pub use sphere::{min_enclosing_sphere, Ball};

use crate::error::Result;
use crate::model::KnotEmbedding;
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Per-knot geometric measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryRecord {
    pub rs_radius: f64,
    pub rs_volume: f64,
    pub hull_volume: f64,
    pub rg: f64,
    pub total_curvature: f64,
    pub total_torsion: f64,
    pub acn: f64,
}

pub fn sphere_volume(radius: f64) -> f64 {
    4.0 / 3.0 * PI * radius.powi(3)
}

/// Computes every observable of `k`.
pub fn measure(k: &KnotEmbedding) -> Result<GeometryRecord> {
    k.check()?;
    let ball = min_enclosing_sphere(&k.vertices);
    Ok(GeometryRecord {
        rs_radius: ball.radius,
        rs_volume: sphere_volume(ball.radius),
        hull_volume: convex_hull_volume(&k.vertices),
        rg: radius_of_gyration(&k.vertices),
        total_curvature: total_curvature(k),
        total_torsion: total_torsion(k),
        acn: average_crossing_number(k)?,
    })
}

/// Root-mean-square distance of the points from their centroid.
pub fn radius_of_gyration(points: &[Vec3]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let n = points.len() as f64;
    let c = points.iter().copied().sum::<Vec3>() / n;
    (points.iter().map(|p| p.dist_sq(c)).sum::<f64>() / n).sqrt()
}

/// Angle between two nonzero vectors, in [0, π].
fn angle_between(a: Vec3, b: Vec3) -> f64 {
    // atan2 form stays accurate for nearly (anti)parallel vectors
    a.cross(b).norm().atan2(a.dot(b))
}

/// Sum of exterior angles at the vertices.
pub fn total_curvature(k: &KnotEmbedding) -> f64 {
    let n = k.n_edges();
    (0..n)
        .map(|i| angle_between(k.edge_vector((i + n - 1) % n), k.edge_vector(i)))
        .sum()
}

/// Torsion total together with the edges whose term was dropped because
/// their osculating planes were undefined (three collinear vertices).
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionSummary {
    pub total: f64,
    pub degenerate_edges: Vec<usize>,
}

/// Sum over edges of the absolute dihedral angle between the planes spanned by
/// consecutive edge pairs.
pub fn torsion_summary(k: &KnotEmbedding) -> TorsionSummary {
    let n = k.n_edges();
    let mut total = 0.0;
    let mut degenerate_edges = Vec::new();
    for i in 0..n {
        let prev = k.edge_vector((i + n - 1) % n);
        let cur = k.edge_vector(i);
        let next = k.edge_vector((i + 1) % n);
        let b1 = prev.cross(cur);
        let b2 = cur.cross(next);
        if b1.norm() <= 1e-12 * prev.norm() * cur.norm() || b2.norm() <= 1e-12 * cur.norm() * next.norm() {
            degenerate_edges.push(i);
            continue;
        }
        let axis = cur / cur.norm();
        total += b1.cross(b2).dot(axis).atan2(b1.dot(b2)).abs();
    }
    TorsionSummary {
        total,
        degenerate_edges,
    }
}

pub fn total_torsion(k: &KnotEmbedding) -> f64 {
    torsion_summary(k).total
}

/// Distance between segments `[a, b]` and `[c, d]`.
pub fn segment_distance(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> f64 {
    let (p, q) = closest_points(a, b, c, d);
    p.dist(q)
}

/// Closest points between two segments; handles degenerate segments.
pub fn closest_points(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> (Vec3, Vec3) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(d1);
    let e = d2.dot(d2);
    let f = d2.dot(r);
    let eps = 1e-300;
    let (s, t);
    if a <= eps && e <= eps {
        return (p1, p2);
    }
    if a <= eps {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(r);
        if e <= eps {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    (p1 + d1 * s, p2 + d2 * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::regular_polygon;
    use crate::vec3::RigidMotion;

    fn helix(n: usize, handed: f64) -> KnotEmbedding {
        // open helix closed up by renormalizing would distort it; torsion terms are
        // local, so compare a helical polygon with its mirror on the same index set
        let mut v = Vec::new();
        for i in 0..n {
            let a = i as f64 * 0.9;
            v.push(Vec3::new(a.cos(), a.sin(), handed * 0.3 * i as f64));
        }
        KnotEmbedding::new_unchecked("helix", v, 0)
    }

    #[test]
    fn gyration_radius_basics() {
        let two = [Vec3::ZERO, Vec3::new(0.0, 0.0, 3.0)];
        assert!((radius_of_gyration(&two) - 1.5).abs() < 1e-12);
        let same = [Vec3::new(1.0, 2.0, 3.0); 5];
        assert_eq!(radius_of_gyration(&same), 0.0);
        for n in [3, 7, 40] {
            let v = regular_polygon(n);
            let r = 0.5 / (PI / n as f64).sin();
            assert!((radius_of_gyration(&v) - r).abs() < 1e-9);
        }
    }

    #[test]
    fn planar_convex_curvature_is_two_pi() {
        for n in [6, 9, 50] {
            let k = KnotEmbedding::new("p", regular_polygon(n), 0).unwrap();
            assert!((total_curvature(&k) - 2.0 * PI).abs() < 1e-9);
            assert!(total_torsion(&k).abs() < 1e-9);
        }
    }

    #[test]
    fn torsion_is_mirror_symmetric() {
        let r = helix(12, 1.0);
        let l = helix(12, -1.0);
        let tr = total_torsion(&r);
        assert!(tr > 0.1);
        assert!((tr - total_torsion(&l)).abs() < 1e-9);
    }

    #[test]
    fn collinear_triples_are_flagged() {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(2.0, 1.0, 0.0),
            Vec3::new(1.0, 1.0, 0.5),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let s = torsion_summary(&KnotEmbedding::new_unchecked("c", v, 0));
        assert_eq!(s.degenerate_edges, vec![0, 1]);
        assert!(s.total.is_finite());
    }

    #[test]
    fn measures_are_rigid_invariant() {
        let k = crate::sampler::sample_polygons(&crate::sampler::SamplerConfig::new(30, 1, 5)).unwrap().remove(0);
        let m = RigidMotion::new(Vec3::new(0.3, -1.0, 0.2), 0.77, Vec3::new(5.0, 1.0, -2.0));
        let a = measure(&k).unwrap();
        let b = measure(&k.transformed(&m)).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-6 * x.abs().max(1.0);
        assert!(close(a.rs_radius, b.rs_radius));
        assert!(close(a.hull_volume, b.hull_volume));
        assert!(close(a.rg, b.rg));
        assert!(close(a.total_curvature, b.total_curvature));
        assert!(close(a.total_torsion, b.total_torsion));
        assert!(close(a.acn, b.acn));
        assert!(a.hull_volume <= a.rs_volume);
        assert!((a.rs_volume - sphere_volume(a.rs_radius)).abs() < 1e-12 * a.rs_volume);
    }

    #[test]
    fn segment_distance_cases() {
        let o = Vec3::ZERO;
        let x = Vec3::new(1.0, 0.0, 0.0);
        // skew perpendicular segments one unit apart
        let d = segment_distance(o, x, Vec3::new(0.5, -1.0, 1.0), Vec3::new(0.5, 1.0, 1.0));
        assert!((d - 1.0).abs() < 1e-12);
        // parallel, offset
        let d = segment_distance(o, x, Vec3::new(2.0, 0.0, 0.0), Vec3::new(3.0, 0.0, 0.0));
        assert!((d - 1.0).abs() < 1e-12);
        // crossing
        let d = segment_distance(o, x, Vec3::new(0.5, -1.0, 0.0), Vec3::new(0.5, 1.0, 0.0));
        assert!(d < 1e-12);
    }
}
