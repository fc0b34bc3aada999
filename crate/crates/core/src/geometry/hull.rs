//! Volume of the 3D convex hull by incremental construction.

use crate::vec3::Vec3;
use rustc_hash::FxHashSet;

#[derive(Clone, Copy)]
struct Face {
    v: [usize; 3],
    alive: bool,
}

fn orient(a: Vec3, b: Vec3, c: Vec3, p: Vec3) -> f64 {
    (b - a).cross(c - a).dot(p - a)
}

/// Volume of the convex hull of `points`; zero when they are (numerically) coplanar.
pub fn convex_hull_volume(points: &[Vec3]) -> f64 {
    let n = points.len();
    if n < 4 {
        return 0.0;
    }
    let scale = points.iter().map(|p| p.dist(points[0])).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let eps = 1e-12 * scale.powi(3);

    // initial tetrahedron from extreme points
    let i0 = 0;
    let i1 = (0..n).max_by(|&a, &b| points[a].dist_sq(points[i0]).total_cmp(&points[b].dist_sq(points[i0]))).unwrap();
    let line = points[i1] - points[i0];
    let i2 = (0..n)
        .max_by(|&a, &b| {
            let da = line.cross(points[a] - points[i0]).norm_sq();
            let db = line.cross(points[b] - points[i0]).norm_sq();
            da.total_cmp(&db)
        })
        .unwrap();
    let i3 = (0..n)
        .max_by(|&a, &b| {
            let da = orient(points[i0], points[i1], points[i2], points[a]).abs();
            let db = orient(points[i0], points[i1], points[i2], points[b]).abs();
            da.total_cmp(&db)
        })
        .unwrap();
    let o = orient(points[i0], points[i1], points[i2], points[i3]);
    if o.abs() <= eps {
        return 0.0;
    }
    let mut faces: Vec<Face> = Vec::new();
    let push = |faces: &mut Vec<Face>, a: usize, b: usize, c: usize| faces.push(Face { v: [a, b, c], alive: true });
    // orient all faces outward: the fourth vertex must lie on the negative side
    if o > 0.0 {
        push(&mut faces, i0, i2, i1);
        push(&mut faces, i0, i1, i3);
        push(&mut faces, i1, i2, i3);
        push(&mut faces, i2, i0, i3);
    } else {
        push(&mut faces, i0, i1, i2);
        push(&mut faces, i0, i3, i1);
        push(&mut faces, i1, i3, i2);
        push(&mut faces, i2, i3, i0);
    }
    let interior = (points[i0] + points[i1] + points[i2] + points[i3]) * 0.25;

    let mut visible = Vec::new();
    let mut edges: FxHashSet<(usize, usize)> = FxHashSet::default();
    for p in 0..n {
        if p == i0 || p == i1 || p == i2 || p == i3 {
            continue;
        }
        let pt = points[p];
        visible.clear();
        for (fi, f) in faces.iter().enumerate() {
            if f.alive && orient(points[f.v[0]], points[f.v[1]], points[f.v[2]], pt) > eps {
                visible.push(fi);
            }
        }
        if visible.is_empty() {
            continue;
        }
        edges.clear();
        for &fi in &visible {
            let v = faces[fi].v;
            for k in 0..3 {
                edges.insert((v[k], v[(k + 1) % 3]));
            }
        }
        let horizon: Vec<(usize, usize)> = edges.iter().copied().filter(|&(a, b)| !edges.contains(&(b, a))).collect();
        for &fi in &visible {
            faces[fi].alive = false;
        }
        for (a, b) in horizon {
            faces.push(Face { v: [a, b, p], alive: true });
        }
        if faces.len() > 8 * n + 64 {
            faces.retain(|f| f.alive);
        }
    }

    faces
        .iter()
        .filter(|f| f.alive)
        .map(|f| orient(points[f.v[0]], points[f.v[1]], points[f.v[2]], interior).abs() / 6.0)
        .sum()
}
