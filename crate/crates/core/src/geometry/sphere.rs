//! Smallest enclosing ball by Welzl's move-to-front recursion.

use crate::rng::{self, Purpose};
use crate::vec3::Vec3;
use rand::seq::SliceRandom;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Vec3,
    pub radius: f64,
}

impl Ball {
    const EMPTY: Ball = Ball {
        center: Vec3::ZERO,
        radius: -1.0,
    };

    pub fn contains(&self, p: Vec3, tol: f64) -> bool {
        self.radius >= 0.0 && p.dist(self.center) <= self.radius + tol
    }
}

/// Smallest ball containing all `points`. Input order is shuffled with a fixed
/// stream so the result is deterministic.
pub fn min_enclosing_sphere(points: &[Vec3]) -> Ball {
    if points.is_empty() {
        return Ball {
            center: Vec3::ZERO,
            radius: 0.0,
        };
    }
    let mut pts = points.to_vec();
    let n = pts.len() as u64;
    pts.shuffle(&mut rng::stream(0, Purpose::Shuffle, n));
    let scale = pts.iter().map(|p| p.dist(pts[0])).fold(0.0, f64::max).max(1.0);
    let tol = 1e-12 * scale;
    let mut support = Vec::with_capacity(4);
    let n = pts.len();
    mtf(&mut pts, n, &mut support, tol)
}

fn mtf(pts: &mut [Vec3], end: usize, support: &mut Vec<Vec3>, tol: f64) -> Ball {
    let mut ball = ball_on_boundary(support);
    if support.len() == 4 {
        return ball;
    }
    for i in 0..end {
        if ball.contains(pts[i], tol) {
            continue;
        }
        let p = pts[i];
        support.push(p);
        ball = mtf(pts, i, support, tol);
        support.pop();
        pts[..=i].rotate_right(1);
    }
    ball
}

/// Smallest ball with every point of `s` (at most four) on its boundary.
fn ball_on_boundary(s: &[Vec3]) -> Ball {
    match s.len() {
        0 => Ball::EMPTY,
        1 => Ball {
            center: s[0],
            radius: 0.0,
        },
        2 => {
            let c = (s[0] + s[1]) * 0.5;
            Ball {
                center: c,
                radius: c.dist(s[0]),
            }
        }
        3 => circumball3(s[0], s[1], s[2]).unwrap_or_else(|| farthest_pair_ball(s)),
        4 => circumball4(s[0], s[1], s[2], s[3]).unwrap_or_else(|| degenerate_ball(s)),
        _ => unreachable!("support has at most four points"),
    }
}

fn farthest_pair_ball(s: &[Vec3]) -> Ball {
    let mut best = Ball::EMPTY;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let b = ball_on_boundary(&[s[i], s[j]]);
            if b.radius > best.radius {
                best = b;
            }
        }
    }
    best
}

/// Four coplanar (or otherwise degenerate) support points: the smallest ball
/// through a subset that contains the rest.
fn degenerate_ball(s: &[Vec3]) -> Ball {
    let tol = 1e-9 * s.iter().map(|p| p.dist(s[0])).fold(1.0, f64::max);
    let mut best: Option<Ball> = None;
    for mask in 1u32..15 {
        let sub: Vec<Vec3> = (0..4).filter(|i| mask & (1 << i) != 0).map(|i| s[i]).collect();
        let b = ball_on_boundary(&sub);
        if s.iter().all(|&p| b.contains(p, tol)) && best.is_none_or(|x| b.radius < x.radius) {
            best = Some(b);
        }
    }
    best.unwrap_or_else(|| farthest_pair_ball(s))
}

/// Circumcircle of a triangle, as a ball centred in the triangle's plane.
fn circumball3(a: Vec3, b: Vec3, c: Vec3) -> Option<Ball> {
    let ab = b - a;
    let ac = c - a;
    let n = ab.cross(ac);
    let denom = 2.0 * n.norm_sq();
    if denom <= 1e-24 * ab.norm_sq() * ac.norm_sq() || denom == 0.0 {
        return None;
    }
    let offset = (n.cross(ab) * ac.norm_sq() + ac.cross(n) * ab.norm_sq()) / denom;
    let center = a + offset;
    Some(Ball {
        center,
        radius: offset.norm(),
    })
}

fn circumball4(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> Option<Ball> {
    let u = b - a;
    let v = c - a;
    let w = d - a;
    let det = 2.0 * u.dot(v.cross(w));
    let scale = u.norm() * v.norm() * w.norm();
    if det.abs() <= 1e-12 * scale || det == 0.0 {
        return None;
    }
    let offset = (v.cross(w) * u.norm_sq() + w.cross(u) * v.norm_sq() + u.cross(v) * w.norm_sq()) / det;
    Some(Ball {
        center: a + offset,
        radius: offset.norm(),
    })
}
