//! PL knot embeddings and their interpolated point clouds.

use crate::classify::KnotType;
use crate::error::{Error, Result};
use crate::vec3::{RigidMotion, Vec3};
use std::fmt;

/// Absolute tolerance on edge lengths and point spacings.
pub const EDGE_TOLERANCE: f64 = 1e-9;

/// Points emitted per edge when building the cloud used for persistence.
pub const DEFAULT_POINTS_PER_EDGE: usize = 10;

/// A closed equilateral polygon with unit edges.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotEmbedding {
    pub id: String,
    pub vertices: Vec<Vec3>,
    pub seed: u64,
    pub knot_type: Option<KnotType>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    TooFewVertices { count: usize },
    NonFinite { vertex: usize },
    /// Edge `edge` runs from vertex `edge` to vertex `edge + 1` (cyclically).
    CoincidentVertices { edge: usize },
    EdgeLength { edge: usize, length: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewVertices { count } => write!(f, "only {count} vertices"),
            Violation::NonFinite { vertex } => write!(f, "vertex {vertex} has a non-finite coordinate"),
            Violation::CoincidentVertices { edge } => {
                write!(f, "vertices {edge} and its successor coincide")
            }
            Violation::EdgeLength { edge, length } => {
                write!(f, "edge {edge} has length {length} instead of 1")
            }
        }
    }
}

impl KnotEmbedding {
    /// Builds an embedding and checks all invariants.
    pub fn new(id: impl Into<String>, vertices: Vec<Vec3>, seed: u64) -> Result<Self> {
        let k = KnotEmbedding {
            id: id.into(),
            vertices,
            seed,
            knot_type: None,
        };
        k.check()?;
        Ok(k)
    }

    /// Builds an embedding without validation. Used for malformed test inputs
    /// and by readers that report violations themselves.
    pub fn new_unchecked(id: impl Into<String>, vertices: Vec<Vec3>, seed: u64) -> Self {
        KnotEmbedding {
            id: id.into(),
            vertices,
            seed,
            knot_type: None,
        }
    }

    pub fn with_knot_type(mut self, t: Option<KnotType>) -> Self {
        self.knot_type = t;
        self
    }

    /// ℓ(K): for unit edges, the number of edges (= vertices).
    pub fn length(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.vertices.len()
    }

    /// Endpoints of edge `i`, closing edge included.
    #[inline]
    pub fn edge(&self, i: usize) -> (Vec3, Vec3) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    #[inline]
    pub fn edge_vector(&self, i: usize) -> Vec3 {
        let (a, b) = self.edge(i);
        b - a
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }

    pub fn check(&self) -> Result<()> {
        let v = validate(self);
        if v.is_empty() {
            Ok(())
        } else {
            let reason = v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ");
            Err(Error::InvalidEmbedding {
                id: self.id.clone(),
                reason,
            })
        }
    }

    pub fn transformed(&self, m: &RigidMotion) -> KnotEmbedding {
        KnotEmbedding {
            vertices: self.vertices.iter().map(|&p| m.apply(p)).collect(),
            ..self.clone()
        }
    }

    /// Same polygon, traversal starting at vertex `shift`.
    pub fn cyclically_shifted(&self, shift: usize) -> KnotEmbedding {
        let mut vertices = self.vertices.clone();
        if !vertices.is_empty() {
            let s = shift % vertices.len();
            vertices.rotate_left(s);
        }
        KnotEmbedding {
            vertices,
            ..self.clone()
        }
    }
}

/// ℓ(K) of a valid embedding.
pub fn knot_length(k: &KnotEmbedding) -> usize {
    k.length()
}

/// Lists every invariant violation; empty iff the embedding is valid.
pub fn validate(k: &KnotEmbedding) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = k.vertices.len();
    if n < 3 {
        out.push(Violation::TooFewVertices { count: n });
    }
    for (i, v) in k.vertices.iter().enumerate() {
        if !v.is_finite() {
            out.push(Violation::NonFinite { vertex: i });
        }
    }
    if !out.is_empty() {
        return out;
    }
    for i in 0..n {
        let (a, b) = k.edge(i);
        if a == b {
            out.push(Violation::CoincidentVertices { edge: i });
            continue;
        }
        let len = a.dist(b);
        if (len - 1.0).abs() > EDGE_TOLERANCE {
            out.push(Violation::EdgeLength { edge: i, length: len });
        }
    }
    out
}

/// Dense sample P(K) of an embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    pub source_id: String,
    pub spacing: f64,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Subdivides every edge into `points_per_edge` equal steps. Each vertex is
/// emitted once, at the start of its outgoing edge.
pub fn interpolate(k: &KnotEmbedding, points_per_edge: usize) -> Result<PointCloud> {
    if points_per_edge == 0 {
        return Err(Error::InvalidArgument("points_per_edge must be positive".into()));
    }
    k.check()?;
    let n = k.n_edges();
    let mut points = Vec::with_capacity(n * points_per_edge);
    for i in 0..n {
        let (a, b) = k.edge(i);
        let d = b - a;
        points.push(a);
        for j in 1..points_per_edge {
            points.push(a + d * (j as f64 / points_per_edge as f64));
        }
    }
    Ok(PointCloud {
        points,
        source_id: k.id.clone(),
        spacing: 1.0 / points_per_edge as f64,
    })
}

/// Regular planar polygon with `n` unit edges, in the xy-plane, centred at the origin.
/// Two unit edges meeting at the origin with internal angle `angle` (radians),
/// sampled like [`interpolate`] at `points_per_edge` points per edge. The corner
/// is shared, giving `2 * points_per_edge + 1` points.
pub fn corner_gadget(angle: f64, points_per_edge: usize) -> PointCloud {
    let a = Vec3::new(1.0, 0.0, 0.0);
    let b = Vec3::new(angle.cos(), angle.sin(), 0.0);
    let step = 1.0 / points_per_edge as f64;
    let mut points = vec![Vec3::new(0.0, 0.0, 0.0)];
    for m in 1..=points_per_edge {
        points.push(a * (m as f64 * step));
        points.push(b * (m as f64 * step));
    }
    PointCloud {
        points,
        source_id: format!("corner-{:.3}", angle.to_degrees()),
        spacing: step,
    }
}

pub fn regular_polygon(n: usize) -> Vec<Vec3> {
    let radius = 0.5 / (std::f64::consts::PI / n as f64).sin();
    (0..n)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            Vec3::new(radius * a.cos(), radius * a.sin(), 0.0)
        })
        .collect()
}
