//! Random equilateral polygons by crankshaft Monte Carlo, and parametric trefoils.
//!
//! A crankshaft move picks two vertices, treats the chord between them as an
//! axis and rotates one of the two arcs joining them by a uniform angle. Every
//! edge keeps its length, closure is preserved, and strands may pass through
//! each other, so the chain explores all knot types.

use crate::error::{Error, Result};
use crate::geometry::segment_distance;
use crate::model::{regular_polygon, KnotEmbedding};
use crate::rng::{self, Purpose};
use crate::vec3::Vec3;
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::TAU;

/// Moves between edge renormalizations inside a chain.
pub const RENORMALIZE_EVERY: u64 = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub length: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub burn_in_moves: u64,
    pub moves_between_samples: u64,
    /// Consecutive samples drawn from one chain before a fresh chain starts.
    pub samples_per_chain: usize,
}

impl SamplerConfig {
    /// Defaults: burn-in of 100·length moves, 10·length moves between samples.
    pub fn new(length: usize, n_samples: usize, seed: u64) -> Self {
        SamplerConfig {
            length,
            n_samples,
            seed,
            burn_in_moves: 100 * length as u64,
            moves_between_samples: 10 * length as u64,
            samples_per_chain: 16,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < 6 {
            return Err(Error::InvalidArgument(format!(
                "polygon length must be at least 6, got {}",
                self.length
            )));
        }
        if self.n_samples == 0 || self.samples_per_chain == 0 {
            return Err(Error::InvalidArgument("sample counts must be positive".into()));
        }
        if self.burn_in_moves < 10 * self.length as u64 {
            return Err(Error::InvalidArgument(format!(
                "burn_in_moves must be at least 10·length = {}",
                10 * self.length
            )));
        }
        if self.moves_between_samples == 0 {
            return Err(Error::InvalidArgument("moves_between_samples must be positive".into()));
        }
        Ok(())
    }

}

/// One Markov chain of polygons; yields a sample every `moves_between_samples` moves
/// after the burn-in.
pub struct Chain<R: Rng> {
    vertices: Vec<Vec3>,
    rng: R,
    moves: u64,
    between: u64,
}

impl<R: Rng> Chain<R> {
    pub fn new(length: usize, burn_in: u64, between: u64, rng: R) -> Self {
        let mut c = Chain {
            vertices: regular_polygon(length),
            rng,
            moves: 0,
            between,
        };
        c.advance(burn_in);
        c
    }

    fn advance(&mut self, n: u64) {
        for _ in 0..n {
            random_move_in_place(&mut self.vertices, &mut self.rng);
            self.moves += 1;
            if self.moves.is_multiple_of(RENORMALIZE_EVERY) {
                renormalize(&mut self.vertices);
            }
        }
    }

    /// Current state, renormalized.
    pub fn current(&self) -> Vec<Vec3> {
        let mut v = self.vertices.clone();
        renormalize(&mut v);
        v
    }

    pub fn next_sample(&mut self) -> Vec<Vec3> {
        let v = self.current();
        self.advance(self.between);
        v
    }
}

fn chain_rng(cfg: &SamplerConfig, chain: usize) -> rand_chacha::ChaCha8Rng {
    rng::stream(cfg.seed, Purpose::Sampler, ((cfg.length as u64) << 32) | chain as u64)
}

/// Draws `cfg.n_samples` polygons. Chains run in parallel; output order and
/// content depend only on the configuration.
pub fn sample_polygons(cfg: &SamplerConfig) -> Result<Vec<KnotEmbedding>> {
    sample_batch(cfg, 0, cfg.n_samples)
}

/// Samples with indices `start..start + count` of the (unbounded) sequence
/// defined by `cfg`; `cfg.n_samples` is ignored. Sample `i` is the same
/// polygon whichever batch produces it.
pub fn sample_batch(cfg: &SamplerConfig, start: usize, count: usize) -> Result<Vec<KnotEmbedding>> {
    cfg.validate()?;
    if count == 0 {
        return Ok(Vec::new());
    }
    let spc = cfg.samples_per_chain;
    let end = start + count;
    let chains: Vec<Vec<KnotEmbedding>> = (start / spc..end.div_ceil(spc))
        .into_par_iter()
        .map(|c| {
            let mut chain = Chain::new(cfg.length, cfg.burn_in_moves, cfg.moves_between_samples, chain_rng(cfg, c));
            let first = c * spc;
            (first..first + spc)
                .map(|i| (i, chain.next_sample()))
                .filter(|(i, _)| (start..end).contains(i))
                .map(|(i, vertices)| KnotEmbedding {
                    id: sample_id(cfg.length, cfg.seed, i),
                    vertices,
                    seed: cfg.seed,
                    knot_type: None,
                })
                .collect()
        })
        .collect();
    let out: Vec<KnotEmbedding> = chains.into_iter().flatten().collect();
    for k in &out {
        k.check()?;
    }
    Ok(out)
}

/// Lazily yields samples, chain by chain.
pub fn sample_stream(cfg: SamplerConfig) -> Result<impl Iterator<Item = KnotEmbedding>> {
    cfg.validate()?;
    let mut chain: Option<Chain<rand_chacha::ChaCha8Rng>> = None;
    Ok((0..cfg.n_samples).map(move |i| {
        if i % cfg.samples_per_chain == 0 {
            let c = i / cfg.samples_per_chain;
            chain = Some(Chain::new(cfg.length, cfg.burn_in_moves, cfg.moves_between_samples, chain_rng(&cfg, c)));
        }
        let vertices = chain.as_mut().expect("chain initialised").next_sample();
        KnotEmbedding {
            id: sample_id(cfg.length, cfg.seed, i),
            vertices,
            seed: cfg.seed,
            knot_type: None,
        }
    }))
}

pub fn sample_id(length: usize, seed: u64, index: usize) -> String {
    format!("L{length}-s{seed}-{index}")
}

/// Rotates the vertices strictly between `i` and `j` (walking forward from `i`)
/// about the chord `v_i v_j` by `angle`. A zero-length chord leaves the polygon unchanged.
pub fn crankshaft_rotate(vertices: &mut [Vec3], i: usize, j: usize, angle: f64) {
    let n = vertices.len();
    let (a, b) = (vertices[i], vertices[j]);
    let Some(axis) = (b - a).normalized() else {
        return;
    };
    let mut k = (i + 1) % n;
    while k != j {
        vertices[k] = a + (vertices[k] - a).rotated(axis, angle);
        k = (k + 1) % n;
    }
}

fn random_move_in_place<R: Rng>(vertices: &mut [Vec3], rng: &mut R) {
    let n = vertices.len();
    let i = rng.gen_range(0..n);
    // forward gap from i to j in 2..=n-2 so that both arcs contain a vertex
    let gap = rng.gen_range(2..=n - 2);
    let angle = rng.gen_range(0.0..TAU);
    let (i, j, angle) = if gap <= n / 2 {
        (i, (i + gap) % n, angle)
    } else {
        // rotating the complementary arc by the opposite angle gives a congruent polygon
        ((i + gap) % n, i, -angle)
    };
    crankshaft_rotate(vertices, i, j, angle);
}

/// Applies one random crankshaft move.
pub fn crankshaft_move<R: Rng>(k: &KnotEmbedding, rng: &mut R) -> KnotEmbedding {
    let mut vertices = k.vertices.clone();
    if vertices.len() >= 4 {
        random_move_in_place(&mut vertices, rng);
    }
    KnotEmbedding { vertices, ..k.clone() }
}

/// Restores exact unit edges and closure after floating drift.
///
/// Alternates between normalizing every edge vector and removing the mean
/// closure defect; starting close to an equilateral polygon this converges in
/// a handful of rounds. Vertex 0 stays fixed.
pub fn renormalize(vertices: &mut [Vec3]) {
    let n = vertices.len();
    if n < 3 {
        return;
    }
    let mut edges: Vec<Vec3> = (0..n).map(|i| vertices[(i + 1) % n] - vertices[i]).collect();
    for _ in 0..50 {
        for e in edges.iter_mut() {
            if let Some(u) = e.normalized() {
                *e = u;
            }
        }
        let defect: Vec3 = edges.iter().copied().sum();
        if defect.norm() < 1e-14 * n as f64 {
            break;
        }
        let shift = defect / n as f64;
        for e in edges.iter_mut() {
            *e -= shift;
        }
    }
    let mut p = vertices[0];
    for i in 1..n {
        p += edges[i - 1];
        vertices[i] = p;
    }
}

/// Torus-knot style trefoil: the (2,3) curve on a torus with radii `major_radius`
/// and `minor_radius`, with heights multiplied by `z_scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrefoilParams {
    pub major_radius: f64,
    pub minor_radius: f64,
    pub z_scale: f64,
    pub n_edges: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrefoilPreset {
    /// Fattest tube before the strands crowd the axis; close to the ideal trefoil.
    Tight,
    /// Thin torus, longitude much longer than meridian.
    Torus,
    /// Torus trefoil squashed towards the plane.
    Flat,
}

impl TrefoilPreset {
    pub const ALL: [TrefoilPreset; 3] = [TrefoilPreset::Tight, TrefoilPreset::Torus, TrefoilPreset::Flat];

    pub fn params(self, n_edges: usize) -> TrefoilParams {
        let (major_radius, minor_radius, z_scale) = match self {
            TrefoilPreset::Tight => (2.0, 0.8, 1.0),
            TrefoilPreset::Torus => (4.0, 1.0, 1.0),
            TrefoilPreset::Flat => (4.0, 1.0, 0.15),
        };
        TrefoilParams {
            major_radius,
            minor_radius,
            z_scale,
            n_edges,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TrefoilPreset::Tight => "tight",
            TrefoilPreset::Torus => "torus",
            TrefoilPreset::Flat => "flat",
        }
    }
}

impl std::str::FromStr for TrefoilPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tight" => Ok(TrefoilPreset::Tight),
            "torus" => Ok(TrefoilPreset::Torus),
            "flat" => Ok(TrefoilPreset::Flat),
            _ => Err(Error::InvalidArgument(format!("unknown trefoil preset `{s}`"))),
        }
    }
}

impl TrefoilParams {
    fn validate(&self) -> Result<()> {
        let ok = self.minor_radius > 0.0
            && self.major_radius > self.minor_radius
            && (0.0..=1.0).contains(&self.z_scale)
            && self.n_edges >= 6;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid trefoil parameters {self:?}")))
        }
    }

    fn point(&self, s: f64) -> Vec3 {
        let rho = self.major_radius + self.minor_radius * (3.0 * s).cos();
        Vec3::new(
            rho * (2.0 * s).cos(),
            rho * (2.0 * s).sin(),
            self.z_scale * self.minor_radius * (3.0 * s).sin(),
        )
    }
}

/// Inscribes an equilateral `n_edges`-gon in the parametric trefoil and scales it
/// to unit edges.
pub fn parametric_trefoil(p: &TrefoilParams) -> Result<KnotEmbedding> {
    p.validate()?;
    let n = p.n_edges;
    // fine parameter grid for locating chord crossings
    let grid = 400 * n;
    let ds = TAU / grid as f64;
    let curve_len: f64 = (0..grid).map(|g| p.point(g as f64 * ds).dist(p.point((g + 1) as f64 * ds))).sum();

    // walk n chords of length c from s = 0; returns the parameters and the final overshoot
    let walk = |c: f64| -> (Vec<f64>, f64) {
        let mut params = Vec::with_capacity(n + 1);
        let mut s = 0.0;
        params.push(s);
        for _ in 0..n {
            let start = p.point(s);
            let mut lo = s;
            let mut hi = s + ds;
            while p.point(hi).dist(start) < c {
                lo = hi;
                hi += ds;
                if hi > 2.0 * TAU {
                    break;
                }
            }
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if p.point(mid).dist(start) < c {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            s = 0.5 * (lo + hi);
            params.push(s);
        }
        let end = params[n];
        (params, end - TAU)
    };

    let (mut lo, mut hi) = (0.5 * curve_len / n as f64, curve_len / n as f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if walk(mid).1 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let chord = 0.5 * (lo + hi);
    let (params, _) = walk(chord);
    let mut vertices: Vec<Vec3> = params[..n].iter().map(|&s| p.point(s) / chord).collect();
    renormalize(&mut vertices);

    let k = KnotEmbedding::new(format!("trefoil-R{}-r{}-z{}-n{}", p.major_radius, p.minor_radius, p.z_scale, n), vertices, 0)?;
    check_self_avoiding(&k, 1e-6)?;
    Ok(k)
}

pub fn preset_trefoil(preset: TrefoilPreset, n_edges: usize) -> Result<KnotEmbedding> {
    let mut k = parametric_trefoil(&preset.params(n_edges))?;
    k.id = format!("trefoil-{}-{}", preset.name(), n_edges);
    Ok(k)
}

/// Fails if two non-adjacent edges come closer than `tol`.
pub fn check_self_avoiding(k: &KnotEmbedding, tol: f64) -> Result<()> {
    let n = k.n_edges();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (a, b) = k.edge(i);
            let (c, d) = k.edge(j);
            if segment_distance(a, b, c, d) < tol {
                return Err(Error::SelfIntersection(i, j));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;

    #[test]
    fn seeded_sampling_is_deterministic() {
        let cfg = SamplerConfig::new(10, 3, 7);
        let a = sample_polygons(&cfg).unwrap();
        let b = sample_polygons(&cfg).unwrap();
        assert_eq!(a, b);
        let s: Vec<_> = sample_stream(cfg).unwrap().collect();
        assert_eq!(a, s);
    }

    #[test]
    fn samples_are_valid_polygons() {
        let out = sample_polygons(&SamplerConfig::new(50, 100, 1)).unwrap();
        assert_eq!(out.len(), 100);
        for k in &out {
            assert_eq!(k.length(), 50);
            assert!(validate(k).is_empty());
        }
    }

    #[test]
    fn short_polygons_are_rejected() {
        assert!(sample_polygons(&SamplerConfig::new(5, 3, 1)).is_err());
        let mut cfg = SamplerConfig::new(10, 3, 1);
        cfg.burn_in_moves = 20;
        assert!(sample_polygons(&cfg).is_err());
    }

    #[test]
    fn crankshaft_preserves_edges() {
        let oct = KnotEmbedding::new("oct", regular_polygon(8), 0).unwrap();
        let mut rng = rng::stream(3, Purpose::Sampler, 0);
        let moved = crankshaft_move(&oct, &mut rng);
        assert_ne!(moved.vertices, oct.vertices);
        for i in 0..8 {
            assert!((moved.edge_vector(i).norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_angle_is_identity() {
        let mut v = regular_polygon(8);
        let before = v.clone();
        crankshaft_rotate(&mut v, 1, 5, 0.0);
        for (a, b) in v.iter().zip(&before) {
            assert!(a.dist(*b) < 1e-15);
        }
    }

    #[test]
    fn degenerate_chord_is_skipped() {
        let mut v = regular_polygon(8);
        v[5] = v[1];
        let before = v.clone();
        crankshaft_rotate(&mut v, 1, 5, 1.0);
        assert_eq!(v, before);
    }

    #[test]
    fn long_chain_drift_stays_small() {
        let mut rng = rng::stream(11, Purpose::Sampler, 0);
        let mut v = regular_polygon(20);
        for m in 1..=10_000u64 {
            random_move_in_place(&mut v, &mut rng);
            if m % RENORMALIZE_EVERY == 0 {
                renormalize(&mut v);
            }
        }
        let k = KnotEmbedding::new_unchecked("drift", v, 0);
        let worst = (0..20).map(|i| (k.edge_vector(i).norm() - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-7, "drift {worst}");
    }

    #[test]
    fn renormalize_repairs_perturbation() {
        let mut v = regular_polygon(12);
        for (i, p) in v.iter_mut().enumerate() {
            *p += Vec3::new(1e-7 * i as f64, -2e-7, 3e-8 * (i % 3) as f64);
        }
        renormalize(&mut v);
        let k = KnotEmbedding::new_unchecked("r", v, 0);
        assert!(validate(&k).is_empty());
    }

    #[test]
    fn trefoil_presets_are_unit_and_self_avoiding() {
        for preset in TrefoilPreset::ALL {
            let k = preset_trefoil(preset, 120).unwrap();
            assert_eq!(k.length(), 120);
            assert!(validate(&k).is_empty(), "{preset:?}");
        }
    }

    #[test]
    fn trefoil_params_are_checked() {
        let mut p = TrefoilPreset::Torus.params(120);
        p.minor_radius = 5.0;
        assert!(parametric_trefoil(&p).is_err());
        p = TrefoilPreset::Torus.params(120);
        p.z_scale = 0.0;
        // the planar projection of the torus trefoil has crossings, so it self-intersects
        assert!(matches!(parametric_trefoil(&p), Err(Error::SelfIntersection(..))));
    }
}
