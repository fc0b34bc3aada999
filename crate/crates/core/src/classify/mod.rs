//! Knot type identification from projected diagrams.

mod alexander;
mod diagram;

pub use alexander::{alexander_at, alexander_minor, determinant};
pub use diagram::{project, simplify, Crossing, Diagram, Passage, Sign, PROJECTION_TOLERANCE};

use crate::error::{Error, Result};
use crate::model::KnotEmbedding;
use crate::rng::{self, Purpose};
use crate::vec3::Vec3;
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub const DEFAULT_PROJECTIONS: usize = 3;
pub const MAX_RETRIES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KnotType {
    #[serde(rename = "0_1")]
    Unknot,
    #[serde(rename = "3_1")]
    K3_1,
    #[serde(rename = "4_1")]
    K4_1,
    #[serde(rename = "5_1")]
    K5_1,
    #[serde(rename = "5_2")]
    K5_2,
    #[serde(rename = "6_1")]
    K6_1,
    #[serde(rename = "6_2")]
    K6_2,
    #[serde(rename = "6_3")]
    K6_3,
    #[serde(rename = "unknown")]
    Unknown,
}

impl KnotType {
    pub const ALL: [KnotType; 9] = [
        KnotType::Unknot,
        KnotType::K3_1,
        KnotType::K4_1,
        KnotType::K5_1,
        KnotType::K5_2,
        KnotType::K6_1,
        KnotType::K6_2,
        KnotType::K6_3,
        KnotType::Unknown,
    ];

    pub fn label(self) -> &'static str {
        match self {
            KnotType::Unknot => "0_1",
            KnotType::K3_1 => "3_1",
            KnotType::K4_1 => "4_1",
            KnotType::K5_1 => "5_1",
            KnotType::K5_2 => "5_2",
            KnotType::K6_1 => "6_1",
            KnotType::K6_2 => "6_2",
            KnotType::K6_3 => "6_3",
            KnotType::Unknown => "unknown",
        }
    }

    /// Fingerprint `(|Δ(-1)|, |Δ(3)| without factors of 3)` of a tabulated type.
    pub fn fingerprint(self) -> Option<(u64, u64)> {
        FINGERPRINTS.iter().find(|(_, t)| *t == self).map(|(f, _)| *f)
    }
}

impl fmt::Display for KnotType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for KnotType {
    type Err = Error;

    fn from_str(s: &str) -> Result<KnotType> {
        KnotType::ALL
            .iter()
            .copied()
            .find(|t| t.label() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown knot type label {s:?}")))
    }
}

const FINGERPRINTS: [((u64, u64), KnotType); 8] = [
    ((1, 1), KnotType::Unknot),
    ((3, 7), KnotType::K3_1),
    ((5, 1), KnotType::K4_1),
    ((5, 61), KnotType::K5_1),
    ((7, 11), KnotType::K5_2),
    ((9, 5), KnotType::K6_1),
    ((11, 19), KnotType::K6_2),
    ((13, 37), KnotType::K6_3),
];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    pub det: BigUint,
    pub a3: BigUint,
}

impl Fingerprint {
    pub fn knot_type(&self) -> KnotType {
        let (Some(det), Some(a3)) = (self.det.to_u64(), self.a3.to_u64()) else {
            return KnotType::Unknown;
        };
        FINGERPRINTS
            .iter()
            .find(|(f, _)| *f == (det, a3))
            .map_or(KnotType::Unknown, |(_, t)| *t)
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.det, self.a3)
    }
}

fn strip_threes(mut v: BigUint) -> BigUint {
    let three = BigUint::from(3u32);
    if v.is_zero() {
        return v;
    }
    while (&v % &three).is_zero() {
        v /= &three;
    }
    v
}

pub fn alexander_fingerprint(d: &Diagram) -> Fingerprint {
    Fingerprint {
        det: alexander_at(d, -1),
        a3: strip_threes(alexander_at(d, 3)),
    }
}

/// Uniform random unit vector.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Fingerprint of one random generic projection, retrying on degeneracy.
pub fn projection_fingerprint<R: Rng + ?Sized>(k: &KnotEmbedding, rng: &mut R) -> Result<Fingerprint> {
    let mut last = None;
    for _ in 0..MAX_RETRIES {
        match project(k, random_direction(rng)) {
            Ok(d) => return Ok(alexander_fingerprint(&simplify(&d))),
            Err(e @ Error::NonGenericProjection(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Stable 64-bit hash of a knot id, used to give each knot its own stream.
fn id_hash(id: &str) -> u64 {
    id.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Majority vote of the fingerprint lookup over `n_projections` random projections.
pub fn classify(k: &KnotEmbedding, n_projections: usize, seed: u64) -> Result<KnotType> {
    if n_projections == 0 {
        return Err(Error::InvalidArgument("n_projections must be positive".into()));
    }
    k.check()?;
    let mut rng = rng::stream(seed, Purpose::Classify, id_hash(&k.id));
    let mut votes: Vec<(KnotType, usize)> = Vec::new();
    for _ in 0..n_projections {
        let t = projection_fingerprint(k, &mut rng)?.knot_type();
        match votes.iter_mut().find(|(v, _)| *v == t) {
            Some(slot) => slot.1 += 1,
            None => votes.push((t, 1)),
        }
        if let Some(&(winner, _)) = votes.iter().find(|(_, c)| 2 * c > n_projections) {
            return Ok(winner);
        }
    }
    // no strict majority: most votes, earliest first
    let best = votes.iter().map(|v| v.1).max().unwrap_or(0);
    Ok(votes.iter().find(|v| v.1 == best).map_or(KnotType::Unknown, |v| v.0))
}
