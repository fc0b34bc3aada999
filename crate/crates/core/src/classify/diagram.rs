//! Knot diagrams as signed Gauss codes.

use crate::error::{Error, Result};
use crate::model::KnotEmbedding;
use crate::vec3::Vec3;
use rustc_hash::FxHashMap;

/// Relative tolerance for degeneracies in a projection.
pub const PROJECTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn from_i8(s: i8) -> Option<Sign> {
        match s {
            1 => Some(Sign::Positive),
            -1 => Some(Sign::Negative),
            _ => None,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }
}

/// A crossing; `over` and `under` are the positions of its two passages in the Gauss code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crossing {
    pub over: usize,
    pub under: usize,
    pub sign: Sign,
}

/// One visit of the traversal to a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Passage {
    pub crossing: usize,
    pub over: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    crossings: Vec<Crossing>,
    gauss_code: Vec<Passage>,
}

impl Diagram {
    pub fn unknot() -> Diagram {
        Diagram {
            crossings: Vec::new(),
            gauss_code: Vec::new(),
        }
    }

    /// Builds a diagram from passages labelled by arbitrary crossing ids and a
    /// sign per id. Labels are compacted in order of first appearance.
    pub fn from_passages(passages: &[(usize, bool)], signs: &FxHashMap<usize, Sign>) -> Result<Diagram> {
        let mut relabel: FxHashMap<usize, usize> = FxHashMap::default();
        let mut order = Vec::new();
        let mut code = Vec::with_capacity(passages.len());
        for &(label, over) in passages {
            let next = relabel.len();
            let id = *relabel.entry(label).or_insert_with(|| {
                order.push(label);
                next
            });
            code.push(Passage { crossing: id, over });
        }
        let mut over_pos = vec![None; order.len()];
        let mut under_pos = vec![None; order.len()];
        for (p, pass) in code.iter().enumerate() {
            let slot = if pass.over { &mut over_pos[pass.crossing] } else { &mut under_pos[pass.crossing] };
            if slot.replace(p).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "crossing {} visited twice on the same level",
                    order[pass.crossing]
                )));
            }
        }
        let mut crossings = Vec::with_capacity(order.len());
        for (id, label) in order.iter().enumerate() {
            let (Some(over), Some(under)) = (over_pos[id], under_pos[id]) else {
                return Err(Error::InvalidArgument(format!("crossing {label} is not visited once over and once under")));
            };
            let sign = *signs
                .get(label)
                .ok_or_else(|| Error::InvalidArgument(format!("crossing {label} has no sign")))?;
            crossings.push(Crossing { over, under, sign });
        }
        Ok(Diagram { crossings, gauss_code: code })
    }

    /// Signed Gauss code: `+c` for an over passage of crossing `c`, `-c` for under;
    /// `signs[c - 1]` is ±1. Labels start at 1.
    pub fn from_signed_gauss(code: &[i64], signs: &[i8]) -> Result<Diagram> {
        let passages: Vec<(usize, bool)> = code
            .iter()
            .map(|&c| {
                if c == 0 {
                    Err(Error::InvalidArgument("crossing label 0 in Gauss code".into()))
                } else {
                    Ok((c.unsigned_abs() as usize, c > 0))
                }
            })
            .collect::<Result<_>>()?;
        let mut map = FxHashMap::default();
        for (i, &s) in signs.iter().enumerate() {
            let s = Sign::from_i8(s).ok_or_else(|| Error::InvalidArgument(format!("bad crossing sign {s}")))?;
            map.insert(i + 1, s);
        }
        Diagram::from_passages(&passages, &map)
    }

    /// Closure of a braid on `strands` strands. Letter `i` is σ_i, `-i` its inverse.
    pub fn from_braid(strands: usize, word: &[i32]) -> Result<Diagram> {
        if word.iter().any(|&g| g == 0 || g.unsigned_abs() as usize >= strands) {
            return Err(Error::InvalidArgument("braid generator out of range".into()));
        }
        let mut passages = Vec::with_capacity(2 * word.len());
        let mut pos = 0usize;
        loop {
            for (level, &g) in word.iter().enumerate() {
                let left = g.unsigned_abs() as usize - 1;
                if pos == left {
                    // moving right: over for a positive generator
                    passages.push((level, g > 0));
                    pos = left + 1;
                } else if pos == left + 1 {
                    passages.push((level, g < 0));
                    pos = left;
                }
            }
            if pos == 0 {
                break;
            }
        }
        if passages.len() != 2 * word.len() {
            return Err(Error::InvalidArgument("braid closure has more than one component".into()));
        }
        let signs = word
            .iter()
            .enumerate()
            .map(|(level, &g)| (level, if g > 0 { Sign::Positive } else { Sign::Negative }))
            .collect();
        Diagram::from_passages(&passages, &signs)
    }

    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn gauss_code(&self) -> &[Passage] {
        &self.gauss_code
    }

    /// Gauss code in the `±label` convention of [`Diagram::from_signed_gauss`].
    pub fn signed_gauss(&self) -> (Vec<i64>, Vec<i8>) {
        let code = self
            .gauss_code
            .iter()
            .map(|p| {
                let l = p.crossing as i64 + 1;
                if p.over {
                    l
                } else {
                    -l
                }
            })
            .collect();
        let signs = self.crossings.iter().map(|c| c.sign.as_i8()).collect();
        (code, signs)
    }

    pub fn writhe(&self) -> i64 {
        self.crossings.iter().map(|c| c.sign.as_i8() as i64).sum()
    }

    fn without_positions(&self, remove: &[usize]) -> Diagram {
        let mut gone = vec![false; self.gauss_code.len()];
        for &p in remove {
            gone[p] = true;
        }
        let passages: Vec<(usize, bool)> = self
            .gauss_code
            .iter()
            .enumerate()
            .filter(|(p, _)| !gone[*p])
            .map(|(_, pass)| (pass.crossing, pass.over))
            .collect();
        let signs = self.crossings.iter().enumerate().map(|(i, c)| (i, c.sign)).collect();
        Diagram::from_passages(&passages, &signs).expect("removing whole crossings keeps the code valid")
    }
}

/// Half-edge kinds at a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Port {
    OverIn,
    OverOut,
    UnderIn,
    UnderOut,
}

/// Counter-clockwise order of the ports around a crossing of the given sign.
fn rotation(sign: Sign) -> [Port; 4] {
    match sign {
        Sign::Positive => [Port::OverOut, Port::UnderOut, Port::OverIn, Port::UnderIn],
        Sign::Negative => [Port::OverOut, Port::UnderIn, Port::OverIn, Port::UnderOut],
    }
}

fn turn(sign: Sign, port: Port, step: usize) -> Port {
    let r = rotation(sign);
    let i = r.iter().position(|&p| p == port).expect("port in rotation");
    r[(i + step) % 4]
}

fn out_port(p: Passage) -> Port {
    if p.over {
        Port::OverOut
    } else {
        Port::UnderOut
    }
}

fn in_port(p: Passage) -> Port {
    if p.over {
        Port::OverIn
    } else {
        Port::UnderIn
    }
}

/// Removes Reidemeister I loops and Reidemeister II bigons until none remain.
pub fn simplify(d: &Diagram) -> Diagram {
    let mut cur = d.clone();
    while let Some(remove) = find_r1(&cur).or_else(|| find_r2(&cur)) {
        cur = cur.without_positions(&remove);
    }
    cur
}

fn find_r1(d: &Diagram) -> Option<Vec<usize>> {
    let n = d.gauss_code.len();
    if n < 2 {
        return None;
    }
    (0..n)
        .find(|&p| d.gauss_code[p].crossing == d.gauss_code[(p + 1) % n].crossing)
        .map(|p| vec![p, (p + 1) % n])
}

fn find_r2(d: &Diagram) -> Option<Vec<usize>> {
    let n = d.gauss_code.len();
    if n < 4 {
        return None;
    }
    let code = &d.gauss_code;
    let other = |p: usize| {
        let c = &d.crossings[code[p].crossing];
        if c.over == p {
            c.under
        } else {
            c.over
        }
    };
    for p in 0..n {
        let q = (p + 1) % n;
        let (pa, pb) = (code[p], code[q]);
        if pa.over != pb.over || pa.crossing == pb.crossing {
            continue;
        }
        let (ca, cb) = (d.crossings[pa.crossing], d.crossings[pb.crossing]);
        if ca.sign == cb.sign {
            continue;
        }
        let (oa, ob) = (other(p), other(q));
        let forward = (oa + 1) % n == ob;
        let backward = (ob + 1) % n == oa;
        if !(forward || backward) {
            continue;
        }
        // strand 1 runs p -> q (a to b). Strand 2 runs oa -> ob or ob -> oa.
        // Ports of edge 1 at a and b, and of edge 2 at a and b.
        let e1_a = out_port(pa);
        let e1_b = in_port(pb);
        let (e2_a, e2_b) = if forward {
            (out_port(code[oa]), in_port(code[ob]))
        } else {
            (in_port(code[oa]), out_port(code[ob]))
        };
        let bigon = [1usize, 3].iter().any(|&step| {
            turn(cb.sign, e1_b, step) == e2_b && turn(ca.sign, e2_a, step) == e1_a
        });
        if bigon {
            return Some(vec![p, q, oa, ob]);
        }
    }
    None
}

/// Orthonormal frame `(e1, e2)` with `e1 × e2 = direction`.
fn frame(direction: Vec3) -> (Vec3, Vec3) {
    let e1 = direction.any_orthogonal();
    let e2 = direction.cross(e1);
    (e1, e2)
}

#[inline]
fn cross2(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

/// Projects `k` along `direction` (the viewer looks from `+direction`).
pub fn project(k: &KnotEmbedding, direction: Vec3) -> Result<Diagram> {
    let dir = direction
        .normalized()
        .ok_or_else(|| Error::InvalidArgument("zero projection direction".into()))?;
    let (e1, e2) = frame(dir);
    let n = k.n_edges();
    let flat: Vec<(f64, f64)> = k.vertices.iter().map(|&p| (p.dot(e1), p.dot(e2))).collect();
    let height: Vec<f64> = k.vertices.iter().map(|&p| p.dot(dir)).collect();
    let seg = |i: usize| (flat[i], flat[(i + 1) % n]);
    let sub = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0, a.1 - b.1);
    let tol = PROJECTION_TOLERANCE;

    let lengths: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = seg(i);
            let d = sub(b, a);
            (d.0 * d.0 + d.1 * d.1).sqrt()
        })
        .collect();
    let scale = k.edge_vector(0).norm().max(f64::MIN_POSITIVE);
    for i in 0..n {
        if lengths[i] < tol * scale {
            return Err(Error::NonGenericProjection(format!("edge {i} projects to a point")));
        }
        // adjacent edges folding back onto each other
        let j = (i + 1) % n;
        let (a, b) = seg(i);
        let (_, c) = seg(j);
        let u = sub(b, a);
        let v = sub(c, b);
        if cross2(u, v).abs() < tol * lengths[i] * lengths[j] && u.0 * v.0 + u.1 * v.1 < 0.0 {
            return Err(Error::NonGenericProjection(format!("edges {i} and {j} overlap")));
        }
    }

    // (segment, parameter, crossing label, over)
    let mut events: Vec<Vec<(f64, usize, bool)>> = vec![Vec::new(); n];
    let mut signs = FxHashMap::default();
    let mut label = 0usize;
    for i in 0..n {
        let (a, b) = seg(i);
        let r = sub(b, a);
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = seg(j);
            let q = sub(d, c);
            let denom = cross2(r, q);
            let ac = sub(c, a);
            if denom.abs() < tol * lengths[i] * lengths[j] {
                // parallel in projection; collinear overlap is degenerate
                if cross2(ac, r).abs() < tol * lengths[i] * lengths[i].max(1.0) {
                    let t0 = (ac.0 * r.0 + ac.1 * r.1) / (lengths[i] * lengths[i]);
                    let bc = sub(d, a);
                    let t1 = (bc.0 * r.0 + bc.1 * r.1) / (lengths[i] * lengths[i]);
                    if t0.max(t1) >= -tol && t0.min(t1) <= 1.0 + tol {
                        return Err(Error::NonGenericProjection(format!("edges {i} and {j} overlap")));
                    }
                }
                continue;
            }
            let s = cross2(ac, q) / denom;
            let t = cross2(ac, r) / denom;
            if s < -tol || s > 1.0 + tol || t < -tol || t > 1.0 + tol {
                continue;
            }
            if s < tol || s > 1.0 - tol || t < tol || t > 1.0 - tol {
                return Err(Error::NonGenericProjection(format!("edges {i} and {j} cross at a vertex")));
            }
            let hi = height[i] + s * (height[(i + 1) % n] - height[i]);
            let hj = height[j] + t * (height[(j + 1) % n] - height[j]);
            if (hi - hj).abs() < tol * scale {
                return Err(Error::NonGenericProjection(format!("edges {i} and {j} intersect")));
            }
            let i_over = hi > hj;
            let (o, u) = if i_over { (r, q) } else { (q, r) };
            let sign = if cross2(o, u) > 0.0 { Sign::Positive } else { Sign::Negative };
            signs.insert(label, sign);
            events[i].push((s, label, i_over));
            events[j].push((t, label, !i_over));
            label += 1;
        }
    }

    let mut passages = Vec::with_capacity(2 * label);
    for (i, ev) in events.iter_mut().enumerate() {
        ev.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in ev.windows(2) {
            if w[1].0 - w[0].0 < tol {
                return Err(Error::NonGenericProjection(format!("multiple point on edge {i}")));
            }
        }
        passages.extend(ev.iter().map(|&(_, l, over)| (l, over)));
    }
    Diagram::from_passages(&passages, &signs)
}
