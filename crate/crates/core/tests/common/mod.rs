//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use knotscope::model::KnotEmbedding;
use knotscope::vec3::Vec3;
use rand::Rng;

/// Multiset of intervals, sorted, with finite persistence > 0.
pub type Intervals = Vec<(f64, f64)>;

/// Explicit Vietoris-Rips boundary matrix reduction over Z/2 up to dimension 2.
/// Returns nonzero-persistence finite intervals in dimensions 0 and 1.
pub fn rips_oracle(points: &[Vec3]) -> (Intervals, Intervals) {
    let n = points.len();
    let d = |i: usize, j: usize| points[i].dist(points[j]);
    // (diam, dim, vertices)
    let mut simplices: Vec<(f64, usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        simplices.push((0.0, 0, vec![i]));
    }
    for i in 0..n {
        for j in i + 1..n {
            simplices.push((d(i, j), 1, vec![i, j]));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let diam = d(i, j).max(d(i, k)).max(d(j, k));
                simplices.push((diam, 2, vec![i, j, k]));
            }
        }
    }
    simplices.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let position: std::collections::HashMap<Vec<usize>, usize> =
        simplices.iter().enumerate().map(|(p, s)| (s.2.clone(), p)).collect();
    let mut columns: Vec<Vec<usize>> = simplices
        .iter()
        .map(|s| {
            if s.1 == 0 {
                return Vec::new();
            }
            let mut col: Vec<usize> = (0..s.2.len())
                .map(|skip| {
                    let face: Vec<usize> =
                        s.2.iter().enumerate().filter(|(q, _)| *q != skip).map(|(_, &v)| v).collect();
                    position[&face]
                })
                .collect();
            col.sort_unstable();
            col
        })
        .collect();
    let mut low_owner: std::collections::HashMap<usize, usize> = Default::default();
    let mut out0 = Vec::new();
    let mut out1 = Vec::new();
    for c in 0..columns.len() {
        while let Some(&low) = columns[c].last() {
            match low_owner.get(&low) {
                Some(&o) => {
                    let other = columns[o].clone();
                    columns[c] = sym_diff(&columns[c], &other);
                }
                None => {
                    low_owner.insert(low, c);
                    let (birth, death) = (simplices[low].0, simplices[c].0);
                    if death > birth {
                        if simplices[low].1 == 0 {
                            out0.push((birth, death));
                        } else {
                            out1.push((birth, death));
                        }
                    }
                    break;
                }
            }
        }
    }
    out0.sort_by(cmp_pair);
    out1.sort_by(cmp_pair);
    (out0, out1)
}

fn sym_diff(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            out.push(b[j]);
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn cmp_pair(a: &(f64, f64), b: &(f64, f64)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
}

/// Intervals of a barcode dimension in the oracle's format.
pub fn intervals(bars: &[knotscope::persistence::Bar]) -> Intervals {
    let mut v: Intervals = bars
        .iter()
        .filter(|b| b.death.is_finite() && b.death > b.birth)
        .map(|b| (b.birth, b.death))
        .collect();
    v.sort_by(cmp_pair);
    v
}

/// Smallest ball through some support set of size ≤ 4 containing every point.
pub fn exhaustive_sphere(points: &[Vec3]) -> (Vec3, f64) {
    let n = points.len();
    let mut best: Option<(Vec3, f64)> = None;
    let mut consider = |c: Vec3, r: f64| {
        let tol = 1e-9 * (1.0 + r);
        if points.iter().all(|p| p.dist(c) <= r + tol) && best.is_none_or(|b| r < b.1) {
            best = Some((c, r));
        }
    };
    for i in 0..n {
        consider(points[i], 0.0);
        for j in i + 1..n {
            let c = (points[i] + points[j]) * 0.5;
            consider(c, c.dist(points[i]));
            for k in j + 1..n {
                if let Some(c) = circumcenter3(points[i], points[j], points[k]) {
                    consider(c, c.dist(points[i]));
                }
                for l in k + 1..n {
                    if let Some(c) = circumcenter4(points[i], points[j], points[k], points[l]) {
                        consider(c, c.dist(points[i]));
                    }
                }
            }
        }
    }
    best.expect("some support set always works")
}

fn circumcenter3(a: Vec3, b: Vec3, c: Vec3) -> Option<Vec3> {
    let (u, v) = (b - a, c - a);
    let w = u.cross(v);
    let den = 2.0 * w.norm_sq();
    if den < 1e-18 {
        return None;
    }
    Some(a + (w.cross(u) * v.norm_sq() + v.cross(w) * u.norm_sq()) / den)
}

fn circumcenter4(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> Option<Vec3> {
    // solve 2 (p_i - a) · x = |p_i|^2 - |a|^2 by Cramer's rule
    let rows = [b - a, c - a, d - a];
    let rhs: Vec<f64> = [b, c, d].iter().map(|p| p.norm_sq() - a.norm_sq()).collect();
    let det3 = |m: [Vec3; 3]| m[0].dot(m[1].cross(m[2]));
    let m = [rows[0] * 2.0, rows[1] * 2.0, rows[2] * 2.0];
    let det = det3(m);
    if det.abs() < 1e-12 {
        return None;
    }
    let cols = |k: usize| -> [Vec3; 3] {
        let mut out = m;
        for r in 0..3 {
            let mut arr = out[r].to_array();
            arr[k] = rhs[r];
            out[r] = Vec3::new(arr[0], arr[1], arr[2]);
        }
        out
    };
    Some(Vec3::new(det3(cols(0)) / det, det3(cols(1)) / det, det3(cols(2)) / det))
}

/// Hull volume from the brute-force facet set: every triple whose plane has all
/// points on one side, tetrahedralised against the centroid.
pub fn brute_hull_volume(points: &[Vec3]) -> f64 {
    let n = points.len();
    let centroid = points.iter().copied().sum::<Vec3>() / n as f64;
    let mut facets: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let normal = (points[j] - points[i]).cross(points[k] - points[i]);
                if normal.norm() < 1e-12 {
                    continue;
                }
                let sides: Vec<f64> = points.iter().map(|p| normal.dot(*p - points[i])).collect();
                let tol = 1e-9 * normal.norm();
                if sides.iter().all(|&s| s <= tol) || sides.iter().all(|&s| s >= -tol) {
                    facets.push((i, j, k));
                }
            }
        }
    }
    // general position input: each facet triangle is a hull face
    facets
        .iter()
        .map(|&(i, j, k)| {
            ((points[i] - centroid).dot((points[j] - centroid).cross(points[k] - centroid))).abs() / 6.0
        })
        .sum()
}

/// Mean crossing count of projections along `samples` random directions.
pub fn monte_carlo_acn<R: Rng>(k: &KnotEmbedding, samples: usize, rng: &mut R) -> f64 {
    let n = k.n_edges();
    let mut total = 0usize;
    for _ in 0..samples {
        let z: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = (1.0 - z * z).sqrt();
        let dir = Vec3::new(r * phi.cos(), r * phi.sin(), z);
        let e1 = dir.any_orthogonal();
        let e2 = dir.cross(e1);
        let flat: Vec<(f64, f64)> = k.vertices.iter().map(|p| (p.dot(e1), p.dot(e2))).collect();
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if segments_cross(flat[i], flat[(i + 1) % n], flat[j], flat[(j + 1) % n]) {
                    total += 1;
                }
            }
        }
    }
    total as f64 / samples as f64
}

fn segments_cross(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let orient = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0);
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Integer Laurent polynomial in t, as coefficients from `low` upward.
#[derive(Debug, Clone, PartialEq)]
pub struct Laurent {
    pub low: i32,
    pub coeffs: Vec<i64>,
}

impl Laurent {
    pub fn constant(c: i64) -> Laurent {
        Laurent { low: 0, coeffs: vec![c] }.trimmed()
    }

    pub fn new(low: i32, coeffs: Vec<i64>) -> Laurent {
        Laurent { low, coeffs }.trimmed()
    }

    fn trimmed(mut self) -> Laurent {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|&&c| c == 0).count();
        self.coeffs.drain(..lead);
        self.low += lead as i32;
        if self.coeffs.is_empty() {
            self.low = 0;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &Laurent) -> Laurent {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let low = self.low.min(o.low);
        let high = (self.low + self.coeffs.len() as i32).max(o.low + o.coeffs.len() as i32);
        let mut c = vec![0i64; (high - low) as usize];
        for (i, &v) in self.coeffs.iter().enumerate() {
            c[(self.low - low) as usize + i] += v;
        }
        for (i, &v) in o.coeffs.iter().enumerate() {
            c[(o.low - low) as usize + i] += v;
        }
        Laurent::new(low, c)
    }

    pub fn neg(&self) -> Laurent {
        Laurent::new(self.low, self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, o: &Laurent) -> Laurent {
        if self.is_zero() || o.is_zero() {
            return Laurent::constant(0);
        }
        let mut c = vec![0i64; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Laurent::new(self.low + o.low, c)
    }

    /// Normalised up to ±t^k: lowest power 0, positive leading-low coefficient.
    pub fn normalized(&self) -> Laurent {
        let sign = if self.coeffs.first().copied().unwrap_or(0) < 0 { -1 } else { 1 };
        Laurent::new(0, self.coeffs.iter().map(|c| c * sign).collect())
    }

    pub fn eval(&self, t: i64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c as f64 * (t as f64).powi(self.low + i as i32))
            .sum()
    }
}

/// Symbolic Alexander polynomial from an entirely separate arc labelling:
/// arcs are numbered by walking the code from an over passage, and the
/// determinant is expanded by cofactors.
pub fn symbolic_alexander(code: &[i64], signs: &[i8]) -> Laurent {
    let n = signs.len();
    if n <= 1 {
        return Laurent::constant(1);
    }
    let m = code.len();
    // arc label of each position: increments after each under passage
    let first_under = code.iter().position(|&c| c < 0).unwrap();
    let mut arc = vec![0usize; m];
    let mut label = 0usize;
    for step in 1..=m {
        let p = (first_under + step) % m;
        arc[p] = label % n;
        if code[p] < 0 {
            label += 1;
        }
    }
    // an under position closes its incoming arc; the outgoing arc is the next label
    let one = Laurent::constant(1);
    let t = Laurent::new(1, vec![1]);
    let one_minus_t = one.add(&t.neg());
    let mut mat = vec![vec![Laurent::constant(0); n]; n];
    for c in 1..=n as i64 {
        let row = (c - 1) as usize;
        let o = code.iter().position(|&x| x == c).unwrap();
        let u = code.iter().position(|&x| x == -c).unwrap();
        let over = arc[o];
        let inc = arc[u];
        let out = (inc + 1) % n;
        mat[row][over] = mat[row][over].add(&one_minus_t);
        if signs[row] > 0 {
            mat[row][inc] = mat[row][inc].add(&t);
            mat[row][out] = mat[row][out].add(&one.neg());
        } else {
            mat[row][inc] = mat[row][inc].add(&one.neg());
            mat[row][out] = mat[row][out].add(&t);
        }
    }
    let minor: Vec<Vec<Laurent>> = mat[..n - 1].iter().map(|r| r[..n - 1].to_vec()).collect();
    cofactor_det(&minor).normalized()
}

fn cofactor_det(m: &[Vec<Laurent>]) -> Laurent {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = Laurent::constant(0);
    for col in 0..n {
        if m[0][col].is_zero() {
            continue;
        }
        let sub: Vec<Vec<Laurent>> = m[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|(c, _)| *c != col).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = m[0][col].mul(&cofactor_det(&sub));
        acc = if col % 2 == 0 { acc.add(&term) } else { acc.add(&term.neg()) };
    }
    acc
}

/// Bottleneck distance between the finite parts of two diagrams.
pub fn bottleneck(a: &[knotscope::persistence::Bar], b: &[knotscope::persistence::Bar]) -> f64 {
    let fa: Vec<(f64, f64)> = a.iter().filter(|x| x.death.is_finite()).map(|x| (x.birth, x.death)).collect();
    let fb: Vec<(f64, f64)> = b.iter().filter(|x| x.death.is_finite()).map(|x| (x.birth, x.death)).collect();
    let (na, nb) = (fa.len(), fb.len());
    let size = na + nb;
    // left: fa then diagonal slots for fb; right: fb then diagonal slots for fa
    let cost = |l: usize, r: usize| -> f64 {
        match (l < na, r < nb) {
            (true, true) => (fa[l].0 - fb[r].0).abs().max((fa[l].1 - fb[r].1).abs()),
            (true, false) => {
                if r - nb == l {
                    (fa[l].1 - fa[l].0) / 2.0
                } else {
                    f64::INFINITY
                }
            }
            (false, true) => {
                if l - na == r {
                    (fb[r].1 - fb[r].0) / 2.0
                } else {
                    f64::INFINITY
                }
            }
            (false, false) => 0.0,
        }
    };
    let mut candidates: Vec<f64> = Vec::new();
    for l in 0..size {
        for r in 0..size {
            let c = cost(l, r);
            if c.is_finite() {
                candidates.push(c);
            }
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let feasible = |delta: f64| -> bool {
        let mut match_r: Vec<Option<usize>> = vec![None; size];
        fn augment(
            l: usize,
            size: usize,
            ok: &dyn Fn(usize, usize) -> bool,
            seen: &mut [bool],
            match_r: &mut [Option<usize>],
        ) -> bool {
            for r in 0..size {
                if ok(l, r) && !seen[r] {
                    seen[r] = true;
                    if match_r[r].is_none_or(|m| augment(m, size, ok, seen, match_r)) {
                        match_r[r] = Some(l);
                        return true;
                    }
                }
            }
            false
        }
        let ok = |l: usize, r: usize| cost(l, r) <= delta;
        (0..size).all(|l| {
            let mut seen = vec![false; size];
            augment(l, size, &ok, &mut seen, &mut match_r)
        })
    };
    if candidates.is_empty() {
        return 0.0;
    }
    // the largest candidate always admits the all-diagonal matching
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}
