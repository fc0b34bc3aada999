//! Vietoris-Rips persistence in dimensions 0 and 1.
//!
//! Dimension 1 is computed by reducing the coboundary matrix of edges with
//! clearing (minimum spanning tree edges are skipped) and a shortcut for
//! apparent pairs. Triangles are encoded as `max_edge * n + rank(k)` where the
//! rank enumerates the opposite vertex outwards from the edge's first endpoint,
//! so the first valid cofacet of an edge is usually found among its neighbours.

use crate::error::{Error, Result};
use crate::features::BettiCurve;
use crate::model::PointCloud;
use crate::vec3::Vec3;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

/// Relative tolerance used when validating user-supplied matrices.
pub const MATRIX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_points(points: &[Vec3]) -> DistanceMatrix {
        let n = points.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = points[i].dist(points[j]);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        DistanceMatrix { n, data }
    }

    /// Validates symmetry, non-negativity, the zero diagonal and the triangle inequality.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<DistanceMatrix> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidDistanceMatrix("matrix is not square".into()));
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        let scale = data.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1.0);
        let tol = MATRIX_TOLERANCE * scale;
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidDistanceMatrix(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = data[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidDistanceMatrix(format!("entry ({i}, {j}) = {v}")));
                }
                if (v - data[j * n + i]).abs() > tol {
                    return Err(Error::InvalidDistanceMatrix(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if data[i * n + k] > data[i * n + j] + data[j * n + k] + tol {
                        return Err(Error::InvalidDistanceMatrix(format!(
                            "triangle inequality fails for ({i}, {j}, {k})"
                        )));
                    }
                }
            }
        }
        Ok(DistanceMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// `min_i max_j d(i, j)`: above this value the complex is a cone.
    pub fn enclosing_radius(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().copied().fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn distance_matrix(cloud: &PointCloud) -> Result<DistanceMatrix> {
    if cloud.len() < 2 {
        return Err(Error::InvalidArgument("distance matrix needs at least 2 points".into()));
    }
    Ok(DistanceMatrix::from_points(&cloud.points))
}

/// What a filtration value measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    /// Pairwise distance between points.
    Diameter,
    /// Half the pairwise distance.
    Radius,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub birth: f64,
    pub death: f64,
}

impl Bar {
    pub fn new(birth: f64, death: f64) -> Bar {
        Bar { birth, death }
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Barcode {
    pub dim0: Vec<Bar>,
    pub dim1: Vec<Bar>,
    pub scale: Scale,
}

impl Barcode {
    pub fn empty(scale: Scale) -> Barcode {
        Barcode {
            dim0: Vec::new(),
            dim1: Vec::new(),
            scale,
        }
    }

    pub fn bars(&self, dim: usize) -> &[Bar] {
        match dim {
            0 => &self.dim0,
            1 => &self.dim1,
            _ => &[],
        }
    }

    /// Same barcode with every endpoint multiplied by `factor` (and `scale` retagged).
    pub fn rescaled(&self, factor: f64, scale: Scale) -> Barcode {
        let f = |b: &Bar| Bar::new(b.birth * factor, b.death * factor);
        Barcode {
            dim0: self.dim0.iter().map(f).collect(),
            dim1: self.dim1.iter().map(f).collect(),
            scale,
        }
    }

    pub fn to_radius(&self) -> Barcode {
        match self.scale {
            Scale::Radius => self.clone(),
            Scale::Diameter => self.rescaled(0.5, Scale::Radius),
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // keep the smaller root for determinism
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

const NO_EDGE: u32 = u32::MAX;

struct Complex<'a> {
    dm: &'a DistanceMatrix,
    n: usize,
    /// `(i, j)` with `i < j`, sorted by `(length, i, j)`.
    edges: Vec<(u32, u32)>,
    /// Position of edge `{i, j}` in `edges`, or `NO_EDGE`.
    index: Vec<u32>,
}

impl<'a> Complex<'a> {
    fn new(dm: &'a DistanceMatrix, threshold: f64) -> Self {
        let n = dm.n();
        let mut edges: Vec<(u32, u32)> = Vec::new();
        for i in 0..n {
            let row = dm.row(i);
            for (j, &d) in row.iter().enumerate().skip(i + 1) {
                if d <= threshold {
                    edges.push((i as u32, j as u32));
                }
            }
        }
        edges.sort_by(|a, b| {
            dm.get(a.0 as usize, a.1 as usize)
                .total_cmp(&dm.get(b.0 as usize, b.1 as usize))
                .then(a.cmp(b))
        });
        let mut index = vec![NO_EDGE; n * n];
        for (e, &(i, j)) in edges.iter().enumerate() {
            index[i as usize * n + j as usize] = e as u32;
            index[j as usize * n + i as usize] = e as u32;
        }
        Complex { dm, n, edges, index }
    }

    #[inline]
    fn edge(&self, i: usize, j: usize) -> u32 {
        self.index[i * self.n + j]
    }

    #[inline]
    fn length(&self, e: u32) -> f64 {
        let (i, j) = self.edges[e as usize];
        self.dm.get(i as usize, j as usize)
    }

    /// Rank of `k` in the order `i+1, i-1, i+2, i-2, ...` (indices mod n).
    #[inline]
    fn rank(&self, i: usize, k: usize) -> u64 {
        let fwd = if k >= i { k - i } else { k + self.n - i };
        let bwd = self.n - fwd;
        if fwd <= bwd {
            2 * (fwd as u64 - 1)
        } else {
            2 * (bwd as u64 - 1) + 1
        }
    }

    #[inline]
    fn code_edge(&self, code: u64) -> u32 {
        (code / self.n as u64) as u32
    }

    /// Vertex order to scan when looking for the first cofacet of an edge at `i`.
    #[inline]
    fn kth(&self, i: usize, rank: usize) -> usize {
        let step = rank / 2 + 1;
        if rank.is_multiple_of(2) {
            (i + step) % self.n
        } else {
            (i + self.n - step) % self.n
        }
    }

    /// Smallest cofacet of `e` whose maximal edge is `e` itself.
    fn apparent_cofacet(&self, e: u32) -> Option<u64> {
        let (i, j) = self.edges[e as usize];
        let (i, j) = (i as usize, j as usize);
        for r in 0..self.n - 1 {
            let k = self.kth(i, r);
            if k == j {
                continue;
            }
            let (a, b) = (self.edge(i, k), self.edge(j, k));
            if a < e && b < e {
                return Some(e as u64 * self.n as u64 + r as u64);
            }
        }
        None
    }

    /// All cofacet codes of `e`, in no particular order.
    fn coboundary(&self, e: u32, out: &mut Vec<u64>) {
        out.clear();
        let (i, j) = self.edges[e as usize];
        let (i, j) = (i as usize, j as usize);
        let (row_i, row_j) = (&self.index[i * self.n..(i + 1) * self.n], &self.index[j * self.n..(j + 1) * self.n]);
        for k in 0..self.n {
            let (a, b) = (row_i[k], row_j[k]);
            if a == NO_EDGE || b == NO_EDGE || k == i || k == j {
                continue;
            }
            // rank is taken from the smaller endpoint of the top edge
            let (top, base, opp) = if e > a && e > b {
                (e, i, k)
            } else if a > b {
                (a, i.min(k), j)
            } else {
                (b, j.min(k), i)
            };
            out.push(top as u64 * self.n as u64 + self.rank(base, opp));
        }
    }
}

const PAGE_SHIFT: u32 = 9;
const PAGE_WORDS: usize = 1 << (PAGE_SHIFT - 6);
const NO_PAGE: u32 = u32::MAX;

/// A Z/2 column over triangle codes as a sparse paged bitset. Pages are
/// one cache line; a bitmap over pages records which are nonempty.
struct WorkingColumn {
    table: Vec<u32>,
    pages: Vec<[u64; PAGE_WORDS]>,
    counts: Vec<u32>,
    owner: Vec<u32>,
    free: Vec<u32>,
    occupied: Vec<u64>,
    /// Every entry is at or above this code.
    floor: u64,
}

impl WorkingColumn {
    fn new(codes: u64) -> Self {
        let n_pages = (codes >> PAGE_SHIFT) as usize + 1;
        WorkingColumn {
            table: vec![NO_PAGE; n_pages],
            pages: Vec::new(),
            counts: Vec::new(),
            owner: Vec::new(),
            free: Vec::new(),
            occupied: vec![0; n_pages / 64 + 1],
            floor: 0,
        }
    }

    fn clear(&mut self) {
        for slot in 0..self.pages.len() {
            let page = self.owner[slot];
            if page != NO_PAGE {
                self.table[page as usize] = NO_PAGE;
                self.occupied[page as usize / 64] = 0;
                self.pages[slot] = [0; PAGE_WORDS];
                self.counts[slot] = 0;
                self.owner[slot] = NO_PAGE;
                self.free.push(slot as u32);
            }
        }
        self.floor = 0;
    }

    #[inline]
    fn toggle(&mut self, code: u64) {
        let page = (code >> PAGE_SHIFT) as usize;
        let mut slot = self.table[page];
        if slot == NO_PAGE {
            slot = match self.free.pop() {
                Some(s) => s,
                None => {
                    self.pages.push([0; PAGE_WORDS]);
                    self.counts.push(0);
                    self.owner.push(NO_PAGE);
                    (self.pages.len() - 1) as u32
                }
            };
            self.table[page] = slot;
            self.owner[slot as usize] = page as u32;
        }
        let s = slot as usize;
        let word = (code >> 6) as usize & (PAGE_WORDS - 1);
        let bit = 1u64 << (code & 63);
        self.pages[s][word] ^= bit;
        if self.pages[s][word] & bit != 0 {
            self.counts[s] += 1;
            self.occupied[page / 64] |= 1 << (page % 64);
        } else {
            self.counts[s] -= 1;
            if self.counts[s] == 0 {
                self.occupied[page / 64] &= !(1 << (page % 64));
            }
        }
    }

    /// Adds a column known to cancel everything below the current floor.
    fn add(&mut self, column: &[u64]) {
        for &c in column {
            if c >= self.floor {
                self.toggle(c);
            }
        }
    }

    /// Smallest entry of the column; raises the floor to it.
    fn pivot(&mut self) -> Option<u64> {
        let start_page = (self.floor >> PAGE_SHIFT) as usize;
        let mut w = start_page / 64;
        let mut mask = !0u64 << (start_page % 64);
        while w < self.occupied.len() {
            let bits = self.occupied[w] & mask;
            if bits != 0 {
                let page = w * 64 + bits.trailing_zeros() as usize;
                let words = &self.pages[self.table[page] as usize];
                let (i, b) = words.iter().enumerate().find(|(_, &b)| b != 0).expect("occupied page");
                let code = ((page as u64) << PAGE_SHIFT) | ((i as u64) << 6) | b.trailing_zeros() as u64;
                self.floor = code;
                return Some(code);
            }
            w += 1;
            mask = !0;
        }
        None
    }
}

/// Entries occurring an odd number of times, ascending.
fn reduce_mod2(v: &mut [u32]) -> Vec<u32> {
    v.sort_unstable();
    let mut out = Vec::new();
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            out.push(v[i]);
        }
        i = j;
    }
    out
}

#[derive(Clone, Copy)]
enum Owner {
    /// Reduced column is the plain coboundary of this edge.
    Apparent(u32),
    /// Index into the stored edge combinations.
    Reduced(usize),
}

/// Barcodes in dimensions 0 and 1 up to `t_max` (default: the largest distance).
///
/// Dimension-1 classes still alive at `t_max` are not reported, nor are pairs
/// of zero persistence.
pub fn persistence(dm: &DistanceMatrix, t_max: Option<f64>) -> Result<Barcode> {
    let n = dm.n();
    if let Some(t) = t_max {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("t_max must be non-negative, got {t}")));
        }
    }
    if n == 0 {
        return Ok(Barcode::empty(Scale::Diameter));
    }
    let requested = t_max.unwrap_or_else(|| dm.max_entry());
    let threshold = requested.min(dm.enclosing_radius());
    let cx = Complex::new(dm, threshold);

    let mut uf = UnionFind::new(n);
    let mut in_tree = vec![false; cx.edges.len()];
    let mut dim0 = Vec::with_capacity(n);
    for (e, &(i, j)) in cx.edges.iter().enumerate() {
        if uf.union(i as usize, j as usize) {
            in_tree[e] = true;
            dim0.push(Bar::new(0.0, cx.length(e as u32)));
        }
    }
    let components = n - dim0.len();
    dim0.extend(std::iter::repeat_n(Bar::new(0.0, f64::INFINITY), components));
    let mut dim1 = Vec::new();

    let mut pivots: FxHashMap<u64, Owner> = FxHashMap::default();
    // edge combinations whose coboundaries are the stored reduced columns
    let mut combos: Vec<Vec<u32>> = Vec::new();
    let mut work = WorkingColumn::new(cx.edges.len() as u64 * n as u64);
    let mut combo = Vec::new();
    let mut col = Vec::new();
    for e in (0..cx.edges.len() as u32).rev() {
        if in_tree[e as usize] {
            continue;
        }
        if let Some(t) = cx.apparent_cofacet(e) {
            if let std::collections::hash_map::Entry::Vacant(slot) = pivots.entry(t) {
                slot.insert(Owner::Apparent(e));
                continue;
            }
        }
        work.clear();
        combo.clear();
        combo.push(e);
        cx.coboundary(e, &mut col);
        work.add(&col);
        let pivot = loop {
            let Some(p) = work.pivot() else {
                break None;
            };
            match pivots.get(&p) {
                None => break Some(p),
                Some(&Owner::Apparent(f)) => {
                    cx.coboundary(f, &mut col);
                    work.add(&col);
                    combo.push(f);
                }
                Some(&Owner::Reduced(r)) => {
                    for &f in &combos[r] {
                        cx.coboundary(f, &mut col);
                        work.add(&col);
                    }
                    combo.extend_from_slice(&combos[r]);
                }
            }
        };
        let Some(p) = pivot else {
            // essential at this threshold
            continue;
        };
        let birth = cx.length(e);
        let death = cx.length(cx.code_edge(p));
        if death > birth {
            dim1.push(Bar::new(birth, death));
        }
        combos.push(reduce_mod2(&mut combo));
        pivots.insert(p, Owner::Reduced(combos.len() - 1));
    }
    dim1.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(a.death.total_cmp(&b.death)));
    Ok(Barcode {
        dim0,
        dim1,
        scale: Scale::Diameter,
    })
}

/// Betti curve of one dimension of a barcode.
pub fn betti_curve(b: &Barcode, dim: usize) -> BettiCurve {
    BettiCurve::from_bars(b.bars(dim), b.scale)
}
