//! Points, balls, terminal sets, set gaps, polygonal paths and the
//! uniform grid used to find overlapping balls.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameter intervals shorter than this are dropped, and endpoints this close
/// to 0 or 1 are snapped.
pub const SNAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param("radius", format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Open-ball overlap: `|c1 - c2| < r1 + r2`. Tangent balls do not overlap.
    pub fn overlaps(&self, other: &Ball) -> bool {
        let s = self.radius + other.radius;
        dist2(&self.center, &other.center) < s * s
    }
}

/// End sets of a travel-time query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Terminal {
    PointAt(Vec<f64>),
    SphereAround { center: Vec<f64>, radius: f64 },
}

impl Terminal {
    pub fn point(x: Vec<f64>) -> Self {
        Terminal::PointAt(x)
    }

    pub fn sphere(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param("radius", format!("sphere radius must be positive, got {radius}")));
        }
        Ok(Terminal::SphereAround { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            Terminal::PointAt(x) => x.len(),
            Terminal::SphereAround { center, .. } => center.len(),
        }
    }

    pub(crate) fn as_body(&self) -> Body<'_> {
        match self {
            Terminal::PointAt(x) => Body::Solid { center: x, radius: 0.0 },
            Terminal::SphereAround { center, radius } => Body::Shell { center, radius: *radius },
        }
    }

    /// Largest distance from `origin` to a point of the terminal.
    pub fn reach_from(&self, origin: &[f64]) -> f64 {
        match self {
            Terminal::PointAt(x) => dist(x, origin),
            Terminal::SphereAround { center, radius } => dist(center, origin) + radius,
        }
    }
}

/// Either a ball or a terminal, as accepted by [`gap`].
#[derive(Debug, Clone, Copy)]
pub enum Shape<'a> {
    Ball(&'a Ball),
    Terminal(&'a Terminal),
}

impl<'a> Shape<'a> {
    fn body(self) -> Body<'a> {
        match self {
            Shape::Ball(b) => Body::Solid { center: &b.center, radius: b.radius },
            Shape::Terminal(t) => t.as_body(),
        }
    }
}

/// Internal normal form: a closed solid ball (points have radius 0) or a sphere.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Body<'a> {
    Solid { center: &'a [f64], radius: f64 },
    Shell { center: &'a [f64], radius: f64 },
}

impl<'a> Body<'a> {
    fn center(&self) -> &'a [f64] {
        match self {
            Body::Solid { center, .. } | Body::Shell { center, .. } => center,
        }
    }
}

/// Euclidean distance between two sets (closures), clamped at 0.
pub fn gap(a: Shape<'_>, b: Shape<'_>) -> Result<f64> {
    let (a, b) = (a.body(), b.body());
    let (da, db) = (a.center().len(), b.center().len());
    if da != db {
        return Err(Error::DimensionMismatch { expected: da, found: db });
    }
    Ok(body_gap(a, b))
}

pub(crate) fn body_gap(a: Body<'_>, b: Body<'_>) -> f64 {
    let d = dist(a.center(), b.center());
    match (a, b) {
        (Body::Solid { radius: r1, .. }, Body::Solid { radius: r2, .. }) => (d - r1 - r2).max(0.0),
        (Body::Solid { radius: rho, .. }, Body::Shell { radius: big, .. })
        | (Body::Shell { radius: big, .. }, Body::Solid { radius: rho, .. }) => {
            ((d - big).abs() - rho).max(0.0)
        }
        (Body::Shell { radius: r1, .. }, Body::Shell { radius: r2, .. }) => {
            if d >= r1 + r2 {
                d - r1 - r2
            } else if d <= (r1 - r2).abs() {
                (r1 - r2).abs() - d
            } else {
                0.0
            }
        }
    }
}

/// A pair of points `(p, q)` with `p` in `a`, `q` in `b` and `|p - q|` equal
/// to the gap. When the gap is zero, `p == q` is a common point.
pub(crate) fn closest_points(a: Body<'_>, b: Body<'_>) -> (Vec<f64>, Vec<f64>) {
    match (a, b) {
        (Body::Shell { .. }, Body::Solid { .. }) => {
            let (q, p) = closest_points(b, a);
            (p, q)
        }
        (Body::Solid { center: c1, radius: r1 }, Body::Solid { center: c2, radius: r2 }) => {
            let (u, d) = unit_from(c1, c2);
            if d - r1 - r2 > 0.0 {
                (along(c1, &u, r1), along(c2, &u, -r2))
            } else {
                let p = along(c1, &u, r1.min(d));
                (p.clone(), p)
            }
        }
        (Body::Solid { center: c, radius: rho }, Body::Shell { center: s, radius: big }) => {
            let (e, d) = unit_from(s, c);
            let q = along(s, &e, big);
            let g = (d - big).abs() - rho;
            if g > 0.0 {
                let p = if d >= big { along(c, &e, -rho) } else { along(c, &e, rho) };
                (p, q)
            } else {
                (q.clone(), q)
            }
        }
        (Body::Shell { center: s1, radius: r1 }, Body::Shell { center: s2, radius: r2 }) => {
            let (e, d) = unit_from(s1, s2);
            if d >= r1 + r2 {
                (along(s1, &e, r1), along(s2, &e, -r2))
            } else if d <= (r1 - r2).abs() {
                if r1 >= r2 {
                    (along(s1, &e, r1), along(s2, &e, r2))
                } else {
                    (along(s1, &e, -r1), along(s2, &e, -r2))
                }
            } else {
                // Point on the intersection of the two spheres.
                let x = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
                let h = (r1 * r1 - x * x).max(0.0).sqrt();
                let n = perpendicular(&e);
                let p: Vec<f64> = (0..s1.len()).map(|i| s1[i] + x * e[i] + h * n[i]).collect();
                (p.clone(), p)
            }
        }
    }
}

fn unit_from(from: &[f64], to: &[f64]) -> (Vec<f64>, f64) {
    let d = dist(from, to);
    let mut u = vec![0.0; from.len()];
    if d > 0.0 {
        for i in 0..u.len() {
            u[i] = (to[i] - from[i]) / d;
        }
    } else {
        u[0] = 1.0;
    }
    (u, d)
}

fn along(x: &[f64], u: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(u).map(|(a, b)| a + t * b).collect()
}

fn perpendicular(e: &[f64]) -> Vec<f64> {
    // Gram-Schmidt on the coordinate axis least aligned with e.
    let axis = (0..e.len())
        .min_by(|&i, &j| e[i].abs().total_cmp(&e[j].abs()))
        .unwrap_or(0);
    let mut n: Vec<f64> = e.iter().map(|x| -e[axis] * x).collect();
    n[axis] += 1.0;
    let norm = norm(&n);
    n.iter_mut().for_each(|x| *x /= norm);
    n
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Polygonal path with at least two vertices and distinct consecutive vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    vertices: Vec<Vec<f64>>,
}

impl Polyline {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidPath("a path needs at least two vertices".into()));
        }
        let d = vertices[0].len();
        for w in vertices.windows(2) {
            if w[1].len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: w[1].len() });
            }
            if w[0] == w[1] {
                return Err(Error::InvalidPath("consecutive vertices coincide".into()));
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn length(&self) -> f64 {
        path_length(&self.vertices)
    }
}

pub(crate) fn path_length(vertices: &[Vec<f64>]) -> f64 {
    vertices.windows(2).map(|w| dist(&w[0], &w[1])).sum()
}

/// Open parameter interval `(t0, t1) ⊂ [0, 1]` where segment `p -> q` lies
/// inside the open ball.
pub(crate) fn segment_ball_interval(p: &[f64], q: &[f64], center: &[f64], radius: f64) -> Option<(f64, f64)> {
    let mut a = 0.0;
    let mut b = 0.0;
    let mut c = -radius * radius;
    for i in 0..p.len() {
        let v = q[i] - p[i];
        let w = p[i] - center[i];
        a += v * v;
        b += 2.0 * v * w;
        c += w * w;
    }
    if a == 0.0 {
        return None;
    }
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Numerically stable roots.
    let qv = -0.5 * (b + b.signum() * sq);
    let (mut t0, mut t1) = if qv == 0.0 {
        let t = sq / (2.0 * a);
        (-t, t)
    } else {
        let r1 = qv / a;
        let r2 = c / qv;
        (r1.min(r2), r1.max(r2))
    };
    if t0 < SNAP {
        t0 = t0.max(0.0);
    }
    if t1 > 1.0 - SNAP {
        t1 = t1.min(1.0);
    }
    if t0.abs() < SNAP {
        t0 = 0.0;
    }
    if (1.0 - t1).abs() < SNAP {
        t1 = 1.0;
    }
    if t1 - t0 <= SNAP {
        return None;
    }
    Some((t0, t1))
}

/// Total length of the union of intervals, after sorting and merging.
pub(crate) fn merged_length(intervals: &mut [(f64, f64)]) -> f64 {
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for &(s, e) in intervals.iter() {
        match cur {
            Some((cs, ce)) if s <= ce + SNAP => cur = Some((cs, ce.max(e))),
            Some((cs, ce)) => {
                total += ce - cs;
                cur = Some((s, e));
            }
            None => cur = Some((s, e)),
        }
    }
    if let Some((cs, ce)) = cur {
        total += ce - cs;
    }
    total
}

/// Length of the segment `p -> q` covered by the union of `balls`.
pub(crate) fn covered_on_segment<'a>(p: &[f64], q: &[f64], balls: impl Iterator<Item = &'a Ball>) -> f64 {
    let len = dist(p, q);
    if len == 0.0 {
        return 0.0;
    }
    let mut intervals: Vec<(f64, f64)> = balls
        .filter_map(|b| segment_ball_interval(p, q, &b.center, b.radius))
        .collect();
    (merged_length(&mut intervals) * len).min(len)
}

/// Length of the path covered by the union of the balls.
pub fn covered_length(balls: &[Ball], path: &Polyline) -> f64 {
    let index = GridIndex::build(balls, None);
    path.vertices
        .windows(2)
        .map(|w| {
            let cand = index.query_segment(&w[0], &w[1]);
            covered_on_segment(&w[0], &w[1], cand.iter().map(|&i| &balls[i]))
        })
        .sum()
}

/// `tau(path)`: length of the path lying outside the union of the open balls.
pub fn tau_of_path(balls: &[Ball], path: &Polyline) -> f64 {
    tau_of_vertices(balls, &path.vertices)
}

/// Same as [`tau_of_path`] without the distinct-vertex requirement;
/// zero-length segments contribute nothing.
pub(crate) fn tau_of_vertices(balls: &[Ball], vertices: &[Vec<f64>]) -> f64 {
    if vertices.len() < 2 {
        return 0.0;
    }
    let index = GridIndex::build(balls, None);
    vertices
        .windows(2)
        .map(|w| {
            let len = dist(&w[0], &w[1]);
            let cand = index.query_segment(&w[0], &w[1]);
            (len - covered_on_segment(&w[0], &w[1], cand.iter().map(|&i| &balls[i]))).max(0.0)
        })
        .sum()
}

/// Uniform grid over ball bounding boxes.
///
/// Cells are keyed by a hash of their integer coordinates; a hash collision
/// merges two cells, which can only add candidates.
#[derive(Debug, Clone)]
pub struct GridIndex {
    cell_size: f64,
    dim: usize,
    cells: HashMap<u64, Vec<usize>>,
    len: usize,
}

impl GridIndex {
    /// `cell_size` defaults to the median ball diameter.
    pub fn build(balls: &[Ball], cell_size: Option<f64>) -> Self {
        let dim = balls.first().map_or(0, Ball::dim);
        let cell_size = cell_size.filter(|c| *c > 0.0).unwrap_or_else(|| median_diameter(balls));
        let mut index = Self {
            cell_size,
            dim,
            cells: HashMap::new(),
            len: balls.len(),
        };
        let mut key_buf = Vec::new();
        for (i, b) in balls.iter().enumerate() {
            let lo: Vec<i64> = b.center.iter().map(|c| index.coord(c - b.radius)).collect();
            let hi: Vec<i64> = b.center.iter().map(|c| index.coord(c + b.radius)).collect();
            for_each_cell(&lo, &hi, &mut key_buf, |key| {
                index.cells.entry(cell_hash(key)).or_default().push(i);
            });
        }
        index
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn coord(&self, x: f64) -> i64 {
        (x / self.cell_size).floor() as i64
    }

    /// Candidate balls meeting the axis-aligned box `[lo, hi]`, sorted and
    /// deduplicated. Never misses a ball whose bounding box meets the box.
    pub fn query_box(&self, lo: &[f64], hi: &[f64]) -> Vec<usize> {
        if self.len == 0 {
            return Vec::new();
        }
        let lo: Vec<i64> = lo.iter().map(|x| self.coord(*x)).collect();
        let hi: Vec<i64> = hi.iter().map(|x| self.coord(*x)).collect();
        let ncells: f64 = lo.iter().zip(&hi).map(|(a, b)| (b - a + 1) as f64).product();
        let mut out = Vec::new();
        if ncells > (4 * self.cells.len()).max(16) as f64 {
            // Query box covers more cells than are occupied: scan instead.
            for v in self.cells.values() {
                out.extend_from_slice(v);
            }
        } else {
            let mut key_buf = Vec::new();
            for_each_cell(&lo, &hi, &mut key_buf, |key| {
                if let Some(v) = self.cells.get(&cell_hash(key)) {
                    out.extend_from_slice(v);
                }
            });
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Candidate balls meeting the ball `B(center, radius)`.
    pub fn query_near(&self, center: &[f64], radius: f64) -> Vec<usize> {
        if self.len == 0 {
            return Vec::new();
        }
        debug_assert_eq!(center.len(), self.dim);
        let lo: Vec<f64> = center.iter().map(|c| c - radius).collect();
        let hi: Vec<f64> = center.iter().map(|c| c + radius).collect();
        self.query_box(&lo, &hi)
    }

    /// Candidate balls meeting the segment `p -> q` (via its bounding box).
    pub fn query_segment(&self, p: &[f64], q: &[f64]) -> Vec<usize> {
        let lo: Vec<f64> = p.iter().zip(q).map(|(a, b)| a.min(*b)).collect();
        let hi: Vec<f64> = p.iter().zip(q).map(|(a, b)| a.max(*b)).collect();
        self.query_box(&lo, &hi)
    }
}

fn median_diameter(balls: &[Ball]) -> f64 {
    if balls.is_empty() {
        return 1.0;
    }
    let mut r: Vec<f64> = balls.iter().map(|b| b.radius).collect();
    r.sort_by(f64::total_cmp);
    2.0 * r[r.len() / 2]
}

fn cell_hash(key: &[i64]) -> u64 {
    // FNV-1a over the coordinates.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for k in key {
        for b in k.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

fn for_each_cell(lo: &[i64], hi: &[i64], buf: &mut Vec<i64>, mut f: impl FnMut(&[i64])) {
    buf.clear();
    buf.extend_from_slice(lo);
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return;
    }
    loop {
        f(buf);
        let mut axis = 0;
        loop {
            if axis == lo.len() {
                return;
            }
            if buf[axis] < hi[axis] {
                buf[axis] += 1;
                break;
            }
            buf[axis] = lo[axis];
            axis += 1;
        }
    }
}
