//! Greedy paths: the best ratio of collected radius to path length over
//! origin-anchored paths through weighted points.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::dist;
use crate::radius_laws::RadiusLaw;

/// Largest point count accepted by [`greedy_sup_exact`].
pub const EXACT_LIMIT: usize = 10;

const DINKELBACH_TOL: f64 = 1e-9;
const DINKELBACH_MAX_ITER: usize = 200;

/// Points with radii, anchored at the origin. Index 0 is the origin itself;
/// points are indexed `1..=len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPointSet {
    dim: usize,
    origin_radius: f64,
    points: Vec<(Vec<f64>, f64)>,
}

impl WeightedPointSet {
    pub fn new(dim: usize, origin_radius: f64, points: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if !(origin_radius >= 0.0) {
            return Err(Error::param("origin_radius", "must be nonnegative"));
        }
        let origin = vec![0.0; dim];
        for (i, (p, r)) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
            }
            if !(*r >= 0.0 && r.is_finite()) {
                return Err(Error::param("radius", format!("point {} has radius {r}", i + 1)));
            }
            if *p == origin || points[..i].iter().any(|(q, _)| q == p) {
                return Err(Error::param("points", format!("point {} is repeated", i + 1)));
            }
        }
        Ok(Self { dim, origin_radius, points })
    }

    /// Centers and radii of a ball configuration.
    pub fn from_balls(dim: usize, balls: &[crate::geometry::Ball]) -> Result<Self> {
        Self::new(dim, 0.0, balls.iter().map(|b| (b.center.clone(), b.radius)).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn origin_radius(&self) -> f64 {
        self.origin_radius
    }

    fn position(&self, i: usize) -> Vec<f64> {
        if i == 0 {
            vec![0.0; self.dim]
        } else {
            self.points[i - 1].0.clone()
        }
    }

    fn radius(&self, i: usize) -> f64 {
        if i == 0 {
            self.origin_radius
        } else {
            self.points[i - 1].1
        }
    }

    fn distances(&self) -> Vec<Vec<f64>> {
        let pos: Vec<Vec<f64>> = (0..=self.len()).map(|i| self.position(i)).collect();
        pos.iter().map(|a| pos.iter().map(|b| dist(a, b)).collect()).collect()
    }

    /// Best ratio over single-point paths `0 -> x`.
    pub fn best_single(&self) -> f64 {
        self.points
            .iter()
            .map(|(p, r)| r / p.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// `r(path) / l(path)` for an index path starting at the origin. The
/// origin's own radius is not collected.
pub fn path_ratio(set: &WeightedPointSet, path: &[usize]) -> Result<f64> {
    if path.first() != Some(&0) {
        return Err(Error::InvalidPath("path must start at the origin (index 0)".into()));
    }
    if path.len() < 2 {
        return Err(Error::InvalidPath("path must visit at least one point".into()));
    }
    let mut seen = vec![false; set.len() + 1];
    for &i in path {
        if i > set.len() {
            return Err(Error::InvalidPath(format!("index {i} out of range")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidPath(format!("index {i} repeated")));
        }
    }
    let collected: f64 = path[1..].iter().map(|&i| set.radius(i)).sum();
    let length: f64 = path
        .windows(2)
        .map(|w| dist(&set.position(w[0]), &set.position(w[1])))
        .sum();
    Ok(collected / length)
}

/// Exhaustive supremum over all ordered sequences of distinct points.
///
/// The empty configuration has no admissible path; its value is 0.
pub fn greedy_sup_exact(set: &WeightedPointSet, max_points: usize) -> Result<f64> {
    let limit = max_points.min(EXACT_LIMIT);
    if set.len() > limit {
        return Err(Error::TooManyPoints { found: set.len(), max: limit });
    }
    let dist = set.distances();
    let radii: Vec<f64> = (0..=set.len()).map(|i| set.radius(i)).collect();
    let mut best = 0.0;
    let mut stack = vec![0usize];
    extend_exact(&dist, &radii, &mut stack, 1u32, 0.0, 0.0, &mut best);
    Ok(best)
}

fn extend_exact(
    dist: &[Vec<f64>],
    radii: &[f64],
    path: &mut Vec<usize>,
    used: u32,
    collected: f64,
    length: f64,
    best: &mut f64,
) {
    let last = *path.last().expect("path holds the origin");
    for next in 1..radii.len() {
        if used & (1 << next) != 0 {
            continue;
        }
        let c = collected + radii[next];
        let l = length + dist[last][next];
        if c / l > *best {
            *best = c / l;
        }
        path.push(next);
        extend_exact(dist, radii, path, used | (1 << next), c, l, best);
        path.pop();
    }
}

#[derive(Debug, Clone)]
struct BeamState {
    path: Vec<usize>,
    used: Vec<bool>,
    collected: f64,
    length: f64,
}

impl BeamState {
    fn score(&self, t: f64) -> f64 {
        self.collected - t * self.length
    }
}

/// Best `r(path) - t * l(path)` found by beam search, with its path.
fn beam_max(set: &WeightedPointSet, dist: &[Vec<f64>], t: f64, beam: usize) -> (f64, Vec<usize>) {
    let n = set.len();
    let mut frontier = vec![BeamState {
        path: vec![0],
        used: vec![false; n + 1],
        collected: 0.0,
        length: 0.0,
    }];
    let mut best: Option<BeamState> = None;
    for _ in 0..n {
        let mut next = Vec::new();
        for s in &frontier {
            let last = *s.path.last().expect("nonempty path");
            for j in 1..=n {
                if s.used[j] {
                    continue;
                }
                let mut child = s.clone();
                child.path.push(j);
                child.used[j] = true;
                child.collected += set.radius(j);
                child.length += dist[last][j];
                next.push(child);
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_by(|a, b| {
            b.score(t)
                .total_cmp(&a.score(t))
                .then_with(|| a.path.cmp(&b.path))
        });
        next.truncate(beam);
        if best.as_ref().is_none_or(|b| next[0].score(t) > b.score(t)) {
            best = Some(next[0].clone());
        }
        frontier = next;
    }
    match best {
        Some(b) => (b.score(t), b.path),
        None => (f64::NEG_INFINITY, vec![0]),
    }
}

/// Lower bound on the greedy supremum by Dinkelbach iteration over a beam
/// search. Never below the best single-point ratio, never above the exact
/// value; exact once `beam` covers every partial path.
pub fn greedy_sup_heuristic(set: &WeightedPointSet, beam: usize) -> Result<f64> {
    if beam == 0 {
        return Err(Error::param("beam", "must be at least 1"));
    }
    if set.is_empty() {
        return Ok(0.0);
    }
    let dist = set.distances();
    let mut t = set.best_single();
    for _ in 0..DINKELBACH_MAX_ITER {
        let (value, path) = beam_max(set, &dist, t, beam);
        if value <= DINKELBACH_TOL || path.len() < 2 {
            break;
        }
        let ratio = path_ratio(set, &path)?;
        if ratio.partial_cmp(&t) != Some(Ordering::Greater) {
            break;
        }
        t = ratio;
    }
    Ok(t)
}

/// `int_0^inf (lambda * nu^rho((r, inf)))^(1/d) dr` by double-exponential
/// quadrature on the pieces between breakpoints of the truncated law, with
/// the unbounded tail mapped onto `(0, 1]` by `r = M / u`.
pub fn greedy_tail_integral(law: &RadiusLaw, lambda: f64, rho: f64, d: usize) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
    }
    if d < 2 {
        return Err(Error::param("dim", format!("must be at least 2, got {d}")));
    }
    if !law.check_greedy_condition(d) {
        return Err(Error::GreedyCondition { d });
    }
    let truncated = law.truncate_above(rho)?;
    if truncated.total_mass() == 0.0 {
        return Ok(0.0);
    }
    let inv_d = 1.0 / d as f64;
    let f = |r: f64| (lambda * truncated.survival_open(r)).powf(inv_d);
    let mut cuts = vec![0.0];
    cuts.extend(truncated.breakpoints().into_iter().filter(|b| *b > 0.0));
    let last = *cuts.last().expect("at least the origin");
    let scale = f(0.0) * last.max(1.0);
    let tol = 1e-13 * scale;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += quadrature::integrate(f, w[0], w[1], tol).integral;
    }
    if truncated.survival_open(last) > 0.0 {
        total += quadrature::integrate(|u: f64| f(last / u) * last / (u * u), 0.0, 1.0, tol).integral;
    }
    Ok(total)
}
