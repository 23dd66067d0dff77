//! Connected components of the ball union and the finite-window crossing
//! events built on them.

use crate::error::{Error, Result};
use crate::geometry::{body_gap, dist, Ball, Body, GridIndex};
use crate::sampler::BallSample;

/// Sphere-touch tolerance. Terminal spheres are deterministic, so exact
/// tangency can be built on purpose; ball-ball tangency never connects.
pub const TOUCH_TOL: f64 = 1e-12;

/// Labels are canonical: the label of a component is its smallest ball index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    labels: Vec<usize>,
    components: Vec<Vec<usize>>,
    slot: Vec<usize>,
}

impl ComponentLabeling {
    pub fn label(&self, ball: usize) -> usize {
        self.labels[ball]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn count(&self) -> usize {
        self.components.len()
    }

    /// Ball lists, ordered by label; each list is sorted.
    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    /// Position of the ball's component in [`components`](Self::components).
    pub fn component_of(&self, ball: usize) -> usize {
        self.slot[ball]
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// The smaller root wins, so roots end up being the minimal index.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Components of the strict-overlap graph `|c1 - c2| < r1 + r2`.
pub fn connected_components(balls: &[Ball]) -> ComponentLabeling {
    let n = balls.len();
    let mut dsu = DisjointSet::new(n);
    if n > 0 {
        let index = GridIndex::build(balls, None);
        for (i, b) in balls.iter().enumerate() {
            for j in index.query_near(&b.center, b.radius) {
                if j > i && b.overlaps(&balls[j]) {
                    dsu.union(i, j);
                }
            }
        }
    }
    let labels: Vec<usize> = (0..n).map(|i| dsu.find(i)).collect();
    let mut slot = vec![usize::MAX; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let root = labels[i];
        if slot[root] == usize::MAX {
            slot[root] = components.len();
            components.push(Vec::new());
        }
        let s = slot[root];
        slot[i] = s;
        components[s].push(i);
    }
    ComponentLabeling {
        labels,
        components,
        slot,
    }
}

fn touches_sphere(ball: &Ball, center: &[f64], radius: f64) -> bool {
    let g = body_gap(
        Body::Solid {
            center: &ball.center,
            radius: ball.radius,
        },
        Body::Shell { center, radius },
    );
    g <= TOUCH_TOL
}

/// Whether some component of `balls` touches both spheres.
fn joins_spheres(balls: &[Ball], center: &[f64], inner: f64, outer: f64) -> bool {
    let labeling = connected_components(balls);
    let mut hit_inner = vec![false; labeling.count()];
    let mut hit_outer = vec![false; labeling.count()];
    for (i, b) in balls.iter().enumerate() {
        let c = labeling.component_of(i);
        hit_inner[c] |= touches_sphere(b, center, inner);
        hit_outer[c] |= touches_sphere(b, center, outer);
        if hit_inner[c] && hit_outer[c] {
            return true;
        }
    }
    false
}

/// `S(r) <-> S(2r)` using the balls that touch `B(0, search_multiplier * r)`.
///
/// The result never exceeds the infinite-volume event and is nondecreasing in
/// `search_multiplier`.
pub fn crossing_event(sample: &BallSample, r: f64, search_multiplier: f64) -> Result<bool> {
    if !(r > 0.0) {
        return Err(Error::param("r", format!("must be positive, got {r}")));
    }
    if !(search_multiplier >= 2.0) {
        return Err(Error::param(
            "multiplier",
            format!("must be at least 2, got {search_multiplier}"),
        ));
    }
    let reach = search_multiplier * r;
    sample.require_complete(reach)?;
    let o = sample.center();
    let balls: Vec<Ball> = sample
        .balls
        .iter()
        .filter(|b| dist(&b.center, o) <= reach + b.radius)
        .cloned()
        .collect();
    Ok(joins_spheres(&balls, o, r, 2.0 * r))
}

/// `G(0, alpha)`: `S(alpha)` and `S(8 alpha)` are joined inside the union of
/// the balls centered in `B(0, 10 alpha)`.
pub fn pi_event(sample: &BallSample, alpha: f64) -> Result<bool> {
    if !(alpha > 0.0) {
        return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
    }
    sample.require_complete(10.0 * alpha)?;
    let o = sample.center();
    let balls: Vec<Ball> = sample
        .balls
        .iter()
        .filter(|b| dist(&b.center, o) < 10.0 * alpha)
        .cloned()
        .collect();
    Ok(joins_spheres(&balls, o, alpha, 8.0 * alpha))
}

/// `H(alpha)`: a ball centered outside `B(0, 10 alpha)` reaches into `B(0, 9 alpha)`.
pub fn h_event(sample: &BallSample, alpha: f64) -> Result<bool> {
    if !(alpha > 0.0) {
        return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
    }
    sample.require_complete(9.0 * alpha)?;
    let o = sample.center();
    Ok(sample.balls.iter().any(|b| {
        let c = dist(&b.center, o);
        c >= 10.0 * alpha && c - b.radius < 9.0 * alpha
    }))
}
