//! Exact travel times between terminals.
//!
//! For a finite ball configuration, the travel time between two terminal sets
//! equals the shortest-path distance in the complete graph whose vertices are
//! the connected components of the ball union plus the two terminals, with
//! edges weighted by Euclidean set gaps. A path only pays for its length
//! outside the balls, and inside a component it can move for free.
//!
//! The search below is label-setting over components. Edge weights are
//! evaluated lazily as minima over ball pairs when a component is settled,
//! and ball pairs that cannot beat the current target distance are skipped
//! with a squared-distance test.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    body_gap, closest_points, dist, segment_ball_interval, tau_of_vertices, Ball, Body, GridIndex,
    Polyline, Terminal,
};
use crate::percolation::{connected_components, ComponentLabeling};
use crate::sampler::BallSample;

/// Relative tolerance between a travel time and the tau of its witness.
pub const WITNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum VertexRole {
    Start,
    /// First point of a component reached by a gap segment.
    Entry { component: usize, ball: usize },
    /// Ball center on the connector through a component.
    Center { component: usize, ball: usize },
    /// Point where the path leaves a component by a gap segment.
    Exit { component: usize, ball: usize },
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessVertex {
    pub point: Vec<f64>,
    #[serde(flatten)]
    pub role: VertexRole,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TravelTimeResult {
    pub value: f64,
    /// Canonical labels of the components visited, in order.
    pub components: Vec<usize>,
    /// Number of components of the configuration.
    pub component_count: usize,
    pub witness: Vec<WitnessVertex>,
    /// tau of the witness, computed independently of `value`.
    pub tau_check: f64,
}

impl TravelTimeResult {
    /// The witness as a polyline; `None` when it collapses to a single point.
    pub fn witness_polyline(&self) -> Option<Polyline> {
        Polyline::new(self.witness.iter().map(|v| v.point.clone()).collect()).ok()
    }

    /// For each ball met by the witness, the arc-length spread of the witness
    /// inside the ball divided by the ball radius.
    pub fn ball_spread(&self, balls: &[Ball]) -> Vec<(usize, f64)> {
        let pts: Vec<&[f64]> = self.witness.iter().map(|v| v.point.as_slice()).collect();
        let mut spans: Vec<Option<(f64, f64)>> = vec![None; balls.len()];
        let index = GridIndex::build(balls, None);
        let mut offset = 0.0;
        for w in pts.windows(2) {
            let len = dist(w[0], w[1]);
            for i in index.query_segment(w[0], w[1]) {
                if let Some((t0, t1)) = segment_ball_interval(w[0], w[1], &balls[i].center, balls[i].radius) {
                    let (s, e) = (offset + t0 * len, offset + t1 * len);
                    spans[i] = Some(match spans[i] {
                        Some((a, b)) => (a.min(s), b.max(e)),
                        None => (s, e),
                    });
                }
            }
            offset += len;
        }
        spans
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|(a, b)| (i, (b - a) / balls[i].radius)))
            .collect()
    }
}

/// Travel time between two terminals, using every ball of the sample.
///
/// Both terminals must lie in the sample's completeness ball.
pub fn travel_time(sample: &BallSample, a: &Terminal, b: &Terminal) -> Result<TravelTimeResult> {
    let d = sample.params.dim();
    for t in [a, b] {
        if t.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: t.dim() });
        }
        sample.require_complete(t.reach_from(sample.center()))?;
    }
    Ok(travel_time_in(&sample.balls, a, b))
}

/// `T(0, S(r))` around the sample center.
pub fn travel_time_radial(sample: &BallSample, r: f64) -> Result<TravelTimeResult> {
    let o = sample.center().to_vec();
    travel_time(sample, &Terminal::point(o.clone()), &Terminal::sphere(o, r)?)
}

/// `T(S(r), S(2r))` around the sample center.
pub fn annulus_time(sample: &BallSample, r: f64) -> Result<TravelTimeResult> {
    let o = sample.center().to_vec();
    travel_time(sample, &Terminal::sphere(o.clone(), r)?, &Terminal::sphere(o, 2.0 * r)?)
}

/// Flat copy of the ball coordinates for the inner loops.
struct Packed {
    dim: usize,
    centers: Vec<f64>,
    radii: Vec<f64>,
}

impl Packed {
    fn new(balls: &[Ball]) -> Self {
        let dim = balls.first().map_or(0, Ball::dim);
        let mut centers = Vec::with_capacity(balls.len() * dim);
        for b in balls {
            centers.extend_from_slice(&b.center);
        }
        Self {
            dim,
            centers,
            radii: balls.iter().map(|b| b.radius).collect(),
        }
    }

    fn center(&self, i: usize) -> &[f64] {
        &self.centers[i * self.dim..(i + 1) * self.dim]
    }

    fn body(&self, i: usize) -> Body<'_> {
        Body::Solid {
            center: self.center(i),
            radius: self.radii[i],
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pred {
    /// Settled vertex the edge comes from; `None` for the source terminal.
    from: Option<usize>,
    from_ball: Option<usize>,
    to_ball: Option<usize>,
}

const NO_PRED: Pred = Pred {
    from: None,
    from_ball: None,
    to_ball: None,
};

#[derive(Debug, PartialEq)]
struct Queued {
    dist: f64,
    tie: usize,
    vertex: usize,
}

impl Eq for Queued {}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on (dist, tie).
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.tie.cmp(&self.tie))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Travel time for a finite ball configuration.
pub fn travel_time_in(balls: &[Ball], a: &Terminal, b: &Terminal) -> TravelTimeResult {
    let labeling = connected_components(balls);
    let packed = Packed::new(balls);
    let k = labeling.count();
    let target = k;
    let (src, dst) = (a.as_body(), b.as_body());

    let mut dist_to = vec![f64::INFINITY; k + 1];
    let mut pred = vec![NO_PRED; k + 1];
    for i in 0..balls.len() {
        let c = labeling.component_of(i);
        let g = body_gap(src, packed.body(i));
        if g < dist_to[c] {
            dist_to[c] = g;
            pred[c] = Pred {
                from: None,
                from_ball: None,
                to_ball: Some(i),
            };
        }
    }
    dist_to[target] = body_gap(src, dst);

    let tie = |v: usize| if v == target { usize::MAX } else { labeling.components()[v][0] };
    let mut heap: BinaryHeap<Queued> = (0..=k)
        .filter(|&v| dist_to[v].is_finite())
        .map(|v| Queued { dist: dist_to[v], tie: tie(v), vertex: v })
        .collect();
    let mut settled = vec![false; k + 1];
    let mut active: Vec<usize> = (0..balls.len()).collect();
    let dim = packed.dim;

    while let Some(Queued { dist: dv, vertex: v, .. }) = heap.pop() {
        if settled[v] || dv > dist_to[v] {
            continue;
        }
        settled[v] = true;
        if v == target {
            break;
        }
        active.retain(|&j| !settled[labeling.component_of(j)]);
        for &i in &labeling.components()[v] {
            let gb = body_gap(packed.body(i), dst);
            if dv + gb < dist_to[target] {
                dist_to[target] = dv + gb;
                pred[target] = Pred {
                    from: Some(v),
                    from_ball: Some(i),
                    to_ball: None,
                };
                heap.push(Queued { dist: dist_to[target], tie: usize::MAX, vertex: target });
            }
            let ci = packed.center(i);
            let ri = packed.radii[i];
            for &j in &active {
                let budget = dist_to[target] - dv;
                let reach = budget + ri + packed.radii[j];
                let cj = &packed.centers[j * dim..(j + 1) * dim];
                let mut d2 = 0.0;
                for t in 0..dim {
                    let x = ci[t] - cj[t];
                    d2 += x * x;
                }
                if d2 >= reach * reach {
                    continue;
                }
                let g = (d2.sqrt() - ri - packed.radii[j]).max(0.0);
                let c = labeling.component_of(j);
                if dv + g < dist_to[c] {
                    dist_to[c] = dv + g;
                    pred[c] = Pred {
                        from: Some(v),
                        from_ball: Some(i),
                        to_ball: Some(j),
                    };
                    heap.push(Queued { dist: dist_to[c], tie: tie(c), vertex: c });
                }
            }
        }
    }

    // Walk predecessors back from the target.
    let mut chain: Vec<(usize, usize, usize)> = Vec::new(); // (component, entry, exit)
    let mut exit_ball = pred[target].from_ball;
    let mut cur = pred[target].from;
    while let Some(c) = cur {
        let entry = pred[c].to_ball.expect("settled component has an entry ball");
        chain.push((c, entry, exit_ball.expect("exit ball recorded")));
        exit_ball = pred[c].from_ball;
        cur = pred[c].from;
    }
    chain.reverse();

    let witness = build_witness(balls, &packed, &labeling, src, dst, &chain);
    let points: Vec<Vec<f64>> = witness.iter().map(|v| v.point.clone()).collect();
    let tau_check = tau_of_vertices(balls, &points);
    TravelTimeResult {
        value: dist_to[target],
        components: chain.iter().map(|&(c, _, _)| labeling.components()[c][0]).collect(),
        component_count: k,
        witness,
        tau_check,
    }
}

fn build_witness(
    balls: &[Ball],
    packed: &Packed,
    labeling: &ComponentLabeling,
    src: Body<'_>,
    dst: Body<'_>,
    chain: &[(usize, usize, usize)],
) -> Vec<WitnessVertex> {
    let mut out: Vec<WitnessVertex> = Vec::new();
    let mut push = |point: Vec<f64>, role: VertexRole| {
        if out.last().is_none_or(|v| v.point != point) {
            out.push(WitnessVertex { point, role });
        }
    };
    if chain.is_empty() {
        let (p, q) = closest_points(src, dst);
        push(p, VertexRole::Start);
        push(q, VertexRole::End);
        return out;
    }
    let index = GridIndex::build(balls, None);
    let (p, _) = closest_points(src, packed.body(chain[0].1));
    push(p, VertexRole::Start);
    for (n, &(c, entry, exit)) in chain.iter().enumerate() {
        let component = labeling.components()[c][0];
        let (_, x) = if n == 0 {
            closest_points(src, packed.body(entry))
        } else {
            closest_points(packed.body(chain[n - 1].2), packed.body(entry))
        };
        push(x, VertexRole::Entry { component, ball: entry });
        for ball in overlap_route(balls, &index, labeling, entry, exit) {
            push(balls[ball].center.clone(), VertexRole::Center { component, ball });
        }
        let y = match chain.get(n + 1) {
            Some(&(_, next_entry, _)) => closest_points(packed.body(exit), packed.body(next_entry)).0,
            None => closest_points(packed.body(exit), dst).0,
        };
        push(y, VertexRole::Exit { component, ball: exit });
    }
    let (_, q) = closest_points(packed.body(chain[chain.len() - 1].2), dst);
    push(q, VertexRole::End);
    out
}

/// Fewest-hop chain of overlapping balls from `from` to `to` (inclusive).
fn overlap_route(
    balls: &[Ball],
    index: &GridIndex,
    labeling: &ComponentLabeling,
    from: usize,
    to: usize,
) -> Vec<usize> {
    if from == to {
        return vec![from];
    }
    let comp = labeling.component_of(from);
    let mut parent = std::collections::HashMap::new();
    parent.insert(from, from);
    let mut queue = VecDeque::from([from]);
    while let Some(i) = queue.pop_front() {
        if i == to {
            break;
        }
        for j in index.query_near(&balls[i].center, balls[i].radius) {
            if labeling.component_of(j) == comp && !parent.contains_key(&j) && balls[i].overlaps(&balls[j]) {
                parent.insert(j, i);
                queue.push_back(j);
            }
        }
    }
    let mut route = vec![to];
    let mut cur = to;
    while cur != from {
        cur = parent[&cur];
        route.push(cur);
    }
    route.reverse();
    route
}

/// The complete component graph with explicit weights.
///
/// Vertices `0..k` are components (in label order), `k` is the source
/// terminal and `k + 1` the target terminal.
#[derive(Debug, Clone)]
pub struct CostGraph {
    size: usize,
    weights: Vec<f64>,
    argmin: Vec<(Option<usize>, Option<usize>)>,
}

impl CostGraph {
    pub fn build(balls: &[Ball], a: &Terminal, b: &Terminal) -> Self {
        let labeling = connected_components(balls);
        let packed = Packed::new(balls);
        let k = labeling.count();
        let size = k + 2;
        let mut weights = vec![f64::INFINITY; size * size];
        let mut argmin = vec![(None, None); size * size];
        let (src, dst) = (a.as_body(), b.as_body());
        let mut relax = |u: usize, v: usize, g: f64, bu: Option<usize>, bv: Option<usize>| {
            if g < weights[u * size + v] {
                weights[u * size + v] = g;
                weights[v * size + u] = g;
                argmin[u * size + v] = (bu, bv);
                argmin[v * size + u] = (bv, bu);
            }
        };
        for i in 0..balls.len() {
            let ci = labeling.component_of(i);
            relax(k, ci, body_gap(src, packed.body(i)), None, Some(i));
            relax(ci, k + 1, body_gap(packed.body(i), dst), Some(i), None);
            for j in i + 1..balls.len() {
                let cj = labeling.component_of(j);
                if ci != cj {
                    relax(ci, cj, body_gap(packed.body(i), packed.body(j)), Some(i), Some(j));
                }
            }
        }
        relax(k, k + 1, body_gap(src, dst), None, None);
        for v in 0..size {
            weights[v * size + v] = 0.0;
        }
        Self { size, weights, argmin }
    }

    pub fn vertex_count(&self) -> usize {
        self.size
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.weights[u * self.size + v]
    }

    /// Ball indices realizing the weight of edge `(u, v)`; `None` at a terminal.
    pub fn argmin(&self, u: usize, v: usize) -> (Option<usize>, Option<usize>) {
        self.argmin[u * self.size + v]
    }

    /// Dense label-setting search from the source to the target terminal.
    pub fn shortest_distance(&self) -> f64 {
        let n = self.size;
        let (s, t) = (n - 2, n - 1);
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[s] = 0.0;
        for _ in 0..n {
            let u = (0..n)
                .filter(|&u| !done[u])
                .min_by(|&x, &y| dist[x].total_cmp(&dist[y]))
                .expect("unsettled vertex");
            done[u] = true;
            if u == t {
                break;
            }
            for v in 0..n {
                let w = self.weight(u, v);
                if !done[v] && dist[u] + w < dist[v] {
                    dist[v] = dist[u] + w;
                }
            }
        }
        dist[t]
    }
}
